// Steppers, simulation driver, JSON/CSV I/O, the check registry and the CLI.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "elastoform/simulation.hpp"

using namespace elastoform;
namespace fs = std::filesystem;

namespace {

const ConstitutiveModel kSvk{ModelKind::svk, 1.0, 1.0};

Scenario short_scenario(Rep rep, int n, double dt, double t_end) {
    Scenario s;
    s.resolution = n;
    s.representation = rep;
    s.model = ConstitutiveModel{ModelKind::neo_hookean, 1.0, 1.0};
    s.dt = dt;
    s.t_end = t_end;
    s.energy_tolerance = 1e300;
    return s;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("elastoform_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Summation by parts

TEST(Sbp, FreeOperatorIsTheNegativeAdjoint) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SmoothFieldGenerator gen(seed);
        const GridPtr g = build_grid(Chart{}, {6, 7, 5});
        const Field u = gen.field(g, 1), f = gen.field(g, 1);
        for (int a = 0; a < 3; ++a) {
            const Field fu = sbp_partial(f, a, true), du = sbp_partial(u, a);
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t p = 0; p < g->size(); ++p) {
                lhs += g->weight(p) * u.v[p] * fu.v[p];
                rhs -= g->weight(p) * du.v[p] * f.v[p];
            }
            EXPECT_NEAR(lhs, rhs, 1e-12) << a;
        }
    }
}

TEST(Sbp, DifferenceIsExactForLinearFields) {
    const GridPtr g = build_grid(Chart{}, 5);
    const Field f = sample_scalar(g, [](const Vec3& x) { return 2.0 * x[0] - x[1] + 3.0 * x[2]; });
    const Field d = sbp_gradient(f);
    for (std::size_t p = 0; p < g->size(); ++p) {
        EXPECT_NEAR(d(p, 0), 2.0, 1e-13);
        EXPECT_NEAR(d(p, 1), -1.0, 1e-13);
        EXPECT_NEAR(d(p, 2), 3.0, 1e-13);
    }
}

// ---------------------------------------------------------------------------
// Material stepper

TEST(Material, EquilibriumStaysAtRest) {
    const GridPtr g = build_grid(Chart{}, 5);
    for (BoundaryCondition bc : {BoundaryCondition::zero_traction, BoundaryCondition::zero_velocity}) {
        const Body b = make_body(g, CoordSystem::cartesian, kSvk, bc);
        MaterialState s = initial_material_state(b, Field(g, 3));
        const Field phi0 = s.phi;
        for (int k = 0; k < 10; ++k) s = step_material(b, s, 0.01);
        EXPECT_LT(max_abs_diff(s.phi, phi0), 1e-14);
        EXPECT_LT(max_abs(s.M), 1e-14);
        EXPECT_NEAR(s.t, 0.1, 1e-14);
    }
}

TEST(Material, UniformTranslationIsFree) {
    // A rigid translation carries no stress: E_kin stays put and phi moves by v t.
    const GridPtr g = build_grid(Chart{}, 5);
    const Body b = make_body(g, CoordSystem::cartesian, kSvk, BoundaryCondition::zero_traction);
    const Vec3 u(0.2, -0.1, 0.05);
    const Field v0 = sample(g, 3, [&](const Vec3&, double* o) { Eigen::Map<Vec3>{o} = u; });
    MaterialState s = initial_material_state(b, v0);
    const double e0 = energy_snapshot(b, s).total();
    for (int k = 0; k < 20; ++k) s = step_material(b, s, 0.01);
    EXPECT_NEAR(energy_snapshot(b, s).total(), e0, 1e-13);
    for (std::size_t p = 0; p < g->size(); ++p) EXPECT_LT((s.phi.vec(p) - g->coord(p) - 0.2 * u).norm(), 1e-13);
}

TEST(Material, EnergyIsConservedWithZeroTraction) {
    const GridPtr g = build_grid(Chart{}, 7);
    const Body b = make_body(g, CoordSystem::cartesian, kSvk, BoundaryCondition::zero_traction);
    const Field v0 = sample(g, 3, [](const Vec3& X, double* o) { Eigen::Map<Vec3>{o} = 0.1 * BumpMotion::u(X); });
    MaterialState s = initial_material_state(b, v0);
    const double e0 = energy_snapshot(b, s).total();
    for (int k = 0; k < 40; ++k) s = step_material(b, s, 0.005);
    EXPECT_GT(e0, 0.0);
    EXPECT_NEAR(energy_snapshot(b, s).total(), e0, 1e-6 * e0);
}

TEST(Material, EnergyReportNeedsIncreasingTimes) {
    EnergySnapshot a, m, c;
    a.t = m.t = c.t = 1.0;
    EXPECT_THROW(energy_report(a, m, c), ConfigError);
}

// ---------------------------------------------------------------------------
// Simulation driver

TEST(Simulation, EquilibriumRowsAreZero) {
    Scenario s = short_scenario(Rep::material, 5, 0.01, 0.05);
    s.initial = InitialVelocity::zero;
    std::ostringstream csv;
    const SimulationSummary sum = run_simulation(s, csv);
    EXPECT_TRUE(sum.stable);
    EXPECT_EQ(sum.steps, 5);
    EXPECT_EQ(sum.e0, 0.0);
    EXPECT_LT(sum.max_energy_residual, 1e-14);
    EXPECT_LT(sum.max_mass_residual, 1e-14);
    EXPECT_LT(sum.max_dgdt, 1e-14);
    EXPECT_NEAR(sum.min_detF, 1.0, 1e-14);
}

TEST(Simulation, CsvShape) {
    Scenario s = short_scenario(Rep::material, 5, 0.01, 0.03);
    std::ostringstream out;
    run_simulation(s, out);
    std::istringstream in(out.str());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0], "t,e_kin,e_int,boundary_power,energy_residual,mass_residual,min_detF,dgdt_norm");
    EXPECT_NE(lines[1].find("nan"), std::string::npos);
    EXPECT_EQ(lines[2].find("nan"), std::string::npos);
    EXPECT_NE(lines[4].find("nan"), std::string::npos);
    for (std::size_t i = 1; i < lines.size(); ++i)
        EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 7) << lines[i];
}

TEST(Simulation, ConvectiveEnergyResidualConverges) {
    // The convective stepper is not mimetic; with zero traction its energy
    // residual must still fall under refinement of space and time.
    std::ostringstream sink;
    const double r9 = run_simulation(short_scenario(Rep::convective, 9, 0.005, 0.1), sink).max_energy_residual;
    const double r17 = run_simulation(short_scenario(Rep::convective, 17, 0.0025, 0.1), sink).max_energy_residual;
    EXPECT_GT(r9, r17);
    EXPECT_GE(r9 / r17, 3.0);
}

TEST(Simulation, RepresentationsAgreeOnSmoothData) {
    std::ostringstream sink;
    Scenario m = short_scenario(Rep::material, 9, 0.005, 0.1);
    m.bc = BoundaryCondition::zero_velocity;
    m.initial = InitialVelocity::random;
    m.amplitude = 0.05;
    Scenario c = m;
    c.representation = Rep::convective;
    const SimulationSummary a = run_simulation(m, sink), b = run_simulation(c, sink);
    ASSERT_TRUE(a.stable && b.stable);
    EXPECT_NEAR(a.e0, b.e0, 1e-12);
    EXPECT_NEAR(a.e_end, b.e_end, 0.05 * a.e0);
}

TEST(Simulation, TranslationKeepsTheMetric) {
    Scenario s = short_scenario(Rep::material, 7, 0.01, 0.1);
    s.initial = InitialVelocity::rigid;
    s.translation = Vec3(0.3, 0.0, -0.2);
    std::ostringstream sink;
    const SimulationSummary sum = run_simulation(s, sink);
    EXPECT_LT(sum.max_dgdt, 1e-12);
    EXPECT_LT(sum.max_energy_residual, 1e-12);
}

TEST(Simulation, SmallRotationKeepsTheMetricNearlyFixed) {
    // Constant omega x (X - c) is only infinitesimally rigid, so d_t g^ grows
    // like omega^2 t; halving omega should cut it by about four.
    auto dgdt = [](double omega) {
        Scenario s = short_scenario(Rep::material, 7, 0.01, 0.1);
        s.initial = InitialVelocity::rigid;
        s.omega = omega;
        std::ostringstream sink;
        return run_simulation(s, sink).max_dgdt;
    };
    const double a = dgdt(0.2), b = dgdt(0.1);
    EXPECT_LT(a, 0.05);
    EXPECT_GT(a / b, 3.0);
}

TEST(Simulation, InstabilityIsReported) {
    Scenario s = short_scenario(Rep::material, 5, 0.5, 20.0);
    s.amplitude = 5.0;
    std::ostringstream sink;
    const SimulationSummary sum = run_simulation(s, sink);
    EXPECT_FALSE(sum.stable);
    EXPECT_FALSE(sum.message.empty());
}

// ---------------------------------------------------------------------------
// I/O

TEST(Io, FieldJsonRoundTrip) {
    const GridPtr g = build_grid(Chart{}, {5, 6, 7});
    const Field f = SmoothFieldGenerator(1).field(g, 4);
    const json j = field_to_json(f);
    EXPECT_EQ(j.at("shape"), json({5, 6, 7, 4}));
    EXPECT_EQ(field_from_json(j, g).v, f.v);
    json bad = j;
    bad["shape"][0] = 6;
    EXPECT_THROW(field_from_json(bad, g), ConfigError);
    bad = j;
    bad["values"].erase(0);
    EXPECT_THROW(field_from_json(bad, g), ConfigError);
}

TEST(Io, Charts) {
    EXPECT_EQ(chart_from_json("cylindrical").coords, CoordSystem::cylindrical);
    const Chart c = chart_from_json(json{{"coords", "cartesian"}, {"ranges", {{0, 2}, {0, 1}, {-1, 1}}}, {"name", "slab"}});
    EXPECT_EQ(c.name, "slab");
    EXPECT_DOUBLE_EQ(c.ranges[0][1], 2.0);
    EXPECT_EQ(chart_from_json(chart_to_json(c)).ranges, c.ranges);
    EXPECT_THROW(chart_from_json("spherical"), ConfigError);
}

TEST(Io, Motions) {
    const Motion m = motion_from_json(json{{"name", "dilation"}, {"rate", 0.5}}, CoordSystem::cartesian);
    EXPECT_LT((m.phi(Vec3(1, 2, 3), 2.0) - Vec3(2, 4, 6)).norm(), 1e-15);
    EXPECT_THROW(physical_motion_from_json(json{{"name", "twist"}}), ConfigError);
}

TEST(Io, StressTags) {
    const StressTag t = parse_stress_tag("material:mass");
    EXPECT_EQ(t.rep, Rep::material);
    EXPECT_EQ(t.weight, Weight::mass);
    EXPECT_EQ(to_string(t), "material:mass");
    EXPECT_THROW(parse_stress_tag("spatial"), ConfigError);
    EXPECT_THROW(parse_stress_tag("reference:mass"), ConfigError);
    EXPECT_THROW(parse_stress_tag("spatial:heavy"), ConfigError);
    EXPECT_THROW(parse_stress_tag("lagrangian:bare"), ConfigError);
}

TEST(Io, ConversionOnTheIdentityContextKeepsTensors) {
    // With F = I and unit density the spatial, material and convective
    // mass-weighted tensors coincide.
    const Context ctx = build_context(context_config_from_json(json{{"resolution", 5}}));
    const Field f = SmoothFieldGenerator(2).symmetric(ctx.grid());
    const StressState s = stress_from_field(f, parse_stress_tag("spatial:mass"), ctx);
    for (const char* to : {"material:mass", "convective:mass", "spatial:mass"}) {
        const StressTag dst = parse_stress_tag(to);
        EXPECT_LT(max_abs_diff(stress_payload(stress_web_convert(s, dst.rep, dst.weight, ctx)), f), 1e-13) << to;
    }
}

TEST(Io, ScenarioParsing) {
    const Scenario s = scenario_from_json(json{{"chart", "cylindrical"},
                                               {"resolution", 7},
                                               {"model", {{"kind", "neo_hookean"}, {"lambda", 2.0}, {"mu", 0.5}}},
                                               {"representation", "convective"},
                                               {"bc", "zero_velocity"},
                                               {"initial", {{"velocity", "random"}, {"amplitude", 0.2}}},
                                               {"dt", 0.001},
                                               {"t_end", 0.01}});
    EXPECT_EQ(s.chart.coords, CoordSystem::cylindrical);
    EXPECT_EQ(s.model.kind, ModelKind::neo_hookean);
    EXPECT_DOUBLE_EQ(s.model.mu, 0.5);
    EXPECT_EQ(s.representation, Rep::convective);
    EXPECT_EQ(s.bc, BoundaryCondition::zero_velocity);
    EXPECT_EQ(s.initial, InitialVelocity::random);

    EXPECT_THROW(scenario_from_json(json{{"model", {{"mu", -1.0}}}}), ConfigError);
    EXPECT_THROW(scenario_from_json(json{{"representation", "spatial"}}), ConfigError);
    EXPECT_THROW(scenario_from_json(json{{"bc", "mixed"}}), ConfigError);
    EXPECT_THROW(scenario_from_json(json{{"dt", 0.0}}), ConfigError);
    EXPECT_THROW(scenario_from_json(json{{"initial", {{"velocity", "swirl"}}}}), ConfigError);
    EXPECT_THROW(scenario_from_json(json{{"density", 0.0}}), ConfigError);
}

TEST(Io, RigidInitialVelocityInCylindricalComponents) {
    // Rotation about the z axis through the origin is v = omega d_theta.
    Scenario s;
    s.chart = chart_from_json("cylindrical");
    s.chart.ranges = {{{1.0, 2.0}, {0.0, 1.0}, {0.0, 1.0}}};
    s.initial = InitialVelocity::rigid;
    s.omega = 0.7;
    s.center = Vec3::Zero();
    const GridPtr g = build_grid(s.chart, 5);
    const Field v = initial_velocity(s, g);
    for (std::size_t p = 0; p < g->size(); ++p) EXPECT_LT((v.vec(p) - Vec3(0.0, 0.7, 0.0)).norm(), 1e-14);
}

TEST(Io, RandomInitialVelocityIsSeeded) {
    Scenario s;
    s.initial = InitialVelocity::random;
    const GridPtr g = build_grid(s.chart, 5);
    const Field a = initial_velocity(s, g);
    EXPECT_EQ(initial_velocity(s, g).v, a.v);
    s.seed = 8;
    EXPECT_NE(initial_velocity(s, g).v, a.v);
}

TEST(Io, SuiteOptions) {
    const SuiteOptions o = suite_options_from_json(json{{"seed", 3}, {"resolutions", {7, 13}}});
    EXPECT_EQ(o.seed, 3u);
    EXPECT_EQ(o.resolutions, (std::vector<int>{7, 13}));
    EXPECT_THROW(suite_options_from_json(json{{"resolutions", {9}}}), ConfigError);
    EXPECT_THROW(suite_options_from_json(json{{"resolutions", {3, 9}}}), ConfigError);
}

TEST(Io, MissingFile) { EXPECT_THROW(read_json_file("/nonexistent/elastoform.json"), ConfigError); }

// ---------------------------------------------------------------------------
// Check registry

TEST(Registry, ManifestCoversEveryCheckOnce) {
    const auto checks = identity_checks();
    std::set<std::string> ids;
    std::set<int> criteria;
    for (const auto& c : checks) {
        EXPECT_TRUE(ids.insert(c.id).second) << "duplicate " << c.id;
        criteria.insert(c.criterion);
        EXPECT_FALSE(c.description.empty());
        EXPECT_GT(c.C, 0.0);
    }
    for (int k = 1; k <= 14; ++k) EXPECT_TRUE(criteria.count(k)) << "criterion " << k;
    std::multiset<std::string> listed;
    for (const auto& e : identity_manifest()) listed.insert(e.checks.begin(), e.checks.end());
    for (const auto& id : ids) EXPECT_EQ(listed.count(id), 1u) << id;
    EXPECT_EQ(listed.size(), ids.size());
}

TEST(Registry, ToleranceScaling) {
    Check c;
    c.C = 2.0;
    c.p = 2;
    EXPECT_DOUBLE_EQ(check_tolerance(c, 9), 2.0 / 64.0);
    c.p = 0;
    EXPECT_DOUBLE_EQ(check_tolerance(c, 9), 2.0);
}

TEST(Registry, OrderRuleAndExceptions) {
    SuiteOptions o;
    Check c{"synthetic", 1, "first-order residual", 10.0, 2, true,
            [](int n, const SuiteOptions&) { return 1.0 / (n - 1); }};
    CheckResult r = run_check(c, o);
    EXPECT_FALSE(r.pass);
    EXPECT_NEAR(r.order, 1.0, 1e-12);

    c.run = [](int n, const SuiteOptions&) { return 0.5 / ((n - 1.0) * (n - 1.0)); };
    r = run_check(c, o);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.order, 2.0, 1e-12);

    c.run = [](int, const SuiteOptions&) -> double { throw GeometryError("bad metric", 4); };
    r = run_check(c, o);
    EXPECT_FALSE(r.pass);
    EXPECT_NE(r.message.find("node 4"), std::string::npos);

    c.run = [](int, const SuiteOptions&) { return 0.0; };
    r = run_check(c, o);
    EXPECT_TRUE(r.pass && r.exact);
}

TEST(Registry, LegSwapBreaksTheVelocitySplit) {
    SuiteOptions o;
    o.only = {"velocity_split_spatial_cartesian", "velocity_split_convective_cylindrical"};
    EXPECT_TRUE(run_identity_suite(o).pass());
    o.leg_swap = true;
    const SuiteReport rep = run_identity_suite(o);
    ASSERT_EQ(rep.checks.size(), 2u);
    for (const auto& r : rep.checks) EXPECT_FALSE(r.pass) << r.id;
}

TEST(Registry, ReportJson) {
    SuiteOptions o;
    o.only = {"hodge_roundtrip"};
    const json j = suite_report_to_json(run_identity_suite(o), o);
    ASSERT_EQ(j.at("checks").size(), 1u);
    const json& c = j.at("checks")[0];
    EXPECT_EQ(c.at("name"), "hodge_roundtrip");
    EXPECT_EQ(c.at("order"), "exact");
    EXPECT_TRUE(c.at("pass").get<bool>());
}

TEST(Generator, IsDeterministic) {
    const GridPtr g = build_grid(Chart{}, 5);
    EXPECT_EQ(SmoothFieldGenerator(42).field(g, 3).v, SmoothFieldGenerator(42).field(g, 3).v);
    EXPECT_NE(SmoothFieldGenerator(42).field(g, 3).v, SmoothFieldGenerator(43).field(g, 3).v);
    SmoothFieldGenerator gen(1);
    for (int k = 0; k < 50; ++k) {
        Eigen::SelfAdjointEigenSolver<Mat3> es(gen.spd_matrix());
        EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-12);
    }
}

// ---------------------------------------------------------------------------
// Command line

#ifdef ELASTOFORM_CLI_PATH

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ELASTOFORM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("simulate"), 2);
    EXPECT_EQ(run_cli("verify --check no_such_check --out " + scratch_dir("usage").string()), 2);
    EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, SimulateWritesOutputs) {
    const fs::path d = scratch_dir("simulate");
    write_file(d / "scenario.json", R"({"resolution": 5, "dt": 0.01, "t_end": 0.05})");
    EXPECT_EQ(run_cli("simulate --config " + (d / "scenario.json").string() + " --out " + (d / "out").string()), 0);
    EXPECT_TRUE(fs::exists(d / "out" / "trajectory.csv"));
    const json rep = read_json_file((d / "out" / "report.json").string());
    EXPECT_EQ(rep.at("steps"), 5);
    EXPECT_TRUE(rep.at("stable").get<bool>());
}

TEST(Cli, SimulateExitCodes) {
    const fs::path d = scratch_dir("exitcodes");
    write_file(d / "bad.json", R"({"model": {"kind": "svk", "mu": 0}})");
    EXPECT_EQ(run_cli("simulate --config " + (d / "bad.json").string() + " --out " + d.string()), 2);
    write_file(d / "tight.json",
               R"({"resolution": 5, "representation": "convective", "dt": 0.01, "t_end": 0.05, "energy_tolerance": 1e-14})");
    EXPECT_EQ(run_cli("simulate --config " + (d / "tight.json").string() + " --out " + d.string()), 4);
    write_file(d / "blowup.json", R"({"resolution": 5, "dt": 0.5, "t_end": 20, "initial": {"amplitude": 5}})");
    EXPECT_EQ(run_cli("simulate --config " + (d / "blowup.json").string() + " --out " + d.string()), 3);
}

TEST(Cli, VerifySubset) {
    const fs::path d = scratch_dir("verify");
    EXPECT_EQ(run_cli("verify --check hodge_roundtrip --check stress_web_closure --out " + d.string()), 0);
    EXPECT_EQ(read_json_file((d / "report.json").string()).at("checks").size(), 2u);
    EXPECT_EQ(run_cli("verify --leg-swap --check velocity_split_spatial_cartesian --out " + d.string()), 1);
}

TEST(Cli, ConvertRoundTrip) {
    const fs::path d = scratch_dir("convert");
    write_file(d / "ctx.json", R"({"chart": "cylindrical", "resolution": 5, "motion": {"name": "bump", "amplitude": 0.05, "rate": 0.0}})");
    const Context ctx = build_context(context_config_from_json(read_json_file((d / "ctx.json").string())));
    const Field f = SmoothFieldGenerator(5).symmetric(ctx.grid());
    write_json_file((d / "in.json").string(), json{{"tag", "spatial:mass"}, {"field", field_to_json(f)}});
    const std::string common = " --config " + (d / "ctx.json").string();
    ASSERT_EQ(run_cli("convert" + common + " --in " + (d / "in.json").string() +
                      " --from spatial:mass --to convective:extensive --out " + (d / "a").string()),
              0);
    ASSERT_EQ(run_cli("convert" + common + " --in " + (d / "a" / "converted.json").string() +
                      " --from convective:extensive --to spatial:mass --out " + (d / "b").string()),
              0);
    const json back = read_json_file((d / "b" / "converted.json").string());
    EXPECT_EQ(back.at("tag"), "spatial:mass");
    EXPECT_LT(max_abs_diff(field_from_json(back.at("field"), ctx.grid()), f), 1e-9);
    EXPECT_EQ(run_cli("convert" + common + " --in " + (d / "in.json").string() +
                      " --from material:mass --to spatial:mass --out " + d.string()),
              2);
}

#endif
