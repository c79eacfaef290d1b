#pragma once

#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "elastoform/harness.hpp"

namespace elastoform {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Field files: {shape: [n0, n1, n2, ncomp], resolution: [n0, n1, n2], values}
// with values node-major, node index = i*n1*n2 + j*n2 + k.

inline json field_to_json(const Field& f) {
    const auto n = f.grid->resolution();
    return json{{"shape", {n[0], n[1], n[2], f.ncomp}}, {"resolution", {n[0], n[1], n[2]}}, {"values", f.v}};
}

inline Field field_from_json(const json& j, const GridPtr& grid) {
    if (!j.contains("shape") || !j.contains("values")) throw ConfigError("field file needs 'shape' and 'values'");
    const auto shape = j.at("shape").get<std::vector<int>>();
    if (shape.size() != 4) throw ConfigError("field shape must be [n0, n1, n2, ncomp]");
    const auto n = grid->resolution();
    for (int a = 0; a < 3; ++a)
        if (shape[a] != n[a]) throw ConfigError("field resolution does not match the context grid");
    Field f(grid, shape[3]);
    const auto& vals = j.at("values");
    if (vals.size() != f.v.size()) throw ConfigError("field has " + std::to_string(vals.size()) + " values, expected " +
                                                     std::to_string(f.v.size()));
    for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = vals[i].get<double>();
    return f;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Charts and motions.

inline Vec3 vec3_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("expected a 3-vector");
    return Vec3(v[0], v[1], v[2]);
}

inline Chart chart_from_json(const json& j) {
    Chart c;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "cartesian") return cartesian_chart();
        if (s == "cylindrical") return cylindrical_chart();
        throw ConfigError("unknown chart '" + s + "'");
    }
    c.coords = coord_system_from_string(j.value("coords", std::string("cartesian")));
    if (j.contains("ranges")) {
        const auto r = j.at("ranges").get<std::vector<std::vector<double>>>();
        if (r.size() != 3) throw ConfigError("chart ranges need three intervals");
        for (int a = 0; a < 3; ++a) {
            if (r[a].size() != 2 || !(r[a][1] > r[a][0])) throw ConfigError("chart range must be [lo, hi] with lo < hi");
            c.ranges[a] = {r[a][0], r[a][1]};
        }
    }
    c.name = j.value("name", c.name);
    return c;
}

inline json chart_to_json(const Chart& c) {
    json r = json::array();
    for (const auto& ab : c.ranges) r.push_back({ab[0], ab[1]});
    return {{"name", c.name}, {"coords", to_string(c.coords)}, {"ranges", r}};
}

inline std::shared_ptr<const PhysicalMotion> physical_motion_from_json(const json& j) {
    const std::string name = j.value("name", std::string("identity"));
    if (name == "identity") return std::make_shared<IdentityMotion>();
    if (name == "dilation") return std::make_shared<DilationMotion>(j.value("rate", 0.5));
    if (name == "shear") return std::make_shared<ShearMotion>(j.value("gamma0", 0.1), j.value("rate", 0.4));
    if (name == "bump") return std::make_shared<BumpMotion>(j.value("amplitude", 0.1), j.value("rate", 0.2));
    if (name == "rigid") {
        std::shared_ptr<const PhysicalMotion> base = std::make_shared<IdentityMotion>();
        if (j.contains("base")) base = physical_motion_from_json(j.at("base"));
        return std::make_shared<RigidMotion>(j.value("omega", 0.8),
                                             j.contains("axis") ? vec3_from_json(j.at("axis")) : Vec3(0, 0, 1),
                                             j.contains("center") ? vec3_from_json(j.at("center")) : Vec3::Zero(),
                                             j.contains("translation") ? vec3_from_json(j.at("translation"))
                                                                       : Vec3::Zero(),
                                             base);
    }
    throw ConfigError("unknown motion '" + name + "'");
}

inline Motion motion_from_json(const json& j, CoordSystem ambient) {
    return Motion(physical_motion_from_json(j), ambient, j.value("name", std::string("identity")));
}

// Conversion context: {chart, resolution, motion, t, analytic_F}.
struct ContextConfig {
    Chart chart;
    int resolution = 9;
    json motion = json{{"name", "identity"}};
    double t = 0.0;
    bool analytic_F = true;
};

inline ContextConfig context_config_from_json(const json& j) {
    ContextConfig s;
    if (j.contains("chart")) s.chart = chart_from_json(j.at("chart"));
    s.resolution = j.value("resolution", s.resolution);
    if (j.contains("motion")) s.motion = j.at("motion");
    s.t = j.value("t", s.t);
    s.analytic_F = j.value("analytic_F", s.analytic_F);
    return s;
}

inline Context build_context(const ContextConfig& s) {
    const GridPtr grid = build_grid(s.chart, s.resolution);
    const Motion m = motion_from_json(s.motion, s.chart.coords);
    return make_context(configure(m, grid, s.t, s.analytic_F), reference_metric(m, grid, 0.0, s.analytic_F));
}

// "rep:weight", e.g. "material:mass".
struct StressTag {
    Rep rep;
    Weight weight;
};

inline StressTag parse_stress_tag(const std::string& tag) {
    const auto colon = tag.find(':');
    if (colon == std::string::npos) throw ConfigError("stress tag '" + tag + "' is not of the form rep:weight");
    const Rep r = rep_from_string(tag.substr(0, colon));
    if (r == Rep::reference) throw ConfigError("stress tag '" + tag + "' names the reference representation");
    return {r, weight_from_string(tag.substr(colon + 1))};
}

inline std::string to_string(const StressTag& t) { return std::string(to_string(t.rep)) + ":" + to_string(t.weight); }

// Payload layout of a stress field in a file: extensive stresses are stored as
// their form components (value-major, slot-minor), the others as 3x3 tensors.
inline StressState stress_from_field(const Field& f, const StressTag& tag, const Context& ctx) {
    if (tag.weight == Weight::extensive) {
        if (f.ncomp != 9) throw ConfigError("extensive stress needs 9 components per node");
        Form T(f.grid, 2, ValueKind::covector, tag.rep, Parity::pseudo);
        T.c = f;
        if (tag.rep == Rep::material) T.over = ctx.cfg;
        return extensive_stress(std::move(T));
    }
    if (f.ncomp != 9) throw ConfigError("stress tensor needs 9 components per node");
    return tensor_stress(f, tag.rep, tag.weight);
}

inline const Field& stress_payload(const StressState& s) { return s.weight == Weight::extensive ? s.T.c : s.tensor; }

// ---------------------------------------------------------------------------
// Simulation scenarios.

enum class InitialVelocity { zero, bump, rigid, random };

struct Scenario {
    Chart chart;
    int resolution = 9;
    ConstitutiveModel model;
    double density = 1.0;
    BoundaryCondition bc = BoundaryCondition::zero_traction;
    Rep representation = Rep::material;
    InitialVelocity initial = InitialVelocity::bump;
    double amplitude = 0.1;
    double omega = 0.0;
    Vec3 axis{0.0, 0.0, 1.0};
    Vec3 center{0.5, 0.5, 0.5};
    Vec3 translation = Vec3::Zero();
    double dt = 0.005;
    double t_end = 1.0;
    std::uint64_t seed = 7;
    double energy_tolerance = 1e-3;
};

inline Scenario scenario_from_json(const json& j) {
    Scenario s;
    if (j.contains("chart")) s.chart = chart_from_json(j.at("chart"));
    s.resolution = j.value("resolution", s.resolution);
    if (j.contains("model")) {
        const json& m = j.at("model");
        s.model.kind = model_kind_from_string(m.value("kind", std::string("svk")));
        s.model.lambda = m.value("lambda", s.model.lambda);
        s.model.mu = m.value("mu", s.model.mu);
    }
    s.model.validate();
    s.density = j.value("density", s.density);
    if (!(s.density > 0.0)) throw ConfigError("density must be positive");
    s.bc = bc_from_string(j.value("bc", std::string(to_string(s.bc))));
    s.representation = rep_from_string(j.value("representation", std::string("material")));
    if (s.representation != Rep::material && s.representation != Rep::convective)
        throw ConfigError("simulation representation must be material or convective");
    if (j.contains("initial")) {
        const json& i = j.at("initial");
        const std::string kind = i.value("velocity", std::string("bump"));
        if (kind == "zero")
            s.initial = InitialVelocity::zero;
        else if (kind == "bump")
            s.initial = InitialVelocity::bump;
        else if (kind == "rigid")
            s.initial = InitialVelocity::rigid;
        else if (kind == "random")
            s.initial = InitialVelocity::random;
        else
            throw ConfigError("unknown initial velocity '" + kind + "'");
        s.amplitude = i.value("amplitude", s.amplitude);
        s.omega = i.value("omega", s.omega);
        if (i.contains("axis")) s.axis = vec3_from_json(i.at("axis"));
        if (i.contains("center")) s.center = vec3_from_json(i.at("center"));
        if (i.contains("translation")) s.translation = vec3_from_json(i.at("translation"));
    }
    s.dt = j.value("dt", s.dt);
    s.t_end = j.value("t_end", s.t_end);
    if (!(s.dt > 0.0) || !(s.t_end >= 0.0)) throw ConfigError("dt must be positive and t_end non-negative");
    s.seed = j.value("seed", s.seed);
    s.energy_tolerance = j.value("energy_tolerance", s.energy_tolerance);
    return s;
}

// Initial material velocity in ambient chart components at the reference
// placement phi = X.
inline Field initial_velocity(const Scenario& s, const GridPtr& grid) {
    if (s.initial == InitialVelocity::random) return SmoothFieldGenerator(s.seed).field(grid, 3, s.amplitude);
    return sample(grid, 3, [&](const Vec3& X, double* out) {
        Vec3 v = Vec3::Zero();
        if (s.initial == InitialVelocity::bump) v = s.amplitude * BumpMotion::u(X);
        if (s.initial == InitialVelocity::rigid) {
            Vec3 x = X;
            if (s.chart.coords == CoordSystem::cylindrical) x = Vec3(X[0] * std::cos(X[1]), X[0] * std::sin(X[1]), X[2]);
            const Vec3 w = s.omega * s.axis.normalized();
            const Vec3 vc = w.cross(x - s.center) + s.translation;
            if (s.chart.coords == CoordSystem::cylindrical) {
                const double c = std::cos(X[1]), sn = std::sin(X[1]);
                v = Vec3(c * vc[0] + sn * vc[1], (-sn * vc[0] + c * vc[1]) / X[0], vc[2]);
            } else {
                v = vc;
            }
        }
        Eigen::Map<Vec3>{out} = v;
    });
}

// ---------------------------------------------------------------------------
// Trajectory CSV.

struct TrajectoryRow {
    double t = 0.0;
    double e_kin = 0.0;
    double e_int = 0.0;
    double boundary_power = 0.0;
    double energy_residual = std::nan("");
    double mass_residual = std::nan("");
    double min_detF = 0.0;
    double dgdt_norm = std::nan("");
};

inline void write_trajectory_header(std::ostream& os) {
    os << "t,e_kin,e_int,boundary_power,energy_residual,mass_residual,min_detF,dgdt_norm\n";
}

inline void write_trajectory_row(std::ostream& os, const TrajectoryRow& r) {
    auto put = [&](double x) {
        if (std::isnan(x))
            os << "nan";
        else
            os << x;
    };
    os.precision(12);
    put(r.t);
    for (double x : {r.e_kin, r.e_int, r.boundary_power, r.energy_residual, r.mass_residual, r.min_detF, r.dgdt_norm}) {
        os << ',';
        put(x);
    }
    os << '\n';
}

// ---------------------------------------------------------------------------
// Suite reports.

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json check_result_to_json(const CheckResult& r) {
    json res = json::array(), tol = json::array();
    for (double x : r.residuals) res.push_back(number_or_null(x));
    for (double x : r.tolerances) tol.push_back(number_or_null(x));
    bool within = r.residuals.size() == r.tolerances.size();
    for (std::size_t i = 0; within && i < r.residuals.size(); ++i) within = r.residuals[i] <= r.tolerances[i];
    return {{"name", r.id},
            {"criterion", r.criterion},
            {"description", r.description},
            {"resolutions", r.resolutions},
            {"residual", res},
            {"tolerance", tol},
            {"within_tolerance", within},
            {"order", r.exact ? json("exact") : number_or_null(r.order)},
            {"pass", r.pass},
            {"message", r.message}};
}

inline json suite_report_to_json(const SuiteReport& rep, const SuiteOptions& o) {
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back(check_result_to_json(c));
    return {{"seed", o.seed},
            {"resolutions", o.resolutions},
            {"leg_swap", o.leg_swap},
            {"pass", rep.pass()},
            {"checks", checks}};
}

inline SuiteOptions suite_options_from_json(const json& j) {
    SuiteOptions o;
    o.seed = j.value("seed", o.seed);
    o.leg_swap = j.value("leg_swap", o.leg_swap);
    if (j.contains("resolutions")) o.resolutions = j.at("resolutions").get<std::vector<int>>();
    if (o.resolutions.size() != 2) throw ConfigError("verify needs exactly two resolutions");
    for (int n : o.resolutions)
        if (n < 5) throw ConfigError("resolution must be at least 5");
    if (j.contains("checks")) o.only = j.at("checks").get<std::vector<std::string>>();
    return o;
}

}  // namespace elastoform
