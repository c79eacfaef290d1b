// elastoform: identity verification, simulation and stress-field conversion.
//
// Exit status: 0 ok, 1 verification failure, 2 usage or configuration error,
// 3 numerical instability, 4 energy residual above the scenario threshold.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "elastoform/simulation.hpp"

namespace fs = std::filesystem;
using namespace elastoform;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    int resolution = 0;
    long long seed = -1;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
    auto* opt = app->add_option("--config", c.config, "JSON configuration file");
    if (config_required) opt->required();
    app->add_option("--out", c.out, "output directory")->capture_default_str();
    app->add_option("--resolution", c.resolution, "grid nodes per axis (overrides the config)")
        ->check(CLI::Range(5, 1025));
    app->add_option("--seed", c.seed, "random seed (overrides the config)")->check(CLI::NonNegativeNumber);
}

json load_config(const Common& c) { return c.config.empty() ? json::object() : read_json_file(c.config); }

fs::path prepare_out(const Common& c) {
    fs::path dir(c.out);
    fs::create_directories(dir);
    return dir;
}

int run_verify(const Common& c, bool leg_swap, const std::vector<std::string>& only) {
    SuiteOptions o = suite_options_from_json(load_config(c));
    if (c.resolution > 0) o.resolutions = {c.resolution, 2 * c.resolution - 1};
    if (c.seed >= 0) o.seed = static_cast<std::uint64_t>(c.seed);
    if (leg_swap) o.leg_swap = true;
    if (!only.empty()) o.only = only;
    const auto known = identity_checks();
    for (const auto& id : o.only)
        if (std::none_of(known.begin(), known.end(), [&](const Check& k) { return k.id == id; }))
            throw ConfigError("unknown check '" + id + "'");
    const fs::path dir = prepare_out(c);
    const SuiteReport rep = run_identity_suite(o, [](const CheckResult& r) {
        std::printf("%-4s %-40s", r.pass ? "PASS" : "FAIL", r.id.c_str());
        for (std::size_t i = 0; i < r.residuals.size(); ++i)
            std::printf("  N=%d r=%.3e tol=%.3e", r.resolutions[i], r.residuals[i], r.tolerances[i]);
        if (r.exact)
            std::printf("  order=exact");
        else if (std::isfinite(r.order))
            std::printf("  order=%.2f", r.order);
        if (!r.message.empty()) std::printf("  (%s)", r.message.c_str());
        std::printf("\n");
        std::fflush(stdout);
    });
    write_json_file((dir / "report.json").string(), suite_report_to_json(rep, o));
    std::printf("%s: %zu checks, report written to %s\n", rep.pass() ? "PASS" : "FAIL", rep.checks.size(),
                (dir / "report.json").string().c_str());
    return rep.pass() ? 0 : 1;
}

int run_simulate(const Common& c) {
    Scenario sc = scenario_from_json(load_config(c));
    if (c.resolution > 0) sc.resolution = c.resolution;
    if (c.seed >= 0) sc.seed = static_cast<std::uint64_t>(c.seed);
    const fs::path dir = prepare_out(c);
    std::ofstream csv(dir / "trajectory.csv");
    if (!csv) throw ConfigError("cannot write trajectory.csv");
    const auto t0 = std::chrono::steady_clock::now();
    const SimulationSummary s = run_simulation(sc, csv);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json rep = simulation_summary_to_json(s);
    rep["seconds"] = secs;
    rep["energy_tolerance"] = sc.energy_tolerance;
    write_json_file((dir / "report.json").string(), rep);
    std::printf("steps=%ld E0=%.6e E_end=%.6e max_energy_residual=%.3e max_mass_residual=%.3e max_dgdt=%.3e "
                "min_detF=%.4f time=%.1fs\n",
                s.steps, s.e0, s.e_end, s.max_energy_residual, s.max_mass_residual, s.max_dgdt, s.min_detF, secs);
    if (!s.stable) {
        std::fprintf(stderr, "unstable: %s\n", s.message.c_str());
        return 3;
    }
    if (!s.energy_ok) {
        std::fprintf(stderr, "%s\n", s.message.c_str());
        return 4;
    }
    return 0;
}

int run_convert(const Common& c, const std::string& in, const std::string& from, const std::string& to) {
    const StressTag src = parse_stress_tag(from), dst = parse_stress_tag(to);
    ContextConfig context_cfg = context_config_from_json(load_config(c));
    if (c.resolution > 0) context_cfg.resolution = c.resolution;
    const Context ctx = build_context(context_cfg);
    const json input = read_json_file(in);
    const json& fj = input.contains("field") ? input.at("field") : input;
    if (input.contains("tag") && input.at("tag").get<std::string>() != from)
        throw ConfigError("input is tagged '" + input.at("tag").get<std::string>() + "' but --from is '" + from + "'");
    const StressState s = stress_from_field(field_from_json(fj, ctx.grid()), src, ctx);
    const StressState r = stress_web_convert(s, dst.rep, dst.weight, ctx);
    const fs::path dir = prepare_out(c);
    write_json_file((dir / "converted.json").string(), {{"tag", to_string(dst)}, {"field", field_to_json(stress_payload(r))}});
    std::printf("%s -> %s written to %s\n", from.c_str(), to.c_str(), (dir / "converted.json").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometric elastodynamics: identity verification, simulation and stress conversion"};
    app.require_subcommand(1);

    Common vc, sc, cc;
    bool leg_swap = false;
    std::vector<std::string> only;
    auto* verify = app.add_subcommand("verify", "run the identity suite at two resolutions and write report.json");
    add_common(verify, vc, false);
    verify->add_flag("--leg-swap", leg_swap, "transpose nabla v-flat (regression guard, must fail)");
    verify->add_option("--check", only, "run only these check ids");

    auto* simulate = app.add_subcommand("simulate", "run a scenario, write trajectory.csv and report.json");
    add_common(simulate, sc, true);

    std::string in, from, to;
    auto* convert = app.add_subcommand("convert", "convert a stress field between representations and weights");
    add_common(convert, cc, false);
    convert->add_option("--in", in, "input field file")->required()->check(CLI::ExistingFile);
    convert->add_option("--from", from, "source tag rep:weight")->required();
    convert->add_option("--to", to, "target tag rep:weight")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*verify) return run_verify(vc, leg_swap, only);
        if (*simulate) return run_simulate(sc);
        if (*convert) return run_convert(cc, in, from, to);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const RepresentationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: bad configuration: %s\n", e.what());
        return 2;
    } catch (const InstabilityError& e) {
        std::fprintf(stderr, "unstable: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
