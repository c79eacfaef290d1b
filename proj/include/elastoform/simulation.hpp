#pragma once

#include <cmath>
#include <deque>
#include <ostream>

#include "elastoform/io.hpp"

namespace elastoform {

struct SimulationSummary {
    long steps = 0;
    double t_end = 0.0;
    double e0 = 0.0;
    double e_end = 0.0;
    double max_energy_residual = 0.0;  // relative to e0 when e0 > 0
    double max_mass_residual = 0.0;
    double max_dgdt = 0.0;
    double min_detF = 0.0;
    bool energy_ok = true;
    bool stable = true;
    std::string message;
};

namespace detail {

// Per-step quantities needed for the central-difference diagnostics.
struct Sample {
    EnergySnapshot snap;
    Field g_hat;    // 9 comps
    Field rho_hat;  // mu^ / sqrt det g^
    Field div_v;    // div^ v^
};

inline Field convective_divergence(const Field& vh, const MetricField& g) {
    const Field dv = gradient(vh);              // (a*3 + c) = d_a v^c
    const Field dl = gradient(g.sqrt_det);      // d_a sqrt g
    Field out(vh.grid, 1);
    for (std::size_t p = 0; p < out.nodes(); ++p) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) s += dv(p, a * 3 + a) + vh(p, a) * dl(p, a) / g.sqrt_det.v[p];
        out.v[p] = s;
    }
    return out;
}

// Same quantity for the material stepper, differenced with the D that built F
// so that d_t sqrt g^ = sqrt g^ div^ v^ holds up to time discretization.
// sqrt g^ = sqrt g(phi) det F; the ambient factor adds v^r / r in cylindrical.
inline Field sbp_convective_divergence(const Field& v, const Configuration& c, CoordSystem ambient) {
    const Field d = sbp_gradient(v);  // (I*3 + i) = D_I v^i
    Field out(v.grid, 1);
    for (std::size_t p = 0; p < out.nodes(); ++p) {
        double s = 0.0;
        for (int k = 0; k < 9; ++k) s += c.Finv(p, k) * d(p, k);
        if (ambient == CoordSystem::cylindrical) s += v(p, 0) / c.phi(p, 0);
        out.v[p] = s;
    }
    return out;
}

inline Sample make_sample(const EnergySnapshot& snap, const MetricField& gh, Field div_v, const Field& mu_hat) {
    Sample s{snap, gh.g, Field(gh.g.grid, 1), std::move(div_v)};
    for (std::size_t p = 0; p < s.rho_hat.nodes(); ++p) s.rho_hat.v[p] = mu_hat.v[p] / gh.sqrt_det.v[p];
    return s;
}

inline void require_finite(const EnergySnapshot& e, long step) {
    if (!std::isfinite(e.total())) throw InstabilityError("non-finite energy", step);
    if (!(e.min_detF > 0.0)) throw InstabilityError("inverted element (min det F = " + std::to_string(e.min_detF) + ")",
                                                    step);
}

}  // namespace detail

// Runs a scenario and streams one CSV row per step. Energy and mass
// residuals use central differences and are NaN on the first and last rows.
inline SimulationSummary run_simulation(const Scenario& sc, std::ostream& csv) {
    const GridPtr grid = build_grid(sc.chart, sc.resolution);
    const Body b = make_body(grid, sc.chart.coords, sc.model, sc.bc, sc.density);
    const Field v0 = initial_velocity(sc, grid);
    const long steps = std::lround(sc.t_end / sc.dt);
    const double dt = steps > 0 ? sc.t_end / steps : sc.dt;

    SimulationSummary sum;
    sum.steps = steps;
    sum.min_detF = 1e300;
    write_trajectory_header(csv);

    std::deque<detail::Sample> win;
    auto emit = [&](std::size_t k, bool central) {
        const detail::Sample& s = win[k];
        TrajectoryRow r;
        r.t = s.snap.t;
        r.e_kin = s.snap.e_kin;
        r.e_int = s.snap.e_int;
        r.boundary_power = s.snap.boundary_power;
        r.min_detF = s.snap.min_detF;
        if (central) {
            const detail::Sample &a = win[k - 1], &c = win[k + 1];
            const double scale = sum.e0 > 0.0 ? sum.e0 : 1.0;
            r.energy_residual = energy_report(a.snap, s.snap, c.snap).residual / scale;
            const double inv = 0.5 / dt;
            double mr = 0.0, dg = 0.0;
            for (std::size_t p = 0; p < s.rho_hat.nodes(); ++p)
                mr = std::max(mr, std::abs(inv * (c.rho_hat.v[p] - a.rho_hat.v[p]) + s.rho_hat.v[p] * s.div_v.v[p]));
            for (std::size_t i = 0; i < s.g_hat.v.size(); ++i) dg = std::max(dg, std::abs(inv * (c.g_hat.v[i] - a.g_hat.v[i])));
            r.mass_residual = mr;
            r.dgdt_norm = dg;
            sum.max_energy_residual = std::max(sum.max_energy_residual, r.energy_residual);
            sum.max_mass_residual = std::max(sum.max_mass_residual, mr);
            sum.max_dgdt = std::max(sum.max_dgdt, dg);
        }
        sum.min_detF = std::min(sum.min_detF, r.min_detF);
        write_trajectory_row(csv, r);
    };
    auto push = [&](detail::Sample s, long step) {
        detail::require_finite(s.snap, step);
        win.push_back(std::move(s));
        if (win.size() == 1) {
            sum.e0 = win[0].snap.total();
            if (steps == 0) emit(0, false);
        } else if (win.size() == 2) {
            emit(0, false);
        } else {
            emit(1, true);
            win.pop_front();
        }
    };

    try {
        if (sc.representation == Rep::material) {
            MaterialState s = initial_material_state(b, v0);
            for (long k = 0; k <= steps; ++k) {
                if (k > 0) s = step_material(b, s, dt);
                const MaterialEval e = evaluate_material(b, s);
                push(detail::make_sample(energy_snapshot(b, e, s), e.ctx.g_hat,
                                         detail::sbp_convective_divergence(e.v, e.ctx.c(), b.ambient), b.mu_hat),
                     k);
            }
        } else {
            ConvectiveState s = initial_convective_state(b, v0);
            for (long k = 0; k <= steps; ++k) {
                if (k > 0) s = step_convective(b, s, dt);
                const ConvectiveEval e = evaluate_convective(b, s);
                push(detail::make_sample(energy_snapshot(b, s), s.g_hat, detail::convective_divergence(e.v, s.g_hat),
                                         b.mu_hat),
                     k);
            }
        }
        if (win.size() >= 2) emit(win.size() - 1, false);
        sum.e_end = win.back().snap.total();
        sum.t_end = win.back().snap.t;
    } catch (const InstabilityError& e) {
        sum.stable = false;
        sum.message = e.what();
    } catch (const NodeError& e) {
        sum.stable = false;
        sum.message = e.what();
    }
    sum.energy_ok = sum.max_energy_residual <= sc.energy_tolerance;
    if (sum.stable && !sum.energy_ok)
        sum.message = "energy residual " + std::to_string(sum.max_energy_residual) + " above tolerance " +
                      std::to_string(sc.energy_tolerance);
    return sum;
}

inline json simulation_summary_to_json(const SimulationSummary& s) {
    return {{"steps", s.steps},
            {"t_end", s.t_end},
            {"e0", s.e0},
            {"e_end", s.e_end},
            {"max_energy_residual", s.max_energy_residual},
            {"max_mass_residual", s.max_mass_residual},
            {"max_dgdt", s.max_dgdt},
            {"min_detF", s.min_detF},
            {"stable", s.stable},
            {"energy_ok", s.energy_ok},
            {"message", s.message}};
}

}  // namespace elastoform
