#pragma once

#include "elastoform/calculus.hpp"

namespace elastoform {

// Integral of a top-form. Spatial forms live in pulled-back sampling, so their
// density is pulled back by det F before quadrature over the body chart.
inline double integrate(const Form& top, const Context& ctx) {
    if (top.degree != 3 || top.kind != ValueKind::scalar) throw ConfigError("integrate expects a scalar 3-form");
    if (top.rep != Rep::spatial) return integrate_interior(top.c);
    Field d = top.c;
    for (std::size_t p = 0; p < d.nodes(); ++p) d.v[p] *= ctx.cfg->detF.v[p];
    return integrate_interior(d);
}

inline double duality_pairing(const Form& X, const Form& zeta, const Context& ctx) {
    if (zeta.degree + X.degree != 3) throw ConfigError("duality pairing needs complementary degrees");
    return integrate(wedge_dot(zeta, X), ctx);
}

// Mass forms are scalar 3-pseudo-forms; only their chart density is stored.
inline Form mass_form(const Field& density, Rep rep) { return scalar_form(density, 3, rep, Parity::pseudo); }

// mu_t = phi_* mu^: in pulled-back sampling the chart density is divided by det F.
inline Form spatial_mass_form(const Form& mu_hat, const Configuration& c) {
    Form mu = mu_hat;
    mu.rep = Rep::spatial;
    mu.over.reset();
    for (std::size_t p = 0; p < mu.nodes(); ++p) mu.c.v[p] /= c.detF.v[p];
    return mu;
}

inline Field density_from_form(const Form& m, const VolumePseudoForm& omega) {
    Field rho(m.grid(), 1);
    for (std::size_t p = 0; p < rho.nodes(); ++p) {
        const double w = omega.density.v[p];
        if (!(w > 0.0)) throw GeometryError("zero volume density", p);
        rho.v[p] = m.c.v[p] / w;
    }
    return rho;
}

struct Densities {
    Field rho;        // spatial, pulled-back sampling
    Field rho_hat;    // convective
    Field rho_tilde;  // material
};

inline Densities densities(const Context& ctx) {
    return {density_from_form(mass_form(ctx.mu_s, Rep::spatial), volume_form(ctx.g_tilde)),
            density_from_form(mass_form(ctx.mu_hat, Rep::convective), volume_form(ctx.g_hat)),
            density_from_form(mass_form(ctx.mu_hat, Rep::material), volume_form(ctx.G))};
}

// Metrics and mass density used by the Hodge stars of one representation.
struct HodgeData {
    const MetricField* value_metric;
    const MetricField* form_metric;
    const Field* mu;
};

inline HodgeData hodge_data(Rep rep, const Context& ctx) {
    switch (rep) {
        case Rep::spatial: return {&ctx.g_tilde, &ctx.g_tilde, &ctx.mu_s};
        case Rep::material: return {&ctx.g_tilde, &ctx.G, &ctx.mu_hat};
        case Rep::convective: return {&ctx.g_hat, &ctx.g_hat, &ctx.mu_hat};
        default: throw RepresentationError("no Hodge star for the reference representation");
    }
}

inline Form star_flat(const Form& zeta, const Context& ctx) {
    const HodgeData h = hodge_data(zeta.rep, ctx);
    return hodge_flat(zeta, *h.value_metric, *h.form_metric, *h.mu);
}

inline Form star_sharp(const Form& X, const Context& ctx) {
    const HodgeData h = hodge_data(X.rep, ctx);
    return hodge_sharp(X, *h.value_metric, *h.form_metric, *h.mu);
}

// M = star_flat v in the velocity's representation.
inline Form momentum_from_velocity(const Form& v, const Context& ctx) {
    Form m = star_flat(v, ctx);
    if (v.rep == Rep::material) m.over = ctx.cfg;
    return m;
}

inline Form velocity_from_momentum(const Form& M, const Context& ctx) { return star_sharp(M, ctx); }

// E_kin = integral of 1/2 v wedge-dot M.
inline double kinetic_energy(const Form& v, const Form& M, const Context& ctx) {
    return 0.5 * duality_pairing(M, v, ctx);
}

// Divergence of a vector field in the given representation.
inline Field vector_divergence(const Field& v, Rep rep, const Context& ctx) {
    const Connection conn = connection_for(rep, ctx);
    return divergence(v, {{true, conn.value_leg()}}, conn, 0);
}

inline Field lie_derivative_scalar(const Field& v, const Field& f, const Field* Finv) {
    const Field d = frame_gradient(f, Finv);
    Field out(f.grid, 1);
    for (std::size_t p = 0; p < out.nodes(); ++p)
        for (int j = 0; j < 3; ++j) out.v[p] += v(p, j) * d(p, j);
    return out;
}

struct MassStructure {
    MetricField G;
    Field mu_hat;
};

// Body mass form mu^ = rho~ omega_G with constant material density.
inline MassStructure mass_structure(const MetricField& G, double rho_tilde = 1.0) {
    MassStructure ms{G, G.sqrt_det};
    ms.mu_hat *= rho_tilde;
    return ms;
}

// Residual of mass conservation in one representation at time t, with time
// derivatives by central differences of step dt.
//   material:   d_t mu~                                 (mu~ = phi*_f mu_t)
//   convective: d_t rho^ + rho^ div^ v^
//   spatial:    max of |d_t mu + L_v mu| and |d_t rho + L_v rho + rho div v|
inline double mass_conservation_residual(const Motion& m, const GridPtr& grid, const MassStructure& ms, double t,
                                         double dt, Rep rep) {
    auto ctx_at = [&](double s) { return make_context(configure(m, grid, s), ms.G, &ms.mu_hat); };
    const Context cp = ctx_at(t + dt), cm = ctx_at(t - dt), c0 = ctx_at(t);
    const double inv = 0.5 / dt;
    if (rep == Rep::material) {
        auto mat_mass = [&](const Context& c) {
            return pull_form_leg(spatial_mass_form(mass_form(c.mu_hat, Rep::convective), c.c()), c).c;
        };
        return max_abs(inv * (mat_mass(cp) - mat_mass(cm)));
    }
    const Field v = material_velocity(m, grid, t);
    if (rep == Rep::convective) {
        const Field rp = densities(cp).rho_hat, rm = densities(cm).rho_hat, r0 = densities(c0).rho_hat;
        const Field vh = convective_velocity(v, c0.c());
        const Field div = vector_divergence(vh, Rep::convective, c0);
        Field res = inv * (rp - rm);
        for (std::size_t p = 0; p < res.nodes(); ++p) res.v[p] += r0.v[p] * div.v[p];
        return max_abs(res);
    }
    const Field* Finv = &c0.cfg->Finv;
    // d_t at fixed x = d_t at fixed X - v . grad
    Field dmu = inv * (cp.mu_s - cm.mu_s) - lie_derivative_scalar(v, c0.mu_s, Finv);
    const Form mu = mass_form(c0.mu_s, Rep::spatial);
    const Form lie_mu = lie_derivative_form(v, mu, Finv);
    const double r_form = max_abs(dmu + lie_mu.c);

    const Field rho0 = densities(c0).rho;
    const Field lie_rho = lie_derivative_scalar(v, rho0, Finv);
    const Field drho_x = inv * (densities(cp).rho - densities(cm).rho) - lie_rho;
    Field res = drho_x + lie_rho;
    const Field div = vector_divergence(v, Rep::spatial, c0);
    for (std::size_t p = 0; p < res.nodes(); ++p) res.v[p] += rho0.v[p] * div.v[p];
    return std::max(r_form, max_abs(res));
}

struct IncompressibilityResidual {
    double div_convective;
    double dJ_dt;
    double div_spatial;
};

inline IncompressibilityResidual incompressibility_residual(const Motion& m, const GridPtr& grid, double t, double dt,
                                                            const MetricField& G) {
    auto ctx_at = [&](double s) { return make_context(configure(m, grid, s), G); };
    const Context c0 = ctx_at(t), cp = ctx_at(t + dt), cm = ctx_at(t - dt);
    const Field v = material_velocity(m, grid, t);
    IncompressibilityResidual r{};
    r.div_convective = max_abs(vector_divergence(convective_velocity(v, c0.c()), Rep::convective, c0));
    r.dJ_dt = max_abs((0.5 / dt) * (cp.J - cm.J));
    r.div_spatial = max_abs(vector_divergence(v, Rep::spatial, c0));
    return r;
}

}  // namespace elastoform
