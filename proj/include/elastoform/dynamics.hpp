#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "elastoform/stress.hpp"

namespace elastoform {

enum class BoundaryCondition { zero_velocity, zero_traction };

inline BoundaryCondition bc_from_string(const std::string& s) {
    if (s == "zero_velocity") return BoundaryCondition::zero_velocity;
    if (s == "zero_traction") return BoundaryCondition::zero_traction;
    throw ConfigError("unknown boundary condition '" + s + "' (zero_velocity or zero_traction)");
}

inline const char* to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::zero_velocity ? "zero_velocity" : "zero_traction";
}

// ---------------------------------------------------------------------------
// Summation-by-parts difference pair used by the material stepper. With the
// trapezoid weights H, sbp_partial is D (central inside, first-order one-sided
// at the ends) and sbp_partial_free is -H^-1 D^T H, which folds a zero
// boundary flux into its end rows. Hence sum_H u (free f) = -sum_H (D u) f.

inline Field sbp_partial(const Field& f, int axis, bool free_boundary = false) {
    const Grid& g = *f.grid;
    Field out(f.grid, f.ncomp);
    const std::size_t s = g.stride(axis) * f.ncomp;
    const int n = g.n(axis);
    const double h = g.h(axis);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const int i = g.ijk(p)[axis];
        const double* a = f.at(p);
        double* o = out.at(p);
        for (int c = 0; c < f.ncomp; ++c) {
            if (i == 0) o[c] = free_boundary ? (a[c + s] + a[c]) / h : (a[c + s] - a[c]) / h;
            else if (i == n - 1) o[c] = free_boundary ? -(a[c] + a[c - s]) / h : (a[c] - a[c - s]) / h;
            else o[c] = (a[c + s] - a[c - s]) / (2.0 * h);
        }
    }
    return out;
}

inline Field sbp_gradient(const Field& f, bool free_boundary = false) {
    Field out(f.grid, 3 * f.ncomp);
    for (int a = 0; a < 3; ++a) {
        const Field d = sbp_partial(f, a, free_boundary);
        for (std::size_t p = 0; p < f.nodes(); ++p)
            for (int c = 0; c < f.ncomp; ++c) out(p, a * f.ncomp + c) = d(p, c);
    }
    return out;
}

inline Configuration sbp_configuration(Field phi, CoordSystem ambient, double t) {
    const Field d = sbp_gradient(phi);
    Field F(phi.grid, 9);
    for (std::size_t p = 0; p < phi.nodes(); ++p)
        for (int i = 0; i < 3; ++i)
            for (int I = 0; I < 3; ++I) F(p, i * 3 + I) = d(p, I * 3 + i);
    return finish_configuration(std::move(phi), std::move(F), ambient, t);
}

// ---------------------------------------------------------------------------

// Everything time-independent about the body.
struct Body {
    GridPtr grid;
    CoordSystem ambient = CoordSystem::cartesian;
    MetricField G;
    Field mu_hat;
    ConstitutiveModel model;
    BoundaryCondition bc = BoundaryCondition::zero_traction;
};

// Body in its reference placement phi = X, with G the induced metric.
inline Body make_body(const GridPtr& grid, CoordSystem ambient, const ConstitutiveModel& model, BoundaryCondition bc,
                      double rho_tilde = 1.0) {
    model.validate();
    Motion id(std::make_shared<IdentityMotion>(), ambient);
    Body b;
    b.grid = grid;
    b.ambient = ambient;
    b.G = reference_metric(id, grid, 0.0, true);
    b.mu_hat = mass_structure(b.G, rho_tilde).mu_hat;
    b.model = model;
    b.bc = bc;
    return b;
}

inline void zero_on_boundary(Field& f) {
    for (std::size_t p = 0; p < f.nodes(); ++p)
        if (f.grid->on_boundary(p))
            for (int c = 0; c < f.ncomp; ++c) f(p, c) = 0.0;
}

// Zero the face-tangential slot 2 - a of a covector-valued 2-form on the
// faces normal to a: the boundary trace i_f^* T.
inline Form impose_zero_traction(Form T) {
    const Grid& g = *T.grid();
    for (std::size_t p = 0; p < T.nodes(); ++p) {
        const unsigned m = g.face_mask(p);
        for (int a = 0; a < 3; ++a)
            if (m & (3u << (2 * a)))
                for (int i = 0; i < 3; ++i) T(p, i, 2 - a) = 0.0;
    }
    return T;
}

// Material state (phi, M~); M~ stores the chart density M~_i of the
// covector-valued 3-pseudo-form.
struct MaterialState {
    Field phi;
    Field M;
    double t = 0.0;
};

struct MaterialEval {
    Context ctx;
    Field v;       // v~ = star~-sharp M~
    StressState T; // material extensive stress
    Form dT;       // d~_nabla T~
    Field dphi;
    Field dM;
};

inline Form material_momentum_form(const Field& M, const Context& ctx) {
    Form f(M.grid, 3, ValueKind::covector, Rep::material, Parity::pseudo);
    f.c = M;
    f.over = ctx.cfg;
    return f;
}

inline MaterialEval evaluate_material(const Body& b, const MaterialState& s) {
    MaterialEval e;
    e.ctx = make_context(sbp_configuration(s.phi, b.ambient, s.t), b.G, &b.mu_hat);
    e.v = velocity_from_momentum(material_momentum_form(s.M, e.ctx), e.ctx).c;
    if (b.bc == BoundaryCondition::zero_velocity) zero_on_boundary(e.v);
    e.T = stress_web_convert(rougee_stress(b.model, e.ctx), Rep::material, Weight::extensive, e.ctx);
    const bool free_boundary = b.bc == BoundaryCondition::zero_traction;
    e.dT = exterior_covariant_derivative(e.T.T, material_connection(e.ctx), sbp_gradient(e.T.T.c, free_boundary));
    e.dphi = e.v;
    e.dM = e.dT.c;
    // d_t M~_i = D_t M~_i + Gamma^k_ji v~^j M~_k
    for (std::size_t p = 0; p < e.dM.nodes(); ++p) {
        const double* gs = e.ctx.gamma_s.at(p);
        for (int i = 0; i < 3; ++i) {
            double acc = 0.0;
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) acc += gs[k * 9 + j * 3 + i] * e.v(p, j) * s.M(p, k);
            e.dM(p, i) += acc;
        }
    }
    if (b.bc == BoundaryCondition::zero_velocity) zero_on_boundary(e.dM);
    return e;
}

// Initial material state at the reference placement with velocity v0.
inline MaterialState initial_material_state(const Body& b, const Field& v0) {
    MaterialState s;
    s.phi = sample(b.grid, 3, [](const Vec3& X, double* o) { Eigen::Map<Vec3>{o} = X; });
    const Context ctx = make_context(sbp_configuration(s.phi, b.ambient, 0.0), b.G, &b.mu_hat);
    Field v = v0;
    if (b.bc == BoundaryCondition::zero_velocity) zero_on_boundary(v);
    Form vf = vector_form(v, Rep::material);
    vf.over = ctx.cfg;
    s.M = momentum_from_velocity(vf, ctx).c;
    return s;
}

inline MaterialState step_material(const Body& b, const MaterialState& s, double dt) {
    auto stage = [&](const MaterialState& base, const MaterialEval& k, double c) {
        MaterialState r;
        r.phi = axpy(base.phi, c, k.dphi);
        r.M = axpy(base.M, c, k.dM);
        r.t = base.t + c;
        return r;
    };
    const MaterialEval k1 = evaluate_material(b, s);
    const MaterialEval k2 = evaluate_material(b, stage(s, k1, 0.5 * dt));
    const MaterialEval k3 = evaluate_material(b, stage(s, k2, 0.5 * dt));
    const MaterialEval k4 = evaluate_material(b, stage(s, k3, dt));
    MaterialState r = s;
    for (std::size_t i = 0; i < r.phi.v.size(); ++i)
        r.phi.v[i] += dt / 6.0 * (k1.dphi.v[i] + 2.0 * k2.dphi.v[i] + 2.0 * k3.dphi.v[i] + k4.dphi.v[i]);
    for (std::size_t i = 0; i < r.M.v.size(); ++i)
        r.M.v[i] += dt / 6.0 * (k1.dM.v[i] + 2.0 * k2.dM.v[i] + 2.0 * k3.dM.v[i] + k4.dM.v[i]);
    r.t = s.t + dt;
    return r;
}

struct EnergySnapshot {
    double t = 0.0;
    double e_kin = 0.0;
    double e_int = 0.0;
    double boundary_power = 0.0;
    double stress_power = 0.0;  // integral of v wedge-dot d_nabla T
    double min_detF = 0.0;
    double total() const { return e_kin + e_int; }
};

inline EnergySnapshot energy_snapshot(const Body& b, const MaterialEval& e, const MaterialState& s) {
    EnergySnapshot es;
    es.t = s.t;
    Form vf = vector_form(e.v, Rep::material);
    vf.over = e.ctx.cfg;
    es.e_kin = kinetic_energy(vf, material_momentum_form(s.M, e.ctx), e.ctx);
    es.e_int = internal_energy(b.model, e.ctx.g_hat, b.G, b.mu_hat);
    // Boundary power of the imposed traces.
    StressState trace = e.T;
    if (b.bc == BoundaryCondition::zero_traction) trace.T = impose_zero_traction(trace.T);
    es.boundary_power = boundary_traction_power(trace, e.v, e.ctx);
    es.stress_power = duality_pairing(e.dT, vf, e.ctx);
    es.min_detF = *std::min_element(e.ctx.cfg->detF.v.begin(), e.ctx.cfg->detF.v.end());
    return es;
}

inline EnergySnapshot energy_snapshot(const Body& b, const MaterialState& s) {
    return energy_snapshot(b, evaluate_material(b, s), s);
}

struct EnergyReport {
    double e_kin = 0.0;
    double e_int = 0.0;
    double boundary_power = 0.0;
    double lhs_rate = 0.0;        // d/dt (E_kin + E_int)
    double residual = 0.0;        // |lhs_rate - boundary_power|
    double kinetic_residual = 0.0;// |dE_kin/dt - integral v wedge-dot d_nabla T|
};

// Central-difference energy balance over three consecutive snapshots.
inline EnergyReport energy_report(const EnergySnapshot& a, const EnergySnapshot& m, const EnergySnapshot& c) {
    const double span = c.t - a.t;
    if (!(span > 0.0)) throw ConfigError("energy report needs increasing times");
    EnergyReport r;
    r.e_kin = m.e_kin;
    r.e_int = m.e_int;
    r.boundary_power = m.boundary_power;
    r.lhs_rate = (c.total() - a.total()) / span;
    r.residual = std::abs(r.lhs_rate - r.boundary_power);
    r.kinetic_residual = std::abs((c.e_kin - a.e_kin) / span - m.stress_power);
    return r;
}

inline EnergyReport energy_report(const Body& b, const MaterialState& a, const MaterialState& m,
                                  const MaterialState& c) {
    return energy_report(energy_snapshot(b, a), energy_snapshot(b, m), energy_snapshot(b, c));
}

// ---------------------------------------------------------------------------
// Convective representation: state (g^, M^).

struct ConvectiveState {
    MetricField g_hat;
    Field M;
    double t = 0.0;
};

struct ConvectiveEval {
    Field v;        // v^
    StressState T;  // T^
    Field dg;       // L_v^ g^
    Field dM;
    Field gamma;
};

inline ConvectiveEval evaluate_convective(const Body& b, const ConvectiveState& s) {
    ConvectiveEval e;
    Form Mf(b.grid, 3, ValueKind::covector, Rep::convective, Parity::pseudo);
    Mf.c = s.M;
    e.v = hodge_sharp(Mf, s.g_hat, s.g_hat, b.mu_hat).c;
    if (b.bc == BoundaryCondition::zero_velocity) zero_on_boundary(e.v);
    e.T = rougee_stress(b.model, s.g_hat, b.G, b.mu_hat);
    if (b.bc == BoundaryCondition::zero_traction) e.T.T = impose_zero_traction(e.T.T);
    e.gamma = christoffel(s.g_hat);
    Connection conn;
    conn.rep = Rep::convective;
    conn.gamma_b = &e.gamma;
    const Form dT = exterior_covariant_derivative(e.T.T, conn);
    e.dg = lie_derivative_metric(e.v, s.g_hat);
    // 1/2 m^ d(g^(v^, v^))
    Field q(b.grid, 1);
    for (std::size_t p = 0; p < q.nodes(); ++p) q.v[p] = e.v.vec(p).dot(s.g_hat.g.mat(p) * e.v.vec(p));
    const Field dq = gradient(q);
    e.dM = dT.c;
    for (std::size_t p = 0; p < e.dM.nodes(); ++p)
        for (int I = 0; I < 3; ++I) e.dM(p, I) += 0.5 * b.mu_hat.v[p] * dq(p, I);
    if (b.bc == BoundaryCondition::zero_velocity) {
        zero_on_boundary(e.dM);
        zero_on_boundary(e.dg);
    }
    return e;
}

inline ConvectiveState initial_convective_state(const Body& b, const Field& v0_material) {
    const MaterialState m = initial_material_state(b, v0_material);
    const Context ctx = make_context(sbp_configuration(m.phi, b.ambient, 0.0), b.G, &b.mu_hat);
    ConvectiveState s;
    s.g_hat = ctx.g_hat;
    Form Mt = material_momentum_form(m.M, ctx);
    s.M = pull_value_leg(Mt, ctx).c;
    return s;
}

inline ConvectiveState step_convective(const Body& b, const ConvectiveState& s, double dt) {
    auto stage = [&](const ConvectiveState& base, const ConvectiveEval& k, double c) {
        ConvectiveState r;
        r.g_hat = make_metric(axpy(base.g_hat.g, c, k.dg), Rep::convective);
        r.M = axpy(base.M, c, k.dM);
        r.t = base.t + c;
        return r;
    };
    const ConvectiveEval k1 = evaluate_convective(b, s);
    const ConvectiveEval k2 = evaluate_convective(b, stage(s, k1, 0.5 * dt));
    const ConvectiveEval k3 = evaluate_convective(b, stage(s, k2, 0.5 * dt));
    const ConvectiveEval k4 = evaluate_convective(b, stage(s, k3, dt));
    Field g = s.g_hat.g;
    for (std::size_t i = 0; i < g.v.size(); ++i)
        g.v[i] += dt / 6.0 * (k1.dg.v[i] + 2.0 * k2.dg.v[i] + 2.0 * k3.dg.v[i] + k4.dg.v[i]);
    ConvectiveState r;
    r.g_hat = make_metric(std::move(g), Rep::convective);
    r.M = s.M;
    for (std::size_t i = 0; i < r.M.v.size(); ++i)
        r.M.v[i] += dt / 6.0 * (k1.dM.v[i] + 2.0 * k2.dM.v[i] + 2.0 * k3.dM.v[i] + k4.dM.v[i]);
    r.t = s.t + dt;
    return r;
}

inline EnergySnapshot energy_snapshot(const Body& b, const ConvectiveState& s) {
    const ConvectiveEval e = evaluate_convective(b, s);
    EnergySnapshot es;
    es.t = s.t;
    double ek = 0.0;
    for (std::size_t p = 0; p < s.M.nodes(); ++p) ek += b.grid->weight(p) * e.v.vec(p).dot(s.M.vec(p));
    es.e_kin = 0.5 * ek;
    es.e_int = internal_energy(b.model, s.g_hat, b.G, b.mu_hat);
    es.boundary_power = boundary_traction_power(e.T, e.v, Context{});
    double mj = 1e300;
    for (std::size_t p = 0; p < s.M.nodes(); ++p) mj = std::min(mj, s.g_hat.sqrt_det.v[p] / b.G.sqrt_det.v[p]);
    es.min_detF = mj;
    return es;
}

// ---------------------------------------------------------------------------
// Spatial balances evaluated on a material trajectory pushed forward.

struct SpatialResiduals {
    double mass = 0.0;
    double momentum = 0.0;
    double advection = 0.0;
};

// Lie derivative of a covector density (chart components m_i, weight 1) in the
// frame of Finv: u^j d_j m_i + m_i d_j u^j + m_j d_i u^j.
inline Field lie_derivative_covector_density(const Field& u, const Field& m, const Field* Finv) {
    const Field dm = frame_gradient(m, Finv);
    const Field du = frame_gradient(u, Finv);  // du(p, j*3 + k) = d_j u^k
    Field out(m.grid, 3);
    for (std::size_t p = 0; p < out.nodes(); ++p) {
        double div = 0.0;
        for (int j = 0; j < 3; ++j) div += du(p, j * 3 + j);
        for (int i = 0; i < 3; ++i) {
            double s = m(p, i) * div;
            for (int j = 0; j < 3; ++j) s += u(p, j) * dm(p, j * 3 + i) + m(p, j) * du(p, i * 3 + j);
            out(p, i) = s;
        }
    }
    return out;
}

// i_u omega (x) alpha, a covector-valued 2-form, for a top form omega of
// density w and a covector field alpha.
inline Form flux_form(const Field& u, const Field& w, const Field& alpha, Rep rep) {
    const Form iw = interior_product(u, scalar_form(w, 3, rep, Parity::pseudo));
    Form r(u.grid, 2, ValueKind::covector, rep, Parity::pseudo);
    for (std::size_t p = 0; p < r.nodes(); ++p)
        for (int k = 0; k < 3; ++k)
            for (int s = 0; s < 3; ++s) r(p, k, s) = alpha(p, k) * iw(p, 0, s);
    return r;
}

inline Field lower(const Field& v, const MetricField& m) {
    Field out(v.grid, 3);
    for (std::size_t p = 0; p < out.nodes(); ++p) out.set_vec(p, m.g.mat(p) * v.vec(p));
    return out;
}

// Residual of L_u(omega (x) alpha) = d_nabla(i_u omega (x) alpha) + omega (x) (nabla u wedge-dot alpha)
// for spatial fields in pulled-back sampling over ctx. Returns max-norm.
inline double lie_identity_residual(const Field& u, const Field& w, const Field& alpha, const Context& ctx) {
    const Field* Finv = &ctx.cfg->Finv;
    Field m(u.grid, 3);
    for (std::size_t p = 0; p < m.nodes(); ++p)
        for (int i = 0; i < 3; ++i) m(p, i) = w.v[p] * alpha(p, i);
    const Field lhs = lie_derivative_covector_density(u, m, Finv);
    const Connection conn = spatial_connection(ctx);
    Field rhs = exterior_covariant_derivative(flux_form(u, w, alpha, Rep::spatial), conn).c;
    const Field nu = covariant_derivative_vector(u, conn);  // nu(p, a*3 + j) = nabla_a u^j
    for (std::size_t p = 0; p < rhs.nodes(); ++p)
        for (int a = 0; a < 3; ++a) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) s += nu(p, a * 3 + j) * alpha(p, j);
            rhs(p, a) += w.v[p] * s;
        }
    return max_abs_diff(lhs, rhs);
}

// Spatial mass and momentum balances, conservation and advection forms, at
// the middle of three consecutive material states.
inline SpatialResiduals spatial_residuals(const Body& b, const MaterialState& a, const MaterialState& m,
                                          const MaterialState& c) {
    const double inv = 1.0 / (c.t - a.t);
    auto push = [&](const MaterialState& s, Context& ctx, Field& mu, Field& Ms) {
        ctx = make_context(deformation_gradient(s.phi, b.ambient, s.t), b.G, &b.mu_hat);
        mu = ctx.mu_s;
        Ms = push_form_leg(material_momentum_form(s.M, ctx), ctx).c;
    };
    Context ca, cm, cc;
    Field mua, mum, muc, Ma, Mm, Mc;
    push(a, ca, mua, Ma);
    push(m, cm, mum, Mm);
    push(c, cc, muc, Mc);
    const Field* Finv = &cm.cfg->Finv;
    const Field v = velocity_from_momentum(material_momentum_form(m.M, cm), cm).c;
    const Connection conn = spatial_connection(cm);

    // d_t at fixed x = d_t at fixed X - v . grad
    auto advect = [&](const Field& f) {
        const Field d = frame_gradient(f, Finv);
        Field out(f.grid, f.ncomp);
        for (std::size_t p = 0; p < out.nodes(); ++p)
            for (int comp = 0; comp < f.ncomp; ++comp) {
                double s = 0.0;
                for (int j = 0; j < 3; ++j) s += v(p, j) * d(p, j * f.ncomp + comp);
                out(p, comp) = s;
            }
        return out;
    };
    const Field dmu = inv * (muc - mua) - advect(mum);
    const Field dM = inv * (Mc - Ma) - advect(Mm);

    SpatialResiduals r;
    const Form mu = scalar_form(mum, 3, Rep::spatial, Parity::pseudo);
    r.mass = max_abs(dmu + exterior_derivative(interior_product(v, mu), Finv).c);

    const StressState Ts = stress_web_convert(rougee_stress(b.model, cm), Rep::spatial, Weight::extensive, cm);
    const Field dT = exterior_covariant_derivative(Ts.T, conn).c;
    const Field vflat = lower(v, cm.g_tilde);
    const Field flux = exterior_covariant_derivative(flux_form(v, mum, vflat, Rep::spatial), conn).c;
    r.momentum = max_abs(dM + flux - dT);

    Field q(v.grid, 1);
    for (std::size_t p = 0; p < q.nodes(); ++p) q.v[p] = v.vec(p).dot(vflat.vec(p));
    const Field dq = frame_gradient(q, Finv);
    Field adv = dM + lie_derivative_covector_density(v, Mm, Finv) - dT;
    for (std::size_t p = 0; p < adv.nodes(); ++p)
        for (int i = 0; i < 3; ++i) adv(p, i) -= 0.5 * mum.v[p] * dq(p, i);
    r.advection = max_abs(adv);
    return r;
}

// Spatial mass residual d_t mu + d(i_v mu) alone (cheap CSV column).
inline double spatial_mass_residual(const Body& b, const MaterialState& a, const MaterialState& m,
                                    const MaterialState& c) {
    const double inv = 1.0 / (c.t - a.t);
    const Context cm = make_context(deformation_gradient(m.phi, b.ambient, m.t), b.G, &b.mu_hat);
    auto mu_of = [&](const MaterialState& s) {
        const Configuration cfg = deformation_gradient(s.phi, b.ambient, s.t);
        Field mu(s.phi.grid, 1);
        for (std::size_t p = 0; p < mu.nodes(); ++p) mu.v[p] = b.mu_hat.v[p] / cfg.detF.v[p];
        return mu;
    };
    const Field* Finv = &cm.cfg->Finv;
    const Field v = velocity_from_momentum(material_momentum_form(m.M, cm), cm).c;
    const Field dmu = inv * (mu_of(c) - mu_of(a)) - lie_derivative_scalar(v, cm.mu_s, Finv);
    const Form mu = scalar_form(cm.mu_s, 3, Rep::spatial, Parity::pseudo);
    return max_abs(dmu + exterior_derivative(interior_product(v, mu), Finv).c);
}

// ---------------------------------------------------------------------------
// Equivalence with the classical intensive formulations: star-sharp d_nabla
// star-flat tau against (1/rho) div sigma, sigma the mass-weighted stress of
// representation rep (form index first).

struct EquivalenceSides {
    Field exterior;   // star-sharp d_nabla T
    Field classical;  // (1/rho) div sigma
};

inline EquivalenceSides classical_equivalence_sides(const Field& sigma, Rep rep, const Context& ctx) {
    const StressState s = tensor_stress(sigma, rep, Weight::mass);
    const StressState T = stress_web_convert(s, rep, Weight::extensive, ctx);
    const Connection conn = connection_for(rep, ctx);
    Form dT = exterior_covariant_derivative(T.T, conn);
    EquivalenceSides e;
    e.exterior = star_sharp(dT, ctx).c;
    const Leg form_leg = conn.form_leg(), value_leg = conn.value_leg();
    const Field div = divergence(sigma, {{true, form_leg}, {true, value_leg}}, conn, 0);
    const Field rho = rep_density(rep, ctx);
    e.classical = div;
    for (std::size_t p = 0; p < div.nodes(); ++p)
        for (int b = 0; b < 3; ++b) e.classical(p, b) /= rho.v[p];
    return e;
}

inline double classical_equivalence_residual(const Field& sigma, Rep rep, const Context& ctx) {
    const EquivalenceSides e = classical_equivalence_sides(sigma, rep, ctx);
    return max_abs_diff(e.exterior, e.classical);
}

// d_t(g^ v^) = g^ d_t v^ + nabla^_{v^} v^-flat + 1/2 d(g^(v^, v^)) along a motion.
inline double convective_momentum_rate_residual(const Motion& m, const GridPtr& grid, double t, double dt) {
    auto state = [&](double s, Field& vh, MetricField& gh) {
        const Configuration c = configure(m, grid, s);
        vh = convective_velocity(material_velocity(m, grid, s), c);
        gh = induced_metrics(c).g_hat;
    };
    Field vp, vm, v0;
    MetricField gp, gm, g0;
    state(t + dt, vp, gp);
    state(t - dt, vm, gm);
    state(t, v0, g0);
    const double inv = 0.5 / dt;
    const Field lhs = inv * (lower(vp, gp) - lower(vm, gm));
    Field rhs = lower(inv * (vp - vm), g0);
    const Field gamma = christoffel(g0);
    Connection conn;
    conn.rep = Rep::convective;
    conn.gamma_b = &gamma;
    const Field nv = covariant_derivative_covector(lower(v0, g0), conn);  // (a*3 + b)
    Field q(grid, 1);
    for (std::size_t p = 0; p < q.nodes(); ++p) q.v[p] = v0.vec(p).dot(g0.g.mat(p) * v0.vec(p));
    const Field dq = gradient(q);
    for (std::size_t p = 0; p < rhs.nodes(); ++p)
        for (int b = 0; b < 3; ++b) {
            double s = 0.5 * dq(p, b);
            for (int a = 0; a < 3; ++a) s += v0(p, a) * nv(p, a * 3 + b);
            rhs(p, b) += s;
        }
    return max_abs_diff(lhs, rhs);
}

// D_t F - nabla~ v~ along a motion, F by finite differences in time and
// space. v~ is differenced from the same snapshots unless the motion's
// velocity closure is requested.
inline double velocity_gradient_residual(const Motion& m, const GridPtr& grid, double t, double dt,
                                         bool analytic_velocity = false) {
    const Configuration cp = configure(m, grid, t + dt), cm = configure(m, grid, t - dt);
    const Context ctx = make_context(configure(m, grid, t), reference_metric(m, grid, 0.0));
    const Field v = material_velocity(m, grid, t, analytic_velocity ? 0.0 : dt);
    const Field DtF = covariant_rate((0.5 / dt) * (cp.F - cm.F), ctx.cfg->F, v, ctx.gamma_s, 3);
    return max_abs_diff(DtF, material_velocity_gradient(v, ctx));
}

}  // namespace elastoform
