#pragma once

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "elastoform/masskinetics.hpp"

namespace elastoform {

enum class ModelKind { svk, neo_hookean };

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "svk" || s == "saint_venant_kirchhoff") return ModelKind::svk;
    if (s == "neo_hookean" || s == "neo_hookean_compressible") return ModelKind::neo_hookean;
    throw ConfigError("unknown constitutive model '" + s + "'");
}

inline const char* to_string(ModelKind k) { return k == ModelKind::svk ? "svk" : "neo_hookean"; }

struct ConstitutiveModel {
    ModelKind kind = ModelKind::svk;
    double lambda = 1.0;
    double mu = 1.0;

    void validate() const {
        if (!(mu > 0.0)) throw ConfigError("lame mu must be positive");
        if (!(3.0 * lambda + 2.0 * mu > 0.0)) throw ConfigError("3 lambda + 2 mu must be positive");
    }
};

inline void require_spd(const Mat3& g, std::size_t node) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(g, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > kSpdThreshold) || !g.allFinite())
        throw GeometryError("metric is not positive definite", node);
}

// Specific stored energy e^(g^) with rho~ the material density. e^(G) = 0.
inline double energy_density(const ConstitutiveModel& m, const Mat3& gh, const Mat3& G, double rho_tilde) {
    const Mat3 Gi = G.inverse();
    if (m.kind == ModelKind::svk) {
        const Mat3 E = 0.5 * (gh - G);
        const Mat3 A = Gi * E;
        const double tr = A.trace();
        return (0.5 * m.lambda * tr * tr + m.mu * (A * A).trace()) / rho_tilde;
    }
    const double ldet = std::log((Gi * gh).determinant());
    const double lnJ = 0.5 * ldet;
    return (0.5 * m.mu * ((Gi * gh).trace() - 3.0 - ldet) + 0.5 * m.lambda * lnJ * lnJ) / rho_tilde;
}

// d e^ / d g^_IJ as a symmetric contravariant tensor.
inline Mat3 energy_gradient(const ConstitutiveModel& m, const Mat3& gh, const Mat3& G, double rho_tilde) {
    const Mat3 Gi = G.inverse();
    Mat3 d;
    if (m.kind == ModelKind::svk) {
        const Mat3 E = 0.5 * (gh - G);
        d = 0.5 * m.lambda * (Gi * E).trace() * Gi + m.mu * Gi * E * Gi;
    } else {
        const Mat3 ghi = gh.inverse();
        const double lnJ = 0.5 * std::log((Gi * gh).determinant());
        d = 0.5 * m.mu * (Gi - ghi) + 0.5 * m.lambda * lnJ * ghi;
    }
    return 0.5 * (d + d.transpose()) / rho_tilde;
}

struct StrainEnergy {
    Field e;   // specific energy e^
    Form E;    // e^ mu^, a scalar 3-pseudo-form
};

inline StrainEnergy strain_energy(const ConstitutiveModel& m, const MetricField& g_hat, const MetricField& G,
                                  const Field& mu_hat) {
    m.validate();
    StrainEnergy s{Field(g_hat.g.grid, 1), Form()};
    for (std::size_t p = 0; p < s.e.nodes(); ++p) {
        require_spd(g_hat.g.mat(p), p);
        s.e.v[p] = energy_density(m, g_hat.g.mat(p), G.g.mat(p), mu_hat.v[p] / G.sqrt_det.v[p]);
    }
    Field dens = s.e;
    for (std::size_t p = 0; p < dens.nodes(); ++p) dens.v[p] *= mu_hat.v[p];
    s.E = mass_form(dens, Rep::convective);
    return s;
}

inline double internal_energy(const ConstitutiveModel& m, const MetricField& g_hat, const MetricField& G,
                              const Field& mu_hat) {
    return integrate_interior(strain_energy(m, g_hat, G, mu_hat).E.c);
}

inline Field energy_metric_gradient(const ConstitutiveModel& m, const MetricField& g_hat, const MetricField& G,
                                    const Field& mu_hat) {
    m.validate();
    Field d(g_hat.g.grid, 9);
    for (std::size_t p = 0; p < d.nodes(); ++p) {
        require_spd(g_hat.g.mat(p), p);
        d.set_mat(p, energy_gradient(m, g_hat.g.mat(p), G.g.mat(p), mu_hat.v[p] / G.sqrt_det.v[p]));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Stress web. Nine entries: representation x weight.
//   extensive T: covector-valued 2-pseudo-form
//   bare tau:    vector-valued 1-form, tau(p, j*3 + i) = tau^j_i (value j, form i)
//   mass sigma:  sigma(p, a*3 + b) = sigma^{ab}, a the raised form index, b the value index

enum class Weight { extensive, bare, mass };

inline const char* to_string(Weight w) {
    switch (w) {
        case Weight::extensive: return "extensive";
        case Weight::bare: return "bare";
        case Weight::mass: return "mass";
    }
    return "?";
}

inline Weight weight_from_string(const std::string& s) {
    if (s == "extensive") return Weight::extensive;
    if (s == "bare") return Weight::bare;
    if (s == "mass") return Weight::mass;
    throw ConfigError("unknown stress weight '" + s + "'");
}

struct StressState {
    Rep rep = Rep::convective;
    Weight weight = Weight::extensive;
    Form T;        // extensive payload
    Field tensor;  // tau or sigma payload

    // Uniform access to the 9 numbers per node.
    const Field& components() const { return weight == Weight::extensive ? T.c : tensor; }
};

inline StressState extensive_stress(Form T) {
    if (T.kind != ValueKind::covector || T.degree != 2) throw RepresentationError("T must be a covector-valued 2-form");
    StressState s;
    s.rep = T.rep;
    s.weight = Weight::extensive;
    s.T = std::move(T);
    s.T.parity = Parity::pseudo;
    return s;
}

inline StressState tensor_stress(Field t, Rep rep, Weight w) {
    if (w == Weight::extensive) throw RepresentationError("extensive stress needs a form payload");
    if (t.ncomp != 9) throw ConfigError("stress tensor needs 9 components");
    StressState s;
    s.rep = rep;
    s.weight = w;
    s.tensor = std::move(t);
    return s;
}

// Mass density of a representation: mu over the volume density of its form metric.
inline Field rep_density(Rep rep, const Context& ctx) {
    const HodgeData h = hodge_data(rep, ctx);
    Field rho(ctx.grid(), 1);
    for (std::size_t p = 0; p < rho.nodes(); ++p) rho.v[p] = h.mu->v[p] / h.form_metric->sqrt_det.v[p];
    return rho;
}

namespace detail {

inline StressState to_bare(const StressState& s, const Context& ctx) {
    if (s.weight == Weight::bare) return s;
    if (s.weight == Weight::extensive) {
        Form tau = star_sharp(s.T, ctx);
        return tensor_stress(std::move(tau.c), s.rep, Weight::bare);
    }
    const HodgeData h = hodge_data(s.rep, ctx);
    const Field rho = rep_density(s.rep, ctx);
    Field tau(ctx.grid(), 9);
    for (std::size_t p = 0; p < tau.nodes(); ++p) {
        // tau^b_i = g_ia sigma^{ab} / rho
        const Mat3 t = (h.form_metric->g.mat(p) * s.tensor.mat(p)).transpose() / rho.v[p];
        tau.set_mat(p, t);
    }
    return tensor_stress(std::move(tau), s.rep, Weight::bare);
}

inline StressState from_bare(const StressState& s, Weight target, const Context& ctx) {
    if (target == Weight::bare) return s;
    if (target == Weight::extensive) {
        Form tau(ctx.grid(), 1, ValueKind::vector, s.rep);
        tau.c = s.tensor;
        if (s.rep == Rep::material) tau.over = ctx.cfg;
        return extensive_stress(star_flat(tau, ctx));
    }
    const HodgeData h = hodge_data(s.rep, ctx);
    const Field rho = rep_density(s.rep, ctx);
    Field sigma(ctx.grid(), 9);
    for (std::size_t p = 0; p < sigma.nodes(); ++p) {
        // sigma^{ab} = rho g^{ai} tau^b_i
        sigma.set_mat(p, rho.v[p] * h.form_metric->ginv.mat(p) * s.tensor.mat(p).transpose());
    }
    return tensor_stress(std::move(sigma), s.rep, Weight::mass);
}

inline int rep_rank(Rep r) {
    switch (r) {
        case Rep::spatial: return 0;
        case Rep::material: return 1;
        case Rep::convective: return 2;
        default: throw RepresentationError("the stress web has no reference representation");
    }
}

}  // namespace detail

// Any-to-any conversion: to the extensive entry, across representations by
// leg-wise pullback or pushforward, then to the target weight.
inline StressState stress_web_convert(const StressState& s, Rep rep, Weight weight, const Context& ctx) {
    StressState cur = s;
    if (cur.rep != rep) {
        cur = detail::from_bare(detail::to_bare(cur, ctx), Weight::extensive, ctx);
        Form T = cur.T;
        int from = detail::rep_rank(T.rep);
        const int to = detail::rep_rank(rep);
        while (from < to) {
            T = from == 0 ? pull_form_leg(T, ctx) : pull_value_leg(T, ctx);
            ++from;
        }
        while (from > to) {
            T = from == 2 ? push_value_leg(T, ctx) : push_form_leg(T, ctx);
            --from;
        }
        cur = extensive_stress(std::move(T));
    }
    if (cur.weight == weight) return cur;
    return detail::from_bare(detail::to_bare(cur, ctx), weight, ctx);
}

// Rougee stress T^ = 2 (dE^/dg^)-flat, assembled from sigma^ = 2 rho^ de^/dg^
// through T^_{KAB} = g^_KM sigma^{JM} omega^_{JAB}. Needs only convective data.
inline StressState rougee_stress(const ConstitutiveModel& m, const MetricField& g_hat, const MetricField& G,
                                 const Field& mu_hat) {
    const Field d = energy_metric_gradient(m, g_hat, G, mu_hat);
    Form tau(g_hat.g.grid, 1, ValueKind::vector, Rep::convective);
    for (std::size_t p = 0; p < tau.nodes(); ++p) {
        // sigma^ / rho^ = 2 de^/dg^; tau^b_i = g^_ia (sigma^ / rho^)^{ab}
        tau.c.set_mat(p, (g_hat.g.mat(p) * (2.0 * d.mat(p))).transpose());
    }
    return extensive_stress(hodge_flat(tau, g_hat, g_hat, mu_hat));
}

inline StressState rougee_stress(const ConstitutiveModel& m, const Context& ctx) {
    return rougee_stress(m, ctx.g_hat, ctx.G, ctx.mu_hat);
}

// Direct Piola formulas for the mass-weighted entries, in the index layout
// above (form index first).
inline Field piola_spatial_to_material(const Field& sigma, const Context& ctx) {
    Field out(sigma.grid, 9);
    for (std::size_t p = 0; p < out.nodes(); ++p)
        out.set_mat(p, ctx.J.v[p] * ctx.cfg->Finv.mat(p) * sigma.mat(p));
    return out;
}

inline Field piola_spatial_to_convective(const Field& sigma, const Context& ctx) {
    Field out(sigma.grid, 9);
    for (std::size_t p = 0; p < out.nodes(); ++p) {
        const Mat3 fi = ctx.cfg->Finv.mat(p);
        out.set_mat(p, fi * sigma.mat(p) * fi.transpose());
    }
    return out;
}

inline Field piola_material_to_convective(const Field& sigma_tilde, const Context& ctx) {
    Field out(sigma_tilde.grid, 9);
    for (std::size_t p = 0; p < out.nodes(); ++p)
        out.set_mat(p, sigma_tilde.mat(p) * ctx.cfg->Finv.mat(p).transpose() / ctx.J.v[p]);
    return out;
}

// tau^J_I = F^i_I (F^-1)^J_j tau^j_i.
inline Field tau_spatial_to_convective(const Field& tau, const Context& ctx) {
    Field out(tau.grid, 9);
    for (std::size_t p = 0; p < out.nodes(); ++p)
        out.set_mat(p, ctx.cfg->Finv.mat(p) * tau.mat(p) * ctx.cfg->F.mat(p));
    return out;
}

// Max over basis pairs of (a#(x)b) wedge-dot T - (b#(x)a) wedge-dot T.
inline double symmetry_residual(const StressState& s, const Context& ctx) {
    if (s.rep == Rep::material)
        throw RepresentationError("stress symmetry is undefined for two-point (material) stress");
    const StressState e = stress_web_convert(s, s.rep, Weight::extensive, ctx);
    const MetricField& gv = *hodge_data(s.rep, ctx).value_metric;
    Field r[3][3];
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            Form z(ctx.grid(), 1, ValueKind::vector, s.rep);
            for (std::size_t p = 0; p < z.nodes(); ++p)
                for (int i = 0; i < 3; ++i) z(p, i, b) = gv.ginv(p, i * 3 + a);
            r[a][b] = wedge_dot(z, e.T).c;
        }
    double res = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) res = std::max(res, max_abs_diff(r[a][b], r[b][a]));
    return res;
}

// P = boundary integral of i_f^* v wedge-dot i_f^* T. Spatial inputs are
// pulled back to the body first (the value leg is untouched).
inline double boundary_traction_power(const StressState& s, const Field& v, const Context& ctx) {
    if (s.weight != Weight::extensive) throw RepresentationError("traction power needs the extensive stress");
    Form T = s.T;
    Form vf = vector_form(v, s.rep);
    if (s.rep == Rep::spatial) {
        T = pull_form_leg(T, ctx);
        vf = pull_form_leg(vf, ctx);
    } else if (s.rep == Rep::material) {
        vf.over = T.over;
    }
    return boundary_pairing(vf, T);
}

// Classical form: boundary integral of sigma-flat(v, n) over the induced area
// form, evaluated with the convective metric, unit normal and density.
inline double boundary_traction_power_classical(const StressState& s, const Field& v, const Context& ctx) {
    const StressState sh = stress_web_convert(s, Rep::convective, Weight::mass, ctx);
    const Field vh = s.rep == Rep::convective ? v : convective_velocity(v, ctx.c());
    const Grid& g = *ctx.grid();
    Field beta(ctx.grid(), 3);
    for (std::size_t p = 0; p < beta.nodes(); ++p) {
        const auto q = g.ijk(p);
        const Mat3 gi = ctx.g_hat.ginv.mat(p);
        const Mat3 gg = ctx.g_hat.g.mat(p);
        const Mat3 sig = sh.tensor.mat(p);
        const Vec3 vlow = gg * vh.vec(p);
        for (int a = 0; a < 3; ++a) {
            double side = 0.0;
            if (q[a] == 0) side = -1.0;
            else if (q[a] == g.n(a) - 1) side = 1.0;
            if (side == 0.0) continue;
            const double norm = std::sqrt(gi(a, a));
            Vec3 n_low = Vec3::Zero();
            n_low[a] = side / norm;
            const Vec3 n_up = gi * n_low;
            const double power = n_low.dot(sig * vlow);  // sigma^{ab} n_a v_b
            // (i_n omega) on the face slot, expressed against the face orientation.
            const double area = n_up[a] * ctx.g_hat.sqrt_det.v[p];
            beta(p, 2 - a) = power * area * side * face_orientation(a, side > 0.0);
        }
    }
    return integrate_boundary(beta);
}

// delta^(g1, g2) = 1/2 g1 log(g1^-1 g2) = 1/2 g1^(1/2) log(S) g1^(1/2),
// S = g1^(-1/2) g2 g1^(-1/2).
inline Mat3 log_strain_at(const Mat3& g1, const Mat3& g2, std::size_t node = 0) {
    require_spd(g1, node);
    require_spd(g2, node);
    Eigen::SelfAdjointEigenSolver<Mat3> e1(g1);
    const Vec3 l = e1.eigenvalues();
    const Mat3 Q = e1.eigenvectors();
    const Mat3 half = Q * l.cwiseSqrt().asDiagonal() * Q.transpose();
    const Mat3 ihalf = Q * l.cwiseSqrt().cwiseInverse().asDiagonal() * Q.transpose();
    Mat3 S = ihalf * g2 * ihalf;
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat3> es(S);
    const Mat3 logS = es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
                      es.eigenvectors().transpose();
    Mat3 d = 0.5 * half * logS * half;
    return 0.5 * (d + d.transpose());
}

inline Field log_strain(const MetricField& g1, const MetricField& g2) {
    Field d(g1.g.grid, 9);
    for (std::size_t p = 0; p < d.nodes(); ++p) d.set_mat(p, log_strain_at(g1.g.mat(p), g2.g.mat(p), p));
    return d;
}

}  // namespace elastoform
