#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "elastoform/dynamics.hpp"

namespace elastoform {

// ---------------------------------------------------------------------------
// Deterministic random smooth fields.

class SmoothFieldGenerator {
public:
    explicit SmoothFieldGenerator(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    // Each component: c0 + sum of three low-frequency sine modes.
    Field field(const GridPtr& grid, int ncomp, double amplitude = 1.0) {
        struct Mode {
            Vec3 k;
            double phase, amp;
        };
        std::vector<double> c0(ncomp);
        std::vector<std::array<Mode, 3>> modes(ncomp);
        for (int c = 0; c < ncomp; ++c) {
            c0[c] = uniform(-0.5, 0.5) * amplitude;
            for (auto& m : modes[c]) {
                m.k = Vec3(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
                m.phase = uniform(0.0, 2.0 * M_PI);
                m.amp = uniform(0.2, 1.0) * amplitude;
            }
        }
        return sample(grid, ncomp, [&](const Vec3& X, double* o) {
            for (int c = 0; c < ncomp; ++c) {
                double s = c0[c];
                for (const auto& m : modes[c]) s += m.amp * std::sin(m.k.dot(X) + m.phase);
                o[c] = s;
            }
        });
    }

    // Symmetric 3x3 tensor field.
    Field symmetric(const GridPtr& grid, double amplitude = 1.0) {
        const Field a = field(grid, 6, amplitude);
        Field s(grid, 9);
        static constexpr int ij[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
        for (std::size_t p = 0; p < s.nodes(); ++p)
            for (int q = 0; q < 6; ++q) {
                s(p, ij[q][0] * 3 + ij[q][1]) = a(p, q);
                s(p, ij[q][1] * 3 + ij[q][0]) = a(p, q);
            }
        return s;
    }

    // SPD metric field I + perturbation, eigenvalues kept well above zero.
    Field spd(const GridPtr& grid, double amplitude = 0.3) {
        Field s = symmetric(grid, amplitude / 3.0);
        for (std::size_t p = 0; p < s.nodes(); ++p) s.set_mat(p, s.mat(p) + Mat3::Identity());
        return s;
    }

    Mat3 spd_matrix(double spread = 0.5) {
        Mat3 a;
        for (int i = 0; i < 9; ++i) a.data()[i] = uniform(-spread, spread);
        return a * a.transpose() + Mat3::Identity();
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Standard charts and motions used by the suite.

inline Chart cartesian_chart() { return Chart{}; }

// Half-size Cartesian patch: deforming motions are well resolved at N = 9.
inline Chart cartesian_patch() {
    Chart c;
    c.name = "cartesian_patch";
    c.ranges = {{{0.25, 0.75}, {0.25, 0.75}, {0.25, 0.75}}};
    return c;
}

// r in [2, 2.5], theta in [0, 0.25], z in [0, 0.5].
inline Chart cylindrical_chart() {
    Chart c;
    c.name = "cylindrical_shell";
    c.ranges = {{{2.0, 2.5}, {0.0, 0.25}, {0.0, 0.5}}};
    c.coords = CoordSystem::cylindrical;
    return c;
}

inline Chart chart_for(CoordSystem cs) {
    return cs == CoordSystem::cartesian ? cartesian_patch() : cylindrical_chart();
}

inline Motion bump_motion(CoordSystem cs) {
    return Motion(std::make_shared<BumpMotion>(0.1, 0.2), cs, "bump");
}

// Rotation about the x-axis plus translation, optionally over a bump.
inline Motion rigid_motion(CoordSystem cs, bool with_bump = false) {
    std::shared_ptr<const PhysicalMotion> base = std::make_shared<IdentityMotion>();
    if (with_bump) base = std::make_shared<BumpMotion>(0.02, 0.05);
    return Motion(std::make_shared<RigidMotion>(0.8, Vec3(1.0, 0.0, 0.0), Vec3(0.0, 0.0, 0.5), Vec3(0.1, 0.05, 0.0),
                                                base),
                  cs, with_bump ? "rigid_bump" : "rigid");
}

// A deforming motion suitable for the chart: bump in Cartesian, rotated bump
// in the cylindrical shell.
inline Motion test_motion(CoordSystem cs) {
    return cs == CoordSystem::cartesian ? bump_motion(cs) : rigid_motion(cs, true);
}

inline Context test_context(CoordSystem cs, int n, double t = 0.4, bool analytic_F = false) {
    const GridPtr grid = build_grid(chart_for(cs), n);
    const Motion m = test_motion(cs);
    return make_context(configure(m, grid, t, analytic_F), reference_metric(m, grid, 0.0, analytic_F));
}

// ---------------------------------------------------------------------------
// Checks.

struct SuiteOptions {
    std::uint64_t seed = 7;
    bool leg_swap = false;  // transposes nabla v-flat; the velocity-gradient split checks must then fail
    std::vector<int> resolutions{9, 17};
    std::vector<std::string> only;  // run only these ids when non-empty
};

struct Check {
    std::string id;
    int criterion = 0;
    std::string description;
    double C = 1.0;       // tolerance C * h^p (or C alone when p == 0)
    int p = 2;
    bool order_required = false;
    std::function<double(int, const SuiteOptions&)> run;
    double min_ratio = 0.0;  // required residual drop between the two resolutions
};

inline constexpr double kExactFloor = 1e-11;
inline constexpr double kOrderRequired = 1.9;

namespace checks {

inline Field lower_field(const Field& v, const MetricField& m) { return lower(v, m); }

// ||nabla v-flat - 1/2 L_v g - 1/2 d v-flat||, spatial (pulled-back sampling).
inline double velocity_split_spatial(CoordSystem cs, int n, const SuiteOptions& o) {
    const Context ctx = test_context(cs, n, 0.4, true);
    SmoothFieldGenerator gen(o.seed);
    const Field v = gen.field(ctx.grid(), 3);
    const Field* Finv = &ctx.cfg->Finv;
    const Connection conn = spatial_connection(ctx);
    const Field vflat = lower(v, ctx.g_tilde);
    Field nab = covariant_derivative_covector(vflat, conn);
    const Field lie = lie_derivative_metric(v, ctx.g_tilde, Finv);
    const Form dv = exterior_derivative(scalar_form(vflat, 1, Rep::spatial), Finv);
    double r = 0.0;
    for (std::size_t p = 0; p < nab.nodes(); ++p) {
        Mat3 a = nab.mat(p);
        if (o.leg_swap) a.transposeInPlace();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double d = 0.0;
                if (i != j) {
                    int t[2] = {i, j};
                    const auto [s, sign] = slots::lookup(2, t);
                    d = sign * dv(p, 0, s);
                }
                r = std::max(r, std::abs(a(i, j) - 0.5 * lie(p, i * 3 + j) - 0.5 * d));
            }
    }
    return r;
}

// Same identity for the convective velocity and metric of a motion.
inline double velocity_split_convective(CoordSystem cs, int n, const SuiteOptions& o) {
    const Context ctx = test_context(cs, n, 0.4, true);
    SmoothFieldGenerator gen(o.seed + 1);
    const Field v = gen.field(ctx.grid(), 3);
    const Connection conn = convective_connection(ctx);
    const Field vflat = lower(v, ctx.g_hat);
    const Field nab = covariant_derivative_covector(vflat, conn);
    const Field lie = lie_derivative_metric(v, ctx.g_hat);
    const Form dv = exterior_derivative(scalar_form(vflat, 1, Rep::convective));
    double r = 0.0;
    for (std::size_t p = 0; p < nab.nodes(); ++p) {
        Mat3 a = nab.mat(p);
        if (o.leg_swap) a.transposeInPlace();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double d = 0.0;
                if (i != j) {
                    int t[2] = {i, j};
                    const auto [s, sign] = slots::lookup(2, t);
                    d = sign * dv(p, 0, s);
                }
                r = std::max(r, std::abs(a(i, j) - 0.5 * lie(p, i * 3 + j) - 0.5 * d));
            }
    }
    return r;
}

inline double kinetic_metric(int n, bool analytic_F) {
    const GridPtr grid = build_grid(cylindrical_chart(), n);
    const Motion m = rigid_motion(CoordSystem::cylindrical, true);
    const Configuration c = configure(m, grid, 0.4, analytic_F);
    return metric_norm_equality_residual(velocity_triplet(m, c), induced_metrics(c));
}

// Hodge roundtrip and defining identity over all degrees, with a two-point
// (material) and a single-metric star.
inline double hodge(int n, const SuiteOptions& o, bool roundtrip) {
    const Context ctx = test_context(CoordSystem::cylindrical, n);
    SmoothFieldGenerator gen(o.seed + 2);
    double r = 0.0;
    for (Rep rep : {Rep::spatial, Rep::material, Rep::convective}) {
        for (int k = 0; k <= 3; ++k) {
            Form z(ctx.grid(), k, ValueKind::vector, rep);
            z.c = gen.field(ctx.grid(), z.c.ncomp);
            if (rep == Rep::material) z.over = ctx.cfg;
            const Form X = star_flat(z, ctx);
            if (roundtrip) {
                r = std::max(r, max_abs_diff(star_sharp(X, ctx).c, z.c));
                continue;
            }
            Form xi(ctx.grid(), k, ValueKind::vector, rep);
            xi.c = gen.field(ctx.grid(), xi.c.ncomp);
            if (rep == Rep::material) xi.over = ctx.cfg;
            const Form lhs = wedge_dot(z, star_flat(xi, ctx));
            const HodgeData h = hodge_data(rep, ctx);
            const Field ip = inner_product(z, xi, *h.value_metric, *h.form_metric);
            for (std::size_t p = 0; p < ip.nodes(); ++p)
                r = std::max(r, std::abs(lhs.c.v[p] - ip.v[p] * h.mu->v[p]));
        }
    }
    return r;
}

// d_nabla d_nabla of polynomial (degree <= 2) component fields, Cartesian.
inline double dd_polynomial(int n, const SuiteOptions& o) {
    const GridPtr grid = build_grid(cartesian_chart(), n);
    const Motion id(std::make_shared<IdentityMotion>(), CoordSystem::cartesian);
    const Context ctx = make_context(configure(id, grid, 0.0), reference_metric(id, grid));
    SmoothFieldGenerator gen(o.seed + 3);
    double r = 0.0;
    for (int k = 0; k <= 1; ++k) {
        Form z(grid, k, ValueKind::vector, Rep::spatial);
        std::vector<double> coef(z.c.ncomp * 10);
        for (double& c : coef) c = gen.uniform(-1.0, 1.0);
        z.c = sample(grid, z.c.ncomp, [&](const Vec3& X, double* out) {
            const double mono[10] = {1.0, X[0], X[1], X[2], X[0] * X[0], X[1] * X[1], X[2] * X[2],
                                     X[0] * X[1], X[0] * X[2], X[1] * X[2]};
            for (int c = 0; c < z.c.ncomp; ++c) {
                double s = 0.0;
                for (int q = 0; q < 10; ++q) s += coef[c * 10 + q] * mono[q];
                out[c] = s;
            }
        });
        const Connection conn = spatial_connection(ctx);
        const Form dd = exterior_covariant_derivative(exterior_covariant_derivative(z, conn), conn);
        r = std::max(r, max_abs(dd.c));
    }
    return r;
}

// d_nabla d_nabla in the flat cylindrical chart, random fields.
inline double dd_cylindrical(int n, const SuiteOptions& o) {
    const GridPtr grid = build_grid(cylindrical_chart(), n);
    const Motion id(std::make_shared<IdentityMotion>(), CoordSystem::cylindrical);
    const Context ctx = make_context(configure(id, grid, 0.0, true), reference_metric(id, grid, 0.0, true));
    SmoothFieldGenerator gen(o.seed + 4);
    const Connection conn = spatial_connection(ctx);
    double r = 0.0;
    for (int k = 0; k <= 1; ++k) {
        Form z(grid, k, ValueKind::vector, Rep::spatial);
        z.c = gen.field(grid, z.c.ncomp);
        r = std::max(r, max_abs(exterior_covariant_derivative(exterior_covariant_derivative(z, conn), conn).c));
    }
    return r;
}

// d^_nabla phi^* = phi^* d_nabla on both legs and for both derivative flavors.
inline double pullback_commutativity(const Motion& m, CoordSystem cs, int n, const SuiteOptions& o) {
    const GridPtr grid = build_grid(chart_for(cs), n);
    const Context ctx = make_context(configure(m, grid, 0.5), reference_metric(m, grid));
    SmoothFieldGenerator gen(o.seed + 5);
    const Connection sc = spatial_connection(ctx), mc = material_connection(ctx), cc = convective_connection(ctx);
    double r = 0.0;
    for (ValueKind kind : {ValueKind::vector, ValueKind::covector}) {
        for (int k = 0; k <= 1; ++k) {
            Form z(grid, k, kind, Rep::spatial);
            z.c = gen.field(grid, z.c.ncomp);
            const Form dz = exterior_covariant_derivative(z, sc);
            // form leg only
            r = std::max(r, max_abs_diff(pull_form_leg(dz, ctx).c,
                                         exterior_covariant_derivative(pull_form_leg(z, ctx), mc).c));
            // both legs
            r = std::max(r, max_abs_diff(pullback(dz, ctx).c, exterior_covariant_derivative(pullback(z, ctx), cc).c));
        }
    }
    for (int k = 0; k <= 2; ++k) {
        Form a(grid, k, ValueKind::scalar, Rep::spatial);
        a.c = gen.field(grid, a.c.ncomp);
        const Form da = exterior_derivative(a, &ctx.cfg->Finv);
        r = std::max(r, max_abs_diff(pull_form_leg(da, ctx).c, exterior_derivative(pull_form_leg(a, ctx)).c));
    }
    return r;
}

// int d zeta ^. X + (-1)^k int zeta ^. d X - boundary integral, k = 0, 1,
// convective forms over a deformed body.
inline double integration_by_parts(CoordSystem cs, int n, const SuiteOptions& o) {
    const Context ctx = test_context(cs, n);
    SmoothFieldGenerator gen(o.seed + 6);
    const Connection cc = convective_connection(ctx);
    double r = 0.0;
    for (int k = 0; k <= 1; ++k) {
        Form z(ctx.grid(), k, ValueKind::vector, Rep::convective);
        Form X(ctx.grid(), 2 - k, ValueKind::covector, Rep::convective, Parity::pseudo);
        z.c = gen.field(ctx.grid(), z.c.ncomp);
        X.c = gen.field(ctx.grid(), X.c.ncomp);
        const double a = integrate_interior(wedge_dot(exterior_covariant_derivative(z, cc), X).c);
        const double b = integrate_interior(wedge_dot(z, exterior_covariant_derivative(X, cc)).c);
        const double s = (k % 2 == 0) ? 1.0 : -1.0;
        r = std::max(r, std::abs(a + s * b - boundary_pairing(z, X)));
    }
    return r;
}

// Max relative error of the analytic metric gradient against central
// differences over random SPD samples.
inline double doyle_ericksen(ModelKind kind, const SuiteOptions& o, int samples = 100) {
    SmoothFieldGenerator gen(o.seed + 7);
    const ConstitutiveModel m{kind, 1.3, 0.7};
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Mat3 G = gen.spd_matrix(0.4);
        const Mat3 gh = gen.spd_matrix(0.6);
        const double rho = gen.uniform(0.5, 2.0);
        const Mat3 an = energy_gradient(m, gh, G, rho);
        Mat3 fd;
        const double eps = 1e-5;
        for (int I = 0; I < 3; ++I)
            for (int J = 0; J < 3; ++J) {
                Mat3 d = Mat3::Zero();
                d(I, J) += eps;
                if (I != J) d(J, I) += eps;
                const double v = (energy_density(m, gh + d, G, rho) - energy_density(m, gh - d, G, rho)) / (2.0 * eps);
                fd(I, J) = I == J ? v : 0.5 * v;
            }
        worst = std::max(worst, (an - fd).norm() / an.norm());
    }
    return worst;
}

inline Field random_sigma(Rep rep, const Context& ctx, std::uint64_t seed) {
    SmoothFieldGenerator gen(seed);
    return rep == Rep::material ? gen.field(ctx.grid(), 9) : gen.symmetric(ctx.grid());
}

inline double equivalence(Rep rep, CoordSystem cs, int n, const SuiteOptions& o) {
    const Context ctx = test_context(cs, n, 0.4, true);
    return classical_equivalence_residual(random_sigma(rep, ctx, o.seed + 8), rep, ctx);
}

// Walk all nine web entries in a cycle and compare with the start.
inline double web_closure(int n, const SuiteOptions& o) {
    const Context ctx = test_context(CoordSystem::cylindrical, n);
    SmoothFieldGenerator gen(o.seed + 9);
    const StressState start = tensor_stress(gen.symmetric(ctx.grid()), Rep::spatial, Weight::mass);
    const std::pair<Rep, Weight> path[] = {
        {Rep::spatial, Weight::bare},      {Rep::spatial, Weight::extensive}, {Rep::material, Weight::extensive},
        {Rep::material, Weight::mass},     {Rep::material, Weight::bare},     {Rep::convective, Weight::bare},
        {Rep::convective, Weight::mass},   {Rep::convective, Weight::extensive}, {Rep::spatial, Weight::mass}};
    StressState s = start;
    for (const auto& [rep, w] : path) s = stress_web_convert(s, rep, w, ctx);
    return max_abs_diff(s.tensor, start.tensor) / std::max(1.0, max_abs(start.tensor));
}

// Canonical web path against the direct Piola formulas, analytic F.
inline double piola_direct(int n, const SuiteOptions& o) {
    const Context ctx = test_context(CoordSystem::cylindrical, n, 0.4, true);
    SmoothFieldGenerator gen(o.seed + 10);
    const StressState sig = tensor_stress(gen.symmetric(ctx.grid()), Rep::spatial, Weight::mass);
    const StressState tau = stress_web_convert(sig, Rep::spatial, Weight::bare, ctx);
    const Field st = stress_web_convert(sig, Rep::material, Weight::mass, ctx).tensor;
    const Field sh = stress_web_convert(sig, Rep::convective, Weight::mass, ctx).tensor;
    const Field th = stress_web_convert(sig, Rep::convective, Weight::bare, ctx).tensor;
    double r = max_abs_diff(st, piola_spatial_to_material(sig.tensor, ctx));
    r = std::max(r, max_abs_diff(sh, piola_spatial_to_convective(sig.tensor, ctx)));
    r = std::max(r, max_abs_diff(sh, piola_material_to_convective(st, ctx)));
    r = std::max(r, max_abs_diff(th, tau_spatial_to_convective(tau.tensor, ctx)));
    return r / std::max(1.0, max_abs(sig.tensor));
}

inline double dtF(const Motion& m, CoordSystem cs, int n) {
    const GridPtr grid = build_grid(chart_for(cs), n);
    const double dt = 0.5 * grid->h_max();
    return std::max(velocity_gradient_residual(m, grid, 0.4, dt), velocity_gradient_residual(m, grid, 0.4, dt, true));
}

inline Motion dilation_motion() { return Motion(std::make_shared<DilationMotion>(0.5), CoordSystem::cartesian, "dilation"); }
inline Motion shear_motion() { return Motion(std::make_shared<ShearMotion>(0.1, 0.4), CoordSystem::cartesian, "shear"); }

inline double mass(Rep rep, int n) {
    const GridPtr grid = build_grid(cartesian_chart(), n);
    const Motion m = dilation_motion();
    const MassStructure ms = mass_structure(reference_metric(m, grid));
    return mass_conservation_residual(m, grid, ms, 0.4, 0.5 * grid->h_max(), rep);
}

inline double rigid_dgdt(int n) {
    const GridPtr grid = build_grid(cylindrical_chart(), n);
    const Motion m = rigid_motion(CoordSystem::cylindrical);
    const double dt = 0.5 * grid->h_max();
    const Field gp = induced_metrics(configure(m, grid, 0.3 + dt)).g_hat.g;
    const Field gm = induced_metrics(configure(m, grid, 0.3 - dt)).g_hat.g;
    return max_abs((0.5 / dt) * (gp - gm));
}

inline double rigid_killing(int n) {
    const GridPtr grid = build_grid(cylindrical_chart(), n);
    const Motion m = rigid_motion(CoordSystem::cylindrical);
    const Configuration c = configure(m, grid, 0.3);
    const InducedMetrics im = induced_metrics(c);
    return killing_residual(material_velocity(m, grid, 0.3), im.g_tilde, &c.Finv);
}

// int nabla^ v^ ^. T^ against int eps^ ^. T^, symmetric T^, eps^ = 1/2 L_v^ g^.
inline double stress_power(CoordSystem cs, int n, const SuiteOptions& o, bool time_rate) {
    const GridPtr grid = build_grid(chart_for(cs), n);
    const Motion m = test_motion(cs);
    const double t = 0.4;
    const Context ctx = make_context(configure(m, grid, t), reference_metric(m, grid));
    SmoothFieldGenerator gen(o.seed + 11);
    const StressState T = stress_web_convert(tensor_stress(gen.symmetric(grid), Rep::convective, Weight::mass),
                                             Rep::convective, Weight::extensive, ctx);
    const Field vh = convective_velocity(material_velocity(m, grid, t), ctx.c());
    const Field nv = covariant_derivative_vector(vh, convective_connection(ctx));  // (i*3 + j) = nabla_i v^j
    Field rate;
    if (time_rate) {
        const double dt = 0.5 * grid->h_max();
        const Field gp = induced_metrics(configure(m, grid, t + dt)).g_hat.g;
        const Field gm = induced_metrics(configure(m, grid, t - dt)).g_hat.g;
        rate = (0.5 / dt) * (gp - gm);
    } else {
        rate = lie_derivative_metric(vh, ctx.g_hat);
    }
    Form grad(grid, 1, ValueKind::vector, Rep::convective), eps(grid, 1, ValueKind::vector, Rep::convective);
    for (std::size_t p = 0; p < grad.nodes(); ++p) {
        const Mat3 e = 0.5 * ctx.g_hat.ginv.mat(p) * rate.mat(p);  // e(j, i) = eps^j_i
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                grad(p, j, i) = nv(p, i * 3 + j);
                eps(p, j, i) = e(j, i);
            }
    }
    return std::abs(integrate_interior(wedge_dot(grad, T.T).c) - integrate_interior(wedge_dot(eps, T.T).c));
}

// (L_v a)_i = v^j d_j a_i + a_j d_i v^j against Cartan's formula, scalar 1-forms.
inline double cartan(int n, const SuiteOptions& o) {
    const GridPtr grid = build_grid(cylindrical_chart(), n);
    SmoothFieldGenerator gen(o.seed + 12);
    const Field v = gen.field(grid, 3);
    const Form a = scalar_form(gen.field(grid, 3), 1, Rep::convective);
    const Form lie = lie_derivative_form(v, a);
    const Field da = gradient(a.c), dv = gradient(v);
    Field ref(grid, 3);
    for (std::size_t p = 0; p < ref.nodes(); ++p)
        for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) s += v(p, j) * da(p, j * 3 + i) + a.c(p, j) * dv(p, i * 3 + j);
            ref(p, i) = s;
        }
    return max_abs_diff(lie.c, ref);
}

inline double lie_identity(int n, const SuiteOptions& o) {
    const Context ctx = test_context(CoordSystem::cylindrical, n);
    SmoothFieldGenerator gen(o.seed + 13);
    const Field u = gen.field(ctx.grid(), 3);
    Field w = gen.field(ctx.grid(), 1);
    const Field alpha = gen.field(ctx.grid(), 3);
    return lie_identity_residual(u, w, alpha, ctx);
}

inline double convective_momentum_rate(int n) {
    const GridPtr grid = build_grid(cylindrical_chart(), n);
    return convective_momentum_rate_residual(rigid_motion(CoordSystem::cylindrical, true), grid, 0.4,
                                             0.5 * grid->h_max());
}

// Free-vibration SVK run with zero traction; returns the max energy-balance
// residual relative to the initial total energy. dt = 0.04 h.
struct VibrationResult {
    double relative_residual = 0.0;
    double e0 = 0.0;
    double e_end = 0.0;
    int steps = 0;
};

inline VibrationResult free_vibration(int n, double t_end = 1.0) {
    const GridPtr grid = build_grid(cartesian_chart(), n);
    const Body b = make_body(grid, CoordSystem::cartesian, ConstitutiveModel{ModelKind::svk, 1.0, 1.0},
                             BoundaryCondition::zero_traction);
    const Field v0 = sample(grid, 3, [](const Vec3& X, double* out) { Eigen::Map<Vec3>{out} = 0.1 * BumpMotion::u(X); });
    const double dt = 0.04 * grid->h_max();
    const int steps = static_cast<int>(std::lround(t_end / dt));
    MaterialState s = initial_material_state(b, v0);
    std::vector<EnergySnapshot> w{energy_snapshot(b, s)};
    VibrationResult r;
    r.e0 = w[0].total();
    r.steps = steps;
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
        s = step_material(b, s, dt);
        w.push_back(energy_snapshot(b, s));
        if (w.size() > 3) w.erase(w.begin());
        if (w.size() == 3) worst = std::max(worst, energy_report(w[0], w[1], w[2]).residual);
    }
    r.e_end = w.back().total();
    r.relative_residual = worst / r.e0;
    return r;
}

}  // namespace checks

// Registered identity checks. Constants C were calibrated at N = 9 and 17 and
// carry a safety factor; p = 0 means an absolute (resolution-free) bound.
inline std::vector<Check> identity_checks() {
    using namespace checks;
    const auto cart = CoordSystem::cartesian, cyl = CoordSystem::cylindrical;
    std::vector<Check> c;
    auto add = [&](std::string id, int crit, std::string desc, double C, int p, bool order,
                   std::function<double(int, const SuiteOptions&)> fn) {
        c.push_back({std::move(id), crit, std::move(desc), C, p, order, std::move(fn)});
    };
    add("velocity_split_spatial_cartesian", 1, "nabla v-flat = 1/2 L_v g + 1/2 d v-flat, spatial, Cartesian", 1.5, 2, true,
        [=](int n, const SuiteOptions& o) { return velocity_split_spatial(cart, n, o); });
    add("velocity_split_spatial_cylindrical", 1, "nabla v-flat = 1/2 L_v g + 1/2 d v-flat, spatial, cylindrical", 1.5, 2, true,
        [=](int n, const SuiteOptions& o) { return velocity_split_spatial(cyl, n, o); });
    add("velocity_split_convective_cartesian", 1, "nabla v^-flat = 1/2 L_v^ g^ + 1/2 d v^-flat, Cartesian", 1.5, 2, true,
        [=](int n, const SuiteOptions& o) { return velocity_split_convective(cart, n, o); });
    add("velocity_split_convective_cylindrical", 1, "nabla v^-flat = 1/2 L_v^ g^ + 1/2 d v^-flat, cylindrical", 1.5, 2, true,
        [=](int n, const SuiteOptions& o) { return velocity_split_convective(cyl, n, o); });
    add("kinetic_metric_analytic", 2, "g^(v^,v^) = g~(v~,v~), analytic F", 1e-10, 0, false,
        [](int n, const SuiteOptions&) { return kinetic_metric(n, true); });
    add("kinetic_metric_numeric", 2, "g^(v^,v^) = g~(v~,v~), numeric F", 0.01, 2, false,
        [](int n, const SuiteOptions&) { return kinetic_metric(n, false); });
    add("hodge_roundtrip", 3, "star-sharp star-flat = id, k = 0..3", 1e-12, 0, false,
        [](int n, const SuiteOptions& o) { return hodge(n, o, true); });
    add("hodge_defining_identity", 3, "zeta ^. star-flat xi = <zeta, xi> mu, k = 0..3", 1e-12, 0, false,
        [](int n, const SuiteOptions& o) { return hodge(n, o, false); });
    add("d_nabla_squared_polynomial", 4, "d_nabla d_nabla = 0, quadratic fields, Cartesian", 1e-10, 0, false,
        [](int n, const SuiteOptions& o) { return dd_polynomial(n, o); });
    add("d_nabla_squared_cylindrical", 4, "d_nabla d_nabla = 0, flat cylindrical chart", 0.6, 2, true,
        [](int n, const SuiteOptions& o) { return dd_cylindrical(n, o); });
    add("pullback_commutes_dilation", 5, "d phi^* = phi^* d, both legs and flavors, dilation", 2.0, 2, false,
        [=](int n, const SuiteOptions& o) { return pullback_commutativity(dilation_motion(), cart, n, o); });
    add("pullback_commutes_shear", 5, "d phi^* = phi^* d, both legs and flavors, shear", 2.0, 2, false,
        [=](int n, const SuiteOptions& o) { return pullback_commutativity(shear_motion(), cart, n, o); });
    add("pullback_commutes_cylindrical", 5, "d phi^* = phi^* d, rotated bump, cylindrical", 2.0, 2, false,
        [=](int n, const SuiteOptions& o) { return pullback_commutativity(test_motion(cyl), cyl, n, o); });
    add("integration_by_parts_cartesian", 6, "Leibniz rule integrated, k = 0, 1, Cartesian", 0.05, 2, false,
        [=](int n, const SuiteOptions& o) { return integration_by_parts(cart, n, o); });
    add("integration_by_parts_cylindrical", 6, "Leibniz rule integrated, k = 0, 1, cylindrical", 0.05, 2, false,
        [=](int n, const SuiteOptions& o) { return integration_by_parts(cyl, n, o); });
    add("doyle_ericksen_svk", 7, "de/dg analytic vs central differences, SVK", 1e-6, 0, false,
        [](int, const SuiteOptions& o) { return doyle_ericksen(ModelKind::svk, o); });
    add("doyle_ericksen_neo_hookean", 7, "de/dg analytic vs central differences, Neo-Hookean", 1e-6, 0, false,
        [](int, const SuiteOptions& o) { return doyle_ericksen(ModelKind::neo_hookean, o); });
    for (Rep rep : {Rep::spatial, Rep::material, Rep::convective})
        for (CoordSystem cs : {cart, cyl})
            add(std::string("equivalence_") + to_string(rep) + "_" + to_string(cs), 8,
                std::string("star-sharp d_nabla star-flat tau = (1/rho) div sigma, ") + to_string(rep) + ", " +
                    to_string(cs),
                2.5, 2, true, [=](int n, const SuiteOptions& o) { return equivalence(rep, cs, n, o); });
    add("stress_web_closure", 9, "cycle through all nine web entries", 1e-10, 0, false,
        [](int n, const SuiteOptions& o) { return web_closure(n, o); });
    add("piola_direct_formulas", 9, "canonical path vs direct Piola formulas, analytic F", 1e-10, 0, false,
        [](int n, const SuiteOptions& o) { return piola_direct(n, o); });
    add("dtF_bump", 10, "D_t F = nabla~ v~, bump motion", 0.05, 2, false,
        [=](int n, const SuiteOptions&) { return dtF(bump_motion(cart), cart, n); });
    add("dtF_rotated_bump_cylindrical", 10, "D_t F = nabla~ v~, rotated bump, cylindrical", 0.05, 2, false,
        [=](int n, const SuiteOptions&) { return dtF(test_motion(cyl), cyl, n); });
    add("mass_spatial_dilation", 11, "d_t mu + L_v mu = 0 and density form, dilation", 0.25, 2, false,
        [](int n, const SuiteOptions&) { return mass(Rep::spatial, n); });
    add("mass_convective_dilation", 11, "d_t rho^ + rho^ div^ v^ = 0, dilation", 0.25, 2, false,
        [](int n, const SuiteOptions&) { return mass(Rep::convective, n); });
    add("mass_material_dilation", 11, "material mass form constant", 1e-12, 0, false,
        [](int n, const SuiteOptions&) { return mass(Rep::material, n); });
    add("energy_balance_free_vibration", 12, "SVK free vibration, relative energy-balance residual", 1e-3, 0, false,
        [](int n, const SuiteOptions&) { return free_vibration(n).relative_residual; });
    c.back().min_ratio = 3.0;
    add("rigid_dgdt", 13, "d_t g^ = 0 for rotation + translation, cylindrical", 0.2, 2, false,
        [](int n, const SuiteOptions&) { return rigid_dgdt(n); });
    add("rigid_killing", 13, "L_v g = 0 for rotation + translation, cylindrical", 0.3, 2, false,
        [](int n, const SuiteOptions&) { return rigid_killing(n); });
    add("stress_power_rate_of_strain", 14, "int nabla^ v^ ^. T^ = int eps^ ^. T^, symmetric T^", 0.03, 2, false,
        [=](int n, const SuiteOptions& o) { return stress_power(cyl, n, o, false); });
    add("stress_power_metric_rate", 14, "int nabla^ v^ ^. T^ = 1/2 int (d_t g^)# ^. T^", 0.03, 2, false,
        [=](int n, const SuiteOptions& o) { return stress_power(cyl, n, o, true); });
    add("cartan_formula", 0, "L_v = d i_v + i_v d on 1-forms", 0.7, 2, false,
        [](int n, const SuiteOptions& o) { return cartan(n, o); });
    add("lie_identity_covector_density", 0, "L_u(w (x) a) = d_nabla(i_u w (x) a) + w (x) (nabla u ^. a)", 2.0, 2,
        false, [](int n, const SuiteOptions& o) { return lie_identity(n, o); });
    add("convective_momentum_rate", 0, "d_t(g^ v^) = g^ d_t v^ + nabla_v^ v^-flat + 1/2 d g^(v^,v^)", 0.3, 2, false,
        [](int n, const SuiteOptions&) { return convective_momentum_rate(n); });
    return c;
}

// Every identity the suite covers, with the checks that verify it. The
// manifest test requires each registered check to appear here exactly once.
struct ManifestEntry {
    std::string identity;
    std::vector<std::string> checks;
};

inline std::vector<ManifestEntry> identity_manifest() {
    return {
        {"velocity gradient split into Lie and exterior parts",
         {"velocity_split_spatial_cartesian", "velocity_split_spatial_cylindrical", "velocity_split_convective_cartesian",
          "velocity_split_convective_cylindrical"}},
        {"kinetic metric equality", {"kinetic_metric_analytic", "kinetic_metric_numeric"}},
        {"Hodge star roundtrip", {"hodge_roundtrip"}},
        {"Hodge star defining identity", {"hodge_defining_identity"}},
        {"flat-space d_nabla squared", {"d_nabla_squared_polynomial", "d_nabla_squared_cylindrical"}},
        {"pullback commutes with d_nabla",
         {"pullback_commutes_dilation", "pullback_commutes_shear", "pullback_commutes_cylindrical"}},
        {"integration by parts", {"integration_by_parts_cartesian", "integration_by_parts_cylindrical"}},
        {"Doyle-Ericksen gradient", {"doyle_ericksen_svk", "doyle_ericksen_neo_hookean"}},
        {"exterior vs classical divergence",
         {"equivalence_spatial_cartesian", "equivalence_spatial_cylindrical", "equivalence_material_cartesian",
          "equivalence_material_cylindrical", "equivalence_convective_cartesian", "equivalence_convective_cylindrical"}},
        {"stress web closure", {"stress_web_closure"}},
        {"Piola transformations", {"piola_direct_formulas"}},
        {"D_t F equals the velocity gradient", {"dtF_bump", "dtF_rotated_bump_cylindrical"}},
        {"mass conservation", {"mass_spatial_dilation", "mass_convective_dilation", "mass_material_dilation"}},
        {"energy balance", {"energy_balance_free_vibration"}},
        {"rigid motion factorization", {"rigid_dgdt", "rigid_killing"}},
        {"stress power", {"stress_power_rate_of_strain", "stress_power_metric_rate"}},
        {"Cartan formula", {"cartan_formula"}},
        {"Lie derivative of covector densities", {"lie_identity_covector_density"}},
        {"convective momentum rate", {"convective_momentum_rate"}},
    };
}

// ---------------------------------------------------------------------------

struct CheckResult {
    std::string id;
    int criterion = 0;
    std::string description;
    std::vector<int> resolutions;
    std::vector<double> residuals;
    std::vector<double> tolerances;
    double order = std::numeric_limits<double>::quiet_NaN();
    bool exact = false;
    bool pass = false;
    std::string message;
};

inline double check_tolerance(const Check& c, int n) {
    if (c.p == 0) return c.C;
    const double h = 1.0 / (n - 1);
    return c.C * std::pow(h, c.p);
}

inline CheckResult run_check(const Check& c, const SuiteOptions& o) {
    CheckResult r;
    r.id = c.id;
    r.criterion = c.criterion;
    r.description = c.description;
    r.resolutions = o.resolutions;
    try {
        r.pass = true;
        for (int n : o.resolutions) {
            const double res = c.run(n, o);
            const double tol = check_tolerance(c, n);
            r.residuals.push_back(res);
            r.tolerances.push_back(tol);
            if (!(res <= tol)) r.pass = false;
        }
        r.exact = true;
        for (double res : r.residuals) r.exact = r.exact && res <= kExactFloor;
        if (r.residuals.size() >= 2 && !r.exact) {
            const double n0 = r.resolutions[0] - 1, n1 = r.resolutions[1] - 1;
            r.order = std::log(r.residuals[0] / r.residuals[1]) / std::log(n1 / n0);
            if (c.order_required && c.p != 0 && !(r.order >= kOrderRequired)) {
                r.pass = false;
                r.message = "measured order " + std::to_string(r.order) + " below " + std::to_string(kOrderRequired);
            }
        }
        if (c.min_ratio > 0.0 && r.residuals.size() >= 2 && !r.exact && !(r.residuals[0] >= c.min_ratio * r.residuals[1])) {
            r.pass = false;
            r.message = "residual drop " + std::to_string(r.residuals[0] / r.residuals[1]) + "x below " +
                        std::to_string(c.min_ratio) + "x";
        }
        if (!r.pass && r.message.empty()) r.message = "residual above tolerance";
    } catch (const std::exception& e) {
        r.pass = false;
        r.message = e.what();
    }
    return r;
}

struct SuiteReport {
    std::vector<CheckResult> checks;
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

inline SuiteReport run_identity_suite(const SuiteOptions& o,
                                      const std::function<void(const CheckResult&)>& on_result = {}) {
    SuiteReport rep;
    for (const Check& c : identity_checks()) {
        if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), c.id) == o.only.end()) continue;
        rep.checks.push_back(run_check(c, o));
        if (on_result) on_result(rep.checks.back());
    }
    return rep;
}

}  // namespace elastoform
