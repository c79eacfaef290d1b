// Grid, metric, configuration and form algebra.

#include <gtest/gtest.h>

#include "elastoform/harness.hpp"

using namespace elastoform;

namespace {

Chart unit_cube() { return Chart{}; }

Context identity_context(const Chart& chart, int n) {
    const GridPtr grid = build_grid(chart, n);
    const Motion id(std::make_shared<IdentityMotion>(), chart.coords);
    return make_context(configure(id, grid, 0.0, true), reference_metric(id, grid, 0.0, true));
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

TEST(Grid, SpacingOfFiveNodes) {
    const GridPtr g = build_grid(unit_cube(), 5);
    for (int a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(g->h(a), 0.25);
    EXPECT_EQ(g->size(), 125u);
}

TEST(Grid, TooFewNodesIsRejected) {
    EXPECT_THROW(build_grid(unit_cube(), {3, 5, 5}), ConfigError);
    EXPECT_THROW(build_grid(unit_cube(), {5, 5, 4}), ConfigError);
}

TEST(Grid, EmptyRangeIsRejected) {
    Chart c;
    c.ranges[1] = {1.0, 1.0};
    EXPECT_THROW(build_grid(c, 5), ConfigError);
}

TEST(Grid, IndexRoundTrip) {
    const GridPtr g = build_grid(unit_cube(), {5, 6, 7});
    for (std::size_t p = 0; p < g->size(); ++p) {
        const auto q = g->ijk(p);
        EXPECT_EQ(g->index(q[0], q[1], q[2]), p);
    }
}

TEST(Grid, BoundaryNodeCount) {
    const GridPtr g = build_grid(unit_cube(), 6);
    std::size_t n = 0;
    for (std::size_t p = 0; p < g->size(); ++p) n += g->on_boundary(p) ? 1 : 0;
    EXPECT_EQ(n, 216u - 64u);
}

TEST(Grid, TrapezoidWeightsAreExactForTrilinear) {
    const GridPtr g = build_grid(unit_cube(), 7);
    const Field f = sample_scalar(g, [](const Vec3& x) { return 1.0 + x[0] + 2.0 * x[1] * x[2]; });
    EXPECT_NEAR(integrate_interior(f), 1.0 + 0.5 + 0.5, 1e-14);
}

TEST(Grid, DerivativeIsExactForQuadratics) {
    const GridPtr g = build_grid(unit_cube(), 6);
    const Field f = sample_scalar(g, [](const Vec3& x) { return x[0] * x[0] - 3.0 * x[1] * x[2] + x[2]; });
    const Field d = gradient(f);
    double err = 0.0;
    for (std::size_t p = 0; p < f.nodes(); ++p) {
        const Vec3 x = g->coord(p);
        err = std::max({err, std::abs(d(p, 0) - 2.0 * x[0]), std::abs(d(p, 1) + 3.0 * x[2]),
                        std::abs(d(p, 2) - (1.0 - 3.0 * x[1]))});
    }
    EXPECT_LT(err, 1e-12);
}

TEST(Grid, DerivativeConvergesAtSecondOrder) {
    auto err = [](int n) {
        const GridPtr g = build_grid(unit_cube(), n);
        const Field f = sample_scalar(g, [](const Vec3& x) { return std::sin(2.0 * x[0]) * std::cos(x[1]); });
        const Field d = partial_derivative(f, 0);
        double e = 0.0;
        for (std::size_t p = 0; p < f.nodes(); ++p) {
            const Vec3 x = g->coord(p);
            e = std::max(e, std::abs(d.v[p] - 2.0 * std::cos(2.0 * x[0]) * std::cos(x[1])));
        }
        return e;
    };
    const double order = std::log2(err(9) / err(17));
    EXPECT_GT(order, 1.9);
}

// ---------------------------------------------------------------------------
// Metrics

TEST(Metric, NonPositiveDefiniteIsRejected) {
    const GridPtr g = build_grid(unit_cube(), 5);
    Field m(g, 9);
    for (std::size_t p = 0; p < m.nodes(); ++p) m.set_mat(p, Mat3::Identity());
    m.set_mat(17, Vec3(1.0, -1.0, 1.0).asDiagonal().toDenseMatrix());
    try {
        make_metric(m, Rep::spatial);
        FAIL() << "expected GeometryError";
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.node, 17u);
    }
}

TEST(Metric, InverseAndVolumeOfRandomMetrics) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SmoothFieldGenerator gen(seed);
        const GridPtr g = build_grid(unit_cube(), 5);
        const MetricField m = make_metric(gen.spd(g), Rep::convective);
        for (std::size_t p = 0; p < m.g.nodes(); ++p) {
            EXPECT_LT((m.g.mat(p) * m.ginv.mat(p) - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_NEAR(m.sqrt_det.v[p] * m.sqrt_det.v[p], m.g.mat(p).determinant(), 1e-12);
        }
    }
}

TEST(Metric, CylindricalChristoffels) {
    const GridPtr g = build_grid(cylindrical_chart(), 7);
    const MetricField m = make_metric(ambient_metric(CoordSystem::cylindrical, sample(g, 3, [](const Vec3& X, double* o) {
                                                         Eigen::Map<Vec3>{o} = X;
                                                     })),
                                      Rep::spatial);
    const Field gam = christoffel(m);
    for (std::size_t p = 0; p < gam.nodes(); ++p) {
        const double r = g->coord(p)[0];
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    double expect = 0.0;
                    if (k == 0 && i == 1 && j == 1) expect = -r;
                    if (k == 1 && ((i == 0 && j == 1) || (i == 1 && j == 0))) expect = 1.0 / r;
                    EXPECT_NEAR(gam(p, k * 9 + i * 3 + j), expect, 1e-12) << k << i << j;
                }
    }
}

TEST(Metric, AngularFieldFlatIsRSquaredDTheta) {
    const Context ctx = identity_context(cylindrical_chart(), 5);
    const Field v = sample(ctx.grid(), 3, [](const Vec3&, double* o) { Eigen::Map<Vec3>{o} = Vec3(0.0, 1.0, 0.0); });
    const Field vf = raise_lower(v, ctx.g_tilde, 0, IndexMap::flat);
    for (std::size_t p = 0; p < vf.nodes(); ++p) {
        const double r = ctx.grid()->coord(p)[0];
        EXPECT_NEAR(vf(p, 0), 0.0, 1e-15);
        EXPECT_NEAR(vf(p, 1), r * r, 1e-13);
        EXPECT_NEAR(vf(p, 2), 0.0, 1e-15);
    }
    EXPECT_LT(killing_residual(v, ctx.g_tilde), 1e-12);
}

TEST(Metric, RadialFieldIsNotKilling) {
    const Context ctx = identity_context(cylindrical_chart(), 5);
    const Field v = sample(ctx.grid(), 3, [](const Vec3&, double* o) { Eigen::Map<Vec3>{o} = Vec3(1.0, 0.0, 0.0); });
    // (L_v g)_thth = d_r r^2 = 2r >= 4 on the shell.
    EXPECT_NEAR(killing_residual(v, ctx.g_tilde), 5.0, 1e-12);
}

TEST(Metric, RaiseLowerRoundTrip) {
    SmoothFieldGenerator gen(11);
    const GridPtr g = build_grid(unit_cube(), 5);
    const MetricField m = make_metric(gen.spd(g), Rep::spatial);
    const Field t = gen.field(g, 27);
    for (int slot = 0; slot < 3; ++slot) {
        const Field back = raise_lower(raise_lower(t, m, slot, IndexMap::flat), m, slot, IndexMap::sharp);
        EXPECT_LT(max_abs_diff(back, t), 1e-12) << slot;
    }
    EXPECT_THROW(raise_lower(t, m, 3, IndexMap::flat), ConfigError);
}

// ---------------------------------------------------------------------------
// Configurations and motions

TEST(Configuration, DilationInducedMetrics) {
    const GridPtr g = build_grid(unit_cube(), 5);
    const Motion m(std::make_shared<DilationMotion>(0.5), CoordSystem::cartesian);
    const InducedMetrics im = induced_metrics(configure(m, g, 2.0));  // x = 2 X
    for (std::size_t p = 0; p < g->size(); ++p) {
        EXPECT_LT((im.g_hat.g.mat(p) - 4.0 * Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(im.g_hat.sqrt_det.v[p], 8.0, 1e-12);
    }
}

TEST(Configuration, JacobianOfDilation) {
    const GridPtr g = build_grid(unit_cube(), 5);
    const Motion m(std::make_shared<DilationMotion>(0.5), CoordSystem::cartesian);
    const Context ctx = make_context(configure(m, g, 1.0), reference_metric(m, g));
    for (std::size_t p = 0; p < g->size(); ++p) EXPECT_NEAR(ctx.J.v[p], 1.5 * 1.5 * 1.5, 1e-12);
}

TEST(Configuration, RigidMotionPreservesTheConvectiveMetric) {
    for (CoordSystem cs : {CoordSystem::cartesian, CoordSystem::cylindrical}) {
        const GridPtr g = build_grid(chart_for(cs), 7);
        const Motion m = rigid_motion(cs);
        const MetricField G = reference_metric(m, g, 0.0, true);
        const MetricField gh = induced_metrics(configure(m, g, 0.9, true)).g_hat;
        EXPECT_LT(max_abs_diff(G.g, gh.g), 1e-12) << to_string(cs);
    }
}

TEST(Configuration, CylindricalMotionMatchesCartesianPositions) {
    const GridPtr g = build_grid(cylindrical_chart(), 5);
    const Motion m = bump_motion(CoordSystem::cylindrical);
    BumpMotion raw(0.1, 0.2);
    for (std::size_t p = 0; p < g->size(); ++p) {
        const Vec3 X = g->coord(p);
        const Vec3 y = cyl::to_cartesian(m.phi(X, 0.3));
        EXPECT_LT((y - raw.x(cyl::to_cartesian(X), 0.3)).norm(), 1e-13);
    }
}

TEST(Configuration, FiniteDifferenceFMatchesAnalytic) {
    const Motion m = bump_motion(CoordSystem::cartesian);
    auto err = [&](int n) {
        const GridPtr g = build_grid(cartesian_patch(), n);
        return max_abs_diff(configure(m, g, 0.4).F, configure(m, g, 0.4, true).F);
    };
    EXPECT_LT(err(9), 5e-3);
    EXPECT_GT(std::log2(err(9) / err(17)), 1.8);
}

// ---------------------------------------------------------------------------
// Forms

TEST(Forms, WedgeOfOneFormsAnticommutes) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SmoothFieldGenerator gen(seed);
        const GridPtr g = build_grid(unit_cube(), 5);
        const Form a = scalar_form(gen.field(g, 3), 1, Rep::spatial);
        const Form b = scalar_form(gen.field(g, 3), 1, Rep::spatial);
        const Form ab = wedge(a, b), ba = wedge(b, a);
        EXPECT_LT(max_abs(ab.c + ba.c), 1e-14);
        EXPECT_LT(max_abs(wedge(a, a).c), 1e-14);
    }
}

TEST(Forms, WedgeOfBasisCovectors) {
    const GridPtr g = build_grid(unit_cube(), 5);
    Field e[3];
    for (int i = 0; i < 3; ++i) {
        e[i] = Field(g, 3);
        for (std::size_t p = 0; p < g->size(); ++p) e[i](p, i) = 1.0;
    }
    const Form vol = wedge(wedge(scalar_form(e[0], 1, Rep::spatial), scalar_form(e[1], 1, Rep::spatial)),
                           scalar_form(e[2], 1, Rep::spatial));
    const Form rev = wedge(wedge(scalar_form(e[1], 1, Rep::spatial), scalar_form(e[0], 1, Rep::spatial)),
                           scalar_form(e[2], 1, Rep::spatial));
    for (std::size_t p = 0; p < g->size(); ++p) {
        EXPECT_DOUBLE_EQ(vol.c.v[p], 1.0);
        EXPECT_DOUBLE_EQ(rev.c.v[p], -1.0);
    }
}

TEST(Forms, ExteriorDerivativeSquaredVanishes) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SmoothFieldGenerator gen(seed);
        const GridPtr g = build_grid(unit_cube(), 7);
        for (int k = 0; k <= 1; ++k) {
            const Form a = scalar_form(gen.field(g, slots::count[k]), k, Rep::spatial);
            EXPECT_LT(max_abs(exterior_derivative(exterior_derivative(a)).c), 1e-11) << k;
        }
    }
}

TEST(Forms, InteriorProductOfOneForm) {
    SmoothFieldGenerator gen(5);
    const GridPtr g = build_grid(unit_cube(), 5);
    const Field v = gen.field(g, 3), a = gen.field(g, 3);
    const Form r = interior_product(v, scalar_form(a, 1, Rep::spatial));
    for (std::size_t p = 0; p < g->size(); ++p) EXPECT_NEAR(r.c.v[p], v.vec(p).dot(a.vec(p)), 1e-14);
}

TEST(Forms, LieDerivativeOfFunctionIsDirectional) {
    SmoothFieldGenerator gen(6);
    const GridPtr g = build_grid(unit_cube(), 6);
    const Field v = gen.field(g, 3), f = gen.field(g, 1);
    const Form l = lie_derivative_form(v, scalar_form(f, 0, Rep::spatial));
    const Field d = gradient(f);
    for (std::size_t p = 0; p < g->size(); ++p) EXPECT_NEAR(l.c.v[p], v.vec(p).dot(d.vec(p)), 1e-12);
}

TEST(Forms, LieDerivativeRejectsValuedForms) {
    const GridPtr g = build_grid(unit_cube(), 5);
    Form a(g, 1, ValueKind::vector, Rep::spatial);
    EXPECT_THROW(lie_derivative_form(Field(g, 3), a), RepresentationError);
}

TEST(Forms, DegreeOutOfRange) {
    const GridPtr g = build_grid(unit_cube(), 5);
    EXPECT_THROW(Form(g, 4, ValueKind::scalar, Rep::spatial), std::exception);
}

TEST(Forms, HodgeRoundTripAllDegreesAndRepresentations) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Context ctx = test_context(CoordSystem::cylindrical, 5);
        SmoothFieldGenerator gen(seed);
        for (Rep rep : {Rep::spatial, Rep::material, Rep::convective})
            for (int k = 0; k <= 3; ++k) {
                Form z(ctx.grid(), k, ValueKind::vector, rep);
                z.c = gen.field(ctx.grid(), z.c.ncomp);
                if (rep == Rep::material) z.over = ctx.cfg;
                const Form X = star_flat(z, ctx);
                EXPECT_EQ(X.degree, 3 - k);
                EXPECT_EQ(X.parity, Parity::pseudo);
                EXPECT_LT(max_abs_diff(star_sharp(X, ctx).c, z.c), 1e-12);
            }
    }
}

TEST(Forms, HodgeOfVectorIsMassWeightedFlat) {
    // Zero-form v: (star v)_i = rho g_ij v^j sqrt(det g) on the single 3-slot.
    const Context ctx = identity_context(cylindrical_chart(), 5);
    const Field v = sample(ctx.grid(), 3, [](const Vec3&, double* o) { Eigen::Map<Vec3>{o} = Vec3(0.0, 1.0, 0.0); });
    const Form M = star_flat(vector_form(v, Rep::spatial), ctx);
    for (std::size_t p = 0; p < M.nodes(); ++p) {
        const double r = ctx.grid()->coord(p)[0];
        EXPECT_NEAR(M(p, 1, 0), r * r * ctx.mu_s.v[p], 1e-12);
        EXPECT_NEAR(M(p, 0, 0), 0.0, 1e-14);
    }
}

TEST(Forms, HodgeRejectsNonPositiveDensity) {
    const Context ctx = identity_context(unit_cube(), 5);
    Field mu = ctx.mu_s;
    mu.v[3] = 0.0;
    const Form z = vector_form(Field(ctx.grid(), 3), Rep::spatial);
    EXPECT_THROW(hodge_flat(z, ctx.g_tilde, ctx.g_tilde, mu), std::exception);
}

TEST(Forms, PullbackThenPushforwardIsIdentity) {
    const Context ctx = test_context(CoordSystem::cartesian, 7, 0.4, true);
    SmoothFieldGenerator gen(3);
    for (int k = 0; k <= 3; ++k)
        for (ValueKind vk : {ValueKind::vector, ValueKind::covector}) {
            Form a(ctx.grid(), k, vk, Rep::spatial);
            a.c = gen.field(ctx.grid(), a.c.ncomp);
            const Form back = pushforward(pullback(a, ctx), ctx);
            EXPECT_EQ(back.rep, Rep::spatial);
            EXPECT_LT(max_abs_diff(back.c, a.c), 1e-12) << k;
        }
}

TEST(Forms, PullbackActsLegByLeg) {
    // Full pullback is the composition of the two one-leg pullbacks; pulling
    // only the form leg leaves a two-point form over the configuration.
    const Context ctx = test_context(CoordSystem::cylindrical, 5, 0.4, true);
    SmoothFieldGenerator gen(4);
    Form a(ctx.grid(), 2, ValueKind::covector, Rep::spatial, Parity::pseudo);
    a.c = gen.field(ctx.grid(), a.c.ncomp);
    const Form mid = pull_form_leg(a, ctx);
    EXPECT_EQ(mid.rep, Rep::material);
    EXPECT_TRUE(mid.over);
    const Form full = pullback(a, ctx);
    EXPECT_EQ(full.rep, Rep::convective);
    EXPECT_LT(max_abs_diff(pull_value_leg(mid, ctx).c, full.c), 1e-14);
    EXPECT_THROW(pull_value_leg(a, ctx), RepresentationError);
}

TEST(Forms, NaiveComponentPullbackIsNotTheLegwisePullback) {
    // Transforming a covector-valued 2-form as if it were a scalar form per
    // value component skips the value leg: the results differ once F != I.
    const Context ctx = test_context(CoordSystem::cartesian, 5, 0.4, true);
    SmoothFieldGenerator gen(9);
    Form a(ctx.grid(), 2, ValueKind::covector, Rep::spatial, Parity::pseudo);
    a.c = gen.field(ctx.grid(), a.c.ncomp);
    const Form legwise = pullback(a, ctx);
    const Form form_only = pull_form_leg(a, ctx);
    EXPECT_GT(max_abs_diff(legwise.c, form_only.c), 1e-3);
}

TEST(Forms, DualityPairingNeedsComplementaryDegrees) {
    const GridPtr g = build_grid(unit_cube(), 5);
    const Form a(g, 1, ValueKind::vector, Rep::spatial), b(g, 1, ValueKind::covector, Rep::spatial);
    EXPECT_THROW(duality_pairing(b, a), ConfigError);
}

TEST(Forms, StokesOnTheUnitCube) {
    // Integral of d beta equals the boundary integral of beta, 2-form beta,
    // exact for bilinear components with the trapezoid rule.
    const GridPtr g = build_grid(unit_cube(), 6);
    const Field c = sample(g, 3, [](const Vec3& x, double* o) {
        o[0] = x[0] * x[1] + x[2];
        o[1] = 2.0 * x[1] - x[0] * x[2];
        o[2] = x[2] * x[1] + 1.0;
    });
    const Form beta = scalar_form(c, 2, Rep::spatial);
    const double lhs = integrate_interior(exterior_derivative(beta).c);
    const double rhs = integrate_boundary(beta.c);
    EXPECT_NEAR(lhs, rhs, 1e-12);
    EXPECT_GT(std::abs(lhs), 0.1);
}
