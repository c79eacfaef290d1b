#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "elastoform/forms.hpp"

namespace elastoform {

// Sampled embedding with its tangent map. F(p, i*3 + I) = F^i_I and
// Finv(p, I*3 + i) = (F^-1)^I_i; phi holds ambient chart coordinates.
struct Configuration {
    Field phi;
    Field F;
    Field Finv;
    Field detF;
    CoordSystem ambient = CoordSystem::cartesian;
    double t = 0.0;

    const GridPtr& grid() const { return phi.grid; }
};

// Completes a configuration from phi and F; rejects orientation reversal.
inline Configuration finish_configuration(Field phi, Field F, CoordSystem ambient, double t) {
    Configuration c;
    c.Finv = Field(phi.grid, 9);
    c.detF = Field(phi.grid, 1);
    for (std::size_t p = 0; p < phi.nodes(); ++p) {
        const Mat3 f = F.mat(p);
        const double d = f.determinant();
        if (!(d > 0.0)) throw OrientationError("deformation gradient has det F <= 0", p);
        c.detF.v[p] = d;
        c.Finv.set_mat(p, f.inverse());
    }
    c.phi = std::move(phi);
    c.F = std::move(F);
    c.ambient = ambient;
    c.t = t;
    return c;
}

// F^i_I = d phi^i / dX^I by finite differences.
inline Configuration deformation_gradient(Field phi, CoordSystem ambient, double t = 0.0) {
    if (phi.ncomp != 3) throw ConfigError("embedding needs 3 components");
    const Field d = gradient(phi);  // d(p, I*3 + i)
    Field F(phi.grid, 9);
    for (std::size_t p = 0; p < phi.nodes(); ++p)
        for (int i = 0; i < 3; ++i)
            for (int I = 0; I < 3; ++I) F(p, i * 3 + I) = d(p, I * 3 + i);
    return finish_configuration(std::move(phi), std::move(F), ambient, t);
}

// J = det F * sqrt(det(g o phi) / det G).
inline Field jacobian(const Configuration& c, const MetricField& g_tilde, const MetricField& G) {
    Field J(c.grid(), 1);
    for (std::size_t p = 0; p < J.nodes(); ++p)
        J.v[p] = c.detF.v[p] * g_tilde.sqrt_det.v[p] / G.sqrt_det.v[p];
    return J;
}

struct InducedMetrics {
    MetricField g_hat;
    MetricField g_tilde;
};

// g_tilde = g o phi, g_hat = F^T g_tilde F.
inline InducedMetrics induced_metrics(const Configuration& c) {
    Field gt = ambient_metric(c.ambient, c.phi);
    Field gh(c.grid(), 9);
    for (std::size_t p = 0; p < gh.nodes(); ++p) {
        const Mat3 f = c.F.mat(p);
        gh.set_mat(p, f.transpose() * gt.mat(p) * f);
    }
    return {make_metric(std::move(gh), Rep::convective), make_metric(std::move(gt), Rep::spatial)};
}

// ---------------------------------------------------------------------------
// Motions. Physical motions act on Cartesian positions; a Motion expresses one
// in the chart of its ambient coordinate system.

class PhysicalMotion {
public:
    virtual ~PhysicalMotion() = default;
    virtual Vec3 x(const Vec3& X, double t) const = 0;
    virtual Vec3 v(const Vec3& X, double t) const = 0;
    virtual Mat3 F(const Vec3& X, double t) const = 0;
    virtual Mat3 Fdot(const Vec3& X, double t) const = 0;
};

class IdentityMotion : public PhysicalMotion {
public:
    Vec3 x(const Vec3& X, double) const override { return X; }
    Vec3 v(const Vec3&, double) const override { return Vec3::Zero(); }
    Mat3 F(const Vec3&, double) const override { return Mat3::Identity(); }
    Mat3 Fdot(const Vec3&, double) const override { return Mat3::Zero(); }
};

inline Mat3 cross_matrix(const Vec3& a) {
    Mat3 m;
    m << 0, -a[2], a[1], a[2], 0, -a[0], -a[1], a[0], 0;
    return m;
}

// x = R(t) (base(X, t) - c) + c + b t with R(t) the rotation by omega*t about axis.
class RigidMotion : public PhysicalMotion {
public:
    RigidMotion(double omega, Vec3 axis, Vec3 center, Vec3 translation_rate,
                std::shared_ptr<const PhysicalMotion> base = std::make_shared<IdentityMotion>())
        : omega_(omega), axis_(axis.normalized()), c_(center), b_(translation_rate), base_(std::move(base)) {}

    Mat3 R(double t) const {
        return Eigen::AngleAxisd(omega_ * t, axis_).toRotationMatrix();
    }
    Vec3 x(const Vec3& X, double t) const override { return R(t) * (base_->x(X, t) - c_) + c_ + b_ * t; }
    Vec3 v(const Vec3& X, double t) const override {
        const Mat3 r = R(t);
        return omega_ * cross_matrix(axis_) * r * (base_->x(X, t) - c_) + r * base_->v(X, t) + b_;
    }
    Mat3 F(const Vec3& X, double t) const override { return R(t) * base_->F(X, t); }
    Mat3 Fdot(const Vec3& X, double t) const override {
        const Mat3 r = R(t);
        return omega_ * cross_matrix(axis_) * r * base_->F(X, t) + r * base_->Fdot(X, t);
    }

private:
    double omega_;
    Vec3 axis_, c_, b_;
    std::shared_ptr<const PhysicalMotion> base_;
};

// x = (1 + rate t) X.
class DilationMotion : public PhysicalMotion {
public:
    explicit DilationMotion(double rate) : c_(rate) {}
    Vec3 x(const Vec3& X, double t) const override { return (1.0 + c_ * t) * X; }
    Vec3 v(const Vec3& X, double) const override { return c_ * X; }
    Mat3 F(const Vec3&, double t) const override { return (1.0 + c_ * t) * Mat3::Identity(); }
    Mat3 Fdot(const Vec3&, double) const override { return c_ * Mat3::Identity(); }

private:
    double c_;
};

// x = (X1 + gamma(t) X2, X2, X3), gamma(t) = gamma0 + rate t.
class ShearMotion : public PhysicalMotion {
public:
    ShearMotion(double gamma0, double rate) : g0_(gamma0), r_(rate) {}
    double gamma(double t) const { return g0_ + r_ * t; }
    Vec3 x(const Vec3& X, double t) const override { return {X[0] + gamma(t) * X[1], X[1], X[2]}; }
    Vec3 v(const Vec3& X, double) const override { return {r_ * X[1], 0.0, 0.0}; }
    Mat3 F(const Vec3&, double t) const override {
        Mat3 f = Mat3::Identity();
        f(0, 1) = gamma(t);
        return f;
    }
    Mat3 Fdot(const Vec3&, double) const override {
        Mat3 f = Mat3::Zero();
        f(0, 1) = r_;
        return f;
    }

private:
    double g0_, r_;
};

// x = X + a(t) u(X), a(t) = amplitude + rate t, with the smooth bump
// u = (sin(pi X2) cos(pi X3), sin(pi X3) cos(pi X1), sin(pi X1) cos(pi X2)) / pi.
class BumpMotion : public PhysicalMotion {
public:
    BumpMotion(double amplitude, double rate) : a0_(amplitude), a1_(rate) {}
    double a(double t) const { return a0_ + a1_ * t; }
    static Vec3 u(const Vec3& X) {
        const double pi = M_PI;
        return Vec3(std::sin(pi * X[1]) * std::cos(pi * X[2]), std::sin(pi * X[2]) * std::cos(pi * X[0]),
                    std::sin(pi * X[0]) * std::cos(pi * X[1])) /
               pi;
    }
    static Mat3 du(const Vec3& X) {
        const double pi = M_PI;
        const double s0 = std::sin(pi * X[0]), c0 = std::cos(pi * X[0]);
        const double s1 = std::sin(pi * X[1]), c1 = std::cos(pi * X[1]);
        const double s2 = std::sin(pi * X[2]), c2 = std::cos(pi * X[2]);
        Mat3 m;
        m << 0.0, c1 * c2, -s1 * s2,  //
            -s2 * s0, 0.0, c2 * c0,   //
            c0 * c1, -s0 * s1, 0.0;
        return m;
    }
    Vec3 x(const Vec3& X, double t) const override { return X + a(t) * u(X); }
    Vec3 v(const Vec3& X, double) const override { return a1_ * u(X); }
    Mat3 F(const Vec3& X, double t) const override { return Mat3::Identity() + a(t) * du(X); }
    Mat3 Fdot(const Vec3& X, double) const override { return a1_ * du(X); }

private:
    double a0_, a1_;
};

namespace cyl {

inline Vec3 to_cartesian(const Vec3& q) { return {q[0] * std::cos(q[1]), q[0] * std::sin(q[1]), q[2]}; }
inline Vec3 from_cartesian(const Vec3& y) { return {std::hypot(y[0], y[1]), std::atan2(y[1], y[0]), y[2]}; }

// d cart / d (r, theta, z)
inline Mat3 d_to_cartesian(const Vec3& q) {
    Mat3 m;
    const double c = std::cos(q[1]), s = std::sin(q[1]);
    m << c, -q[0] * s, 0.0, s, q[0] * c, 0.0, 0.0, 0.0, 1.0;
    return m;
}

// d (r, theta, z) / d cart
inline Mat3 d_from_cartesian(const Vec3& y) {
    const double r2 = y[0] * y[0] + y[1] * y[1], r = std::sqrt(r2);
    Mat3 m;
    m << y[0] / r, y[1] / r, 0.0, -y[1] / r2, y[0] / r2, 0.0, 0.0, 0.0, 1.0;
    return m;
}

// Time derivative of d_from_cartesian(y(t)) given y' = yd.
inline Mat3 d_from_cartesian_rate(const Vec3& y, const Vec3& yd) {
    const double r2 = y[0] * y[0] + y[1] * y[1], r = std::sqrt(r2);
    const double rd = (y[0] * yd[0] + y[1] * yd[1]) / r;
    Mat3 m = Mat3::Zero();
    m(0, 0) = yd[0] / r - y[0] * rd / r2;
    m(0, 1) = yd[1] / r - y[1] * rd / r2;
    m(1, 0) = -yd[1] / r2 + 2.0 * y[1] * rd / (r2 * r);
    m(1, 1) = yd[0] / r2 - 2.0 * y[0] * rd / (r2 * r);
    return m;
}

}  // namespace cyl

// A physical motion expressed in the ambient chart; body chart coordinates are
// read as ambient coordinates of the initial placement.
class Motion {
public:
    Motion(std::shared_ptr<const PhysicalMotion> m, CoordSystem ambient, std::string name = "motion")
        : m_(std::move(m)), ambient_(ambient), name_(std::move(name)) {}

    CoordSystem ambient() const { return ambient_; }
    const std::string& name() const { return name_; }

    Vec3 phi(const Vec3& X, double t) const {
        if (ambient_ == CoordSystem::cartesian) return m_->x(X, t);
        return cyl::from_cartesian(m_->x(cyl::to_cartesian(X), t));
    }
    Vec3 velocity(const Vec3& X, double t) const {
        if (ambient_ == CoordSystem::cartesian) return m_->v(X, t);
        const Vec3 Y = cyl::to_cartesian(X);
        return cyl::d_from_cartesian(m_->x(Y, t)) * m_->v(Y, t);
    }
    Mat3 F(const Vec3& X, double t) const {
        if (ambient_ == CoordSystem::cartesian) return m_->F(X, t);
        const Vec3 Y = cyl::to_cartesian(X);
        return cyl::d_from_cartesian(m_->x(Y, t)) * m_->F(Y, t) * cyl::d_to_cartesian(X);
    }
    Mat3 Fdot(const Vec3& X, double t) const {
        if (ambient_ == CoordSystem::cartesian) return m_->Fdot(X, t);
        const Vec3 Y = cyl::to_cartesian(X);
        const Vec3 y = m_->x(Y, t);
        const Mat3 dc = cyl::d_to_cartesian(X);
        return (cyl::d_from_cartesian_rate(y, m_->v(Y, t)) * m_->F(Y, t) +
                cyl::d_from_cartesian(y) * m_->Fdot(Y, t)) *
               dc;
    }

private:
    std::shared_ptr<const PhysicalMotion> m_;
    CoordSystem ambient_;
    std::string name_;
};

inline Field sample_phi(const Motion& m, const GridPtr& grid, double t) {
    return sample(grid, 3, [&](const Vec3& X, double* o) { Eigen::Map<Vec3>{o} = m.phi(X, t); });
}

// Snapshot of a motion; F by finite differences unless analytic_F is set.
inline Configuration configure(const Motion& m, const GridPtr& grid, double t, bool analytic_F = false) {
    Field phi = sample_phi(m, grid, t);
    if (!analytic_F) return deformation_gradient(std::move(phi), m.ambient(), t);
    Field F = sample(grid, 9, [&](const Vec3& X, double* o) { Eigen::Map<Mat3>{o} = m.F(X, t); });
    return finish_configuration(std::move(phi), std::move(F), m.ambient(), t);
}

// ---------------------------------------------------------------------------
// Everything derived from one configuration that the operators need.
struct Context {
    std::shared_ptr<const Configuration> cfg;
    MetricField g_tilde;  // spatial metric at image points
    MetricField g_hat;    // convective metric
    MetricField G;        // reference metric of the body
    Field gamma_s;        // spatial Christoffels composed with phi
    Field gamma_hat;      // Christoffels of g_hat
    Field gamma_G;        // Christoffels of G
    Field J;
    Field mu_hat;         // chart density of the body mass form
    Field mu_s;           // chart density of the spatial mass form at image points

    const GridPtr& grid() const { return cfg->grid(); }
    const Configuration& c() const { return *cfg; }
};

// mu_hat defaults to the reference volume form (material density 1).
inline Context make_context(Configuration c, const MetricField& G, const Field* mu_hat = nullptr) {
    Context ctx;
    auto cfg = std::make_shared<const Configuration>(std::move(c));
    InducedMetrics im = induced_metrics(*cfg);
    ctx.g_tilde = std::move(im.g_tilde);
    ctx.g_hat = std::move(im.g_hat);
    ctx.G = G;
    ctx.G.rep = Rep::reference;
    ctx.gamma_s = christoffel(ctx.g_tilde, &cfg->Finv);
    ctx.gamma_hat = christoffel(ctx.g_hat);
    ctx.gamma_G = christoffel(ctx.G);
    ctx.J = jacobian(*cfg, ctx.g_tilde, ctx.G);
    ctx.mu_hat = mu_hat ? *mu_hat : G.sqrt_det;
    ctx.mu_s = Field(cfg->grid(), 1);
    for (std::size_t p = 0; p < ctx.mu_s.nodes(); ++p) ctx.mu_s.v[p] = ctx.mu_hat.v[p] / cfg->detF.v[p];
    ctx.cfg = std::move(cfg);
    return ctx;
}

// Reference metric G = g_hat of the motion at time t0.
inline MetricField reference_metric(const Motion& m, const GridPtr& grid, double t0 = 0.0, bool analytic_F = false) {
    MetricField G = induced_metrics(configure(m, grid, t0, analytic_F)).g_hat;
    G.rep = Rep::reference;
    return G;
}

// ---------------------------------------------------------------------------
// Leg-wise pullbacks.

inline void require_rep(const Form& a, Rep r) {
    if (a.rep != r)
        throw RepresentationError(std::string("expected a ") + to_string(r) + " form, got " + to_string(a.rep));
}

// Form-leg pullback: every form index contracted with F. Spatial -> material.
inline Form pull_form_leg(const Form& a, const Context& ctx) {
    require_rep(a, Rep::spatial);
    Form r = a;
    r.rep = Rep::material;
    r.over = ctx.cfg;
    const int k = a.degree, ns = a.nslots();
    for (std::size_t p = 0; p < a.nodes(); ++p) {
        const double* f = ctx.cfg->F.at(p);
        for (int i = 0; i < a.nvalue(); ++i)
            for (int sI = 0; sI < ns; ++sI) {
                double s = 0.0;
                for (int sJ = 0; sJ < ns; ++sJ) s += slots::minor_det(k, sJ, sI, f) * a(p, i, sJ);
                r(p, i, sI) = s;
            }
    }
    return r;
}

inline Form push_form_leg(const Form& a, const Context& ctx) {
    require_rep(a, Rep::material);
    Form r = a;
    r.rep = Rep::spatial;
    r.over.reset();
    const int k = a.degree, ns = a.nslots();
    for (std::size_t p = 0; p < a.nodes(); ++p) {
        const double* fi = ctx.cfg->Finv.at(p);
        for (int i = 0; i < a.nvalue(); ++i)
            for (int sJ = 0; sJ < ns; ++sJ) {
                double s = 0.0;
                for (int sI = 0; sI < ns; ++sI) s += slots::minor_det(k, sI, sJ, fi) * a(p, i, sI);
                r(p, i, sJ) = s;
            }
    }
    return r;
}

// Value-leg pullback: vectors with F^-1, covectors with F. Material -> convective.
inline Form pull_value_leg(const Form& a, const Context& ctx) {
    require_rep(a, Rep::material);
    Form r = a;
    r.rep = Rep::convective;
    r.over.reset();
    if (a.kind == ValueKind::scalar) return r;
    const int ns = a.nslots();
    for (std::size_t p = 0; p < a.nodes(); ++p) {
        const double* f = ctx.cfg->F.at(p);
        const double* fi = ctx.cfg->Finv.at(p);
        for (int I = 0; I < 3; ++I)
            for (int s = 0; s < ns; ++s) {
                double acc = 0.0;
                for (int i = 0; i < 3; ++i)
                    acc += (a.kind == ValueKind::vector ? fi[I * 3 + i] : f[i * 3 + I]) * a(p, i, s);
                r(p, I, s) = acc;
            }
    }
    return r;
}

inline Form push_value_leg(const Form& a, const Context& ctx) {
    require_rep(a, Rep::convective);
    Form r = a;
    r.rep = Rep::material;
    r.over = ctx.cfg;
    if (a.kind == ValueKind::scalar) return r;
    const int ns = a.nslots();
    for (std::size_t p = 0; p < a.nodes(); ++p) {
        const double* f = ctx.cfg->F.at(p);
        const double* fi = ctx.cfg->Finv.at(p);
        for (int i = 0; i < 3; ++i)
            for (int s = 0; s < ns; ++s) {
                double acc = 0.0;
                for (int I = 0; I < 3; ++I)
                    acc += (a.kind == ValueKind::vector ? f[i * 3 + I] : fi[I * 3 + i]) * a(p, I, s);
                r(p, i, s) = acc;
            }
    }
    return r;
}

inline Form pullback(const Form& a, const Context& ctx) { return pull_value_leg(pull_form_leg(a, ctx), ctx); }
inline Form pushforward(const Form& a, const Context& ctx) { return push_form_leg(push_value_leg(a, ctx), ctx); }

// ---------------------------------------------------------------------------
// Velocities.

struct VelocityTriplet {
    Field v_material;    // v~ = d_t phi, ambient components at image points
    Field v_spatial;     // v in pulled-back sampling (same components)
    Field v_convective;  // v^ = F^-1 v~
};

// Time derivative of phi: analytic when dt == 0, else central differences.
inline Field material_velocity(const Motion& m, const GridPtr& grid, double t, double dt = 0.0) {
    if (dt == 0.0)
        return sample(grid, 3, [&](const Vec3& X, double* o) { Eigen::Map<Vec3>{o} = m.velocity(X, t); });
    const Field a = sample_phi(m, grid, t + dt);
    const Field b = sample_phi(m, grid, t - dt);
    return (0.5 / dt) * (a - b);
}

inline Field convective_velocity(const Field& v_material, const Configuration& c) {
    Field vh(v_material.grid, 3);
    for (std::size_t p = 0; p < vh.nodes(); ++p) vh.set_vec(p, c.Finv.mat(p) * v_material.vec(p));
    return vh;
}

inline VelocityTriplet velocity_triplet(const Motion& m, const Configuration& c, double dt = 0.0) {
    VelocityTriplet vt;
    vt.v_material = material_velocity(m, c.grid(), c.t, dt);
    vt.v_spatial = vt.v_material;
    vt.v_convective = convective_velocity(vt.v_material, c);
    return vt;
}

// max |g~(v~, v~) - g^(v^, v^)| over nodes.
inline double metric_norm_equality_residual(const VelocityTriplet& vt, const InducedMetrics& im) {
    double r = 0.0;
    for (std::size_t p = 0; p < vt.v_material.nodes(); ++p) {
        const Vec3 a = vt.v_material.vec(p), b = vt.v_convective.vec(p);
        const double lhs = a.dot(im.g_tilde.g.mat(p) * a);
        const double rhs = b.dot(im.g_hat.g.mat(p) * b);
        r = std::max(r, std::abs(lhs - rhs));
    }
    return r;
}

}  // namespace elastoform
