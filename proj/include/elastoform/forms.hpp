#pragma once

#include <array>
#include <memory>
#include <string>

#include "elastoform/geometry.hpp"

namespace elastoform {

enum class ValueKind { scalar, vector, covector };
enum class Parity { true_form, pseudo };

inline Parity operator^(Parity a, Parity b) {
    return (a == b) ? Parity::true_form : Parity::pseudo;
}

struct Configuration;

// Sorted multi-index slots of k-forms in three dimensions.
namespace slots {

inline constexpr int count[4] = {1, 3, 3, 1};

// idx[k][s] lists the sorted indices of slot s of a k-form.
inline constexpr int idx[4][3][3] = {
    {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}},
    {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}},
    {{0, 1, 0}, {0, 2, 0}, {1, 2, 0}},
    {{0, 1, 2}, {0, 0, 0}, {0, 0, 0}},
};

// Slot and sign of an arbitrary (possibly unsorted) index tuple; sign 0 when an
// index repeats.
inline std::pair<int, int> lookup(int k, const int* a) {
    int b[3] = {0, 0, 0};
    for (int i = 0; i < k; ++i) b[i] = a[i];
    int sign = 1;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j + 1 < k - i; ++j)
            if (b[j] > b[j + 1]) {
                std::swap(b[j], b[j + 1]);
                sign = -sign;
            }
    for (int i = 0; i + 1 < k; ++i)
        if (b[i] == b[i + 1]) return {0, 0};
    for (int s = 0; s < count[k]; ++s) {
        bool eq = true;
        for (int i = 0; i < k; ++i) eq = eq && idx[k][s][i] == b[i];
        if (eq) return {s, sign};
    }
    return {0, 0};
}

// Complement of slot s of a k-form as a (3-k)-form slot, with the sign of the
// permutation (I, J) of (0, 1, 2).
inline std::pair<int, int> complement(int k, int s) {
    int full[3];
    int n = 0;
    for (int i = 0; i < k; ++i) full[n++] = idx[k][s][i];
    int rest[3];
    int m = 0;
    for (int a = 0; a < 3; ++a) {
        bool in = false;
        for (int i = 0; i < k; ++i) in = in || idx[k][s][i] == a;
        if (!in) rest[m++] = a;
    }
    for (int i = 0; i < m; ++i) full[n++] = rest[i];
    const auto sign = lookup(3, full).second;
    return {lookup(3 - k, rest).first, sign};
}

// det of the k x k minor M[rows I, cols J] for slots I, J of a k-form.
inline double minor_det(int k, int si, int sj, const double* m /* row-major 3x3 */) {
    const int* r = idx[k][si];
    const int* c = idx[k][sj];
    switch (k) {
        case 0: return 1.0;
        case 1: return m[r[0] * 3 + c[0]];
        case 2: return m[r[0] * 3 + c[0]] * m[r[1] * 3 + c[1]] - m[r[0] * 3 + c[1]] * m[r[1] * 3 + c[0]];
        default: {
            Eigen::Map<const Mat3> a(m);
            return a.determinant();
        }
    }
}

}  // namespace slots

// A k-form with an optional vector or covector value index. Component of value
// index i and sorted form slot s at node p: c(p, i * nslots + s).
struct Form {
    int degree = 0;
    ValueKind kind = ValueKind::scalar;
    Rep rep = Rep::spatial;
    Parity parity = Parity::true_form;
    Field c;
    // Configuration a material form lives over.
    std::shared_ptr<const Configuration> over;

    Form() = default;
    Form(GridPtr g, int k, ValueKind vk, Rep r, Parity par = Parity::true_form)
        : degree(k), kind(vk), rep(r), parity(par), c(std::move(g), nvalue_of(vk) * slots::count[k]) {
        if (k < 0 || k > 3) throw ConfigError("form degree must lie in 0..3");
    }

    static int nvalue_of(ValueKind vk) { return vk == ValueKind::scalar ? 1 : 3; }
    int nvalue() const { return nvalue_of(kind); }
    int nslots() const { return slots::count[degree]; }
    const GridPtr& grid() const { return c.grid; }
    std::size_t nodes() const { return c.nodes(); }
    double& operator()(std::size_t p, int i, int s) { return c(p, i * nslots() + s); }
    double operator()(std::size_t p, int i, int s) const { return c(p, i * nslots() + s); }
};

inline void require_same_frame(const Form& a, const Form& b) {
    if (a.rep != b.rep)
        throw RepresentationError(std::string("representation mismatch: ") + to_string(a.rep) + " vs " +
                                  to_string(b.rep));
    if (a.rep == Rep::material && a.over != b.over)
        throw RepresentationError("material forms live over different configurations");
}

// Vector field / covector field as a 0-form.
inline Form vector_form(const Field& v, Rep rep, ValueKind kind = ValueKind::vector) {
    Form f(v.grid, 0, kind, rep);
    f.c = v;
    return f;
}

inline Form scalar_form(const Field& f, int k, Rep rep, Parity par = Parity::true_form) {
    Form a(f.grid, k, ValueKind::scalar, rep, par);
    a.c = f;
    return a;
}

// Wedge of two scalar forms.
inline Form wedge(const Form& a, const Form& b) {
    if (a.kind != ValueKind::scalar || b.kind != ValueKind::scalar)
        throw RepresentationError("wedge expects scalar forms");
    require_same_frame(a, b);
    const int k = a.degree, l = b.degree;
    if (k + l > 3) throw ConfigError("wedge degree exceeds 3");
    Form r(a.grid(), k + l, ValueKind::scalar, a.rep, a.parity ^ b.parity);
    r.over = a.over;
    for (int sa = 0; sa < slots::count[k]; ++sa)
        for (int sb = 0; sb < slots::count[l]; ++sb) {
            int t[3];
            for (int i = 0; i < k; ++i) t[i] = slots::idx[k][sa][i];
            for (int i = 0; i < l; ++i) t[k + i] = slots::idx[l][sb][i];
            const auto [s, sign] = slots::lookup(k + l, t);
            if (sign == 0) continue;
            for (std::size_t p = 0; p < r.nodes(); ++p) r(p, 0, s) += sign * a(p, 0, sa) * b(p, 0, sb);
        }
    return r;
}

// zeta (vector-valued k-form) wedge-dot X (covector-valued l-form): value legs
// contracted, form legs wedged with zeta's legs first. No metric involved.
inline Form wedge_dot(const Form& zeta, const Form& X) {
    if (zeta.kind != ValueKind::vector || X.kind != ValueKind::covector)
        throw RepresentationError("wedge_dot expects a vector-valued and a covector-valued form");
    require_same_frame(zeta, X);
    const int k = zeta.degree, l = X.degree;
    if (k + l > 3) throw ConfigError("wedge_dot degree exceeds 3");
    Form r(zeta.grid(), k + l, ValueKind::scalar, zeta.rep, zeta.parity ^ X.parity);
    r.over = zeta.over;
    for (int sa = 0; sa < slots::count[k]; ++sa)
        for (int sb = 0; sb < slots::count[l]; ++sb) {
            int t[3];
            for (int i = 0; i < k; ++i) t[i] = slots::idx[k][sa][i];
            for (int i = 0; i < l; ++i) t[k + i] = slots::idx[l][sb][i];
            const auto [s, sign] = slots::lookup(k + l, t);
            if (sign == 0) continue;
            for (std::size_t p = 0; p < r.nodes(); ++p) {
                double d = 0.0;
                for (int i = 0; i < 3; ++i) d += zeta(p, i, sa) * X(p, i, sb);
                r(p, 0, s) += sign * d;
            }
        }
    return r;
}

// Contraction of v into the first slot of every value component's k-form.
inline Form interior_product(const Field& v, const Form& a) {
    const int k = a.degree;
    if (k == 0) throw ConfigError("interior product of a 0-form is undefined");
    Form r(a.grid(), k - 1, a.kind, a.rep, a.parity);
    r.over = a.over;
    for (int s = 0; s < slots::count[k - 1]; ++s)
        for (int q = 0; q < 3; ++q) {
            int t[3];
            t[0] = q;
            for (int i = 0; i < k - 1; ++i) t[1 + i] = slots::idx[k - 1][s][i];
            const auto [sa, sign] = slots::lookup(k, t);
            if (sign == 0) continue;
            for (std::size_t p = 0; p < r.nodes(); ++p)
                for (int i = 0; i < a.nvalue(); ++i) r(p, i, s) += sign * v(p, q) * a(p, i, sa);
        }
    return r;
}

// Antisymmetrized derivative of the form leg, given the per-direction
// derivatives D(p, b * ncomp + c) of every component c = i*nslots + s:
// (dA)_{b0..bk} = sum_m (-1)^m D_{b_m} A_{b0..^b_m..bk}.
inline Form antisymmetrize_derivative(const Form& a, const Field& D) {
    const int k = a.degree;
    if (k >= 3) throw ConfigError("exterior derivative of a 3-form is undefined");
    Form r(a.grid(), k + 1, a.kind, a.rep, a.parity);
    r.over = a.over;
    const int nc = a.c.ncomp;
    for (int s = 0; s < slots::count[k + 1]; ++s) {
        const int* K = slots::idx[k + 1][s];
        for (int m = 0; m <= k; ++m) {
            int rest[3];
            int n = 0;
            for (int q = 0; q <= k; ++q)
                if (q != m) rest[n++] = K[q];
            const int sr = slots::lookup(k, rest).first;
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            const int b = K[m];
            for (std::size_t p = 0; p < r.nodes(); ++p)
                for (int i = 0; i < a.nvalue(); ++i)
                    r(p, i, s) += sign * D(p, b * nc + i * a.nslots() + sr);
        }
    }
    return r;
}

// Exterior derivative applied component-wise (no connection on the value
// index). For spatial forms in pulled-back sampling pass Finv.
inline Form exterior_derivative(const Form& a, const Field* Finv = nullptr) {
    return antisymmetrize_derivative(a, frame_gradient(a.c, Finv));
}

// Raise (with an inverse metric) or lower (with a metric) all k form indices.
inline void transform_form_slots(int k, const double* metric, const double* in, double* out) {
    for (int si = 0; si < slots::count[k]; ++si) {
        double s = 0.0;
        for (int sj = 0; sj < slots::count[k]; ++sj) s += slots::minor_det(k, si, sj, metric) * in[sj];
        out[si] = s;
    }
}

// Pointwise inner product <zeta, xi>: value legs with the value metric, each
// form index with the inverse form metric.
inline Field inner_product(const Form& zeta, const Form& xi, const MetricField& value_metric,
                           const MetricField& form_metric) {
    if (zeta.degree != xi.degree || zeta.kind != xi.kind)
        throw RepresentationError("inner product needs forms of equal shape");
    const int k = zeta.degree, ns = zeta.nslots();
    Field out(zeta.grid(), 1);
    for (std::size_t p = 0; p < out.nodes(); ++p) {
        double raised[3][3];
        for (int i = 0; i < xi.nvalue(); ++i)
            transform_form_slots(k, form_metric.ginv.at(p), xi.c.at(p) + i * ns, raised[i]);
        double s = 0.0;
        for (int i = 0; i < zeta.nvalue(); ++i)
            for (int j = 0; j < xi.nvalue(); ++j) {
                double gij;
                if (zeta.kind == ValueKind::scalar) gij = 1.0;
                else if (zeta.kind == ValueKind::vector) gij = value_metric.g(p, i * 3 + j);
                else gij = value_metric.ginv(p, i * 3 + j);
                for (int t = 0; t < ns; ++t) s += gij * zeta(p, i, t) * raised[j][t];
            }
        out.v[p] = s;
    }
    return out;
}

// Hodge star on the form leg weighted by a top-form of chart density mu:
// a wedge (star b) = <a, b> mu.
inline void hodge_form_leg(int k, const double* ginv_form, double mu, const double* in, double* out) {
    double raised[3];
    transform_form_slots(k, ginv_form, in, raised);
    for (int s = 0; s < slots::count[k]; ++s) {
        const auto [t, sign] = slots::complement(k, s);
        out[t] = mu * sign * raised[s];
    }
}

inline void hodge_form_leg_inverse(int k_out, const double* g_form, double mu, const double* in, double* out) {
    double raised[3];
    for (int s = 0; s < slots::count[k_out]; ++s) {
        const auto [t, sign] = slots::complement(k_out, s);
        raised[s] = sign * in[t] / mu;
    }
    transform_form_slots(k_out, g_form, raised, out);
}

inline void require_positive_density(const Field& mu) {
    for (std::size_t p = 0; p < mu.nodes(); ++p)
        if (!(mu.v[p] > 0.0)) throw GeometryError("degenerate mass form", p);
}

// Flat Hodge star: vector-valued k-form -> covector-valued (3-k) pseudo-form,
// defined by zeta wedge-dot (star_flat xi) = <zeta, xi> mu. The value leg uses
// value_metric and the form leg form_metric (they differ only for two-point
// fields over a configuration).
inline Form hodge_flat(const Form& zeta, const MetricField& value_metric, const MetricField& form_metric,
                       const Field& mu) {
    if (zeta.kind != ValueKind::vector) throw RepresentationError("hodge_flat expects a vector-valued form");
    require_positive_density(mu);
    const int k = zeta.degree;
    Form r(zeta.grid(), 3 - k, ValueKind::covector, zeta.rep,
           zeta.parity == Parity::true_form ? Parity::pseudo : Parity::true_form);
    r.over = zeta.over;
    const int ns = zeta.nslots(), nr = r.nslots();
    for (std::size_t p = 0; p < r.nodes(); ++p) {
        const double* g = value_metric.g.at(p);
        double lowered[3][3];
        for (int i = 0; i < 3; ++i)
            for (int s = 0; s < ns; ++s) {
                double acc = 0.0;
                for (int j = 0; j < 3; ++j) acc += g[i * 3 + j] * zeta(p, j, s);
                lowered[i][s] = acc;
            }
        for (int i = 0; i < 3; ++i) hodge_form_leg(k, form_metric.ginv.at(p), mu.v[p], lowered[i], r.c.at(p) + i * nr);
    }
    return r;
}

// Inverse of hodge_flat.
inline Form hodge_sharp(const Form& X, const MetricField& value_metric, const MetricField& form_metric,
                        const Field& mu) {
    if (X.kind != ValueKind::covector) throw RepresentationError("hodge_sharp expects a covector-valued form");
    require_positive_density(mu);
    const int k = 3 - X.degree;
    Form r(X.grid(), k, ValueKind::vector, X.rep,
           X.parity == Parity::true_form ? Parity::pseudo : Parity::true_form);
    r.over = X.over;
    const int ns = r.nslots(), nx = X.nslots();
    for (std::size_t p = 0; p < r.nodes(); ++p) {
        double un[3][3];
        for (int i = 0; i < 3; ++i) hodge_form_leg_inverse(k, form_metric.g.at(p), mu.v[p], X.c.at(p) + i * nx, un[i]);
        const double* gi = value_metric.ginv.at(p);
        for (int i = 0; i < 3; ++i)
            for (int s = 0; s < ns; ++s) {
                double acc = 0.0;
                for (int j = 0; j < 3; ++j) acc += gi[i * 3 + j] * un[j][s];
                r(p, i, s) = acc;
            }
    }
    return r;
}

// Orientation reversal: pseudo-forms change sign, true forms do not.
inline Form orientation_flip(Form a) {
    if (a.parity == Parity::pseudo) a.c *= -1.0;
    return a;
}

// <X | zeta> = integral of zeta wedge-dot X over the chart.
inline double duality_pairing(const Form& X, const Form& zeta) {
    if (zeta.degree + X.degree != 3) throw ConfigError("duality pairing needs complementary degrees");
    return integrate_interior(wedge_dot(zeta, X).c);
}

// Form-leg pullback to the boundary face normal to `axis`: slots containing the
// normal direction vanish, the others are kept as face components.
inline Form face_pullback(const Form& a, int axis) {
    Form r = a;
    for (int s = 0; s < a.nslots(); ++s) {
        bool has = false;
        for (int i = 0; i < a.degree; ++i) has = has || slots::idx[a.degree][s][i] == axis;
        if (!has) continue;
        for (std::size_t p = 0; p < r.nodes(); ++p)
            for (int i = 0; i < a.nvalue(); ++i) r(p, i, s) = 0.0;
    }
    return r;
}

// Boundary integral of i_f^* zeta wedge-dot i_f^* X over all six faces.
inline double boundary_pairing(const Form& zeta, const Form& X) {
    if (zeta.degree + X.degree != 2) throw ConfigError("boundary pairing needs total degree 2");
    Field beta(zeta.grid(), 3);
    for (int axis = 0; axis < 3; ++axis) {
        const Form w = wedge_dot(face_pullback(zeta, axis), face_pullback(X, axis));
        const int slot = 2 - axis;
        for (std::size_t p = 0; p < beta.nodes(); ++p) beta(p, slot) = w(p, 0, slot);
    }
    return integrate_boundary(beta);
}

}  // namespace elastoform
