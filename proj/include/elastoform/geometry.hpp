#pragma once

#include <string>

#include <Eigen/Eigenvalues>

#include "elastoform/grid.hpp"

namespace elastoform {

enum class Rep { spatial, material, convective, reference };

inline const char* to_string(Rep r) {
    switch (r) {
        case Rep::spatial: return "spatial";
        case Rep::material: return "material";
        case Rep::convective: return "convective";
        case Rep::reference: return "reference";
    }
    return "?";
}

inline Rep rep_from_string(const std::string& s) {
    if (s == "spatial") return Rep::spatial;
    if (s == "material") return Rep::material;
    if (s == "convective") return Rep::convective;
    if (s == "reference") return Rep::reference;
    throw ConfigError("unknown representation '" + s + "'");
}

inline constexpr double kSpdThreshold = 1e-10;

// Symmetric (0,2) metric with its inverse and sqrt(det), all per node.
struct MetricField {
    Rep rep = Rep::spatial;
    Field g;         // g(p, i*3+j)
    Field ginv;      // g^ij
    Field sqrt_det;  // sqrt(det g_ij)
};

inline MetricField make_metric(Field g, Rep rep) {
    if (g.ncomp != 9) throw ConfigError("metric field needs 9 components");
    MetricField m;
    m.rep = rep;
    m.ginv = Field(g.grid, 9);
    m.sqrt_det = Field(g.grid, 1);
    for (std::size_t p = 0; p < g.nodes(); ++p) {
        Mat3 a = g.mat(p);
        a = 0.5 * (a + a.transpose()).eval();
        g.set_mat(p, a);
        Eigen::SelfAdjointEigenSolver<Mat3> es(a, Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues().minCoeff() > kSpdThreshold) || !a.allFinite())
            throw GeometryError("metric is not positive definite", p);
        Mat3 inv = a.inverse();
        inv = 0.5 * (inv + inv.transpose()).eval();
        m.ginv.set_mat(p, inv);
        m.sqrt_det.v[p] = std::sqrt(a.determinant());
    }
    m.g = std::move(g);
    return m;
}

// Metric of the ambient chart evaluated at sampled ambient positions x(p).
inline Mat3 ambient_metric_at(CoordSystem cs, const Vec3& x) {
    Mat3 g = Mat3::Identity();
    if (cs == CoordSystem::cylindrical) g(1, 1) = x[0] * x[0];
    return g;
}

inline Field ambient_metric(CoordSystem cs, const Field& x) {
    Field g(x.grid, 9);
    for (std::size_t p = 0; p < x.nodes(); ++p) g.set_mat(p, ambient_metric_at(cs, x.vec(p)));
    return g;
}

// Gamma(p, k*9 + i*3 + j) = Gamma^k_ij, from finite differences of the metric
// samples. With Finv given, the metric is a spatial field in pulled-back
// sampling and derivatives go through the chain rule.
inline Field christoffel(const MetricField& m, const Field* Finv = nullptr) {
    const Field dg = frame_gradient(m.g, Finv);  // dg(p, l*9 + i*3 + j) = d_l g_ij
    Field gam(m.g.grid, 27);
    for (std::size_t p = 0; p < gam.nodes(); ++p) {
        const double* d = dg.at(p);
        double lower[27];  // Gamma_{l,ij}
        for (int l = 0; l < 3; ++l)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    lower[l * 9 + i * 3 + j] =
                        0.5 * (d[i * 9 + l * 3 + j] + d[j * 9 + i * 3 + l] - d[l * 9 + i * 3 + j]);
        const double* gi = m.ginv.at(p);
        double* out = gam.at(p);
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < 3; ++l) s += gi[k * 3 + l] * lower[l * 9 + i * 3 + j];
                    out[k * 9 + i * 3 + j] = s;
                    out[k * 9 + j * 3 + i] = s;
                }
    }
    return gam;
}

enum class IndexMap { flat, sharp };

// Contracts index `slot` of a rank-r tensor field (ncomp = 3^r) with g (flat)
// or g^-1 (sharp). Index order is row-major, slot 0 slowest.
inline Field raise_lower(const Field& t, const MetricField& m, int slot, IndexMap dir) {
    int rank = 0;
    for (int n = 1; n < t.ncomp; n *= 3) ++rank;
    if (slot < 0 || slot >= rank) throw ConfigError("index slot " + std::to_string(slot) + " does not exist");
    int stride = 1;
    for (int r = rank - 1; r > slot; --r) stride *= 3;
    const Field& mm = dir == IndexMap::flat ? m.g : m.ginv;
    Field out(t.grid, t.ncomp);
    for (std::size_t p = 0; p < t.nodes(); ++p) {
        const double* a = t.at(p);
        const double* g = mm.at(p);
        double* o = out.at(p);
        for (int c = 0; c < t.ncomp; ++c) {
            const int idx = (c / stride) % 3;
            const int base = c - idx * stride;
            double s = 0.0;
            for (int q = 0; q < 3; ++q) s += g[idx * 3 + q] * a[base + q * stride];
            o[c] = s;
        }
    }
    return out;
}

// Riemannian volume pseudo-form, density sqrt(det g) in chart coordinates.
struct VolumePseudoForm {
    Field density;
};

inline VolumePseudoForm volume_form(const MetricField& m) { return {m.sqrt_det}; }

// (L_v g)_ij = v^k d_k g_ij + g_kj d_i v^k + g_ik d_j v^k.
inline Field lie_derivative_metric(const Field& v, const MetricField& m, const Field* Finv = nullptr) {
    const Field dg = frame_gradient(m.g, Finv);
    const Field dv = frame_gradient(v, Finv);  // dv(p, i*3 + k) = d_i v^k
    Field out(v.grid, 9);
    for (std::size_t p = 0; p < v.nodes(); ++p) {
        const double* vv = v.at(p);
        const double* g = m.g.at(p);
        const double* d = dg.at(p);
        const double* dvp = dv.at(p);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k)
                    s += vv[k] * d[k * 9 + i * 3 + j] + g[k * 3 + j] * dvp[i * 3 + k] +
                         g[i * 3 + k] * dvp[j * 3 + k];
                out(p, i * 3 + j) = s;
                out(p, j * 3 + i) = s;
            }
    }
    return out;
}

inline double killing_residual(const Field& v, const MetricField& m, const Field* Finv = nullptr) {
    return max_abs(lie_derivative_metric(v, m, Finv));
}

}  // namespace elastoform
