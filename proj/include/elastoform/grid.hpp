#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elastoform/errors.hpp"

namespace elastoform {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

enum class CoordSystem { cartesian, cylindrical };

inline const char* to_string(CoordSystem c) {
    return c == CoordSystem::cartesian ? "cartesian" : "cylindrical";
}

inline CoordSystem coord_system_from_string(const std::string& s) {
    if (s == "cartesian") return CoordSystem::cartesian;
    if (s == "cylindrical") return CoordSystem::cylindrical;
    throw ConfigError("unknown coordinate system '" + s + "'");
}

struct Chart {
    std::string name = "body";
    std::array<std::array<double, 2>, 3> ranges{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
    // Coordinate system of the ambient chart the body is embedded in.
    CoordSystem coords = CoordSystem::cartesian;
};

class Grid {
public:
    static constexpr int kMinNodes = 5;

    Grid(Chart chart, std::array<int, 3> n) : chart_(std::move(chart)), n_(n) {
        for (int a = 0; a < 3; ++a) {
            if (n_[a] < kMinNodes)
                throw ConfigError("resolution " + std::to_string(n_[a]) + " on axis " +
                                  std::to_string(a) + " is below the minimum of 5 nodes");
            const double lo = chart_.ranges[a][0], hi = chart_.ranges[a][1];
            if (!(lo < hi)) throw ConfigError("chart range must satisfy lo < hi");
            h_[a] = (hi - lo) / (n_[a] - 1);
        }
        stride_ = {static_cast<std::size_t>(n_[1]) * n_[2], static_cast<std::size_t>(n_[2]), 1};
    }

    const Chart& chart() const { return chart_; }
    int n(int a) const { return n_[a]; }
    std::array<int, 3> resolution() const { return n_; }
    double h(int a) const { return h_[a]; }
    double h_max() const { return std::max({h_[0], h_[1], h_[2]}); }
    std::size_t size() const { return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2]; }
    std::size_t stride(int a) const { return stride_[a]; }

    std::size_t index(int i, int j, int k) const {
        return i * stride_[0] + j * stride_[1] + static_cast<std::size_t>(k);
    }
    std::array<int, 3> ijk(std::size_t node) const {
        return {static_cast<int>(node / stride_[0]), static_cast<int>((node / stride_[1]) % n_[1]),
                static_cast<int>(node % n_[2])};
    }
    Vec3 coord(std::size_t node) const {
        const auto p = ijk(node);
        return {chart_.ranges[0][0] + p[0] * h_[0], chart_.ranges[1][0] + p[1] * h_[1],
                chart_.ranges[2][0] + p[2] * h_[2]};
    }

    // Bit 2a is set on the lower face of axis a, bit 2a+1 on the upper face.
    unsigned face_mask(std::size_t node) const {
        const auto p = ijk(node);
        unsigned m = 0;
        for (int a = 0; a < 3; ++a) {
            if (p[a] == 0) m |= 1u << (2 * a);
            if (p[a] == n_[a] - 1) m |= 1u << (2 * a + 1);
        }
        return m;
    }
    bool on_boundary(std::size_t node) const { return face_mask(node) != 0; }

    // Trapezoid weight of one axis index.
    double axis_weight(int a, int i) const {
        return (i == 0 || i == n_[a] - 1) ? 0.5 * h_[a] : h_[a];
    }
    double weight(std::size_t node) const {
        const auto p = ijk(node);
        return axis_weight(0, p[0]) * axis_weight(1, p[1]) * axis_weight(2, p[2]);
    }

private:
    Chart chart_;
    std::array<int, 3> n_;
    std::array<double, 3> h_{};
    std::array<std::size_t, 3> stride_{};
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(const Chart& chart, std::array<int, 3> resolution) {
    return std::make_shared<const Grid>(chart, resolution);
}

inline GridPtr build_grid(const Chart& chart, int n) { return build_grid(chart, {n, n, n}); }

// Node-major storage: component c of node p lives at v[p * ncomp + c].
struct Field {
    GridPtr grid;
    int ncomp = 0;
    std::vector<double> v;

    Field() = default;
    Field(GridPtr g, int nc, double fill = 0.0)
        : grid(std::move(g)), ncomp(nc), v(grid->size() * static_cast<std::size_t>(nc), fill) {}

    std::size_t nodes() const { return grid->size(); }
    double* at(std::size_t node) { return v.data() + node * ncomp; }
    const double* at(std::size_t node) const { return v.data() + node * ncomp; }
    double& operator()(std::size_t node, int c) { return v[node * ncomp + c]; }
    double operator()(std::size_t node, int c) const { return v[node * ncomp + c]; }

    Vec3 vec(std::size_t node, int off = 0) const { return Eigen::Map<const Vec3>(at(node) + off); }
    Mat3 mat(std::size_t node, int off = 0) const { return Eigen::Map<const Mat3>(at(node) + off); }
    void set_vec(std::size_t node, const Vec3& x, int off = 0) { Eigen::Map<Vec3>(at(node) + off) = x; }
    void set_mat(std::size_t node, const Mat3& m, int off = 0) { Eigen::Map<Mat3>(at(node) + off) = m; }

    Field& operator+=(const Field& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& x : v) x *= s;
        return *this;
    }
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }

// a + s*b
inline Field axpy(const Field& a, double s, const Field& b) {
    Field r = a;
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += s * b.v[i];
    return r;
}

inline double max_abs(const Field& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(const Field& a, const Field& b) {
    if (a.v.size() != b.v.size()) throw ConfigError("field shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

// Samples fn(X, out) at every node; out has ncomp entries.
inline Field sample(GridPtr grid, int ncomp, const std::function<void(const Vec3&, double*)>& fn) {
    Field f(grid, ncomp);
    for (std::size_t p = 0; p < f.nodes(); ++p) fn(grid->coord(p), f.at(p));
    return f;
}

inline Field sample_scalar(GridPtr grid, const std::function<double(const Vec3&)>& fn) {
    return sample(std::move(grid), 1, [&](const Vec3& x, double* out) { out[0] = fn(x); });
}

// Per-node map from one field to another of ncomp_out components.
template <class Fn>
Field map_nodes(const Field& in, int ncomp_out, Fn fn) {
    Field out(in.grid, ncomp_out);
    for (std::size_t p = 0; p < in.nodes(); ++p) fn(p, in.at(p), out.at(p));
    return out;
}

inline Field component(const Field& f, int c) {
    Field out(f.grid, 1);
    for (std::size_t p = 0; p < f.nodes(); ++p) out.v[p] = f(p, c);
    return out;
}

// d/dX^axis with 2nd-order central differences inside and 2nd-order one-sided
// stencils (-3f0 + 4f1 - f2)/(2h) on the two end nodes of each line.
inline Field partial_derivative(const Field& f, int axis) {
    if (axis < 0 || axis > 2) throw ConfigError("axis " + std::to_string(axis) + " out of range 0..2");
    const Grid& g = *f.grid;
    Field out(f.grid, f.ncomp);
    const std::size_t s = g.stride(axis) * f.ncomp;
    const int n = g.n(axis);
    const double inv2h = 1.0 / (2.0 * g.h(axis));
    for (std::size_t p = 0; p < g.size(); ++p) {
        const int i = g.ijk(p)[axis];
        const double* a = f.at(p);
        double* o = out.at(p);
        if (i == 0) {
            for (int c = 0; c < f.ncomp; ++c) o[c] = (-3.0 * a[c] + 4.0 * a[c + s] - a[c + 2 * s]) * inv2h;
        } else if (i == n - 1) {
            for (int c = 0; c < f.ncomp; ++c) o[c] = (3.0 * a[c] - 4.0 * a[c - s] + a[c - 2 * s]) * inv2h;
        } else {
            for (int c = 0; c < f.ncomp; ++c) o[c] = (a[c + s] - a[c - s]) * inv2h;
        }
    }
    return out;
}

// Body gradient; out(p, a*ncomp + c) = d f_c / dX^a (derivative index first).
inline Field gradient(const Field& f) {
    Field out(f.grid, 3 * f.ncomp);
    for (int a = 0; a < 3; ++a) {
        const Field d = partial_derivative(f, a);
        for (std::size_t p = 0; p < f.nodes(); ++p)
            for (int c = 0; c < f.ncomp; ++c) out(p, a * f.ncomp + c) = d(p, c);
    }
    return out;
}

// Spatial gradient of a field stored in pulled-back sampling:
// d/dx^i = (F^-1)^I_i d/dX^I, with Finv(p, I*3 + i) = (F^-1)^I_i.
inline Field spatial_gradient(const Field& f, const Field& Finv) {
    const Field gb = gradient(f);
    Field out(f.grid, 3 * f.ncomp);
    for (std::size_t p = 0; p < f.nodes(); ++p) {
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < f.ncomp; ++c) {
                double s = 0.0;
                for (int I = 0; I < 3; ++I) s += Finv(p, I * 3 + i) * gb(p, I * f.ncomp + c);
                out(p, i * f.ncomp + c) = s;
            }
    }
    return out;
}

// Gradient in the frame of the field's legs: body when Finv is null.
inline Field frame_gradient(const Field& f, const Field* Finv) {
    return Finv ? spatial_gradient(f, *Finv) : gradient(f);
}

// Trapezoidal product quadrature of a top-form density over the chart.
inline double integrate_interior(const Field& omega) {
    if (omega.ncomp != 1) throw ConfigError("integrate_interior expects a single top-form component");
    double s = 0.0;
    for (std::size_t p = 0; p < omega.nodes(); ++p) s += omega.grid->weight(p) * omega.v[p];
    return s;
}

// Sorted 2-form slots: 0 -> (0,1), 1 -> (0,2), 2 -> (1,2). The face normal to
// axis a carries slot 2 - a; its induced outward orientation contributes
// sign (+1, -1, +1) for a = 0, 1, 2 on the upper face and the opposite on the
// lower face.
inline double face_orientation(int axis, bool upper) {
    const double s = (axis == 1) ? -1.0 : 1.0;
    return upper ? s : -s;
}

// Surface integral over the six faces of a 2-form given on the full grid
// (three sorted slot components). Face data are read from boundary nodes.
inline double integrate_boundary(const Field& beta) {
    if (beta.ncomp != 3) throw ConfigError("integrate_boundary expects a 2-form with 3 slot components");
    const Grid& g = *beta.grid;
    double total = 0.0;
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        const int slot = 2 - a;
        for (int side = 0; side < 2; ++side) {
            const int ia = side ? g.n(a) - 1 : 0;
            double face = 0.0;
            for (int ib = 0; ib < g.n(b); ++ib)
                for (int ic = 0; ic < g.n(c); ++ic) {
                    std::array<int, 3> q{};
                    q[a] = ia;
                    q[b] = ib;
                    q[c] = ic;
                    const std::size_t p = g.index(q[0], q[1], q[2]);
                    face += g.axis_weight(b, ib) * g.axis_weight(c, ic) * beta(p, slot);
                }
            total += face_orientation(a, side == 1) * face;
        }
    }
    return total;
}

}  // namespace elastoform
