#pragma once

#include <functional>
#include <vector>

#include "elastoform/config.hpp"

namespace elastoform {

enum class Leg { spatial, body };

struct Slot {
    bool up;
    Leg leg;
};

// Levi-Civita data of one representation. Derivatives run along spatial
// directions when Finv is set (pulled-back sampling), otherwise along body
// directions. Spatial legs differentiated along body directions see
// F^j_I (Gamma^i_jk o phi).
struct Connection {
    Rep rep = Rep::spatial;
    const Field* Finv = nullptr;
    const Field* F = nullptr;
    const Field* gamma_s = nullptr;
    const Field* gamma_b = nullptr;

    bool spatial_direction() const { return Finv != nullptr; }
    Leg value_leg() const { return rep == Rep::convective ? Leg::body : Leg::spatial; }
    Leg form_leg() const { return rep == Rep::spatial ? Leg::spatial : Leg::body; }

    // A[leg][a][P][Q] = connection coefficient Gamma^P_{aQ} at node p.
    void coefficients(std::size_t p, double A[2][3][3][3]) const {
        for (int leg = 0; leg < 2; ++leg)
            for (int a = 0; a < 3; ++a)
                for (int P = 0; P < 3; ++P)
                    for (int Q = 0; Q < 3; ++Q) A[leg][a][P][Q] = 0.0;
        if (gamma_s) {
            const double* gs = gamma_s->at(p);
            for (int a = 0; a < 3; ++a)
                for (int P = 0; P < 3; ++P)
                    for (int Q = 0; Q < 3; ++Q) {
                        double s;
                        if (spatial_direction()) {
                            s = gs[P * 9 + a * 3 + Q];
                        } else {
                            if (!F) throw RepresentationError("material connection needs the configuration");
                            s = 0.0;
                            for (int j = 0; j < 3; ++j) s += (*F)(p, j * 3 + a) * gs[P * 9 + j * 3 + Q];
                        }
                        A[0][a][P][Q] = s;
                    }
        }
        if (gamma_b) {
            const double* gb = gamma_b->at(p);
            for (int a = 0; a < 3; ++a)
                for (int P = 0; P < 3; ++P)
                    for (int Q = 0; Q < 3; ++Q) {
                        double s;
                        if (!spatial_direction()) {
                            s = gb[P * 9 + a * 3 + Q];
                        } else {
                            s = 0.0;
                            for (int I = 0; I < 3; ++I) s += (*Finv)(p, I * 3 + a) * gb[P * 9 + I * 3 + Q];
                        }
                        A[1][a][P][Q] = s;
                    }
        }
    }
};

inline Connection spatial_connection(const Context& ctx) {
    Connection c;
    c.rep = Rep::spatial;
    c.Finv = &ctx.cfg->Finv;
    c.F = &ctx.cfg->F;
    c.gamma_s = &ctx.gamma_s;
    return c;
}

inline Connection convective_connection(const Context& ctx) {
    Connection c;
    c.rep = Rep::convective;
    c.gamma_b = &ctx.gamma_hat;
    return c;
}

// Value legs use the spatial Christoffels along phi; body legs use those of G.
inline Connection material_connection(const Context& ctx) {
    Connection c;
    c.rep = Rep::material;
    c.F = &ctx.cfg->F;
    c.gamma_s = &ctx.gamma_s;
    c.gamma_b = &ctx.gamma_G;
    return c;
}

inline Connection connection_for(Rep rep, const Context& ctx) {
    switch (rep) {
        case Rep::spatial: return spatial_connection(ctx);
        case Rep::convective: return convective_connection(ctx);
        case Rep::material: return material_connection(ctx);
        default: throw RepresentationError("no connection for the reference representation");
    }
}

inline Field frame_gradient(const Field& f, const Connection& conn) {
    return frame_gradient(f, conn.Finv);
}

// Covariant derivative of a tensor field whose indices are described by
// `slots` (row-major, ncomp = 3^rank). out(p, a*ncomp + c) = nabla_a T_c.
inline Field covariant_derivative(const Field& T, const std::vector<Slot>& slots, const Connection& conn) {
    int expect = 1;
    for (std::size_t r = 0; r < slots.size(); ++r) expect *= 3;
    if (expect != T.ncomp) throw ConfigError("slot list does not match the field shape");
    const int nc = T.ncomp;
    const int rank = static_cast<int>(slots.size());
    std::vector<int> stride(rank, 1);
    for (int r = rank - 2; r >= 0; --r) stride[r] = stride[r + 1] * 3;
    Field out = frame_gradient(T, conn);
    double A[2][3][3][3];
    for (std::size_t p = 0; p < T.nodes(); ++p) {
        conn.coefficients(p, A);
        const double* t = T.at(p);
        double* o = out.at(p);
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < nc; ++c) {
                double s = 0.0;
                for (int r = 0; r < rank; ++r) {
                    const int L = slots[r].leg == Leg::spatial ? 0 : 1;
                    const int idx = (c / stride[r]) % 3;
                    const int base = c - idx * stride[r];
                    for (int q = 0; q < 3; ++q) {
                        if (slots[r].up) s += A[L][a][idx][q] * t[base + q * stride[r]];
                        else s -= A[L][a][q][idx] * t[base + q * stride[r]];
                    }
                }
                o[a * nc + c] += s;
            }
    }
    return out;
}

// nabla v for a vector field on the value leg of the connection; out(p, a*3 + i).
inline Field covariant_derivative_vector(const Field& v, const Connection& conn) {
    return covariant_derivative(v, {{true, conn.value_leg()}}, conn);
}

inline Field covariant_derivative_covector(const Field& w, const Connection& conn) {
    return covariant_derivative(w, {{false, conn.value_leg()}}, conn);
}

// Divergence: the derivative index contracted with index `slot` (must be up).
inline Field divergence(const Field& T, const std::vector<Slot>& slots, const Connection& conn, int slot = 0) {
    if (slot < 0 || slot >= static_cast<int>(slots.size()) || !slots[slot].up)
        throw ConfigError("divergence needs a contravariant index to contract");
    const Field D = covariant_derivative(T, slots, conn);
    const int nc = T.ncomp, rank = static_cast<int>(slots.size());
    int stride = 1;
    for (int r = rank - 1; r > slot; --r) stride *= 3;
    Field out(T.grid, nc / 3);
    for (std::size_t p = 0; p < T.nodes(); ++p)
        for (int c = 0; c < nc; ++c) {
            const int idx = (c / stride) % 3;
            const int hi = c / (stride * 3), lo = c % stride;
            out(p, hi * stride + lo) += D(p, idx * nc + c);
        }
    return out;
}

// Exterior covariant derivative: component fields of each form slot are
// differentiated as vector (or covector) fields, then antisymmetrized over
// the form indices. Scalar forms reduce to the exterior derivative.
// D holds the partial derivatives of the components, D(p, b*ncomp + c).
inline Form exterior_covariant_derivative(const Form& a, const Connection& conn, Field D) {
    if (a.rep != conn.rep)
        throw RepresentationError(std::string("connection is ") + to_string(conn.rep) + ", form is " + to_string(a.rep));
    if (a.degree >= 3) throw ConfigError("exterior covariant derivative of a 3-form is undefined");
    if (a.kind != ValueKind::scalar) {
        const int L = conn.value_leg() == Leg::spatial ? 0 : 1;
        const int ns = a.nslots(), nc = a.c.ncomp;
        double A[2][3][3][3];
        for (std::size_t p = 0; p < a.nodes(); ++p) {
            conn.coefficients(p, A);
            for (int b = 0; b < 3; ++b)
                for (int i = 0; i < 3; ++i)
                    for (int s = 0; s < ns; ++s) {
                        double acc = 0.0;
                        for (int q = 0; q < 3; ++q)
                            acc += a.kind == ValueKind::vector ? A[L][b][i][q] * a(p, q, s) : -A[L][b][q][i] * a(p, q, s);
                        D(p, b * nc + i * ns + s) += acc;
                    }
        }
    }
    return antisymmetrize_derivative(a, D);
}

inline Form exterior_covariant_derivative(const Form& a, const Connection& conn) {
    return exterior_covariant_derivative(a, conn, frame_gradient(a.c, conn));
}

// Cartan: L_v = d i_v + i_v d on scalar forms.
inline Form lie_derivative_form(const Field& v, const Form& a, const Field* Finv = nullptr) {
    if (a.kind != ValueKind::scalar) throw RepresentationError("lie_derivative_form expects a scalar form");
    Form r(a.grid(), a.degree, a.kind, a.rep, a.parity);
    r.over = a.over;
    if (a.degree > 0) r.c += exterior_derivative(interior_product(v, a), Finv).c;
    if (a.degree < 3) r.c += interior_product(v, exterior_derivative(a, Finv)).c;
    return r;
}

// D_t of a two-point field zeta(p, i*cols + col) with one spatial vector
// index: d_t zeta^j + (Gamma^j_ik o phi) v~^i zeta^k, column by column.
inline Field covariant_rate(const Field& dzeta_dt, const Field& zeta, const Field& v_material, const Field& gamma_s,
                            int cols) {
    Field out = dzeta_dt;
    for (std::size_t p = 0; p < out.nodes(); ++p) {
        const double* gs = gamma_s.at(p);
        for (int col = 0; col < cols; ++col)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int i = 0; i < 3; ++i)
                    for (int k = 0; k < 3; ++k) s += gs[j * 9 + i * 3 + k] * v_material(p, i) * zeta(p, k * cols + col);
                out(p, j * cols + col) += s;
            }
    }
    return out;
}

// Material time derivative of a time family zeta(t) over the motion, with
// the time derivative by central differences of step dt.
inline Field material_time_derivative(const std::function<Field(double)>& zeta, const Motion& m, const GridPtr& grid,
                                      double t, double dt, int cols) {
    if (!(dt > 0.0)) throw ConfigError("material time derivative needs dt > 0 for snapshot differencing");
    const Field dz = (0.5 / dt) * (zeta(t + dt) - zeta(t - dt));
    const Context ctx = make_context(configure(m, grid, t), reference_metric(m, grid, t));
    return covariant_rate(dz, zeta(t), material_velocity(m, grid, t), ctx.gamma_s, cols);
}

// Material velocity gradient nabla~_I v~^i, returned as F-shaped (p, i*3 + I).
inline Field material_velocity_gradient(const Field& v_material, const Context& ctx) {
    const Field D = covariant_derivative_vector(v_material, material_connection(ctx));  // (I*3 + i)
    Field out(v_material.grid, 9);
    for (std::size_t p = 0; p < out.nodes(); ++p)
        for (int i = 0; i < 3; ++i)
            for (int I = 0; I < 3; ++I) out(p, i * 3 + I) = D(p, I * 3 + i);
    return out;
}

struct AccelerationTriplet {
    Field a_material;
    Field a_spatial;
    Field a_convective;
};

// a~ = D_t v~, a = d_t v + nabla_v v, a^ = d_t v^ + nabla^_{v^} v^, with time
// derivatives by central differences of step dt. Spatial time derivatives at
// fixed x are obtained from fixed-X ones by subtracting v . grad.
inline AccelerationTriplet acceleration_triplet(const Motion& m, const GridPtr& grid, double t, double dt) {
    const Context ctx = make_context(configure(m, grid, t), reference_metric(m, grid, t));
    const Field v = material_velocity(m, grid, t);
    const Field dv = (0.5 / dt) * (material_velocity(m, grid, t + dt) - material_velocity(m, grid, t - dt));
    AccelerationTriplet at;
    at.a_material = covariant_rate(dv, v, v, ctx.gamma_s, 1);

    const Connection sc = spatial_connection(ctx);
    const Field grad_v = spatial_gradient(v, ctx.cfg->Finv);
    const Field nab_v = covariant_derivative_vector(v, sc);
    at.a_spatial = Field(grid, 3);
    for (std::size_t p = 0; p < v.nodes(); ++p)
        for (int i = 0; i < 3; ++i) {
            double s = dv(p, i);
            for (int j = 0; j < 3; ++j) s += v(p, j) * (nab_v(p, j * 3 + i) - grad_v(p, j * 3 + i));
            at.a_spatial(p, i) = s;
        }

    const Field vh = convective_velocity(v, ctx.c());
    const Field vh_p = convective_velocity(material_velocity(m, grid, t + dt), configure(m, grid, t + dt));
    const Field vh_m = convective_velocity(material_velocity(m, grid, t - dt), configure(m, grid, t - dt));
    const Field dvh = (0.5 / dt) * (vh_p - vh_m);
    const Field nab_vh = covariant_derivative_vector(vh, convective_connection(ctx));
    at.a_convective = dvh;
    for (std::size_t p = 0; p < v.nodes(); ++p)
        for (int I = 0; I < 3; ++I)
            for (int J = 0; J < 3; ++J) at.a_convective(p, I) += vh(p, J) * nab_vh(p, J * 3 + I);
    return at;
}

// The covariant velocity gradient lowered on the value leg, as a 2-tensor
// (p, a*3 + b) with the derivative index first. swap_legs transposes it.
inline Field covariant_gradient_flat(const Field& v, const MetricField& m, const Connection& conn,
                                     bool swap_legs = false) {
    const Field D = covariant_derivative_vector(v, conn);
    Field out(v.grid, 9);
    for (std::size_t p = 0; p < out.nodes(); ++p) {
        const Mat3 d = D.mat(p);  // d(a, i) = nabla_a v^i
        Mat3 low = d * m.g.mat(p);
        if (swap_legs) low.transposeInPlace();
        out.set_mat(p, low);
    }
    return out;
}

}  // namespace elastoform
