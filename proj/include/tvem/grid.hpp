#pragma once

// 2-D periodic structured grid with collocated fields and centered
// second-order difference operators. Centered periodic differences are
// exactly skew-adjoint under the plain cell sum, which is what closes the
// discrete energy and entropy ledgers to round-off; every operator here is
// built from that one stencil so the adjoint pairs (grad, -div),
// (grad_vec, -div_mat), (second_grad, +div_div) hold exactly.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvem/tensor.hpp"

namespace tvem {

struct Grid {
    int nx = 0;
    int ny = 0;
    double Lx = 1.0;
    double Ly = 1.0;
    double dx = 0.0;
    double dy = 0.0;

    Grid() = default;
    Grid(int nx_, int ny_, double Lx_, double Ly_) : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
        if (nx < 4 || ny < 4) throw std::invalid_argument("Grid: nx and ny must be >= 4");
        if (!(Lx > 0.0) || !(Ly > 0.0)) throw std::invalid_argument("Grid: Lx and Ly must be positive");
        dx = Lx / nx;
        dy = Ly / ny;
    }

    // Cell centers (midpoint quadrature nodes).
    double x(int i) const { return (i + 0.5) * dx; }
    double y(int j) const { return (j + 0.5) * dy; }

    int xp(int i) const { return i + 1 < nx ? i + 1 : 0; }
    int xm(int i) const { return i > 0 ? i - 1 : nx - 1; }
    int yp(int j) const { return j + 1 < ny ? j + 1 : 0; }
    int ym(int j) const { return j > 0 ? j - 1 : ny - 1; }

    std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
    bool same_shape(const Grid& o) const { return nx == o.nx && ny == o.ny; }
};

// Per-cell storage of T, row-major over (y, x): index = j*nx + i.
template <typename T>
struct Field {
    Grid grid;
    std::vector<T> data;

    Field() = default;
    explicit Field(const Grid& g, const T& init = T{}) : grid(g), data(g.cells(), init) {}

    T& operator()(int i, int j) { return data[static_cast<std::size_t>(j) * grid.nx + i]; }
    const T& operator()(int i, int j) const {
        return data[static_cast<std::size_t>(j) * grid.nx + i];
    }

    Field& operator+=(const Field& o) {
        for (std::size_t k = 0; k < data.size(); ++k) data[k] += o.data[k];
        return *this;
    }
    Field& operator-=(const Field& o) {
        for (std::size_t k = 0; k < data.size(); ++k) data[k] -= o.data[k];
        return *this;
    }
    Field& operator*=(double a) {
        for (auto& v : data) v *= a;
        return *this;
    }
};

using ScalarField = Field<double>;
using VectorField = Field<Vec<2>>;
using MatrixField = Field<Mat<2>>;
using Tensor3Field = Field<Ten3<2>>;

// dst += a * src, the only state algebra the time stepper needs.
template <typename T>
void add_scaled(Field<T>& dst, double a, const Field<T>& src) {
    for (std::size_t k = 0; k < dst.data.size(); ++k) {
        T tmp = src.data[k];
        tmp *= a;
        dst.data[k] += tmp;
    }
}

namespace detail {

// Per-component access so one stencil implementation serves every rank.
inline double& comp(double& v, int) { return v; }
inline const double& comp(const double& v, int) { return v; }
template <int d>
double& comp(Vec<d>& v, int k) {
    return v.a[k];
}
template <int d>
const double& comp(const Vec<d>& v, int k) {
    return v.a[k];
}
template <int d>
double& comp(Mat<d>& v, int k) {
    return v.a[k];
}
template <int d>
const double& comp(const Mat<d>& v, int k) {
    return v.a[k];
}
template <int d>
double& comp(Ten3<d>& v, int k) {
    return v.a[k];
}
template <int d>
const double& comp(const Ten3<d>& v, int k) {
    return v.a[k];
}

template <typename T>
constexpr int components() {
    if constexpr (std::is_same_v<T, double>)
        return 1;
    else
        return static_cast<int>(sizeof(T::a) / sizeof(double));
}

template <typename T>
constexpr int field_rank() {
    if constexpr (std::is_same_v<T, double>)
        return 0;
    else if constexpr (std::is_same_v<T, Vec<2>>)
        return 1;
    else if constexpr (std::is_same_v<T, Mat<2>>)
        return 2;
    else {
        static_assert(std::is_same_v<T, Ten3<2>>, "unsupported field value type");
        return 3;
    }
}

}  // namespace detail

// Centered periodic x- and y-differences of one component; the sole stencil
// underlying every differential operator below.
template <typename T>
double ddx(const Field<T>& f, int i, int j, int k = 0) {
    const Grid& g = f.grid;
    return (detail::comp(f(g.xp(i), j), k) - detail::comp(f(g.xm(i), j), k)) / (2.0 * g.dx);
}
template <typename T>
double ddy(const Field<T>& f, int i, int j, int k = 0) {
    const Grid& g = f.grid;
    return (detail::comp(f(i, g.yp(j)), k) - detail::comp(f(i, g.ym(j)), k)) / (2.0 * g.dy);
}

inline VectorField grad(const ScalarField& s) {
    VectorField out(s.grid);
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            out(i, j)[0] = ddx(s, i, j);
            out(i, j)[1] = ddy(s, i, j);
        }
    return out;
}

// (grad_vec v)(a,b) = dv_a/dx_b, so dF/dt = (grad_vec v)·F composes as a
// plain matrix product.
inline MatrixField grad_vec(const VectorField& v) {
    MatrixField out(v.grid);
    for (int j = 0; j < v.grid.ny; ++j)
        for (int i = 0; i < v.grid.nx; ++i)
            for (int a = 0; a < 2; ++a) {
                out(i, j)(a, 0) = ddx(v, i, j, a);
                out(i, j)(a, 1) = ddy(v, i, j, a);
            }
    return out;
}

// (second_grad v)(a,b,c) = D_b D_c v_a: grad applied componentwise twice,
// i.e. the composed (wide) stencil, not the compact one; div_div below is
// its exact adjoint only for this composition.
inline Tensor3Field second_grad(const VectorField& v) {
    const MatrixField G = grad_vec(v);
    Tensor3Field out(v.grid);
    for (int j = 0; j < v.grid.ny; ++j)
        for (int i = 0; i < v.grid.nx; ++i)
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < 2; ++c) {
                    out(i, j)(a, 0, c) = ddx(G, i, j, a * 2 + c);
                    out(i, j)(a, 1, c) = ddy(G, i, j, a * 2 + c);
                }
    return out;
}

inline ScalarField div(const VectorField& v) {
    ScalarField out(v.grid);
    for (int j = 0; j < v.grid.ny; ++j)
        for (int i = 0; i < v.grid.nx; ++i) out(i, j) = ddx(v, i, j, 0) + ddy(v, i, j, 1);
    return out;
}

// (div_mat M)_a = D_b M(a,b).
inline VectorField div_mat(const MatrixField& M) {
    VectorField out(M.grid);
    for (int j = 0; j < M.grid.ny; ++j)
        for (int i = 0; i < M.grid.nx; ++i)
            for (int a = 0; a < 2; ++a)
                out(i, j)[a] = ddx(M, i, j, a * 2 + 0) + ddy(M, i, j, a * 2 + 1);
    return out;
}

// (div_div H)_a = D_b D_c H(a,b,c): div over the last index, then over the
// remaining one. Adjoint identity: sum second_grad(u):H = sum u·div_div(H).
inline VectorField div_div(const Tensor3Field& H) {
    MatrixField M(H.grid);
    for (int j = 0; j < H.grid.ny; ++j)
        for (int i = 0; i < H.grid.nx; ++i)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    M(i, j)(a, b) =
                        ddx(H, i, j, (a * 2 + b) * 2 + 0) + ddy(H, i, j, (a * 2 + b) * 2 + 1);
    return div_mat(M);
}

// v·grad q, componentwise in q.
template <typename T>
Field<T> advect(const Field<T>& q, const VectorField& v) {
    Field<T> out(q.grid);
    for (int j = 0; j < q.grid.ny; ++j)
        for (int i = 0; i < q.grid.nx; ++i)
            for (int k = 0; k < detail::components<T>(); ++k)
                detail::comp(out(i, j), k) =
                    v(i, j)[0] * ddx(q, i, j, k) + v(i, j)[1] * ddy(q, i, j, k);
    return out;
}

namespace detail {

// Neumaier compensated sum; the ledger residual tolerances (1e-12 of scale)
// assume quadrature does not lose digits to naive accumulation.
class CompensatedSum {
   public:
    void add(double x) {
        const double t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

   private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace detail

// Midpoint quadrature: cell sum times dx·dy.
inline double integrate(const ScalarField& f) {
    detail::CompensatedSum sum;
    for (double v : f.data) sum.add(v);
    return sum.value() * f.grid.dx * f.grid.dy;
}

inline Vec<2> integrate(const VectorField& f) {
    detail::CompensatedSum sx, sy;
    for (const auto& v : f.data) {
        sx.add(v[0]);
        sy.add(v[1]);
    }
    Vec<2> out;
    out[0] = sx.value() * f.grid.dx * f.grid.dy;
    out[1] = sy.value() * f.grid.dx * f.grid.dy;
    return out;
}

// Plain cell sum of a pointwise product, no quadrature weight; the adjoint
// identities hold for this bilinear form (and hence, after multiplying by
// dx·dy, for integrate as well).
inline double cell_inner(const ScalarField& a, const ScalarField& b) {
    detail::CompensatedSum sum;
    for (std::size_t k = 0; k < a.data.size(); ++k) sum.add(a.data[k] * b.data[k]);
    return sum.value();
}

// Snapshot format: one text header line
//   tvem-field <name> rank=<r> nx=<nx> ny=<ny> t=<t>
// followed by raw row-major little-endian float64 cell data, components
// contiguous per cell in canonical order.
struct SnapshotHeader {
    std::string field;
    int rank = 0;
    int nx = 0;
    int ny = 0;
    double t = 0.0;
};

template <typename T>
void write_snapshot(const std::string& path, const std::string& name, const Field<T>& f,
                    double t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_snapshot: cannot open " + path);
    char head[256];
    std::snprintf(head, sizeof(head), "tvem-field %s rank=%d nx=%d ny=%d t=%.17g\n", name.c_str(),
                  detail::field_rank<T>(), f.grid.nx, f.grid.ny, t);
    os << head;
    os.write(reinterpret_cast<const char*>(f.data.data()),
             static_cast<std::streamsize>(f.data.size() * sizeof(T)));
    if (!os) throw std::runtime_error("write_snapshot: write failed for " + path);
}

inline SnapshotHeader read_snapshot_header(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("snapshot: missing header");
    SnapshotHeader h;
    char name[128];
    if (std::sscanf(line.c_str(), "tvem-field %127s rank=%d nx=%d ny=%d t=%lg", name, &h.rank,
                    &h.nx, &h.ny, &h.t) != 5)
        throw std::runtime_error("snapshot: malformed header: " + line);
    h.field = name;
    return h;
}

template <typename T>
Field<T> read_snapshot(const std::string& path, SnapshotHeader* header, double Lx = 1.0,
                       double Ly = 1.0) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + path);
    const SnapshotHeader h = read_snapshot_header(is);
    if (h.rank != detail::field_rank<T>())
        throw std::runtime_error("read_snapshot: rank mismatch in " + path);
    Field<T> f(Grid(h.nx, h.ny, Lx, Ly));
    is.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(T)));
    if (!is) throw std::runtime_error("read_snapshot: truncated data in " + path);
    if (header) *header = h;
    return f;
}

// 1-D slice as CSV. axis = 0 slices along x at fixed j; axis = 1 along y at
// fixed i. Columns: coordinate, then one column per component.
template <typename T>
void write_slice_csv(const std::string& path, const Field<T>& f, int axis, int index) {
    const Grid& g = f.grid;
    if (axis != 0 && axis != 1) throw std::invalid_argument("write_slice_csv: axis must be 0 or 1");
    const int n = (axis == 0) ? g.nx : g.ny;
    const int fixed_max = (axis == 0) ? g.ny : g.nx;
    if (index < 0 || index >= fixed_max) throw std::invalid_argument("write_slice_csv: index out of range");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_slice_csv: cannot open " + path);
    os << (axis == 0 ? "x" : "y");
    for (int k = 0; k < detail::components<T>(); ++k) os << ",c" << k;
    os << "\n";
    char buf[64];
    for (int s = 0; s < n; ++s) {
        const int i = (axis == 0) ? s : index;
        const int j = (axis == 0) ? index : s;
        std::snprintf(buf, sizeof(buf), "%.17g", axis == 0 ? g.x(i) : g.y(j));
        os << buf;
        for (int k = 0; k < detail::components<T>(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", detail::comp(f(i, j), k));
            os << ',' << buf;
        }
        os << "\n";
    }
}

}  // namespace tvem
