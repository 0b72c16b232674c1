#pragma once

// Fixed-dimension dense tensor algebra for d = 2 or 3: deformation gradients,
// Cauchy stresses, velocity gradients, rotations, and the rank-3 second
// velocity gradient / hyperstress. All scalars are double; balance-residual
// tolerances below 1e-10 rule out single precision.

#include <array>
#include <cmath>
#include <stdexcept>

namespace tvem {

template <int d>
struct Vec {
    static_assert(d == 2 || d == 3, "only 2-D and 3-D are supported");
    std::array<double, d> a{};

    bool operator==(const Vec&) const = default;

    double& operator[](int i) { return a[i]; }
    double operator[](int i) const { return a[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < d; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < d; ++i) a[i] -= o.a[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < d; ++i) a[i] *= s;
        return *this;
    }
};

template <int d>
struct Mat {
    static_assert(d == 2 || d == 3, "only 2-D and 3-D are supported");
    // Row-major: a[i*d + j] is entry (i,j).
    std::array<double, d * d> a{};

    bool operator==(const Mat&) const = default;

    double& operator()(int i, int j) { return a[i * d + j]; }
    double operator()(int i, int j) const { return a[i * d + j]; }

    static Mat identity() {
        Mat m;
        for (int i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < d * d; ++i) a[i] += o.a[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (int i = 0; i < d * d; ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat& operator*=(double s) {
        for (int i = 0; i < d * d; ++i) a[i] *= s;
        return *this;
    }
};

// Rank-3 tensor, e.g. (∇²v)_{ijk} = ∂²v_i/∂x_j∂x_k and the hyperstress.
template <int d>
struct Ten3 {
    static_assert(d == 2 || d == 3, "only 2-D and 3-D are supported");
    std::array<double, d * d * d> a{};

    bool operator==(const Ten3&) const = default;

    double& operator()(int i, int j, int k) { return a[(i * d + j) * d + k]; }
    double operator()(int i, int j, int k) const { return a[(i * d + j) * d + k]; }

    Ten3& operator+=(const Ten3& o) {
        for (int i = 0; i < d * d * d; ++i) a[i] += o.a[i];
        return *this;
    }
    Ten3& operator-=(const Ten3& o) {
        for (int i = 0; i < d * d * d; ++i) a[i] -= o.a[i];
        return *this;
    }
    Ten3& operator*=(double s) {
        for (int i = 0; i < d * d * d; ++i) a[i] *= s;
        return *this;
    }
};

template <int d>
inline Vec<d> operator+(Vec<d> x, const Vec<d>& y) { return x += y; }
template <int d>
inline Vec<d> operator-(Vec<d> x, const Vec<d>& y) { return x -= y; }
template <int d>
inline Vec<d> operator*(double s, Vec<d> x) { return x *= s; }

template <int d>
inline Mat<d> operator+(Mat<d> x, const Mat<d>& y) { return x += y; }
template <int d>
inline Mat<d> operator-(Mat<d> x, const Mat<d>& y) { return x -= y; }
template <int d>
inline Mat<d> operator*(double s, Mat<d> x) { return x *= s; }

template <int d>
inline Ten3<d> operator+(Ten3<d> x, const Ten3<d>& y) { return x += y; }
template <int d>
inline Ten3<d> operator-(Ten3<d> x, const Ten3<d>& y) { return x -= y; }
template <int d>
inline Ten3<d> operator*(double s, Ten3<d> x) { return x *= s; }

template <int d>
inline double dot(const Vec<d>& x, const Vec<d>& y) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += x[i] * y[i];
    return s;
}

template <int d>
inline double det(const Mat<d>& m) {
    if constexpr (d == 2) {
        return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    } else {
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
             - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
             + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    }
}

// Cof M, normalized so that M·(Cof M)ᵀ = det(M)·𝕀.
template <int d>
inline Mat<d> cofactor(const Mat<d>& m) {
    Mat<d> c;
    if constexpr (d == 2) {
        c(0, 0) = m(1, 1);
        c(0, 1) = -m(1, 0);
        c(1, 0) = -m(0, 1);
        c(1, 1) = m(0, 0);
    } else {
        c(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
        c(0, 1) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
        c(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
        c(1, 0) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
        c(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
        c(1, 2) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
        c(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
        c(2, 1) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
        c(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    }
    return c;
}

template <int d>
inline Mat<d> transpose(const Mat<d>& m) {
    Mat<d> t;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) t(i, j) = m(j, i);
    return t;
}

template <int d>
inline Mat<d> sym(const Mat<d>& m) {
    Mat<d> s;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

template <int d>
inline double trace(const Mat<d>& m) {
    double t = 0.0;
    for (int i = 0; i < d; ++i) t += m(i, i);
    return t;
}

template <int d>
inline double frobenius2(const Mat<d>& m) {
    double s = 0.0;
    for (double x : m.a) s += x * x;
    return s;
}

template <int d>
inline double frobenius(const Mat<d>& m) { return std::sqrt(frobenius2(m)); }

template <int d>
inline double frobenius2(const Ten3<d>& t) {
    double s = 0.0;
    for (double x : t.a) s += x * x;
    return s;
}

template <int d>
inline double frobenius(const Ten3<d>& t) { return std::sqrt(frobenius2(t)); }

template <int d>
inline Mat<d> matmul(const Mat<d>& x, const Mat<d>& y) {
    Mat<d> r;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += x(i, k) * y(k, j);
            r(i, j) = s;
        }
    return r;
}

template <int d>
inline Mat<d> operator*(const Mat<d>& x, const Mat<d>& y) { return matmul(x, y); }

template <int d>
inline Vec<d> matvec(const Mat<d>& m, const Vec<d>& v) {
    Vec<d> r;
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

// Full double contraction A:B = Σ_ij A_ij B_ij.
template <int d>
inline double ddot(const Mat<d>& x, const Mat<d>& y) {
    double s = 0.0;
    for (int i = 0; i < d * d; ++i) s += x.a[i] * y.a[i];
    return s;
}

struct SingularMatrixError : std::domain_error {
    SingularMatrixError() : std::domain_error("matrix is singular (det = 0)") {}
};

template <int d>
inline Mat<d> inverse(const Mat<d>& m) {
    const double j = det(m);
    if (j == 0.0 || !std::isfinite(j)) throw SingularMatrixError();
    // Cramer: M⁻¹ = (Cof M)ᵀ/det M.
    Mat<d> inv = transpose(cofactor(m));
    inv *= 1.0 / j;
    return inv;
}

}  // namespace tvem
