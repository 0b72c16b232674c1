#include "tvem/tensor.hpp"

#include <gtest/gtest.h>

#include "oracle.hpp"

using tvem::Mat;
using tvem::Ten3;
using tvem::Vec;

namespace {

template <int d>
Mat<d> random_mat(oracle::Rng& rng, double lo = -2.0, double hi = 2.0) {
    Mat<d> m;
    for (double& x : m.a) x = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST(Tensor, DeterminantMatchesPermutationExpansion) {
    oracle::Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        auto m2 = random_mat<2>(rng);
        EXPECT_NEAR(tvem::det(m2), oracle::perm_det<2>(m2), 1e-12);
        auto m3 = random_mat<3>(rng);
        EXPECT_NEAR(tvem::det(m3), oracle::perm_det<3>(m3), 1e-12);
    }
}

TEST(Tensor, DeterminantOfIdentityAndScaling) {
    EXPECT_DOUBLE_EQ(tvem::det(Mat<2>::identity()), 1.0);
    EXPECT_DOUBLE_EQ(tvem::det(Mat<3>::identity()), 1.0);
    Mat<2> s;
    s(0, 0) = 3.0;
    s(1, 1) = 0.5;
    EXPECT_DOUBLE_EQ(tvem::det(s), 1.5);
}

TEST(Tensor, DeterminantIsMultiplicative) {
    oracle::Rng rng(102);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_mat<3>(rng);
        auto b = random_mat<3>(rng);
        EXPECT_NEAR(tvem::det(tvem::matmul(a, b)), tvem::det(a) * tvem::det(b), 1e-10);
    }
}

TEST(Tensor, CofactorSatisfiesCramerIdentity) {
    oracle::Rng rng(103);
    for (int trial = 0; trial < 100; ++trial) {
        auto m = random_mat<3>(rng);
        auto prod = tvem::matmul(m, tvem::transpose(tvem::cofactor(m)));
        const double j = tvem::det(m);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                EXPECT_NEAR(prod(i, k), (i == k) ? j : 0.0, 1e-12);
    }
}

TEST(Tensor, Cofactor2x2ClosedForm) {
    Mat<2> m;
    m(0, 0) = 1.0;
    m(0, 1) = 2.0;
    m(1, 0) = 3.0;
    m(1, 1) = 4.0;
    auto c = tvem::cofactor(m);
    EXPECT_DOUBLE_EQ(c(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(c(0, 1), -3.0);
    EXPECT_DOUBLE_EQ(c(1, 0), -2.0);
    EXPECT_DOUBLE_EQ(c(1, 1), 1.0);
}

TEST(Tensor, InverseTimesOriginalIsIdentity) {
    oracle::Rng rng(104);
    int accepted = 0;
    while (accepted < 100) {
        auto m = random_mat<3>(rng);
        if (std::abs(tvem::det(m)) < 0.1) continue;  // keep conditioning sane
        ++accepted;
        auto prod = tvem::matmul(tvem::inverse(m), m);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                EXPECT_NEAR(prod(i, j), (i == j) ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Tensor, InverseOfSingularMatrixThrows) {
    Mat<2> m;  // zero matrix
    EXPECT_THROW(tvem::inverse(m), tvem::SingularMatrixError);
    Mat<3> r;  // rank 1
    for (int j = 0; j < 3; ++j) r(0, j) = r(1, j) = static_cast<double>(j + 1);
    EXPECT_THROW(tvem::inverse(r), tvem::SingularMatrixError);
}

TEST(Tensor, SymIsSymmetricProjection) {
    oracle::Rng rng(105);
    for (int trial = 0; trial < 50; ++trial) {
        auto m = random_mat<3>(rng);
        auto s = tvem::sym(m);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(s(i, j), s(j, i));
        // Contraction with the antisymmetric remainder vanishes.
        auto w = m - s;
        EXPECT_NEAR(tvem::ddot(s, w), 0.0, 1e-12);
        EXPECT_LE(tvem::frobenius(s), tvem::frobenius(m) + 1e-15);
    }
    Mat<2> anti;
    anti(0, 1) = 1.0;
    anti(1, 0) = -1.0;
    EXPECT_DOUBLE_EQ(tvem::frobenius(tvem::sym(anti)), 0.0);
}

TEST(Tensor, TraceAndFrobenius) {
    EXPECT_DOUBLE_EQ(tvem::trace(Mat<3>::identity()), 3.0);
    EXPECT_DOUBLE_EQ(tvem::frobenius(Mat<2>::identity()), std::sqrt(2.0));
    Mat<2> m;
    m(0, 0) = 3.0;
    m(1, 1) = 4.0;
    EXPECT_DOUBLE_EQ(tvem::frobenius(m), 5.0);
    EXPECT_DOUBLE_EQ(tvem::trace(m), 7.0);
}

TEST(Tensor, MatmulAgainstHandComputedProduct) {
    Mat<2> a, b;
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 3.0;
    a(1, 1) = 4.0;
    b(0, 0) = 5.0;
    b(0, 1) = 6.0;
    b(1, 0) = 7.0;
    b(1, 1) = 8.0;
    auto c = tvem::matmul(a, b);
    EXPECT_DOUBLE_EQ(c(0, 0), 19.0);
    EXPECT_DOUBLE_EQ(c(0, 1), 22.0);
    EXPECT_DOUBLE_EQ(c(1, 0), 43.0);
    EXPECT_DOUBLE_EQ(c(1, 1), 50.0);
}

TEST(Tensor, MatvecAndDot) {
    Mat<2> m;
    m(0, 0) = 2.0;
    m(0, 1) = 1.0;
    m(1, 0) = 0.0;
    m(1, 1) = -1.0;
    Vec<2> v;
    v[0] = 3.0;
    v[1] = 4.0;
    auto r = tvem::matvec(m, v);
    EXPECT_DOUBLE_EQ(r[0], 10.0);
    EXPECT_DOUBLE_EQ(r[1], -4.0);
    EXPECT_DOUBLE_EQ(tvem::dot(v, v), 25.0);
}

TEST(Tensor, Ten3IndexingAndNorm) {
    Ten3<2> t;
    t(0, 0, 0) = 3.0;
    t(1, 1, 1) = 4.0;
    EXPECT_DOUBLE_EQ(tvem::frobenius(t), 5.0);
    EXPECT_DOUBLE_EQ(t(0, 0, 0), 3.0);
    t *= 2.0;
    EXPECT_DOUBLE_EQ(t(1, 1, 1), 8.0);
}

TEST(Tensor, ArithmeticOperators) {
    oracle::Rng rng(106);
    auto a = random_mat<2>(rng);
    auto b = random_mat<2>(rng);
    auto sum = a + b;
    auto diff = sum - b;
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(diff.a[i], a.a[i], 1e-15);
    auto scaled = 2.0 * a;
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(scaled.a[i], 2.0 * a.a[i]);
}
