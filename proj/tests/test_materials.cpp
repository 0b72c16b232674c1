#include "tvem/materials.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "model_zoo.hpp"
#include "oracle.hpp"

using tvem::FreeEnergyModel;
using tvem::Mat;

namespace {

constexpr double kFdStep = 1e-6;
constexpr double kFdTol = 1e-5;

// Deformation gradient with prescribed determinant (log-uniform in
// [det_lo, det_hi]) and random shear/rotation content.
template <int d>
Mat<d> random_F(oracle::Rng& rng, double det_lo = 0.3, double det_hi = 3.0) {
    const double target = rng.log_uniform(det_lo, det_hi);
    for (;;) {
        Mat<d> M;
        for (double& x : M.a) x = rng.uniform(-1.0, 1.0);
        double j = tvem::det(M);
        if (std::abs(j) < 0.05) continue;  // keep the rescaled matrix well conditioned
        if (j < 0.0) {
            for (int c = 0; c < d; ++c) std::swap(M(0, c), M(1, c));
            j = -j;
        }
        const double s = std::pow(target / j, 1.0 / d);
        return s * M;
    }
}

// ψ is only C¹ in θ at the extension point θ = 0 (heat capacity kinks), so
// derivative checks stay clear of it.
double draw_theta(oracle::Rng& rng, bool positive_only) {
    for (;;) {
        const double th = positive_only ? rng.uniform(0.0, 5.0) : rng.uniform(-1.0, 5.0);
        if (std::abs(th) > 1e-3) return th;
    }
}

template <int d, class Fn>
Mat<d> fd_wrt_F(Fn&& f, Mat<d> F, double h = kFdStep) {
    Mat<d> out;
    for (int i = 0; i < d * d; ++i) {
        const double orig = F.a[i];
        F.a[i] = orig + h;
        const double fp = f(F);
        F.a[i] = orig - h;
        const double fm = f(F);
        F.a[i] = orig;
        out.a[i] = (fp - fm) / (2.0 * h);
    }
    return out;
}

template <int d>
void expect_mat_near(const Mat<d>& got, const Mat<d>& want, double tol, const std::string& what) {
    const double scale = 1.0 + tvem::frobenius(want);
    for (int i = 0; i < d * d; ++i)
        EXPECT_NEAR(got.a[i], want.a[i], tol * scale) << what << " entry " << i;
}

bool positive_theta_only(const FreeEnergyModel<2>& m) {
    return std::string(m.name()) == "nonphysical_log";
}

template <int d>
void check_derivative_consistency(const FreeEnergyModel<d>& m, int n_points, oracle::Rng& rng,
                                  bool positive_only) {
    for (int k = 0; k < n_points; ++k) {
        const Mat<d> F = random_F<d>(rng);
        const double th = draw_theta(rng, positive_only);

        const Mat<d> fd_dF =
            fd_wrt_F([&](const Mat<d>& Fp) { return m.psi(Fp, th); }, F);
        expect_mat_near(m.dpsi_dF(F, th), fd_dF, kFdTol, std::string(m.name()) + " dpsi_dF");

        const double fd_dth =
            (m.psi(F, th + kFdStep) - m.psi(F, th - kFdStep)) / (2.0 * kFdStep);
        const double want1 = m.dpsi_dtheta(F, th);
        EXPECT_NEAR(want1, fd_dth, kFdTol * (1.0 + std::abs(fd_dth))) << m.name() << " dpsi_dtheta";

        const double fd_d2 = (m.dpsi_dtheta(F, th + kFdStep) - m.dpsi_dtheta(F, th - kFdStep)) /
                             (2.0 * kFdStep);
        EXPECT_NEAR(m.d2psi_dtheta2(F, th), fd_d2, kFdTol * (1.0 + std::abs(fd_d2)))
            << m.name() << " d2psi_dtheta2";

        const Mat<d> fd_mixed =
            fd_wrt_F([&](const Mat<d>& Fp) { return m.dpsi_dtheta(Fp, th); }, F);
        expect_mat_near(m.d2psi_dFdtheta(F, th), fd_mixed, kFdTol,
                        std::string(m.name()) + " d2psi_dFdtheta");
    }
}

}  // namespace

TEST(Materials, NeoHookeanPowerFrozenValues) {
    // Hand-evaluated for K_e = G_e = c_v = theta_ref = 1, alpha = 1/2, F = 𝕀:
    //   η(𝕀,1) = c_v/α = 2            c(𝕀,1) = c_v = 1
    //   E(𝕀,0) = G_e·d = 2            E(𝕀,1) = 2 + c_v/(1+α) = 8/3
    //   U(𝕀,1) = 2/3                  U⁻¹(2/3) = 1
    tvem::NeoHookeanPower<2> m(tvem::NeoHookeanPowerParams{});
    const auto I = Mat<2>::identity();

    EXPECT_DOUBLE_EQ(tvem::entropy(m, I, 0.0), 0.0);
    EXPECT_NEAR(tvem::entropy(m, I, 1.0), 2.0, 1e-14);
    EXPECT_NEAR(tvem::heat_capacity(m, I, 1.0), 1.0, 1e-14);
    EXPECT_NEAR(tvem::internal_energy(m, I, 0.0), 2.0, 1e-14);
    EXPECT_NEAR(tvem::internal_energy(m, I, 1.0), 8.0 / 3.0, 1e-14);
    EXPECT_NEAR(tvem::thermal_energy(m, I, 1.0), 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(tvem::invert_thermal_energy(m, I, 2.0 / 3.0), 1.0, 1e-12);

    const Mat<2> T = tvem::cauchy_stress(m, I, 3.7);
    for (double x : T.a) EXPECT_NEAR(x, 0.0, 1e-14);
}

TEST(Materials, NeoHookeanPowerClosedFormStress) {
    // T = K_e(J−1)𝕀 + 2G_e(FFᵀ − tr(FFᵀ)𝕀/d)/J^{1+2/d}.
    tvem::NeoHookeanPowerParams p;
    p.K_e = 2.5;
    p.G_e = 0.7;
    tvem::NeoHookeanPower<2> m(p);
    oracle::Rng rng(201);
    for (int k = 0; k < 100; ++k) {
        const Mat<2> F = random_F<2>(rng);
        const double J = tvem::det(F);
        const Mat<2> B = tvem::matmul(F, tvem::transpose(F));
        Mat<2> want = (p.K_e * (J - 1.0)) * Mat<2>::identity();
        want += (2.0 * p.G_e / std::pow(J, 2.0)) * (B - (tvem::trace(B) / 2.0) * Mat<2>::identity());
        expect_mat_near(tvem::cauchy_stress(m, F, 1.3), want, 1e-12, "closed-form stress");
    }
}

TEST(Materials, NeoHookeanLogStressFreeReference) {
    // The bulk well is shifted by K_0/K_e exactly so the −K₀ ln det F pressure
    // cancels at F = 𝕀.
    tvem::NeoHookeanLogParams p;
    p.K_0 = 0.3;
    tvem::NeoHookeanLog<2> m(p);
    const auto I = Mat<2>::identity();
    const Mat<2> T = tvem::cauchy_stress(m, I, 0.8);
    for (double x : T.a) EXPECT_NEAR(x, 0.0, 1e-14);
}

TEST(Materials, BoundedHeatCapacitySaturation) {
    tvem::BoundedHeatCapacity<2> m(tvem::BoundedHeatCapacityParams{});
    const auto I = Mat<2>::identity();
    // c(θ) = c_v θ/(θ+θ_r): equals c_v/2 at θ = θ_r = 0.2, saturates below c_v.
    EXPECT_NEAR(tvem::heat_capacity(m, I, 0.2), 0.5, 1e-14);
    EXPECT_LT(tvem::heat_capacity(m, I, 100.0), 1.0);
    EXPECT_GT(tvem::heat_capacity(m, I, 100.0), 0.99);
    EXPECT_DOUBLE_EQ(tvem::heat_capacity(m, I, -1.0), 0.0);
}

TEST(Materials, ThermalExpansionStressSplit) {
    tvem::ThermalExpansionParams p;
    tvem::ThermalExpansion<2> m(p);
    const auto I = Mat<2>::identity();
    for (const double th : {0.3, 1.0, 2.5}) {
        const auto [T0, T1] = tvem::stress_split(m, I, th);
        const double want = -p.beta * p.K_e * th * th / (th + p.theta_r);
        EXPECT_NEAR(T1(0, 0), want, 1e-13);
        EXPECT_NEAR(T1(1, 1), want, 1e-13);
        EXPECT_NEAR(T1(0, 1), 0.0, 1e-15);
        const Mat<2> sum = T0 + T1;
        expect_mat_near(sum, tvem::cauchy_stress(m, I, th), 1e-15, "split sum");
    }
    // The split is computed through identical code paths at θ and 0, so the
    // thermal part vanishes bit-exactly on the flat branch.
    oracle::Rng rng(202);
    const Mat<2> F = random_F<2>(rng);
    const auto [T0, T1] = tvem::stress_split(m, F, -2.0);
    for (double x : T1.a) EXPECT_EQ(x, 0.0);
}

TEST(Materials, NonphysicalLogThirdLawViolation) {
    tvem::NonphysicalLog<2> m(tvem::NonphysicalLogParams{});
    const auto I = Mat<2>::identity();
    EXPECT_NEAR(tvem::entropy(m, I, 1.0), 0.0, 1e-15);  // θ = theta_ref
    // η = c_v ln(θ/θ_ref) → −∞ as θ → 0⁺, and has no value at θ ≤ 0.
    EXPECT_LT(tvem::entropy(m, I, 1e-4), -9.0);
    EXPECT_LT(tvem::entropy(m, I, 1e-8), tvem::entropy(m, I, 1e-4));
    EXPECT_THROW(tvem::entropy(m, I, 0.0), tvem::MaterialDomainError);
    EXPECT_THROW(tvem::entropy(m, I, -1.0), tvem::MaterialDomainError);
    // The energy and heat capacity still admit the flat extension.
    EXPECT_EQ(tvem::internal_energy(m, I, -1.0), tvem::internal_energy(m, I, 0.0));
    EXPECT_DOUBLE_EQ(tvem::heat_capacity(m, I, -1.0), 0.0);
    EXPECT_NEAR(tvem::heat_capacity(m, I, 0.5), 1.0, 1e-14);
    EXPECT_NEAR(tvem::internal_energy(m, I, 2.0) - tvem::internal_energy(m, I, 0.0), 2.0, 1e-14);
}

TEST(Materials, DerivativeConsistencyAllModels) {
    oracle::Rng rng(203);
    for (const auto& m : zoo::all_models())
        check_derivative_consistency(*m, 1000, rng, positive_theta_only(*m));
}

TEST(Materials, StressSymmetryAndGibbs) {
    oracle::Rng rng(204);
    for (const auto& m : zoo::all_models()) {
        const bool pos = positive_theta_only(*m);
        for (int k = 0; k < 200; ++k) {
            const Mat<2> F = random_F<2>(rng);
            const double th = draw_theta(rng, pos);
            const Mat<2> T = tvem::cauchy_stress(*m, F, th);
            const double asym = tvem::frobenius(T - tvem::transpose(T));
            EXPECT_LT(asym / (1.0 + tvem::frobenius(T)), 1e-10) << m->name();

            const double E = tvem::internal_energy(*m, F, th);
            const double gibbs = m->psi(F, th) + th * tvem::entropy(*m, F, th);
            EXPECT_NEAR(E, gibbs, 1e-12 * (1.0 + std::abs(E))) << m->name();
        }
    }
}

TEST(Materials, HeatCapacityMatchesEnergySlope) {
    oracle::Rng rng(205);
    for (const auto& m : zoo::all_models()) {
        for (int k = 0; k < 200; ++k) {
            const Mat<2> F = random_F<2>(rng);
            const double th = rng.uniform(0.01, 5.0);
            const double fd = (tvem::internal_energy(*m, F, th + kFdStep) -
                               tvem::internal_energy(*m, F, th - kFdStep)) /
                              (2.0 * kFdStep);
            const double c = tvem::heat_capacity(*m, F, th);
            EXPECT_NEAR(c, fd, kFdTol * (1.0 + std::abs(fd))) << m->name() << " at theta " << th;
        }
    }
}

TEST(Materials, CauchyStressMatchesDefinition) {
    // T must equal (ψ'_F by finite differences)·Fᵀ + ψ𝕀.
    oracle::Rng rng(206);
    for (const auto& m : zoo::all_models()) {
        for (int k = 0; k < 50; ++k) {
            const Mat<2> F = random_F<2>(rng, 0.5, 2.0);
            const double th = 0.7;
            const Mat<2> fd_dF =
                fd_wrt_F([&](const Mat<2>& Fp) { return m->psi(Fp, th); }, F);
            Mat<2> want = tvem::matmul(fd_dF, tvem::transpose(F));
            want += m->psi(F, th) * Mat<2>::identity();
            expect_mat_near(tvem::cauchy_stress(*m, F, th), want, 1e-6,
                            std::string(m->name()) + " stress definition");
        }
    }
}

TEST(Materials, SmaSoftminBound) {
    // −ϰ ln Σ exp(−𝜓_ℓ/ϰ) lies within ϰ·ln(L) below min_ℓ 𝜓_ℓ.
    const auto params = zoo::default_sma_params();
    oracle::Rng rng(207);
    for (const double varkappa : {0.05, 1e-3}) {
        auto p = params;
        p.varkappa = varkappa;
        tvem::MultiWellSma<2> m(p);
        const double bound = varkappa * std::log(static_cast<double>(p.wells.size()));
        for (int k = 0; k < 100; ++k) {
            const Mat<2> F = random_F<2>(rng);
            const double th = rng.uniform(0.0, 3.0);
            // Independent per-well evaluation.
            double min_psi = std::numeric_limits<double>::infinity();
            for (const auto& w : p.wells) {
                const double J = tvem::det(F);
                const Mat<2> FA = tvem::matmul(F, tvem::inverse(w.F_well));
                const double phi =
                    0.5 * w.K * (J - 1.0) * (J - 1.0) + w.G * tvem::frobenius2(FA) / J;
                const double thermal =
                    th > 0.0 ? -w.c * th * std::pow(th / p.theta_ref, p.alpha) /
                                   (p.alpha * (1.0 + p.alpha))
                             : 0.0;
                min_psi = std::min(min_psi, phi + thermal);
            }
            const double psi_ref = m.psi_ref(F, th);
            EXPECT_LE(psi_ref, min_psi + 1e-12);
            EXPECT_GE(psi_ref, min_psi - bound - 1e-12);
        }
    }
}

TEST(Materials, FrameIndifference) {
    oracle::Rng rng(208);
    for (const auto& m : zoo::all_models()) {
        for (int k = 0; k < 100; ++k) {
            const Mat<2> F = random_F<2>(rng);
            const double th = rng.uniform(0.1, 3.0);
            const double angle = rng.uniform(0.0, 2.0 * M_PI);
            Mat<2> Q;
            Q(0, 0) = std::cos(angle);
            Q(0, 1) = -std::sin(angle);
            Q(1, 0) = std::sin(angle);
            Q(1, 1) = std::cos(angle);
            const double a = m->psi(F, th);
            const double b = m->psi(tvem::matmul(Q, F), th);
            EXPECT_NEAR(a, b, 1e-12 * (1.0 + std::abs(a))) << m->name();
        }
    }
}

TEST(Materials, NegativeThetaExtension) {
    oracle::Rng rng(209);
    for (const auto& m : zoo::all_models()) {
        const bool nonphys = positive_theta_only(*m);
        for (int k = 0; k < 20; ++k) {
            const Mat<2> F = random_F<2>(rng);
            EXPECT_EQ(tvem::internal_energy(*m, F, -3.0), tvem::internal_energy(*m, F, 0.0));
            EXPECT_EQ(tvem::heat_capacity(*m, F, -1.0), 0.0);
            EXPECT_EQ(tvem::thermal_energy(*m, F, -3.0), 0.0);
            EXPECT_EQ(tvem::thermal_energy(*m, F, 0.0), 0.0);
            const auto [T0, T1] = tvem::stress_split(*m, F, 0.0);
            (void)T0;
            for (double x : T1.a) EXPECT_EQ(x, 0.0);
            if (!nonphys) {
                EXPECT_EQ(tvem::entropy(*m, F, 0.0), 0.0);
                EXPECT_EQ(tvem::entropy(*m, F, -2.0), 0.0);
            }
        }
    }
}

TEST(Materials, ThermalEnergyInversionRoundTrip) {
    oracle::Rng rng(210);
    for (const auto& m : zoo::all_models()) {
        for (int k = 0; k < 10; ++k) {
            const Mat<2> F = random_F<2>(rng);
            for (int i = 0; i <= 25; ++i) {
                const double theta = m->theta_ref() * 100.0 * i / 25.0;
                const double u = tvem::thermal_energy(*m, F, theta);
                const double back = tvem::invert_thermal_energy(*m, F, u);
                EXPECT_NEAR(back, theta, 1e-10) << m->name() << " theta " << theta;
                const double round = tvem::thermal_energy(*m, F, back);
                EXPECT_NEAR(round, std::max(u, 0.0), 1e-12 * (1.0 + std::abs(u))) << m->name();
            }
            EXPECT_EQ(tvem::invert_thermal_energy(*m, F, -5.0), 0.0);
            EXPECT_EQ(tvem::invert_thermal_energy(*m, F, 0.0), 0.0);
        }
    }
}

TEST(Materials, InternalEnergyMonotoneAndCompressionBlowup) {
    oracle::Rng rng(211);
    for (const auto& m : zoo::all_models()) {
        const Mat<2> F = random_F<2>(rng);
        double prev = tvem::internal_energy(*m, F, 0.0);
        for (int i = 1; i <= 40; ++i) {
            const double th = 5.0 * i / 40.0;
            const double E = tvem::internal_energy(*m, F, th);
            EXPECT_GT(E, prev) << m->name() << " at theta " << th;
            prev = E;
        }
    }
    // Compression blow-up: the stored energy per actual volume diverges as
    // det F → 0⁺.
    tvem::NeoHookeanPower<2> nhp(tvem::NeoHookeanPowerParams{});
    auto squeezed = [](double s) {
        Mat<2> F;
        F(0, 0) = s;
        F(1, 1) = s;
        return F;
    };
    EXPECT_GT(tvem::internal_energy(nhp, squeezed(1e-3), 1.0), 1e5);
    EXPECT_GT(tvem::internal_energy(nhp, squeezed(1e-3), 1.0),
              tvem::internal_energy(nhp, squeezed(1e-1), 1.0));
}

TEST(Materials, TabulateClosedFormCurves) {
    // With zero elastic moduli the tabulated columns reduce to the thermal
    // closed forms used for the model-comparison figures.
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(-1.0 + 5.0 * i / 50.0);

    tvem::BoundedHeatCapacityParams bp;
    bp.K_e = 0.0;
    bp.G_e = 0.0;
    tvem::BoundedHeatCapacity<2> bhc(bp);
    const auto I = Mat<2>::identity();
    for (const auto& row : tvem::tabulate(bhc, I, grid)) {
        const double tp = std::max(row.theta, 0.0);
        EXPECT_NEAR(row.c, tp / (tp + 0.2), 1e-12);
        EXPECT_NEAR(row.E, tp - 0.2 * std::log1p(tp / 0.2), 1e-12);
        EXPECT_GE(row.c, 0.0);
    }

    tvem::NeoHookeanPowerParams pp;
    pp.K_e = 0.0;
    pp.G_e = 0.0;
    pp.alpha = 0.05;
    tvem::NeoHookeanPower<2> nhp(pp);
    double prev_E = -1.0;
    for (const auto& row : tvem::tabulate(nhp, I, grid)) {
        const double tp = std::max(row.theta, 0.0);
        EXPECT_NEAR(row.c, std::pow(tp, 0.05), 1e-12);
        EXPECT_NEAR(row.E, std::pow(tp, 1.05) / 1.05, 1e-12);
        EXPECT_GE(row.E, prev_E);  // monotone E column
        prev_E = row.E;
    }

    const auto single = tvem::tabulate(nhp, I, {0.0});
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].eta, 0.0);
    EXPECT_EQ(single[0].c, 0.0);
    EXPECT_EQ(single[0].E, tvem::internal_energy(nhp, I, 0.0));
}

TEST(Materials, ParameterValidation) {
    using tvem::NeoHookeanPowerParams;
    auto bad = [](auto params) {
        EXPECT_THROW(tvem::make_model<2>(tvem::ModelParams<2>{params}), std::invalid_argument);
    };

    NeoHookeanPowerParams p;
    p.c_v = 0.0;
    bad(p);
    p = {};
    p.theta_ref = -1.0;
    bad(p);
    p = {};
    p.alpha = 0.0;
    bad(p);
    p = {};
    p.alpha = 1.0;
    bad(p);
    p = {};
    p.K_e = -0.5;
    bad(p);

    tvem::NeoHookeanLogParams lp;
    lp.K_e = 0.0;  // well shift K_0/K_e undefined
    bad(lp);

    tvem::ThermalExpansionParams tp;
    tp.theta_r = 0.0;
    bad(tp);

    auto sp = zoo::default_sma_params();
    sp.varkappa = 0.0;
    bad(sp);
    sp = zoo::default_sma_params();
    sp.wells.clear();
    bad(sp);
    sp = zoo::default_sma_params();
    sp.wells[1].F_well(0, 0) = 2.0;  // martensite well no longer isochoric
    bad(sp);

    // In three dimensions the admissible exponent window is (0, 1/2).
    NeoHookeanPowerParams p3;
    p3.alpha = 0.7;
    EXPECT_THROW(tvem::NeoHookeanPower<3>{p3}, std::invalid_argument);
    p3.alpha = 0.4;
    EXPECT_NO_THROW(tvem::NeoHookeanPower<3>{p3});
}

TEST(Materials, DomainErrors) {
    tvem::NeoHookeanPower<2> m(tvem::NeoHookeanPowerParams{});
    Mat<2> flipped;
    flipped(0, 0) = -1.0;
    flipped(1, 1) = 1.0;
    EXPECT_THROW(m.psi(flipped, 1.0), tvem::MaterialDomainError);
    EXPECT_THROW(tvem::cauchy_stress(m, flipped, 1.0), tvem::MaterialDomainError);
    EXPECT_THROW(tvem::internal_energy(m, flipped, 1.0), tvem::MaterialDomainError);
    EXPECT_THROW(tvem::heat_capacity(m, flipped, -1.0), tvem::MaterialDomainError);
    EXPECT_THROW(m.psi(Mat<2>{}, 1.0), tvem::MaterialDomainError);
}

TEST(Materials, FactoryDispatch) {
    const char* want[] = {"neo_hookean_power",     "neo_hookean_log", "thermal_expansion",
                          "bounded_heat_capacity", "multi_well_sma",  "nonphysical_log"};
    const auto models = zoo::all_models();
    ASSERT_EQ(models.size(), 6u);
    for (std::size_t i = 0; i < models.size(); ++i)
        EXPECT_STREQ(models[i]->name(), want[i]);
}

TEST(Materials, ThreeDimensionalSmoke) {
    tvem::NeoHookeanPowerParams p;
    p.alpha = 0.3;
    tvem::NeoHookeanPower<3> m(p);
    oracle::Rng rng(212);
    check_derivative_consistency(m, 50, rng, false);

    // Closed-form stress in 3-D: exponent 1 + 2/d = 5/3.
    const Mat<3> F = random_F<3>(rng);
    const double J = tvem::det(F);
    const Mat<3> B = tvem::matmul(F, tvem::transpose(F));
    Mat<3> want = (p.K_e * (J - 1.0)) * Mat<3>::identity();
    want += (2.0 * p.G_e / std::pow(J, 5.0 / 3.0)) *
            (B - (tvem::trace(B) / 3.0) * Mat<3>::identity());
    expect_mat_near(tvem::cauchy_stress(m, F, 0.9), want, 1e-12, "3-D closed-form stress");
}
