#pragma once

// Free-energy model library for finite-strain thermoviscoelasticity.
//
// Every model is specified by a referential free energy 𝜓(F,θ) per unit
// reference volume; the interface exposes the actual (per current volume)
// energy ψ = 𝜓/det F and its derivatives, which is the frame the balance
// laws and the solver work in. Derived quantities follow the standard
// thermodynamic dictionary:
//
//   Cauchy stress    T = ψ'_F Fᵀ + ψ𝕀  (equivalently 𝜓'_F Fᵀ / det F)
//   entropy          η = −ψ'_θ
//   heat capacity    c = −θ ψ''_θθ
//   internal energy  E = ψ + θη
//   thermal energy   U(F,θ) = E(F,θ) − E(F,0)
//
// All models extend below zero temperature with a flat branch: ψ(F,θ<0) =
// ψ(F,0), so E is constant and c vanishes there. The temperature argument is
// accepted on all of ℝ; det F must be positive.

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tvem/tensor.hpp"

namespace tvem {

struct MaterialDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct InversionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Thermal free-energy contributions 𝜓_th(θ) (referential, F-independent).
// value/d1/d2 are 𝜓_th and its first two θ-derivatives.

// 𝜓_th = −c_v θ (θ⁺/θ_ref)^α / (α(1+α)); gives η = (c_v/α)(θ⁺/θ_ref)^α and
// c = c_v (θ⁺/θ_ref)^α, a power-law heat capacity vanishing at θ = 0.
struct PowerThermal {
    double c_v = 0.0;
    double theta_ref = 1.0;
    double alpha = 0.5;

    double value(double theta) const {
        if (theta <= 0.0) return 0.0;
        return -c_v * theta * std::pow(theta / theta_ref, alpha) / (alpha * (1.0 + alpha));
    }
    double d1(double theta) const {
        if (theta <= 0.0) return 0.0;
        return -(c_v / alpha) * std::pow(theta / theta_ref, alpha);
    }
    double d2(double theta) const {
        if (theta <= 0.0) return 0.0;
        return -c_v * std::pow(theta / theta_ref, alpha) / theta;
    }
};

// 𝜓_th = −c_v[(θ⁺+θ_r)ln(θ⁺+θ_r) − θ⁺(1+ln θ_r) − θ_r ln θ_r]; gives the
// saturating heat capacity c = c_v θ⁺/(θ⁺+θ_r), bounded by c_v.
struct BoundedThermal {
    double c_v = 0.0;
    double theta_r = 1.0;

    double value(double theta) const {
        if (theta <= 0.0) return 0.0;
        return -c_v * ((theta + theta_r) * std::log(theta + theta_r)
                       - theta * (1.0 + std::log(theta_r))
                       - theta_r * std::log(theta_r));
    }
    double d1(double theta) const {
        if (theta <= 0.0) return 0.0;
        return -c_v * std::log1p(theta / theta_r);
    }
    double d2(double theta) const {
        if (theta <= 0.0) return 0.0;
        return -c_v / (theta + theta_r);
    }
};

// 𝜓_th = −c_v(θ ln(θ/θ_ref) − θ): the textbook constant-heat-capacity ansatz.
// Its entropy −𝜓'_θ = c_v ln(θ/θ_ref) diverges as θ → 0⁺, so the flat
// extension exists for the energy (E = φ + c_v θ⁺, continuous) but not for
// the entropy; d1 therefore throws at θ ≤ 0 while value and d2 take the
// extension branch. This is the intended third-law violation of the
// negative-control model.
struct LogThermal {
    double c_v = 0.0;
    double theta_ref = 1.0;

    double value(double theta) const {
        if (theta <= 0.0) return 0.0;
        return -c_v * (theta * std::log(theta / theta_ref) - theta);
    }
    double d1(double theta) const {
        if (theta <= 0.0)
            throw MaterialDomainError("nonphysical_log: entropy diverges at theta <= 0");
        return -c_v * std::log(theta / theta_ref);
    }
    double d2(double theta) const {
        if (theta <= 0.0) return 0.0;
        return -c_v / theta;
    }
};

// Compressible neo-Hookean energy well
//   φ(F) = K/2 (det F − 1 + shift)² + G |F A|² / (det F)^{2/d},
// with A the inverse of the well's preferred deformation (identity for the
// isotropic models). The shear term is scaled by det F^{-2/d} so it is
// insensitive to pure dilation.
template <int d>
struct EnergyWell {
    double K = 0.0;
    double G = 0.0;
    double shift = 0.0;
    Mat<d> A = Mat<d>::identity();
    Mat<d> AAt = Mat<d>::identity();

    void finalize() { AAt = matmul(A, transpose(A)); }

    double phi(const Mat<d>& F, double J) const {
        const double dev = J - 1.0 + shift;
        const Mat<d> FA = matmul(F, A);
        return 0.5 * K * dev * dev + G * frobenius2(FA) * std::pow(J, -2.0 / d);
    }
    Mat<d> dphi(const Mat<d>& F, double J) const {
        const double dev = J - 1.0 + shift;
        const Mat<d> cof = cofactor(F);
        const double Jm = std::pow(J, -2.0 / d);
        Mat<d> out = (K * dev) * cof;
        out += (2.0 * G * Jm) * matmul(F, AAt);
        out += (-(2.0 / d) * G * frobenius2(matmul(F, A)) * Jm / J) * cof;
        return out;
    }
};

}  // namespace detail

// Interface: actual-frame free energy and derivatives, plus the referential
// quantities they are generated from (the latter are needed by the Kirchhoff
// stress audit and by tests). All evaluations are pure; models are immutable
// after construction and freely shareable across threads.
template <int d>
class FreeEnergyModel {
   public:
    virtual ~FreeEnergyModel() = default;

    // Referential 𝜓 and derivatives (per unit reference volume).
    virtual double psi_ref(const Mat<d>& F, double theta) const = 0;
    virtual Mat<d> dpsi_ref_dF(const Mat<d>& F, double theta) const = 0;
    virtual double dpsi_ref_dtheta(const Mat<d>& F, double theta) const = 0;
    virtual double d2psi_ref_dtheta2(const Mat<d>& F, double theta) const = 0;
    virtual Mat<d> d2psi_ref_dFdtheta(const Mat<d>& F, double theta) const = 0;

    virtual double theta_ref() const = 0;
    // Exponent of the large-θ internal-energy growth E ~ θ^{1+α}; zero for
    // models whose energy grows linearly in θ.
    virtual double coercivity_alpha() const = 0;
    virtual const char* name() const = 0;

    // Actual-frame ψ = 𝜓/det F and derivatives, obtained by the product rule
    // with ∂(det F)/∂F = Cof F = det F · F^{-T}.
    double psi(const Mat<d>& F, double theta) const {
        return psi_ref(F, theta) / checked_det(F);
    }
    Mat<d> dpsi_dF(const Mat<d>& F, double theta) const {
        const double J = checked_det(F);
        const Mat<d> Fit = transpose(inverse(F));
        return (1.0 / J) * (dpsi_ref_dF(F, theta) - psi_ref(F, theta) * Fit);
    }
    double dpsi_dtheta(const Mat<d>& F, double theta) const {
        return dpsi_ref_dtheta(F, theta) / checked_det(F);
    }
    double d2psi_dtheta2(const Mat<d>& F, double theta) const {
        return d2psi_ref_dtheta2(F, theta) / checked_det(F);
    }
    Mat<d> d2psi_dFdtheta(const Mat<d>& F, double theta) const {
        const double J = checked_det(F);
        const Mat<d> Fit = transpose(inverse(F));
        return (1.0 / J) * (d2psi_ref_dFdtheta(F, theta) - dpsi_ref_dtheta(F, theta) * Fit);
    }

   protected:
    static double checked_det(const Mat<d>& F) {
        const double J = det(F);
        if (!(J > 0.0)) throw MaterialDomainError("free energy requires det F > 0");
        return J;
    }
};

// ---------------------------------------------------------------------------
// Model parameters. Validation throws std::invalid_argument with the
// offending parameter named; construction of any model validates first.

struct NeoHookeanPowerParams {
    double K_e = 1.0;      // bulk stiffness, Pa
    double G_e = 1.0;      // shear stiffness, Pa
    double c_v = 1.0;      // heat-capacity scale, Pa/K
    double theta_ref = 1.0;  // reference temperature, K
    double alpha = 0.5;    // heat-capacity exponent

    bool operator==(const NeoHookeanPowerParams&) const = default;

    void validate(int dim = 2) const;
};

struct NeoHookeanLogParams {
    double K_e = 1.0;
    double G_e = 1.0;
    double K_0 = 0.1;  // strength of the −K₀ ln det F compression barrier, Pa
    double c_v = 1.0;
    double theta_ref = 1.0;
    double alpha = 0.5;

    bool operator==(const NeoHookeanLogParams&) const = default;

    void validate(int dim = 2) const;
};

struct ThermalExpansionParams {
    double K_e = 1.0;
    double G_e = 1.0;
    double c_v = 1.0;
    double theta_ref = 1.0;
    double alpha = 0.3;
    double beta = 0.05;   // volumetric expansion coefficient, 1/K
    double theta_r = 0.1;  // saturation temperature of the expansion law, K

    bool operator==(const ThermalExpansionParams&) const = default;

    void validate(int dim = 2) const;
};

struct BoundedHeatCapacityParams {
    double K_e = 1.0;
    double G_e = 1.0;
    double c_v = 1.0;
    double theta_r = 0.2;  // heat-capacity saturation temperature, K

    bool operator==(const BoundedHeatCapacityParams&) const = default;

    void validate() const;
};

template <int d>
struct SmaWell {
    Mat<d> F_well = Mat<d>::identity();  // preferred deformation of the phase
    double K = 1.0;
    double G = 1.0;
    double c = 1.0;  // per-phase heat-capacity scale, Pa/K

    bool operator==(const SmaWell&) const = default;
};

template <int d>
struct MultiWellSmaParams {
    std::vector<SmaWell<d>> wells;  // wells[0] is austenite; the rest martensite
    double varkappa = 0.05;  // softmin smoothing energy scale, Pa
    double theta_ref = 1.0;
    double alpha = 0.5;

    bool operator==(const MultiWellSmaParams&) const = default;

    void validate() const;
};

struct NonphysicalLogParams {
    double K_e = 1.0;
    double G_e = 1.0;
    double c_v = 1.0;
    double theta_ref = 1.0;

    bool operator==(const NonphysicalLogParams&) const = default;

    void validate() const;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline void validate_elastic(const char* who, double K_e, double G_e) {
    require(K_e >= 0.0, std::string(who) + ": K_e must be >= 0");
    require(G_e >= 0.0, std::string(who) + ": G_e must be >= 0");
}

inline void validate_power_thermal(const char* who, double c_v, double theta_ref,
                                   double alpha, int dim) {
    require(c_v > 0.0, std::string(who) + ": c_v must be > 0");
    require(theta_ref > 0.0, std::string(who) + ": theta_ref must be > 0");
    const double alpha_max = (dim == 2) ? 1.0 : 0.5;
    // alpha = 0 is excluded: the power-law thermal energy has 1/alpha
    // prefactors with no finite limit (the constant-capacity limit is the
    // separate nonphysical_log model).
    require(alpha > 0.0 && alpha < alpha_max,
            std::string(who) + ": alpha must lie in (0, " + (dim == 2 ? "1)" : "0.5)"));
}

}  // namespace detail

inline void NeoHookeanPowerParams::validate(int dim) const {
    detail::validate_elastic("neo_hookean_power", K_e, G_e);
    detail::validate_power_thermal("neo_hookean_power", c_v, theta_ref, alpha, dim);
}

inline void NeoHookeanLogParams::validate(int dim) const {
    detail::validate_elastic("neo_hookean_log", K_e, G_e);
    detail::require(K_e > 0.0, "neo_hookean_log: K_e must be > 0 (the well shift is K_0/K_e)");
    detail::require(K_0 > 0.0, "neo_hookean_log: K_0 must be > 0");
    detail::validate_power_thermal("neo_hookean_log", c_v, theta_ref, alpha, dim);
}

inline void ThermalExpansionParams::validate(int dim) const {
    detail::validate_elastic("thermal_expansion", K_e, G_e);
    detail::validate_power_thermal("thermal_expansion", c_v, theta_ref, alpha, dim);
    detail::require(beta >= 0.0, "thermal_expansion: beta must be >= 0");
    detail::require(theta_r > 0.0, "thermal_expansion: theta_r must be > 0");
}

inline void BoundedHeatCapacityParams::validate() const {
    detail::validate_elastic("bounded_heat_capacity", K_e, G_e);
    detail::require(c_v > 0.0, "bounded_heat_capacity: c_v must be > 0");
    detail::require(theta_r > 0.0, "bounded_heat_capacity: theta_r must be > 0");
}

template <int d>
void MultiWellSmaParams<d>::validate() const {
    detail::require(!wells.empty(), "multi_well_sma: at least one well is required");
    detail::require(varkappa > 0.0, "multi_well_sma: varkappa must be > 0");
    detail::validate_power_thermal("multi_well_sma", 1.0, theta_ref, alpha, d);
    for (std::size_t l = 0; l < wells.size(); ++l) {
        const auto& w = wells[l];
        const double Jw = det(w.F_well);
        detail::require(Jw > 0.0, "multi_well_sma: well deformation must have positive det");
        // Martensitic variants are volume-preserving; only the austenite well
        // (index 0) may sit at a different determinant.
        if (l >= 1)
            detail::require(std::abs(Jw - 1.0) <= 1e-9,
                            "multi_well_sma: martensite wells must have det F_well = 1");
        detail::require(w.K >= 0.0 && w.G >= 0.0, "multi_well_sma: well moduli must be >= 0");
        detail::require(w.c > 0.0, "multi_well_sma: well heat-capacity scale must be > 0");
    }
}

inline void NonphysicalLogParams::validate() const {
    detail::validate_elastic("nonphysical_log", K_e, G_e);
    detail::require(c_v > 0.0, "nonphysical_log: c_v must be > 0");
    detail::require(theta_ref > 0.0, "nonphysical_log: theta_ref must be > 0");
}

template <int d>
using ModelParams = std::variant<NeoHookeanPowerParams, NeoHookeanLogParams,
                                 ThermalExpansionParams, BoundedHeatCapacityParams,
                                 MultiWellSmaParams<d>, NonphysicalLogParams>;

// ---------------------------------------------------------------------------
// Concrete models.

template <int d>
class NeoHookeanPower final : public FreeEnergyModel<d> {
   public:
    explicit NeoHookeanPower(const NeoHookeanPowerParams& p) : p_(p) {
        p.validate(d);
        well_.K = p.K_e;
        well_.G = p.G_e;
        well_.finalize();
        th_ = {p.c_v, p.theta_ref, p.alpha};
    }

    double psi_ref(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return well_.phi(F, J) + th_.value(theta);
    }
    Mat<d> dpsi_ref_dF(const Mat<d>& F, double theta) const override {
        (void)theta;
        return well_.dphi(F, this->checked_det(F));
    }
    double dpsi_ref_dtheta(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        return th_.d1(theta);
    }
    double d2psi_ref_dtheta2(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        return th_.d2(theta);
    }
    Mat<d> d2psi_ref_dFdtheta(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        (void)theta;
        return Mat<d>{};
    }

    double theta_ref() const override { return p_.theta_ref; }
    double coercivity_alpha() const override { return p_.alpha; }
    const char* name() const override { return "neo_hookean_power"; }

   private:
    NeoHookeanPowerParams p_;
    detail::EnergyWell<d> well_;
    detail::PowerThermal th_;
};

template <int d>
class NeoHookeanLog final : public FreeEnergyModel<d> {
   public:
    explicit NeoHookeanLog(const NeoHookeanLogParams& p) : p_(p) {
        p.validate(d);
        well_.K = p.K_e;
        well_.G = p.G_e;
        well_.shift = p.K_0 / p.K_e;  // shifts the bulk well so T(𝕀) = 0
        well_.finalize();
        th_ = {p.c_v, p.theta_ref, p.alpha};
    }

    double psi_ref(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return well_.phi(F, J) - p_.K_0 * std::log(J) + th_.value(theta);
    }
    Mat<d> dpsi_ref_dF(const Mat<d>& F, double theta) const override {
        (void)theta;
        const double J = this->checked_det(F);
        return well_.dphi(F, J) + (-p_.K_0 / J) * cofactor(F);
    }
    double dpsi_ref_dtheta(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        return th_.d1(theta);
    }
    double d2psi_ref_dtheta2(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        return th_.d2(theta);
    }
    Mat<d> d2psi_ref_dFdtheta(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        (void)theta;
        return Mat<d>{};
    }

    double theta_ref() const override { return p_.theta_ref; }
    double coercivity_alpha() const override { return p_.alpha; }
    const char* name() const override { return "neo_hookean_log"; }

   private:
    NeoHookeanLogParams p_;
    detail::EnergyWell<d> well_;
    detail::PowerThermal th_;
};

// Neo-Hookean base plus a thermal-expansion coupling −β K_e g(θ) ln det F
// with g(θ) = (θ⁺)²/(θ⁺+θ_r): heating shifts the preferred volume upward,
// contributing a hydrostatic-pressure stress −β K_e g(θ)/det F · 𝕀.
template <int d>
class ThermalExpansion final : public FreeEnergyModel<d> {
   public:
    explicit ThermalExpansion(const ThermalExpansionParams& p) : p_(p) {
        p.validate(d);
        well_.K = p.K_e;
        well_.G = p.G_e;
        well_.finalize();
        th_ = {p.c_v, p.theta_ref, p.alpha};
    }

    double psi_ref(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return well_.phi(F, J) + th_.value(theta) - p_.beta * p_.K_e * g(theta) * std::log(J);
    }
    Mat<d> dpsi_ref_dF(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return well_.dphi(F, J) + (-p_.beta * p_.K_e * g(theta) / J) * cofactor(F);
    }
    double dpsi_ref_dtheta(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return th_.d1(theta) - p_.beta * p_.K_e * dg(theta) * std::log(J);
    }
    double d2psi_ref_dtheta2(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return th_.d2(theta) - p_.beta * p_.K_e * d2g(theta) * std::log(J);
    }
    Mat<d> d2psi_ref_dFdtheta(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return (-p_.beta * p_.K_e * dg(theta) / J) * cofactor(F);
    }

    double theta_ref() const override { return p_.theta_ref; }
    double coercivity_alpha() const override { return p_.alpha; }
    const char* name() const override { return "thermal_expansion"; }

   private:
    double g(double theta) const {
        if (theta <= 0.0) return 0.0;
        return theta * theta / (theta + p_.theta_r);
    }
    double dg(double theta) const {
        if (theta <= 0.0) return 0.0;
        const double s = theta + p_.theta_r;
        return theta * (theta + 2.0 * p_.theta_r) / (s * s);
    }
    double d2g(double theta) const {
        if (theta <= 0.0) return 0.0;
        const double s = theta + p_.theta_r;
        return 2.0 * p_.theta_r * p_.theta_r / (s * s * s);
    }

    ThermalExpansionParams p_;
    detail::EnergyWell<d> well_;
    detail::PowerThermal th_;
};

template <int d>
class BoundedHeatCapacity final : public FreeEnergyModel<d> {
   public:
    explicit BoundedHeatCapacity(const BoundedHeatCapacityParams& p) : p_(p) {
        p.validate();
        well_.K = p.K_e;
        well_.G = p.G_e;
        well_.finalize();
        th_ = {p.c_v, p.theta_r};
    }

    double psi_ref(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return well_.phi(F, J) + th_.value(theta);
    }
    Mat<d> dpsi_ref_dF(const Mat<d>& F, double theta) const override {
        (void)theta;
        return well_.dphi(F, this->checked_det(F));
    }
    double dpsi_ref_dtheta(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        return th_.d1(theta);
    }
    double d2psi_ref_dtheta2(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        return th_.d2(theta);
    }
    Mat<d> d2psi_ref_dFdtheta(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        (void)theta;
        return Mat<d>{};
    }

    // The bounded model has no reference-temperature parameter; unit scale is
    // used wherever a temperature scale is needed for reporting. Its internal
    // energy grows linearly in θ, hence zero coercivity exponent.
    double theta_ref() const override { return 1.0; }
    double coercivity_alpha() const override { return 0.0; }
    const char* name() const override { return "bounded_heat_capacity"; }

   private:
    BoundedHeatCapacityParams p_;
    detail::EnergyWell<d> well_;
    detail::BoundedThermal th_;
};

// Multi-well energy for shape-memory behavior: a softmin
//   𝜓 = −ϰ ln Σ_ℓ exp(−𝜓_ℓ/ϰ)
// over per-phase energies 𝜓_ℓ = φ_ℓ(F) + 𝜓_th(θ; c_ℓ). Derivatives are
// weighted averages under w_ℓ ∝ exp(−𝜓_ℓ/ϰ); second derivatives pick up
// variance/covariance corrections from the θ-dependence of the weights.
template <int d>
class MultiWellSma final : public FreeEnergyModel<d> {
   public:
    explicit MultiWellSma(const MultiWellSmaParams<d>& p) : p_(p) {
        p.validate();
        for (const auto& w : p.wells) {
            detail::EnergyWell<d> ew;
            ew.K = w.K;
            ew.G = w.G;
            ew.A = inverse(w.F_well);
            ew.finalize();
            wells_.push_back(ew);
            thermals_.push_back(detail::PowerThermal{w.c, p.theta_ref, p.alpha});
        }
    }

    double psi_ref(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        const auto ev = evaluate(F, J, theta);
        return ev.psi;
    }
    Mat<d> dpsi_ref_dF(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        const auto ev = evaluate(F, J, theta);
        Mat<d> out;
        for (std::size_t l = 0; l < wells_.size(); ++l)
            out += ev.w[l] * wells_[l].dphi(F, J);
        return out;
    }
    double dpsi_ref_dtheta(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        const auto ev = evaluate(F, J, theta);
        double out = 0.0;
        for (std::size_t l = 0; l < wells_.size(); ++l) out += ev.w[l] * thermals_[l].d1(theta);
        return out;
    }
    double d2psi_ref_dtheta2(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        const auto ev = evaluate(F, J, theta);
        double mean_d2 = 0.0, mean_d1 = 0.0, mean_d1sq = 0.0;
        for (std::size_t l = 0; l < wells_.size(); ++l) {
            const double d1 = thermals_[l].d1(theta);
            mean_d2 += ev.w[l] * thermals_[l].d2(theta);
            mean_d1 += ev.w[l] * d1;
            mean_d1sq += ev.w[l] * d1 * d1;
        }
        const double var = mean_d1sq - mean_d1 * mean_d1;
        return mean_d2 - var / p_.varkappa;
    }
    Mat<d> d2psi_ref_dFdtheta(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        const auto ev = evaluate(F, J, theta);
        Mat<d> mean_dF, mean_cross;
        double mean_d1 = 0.0;
        for (std::size_t l = 0; l < wells_.size(); ++l) {
            const Mat<d> dphi = wells_[l].dphi(F, J);
            const double d1 = thermals_[l].d1(theta);
            mean_dF += ev.w[l] * dphi;
            mean_cross += (ev.w[l] * d1) * dphi;
            mean_d1 += ev.w[l] * d1;
        }
        const Mat<d> cov = mean_cross - mean_d1 * mean_dF;
        return (-1.0 / p_.varkappa) * cov;
    }

    double theta_ref() const override { return p_.theta_ref; }
    double coercivity_alpha() const override { return p_.alpha; }
    const char* name() const override { return "multi_well_sma"; }

   private:
    struct Eval {
        double psi = 0.0;
        std::vector<double> w;  // softmin weights, sum to 1
    };

    Eval evaluate(const Mat<d>& F, double J, double theta) const {
        const std::size_t L = wells_.size();
        std::vector<double> psi_l(L);
        for (std::size_t l = 0; l < L; ++l)
            psi_l[l] = wells_[l].phi(F, J) + thermals_[l].value(theta);
        // Max-shifted log-sum-exp: exponents can exceed 700 for small ϰ.
        const double m = *std::min_element(psi_l.begin(), psi_l.end());
        Eval ev;
        ev.w.resize(L);
        double sum = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            ev.w[l] = std::exp(-(psi_l[l] - m) / p_.varkappa);
            sum += ev.w[l];
        }
        for (std::size_t l = 0; l < L; ++l) ev.w[l] /= sum;
        ev.psi = m - p_.varkappa * std::log(sum);
        return ev;
    }

    MultiWellSmaParams<d> p_;
    std::vector<detail::EnergyWell<d>> wells_;
    std::vector<detail::PowerThermal> thermals_;
};

// Negative control: constant heat capacity via the θ ln θ free energy. Its
// entropy has no finite value at θ = 0 (third-law violation), so
// dpsi_ref_dtheta throws for θ ≤ 0; energy and heat capacity still admit the
// flat extension and behave like the physical models there.
template <int d>
class NonphysicalLog final : public FreeEnergyModel<d> {
   public:
    explicit NonphysicalLog(const NonphysicalLogParams& p) : p_(p) {
        p.validate();
        well_.K = p.K_e;
        well_.G = p.G_e;
        well_.finalize();
        th_ = {p.c_v, p.theta_ref};
    }

    double psi_ref(const Mat<d>& F, double theta) const override {
        const double J = this->checked_det(F);
        return well_.phi(F, J) + th_.value(theta);
    }
    Mat<d> dpsi_ref_dF(const Mat<d>& F, double theta) const override {
        (void)theta;
        return well_.dphi(F, this->checked_det(F));
    }
    double dpsi_ref_dtheta(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        return th_.d1(theta);
    }
    double d2psi_ref_dtheta2(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        return th_.d2(theta);
    }
    Mat<d> d2psi_ref_dFdtheta(const Mat<d>& F, double theta) const override {
        this->checked_det(F);
        if (theta <= 0.0)
            throw MaterialDomainError("nonphysical_log: mixed derivative undefined at theta <= 0");
        return Mat<d>{};
    }

    double theta_ref() const override { return p_.theta_ref; }
    double coercivity_alpha() const override { return 0.0; }
    const char* name() const override { return "nonphysical_log"; }

   private:
    NonphysicalLogParams p_;
    detail::EnergyWell<d> well_;
    detail::LogThermal th_;
};

template <int d>
std::unique_ptr<FreeEnergyModel<d>> make_model(const ModelParams<d>& params) {
    return std::visit(
        [](const auto& p) -> std::unique_ptr<FreeEnergyModel<d>> {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, NeoHookeanPowerParams>)
                return std::make_unique<NeoHookeanPower<d>>(p);
            else if constexpr (std::is_same_v<P, NeoHookeanLogParams>)
                return std::make_unique<NeoHookeanLog<d>>(p);
            else if constexpr (std::is_same_v<P, ThermalExpansionParams>)
                return std::make_unique<ThermalExpansion<d>>(p);
            else if constexpr (std::is_same_v<P, BoundedHeatCapacityParams>)
                return std::make_unique<BoundedHeatCapacity<d>>(p);
            else if constexpr (std::is_same_v<P, MultiWellSmaParams<d>>)
                return std::make_unique<MultiWellSma<d>>(p);
            else
                return std::make_unique<NonphysicalLog<d>>(p);
        },
        params);
}

// ---------------------------------------------------------------------------
// Derived thermodynamic quantities.

template <int d>
Mat<d> cauchy_stress(const FreeEnergyModel<d>& m, const Mat<d>& F, double theta) {
    const double J = det(F);
    if (!(J > 0.0)) throw MaterialDomainError("cauchy_stress requires det F > 0");
    // 𝜓'_F Fᵀ/J; identical to ψ'_F Fᵀ + ψ𝕀 (the ψ𝕀 term cancels against the
    // −ψF^{-T}Fᵀ piece of ψ'_F exactly), but avoids computing F⁻¹.
    return (1.0 / J) * matmul(m.dpsi_ref_dF(F, theta), transpose(F));
}

template <int d>
double entropy(const FreeEnergyModel<d>& m, const Mat<d>& F, double theta) {
    return -m.dpsi_dtheta(F, theta);
}

template <int d>
double heat_capacity(const FreeEnergyModel<d>& m, const Mat<d>& F, double theta) {
    if (theta <= 0.0) {
        // Flat extension: c vanishes for nonpositive temperature. det F is
        // still validated so the domain contract is uniform.
        if (!(det(F) > 0.0)) throw MaterialDomainError("heat_capacity requires det F > 0");
        return 0.0;
    }
    return -theta * m.d2psi_dtheta2(F, theta);
}

template <int d>
double internal_energy(const FreeEnergyModel<d>& m, const Mat<d>& F, double theta) {
    // Gibbs relation E = ψ + θη = ψ − θψ'_θ. On θ ≤ 0 the energy is constant
    // and equals ψ(F,0); going through ψ(F,0) directly keeps this branch
    // defined even for models whose entropy diverges at zero temperature.
    if (theta <= 0.0) return m.psi(F, 0.0);
    return m.psi(F, theta) - theta * m.dpsi_dtheta(F, theta);
}

template <int d>
double thermal_energy(const FreeEnergyModel<d>& m, const Mat<d>& F, double theta) {
    if (theta <= 0.0) return 0.0;
    return internal_energy(m, F, theta) - internal_energy(m, F, 0.0);
}

// Monotone inverse of U(F,·): returns the unique θ > 0 with U(F,θ) = u for
// u > 0, and 0 for u ≤ 0 (the continuous modified inverse). Safeguarded
// Newton inside a maintained bracket; Newton uses U'_θ = c(F,θ), which
// degenerates at θ → 0, hence the bisection fallback. A positive guess seeds
// the bracket and the first iterate (warm start for per-cell recovery loops).
template <int d>
double invert_thermal_energy(const FreeEnergyModel<d>& m, const Mat<d>& F, double u,
                             double guess = -1.0) {
    if (!std::isfinite(u)) throw MaterialDomainError("invert_thermal_energy: u must be finite");
    if (u <= 0.0) return 0.0;

    const double E0 = internal_energy(m, F, 0.0);
    const auto U = [&](double th) { return internal_energy(m, F, th) - E0; };

    double hi = (guess > 0.0 && std::isfinite(guess)) ? 2.0 * guess
                                                      : std::max(m.theta_ref(), 1.0);
    int expand = 0;
    while (U(hi) < u) {
        hi *= 2.0;
        if (++expand > 200 || !std::isfinite(hi))
            throw InversionError("invert_thermal_energy: no finite upper bracket for u = " +
                                 std::to_string(u));
    }
    double lo = 0.0;
    double theta = (guess > 0.0 && guess < hi) ? guess : 0.5 * hi;

    const double res_tol = 1e-13 * (1.0 + std::abs(u));
    for (int it = 0; it < 200; ++it) {
        const double r = U(theta) - u;
        if (std::abs(r) <= res_tol) return theta;
        if (r > 0.0)
            hi = theta;
        else
            lo = theta;
        if (hi - lo <= 1e-14 * (1.0 + hi)) return 0.5 * (lo + hi);

        double next = 0.5 * (lo + hi);
        const double c = heat_capacity(m, F, theta);
        if (c > 1e-8) {
            const double newton = theta - r / c;
            if (newton > lo && newton < hi) next = newton;
        }
        theta = next;
    }
    throw InversionError("invert_thermal_energy: no convergence in 200 iterations, bracket [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "] for u = " +
                         std::to_string(u));
}

// Cauchy stress split T = T0 + T1 into the cold part T0 = T(F,0) and the
// thermal remainder T1, which vanishes identically at θ ≤ 0.
template <int d>
std::pair<Mat<d>, Mat<d>> stress_split(const FreeEnergyModel<d>& m, const Mat<d>& F,
                                       double theta) {
    const Mat<d> T0 = cauchy_stress(m, F, 0.0);
    const Mat<d> T1 = cauchy_stress(m, F, theta) - T0;
    return {T0, T1};
}

struct TabulateRow {
    double theta, psi, E, eta, c;
};

template <int d>
std::vector<TabulateRow> tabulate(const FreeEnergyModel<d>& m, const Mat<d>& F,
                                  const std::vector<double>& theta_grid) {
    std::vector<TabulateRow> rows;
    rows.reserve(theta_grid.size());
    for (const double th : theta_grid)
        rows.push_back({th, m.psi(F, th), internal_energy(m, F, th), entropy(m, F, th),
                        heat_capacity(m, F, th)});
    return rows;
}

}  // namespace tvem
