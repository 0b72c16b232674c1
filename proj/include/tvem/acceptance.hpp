#pragma once

// Twelve-point verification checklist for the workbench, shared by the
// `verify` subcommand and the acceptance test binary. Each criterion prints
// one PASS/FAIL line with its measured numbers. Every tolerance is a named
// constant defined next to the check that uses it; several windows were
// frozen from measured values on the reference toolchain and are annotated
// with the measurement.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tvem/audit.hpp"
#include "tvem/diagnostics.hpp"

namespace tvem {

struct CriterionResult {
    int index = 0;
    std::string label;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    bool quick = false;  // smaller grids and sample counts; a smoke run, not authoritative
    std::uint64_t seed = 2024;
};

namespace detail {

class StopWatch {
   public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

   private:
    std::chrono::steady_clock::time_point start_;
};

template <typename... Args>
std::string strprintf(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    return std::string(buf);
}

// The default instance of every shipped free-energy model. The multi-well
// model needs an explicit well table: one identity austenite well plus two
// isochoric martensite variants.
inline MultiWellSmaParams<2> reference_sma_params() {
    MultiWellSmaParams<2> p;
    SmaWell<2> austenite;
    austenite.K = 1.0;
    austenite.G = 1.0;
    austenite.c = 1.0;
    p.wells.push_back(austenite);
    const double lam = 1.1;
    for (int variant = 0; variant < 2; ++variant) {
        SmaWell<2> w;
        w.F_well(0, 0) = variant == 0 ? lam : 1.0 / lam;
        w.F_well(1, 1) = variant == 0 ? 1.0 / lam : lam;
        w.K = 1.0;
        w.G = 0.8;
        w.c = 0.8;
        p.wells.push_back(w);
    }
    p.varkappa = 0.05;
    p.theta_ref = 1.0;
    p.alpha = 0.5;
    return p;
}

inline std::vector<ModelParams<2>> reference_model_set() {
    return {
        NeoHookeanPowerParams{},    NeoHookeanLogParams{}, ThermalExpansionParams{},
        BoundedHeatCapacityParams{}, reference_sma_params(), NonphysicalLogParams{},
    };
}

inline SimConfig acceptance_shear_config(int n, double amplitude, double t_end, double dt_scale,
                                         double eps) {
    SimConfig cfg;
    cfg.scenario.id = "shear-decay";
    cfg.scenario.amplitude = amplitude;
    cfg.nx = cfg.ny = n;
    cfg.t_end = t_end;
    cfg.dump_every = t_end;
    cfg.dt.dt_scale = dt_scale;
    cfg.epsilon = eps;
    // At these amplitudes the quartic hyperviscous step bound (~h^4/|grad^2
    // v|^2) would dominate the viscous one and inflate the step count a
    // hundredfold; a smaller nu2 keeps the hyperstress active without that.
    cfg.nu2 = 1e-8;
    return cfg;
}

// --------------------------------------------------------------------------
// 1. Exact constitutive derivatives against finite differences of the
//    referential energy, across the full model set and the extended
//    temperature range (including theta < 0).

inline CriterionResult derivative_consistency(const AcceptanceOptions& opt) {
    constexpr double kTol = 1e-5;        // relative gap, floored at unit scale
    constexpr double kBudgetSec = 10.0;  // whole-suite wall-clock budget
    const long n_points = opt.quick ? 200 : 1000;

    StopWatch sw;
    CriterionResult r{1, "derivative-consistency", false, "", 0.0};
    double worst = 0.0;
    std::string worst_what = "none";
    long skipped = 0;

    auto track = [&](double gap, const char* what, const char* model) {
        if (gap > worst) {
            worst = gap;
            worst_what = strprintf("%s of %s", what, model);
        }
    };

    const auto params_set = reference_model_set();
    for (std::size_t im = 0; im < params_set.size(); ++im) {
        const auto m = make_model<2>(params_set[im]);
        AuditRng rng(opt.seed + im);
        for (long k = 0; k < n_points; ++k) {
            const Mat<2> F = sample_F<2>(rng, rng.uniform(0.3, 3.0), 3.0);
            double theta = rng.uniform(-1.0, 5.0);
            // The negative-temperature extension is intentionally kinked at
            // theta = 0; keep the difference stencils on one side of it.
            if (std::abs(theta) < 5e-4) theta += 1e-3;
            const double J = det(F);

            {
                const double h = 1e-6;
                Mat<2> dpsi;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        Mat<2> Fp = F, Fm = F;
                        Fp(a, b) += h;
                        Fm(a, b) -= h;
                        dpsi(a, b) = (m->psi_ref(Fp, theta) - m->psi_ref(Fm, theta)) / (2.0 * h);
                    }
                const Mat<2> T_fd = (1.0 / J) * matmul(dpsi, transpose(F));
                const Mat<2> T_ex = cauchy_stress(*m, F, theta);
                track(frobenius(T_fd - T_ex) / std::max(1.0, frobenius(T_ex)), "stress",
                      m->name());
            }

            try {
                const double eta_ex = entropy(*m, F, theta);
                const double h = 1e-6 * (1.0 + std::abs(theta));
                const double eta_fd =
                    -(m->psi_ref(F, theta + h) - m->psi_ref(F, theta - h)) / (2.0 * h * J);
                track(std::abs(eta_fd - eta_ex) / std::max(1.0, std::abs(eta_ex)), "entropy",
                      m->name());
            } catch (const MaterialDomainError&) {
                ++skipped;  // entropy deliberately undefined there (theta <= 0)
            }

            try {
                // Differencing the (already cross-checked) first derivative
                // instead of second-differencing the energy keeps the large
                // temperature-independent elastic part out of the round-off.
                const double h = 1e-6 * (1.0 + std::abs(theta));
                const double c_fd =
                    -theta *
                    (m->dpsi_ref_dtheta(F, theta + h) - m->dpsi_ref_dtheta(F, theta - h)) /
                    (2.0 * h * J);
                const double c_ex = heat_capacity(*m, F, theta);
                track(std::abs(c_fd - c_ex) / std::max(1.0, std::abs(c_ex)), "heat capacity",
                      m->name());
            } catch (const MaterialDomainError&) {
                ++skipped;
            }
        }
    }

    r.seconds = sw.seconds();
    r.pass = worst < kTol && r.seconds < kBudgetSec;
    r.detail = strprintf("%zu models x %ld points, worst gap %.2e in %s (tol %.0e), %ld undefined-entropy points skipped",
                         params_set.size(), n_points, worst, worst_what.c_str(), kTol, skipped);
    return r;
}

// --------------------------------------------------------------------------
// 2. Structural-assumption audit over the model set: every physical model
//    passes; the log-capacity counterexample fails the third-law check and
//    nothing else.

inline CriterionResult assumption_audit(const AcceptanceOptions& opt) {
    constexpr double kBudgetSec = 30.0;
    StopWatch sw;
    CriterionResult r{2, "assumption-audit", false, "", 0.0};

    bool ok = true;
    std::string trouble;
    long checks_run = 0;
    for (const auto& params : reference_model_set()) {
        const auto m = make_model<2>(params);
        AuditDomain dom;
        dom.seed = opt.seed;
        dom.n_samples = opt.quick ? 2000 : 10000;
        const auto rep = audit(*m, dom);
        const bool is_counterexample = std::string(m->name()) == "nonphysical_log";
        for (const auto& chk : rep.checks) {
            if (chk.informational) continue;
            ++checks_run;
            const bool should_fail = is_counterexample && chk.check_id == "third_law";
            if (chk.pass == should_fail) {
                ok = false;
                if (!trouble.empty()) trouble += ", ";
                trouble += strprintf("%s/%s unexpectedly %s", m->name(), chk.check_id.c_str(),
                                     chk.pass ? "passed" : "failed");
            }
        }
    }

    r.seconds = sw.seconds();
    r.pass = ok && r.seconds < kBudgetSec;
    r.detail = ok ? strprintf("%ld checks across 6 models behaved as required", checks_run)
                  : trouble;
    return r;
}

// --------------------------------------------------------------------------
// 3. Thermal-energy inversion round trip over [0, 100 theta_ref], plus the
//    hard zero for nonpositive energies.

inline CriterionResult temperature_inversion(const AcceptanceOptions& opt) {
    constexpr double kTolTheta = 1e-10;  // absolute recovery error
    StopWatch sw;
    CriterionResult r{3, "temperature-inversion", false, "", 0.0};

    const int n_theta = opt.quick ? 60 : 200;
    const int n_F = opt.quick ? 2 : 3;
    double worst = 0.0;
    std::string worst_model = "none";
    bool zeros_exact = true;

    for (const auto& params : reference_model_set()) {
        const auto m = make_model<2>(params);
        AuditRng rng(opt.seed ^ 0x1234);
        for (int kf = 0; kf < n_F; ++kf) {
            const Mat<2> F = sample_F<2>(rng, rng.uniform(0.3, 3.0), 3.0);
            for (int k = 0; k <= n_theta; ++k) {
                // Quadratic spacing concentrates points near zero, where the
                // capacity of the power-law models degenerates.
                const double frac = static_cast<double>(k) / n_theta;
                const double theta = 100.0 * m->theta_ref() * frac * frac;
                const double u = thermal_energy(*m, F, theta);
                const double back = invert_thermal_energy(*m, F, u);
                const double err = std::abs(back - theta);
                if (err > worst) {
                    worst = err;
                    worst_model = m->name();
                }
            }
            for (const double u : {0.0, -1e-300, -1e-6, -3.7})
                if (invert_thermal_energy(*m, F, u) != 0.0) zeros_exact = false;
        }
    }

    r.seconds = sw.seconds();
    r.pass = worst < kTolTheta && zeros_exact;
    r.detail = strprintf("worst |recovered - theta| %.2e in %s (tol %.0e); nonpositive u -> 0 %s",
                         worst, worst_model.c_str(), kTolTheta,
                         zeros_exact ? "exact" : "VIOLATED");
    return r;
}

// --------------------------------------------------------------------------
// 4. Mass conservation of the conservative density update.

inline CriterionResult mass_conservation(const AcceptanceOptions& opt) {
    constexpr double kTolDrift = 1e-12;  // relative
    StopWatch sw;
    CriterionResult r{4, "mass-conservation", false, "", 0.0};

    const int n = opt.quick ? 32 : 64;
    const int steps = opt.quick ? 200 : 1000;
    SimConfig cfg = acceptance_shear_config(n, 0.1, 1.0, 1.0, 0.0);
    const auto m = make_model<2>(cfg.material);
    SimState s = initial_state(cfg, *m);
    SolverWorkspace ws;
    const double dt = stable_dt(s, cfg, *m, ws);
    const double mass0 = integrate(s.rho);
    for (int k = 0; k < steps; ++k) step(s, dt, cfg, *m, ws);
    const double drift = std::abs(integrate(s.rho) - mass0) / std::abs(mass0);

    r.seconds = sw.seconds();
    r.pass = drift < kTolDrift;
    r.detail = strprintf("relative drift %.2e over %d steps at %d^2 (tol %.0e)", drift, steps, n,
                         kTolDrift);
    return r;
}

// --------------------------------------------------------------------------
// Shared isolated shear-decay study: one run at a pinned base step, one with
// the step exactly halved, and one regularized run at the halved step, reused
// by criteria 5, 6, 7, 10. Fixed steps (rather than the adaptive bound) keep
// the halving ratio exact; the base step sits near the middle of the viscous
// stability window, small enough for the first-law drift tolerance and large
// enough that the halved drift stays above the round-off floor.

struct ShearStudy {
    int n = 0;
    double t_end = 0.0;
    double dt = 0.0;
    RunResult base;
    RunResult halved;       // dt / 2, otherwise identical
    RunResult regularized;  // dt / 2, eps = 0.5
    double seconds = 0.0;
};

// Drives the integrator at a constant step. Ledger rows are recorded every
// step or, when the caller only needs net totals, just at the endpoints.
inline RunResult run_fixed_step(const SimConfig& cfg, double dt, bool per_step_rows) {
    RunResult out;
    const auto m = make_model<2>(cfg.material);
    SimState s = initial_state(cfg, *m);
    SolverWorkspace ws;
    const int steps = static_cast<int>(std::lround(cfg.t_end / dt));
    out.ledger.push_back(energy_report(s, cfg, *m, &ws));
    try {
        for (int k = 0; k < steps; ++k) {
            step(s, dt, cfg, *m, ws);
            if (per_step_rows || k + 1 == steps)
                out.ledger.push_back(energy_report(s, cfg, *m, &ws));
        }
    } catch (const SimulationBlowup& ex) {
        out.blew_up = true;
        out.blowup_what = ex.what();
    }
    out.final_state = std::move(s);
    return out;
}

inline ShearStudy make_shear_study(const AcceptanceOptions& opt) {
    StopWatch sw;
    ShearStudy st;
    st.n = opt.quick ? 32 : 64;
    st.t_end = 1.3;
    st.dt = opt.quick ? 2e-3 : 1.25e-3;
    const double A = 0.5;
    const SimConfig plain = acceptance_shear_config(st.n, A, st.t_end, 1.0, 0.0);
    st.base = run_fixed_step(plain, st.dt, true);
    st.halved = run_fixed_step(plain, st.dt / 2.0, false);
    st.regularized =
        run_fixed_step(acceptance_shear_config(st.n, A, st.t_end, 1.0, 0.5), st.dt / 2.0, true);
    st.seconds = sw.seconds();
    return st;
}

// 5. First law: total energy of the isolated run is conserved to
//    time-integration error, which collapses at fourth-order rate (>= 8x
//    under step halving is required; the ideal factor is 16).

inline CriterionResult energy_conservation(const AcceptanceOptions& opt, const ShearStudy& st) {
    (void)opt;
    constexpr double kTolDrift = 1e-6;   // relative, base step size
    constexpr double kMinShrink = 8.0;   // drift ratio base/halved
    constexpr double kMinDecay = 0.9;    // required kinetic-energy decay
    constexpr double kBudgetSec = 300.0;
    StopWatch sw;
    CriterionResult r{5, "energy-conservation", false, "", 0.0};

    if (st.base.blew_up || st.halved.blew_up) {
        r.detail = "run blew up: " + (st.base.blew_up ? st.base.blowup_what : st.halved.blowup_what);
        return r;
    }
    const auto& L0 = st.base.ledger;
    const auto& L1 = st.halved.ledger;
    const double decay = 1.0 - L0.back().kinetic / L0.front().kinetic;
    const double drift0 = std::abs(L0.back().total - L0.front().total) / L0.front().total;
    const double drift1 = std::abs(L1.back().total - L1.front().total) / L1.front().total;
    const double shrink = drift1 > 0.0 ? drift0 / drift1
                                       : std::numeric_limits<double>::infinity();

    r.seconds = sw.seconds() + st.seconds;
    r.pass = decay >= kMinDecay && drift0 < kTolDrift && shrink >= kMinShrink &&
             r.seconds < kBudgetSec;
    r.detail = strprintf(
        "kinetic decay %.1f%%, relative drift %.2e (tol %.0e), halving shrink %.1fx (need >= %.0fx)",
        100.0 * decay, drift0, kTolDrift, shrink, kMinShrink);
    return r;
}

// 6. Second law: total entropy of the same run never decreases, and strictly
//    increases whenever dissipation is active.

inline CriterionResult entropy_monotonicity(const AcceptanceOptions& opt, const ShearStudy& st) {
    (void)opt;
    constexpr double kViolationScale = 1e-10;  // of the entropy magnitude
    constexpr double kActiveDissipation = 1e-9;  // of the peak dissipation rate
    StopWatch sw;
    CriterionResult r{6, "entropy-monotonicity", false, "", 0.0};
    if (st.base.blew_up) {
        r.detail = "run blew up: " + st.base.blowup_what;
        return r;
    }

    const auto& L = st.base.ledger;
    double scale = 0.0, diss_max = 0.0;
    for (const auto& row : L) {
        scale = std::max(scale, std::abs(row.entropy_total));
        diss_max = std::max(diss_max, row.dissipation_rate);
    }
    double worst_drop = 0.0;
    long flat_active_steps = 0;
    for (std::size_t i = 1; i < L.size(); ++i) {
        const double dS = L[i].entropy_total - L[i - 1].entropy_total;
        worst_drop = std::max(worst_drop, -dS);
        if (L[i - 1].dissipation_rate > kActiveDissipation * diss_max && !(dS > 0.0))
            ++flat_active_steps;
    }

    r.seconds = sw.seconds();
    r.pass = worst_drop <= kViolationScale * scale && flat_active_steps == 0;
    r.detail = strprintf(
        "worst entropy drop %.2e vs scale %.3g (tol %.0e rel), %ld non-increasing active steps",
        worst_drop, scale, kViolationScale, flat_active_steps);
    return r;
}

// 7. Regularized dissipation only removes energy: the cumulative total-energy
//    residual stays nonpositive up to tolerance, and the regularized run ends
//    below the unregularized one.

inline CriterionResult regularized_energy_inequality(const AcceptanceOptions& opt,
                                                     const ShearStudy& st) {
    (void)opt;
    constexpr double kTolCumulative = 1e-8;  // of the initial total energy
    StopWatch sw;
    CriterionResult r{7, "regularized-energy-inequality", false, "", 0.0};
    if (st.regularized.blew_up || st.halved.blew_up) {
        r.detail = "run blew up";
        return r;
    }

    SimConfig cfg = acceptance_shear_config(st.n, 0.5, st.t_end, 1.0, 0.5);
    const auto res = balance_residuals(st.regularized.ledger, cfg);
    const auto& L = st.regularized.ledger;
    double cumulative = 0.0;
    for (std::size_t i = 1; i < L.size(); ++i)
        cumulative += res[i].total_residual * (L[i].t - L[i - 1].t);
    const double scale = L.front().total;
    const double final_gap = st.halved.ledger.back().total - L.back().total;

    r.seconds = sw.seconds();
    r.pass = cumulative <= kTolCumulative * scale && final_gap > 0.0;
    r.detail = strprintf(
        "cumulative residual %.2e of scale %.3g (cap +%.0e rel), final energy %.2e below eps=0",
        cumulative, scale, kTolCumulative, final_gap);
    return r;
}

// --------------------------------------------------------------------------
// Shared space-time refinement ladder on the compression pulse (the
// temperature-independent-stress model), reused by criteria 8 and 9. The
// step size refines faster than the spacing so the spatial error dominates
// the measured residuals.

struct LadderLevel {
    int n = 0;
    double dt = 0.0;
    int steps = 0;
    double mech_err = 0.0;     // max interior |mechanical_residual|
    double density_err = 0.0;  // max |rho - rho_R/det F| at the final time
};

inline std::vector<LadderLevel> run_refinement_ladder(const AcceptanceOptions& opt) {
    std::vector<LadderLevel> levels = opt.quick
                                          ? std::vector<LadderLevel>{{16, 0.008, 12, 0, 0},
                                                                     {32, 0.004, 25, 0, 0},
                                                                     {64, 0.001, 100, 0, 0}}
                                          : std::vector<LadderLevel>{{32, 0.004, 25, 0, 0},
                                                                     {64, 0.001, 100, 0, 0},
                                                                     {128, 0.0002, 500, 0, 0}};
    for (auto& lv : levels) {
        SimConfig cfg;
        cfg.scenario.id = "compression-pulse";
        cfg.scenario.amplitude = 0.15;
        cfg.nx = cfg.ny = lv.n;
        // As in the shear study: with the fixed step ladder the quartic
        // hyperviscous bound must stay above dt, so nu2 is kept small.
        cfg.nu2 = 1e-8;
        const auto m = make_model<2>(cfg.material);
        SimState s = initial_state(cfg, *m);
        SolverWorkspace ws;
        std::vector<BalanceRow> rows;
        rows.push_back(energy_report(s, cfg, *m, &ws));
        try {
            for (int k = 0; k < lv.steps; ++k) {
                step(s, lv.dt, cfg, *m, ws);
                rows.push_back(energy_report(s, cfg, *m, &ws));
            }
        } catch (const SimulationBlowup&) {
            lv.mech_err = lv.density_err = std::numeric_limits<double>::infinity();
            continue;
        }
        const auto res = balance_residuals(rows, cfg);
        for (std::size_t i = 1; i + 1 < res.size(); ++i)
            lv.mech_err = std::max(lv.mech_err, std::abs(res[i].mechanical_residual));
        for (int j = 0; j < lv.n; ++j)
            for (int i = 0; i < lv.n; ++i)
                lv.density_err = std::max(
                    lv.density_err, std::abs(s.rho(i, j) - cfg.scenario.rho_R / det(s.F(i, j))));
    }
    return levels;
}

inline CriterionResult convergence_criterion(int index, const char* label,
                                             const std::vector<LadderLevel>& levels,
                                             double LadderLevel::*member, double min_ratio,
                                             double seconds) {
    CriterionResult r{index, label, false, "", seconds};
    const double e0 = levels[0].*member, e1 = levels[1].*member, e2 = levels[2].*member;
    const double r1 = e1 > 0.0 ? e0 / e1 : std::numeric_limits<double>::infinity();
    const double r2 = e2 > 0.0 ? e1 / e2 : std::numeric_limits<double>::infinity();
    r.pass = r1 >= min_ratio && r2 >= min_ratio;
    r.detail = strprintf("errors %.2e -> %.2e -> %.2e, ratios %.1fx / %.1fx (need >= %.1fx)", e0,
                         e1, e2, r1, r2, min_ratio);
    return r;
}

// --------------------------------------------------------------------------
// 10. Dissipative-heating sanity: a quiescent hotspot diffuses (max
//     temperature falls monotonically, internal energy exactly retained);
//     the isolated shear run converts kinetic-energy loss into internal
//     energy one for one.

inline CriterionResult heating_sanity(const AcceptanceOptions& opt, const ShearStudy& st) {
    constexpr double kTolEnergy = 1e-6;      // relative, both sub-checks
    constexpr double kMonotoneSlack = 1e-12;  // of the initial max temperature
    StopWatch sw;
    CriterionResult r{10, "heating-sanity", false, "", 0.0};

    SimConfig cfg;
    cfg.scenario.id = "quiescent-hotspot";
    cfg.scenario.amplitude = 0.1;
    cfg.nx = cfg.ny = opt.quick ? 32 : 64;
    const auto m = make_model<2>(cfg.material);
    SimState s = initial_state(cfg, *m);
    SolverWorkspace ws;
    const double dt = stable_dt(s, cfg, *m, ws);
    const int steps = static_cast<int>(std::ceil(0.25 / dt));

    auto theta_max = [&]() {
        recover_theta(s, *m, ws);
        double mx = 0.0;
        for (double v : ws.theta.data) mx = std::max(mx, v);
        return mx;
    };
    const double e0 = integrate(s.e);
    double prev = theta_max();
    const double first = prev;
    bool monotone = true;
    for (int k = 0; k < steps; ++k) {
        step(s, dt, cfg, *m, ws);
        const double now = theta_max();
        if (now > prev + kMonotoneSlack * first) monotone = false;
        prev = now;
    }
    const double e_drift = std::abs(integrate(s.e) - e0) / std::abs(e0);
    const bool hotspot_ok = monotone && prev < first && e_drift < kTolEnergy;

    bool exchange_ok = false;
    double exchange_gap = std::numeric_limits<double>::quiet_NaN();
    if (!st.halved.blew_up) {
        const auto& L = st.halved.ledger;
        const double dkin = L.back().kinetic - L.front().kinetic;
        const double dint = L.back().internal - L.front().internal;
        exchange_gap = std::abs(dint + dkin) / std::abs(dkin);
        exchange_ok = exchange_gap < kTolEnergy;
    }

    r.seconds = sw.seconds();
    r.pass = hotspot_ok && exchange_ok;
    r.detail = strprintf(
        "hotspot max-theta %s (%.6g -> %.6g), internal-energy drift %.2e; shear exchange gap %.2e (tol %.0e)",
        monotone ? "monotone" : "NOT monotone", first, prev, e_drift, exchange_gap, kTolEnergy);
    return r;
}

// --------------------------------------------------------------------------
// 11. Closed-form thermal curves: with the elastic well switched off, the
//     tabulated psi, E, eta, c columns match the hand-integrated formulas of
//     the power-law and saturating heat-capacity families.

inline CriterionResult closed_form_curves(const AcceptanceOptions& opt) {
    (void)opt;
    constexpr double kTol = 1e-12;  // absolute, pointwise
    StopWatch sw;
    CriterionResult r{11, "closed-form-curves", false, "", 0.0};

    std::vector<double> grid;
    for (int k = 0; k <= 200; ++k) grid.push_back(2.0 * k / 200.0);
    const Mat<2> I = Mat<2>::identity();
    double worst = 0.0;

    for (const double alpha : {0.05, 0.2}) {
        NeoHookeanPowerParams p;
        p.K_e = 0.0;
        p.G_e = 0.0;
        p.c_v = 1.0;
        p.alpha = alpha;
        const auto m = make_model<2>(ModelParams<2>(p));
        for (const auto& row : tabulate(*m, I, grid)) {
            const double t = row.theta;
            const double pa = t > 0.0 ? std::pow(t, alpha) : 0.0;
            worst = std::max(worst, std::abs(row.c - pa));
            worst = std::max(worst, std::abs(row.eta - pa / alpha));
            worst = std::max(worst, std::abs(row.E - t * pa / (1.0 + alpha)));
            worst = std::max(worst, std::abs(row.psi + t * pa / (alpha * (1.0 + alpha))));
        }
    }
    {
        BoundedHeatCapacityParams p;
        p.K_e = 0.0;
        p.G_e = 0.0;
        p.c_v = 1.0;
        p.theta_r = 0.2;
        const auto m = make_model<2>(ModelParams<2>(p));
        for (const auto& row : tabulate(*m, I, grid)) {
            const double t = row.theta;
            const double lg = std::log1p(t / p.theta_r);
            worst = std::max(worst, std::abs(row.c - t / (t + p.theta_r)));
            worst = std::max(worst, std::abs(row.eta - lg));
            worst = std::max(worst, std::abs(row.E - (t - p.theta_r * lg)));
            worst = std::max(worst, std::abs(row.psi - (t - (t + p.theta_r) * lg)));
        }
    }

    r.seconds = sw.seconds();
    r.pass = worst < kTol;
    r.detail = strprintf("worst pointwise gap %.2e over 3 parameter sets x 201 points (tol %.0e)",
                         worst, kTol);
    return r;
}

// --------------------------------------------------------------------------
// 12. Operator calculus: summation-by-parts to round-off on random periodic
//     fields, and clean second-order convergence of grad, div, and the
//     Laplacian on analytic fields.

inline CriterionResult operator_calculus(const AcceptanceOptions& opt) {
    constexpr double kTolSbp = 1e-12;    // of the integrand magnitude
    constexpr double kRatioLo = 3.5;     // second order: ratio 4 +/- 0.5
    constexpr double kRatioHi = 4.5;
    constexpr double kBudgetSec = 5.0;
    StopWatch sw;
    CriterionResult r{12, "operator-calculus", false, "", 0.0};
    const double tau = 2.0 * M_PI;

    AuditRng rng(opt.seed ^ 0x5151);
    double worst_sbp = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Grid g(40, 56, 1.0, 1.35);
        ScalarField s(g);
        VectorField w(g);
        const double a1 = rng.uniform(-1, 1), a2 = rng.uniform(-1, 1), a3 = rng.uniform(-1, 1);
        const double b1 = rng.uniform(-1, 1), b2 = rng.uniform(-1, 1);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i) / g.Lx, y = g.y(j) / g.Ly;
                s(i, j) = a1 * std::sin(tau * x) + a2 * std::cos(tau * (x + 2 * y)) +
                          a3 * std::sin(2 * tau * y);
                w(i, j)[0] = b1 * std::cos(tau * (x - y)) + a3 * std::sin(tau * x);
                w(i, j)[1] = b2 * std::sin(tau * (2 * x + y)) + a1;
            }
        const VectorField gs = grad(s);
        const ScalarField dw = div(w);
        ScalarField prod1(g), prod2(g), mag(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                prod1(i, j) = dot(gs(i, j), w(i, j));
                prod2(i, j) = s(i, j) * dw(i, j);
                mag(i, j) = std::abs(prod1(i, j));
            }
        const double gap = std::abs(integrate(prod1) + integrate(prod2));
        worst_sbp = std::max(worst_sbp, gap / std::max(1.0, integrate(mag)));
    }

    // Convergence on an analytic field pair; all three operators must land in
    // the second-order ratio window under mesh doubling.
    auto op_errors = [&](int n) {
        const Grid g(n, n, 1.0, 1.0);
        ScalarField s(g);
        VectorField w(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j);
                s(i, j) = std::sin(tau * x) * std::cos(2 * tau * y);
                w(i, j)[0] = std::sin(tau * x) * std::cos(tau * y);
                w(i, j)[1] = std::cos(tau * x) * std::sin(2 * tau * y);
            }
        const VectorField gs = grad(s);
        const ScalarField dw = div(w);
        const ScalarField lap = div(grad(s));
        double eg = 0.0, ed = 0.0, el = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j);
                const Vec<2> gex{tau * std::cos(tau * x) * std::cos(2 * tau * y),
                                 -2 * tau * std::sin(tau * x) * std::sin(2 * tau * y)};
                const double dex = tau * std::cos(tau * x) * std::cos(tau * y) +
                                   2 * tau * std::cos(tau * x) * std::cos(2 * tau * y);
                const double lex = -5.0 * tau * tau * s(i, j);
                const Vec<2> gd = gs(i, j) - gex;
                eg = std::max(eg, std::sqrt(dot(gd, gd)));
                ed = std::max(ed, std::abs(dw(i, j) - dex));
                el = std::max(el, std::abs(lap(i, j) - lex));
            }
        return std::array<double, 3>{eg, ed, el};
    };
    const auto coarse = op_errors(32);
    const auto fine = op_errors(64);
    bool ratios_ok = true;
    double ratios[3];
    for (int k = 0; k < 3; ++k) {
        ratios[k] = coarse[k] / fine[k];
        if (!(ratios[k] > kRatioLo && ratios[k] < kRatioHi)) ratios_ok = false;
    }

    r.seconds = sw.seconds();
    r.pass = worst_sbp < kTolSbp && ratios_ok && r.seconds < kBudgetSec;
    r.detail = strprintf(
        "duality gap %.2e (tol %.0e); grad/div/Laplacian ratios %.2f / %.2f / %.2f (window %.1f..%.1f)",
        worst_sbp, kTolSbp, ratios[0], ratios[1], ratios[2], kRatioLo, kRatioHi);
    return r;
}

}  // namespace detail

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                                   std::ostream& os) {
    std::vector<CriterionResult> out;
    auto emit = [&](CriterionResult r) {
        os << detail::strprintf("[%2d/12] %s %s: %s (%.1f s)", r.index, r.pass ? "PASS" : "FAIL",
                                r.label.c_str(), r.detail.c_str(), r.seconds)
           << std::endl;
        out.push_back(std::move(r));
    };

    if (opt.quick)
        os << "quick mode: reduced grids and sample counts, results are a smoke check"
           << std::endl;

    emit(detail::derivative_consistency(opt));
    emit(detail::assumption_audit(opt));
    emit(detail::temperature_inversion(opt));
    emit(detail::mass_conservation(opt));

    const detail::ShearStudy study = detail::make_shear_study(opt);
    emit(detail::energy_conservation(opt, study));
    emit(detail::entropy_monotonicity(opt, study));
    emit(detail::regularized_energy_inequality(opt, study));

    {
        detail::StopWatch sw;
        const auto ladder = detail::run_refinement_ladder(opt);
        const double half = sw.seconds() / 2.0;
        // Measured full-ladder ratios are ~4x per level; 3.0 leaves margin
        // while still rejecting first-order behavior. The coarse quick ladder
        // is pre-asymptotic and only has to show clear error reduction.
        const double min_ratio = opt.quick ? 2.0 : 3.0;
        emit(detail::convergence_criterion(8, "mechanical-balance-convergence", ladder,
                                           &detail::LadderLevel::mech_err, min_ratio, half));
        emit(detail::convergence_criterion(9, "density-compatibility-convergence", ladder,
                                           &detail::LadderLevel::density_err, min_ratio, half));
    }

    emit(detail::heating_sanity(opt, study));
    emit(detail::closed_form_curves(opt));
    emit(detail::operator_calculus(opt));

    int n_pass = 0;
    for (const auto& r : out) n_pass += r.pass ? 1 : 0;
    os << detail::strprintf("acceptance: %d/12 criteria passed%s", n_pass,
                            opt.quick ? " (quick mode)" : "")
       << std::endl;
    return out;
}

}  // namespace tvem
