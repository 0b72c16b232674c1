#pragma once

// Balance-law bookkeeping: per-step ledger rows of the conserved and
// produced quantities, finite-difference residuals of the mechanical, total,
// and entropy balances, CSV writers, and the run() driver that produces a
// trajectory with its ledger.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "tvem/solver.hpp"

namespace tvem {

struct BalanceRow {
    double t = 0.0;
    double mass = 0.0;
    double momentum_x = 0.0;
    double momentum_y = 0.0;
    double kinetic = 0.0;
    double internal = 0.0;
    double total = 0.0;   // kinetic + internal, definitional
    double stored = 0.0;  // integral of the zero-temperature free energy
    double dissipation_rate = 0.0;  // unregularized viscous production
    double power_gravity = 0.0;
    double power_source = 0.0;
    double entropy_total = 0.0;
    double entropy_production = 0.0;
    double min_detF = 0.0;
    double min_rho = 0.0;
    double min_theta = 0.0;
    double curlF_norm = 0.0;
    // Cross-check integrals kept alongside the CSV columns: the stress power
    // and its thermal part, and the count of cells excluded from the entropy
    // production integrand by the temperature floor.
    double power_stress = 0.0;
    double power_adiabatic = 0.0;
    long entropy_excluded_cells = 0;
};

inline BalanceRow energy_report(const SimState& s, const SimConfig& cfg,
                                const FreeEnergyModel<2>& m, SolverWorkspace* shared_ws = nullptr) {
    const Grid& g = s.rho.grid;
    SolverWorkspace local;
    SolverWorkspace& ws = shared_ws ? *shared_ws : local;
    recover_theta(s, m, ws);

    const MatrixField G = grad_vec(s.v);
    const Tensor3Field H2 = second_grad(s.v);
    const VectorField grad_theta = grad(ws.theta);

    BalanceRow r;
    r.t = s.t;
    r.min_detF = std::numeric_limits<double>::infinity();
    r.min_rho = std::numeric_limits<double>::infinity();
    r.min_theta = std::numeric_limits<double>::infinity();

    detail::CompensatedSum mass, momx, momy, kin, internal, stored, diss, pgrav, ent, eprod,
        pstress, padiab, curl2;
    const double theta_floor = 1e-12 * m.theta_ref();

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double rho = s.rho(i, j);
            const Vec<2>& v = s.v(i, j);
            const Mat<2>& F = s.F(i, j);
            const double theta = ws.theta(i, j);

            mass.add(rho);
            momx.add(rho * v[0]);
            momy.add(rho * v[1]);
            kin.add(0.5 * rho * (v[0] * v[0] + v[1] * v[1]));
            internal.add(s.e(i, j));
            stored.add(m.psi(F, 0.0));
            pgrav.add(rho * dot(cfg.gravity, v));

            const double x = frobenius2(sym(G(i, j)));
            const double y = std::pow(frobenius(H2(i, j)), cfg.p);
            const double xi = cfg.nu1 * x + cfg.nu2 * y;
            diss.add(xi);

            const Mat<2> T = cauchy_stress(m, F, theta);
            const Mat<2> T0 = cauchy_stress(m, F, 0.0);
            pstress.add(ddot(T, G(i, j)));
            padiab.add(ddot(T, G(i, j)) - ddot(T0, G(i, j)));

            if (theta > 0.0) ent.add(entropy(m, F, theta));
            if (theta >= theta_floor) {
                const double gt2 = dot(grad_theta(i, j), grad_theta(i, j));
                eprod.add(xi / theta + cfg.kappa0 * gt2 / (theta * theta));
            } else {
                ++r.entropy_excluded_cells;
            }

            const double ca = ddx(s.F, i, j, 0 * 2 + 1) - ddy(s.F, i, j, 0 * 2 + 0);
            const double cb = ddx(s.F, i, j, 1 * 2 + 1) - ddy(s.F, i, j, 1 * 2 + 0);
            curl2.add(ca * ca + cb * cb);

            r.min_detF = std::min(r.min_detF, det(F));
            r.min_rho = std::min(r.min_rho, rho);
            r.min_theta = std::min(r.min_theta, theta);
        }

    const double w = g.dx * g.dy;
    r.mass = mass.value() * w;
    r.momentum_x = momx.value() * w;
    r.momentum_y = momy.value() * w;
    r.kinetic = kin.value() * w;
    r.internal = internal.value() * w;
    r.total = r.kinetic + r.internal;
    r.stored = stored.value() * w;
    r.dissipation_rate = diss.value() * w;
    r.power_gravity = pgrav.value() * w;
    r.power_source =
        cfg.heat_source / (1.0 + cfg.epsilon * cfg.heat_source) * g.Lx * g.Ly;
    r.entropy_total = ent.value() * w;
    r.entropy_production = eprod.value() * w;
    r.curlF_norm = std::sqrt(std::max(curl2.value() * w, 0.0));
    r.power_stress = pstress.value() * w;
    r.power_adiabatic = padiab.value() * w;
    return r;
}

struct ResidualRow {
    double t = 0.0;
    double mechanical_residual = 0.0;
    double total_residual = 0.0;
    double entropy_violation = 0.0;
    double adiabatic_crosscheck = 0.0;
};

// Finite-difference residuals of the balance laws along a ledger: centered
// d/dt in the interior, one-sided at the endpoints.
inline std::vector<ResidualRow> balance_residuals(const std::vector<BalanceRow>& rows,
                                                  const SimConfig&) {
    if (rows.size() < 2)
        throw std::invalid_argument("balance_residuals: need at least 2 ledger rows");
    const std::size_t n = rows.size();
    auto ddt = [&](auto field, std::size_t k) {
        const std::size_t lo = (k == 0) ? 0 : k - 1;
        const std::size_t hi = (k + 1 == n) ? k : k + 1;
        return (field(rows[hi]) - field(rows[lo])) / (rows[hi].t - rows[lo].t);
    };
    std::vector<ResidualRow> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        ResidualRow& r = out[k];
        r.t = rows[k].t;
        r.mechanical_residual =
            ddt([](const BalanceRow& b) { return b.kinetic + b.stored; }, k) +
            rows[k].dissipation_rate - rows[k].power_gravity + rows[k].power_adiabatic;
        r.total_residual = ddt([](const BalanceRow& b) { return b.total; }, k) -
                           rows[k].power_gravity - rows[k].power_source;
        r.entropy_violation =
            (k == 0) ? 0.0
                     : std::max(0.0, -(rows[k].entropy_total - rows[k - 1].entropy_total));
        r.adiabatic_crosscheck =
            std::abs(rows[k].power_stress - ddt([](const BalanceRow& b) { return b.stored; }, k) -
                     rows[k].power_adiabatic);
    }
    return out;
}

namespace detail {

inline void put17(std::ofstream& os, double v, bool lead_comma) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    if (lead_comma) os << ',';
    os << buf;
}

}  // namespace detail

inline const char* ledger_csv_header() {
    return "t,mass,momentum_x,momentum_y,kinetic,internal,total,stored,dissipation_rate,"
           "power_gravity,power_source,entropy_total,entropy_production,min_detF,min_rho,"
           "min_theta,curlF_norm";
}

inline void write_ledger_csv(const std::string& path, const std::vector<BalanceRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_ledger_csv: cannot open " + path);
    os << ledger_csv_header() << "\n";
    for (const auto& r : rows) {
        const double cols[] = {r.t,
                               r.mass,
                               r.momentum_x,
                               r.momentum_y,
                               r.kinetic,
                               r.internal,
                               r.total,
                               r.stored,
                               r.dissipation_rate,
                               r.power_gravity,
                               r.power_source,
                               r.entropy_total,
                               r.entropy_production,
                               r.min_detF,
                               r.min_rho,
                               r.min_theta,
                               r.curlF_norm};
        for (std::size_t k = 0; k < std::size(cols); ++k) detail::put17(os, cols[k], k > 0);
        os << "\n";
    }
}

inline void write_residuals_csv(const std::string& path, const std::vector<ResidualRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_residuals_csv: cannot open " + path);
    os << "t,mechanical_residual,total_residual,entropy_violation,adiabatic_crosscheck\n";
    for (const auto& r : rows) {
        detail::put17(os, r.t, false);
        detail::put17(os, r.mechanical_residual, true);
        detail::put17(os, r.total_residual, true);
        detail::put17(os, r.entropy_violation, true);
        detail::put17(os, r.adiabatic_crosscheck, true);
        os << "\n";
    }
}

struct RunResult {
    std::vector<BalanceRow> ledger;
    std::vector<SimState> dumps;  // on cadence, always including the initial state
    SimState final_state;
    bool blew_up = false;
    std::string blowup_what;
};

inline RunResult run(const SimConfig& cfg) {
    cfg.validate();
    const auto model = make_model<2>(cfg.material);
    RunResult R;
    SimState s = initial_state(cfg, *model);
    SolverWorkspace ws;
    R.ledger.push_back(energy_report(s, cfg, *model, &ws));
    R.dumps.push_back(s);

    double next_dump = cfg.dump_every;
    const double t_tiny = 1e-12 * std::max(cfg.t_end, cfg.dump_every);
    while (s.t < cfg.t_end - t_tiny) {
        try {
            double dt = stable_dt(s, cfg, *model, ws);
            dt = std::min(dt, cfg.t_end - s.t);
            if (next_dump - s.t > t_tiny) dt = std::min(dt, next_dump - s.t);
            step(s, dt, cfg, *model, ws);
        } catch (const SimulationBlowup& b) {
            R.blew_up = true;
            R.blowup_what = b.what();
            break;
        }
        R.ledger.push_back(energy_report(s, cfg, *model, &ws));
        if (s.t >= next_dump - t_tiny) {
            R.dumps.push_back(s);
            while (next_dump <= s.t + t_tiny) next_dump += cfg.dump_every;
        }
    }
    if (!R.blew_up && (R.dumps.empty() || R.dumps.back().t < s.t - t_tiny)) R.dumps.push_back(s);
    R.final_state = s;
    return R;
}

}  // namespace tvem
