#pragma once

// Method-of-lines integration of the regularized Eulerian system on the
// torus: conservative mass transport, skew-symmetric momentum advection,
// transported deformation gradient, and an internal-energy equation whose
// temperature is recovered pointwise through the monotone thermal-energy
// inverse. The advection splitting is chosen so that the semi-discrete sums
// of mass, momentum, and total energy are exactly conserved in isolation;
// the only drift left is the time integrator's.

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "tvem/config.hpp"
#include "tvem/grid.hpp"
#include "tvem/materials.hpp"
#include "tvem/tensor.hpp"

namespace tvem {

struct SimulationBlowup : std::runtime_error {
    double t;
    int i, j;
    SimulationBlowup(const std::string& what, double t_, int i_, int j_)
        : std::runtime_error(what + " at t=" + std::to_string(t_) + ", cell (" +
                             std::to_string(i_) + "," + std::to_string(j_) + ")"),
          t(t_),
          i(i_),
          j(j_) {}
};

struct SimState {
    double t = 0.0;
    ScalarField rho;
    VectorField v;
    MatrixField F;
    ScalarField e;
};

struct SimDeriv {
    ScalarField drho;
    VectorField dv;
    MatrixField dF;
    ScalarField de;
};

// Scratch persisted across evaluations: the recovered temperature field,
// reused both as the warm start of the next per-cell inversion sweep and by
// the dt bound (heat-capacity scan).
struct SolverWorkspace {
    ScalarField theta;
    bool warm = false;
};

namespace detail {

// Smooth periodic bump with a Gaussian core of width sigma: the squared
// distance is replaced by its periodic analog (L sin(pi u / L) / pi)^2.
inline double periodic_bump(double x, double y, double cx, double cy, double Lx, double Ly,
                            double sigma) {
    const double sx = std::sin(M_PI * (x - cx) / Lx) * Lx / M_PI;
    const double sy = std::sin(M_PI * (y - cy) / Ly) * Ly / M_PI;
    return std::exp(-(sx * sx + sy * sy) / (2.0 * sigma * sigma));
}

}  // namespace detail

// Regularized viscous heating at a point, from the squared symmetric velocity
// gradient x = |e(v)|^2 and the hyperviscous power y = |grad^2 v|^p. The
// denominator bounds the value by 1/epsilon while keeping it below the
// unregularized rate whenever nu1, nu2 <= 1.
inline double regularized_dissipation(double nu1, double nu2, double eps, double x, double y) {
    return (nu1 * x + nu2 * y) / (1.0 + eps * (x + y));
}

// Validates the state cellwise and fills ws.theta with the recovered
// temperature. Any violation raises SimulationBlowup with the offending cell.
inline void recover_theta(const SimState& s, const FreeEnergyModel<2>& m, SolverWorkspace& ws) {
    const Grid& g = s.rho.grid;
    if (!ws.warm || !ws.theta.grid.same_shape(g)) {
        ws.theta = ScalarField(g);
        ws.warm = false;
    }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double rho = s.rho(i, j);
            const Mat<2>& F = s.F(i, j);
            const double e = s.e(i, j);
            if (!std::isfinite(rho) || !std::isfinite(e) || !std::isfinite(frobenius(F)) ||
                !std::isfinite(s.v(i, j)[0]) || !std::isfinite(s.v(i, j)[1]))
                throw SimulationBlowup("non-finite field value", s.t, i, j);
            if (rho <= 0.0) throw SimulationBlowup("rho <= 0", s.t, i, j);
            if (det(F) <= 0.0) throw SimulationBlowup("det F <= 0", s.t, i, j);
            const double u = e - internal_energy(m, F, 0.0);
            if (u < -1e-6 * (1.0 + std::abs(e)))
                throw SimulationBlowup("internal energy below the zero-temperature floor", s.t,
                                       i, j);
            const double guess = ws.warm ? ws.theta(i, j) : -1.0;
            try {
                ws.theta(i, j) = invert_thermal_energy(m, F, u, guess);
            } catch (const InversionError& err) {
                throw SimulationBlowup(std::string("temperature recovery failed: ") + err.what(),
                                       s.t, i, j);
            }
        }
    ws.warm = true;
}

inline SimState initial_state(const SimConfig& cfg, const FreeEnergyModel<2>& m) {
    const Grid g(cfg.nx, cfg.ny, cfg.Lx, cfg.Ly);
    const ScenarioSpec& sc = cfg.scenario;
    SimState s;
    s.t = 0.0;
    s.rho = ScalarField(g);
    s.v = VectorField(g);
    s.F = MatrixField(g, Mat<2>::identity());
    s.e = ScalarField(g);

    ScalarField theta0(g, sc.theta0);
    if (sc.id == "quiescent-hotspot") {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                theta0(i, j) += sc.amplitude * detail::periodic_bump(g.x(i), g.y(j), 0.5 * g.Lx,
                                                                     0.5 * g.Ly, g.Lx, g.Ly,
                                                                     sc.bump_sigma);
    } else if (sc.id == "shear-decay") {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                s.v(i, j)[0] = sc.amplitude * std::sin(2.0 * M_PI * g.y(j) / g.Ly);
    } else if (sc.id == "compression-pulse") {
        if (std::abs(sc.amplitude) >= 1.0)
            throw std::invalid_argument("initial_state: compression amplitude must be < 1");
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                s.F(i, j)(0, 0) = 1.0 + sc.amplitude * std::cos(2.0 * M_PI * g.x(i) / g.Lx);
    } else {
        throw std::invalid_argument(
            "initial_state: unknown scenario id '" + sc.id +
            "'; valid: quiescent-hotspot, shear-decay, compression-pulse");
    }

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double th0 = theta0(i, j);
            const double th_eps = th0 / (1.0 + cfg.epsilon * th0);
            s.rho(i, j) = sc.rho_R / det(s.F(i, j));
            s.e(i, j) = internal_energy(m, s.F(i, j), th_eps);
        }
    return s;
}

inline SimDeriv rhs(const SimState& s, const SimConfig& cfg, const FreeEnergyModel<2>& m,
                    SolverWorkspace& ws) {
    const Grid& g = s.rho.grid;
    recover_theta(s, m, ws);

    const MatrixField G = grad_vec(s.v);
    const Tensor3Field H2 = second_grad(s.v);
    const ScalarField divv = div(s.v);
    const ScalarField lap_theta = div(grad(ws.theta));

    MatrixField T(g), symG(g);
    Tensor3Field Hs(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            T(i, j) = cauchy_stress(m, s.F(i, j), ws.theta(i, j));
            symG(i, j) = sym(G(i, j));
            Ten3<2> h = H2(i, j);
            h *= cfg.nu2 * std::pow(frobenius(h), cfg.p - 2.0);
            Hs(i, j) = h;
        }

    VectorField mom(g);
    for (std::size_t k = 0; k < mom.data.size(); ++k) {
        mom.data[k] = s.v.data[k];
        mom.data[k] *= s.rho.data[k];
    }
    const ScalarField div_mom = div(mom);

    SimDeriv d;
    d.drho = div_mom;
    d.drho *= -1.0;

    d.dF = MatrixField(g);
    {
        const MatrixField advF = advect(s.F, s.v);
        for (std::size_t k = 0; k < d.dF.data.size(); ++k)
            d.dF.data[k] = matmul(G.data[k], s.F.data[k]) - advF.data[k];
    }

    VectorField force = div_mat(T);
    add_scaled(force, cfg.nu1, div_mat(symG));
    add_scaled(force, -1.0, div_div(Hs));

    // Skew-symmetric (energy- and momentum-exact) advection:
    //   adv_a = [rho v.grad(v_a) + div(rho v v_a) - v_a div(rho v)] / (2 rho).
    const VectorField adv_vv = advect(s.v, s.v);
    VectorField skew(g);
    for (int a = 0; a < 2; ++a) {
        VectorField Pa(g);
        for (std::size_t k = 0; k < Pa.data.size(); ++k) {
            Pa.data[k] = mom.data[k];
            Pa.data[k] *= s.v.data[k][a];
        }
        const ScalarField divPa = div(Pa);
        for (std::size_t k = 0; k < skew.data.size(); ++k)
            skew.data[k][a] = 0.5 * adv_vv.data[k][a] +
                              0.5 * (divPa.data[k] - s.v.data[k][a] * div_mom.data[k]) /
                                  s.rho.data[k];
    }

    d.dv = VectorField(g);
    for (std::size_t k = 0; k < d.dv.data.size(); ++k) {
        const double rho = s.rho.data[k];
        for (int a = 0; a < 2; ++a) {
            const double body = rho * cfg.gravity[a] - s.v.data[k][a] / cfg.k_damp;
            d.dv.data[k][a] = (force.data[k][a] + body) / rho - skew.data[k][a];
        }
    }

    const ScalarField adv_e = advect(s.e, s.v);
    const double s_eps = cfg.heat_source / (1.0 + cfg.epsilon * cfg.heat_source);
    d.de = ScalarField(g);
    for (std::size_t k = 0; k < d.de.data.size(); ++k) {
        const double x = frobenius2(symG.data[k]);
        const double y = std::pow(frobenius(H2.data[k]), cfg.p);
        const double xi = regularized_dissipation(cfg.nu1, cfg.nu2, cfg.epsilon, x, y);
        d.de.data[k] = -adv_e.data[k] - divv.data[k] * s.e.data[k] +
                       cfg.kappa0 * lap_theta.data[k] + xi +
                       ddot(T.data[k], G.data[k]) + s_eps;
    }
    return d;
}

namespace detail {

// Tangent-stiffness probe at the stress-free reference: a centered bulk
// response -J dP/dJ and a simple-shear response T_xy / gamma give the scale
// of the fastest elastic wave for the advective dt bound.
inline double wave_speed_scale(const FreeEnergyModel<2>& m, double rho_min) {
    const double theta = m.theta_ref();
    auto pressure = [&](double J) {
        Mat<2> F = Mat<2>::identity();
        const double stretch = std::sqrt(J);
        F(0, 0) = F(1, 1) = stretch;
        return -0.5 * trace(cauchy_stress(m, F, theta));
    };
    const double h = 0.01;
    const double K_est = -(pressure(1.0 + h) - pressure(1.0 - h)) / (2.0 * h);
    Mat<2> Fs = Mat<2>::identity();
    Fs(0, 1) = h;
    const double G_est = cauchy_stress(m, Fs, theta)(0, 1) / h;
    const double stiff = std::max(K_est, 0.0) + 4.0 * std::max(G_est, 0.0);
    return std::sqrt(stiff / rho_min);
}

}  // namespace detail

// Minimum over the four stability bounds (acoustic+advective, viscous,
// hyperviscous, thermal), scaled by the policy factors and capped by the
// dump cadence. Requires ws.theta fresh for the current state.
inline double stable_dt(const SimState& s, const SimConfig& cfg, const FreeEnergyModel<2>& m,
                        SolverWorkspace& ws) {
    const Grid& g = s.rho.grid;
    recover_theta(s, m, ws);
    const double h = std::min(g.dx, g.dy);

    double rho_min = std::numeric_limits<double>::infinity();
    double v_max = 0.0;
    for (std::size_t k = 0; k < s.rho.data.size(); ++k) {
        rho_min = std::min(rho_min, s.rho.data[k]);
        v_max = std::max(v_max, std::hypot(s.v.data[k][0], s.v.data[k][1]));
    }

    double h2_max = 0.0;
    const Tensor3Field H2 = second_grad(s.v);
    for (const auto& t3 : H2.data) h2_max = std::max(h2_max, frobenius(t3));

    double c_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            c_min = std::min(c_min, heat_capacity(m, s.F(i, j), ws.theta(i, j)));

    const double c_wave = detail::wave_speed_scale(m, rho_min);
    const double dt_a = cfg.dt.cfl_advect * h / (v_max + c_wave + 1e-300);
    const double dt_v = cfg.dt.cfl_visc * rho_min * h * h / cfg.nu1;
    const double dt_h = cfg.dt.cfl_hyper * rho_min * h * h * h * h /
                        (cfg.nu2 * std::pow(std::max(h2_max, 1e-8), cfg.p - 2.0));
    const double dt_t =
        cfg.dt.cfl_thermal * std::max(c_min, cfg.c_floor) * h * h / cfg.kappa0;

    const double dt = cfg.dt.dt_scale * std::min(std::min(dt_a, dt_v), std::min(dt_h, dt_t));
    return std::min(dt, cfg.dump_every);
}

namespace detail {

inline void apply_deriv(SimState& out, const SimState& base, double scale, const SimDeriv& k) {
    out.t = base.t + scale;
    out.rho = base.rho;
    out.v = base.v;
    out.F = base.F;
    out.e = base.e;
    add_scaled(out.rho, scale, k.drho);
    add_scaled(out.v, scale, k.dv);
    add_scaled(out.F, scale, k.dF);
    add_scaled(out.e, scale, k.de);
}

inline void accumulate(SimDeriv& sum, double w, const SimDeriv& k) {
    add_scaled(sum.drho, w, k.drho);
    add_scaled(sum.dv, w, k.dv);
    add_scaled(sum.dF, w, k.dF);
    add_scaled(sum.de, w, k.de);
}

}  // namespace detail

// One classical RK4 step of size dt (caller supplies dt, typically from
// stable_dt, possibly capped to land on dump times). The final state is
// re-validated; stage evaluations validate themselves inside rhs.
inline void step(SimState& s, double dt, const SimConfig& cfg, const FreeEnergyModel<2>& m,
                 SolverWorkspace& ws) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    const SimDeriv k1 = rhs(s, cfg, m, ws);
    SimState stage;
    detail::apply_deriv(stage, s, 0.5 * dt, k1);
    const SimDeriv k2 = rhs(stage, cfg, m, ws);
    detail::apply_deriv(stage, s, 0.5 * dt, k2);
    const SimDeriv k3 = rhs(stage, cfg, m, ws);
    detail::apply_deriv(stage, s, dt, k3);
    const SimDeriv k4 = rhs(stage, cfg, m, ws);

    SimDeriv sum = k1;
    detail::accumulate(sum, 2.0, k2);
    detail::accumulate(sum, 2.0, k3);
    detail::accumulate(sum, 1.0, k4);
    add_scaled(s.rho, dt / 6.0, sum.drho);
    add_scaled(s.v, dt / 6.0, sum.dv);
    add_scaled(s.F, dt / 6.0, sum.dF);
    add_scaled(s.e, dt / 6.0, sum.de);
    s.t += dt;
    recover_theta(s, m, ws);
}

}  // namespace tvem
