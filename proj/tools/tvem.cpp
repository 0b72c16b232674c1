// Command-line front end: simulate (artifact tree under an output
// directory), audit (structural checks of a configured model), tabulate
// (constitutive curves over a temperature grid), and verify (the built-in
// acceptance suite).
//
// Exit codes: 0 success, 1 usage or configuration error, 2 audit or
// verification failure, 3 simulation blowup.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "tvem/acceptance.hpp"
#include "tvem/audit.hpp"
#include "tvem/audit_json.hpp"
#include "tvem/config.hpp"
#include "tvem/diagnostics.hpp"

namespace {

// "a:b:n" -> n evenly spaced temperatures from a to b inclusive.
std::vector<double> parse_theta_range(const std::string& range) {
    double a = 0.0, b = 0.0;
    long n = 0;
    int consumed = 0;
    if (std::sscanf(range.c_str(), "%lf:%lf:%ld%n", &a, &b, &n, &consumed) != 3 ||
        consumed != static_cast<int>(range.size()))
        throw tvem::ConfigError("--theta-range must be 'a:b:n', got '" + range + "'");
    if (n < 1) throw tvem::ConfigError("--theta-range needs n >= 1 points");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k)
        grid.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(k) /
                                            static_cast<double>(n - 1));
    return grid;
}

// The config always carries plane-strain (2-D) parameters; all families are
// dimension-independent except the multi-well set, whose wells embed
// block-diagonally with an out-of-plane stretch of 1.
tvem::ModelParams<3> params_to_3d(const tvem::ModelParams<2>& p) {
    using namespace tvem;
    return std::visit(
        [](const auto& q) -> ModelParams<3> {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, MultiWellSmaParams<2>>) {
                MultiWellSmaParams<3> out;
                out.varkappa = q.varkappa;
                out.theta_ref = q.theta_ref;
                out.alpha = q.alpha;
                out.wells.clear();
                for (const auto& w : q.wells) {
                    SmaWell<3> w3;
                    w3.K = w.K;
                    w3.G = w.G;
                    w3.c = w.c;
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j) w3.F_well(i, j) = w.F_well(i, j);
                    out.wells.push_back(w3);
                }
                return out;
            } else {
                return q;
            }
        },
        p);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const tvem::SimConfig cfg = tvem::load_config(config_path);
    const tvem::RunResult R = tvem::run(cfg);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    {
        std::ofstream os(dir / "config.ini");
        if (!os) throw std::runtime_error("cannot write " + (dir / "config.ini").string());
        os << tvem::serialize_config(cfg);
    }
    tvem::write_ledger_csv((dir / "ledger.csv").string(), R.ledger);
    tvem::write_residuals_csv((dir / "residuals.csv").string(),
                              R.ledger.size() >= 2
                                  ? tvem::balance_residuals(R.ledger, cfg)
                                  : std::vector<tvem::ResidualRow>{});
    for (std::size_t k = 0; k < R.dumps.size(); ++k) {
        const tvem::SimState& s = R.dumps[k];
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%04zu", k);
        tvem::write_snapshot((dir / ("rho_" + std::string(idx) + ".snap")).string(), "rho",
                             s.rho, s.t);
        tvem::write_snapshot((dir / ("v_" + std::string(idx) + ".snap")).string(), "v", s.v,
                             s.t);
        tvem::write_snapshot((dir / ("F_" + std::string(idx) + ".snap")).string(), "F", s.F,
                             s.t);
        tvem::write_snapshot((dir / ("e_" + std::string(idx) + ".snap")).string(), "e", s.e,
                             s.t);
    }

    if (R.blew_up) {
        std::fprintf(stderr, "simulation blowup: %s (partial artifacts in %s)\n",
                     R.blowup_what.c_str(), out_dir.c_str());
        return 3;
    }
    std::printf("simulate: %zu steps to t = %.17g, %zu dumps -> %s\n", R.ledger.size() - 1,
                R.final_state.t, R.dumps.size(), out_dir.c_str());
    return 0;
}

int cmd_audit(const std::string& config_path, std::uint64_t seed) {
    const tvem::SimConfig cfg = tvem::load_config(config_path);
    const auto model = tvem::make_model<2>(cfg.material);
    tvem::AuditDomain domain;
    domain.seed = seed;
    const auto report = tvem::audit(*model, domain);
    for (const auto& c : report.checks)
        std::printf("%s %s%s%s%s\n", c.pass ? "PASS" : "FAIL", c.check_id.c_str(),
                    c.informational ? " (informational)" : "", c.detail.empty() ? "" : ": ",
                    c.detail.c_str());
    std::printf("%s\n", tvem::report_to_json_string(report).c_str());
    return report.all_pass() ? 0 : 2;
}

int cmd_tabulate(const std::string& config_path, const std::vector<double>& Fv,
                 const std::string& range) {
    const tvem::SimConfig cfg = tvem::load_config(config_path);
    const std::vector<double> grid = parse_theta_range(range);

    std::vector<tvem::TabulateRow> rows;
    if (Fv.size() == 4) {
        tvem::Mat<2> F;
        F(0, 0) = Fv[0], F(0, 1) = Fv[1];
        F(1, 0) = Fv[2], F(1, 1) = Fv[3];
        rows = tvem::tabulate(*tvem::make_model<2>(cfg.material), F, grid);
    } else if (Fv.size() == 6 || Fv.size() == 9) {
        tvem::Mat<3> F;
        if (Fv.size() == 6) {
            // Voigt order: three normal entries, then shears 23, 13, 12.
            F(0, 0) = Fv[0], F(1, 1) = Fv[1], F(2, 2) = Fv[2];
            F(1, 2) = F(2, 1) = Fv[3];
            F(0, 2) = F(2, 0) = Fv[4];
            F(0, 1) = F(1, 0) = Fv[5];
        } else {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) F(i, j) = Fv[static_cast<std::size_t>(3 * i + j)];
        }
        rows = tvem::tabulate(*tvem::make_model<3>(params_to_3d(cfg.material)), F, grid);
    } else {
        throw tvem::ConfigError(
            "--F takes 4 numbers (2x2, row-major), 6 (symmetric 3x3 in Voigt order: 11 22 33 "
            "23 13 12), or 9 (3x3, row-major)");
    }

    std::printf("theta,psi,E,eta,c\n");
    for (const auto& r : rows)
        std::printf("%.17g,%.17g,%.17g,%.17g,%.17g\n", r.theta, r.psi, r.E, r.eta, r.c);
    return 0;
}

int cmd_verify(bool quick) {
    tvem::AcceptanceOptions opt;
    opt.quick = quick;
    const auto results = tvem::run_acceptance(opt, std::cout);
    for (const auto& r : results)
        if (!r.pass) return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eulerian thermo-visco-elastodynamic workbench"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", theta_range;
    std::vector<double> Fv;
    std::uint64_t seed = tvem::AuditDomain{}.seed;
    bool quick = false;

    auto* sim = app.add_subcommand("simulate", "integrate a configured run and write artifacts");
    sim->add_option("config", config_path, "INI configuration file")->required();
    sim->add_option("--out", out_dir, "output directory (default 'out')");

    auto* aud = app.add_subcommand("audit", "sample-based structural checks of the model");
    aud->add_option("config", config_path, "INI configuration file")->required();
    aud->add_option("--seed", seed, "sampling seed (default 2024)");

    auto* tab = app.add_subcommand("tabulate", "constitutive curves over a temperature grid");
    tab->add_option("config", config_path, "INI configuration file")->required();
    tab->add_option("--F", Fv, "deformation gradient entries (4, 6, or 9 numbers)")->required();
    tab->add_option("--theta-range", theta_range, "temperature grid 'a:b:n'")->required();

    auto* ver = app.add_subcommand("verify", "run the acceptance suite");
    ver->add_flag("--quick", quick, "reduced grids and sample counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir);
        if (aud->parsed()) return cmd_audit(config_path, seed);
        if (tab->parsed()) return cmd_tabulate(config_path, Fv, theta_range);
        return cmd_verify(quick);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
