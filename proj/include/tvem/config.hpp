#pragma once

// Run configuration: the full simulate/audit/tabulate parameter set, an INI
// reader that rejects unknown keys with line numbers, and a canonical
// serializer such that parse(serialize(c)) == c exactly (17-digit floats).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tvem/materials.hpp"
#include "tvem/tensor.hpp"

namespace tvem {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioSpec {
    std::string id;             // quiescent-hotspot | shear-decay | compression-pulse
    double theta0 = 1.0;        // base temperature, K
    double rho_R = 1.0;         // referential density, kg/m^3
    double amplitude = 0.1;     // bump height (K) / shear speed (m/s) / dilatation
    double bump_sigma = 0.08;   // hotspot core width, m

    bool operator==(const ScenarioSpec&) const = default;
};

struct DtPolicy {
    double cfl_advect = 0.4;
    double cfl_visc = 0.25;
    double cfl_hyper = 0.1;
    double cfl_thermal = 0.25;
    double dt_scale = 1.0;  // uniform extra factor, for time-refinement studies

    bool operator==(const DtPolicy&) const = default;
};

struct SimConfig {
    ModelParams<2> material = NeoHookeanPowerParams{};
    double nu1 = 0.05;    // shear viscosity, Pa*s
    double nu2 = 1e-6;    // hyperviscosity coefficient, Pa*s^(p-1)*m^(2p-2)
    double p = 4.0;       // hyperviscous exponent, > 2
    double kappa0 = 0.01; // heat conductivity, W/(m*K)
    double epsilon = 0.0; // dissipation/source regularization
    int nx = 64;
    int ny = 64;
    double Lx = 1.0;
    double Ly = 1.0;
    ScenarioSpec scenario;
    DtPolicy dt;
    double t_end = 1.0;
    double dump_every = 0.25;
    Vec<2> gravity{};
    double heat_source = 0.0;  // uniform volumetric source, W/m^3
    double k_damp = std::numeric_limits<double>::infinity();  // momentum damping time, s
    double c_floor = 1e-6;  // heat-capacity floor in the thermal dt bound

    bool operator==(const SimConfig&) const = default;

    void validate() const {
        detail::require(nu1 > 0.0, "config: nu1 must be > 0");
        detail::require(nu2 > 0.0, "config: nu2 must be > 0");
        detail::require(p > 2.0, "config: p must exceed the spatial dimension 2");
        detail::require(epsilon >= 0.0, "config: epsilon must be >= 0");
        detail::require(kappa0 > 0.0, "config: kappa0 must be > 0");
        detail::require(heat_source >= 0.0, "config: heat_source must be >= 0");
        detail::require(k_damp > 0.0, "config: k_damp must be > 0 (inf disables)");
        detail::require(t_end >= 0.0, "config: t_end must be >= 0");
        detail::require(dump_every > 0.0, "config: dump_every must be > 0");
        detail::require(scenario.id == "quiescent-hotspot" || scenario.id == "shear-decay" ||
                            scenario.id == "compression-pulse",
                        "config: scenario id must be one of quiescent-hotspot, shear-decay, "
                        "compression-pulse");
        detail::require(scenario.rho_R > 0.0, "config: rho_R must be > 0");
        detail::require(scenario.theta0 >= 0.0, "config: theta0 must be >= 0");
        detail::require(scenario.bump_sigma > 0.0, "config: bump_sigma must be > 0");
        detail::require(dt.cfl_advect > 0.0 && dt.cfl_visc > 0.0 && dt.cfl_hyper > 0.0 &&
                            dt.cfl_thermal > 0.0 && dt.dt_scale > 0.0,
                        "config: all dt safety factors must be > 0");
        detail::require(c_floor > 0.0, "config: c_floor must be > 0");
        Grid_check();
        std::visit([](const auto& p_) { p_.validate(); }, material);
    }

   private:
    void Grid_check() const {
        detail::require(nx >= 4 && ny >= 4, "config: nx and ny must be >= 4");
        detail::require(Lx > 0.0 && Ly > 0.0, "config: Lx and Ly must be > 0");
    }
};

inline const std::vector<std::string>& model_ids() {
    static const std::vector<std::string> ids = {
        "neo_hookean_power", "neo_hookean_log",  "thermal_expansion",
        "bounded_heat_capacity", "multi_well_sma", "nonphysical_log"};
    return ids;
}

inline std::string model_id(const ModelParams<2>& m) {
    return std::visit(
        [](const auto& p_) -> std::string {
            using T = std::decay_t<decltype(p_)>;
            if constexpr (std::is_same_v<T, NeoHookeanPowerParams>) return "neo_hookean_power";
            else if constexpr (std::is_same_v<T, NeoHookeanLogParams>) return "neo_hookean_log";
            else if constexpr (std::is_same_v<T, ThermalExpansionParams>) return "thermal_expansion";
            else if constexpr (std::is_same_v<T, BoundedHeatCapacityParams>) return "bounded_heat_capacity";
            else if constexpr (std::is_same_v<T, MultiWellSmaParams<2>>) return "multi_well_sma";
            else return "nonphysical_log";
        },
        m);
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ConfigLine {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

[[noreturn]] inline void config_fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const ConfigLine& l) {
    char* end = nullptr;
    const double v = std::strtod(l.value.c_str(), &end);
    if (end == l.value.c_str() || *end != '\0')
        config_fail(l.line, "key '" + l.key + "' expects a number, got '" + l.value + "'");
    return v;
}

inline int parse_int(const ConfigLine& l) {
    char* end = nullptr;
    const long v = std::strtol(l.value.c_str(), &end, 10);
    if (end == l.value.c_str() || *end != '\0')
        config_fail(l.line, "key '" + l.key + "' expects an integer, got '" + l.value + "'");
    return static_cast<int>(v);
}

inline std::vector<double> parse_doubles(const ConfigLine& l, std::size_t n) {
    std::vector<double> out;
    std::stringstream ss(l.value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            config_fail(l.line, "key '" + l.key + "' expects comma-separated numbers");
        out.push_back(v);
    }
    if (out.size() != n)
        config_fail(l.line, "key '" + l.key + "' expects " + std::to_string(n) + " numbers, got " +
                               std::to_string(out.size()));
    return out;
}

inline std::vector<ConfigLine> tokenize_ini(std::istream& is) {
    static const std::vector<std::string> sections = {"material", "viscosity", "thermal",
                                                      "domain",   "scenario",  "time",
                                                      "forcing"};
    std::vector<ConfigLine> out;
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') config_fail(line, "unterminated section header '" + s + "'");
            section = s.substr(1, s.size() - 2);
            bool known = false;
            for (const auto& k : sections) known = known || k == section;
            if (!known) config_fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) config_fail(line, "expected 'key = value', got '" + s + "'");
        if (section.empty()) config_fail(line, "key outside any [section]");
        ConfigLine cl;
        cl.section = section;
        cl.key = trim(s.substr(0, eq));
        cl.value = trim(s.substr(eq + 1));
        cl.line = line;
        if (cl.key.empty()) config_fail(line, "empty key");
        out.push_back(cl);
    }
    return out;
}

// Material keys other than the well-indexed SMA family.
inline bool material_key_known(const std::string& model, const std::string& key) {
    auto in = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (key == k) return true;
        return false;
    };
    if (key == "model") return true;
    if (model == "neo_hookean_power") return in({"K_e", "G_e", "c_v", "theta_ref", "alpha"});
    if (model == "neo_hookean_log")
        return in({"K_e", "G_e", "K_0", "c_v", "theta_ref", "alpha"});
    if (model == "thermal_expansion")
        return in({"K_e", "G_e", "c_v", "theta_ref", "alpha", "beta", "theta_r"});
    if (model == "bounded_heat_capacity") return in({"K_e", "G_e", "c_v", "theta_r"});
    if (model == "nonphysical_log") return in({"K_e", "G_e", "c_v", "theta_ref"});
    if (model == "multi_well_sma") return in({"varkappa", "theta_ref", "alpha", "wells"});
    return false;
}

// well<i>_K_e / well<i>_G_e / well<i>_c_v / well<i>_F
inline bool parse_well_key(const std::string& key, int* index, std::string* suffix) {
    if (key.rfind("well", 0) != 0) return false;
    std::size_t i = 4;
    std::size_t digits = 0;
    int idx = 0;
    while (i < key.size() && key[i] >= '0' && key[i] <= '9') {
        idx = idx * 10 + (key[i] - '0');
        ++i;
        ++digits;
    }
    if (digits == 0 || i >= key.size() || key[i] != '_') return false;
    *index = idx;
    *suffix = key.substr(i + 1);
    return *suffix == "K_e" || *suffix == "G_e" || *suffix == "c_v" || *suffix == "F";
}

inline ModelParams<2> parse_material(const std::vector<ConfigLine>& lines) {
    std::string model;
    int model_line = 0;
    for (const auto& l : lines)
        if (l.section == "material" && l.key == "model") {
            model = l.value;
            model_line = l.line;
        }
    if (model.empty()) throw ConfigError("config: [material] must set 'model'");
    bool known = false;
    for (const auto& id : model_ids()) known = known || id == model;
    if (!known) {
        std::string valid;
        for (const auto& id : model_ids()) valid += (valid.empty() ? "" : ", ") + id;
        config_fail(model_line, "unknown model '" + model + "'; valid ids: " + valid);
    }

    NeoHookeanPowerParams nhp;
    NeoHookeanLogParams nhl;
    ThermalExpansionParams te;
    BoundedHeatCapacityParams bhc;
    MultiWellSmaParams<2> sma;
    NonphysicalLogParams npl;
    int wells = -1;
    std::map<int, SmaWell<2>> well_map;

    for (const auto& l : lines) {
        if (l.section != "material" || l.key == "model") continue;
        int wi = 0;
        std::string suffix;
        if (model == "multi_well_sma" && parse_well_key(l.key, &wi, &suffix)) {
            auto& w = well_map[wi];
            if (suffix == "K_e") w.K = parse_double(l);
            else if (suffix == "G_e") w.G = parse_double(l);
            else if (suffix == "c_v") w.c = parse_double(l);
            else {
                const auto v = parse_doubles(l, 4);
                for (int k = 0; k < 4; ++k) w.F_well.a[k] = v[k];
            }
            continue;
        }
        if (!material_key_known(model, l.key))
            config_fail(l.line, "unknown key '" + l.key + "' in [material] for model " + model);
        const double v = (l.key == "wells") ? 0.0 : parse_double(l);
        if (l.key == "wells") wells = parse_int(l);
        else if (l.key == "K_e") { nhp.K_e = nhl.K_e = te.K_e = bhc.K_e = npl.K_e = v; }
        else if (l.key == "G_e") { nhp.G_e = nhl.G_e = te.G_e = bhc.G_e = npl.G_e = v; }
        else if (l.key == "c_v") { nhp.c_v = nhl.c_v = te.c_v = bhc.c_v = npl.c_v = v; }
        else if (l.key == "theta_ref") {
            nhp.theta_ref = nhl.theta_ref = te.theta_ref = sma.theta_ref = npl.theta_ref = v;
        }
        else if (l.key == "alpha") { nhp.alpha = nhl.alpha = te.alpha = sma.alpha = v; }
        else if (l.key == "K_0") nhl.K_0 = v;
        else if (l.key == "beta") te.beta = v;
        else if (l.key == "theta_r") { te.theta_r = bhc.theta_r = v; }
        else if (l.key == "varkappa") sma.varkappa = v;
    }

    if (model == "multi_well_sma") {
        if (wells < 1) throw ConfigError("config: multi_well_sma requires 'wells' >= 1");
        for (const auto& [i, w] : well_map) {
            (void)w;
            if (i < 0 || i >= wells)
                throw ConfigError("config: well index " + std::to_string(i) +
                                  " outside 0..wells-1");
        }
        sma.wells.resize(static_cast<std::size_t>(wells));
        for (const auto& [i, w] : well_map) sma.wells[static_cast<std::size_t>(i)] = w;
    }

    if (model == "neo_hookean_power") return nhp;
    if (model == "neo_hookean_log") return nhl;
    if (model == "thermal_expansion") return te;
    if (model == "bounded_heat_capacity") return bhc;
    if (model == "multi_well_sma") return sma;
    return npl;
}

}  // namespace detail

inline SimConfig parse_config(std::istream& is) {
    const auto lines = detail::tokenize_ini(is);
    SimConfig c;
    c.material = detail::parse_material(lines);

    bool scenario_set = false;
    for (const auto& l : lines) {
        if (l.section == "material") continue;
        auto num = [&] { return detail::parse_double(l); };
        if (l.section == "viscosity") {
            if (l.key == "nu1") c.nu1 = num();
            else if (l.key == "nu2") c.nu2 = num();
            else if (l.key == "p") c.p = num();
            else detail::config_fail(l.line, "unknown key '" + l.key + "' in [viscosity]");
        } else if (l.section == "thermal") {
            if (l.key == "kappa0") c.kappa0 = num();
            else if (l.key == "epsilon") c.epsilon = num();
            else detail::config_fail(l.line, "unknown key '" + l.key + "' in [thermal]");
        } else if (l.section == "domain") {
            if (l.key == "nx") c.nx = detail::parse_int(l);
            else if (l.key == "ny") c.ny = detail::parse_int(l);
            else if (l.key == "Lx") c.Lx = num();
            else if (l.key == "Ly") c.Ly = num();
            else detail::config_fail(l.line, "unknown key '" + l.key + "' in [domain]");
        } else if (l.section == "scenario") {
            if (l.key == "id") { c.scenario.id = l.value; scenario_set = true; }
            else if (l.key == "theta0") c.scenario.theta0 = num();
            else if (l.key == "rho_R") c.scenario.rho_R = num();
            else if (l.key == "amplitude") c.scenario.amplitude = num();
            else if (l.key == "bump_sigma") c.scenario.bump_sigma = num();
            else detail::config_fail(l.line, "unknown key '" + l.key + "' in [scenario]");
        } else if (l.section == "time") {
            if (l.key == "t_end") c.t_end = num();
            else if (l.key == "dump_every") c.dump_every = num();
            else if (l.key == "cfl_advect") c.dt.cfl_advect = num();
            else if (l.key == "cfl_visc") c.dt.cfl_visc = num();
            else if (l.key == "cfl_hyper") c.dt.cfl_hyper = num();
            else if (l.key == "cfl_thermal") c.dt.cfl_thermal = num();
            else if (l.key == "dt_scale") c.dt.dt_scale = num();
            else if (l.key == "c_floor") c.c_floor = num();
            else detail::config_fail(l.line, "unknown key '" + l.key + "' in [time]");
        } else if (l.section == "forcing") {
            if (l.key == "gravity_x") c.gravity[0] = num();
            else if (l.key == "gravity_y") c.gravity[1] = num();
            else if (l.key == "heat_source") c.heat_source = num();
            else if (l.key == "k_damp") c.k_damp = num();
            else detail::config_fail(l.line, "unknown key '" + l.key + "' in [forcing]");
        }
    }
    if (!scenario_set) throw ConfigError("config: [scenario] must set 'id'");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline SimConfig parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    return parse_config(is);
}

inline std::string serialize_config(const SimConfig& c) {
    using detail::fmt17;
    std::ostringstream os;
    os << "[material]\n";
    os << "model = " << model_id(c.material) << "\n";
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NeoHookeanPowerParams>) {
                os << "K_e = " << fmt17(m.K_e) << "\nG_e = " << fmt17(m.G_e)
                   << "\nc_v = " << fmt17(m.c_v) << "\ntheta_ref = " << fmt17(m.theta_ref)
                   << "\nalpha = " << fmt17(m.alpha) << "\n";
            } else if constexpr (std::is_same_v<T, NeoHookeanLogParams>) {
                os << "K_e = " << fmt17(m.K_e) << "\nG_e = " << fmt17(m.G_e)
                   << "\nK_0 = " << fmt17(m.K_0) << "\nc_v = " << fmt17(m.c_v)
                   << "\ntheta_ref = " << fmt17(m.theta_ref) << "\nalpha = " << fmt17(m.alpha)
                   << "\n";
            } else if constexpr (std::is_same_v<T, ThermalExpansionParams>) {
                os << "K_e = " << fmt17(m.K_e) << "\nG_e = " << fmt17(m.G_e)
                   << "\nc_v = " << fmt17(m.c_v) << "\ntheta_ref = " << fmt17(m.theta_ref)
                   << "\nalpha = " << fmt17(m.alpha) << "\nbeta = " << fmt17(m.beta)
                   << "\ntheta_r = " << fmt17(m.theta_r) << "\n";
            } else if constexpr (std::is_same_v<T, BoundedHeatCapacityParams>) {
                os << "K_e = " << fmt17(m.K_e) << "\nG_e = " << fmt17(m.G_e)
                   << "\nc_v = " << fmt17(m.c_v) << "\ntheta_r = " << fmt17(m.theta_r) << "\n";
            } else if constexpr (std::is_same_v<T, MultiWellSmaParams<2>>) {
                os << "varkappa = " << fmt17(m.varkappa)
                   << "\ntheta_ref = " << fmt17(m.theta_ref) << "\nalpha = " << fmt17(m.alpha)
                   << "\nwells = " << m.wells.size() << "\n";
                for (std::size_t i = 0; i < m.wells.size(); ++i) {
                    const auto& w = m.wells[i];
                    os << "well" << i << "_K_e = " << fmt17(w.K) << "\n";
                    os << "well" << i << "_G_e = " << fmt17(w.G) << "\n";
                    os << "well" << i << "_c_v = " << fmt17(w.c) << "\n";
                    os << "well" << i << "_F = " << fmt17(w.F_well.a[0]) << ", "
                       << fmt17(w.F_well.a[1]) << ", " << fmt17(w.F_well.a[2]) << ", "
                       << fmt17(w.F_well.a[3]) << "\n";
                }
            } else {
                os << "K_e = " << fmt17(m.K_e) << "\nG_e = " << fmt17(m.G_e)
                   << "\nc_v = " << fmt17(m.c_v) << "\ntheta_ref = " << fmt17(m.theta_ref)
                   << "\n";
            }
        },
        c.material);
    os << "\n[viscosity]\n";
    os << "nu1 = " << fmt17(c.nu1) << "\nnu2 = " << fmt17(c.nu2) << "\np = " << fmt17(c.p)
       << "\n";
    os << "\n[thermal]\n";
    os << "kappa0 = " << fmt17(c.kappa0) << "\nepsilon = " << fmt17(c.epsilon) << "\n";
    os << "\n[domain]\n";
    os << "nx = " << c.nx << "\nny = " << c.ny << "\nLx = " << fmt17(c.Lx)
       << "\nLy = " << fmt17(c.Ly) << "\n";
    os << "\n[scenario]\n";
    os << "id = " << c.scenario.id << "\ntheta0 = " << fmt17(c.scenario.theta0)
       << "\nrho_R = " << fmt17(c.scenario.rho_R)
       << "\namplitude = " << fmt17(c.scenario.amplitude)
       << "\nbump_sigma = " << fmt17(c.scenario.bump_sigma) << "\n";
    os << "\n[time]\n";
    os << "t_end = " << fmt17(c.t_end) << "\ndump_every = " << fmt17(c.dump_every)
       << "\ncfl_advect = " << fmt17(c.dt.cfl_advect) << "\ncfl_visc = " << fmt17(c.dt.cfl_visc)
       << "\ncfl_hyper = " << fmt17(c.dt.cfl_hyper)
       << "\ncfl_thermal = " << fmt17(c.dt.cfl_thermal)
       << "\ndt_scale = " << fmt17(c.dt.dt_scale) << "\nc_floor = " << fmt17(c.c_floor)
       << "\n";
    os << "\n[forcing]\n";
    os << "gravity_x = " << fmt17(c.gravity[0]) << "\ngravity_y = " << fmt17(c.gravity[1])
       << "\nheat_source = " << fmt17(c.heat_source) << "\nk_damp = " << fmt17(c.k_damp)
       << "\n";
    return os.str();
}

}  // namespace tvem
