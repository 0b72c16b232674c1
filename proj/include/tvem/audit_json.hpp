#pragma once

// JSON rendering of audit reports. Kept out of audit.hpp so numeric users do
// not pay for the JSON header.

#include <string>

#include <json.hpp>

#include "tvem/audit.hpp"

namespace tvem {

namespace detail {

inline nlohmann::json finite_or_string(double v) {
    // JSON has no inf/nan literals; encode them as strings rather than null.
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "infinity" : "-infinity";
}

}  // namespace detail

template <int d>
nlohmann::json to_json(const AuditReport<d>& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) {
        nlohmann::json F = nlohmann::json::array();
        for (int i = 0; i < d; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int j = 0; j < d; ++j) row.push_back(c.witness_F(i, j));
            F.push_back(row);
        }
        checks.push_back({{"check_id", c.check_id},
                          {"pass", c.pass},
                          {"informational", c.informational},
                          {"measured_constant", detail::finite_or_string(c.measured_constant)},
                          {"witness", {{"F", F}, {"theta", c.witness_theta}}},
                          {"samples_used", c.samples_used},
                          {"detail", c.detail}});
    }
    return {{"model", report.model_name},
            {"n_samples", report.domain.n_samples},
            {"seed", report.domain.seed},
            {"all_pass", report.all_pass()},
            {"checks", checks}};
}

template <int d>
std::string report_to_json_string(const AuditReport<d>& report) {
    return to_json(report).dump(2);
}

}  // namespace tvem
