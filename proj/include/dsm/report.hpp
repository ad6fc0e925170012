#pragma once

// Machine-readable reports: JSON (de)serialization for certificates, rate
// specifications and run reports, plus the trajectory CSV writer.

#include "dsm/audit.hpp"
#include "dsm/core.hpp"
#include "dsm/integrate.hpp"

#include <json.hpp>

#include <iosfwd>

namespace dsm::report {

using json = nlohmann::json;

/// Shortest decimal representation that round-trips the double exactly.
[[nodiscard]] std::string fmt_double(double x);

// Non-finite doubles are encoded as strings so reports survive a JSON
// round-trip even when a certificate records an infinite bound.
[[nodiscard]] json json_number(double x);
[[nodiscard]] double number_from_json(const json& j);

[[nodiscard]] json to_json(const NamedRate& rate);
[[nodiscard]] NamedRate named_rate_from_json(const json& j);

/// Serializable rate specification (closed-form registry shapes only).
struct RatesSpec {
    NamedRate g1;
    NamedRate g2;
    double a = 2.0;
    double b = 1.0;

    [[nodiscard]] RateFunctions build() const { return make_rates(g1, g2, a, b); }
};
[[nodiscard]] json to_json(const RatesSpec& spec);
[[nodiscard]] RatesSpec rates_spec_from_json(const json& j);

[[nodiscard]] json to_json(const Certificate::Check& check);
[[nodiscard]] Certificate::Check check_from_json(const json& j);
[[nodiscard]] json to_json(const Certificate& cert);
[[nodiscard]] Certificate certificate_from_json(const json& j);

[[nodiscard]] json to_json(const integrate::IntegrationConfig& config);
[[nodiscard]] integrate::IntegrationConfig integration_config_from_json(const json& j);

struct TrajectorySummary {
    std::vector<double> final_state;
    double final_residual = 0.0;
    double final_time = 0.0;
    std::size_t samples = 0;
    std::string exit_reason;
};
[[nodiscard]] TrajectorySummary summarize(const Trajectory& traj);
[[nodiscard]] json to_json(const TrajectorySummary& summary);
[[nodiscard]] TrajectorySummary trajectory_summary_from_json(const json& j);

struct EnvelopeSummary {
    std::size_t audited_points = 0;
    std::size_t violations = 0;
    double max_relative_overshoot = 0.0;
    double first_violation_time = 0.0;  // meaningful only when violations > 0
};
[[nodiscard]] EnvelopeSummary summarize(const audit::EnvelopeReport& report);
[[nodiscard]] json to_json(const EnvelopeSummary& summary);
[[nodiscard]] EnvelopeSummary envelope_summary_from_json(const json& j);

/// Full record of one solver run; serializes and round-trips losslessly.
struct RunReport {
    std::string problem;
    std::string field;
    json config_echo;
    Certificate certificate;
    std::optional<TrajectorySummary> trajectory;
    std::optional<EnvelopeSummary> residual_envelope;
    std::optional<EnvelopeSummary> state_tail;
    int exit_code = 0;
    double timing_ms = 0.0;
};
[[nodiscard]] json to_json(const RunReport& report);
[[nodiscard]] RunReport run_report_from_json(const json& j);

/// Columns: t, u_1..u_n, residual, envelope, within_ball.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::vector<double>& envelope, const Ball& ball);

}  // namespace dsm::report
