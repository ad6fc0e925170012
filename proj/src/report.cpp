#include "dsm/report.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace dsm::report {

std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0.0 ? "inf" : "-inf";
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, result.ptr);
}

json json_number(double x) {
    if (std::isfinite(x)) return x;
    return fmt_double(x);
}

double number_from_json(const json& j) {
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

namespace {

const char* to_string(NamedRate::Kind kind) {
    switch (kind) {
        case NamedRate::Kind::Constant: return "constant";
        case NamedRate::Kind::PowerLaw: return "power";
        case NamedRate::Kind::Exponential: return "exponential";
    }
    return "constant";
}

NamedRate::Kind rate_kind_from_string(const std::string& name) {
    if (name == "constant") return NamedRate::Kind::Constant;
    if (name == "power") return NamedRate::Kind::PowerLaw;
    if (name == "exponential") return NamedRate::Kind::Exponential;
    throw Error("unknown rate kind '" + name + "' (expected constant, power or exponential)");
}

}  // namespace

json to_json(const NamedRate& rate) {
    json j{{"kind", to_string(rate.kind)}, {"c", rate.c}};
    if (rate.kind != NamedRate::Kind::Constant) j["p"] = rate.p;
    return j;
}

NamedRate named_rate_from_json(const json& j) {
    NamedRate rate;
    rate.kind = rate_kind_from_string(j.at("kind").get<std::string>());
    rate.c = j.at("c").get<double>();
    rate.p = j.value("p", 0.0);
    return rate;
}

json to_json(const RatesSpec& spec) {
    return json{{"g1", to_json(spec.g1)}, {"g2", to_json(spec.g2)}, {"a", spec.a}, {"b", spec.b}};
}

RatesSpec rates_spec_from_json(const json& j) {
    RatesSpec spec;
    spec.g1 = named_rate_from_json(j.at("g1"));
    spec.g2 = named_rate_from_json(j.at("g2"));
    spec.a = j.value("a", 2.0);
    spec.b = j.value("b", 1.0);
    return spec;
}

json to_json(const Certificate::Check& check) {
    return json{{"id", check.condition_id},
                {"satisfied", check.satisfied},
                {"lhs", json_number(check.lhs)},
                {"rhs", json_number(check.rhs)},
                {"margin", json_number(check.margin)}};
}

Certificate::Check check_from_json(const json& j) {
    Certificate::Check check;
    check.condition_id = j.at("id").get<std::string>();
    check.satisfied = j.at("satisfied").get<bool>();
    check.lhs = number_from_json(j.at("lhs"));
    check.rhs = number_from_json(j.at("rhs"));
    check.margin = number_from_json(j.at("margin"));
    return check;
}

json to_json(const Certificate& cert) {
    json checks = json::array();
    for (const auto& check : cert.checks) checks.push_back(to_json(check));
    json constants = json::object();
    for (const auto& [key, value] : cert.constants) constants[key] = json_number(value);
    return json{{"checks", checks},
                {"constants", constants},
                {"sample_count", cert.sample_count},
                {"seed", cert.seed}};
}

Certificate certificate_from_json(const json& j) {
    Certificate cert;
    for (const auto& check : j.at("checks")) cert.checks.push_back(check_from_json(check));
    for (const auto& [key, value] : j.at("constants").items()) {
        cert.constants[key] = number_from_json(value);
    }
    cert.sample_count = j.at("sample_count").get<int>();
    cert.seed = j.at("seed").get<std::uint64_t>();
    return cert;
}

json to_json(const integrate::IntegrationConfig& config) {
    return json{{"rel_tol", config.rel_tol},
                {"abs_tol", config.abs_tol},
                {"max_time", config.max_time},
                {"residual_stop", config.residual_stop},
                {"max_steps", config.max_steps},
                {"record_every", config.record_every}};
}

integrate::IntegrationConfig integration_config_from_json(const json& j) {
    integrate::IntegrationConfig config;
    config.rel_tol = j.value("rel_tol", config.rel_tol);
    config.abs_tol = j.value("abs_tol", config.abs_tol);
    config.max_time = j.value("max_time", config.max_time);
    config.residual_stop = j.value("residual_stop", config.residual_stop);
    config.max_steps = j.value("max_steps", config.max_steps);
    config.record_every = j.value("record_every", config.record_every);
    return config;
}

TrajectorySummary summarize(const Trajectory& traj) {
    TrajectorySummary summary;
    summary.final_state.assign(traj.final_state().begin(), traj.final_state().end());
    summary.final_residual = traj.final_residual();
    summary.final_time = traj.final_time();
    summary.samples = traj.size();
    summary.exit_reason = to_string(traj.exit_reason);
    return summary;
}

json to_json(const TrajectorySummary& summary) {
    return json{{"final_state", summary.final_state},
                {"final_residual", json_number(summary.final_residual)},
                {"final_time", summary.final_time},
                {"samples", summary.samples},
                {"exit_reason", summary.exit_reason}};
}

TrajectorySummary trajectory_summary_from_json(const json& j) {
    TrajectorySummary summary;
    summary.final_state = j.at("final_state").get<std::vector<double>>();
    summary.final_residual = number_from_json(j.at("final_residual"));
    summary.final_time = j.at("final_time").get<double>();
    summary.samples = j.at("samples").get<std::size_t>();
    summary.exit_reason = j.at("exit_reason").get<std::string>();
    return summary;
}

EnvelopeSummary summarize(const audit::EnvelopeReport& report) {
    EnvelopeSummary summary;
    summary.audited_points = report.times.size();
    summary.violations = report.violations.size();
    summary.max_relative_overshoot = report.max_relative_overshoot;
    if (!report.violations.empty()) summary.first_violation_time = report.violations.front().t;
    return summary;
}

json to_json(const EnvelopeSummary& summary) {
    return json{{"audited_points", summary.audited_points},
                {"violations", summary.violations},
                {"max_relative_overshoot", json_number(summary.max_relative_overshoot)},
                {"first_violation_time", summary.first_violation_time}};
}

EnvelopeSummary envelope_summary_from_json(const json& j) {
    EnvelopeSummary summary;
    summary.audited_points = j.at("audited_points").get<std::size_t>();
    summary.violations = j.at("violations").get<std::size_t>();
    summary.max_relative_overshoot = number_from_json(j.at("max_relative_overshoot"));
    summary.first_violation_time = j.at("first_violation_time").get<double>();
    return summary;
}

json to_json(const RunReport& report) {
    json j{{"problem", report.problem},
           {"field", report.field},
           {"config", report.config_echo},
           {"certificate", to_json(report.certificate)},
           {"exit_code", report.exit_code},
           {"timing_ms", report.timing_ms}};
    if (report.trajectory) j["trajectory"] = to_json(*report.trajectory);
    if (report.residual_envelope) j["residual_envelope"] = to_json(*report.residual_envelope);
    if (report.state_tail) j["state_tail"] = to_json(*report.state_tail);
    return j;
}

RunReport run_report_from_json(const json& j) {
    RunReport report;
    report.problem = j.at("problem").get<std::string>();
    report.field = j.at("field").get<std::string>();
    report.config_echo = j.at("config");
    report.certificate = certificate_from_json(j.at("certificate"));
    report.exit_code = j.at("exit_code").get<int>();
    report.timing_ms = j.at("timing_ms").get<double>();
    if (j.contains("trajectory")) {
        report.trajectory = trajectory_summary_from_json(j.at("trajectory"));
    }
    if (j.contains("residual_envelope")) {
        report.residual_envelope = envelope_summary_from_json(j.at("residual_envelope"));
    }
    if (j.contains("state_tail")) {
        report.state_tail = envelope_summary_from_json(j.at("state_tail"));
    }
    return report;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const std::vector<double>& envelope, const Ball& ball) {
    const auto dim = traj.states.empty() ? 0 : traj.states.front().size();
    out << "t";
    for (Eigen::Index i = 0; i < dim; ++i) out << ",u_" << (i + 1);
    out << ",residual,envelope,within_ball\n";
    for (std::size_t row = 0; row < traj.size(); ++row) {
        out << fmt_double(traj.times[row]);
        for (Eigen::Index i = 0; i < dim; ++i) out << ',' << fmt_double(traj.states[row](i));
        out << ',' << fmt_double(traj.residuals[row]);
        out << ',' << (row < envelope.size() ? fmt_double(envelope[row]) : "nan");
        out << ',' << (ball.contains(traj.states[row]) ? '1' : '0');
        out << '\n';
    }
}

}  // namespace dsm::report
