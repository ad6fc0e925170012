#include "dsm/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace dsm::cli {

namespace fs = std::filesystem;
using report::json;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct ResolvedRun {
    std::string problem_name;
    ProblemSpec problem;
    const corpus::CorpusEntry* entry = nullptr;
    fields::Kind kind = fields::Kind::Custom;
    bool custom_field = false;
    Ball ball;
    std::optional<RateFunctions> rates;  // entry rates or config override
    integrate::IntegrationConfig config;
    int samples = 200;
    std::uint64_t seed = 1;
    double c1_scale = 1.0;
    bool force = false;
    std::string out_dir;
    json config_echo;
};

struct Certified {
    Certificate cert;
    std::optional<fields::DerivedRates> derived;
    Ball working_ball;
    std::optional<double> horizon_T;
};

ProblemSpec linear_problem_from_json(const json& j) {
    const auto rows = j.at("A").get<std::vector<std::vector<double>>>();
    const auto rhs = j.at("b").get<std::vector<double>>();
    const int n = static_cast<int>(rhs.size());
    if (n == 0 || static_cast<int>(rows.size()) != n) {
        throw UsageError("config linear problem: A must be square and match b");
    }
    Matrix A(n, n);
    Vector b(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) {
            throw UsageError("config linear problem: A must be square");
        }
        for (int k = 0; k < n; ++k) A(i, k) = rows[i][k];
        b(i) = rhs[i];
    }
    ProblemSpec p;
    p.name = j.value("name", std::string("config-linear"));
    p.dim = n;
    p.F = [A, b](const Vector& u) -> Vector { return A * u - b; };
    p.jacobian = [A](const Vector&) { return A; };
    Eigen::PartialPivLU<Matrix> lu(A);
    if (lu.rcond() > 1e-12) p.oracle_root = lu.solve(b);
    return p;
}

Vector vector_from(const std::vector<double>& values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
    return v;
}

ResolvedRun resolve(const RunOptions& options) {
    ResolvedRun run;
    run.samples = options.samples;
    run.seed = options.seed;
    run.c1_scale = options.c1_scale;
    run.force = options.force;
    run.out_dir = resolve_out_dir(options.out_dir);

    json config = json::object();
    if (!options.config_path.empty()) {
        std::ifstream in(options.config_path);
        if (!in) throw UsageError("cannot read config file '" + options.config_path + "'");
        try {
            in >> config;
        } catch (const json::exception& e) {
            throw UsageError("config parse error: " + std::string(e.what()));
        }
    }

    std::string problem_name = options.problem;
    if (problem_name.empty() && config.contains("problem") && config["problem"].is_string()) {
        problem_name = config["problem"].get<std::string>();
    }

    if (!problem_name.empty()) {
        const auto* entry = corpus::find(problem_name);
        if (!entry) {
            throw UsageError("unknown problem '" + problem_name + "' (see `dsm corpus list`)");
        }
        if (!entry->problem) {
            throw UsageError("corpus entry '" + problem_name +
                             "' has no ODE form; use `dsm demo linear` / `dsm demo monotone`");
        }
        run.entry = entry;
        run.problem = *entry->problem;
        run.problem_name = problem_name;
        run.ball = entry->recommended_ball;
        run.rates = entry->rates;
    } else if (config.contains("problem") && config["problem"].is_object() &&
               config["problem"].contains("linear")) {
        run.problem = linear_problem_from_json(config["problem"]["linear"]);
        run.problem_name = run.problem.name;
        run.ball = Ball{Vector::Zero(run.problem.dim), 1.0};
    } else {
        throw UsageError("no problem specified (use --problem or --config)");
    }

    std::string field_name = options.field;
    if (field_name.empty()) field_name = config.value("field", std::string());
    if (field_name.empty()) {
        if (run.entry && run.entry->custom_field) {
            run.custom_field = true;
        } else if (run.entry && !run.entry->recommended_fields.empty()) {
            run.kind = run.entry->recommended_fields.front();
        } else {
            run.kind = fields::Kind::Newton;
        }
    } else if (field_name == "custom") {
        if (!run.entry || !run.entry->custom_field) {
            throw UsageError("problem '" + run.problem_name + "' has no custom field");
        }
        run.custom_field = true;
    } else {
        const auto kind = fields::kind_from_string(field_name);
        if (!kind || *kind == fields::Kind::Custom) {
            throw UsageError("unknown field '" + field_name + "'");
        }
        run.kind = *kind;
    }

    if (config.contains("u0")) {
        run.ball.center = vector_from(config["u0"].get<std::vector<double>>());
    }
    if (options.u0) run.ball.center = vector_from(*options.u0);
    if (run.ball.center.size() != run.problem.dim) {
        throw UsageError("u0 dimension does not match the problem");
    }
    if (config.contains("radius")) run.ball.radius = config["radius"].get<double>();
    if (options.radius) run.ball.radius = *options.radius;
    if (!(run.ball.radius > 0.0)) throw UsageError("radius must be positive");

    if (config.contains("rates")) {
        run.rates = report::rates_spec_from_json(config["rates"]).build();
    }
    if (config.contains("integration")) {
        run.config = report::integration_config_from_json(config["integration"]);
    }
    if (config.contains("samples")) run.samples = config["samples"].get<int>();
    if (config.contains("seed")) run.seed = config["seed"].get<std::uint64_t>();
    if (options.max_time) run.config.max_time = *options.max_time;
    if (options.rel_tol) run.config.rel_tol = *options.rel_tol;
    run.config.record_every = std::min(run.config.record_every, run.config.max_time);

    run.config_echo = json{
        {"problem", run.problem_name},
        {"field", run.custom_field ? "custom" : fields::to_string(run.kind)},
        {"ball",
         json{{"center", std::vector<double>(run.ball.center.begin(), run.ball.center.end())},
              {"radius", run.ball.radius}}},
        {"integration", report::to_json(run.config)},
        {"samples", run.samples},
        {"seed", run.seed},
        {"c1_scale", run.c1_scale},
    };
    return run;
}

fields::PhiField build_custom_field(const ResolvedRun& run) {
    if (!run.entry || !run.entry->custom_field) {
        throw UsageError("problem '" + run.problem_name + "' has no custom field");
    }
    return run.entry->custom_field();
}

Certified certify(const ResolvedRun& run) {
    Certified out;
    out.working_ball = run.ball;
    const double g0 = run.problem.residual(run.ball.center);

    if (run.custom_field) {
        out.cert.sample_count = run.samples;
        out.cert.seed = run.seed;
        out.cert.constants["g0"] = g0;
        if (!run.rates) {
            throw UsageError("custom fields need declared rates to certify");
        }
        const auto& rates = *run.rates;
        const auto field = build_custom_field(run);
        out.cert.checks.push_back(
            audit::check_decay_inequality(run.problem, field, rates, run.ball, run.samples,
                                          run.seed));
        if (rates.a < 2.0) {
            try {
                const double T = audit::finite_time_horizon(rates, g0);
                out.horizon_T = T;
                out.cert.constants["T"] = T;
                out.cert.checks.push_back(
                    audit::check_theorem2_ball(rates, g0, T, run.ball.radius));
            } catch (const HorizonNotReached&) {
                out.cert.checks.push_back(
                    make_check("2.4", std::numeric_limits<double>::infinity(), 0.0));
            }
        } else if (rates.a > 2.0) {
            out.cert.checks.push_back(
                audit::check_theorem3_condition(rates, g0, run.ball.radius));
        } else {
            out.cert.checks.push_back(audit::check_ball_condition(g0, rates, run.ball));
        }
        return out;
    }

    out.cert = audit::estimate_constants(run.problem, run.ball, run.samples, run.seed);
    out.cert.constants["g0"] = g0;
    out.cert.checks.push_back(
        audit::check_method_condition(run.kind, out.cert, g0, run.ball.radius));

    if (run.kind == fields::Kind::ModifiedNewton) {
        const double prescribed = audit::modified_newton_radius(out.cert);
        out.cert.constants["prescribed_R"] = prescribed;
        out.working_ball.radius = std::min(run.ball.radius, prescribed);
        out.cert.checks.push_back(
            make_check("3.8.radius", out.working_ball.radius, prescribed * (1.0 + 1e-12)));
    }

    const auto derived = audit::derived_rates_for(run.kind, out.cert);
    out.derived = derived;
    out.cert.constants["c1"] = derived.c1;
    out.cert.constants["c2"] = derived.c2;
    if (derived.c1 > 0.0 && std::isfinite(derived.c2)) {
        out.cert.checks.push_back(audit::check_ball_condition(
            g0, constant_rates(derived.c1, derived.c2), out.working_ball));
    } else {
        out.cert.checks.push_back(make_check("1.7", std::numeric_limits<double>::infinity(),
                                             out.working_ball.radius));
    }
    return out;
}

RateFunctions scale_g1(RateFunctions rates, double factor) {
    if (factor == 1.0) return rates;
    const auto g1 = rates.g1;
    rates.g1 = [g1, factor](double t) { return factor * g1(t); };
    if (rates.integral_g1) {
        const auto integral = *rates.integral_g1;
        rates.integral_g1 = [integral, factor](double t) { return factor * integral(t); };
    }
    rates.tail_integral_G.reset();
    return rates;
}

void print_certificate(const Certificate& cert, std::ostream& out) {
    for (const auto& check : cert.checks) {
        out << "  [" << (check.satisfied ? "PASS" : "FAIL") << "] (" << check.condition_id
            << ")  lhs=" << report::fmt_double(check.lhs)
            << "  rhs=" << report::fmt_double(check.rhs)
            << "  margin=" << report::fmt_double(check.margin) << "\n";
    }
    out << "  constants:";
    for (const auto& [key, value] : cert.constants) {
        out << " " << key << "=" << report::fmt_double(value);
    }
    out << "\n";
}

std::string write_artifacts(const ResolvedRun& run, const report::RunReport& rep,
                            const Trajectory* traj, const std::vector<double>* envelope,
                            const Ball& ball) {
    if (run.out_dir.empty()) return {};
    const fs::path dir = fs::path(run.out_dir) /
                         (run.problem_name + "-" +
                          (run.custom_field ? "custom" : fields::to_string(run.kind)));
    fs::create_directories(dir);
    {
        std::ofstream jf(dir / "report.json");
        jf << report::to_json(rep).dump(2) << "\n";
    }
    if (traj != nullptr && envelope != nullptr) {
        std::ofstream cf(dir / "trajectory.csv");
        report::write_trajectory_csv(cf, *traj, *envelope, ball);
    }
    return dir.string();
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("DSM_OUT_DIR")) return env;
    return {};
}

CommandOutcome run_solve(const RunOptions& options, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    CommandOutcome outcome;
    ResolvedRun run;
    try {
        run = resolve(options);
    } catch (const UsageError& e) {
        out << "usage error: " << e.what() << "\n";
        outcome.exit_code = kUsage;
        return outcome;
    }

    auto& rep = outcome.report;
    rep.problem = run.problem_name;
    rep.field = run.custom_field ? "custom" : fields::to_string(run.kind);
    rep.config_echo = run.config_echo;

    Certified certified;
    try {
        certified = certify(run);
    } catch (const UsageError& e) {
        out << "usage error: " << e.what() << "\n";
        outcome.exit_code = kUsage;
        return outcome;
    } catch (const Error& e) {
        out << "certificate error: " << e.what() << "\n";
        outcome.exit_code = kCertificateFailed;
        rep.exit_code = outcome.exit_code;
        rep.timing_ms = elapsed_ms(start);
        outcome.run_dir = write_artifacts(run, rep, nullptr, nullptr, run.ball);
        return outcome;
    }
    rep.certificate = certified.cert;

    out << "certificate for " << run.problem_name << " / " << rep.field << ":\n";
    print_certificate(certified.cert, out);
    const bool cert_ok = certified.cert.all_satisfied();

    if (!cert_ok && !run.force) {
        out << "certificate failed; not solving (pass --force to solve anyway)\n";
        outcome.exit_code = kCertificateFailed;
        rep.exit_code = outcome.exit_code;
        rep.timing_ms = elapsed_ms(start);
        outcome.run_dir = write_artifacts(run, rep, nullptr, nullptr, run.ball);
        return outcome;
    }

    fields::PhiField field;
    try {
        if (run.custom_field) {
            field = build_custom_field(run);
        } else {
            field = audit::make_certified_field(run.kind, run.problem, certified.working_ball,
                                                certified.cert);
        }
    } catch (const Error& e) {
        out << "field construction error: " << e.what() << "\n";
        outcome.exit_code = kIntegrationFailure;
        rep.exit_code = outcome.exit_code;
        return outcome;
    }

    Trajectory traj;
    try {
        traj = integrate::solve_ivp(field, run.problem, certified.working_ball, run.config);
    } catch (const Error& e) {
        out << "integration error: " << e.what() << "\n";
        outcome.exit_code = kIntegrationFailure;
        rep.exit_code = outcome.exit_code;
        rep.timing_ms = elapsed_ms(start);
        outcome.run_dir = write_artifacts(run, rep, nullptr, nullptr, certified.working_ball);
        return outcome;
    }
    rep.trajectory = report::summarize(traj);
    out << "solve: exit " << to_string(traj.exit_reason) << " at t = " << traj.final_time()
        << ", final residual = " << report::fmt_double(traj.final_residual()) << "\n";

    // Audit against the declared rates (entry rates, else the certified
    // constant pair).  --c1-scale perturbs g1 for negative controls.
    std::optional<RateFunctions> audit_rates = run.rates;
    if (!audit_rates && certified.derived && certified.derived->c1 > 0.0 &&
        std::isfinite(certified.derived->c2)) {
        audit_rates = constant_rates(certified.derived->c1, certified.derived->c2);
    }

    std::size_t violations = 0;
    std::vector<double> envelope(traj.size(), std::numeric_limits<double>::quiet_NaN());
    if (audit_rates) {
        const RateFunctions rates = scale_g1(*audit_rates, run.c1_scale);
        audit::AuditOptions audit_options;
        audit_options.rel_slack = 1e-6 + 10.0 * run.config.rel_tol;
        audit_options.abs_slack =
            rates.a < 2.0 ? 1e-3 : 10.0 * run.config.abs_tol;
        const double noise_floor =
            10.0 * (run.config.abs_tol + run.config.rel_tol * (1.0 + traj.final_state().norm()));
        std::optional<Vector> oracle;
        if (run.entry && run.entry->oracle_root) oracle = run.entry->oracle_root;
        else if (run.problem.oracle_root) oracle = run.problem.oracle_root;

        const auto audit_result =
            audit::audit_trajectory(traj, rates, audit_options, oracle, noise_floor);
        envelope = audit_result.residual.envelope;
        rep.residual_envelope = report::summarize(audit_result.residual);
        violations += audit_result.residual.violations.size();
        out << "audit: residual envelope violations = "
            << audit_result.residual.violations.size();
        if (audit_result.state_tail) {
            rep.state_tail = report::summarize(*audit_result.state_tail);
            violations += audit_result.state_tail->violations.size();
            out << ", state tail violations = " << audit_result.state_tail->violations.size();
        }
        out << "\n";
    } else {
        out << "audit: no rates available; envelope audit skipped\n";
    }

    if (!cert_ok) {
        outcome.exit_code = kCertificateFailed;
    } else if (traj.exit_reason == ExitReason::StepFailure) {
        outcome.exit_code = kIntegrationFailure;
    } else if (violations > 0) {
        outcome.exit_code = kAuditViolations;
    } else {
        outcome.exit_code = kOk;
    }
    rep.exit_code = outcome.exit_code;
    rep.timing_ms = elapsed_ms(start);
    outcome.run_dir = write_artifacts(run, rep, &traj, &envelope, certified.working_ball);
    if (!outcome.run_dir.empty()) out << "artifacts: " << outcome.run_dir << "\n";
    return outcome;
}

CommandOutcome run_certify(const RunOptions& options, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    CommandOutcome outcome;
    ResolvedRun run;
    try {
        run = resolve(options);
    } catch (const UsageError& e) {
        out << "usage error: " << e.what() << "\n";
        outcome.exit_code = kUsage;
        return outcome;
    }

    auto& rep = outcome.report;
    rep.problem = run.problem_name;
    rep.field = run.custom_field ? "custom" : fields::to_string(run.kind);
    rep.config_echo = run.config_echo;
    try {
        const Certified certified = certify(run);
        rep.certificate = certified.cert;
        out << "certificate for " << run.problem_name << " / " << rep.field << ":\n";
        print_certificate(certified.cert, out);
        outcome.exit_code = certified.cert.all_satisfied() ? kOk : kCertificateFailed;
    } catch (const UsageError& e) {
        out << "usage error: " << e.what() << "\n";
        outcome.exit_code = kUsage;
        return outcome;
    } catch (const Error& e) {
        out << "certificate error: " << e.what() << "\n";
        outcome.exit_code = kCertificateFailed;
    }
    rep.exit_code = outcome.exit_code;
    rep.timing_ms = elapsed_ms(start);
    outcome.run_dir = write_artifacts(run, rep, nullptr, nullptr, run.ball);
    return outcome;
}

CommandOutcome run_demo_linear(const DemoLinearOptions& options, std::ostream& out) {
    CommandOutcome outcome;
    const auto* entry = corpus::find("psd-linear");
    const auto& setup = *entry->spectral;
    const Vector y = linreg::minimal_norm_solution(setup.op, setup.f);
    const Vector Pu0 = linreg::null_projection(setup.op, setup.u0);

    // alpha = 0: the null component is frozen.
    const Vector limit0 = y + Pu0;
    const Vector u0_run = linreg::evolve_linear(setup.op, setup.f, setup.u0,
                                                linreg::AlphaSchedule::zero(), 40.0);
    const double dev0 = (u0_run - limit0).norm();
    out << "alpha = 0: u(40) = (" << u0_run.transpose() << "), limit y - Py + Pu0 = ("
        << limit0.transpose() << "), deviation = " << report::fmt_double(dev0) << "\n";

    // Finite q = int alpha: the null component is damped by e^{-q}.
    const auto expsched = linreg::AlphaSchedule::exponential(1.0);
    const Vector limit_q = y + std::exp(-*expsched.q) * Pu0;
    const Vector uq_run = linreg::evolve_linear(setup.op, setup.f, setup.u0, expsched, 40.0);
    const double devq = (uq_run - limit_q).norm();
    out << "alpha = e^{-t} (q = 1): u(40) = (" << uq_run.transpose()
        << "), limit y - Py + e^{-q} Pu0 = (" << limit_q.transpose()
        << "), deviation = " << report::fmt_double(devq) << "\n";

    out << "slow-convergence witnesses (margin = " << options.margin << "):\n";
    out << "      T       lambda_m      deviation\n";
    json witness_rows = json::array();
    for (double T : {1.0, options.T, 100.0}) {
        const auto w = linreg::slow_convergence_witness(T, options.margin);
        out << "  " << std::setw(6) << T << "   " << report::fmt_double(w.lambda_m) << "   "
            << report::fmt_double(w.deviation) << "\n";
        witness_rows.push_back(
            json{{"T", T}, {"lambda_m", w.lambda_m}, {"deviation", w.deviation}});
    }

    outcome.exit_code = (dev0 <= 1e-10 && devq <= 1e-6) ? kOk : kIntegrationFailure;
    auto& rep = outcome.report;
    rep.problem = "psd-linear";
    rep.field = "demo-linear";
    rep.config_echo = json{{"T", options.T}, {"margin", options.margin}};
    rep.exit_code = outcome.exit_code;
    rep.config_echo["alpha0_deviation"] = dev0;
    rep.config_echo["finite_q_deviation"] = devq;
    rep.config_echo["witnesses"] = witness_rows;

    const std::string dir = resolve_out_dir(options.out_dir);
    if (!dir.empty()) {
        const fs::path run_dir = fs::path(dir) / "demo-linear";
        fs::create_directories(run_dir);
        std::ofstream jf(run_dir / "report.json");
        jf << report::to_json(rep).dump(2) << "\n";
        outcome.run_dir = run_dir.string();
    }
    return outcome;
}

CommandOutcome run_demo_monotone(const DemoMonotoneOptions& options, std::ostream& out) {
    CommandOutcome outcome;
    const auto* entry = corpus::find("cubic-monotone");
    const auto& problem = *entry->monotone_problem;
    const auto schedule = linreg::AlphaSchedule::inverse_sqrt();

    std::vector<double> grid;
    for (double t = 0.0; t <= options.max_time; t += options.max_time / 400.0) grid.push_back(t);
    const auto schedule_report = monotone::validate_alpha_schedule_A3(schedule, grid);
    out << "schedule checks (alpha = (1+t)^{-1/2}):\n";
    print_certificate(schedule_report.certificate, out);

    integrate::IntegrationConfig config;
    config.max_time = options.max_time;
    config.rel_tol = options.rel_tol;
    config.abs_tol = 1e-12;
    config.residual_stop = 0.0;
    const Vector u0 = Vector::Zero(problem.dim);
    const Trajectory traj = monotone::solve_monotone(problem, schedule, u0, config);

    audit::AuditOptions audit_options;
    audit_options.rel_slack = 1e-6 + 10.0 * config.rel_tol;
    const auto audit_result = monotone::audit_monotone_residual(traj, schedule, audit_options);

    out << "run: final state = (" << traj.final_state().transpose()
        << "), h(end) = " << report::fmt_double(traj.final_residual()) << " at t = "
        << traj.final_time() << "\n";
    out << "envelope phi(t) = h(0) e^{-int alpha}: violations = "
        << audit_result.envelope.violations.size();
    if (!audit_result.envelope.violations.empty()) {
        out << " (first at t = " << audit_result.envelope.violations.front().t << ")";
    }
    out << ", max relative overshoot = "
        << report::fmt_double(audit_result.envelope.max_relative_overshoot) << "\n";
    if (audit_result.tail_finite) {
        out << "state tail estimate int_t^inf phi at t = 0: "
            << report::fmt_double(audit_result.tail_estimates.front()) << "\n";
    }

    outcome.exit_code =
        audit_result.envelope.violations.empty() ? kOk : kAuditViolations;
    auto& rep = outcome.report;
    rep.problem = "cubic-monotone";
    rep.field = "demo-monotone";
    rep.config_echo = json{{"max_time", options.max_time}, {"rel_tol", options.rel_tol}};
    rep.certificate = schedule_report.certificate;
    rep.trajectory = report::summarize(traj);
    rep.residual_envelope = report::summarize(audit_result.envelope);
    rep.exit_code = outcome.exit_code;

    const std::string dir = resolve_out_dir(options.out_dir);
    if (!dir.empty()) {
        const fs::path run_dir = fs::path(dir) / "demo-monotone";
        fs::create_directories(run_dir);
        std::ofstream jf(run_dir / "report.json");
        jf << report::to_json(rep).dump(2) << "\n";
        std::ofstream cf(run_dir / "trajectory.csv");
        report::write_trajectory_csv(cf, traj, audit_result.envelope.envelope,
                                     Ball{u0, 1e30});
        outcome.run_dir = run_dir.string();
    }
    return outcome;
}

void print_corpus(std::ostream& out) {
    for (const auto& entry : corpus::corpus()) {
        out << entry.name << "\n";
        if (entry.problem) {
            out << "  problem: dim " << entry.problem->dim;
            if (entry.custom_field) out << ", custom field";
            if (!entry.recommended_fields.empty()) {
                out << ", fields:";
                for (auto kind : entry.recommended_fields) out << " " << fields::to_string(kind);
            }
            out << "\n";
        }
        if (entry.monotone_problem) out << "  monotone: dim " << entry.monotone_problem->dim << "\n";
        if (entry.spectral) out << "  spectral: dim " << entry.spectral->op.dim() << "\n";
        out << "  ball: radius " << entry.recommended_ball.radius << "\n";
        out << "  " << entry.notes << "\n";
    }
}

}  // namespace dsm::cli
