// dsm: solve F(u) = 0 by integrating a certified flow, check the sufficient
// conditions, and audit trajectories against the theoretical envelopes.

#include "dsm/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_run_flags(CLI::App* cmd, dsm::cli::RunOptions& options, bool with_force) {
    cmd->add_option("--problem", options.problem, "corpus problem name");
    cmd->add_option("--field", options.field,
                    "field kind: newton, simple-iteration, gradient, gauss-newton, "
                    "modified-newton, descent, custom");
    cmd->add_option("--radius", options.radius, "trust-ball radius override");
    cmd->add_option("--u0", options.u0, "initial point override")->expected(-1);
    cmd->add_option("--samples", options.samples, "certificate sample count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", options.seed, "sampling seed");
    cmd->add_option("--max-time", options.max_time, "integration time limit");
    cmd->add_option("--rel-tol", options.rel_tol, "integration relative tolerance");
    cmd->add_option("--out-dir", options.out_dir,
                    "artifact directory (default: $DSM_OUT_DIR; no artifacts if unset)");
    cmd->add_option("--config", options.config_path, "JSON run configuration file");
    cmd->add_option("--c1-scale", options.c1_scale,
                    "scale the audited decay rate g1 (negative controls)");
    if (with_force) {
        cmd->add_flag("--force", options.force, "solve even when the certificate fails");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamical-systems solver with convergence certificates"};
    app.require_subcommand(1);

    dsm::cli::RunOptions solve_options;
    auto* solve_cmd = app.add_subcommand("solve", "certify, integrate and audit a problem");
    add_run_flags(solve_cmd, solve_options, /*with_force=*/true);

    dsm::cli::RunOptions certify_options;
    auto* certify_cmd = app.add_subcommand("certify", "run the condition checks only");
    add_run_flags(certify_cmd, certify_options, /*with_force=*/false);

    dsm::cli::RunOptions audit_options;
    auto* audit_cmd =
        app.add_subcommand("audit", "solve and audit the trajectory against the envelopes");
    add_run_flags(audit_cmd, audit_options, /*with_force=*/true);

    auto* demo_cmd = app.add_subcommand("demo", "regularized-evolution demonstrations");
    demo_cmd->require_subcommand(1);
    dsm::cli::DemoLinearOptions demo_linear_options;
    auto* demo_linear_cmd =
        demo_cmd->add_subcommand("linear", "spectral limits and the slow-convergence witness");
    demo_linear_cmd->add_option("--T", demo_linear_options.T, "witness horizon");
    demo_linear_cmd->add_option("--margin", demo_linear_options.margin,
                                "witness deviation margin in (0,1)");
    demo_linear_cmd->add_option("--out-dir", demo_linear_options.out_dir, "artifact directory");

    dsm::cli::DemoMonotoneOptions demo_monotone_options;
    auto* demo_monotone_cmd =
        demo_cmd->add_subcommand("monotone", "regularized monotone solve with envelope audit");
    demo_monotone_cmd->add_option("--max-time", demo_monotone_options.max_time,
                                  "integration time limit");
    demo_monotone_cmd->add_option("--rel-tol", demo_monotone_options.rel_tol,
                                  "integration relative tolerance");
    demo_monotone_cmd->add_option("--out-dir", demo_monotone_options.out_dir,
                                  "artifact directory");

    auto* corpus_cmd = app.add_subcommand("corpus", "built-in problem corpus");
    corpus_cmd->require_subcommand(1);
    corpus_cmd->add_subcommand("list", "list the corpus entries");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) {
            return dsm::cli::run_solve(solve_options, std::cout).exit_code;
        }
        if (certify_cmd->parsed()) {
            return dsm::cli::run_certify(certify_options, std::cout).exit_code;
        }
        if (audit_cmd->parsed()) {
            return dsm::cli::run_solve(audit_options, std::cout).exit_code;
        }
        if (demo_cmd->parsed()) {
            if (demo_linear_cmd->parsed()) {
                return dsm::cli::run_demo_linear(demo_linear_options, std::cout).exit_code;
            }
            return dsm::cli::run_demo_monotone(demo_monotone_options, std::cout).exit_code;
        }
        if (corpus_cmd->parsed()) {
            dsm::cli::print_corpus(std::cout);
            return dsm::cli::kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dsm::cli::kIntegrationFailure;
    }
    return dsm::cli::kOk;
}
