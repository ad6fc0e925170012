#pragma once

// Command layer behind the dsm binary: certify -> solve -> audit pipelines,
// the regularized-evolution demos and corpus listing.  Lives in the library
// so the pipelines are testable in-process; tools/dsm.cpp only parses argv.

#include "dsm/corpus.hpp"
#include "dsm/report.hpp"

#include <iosfwd>

namespace dsm::cli {

enum ExitCode : int {
    kOk = 0,
    kCertificateFailed = 2,
    kAuditViolations = 3,
    kIntegrationFailure = 4,
    kUsage = 64,
};

struct RunOptions {
    std::string problem;
    std::string field;  // empty: entry default (first recommended kind, or custom)
    std::optional<double> radius;
    std::optional<std::vector<double>> u0;
    int samples = 200;
    std::uint64_t seed = 1;
    std::optional<double> max_time;
    std::optional<double> rel_tol;
    std::string out_dir;  // empty: no artifacts
    bool force = false;
    double c1_scale = 1.0;  // audit-side scaling of g1 (negative controls)
    std::string config_path;
};

struct CommandOutcome {
    int exit_code = kOk;
    report::RunReport report;
    std::string run_dir;  // artifact directory, when written
};

/// certify -> solve -> audit; writes <run>/trajectory.csv and
/// <run>/report.json when an output directory is configured.
CommandOutcome run_solve(const RunOptions& options, std::ostream& out);

/// Certificate only; prints each check with lhs, rhs and margin.
CommandOutcome run_certify(const RunOptions& options, std::ostream& out);

struct DemoLinearOptions {
    double T = 10.0;
    double margin = 0.5;
    std::string out_dir;
};
CommandOutcome run_demo_linear(const DemoLinearOptions& options, std::ostream& out);

struct DemoMonotoneOptions {
    double max_time = 200.0;
    double rel_tol = 1e-10;
    std::string out_dir;
};
CommandOutcome run_demo_monotone(const DemoMonotoneOptions& options, std::ostream& out);

void print_corpus(std::ostream& out);

/// Resolve the effective output directory: explicit flag, else DSM_OUT_DIR.
[[nodiscard]] std::string resolve_out_dir(const std::string& flag_value);

}  // namespace dsm::cli
