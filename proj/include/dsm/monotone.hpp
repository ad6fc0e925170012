#pragma once

// Regularized solver for monotone nonlinear A: integrates
// u' = -[A(u) + alpha(t)u - f] and audits the residual against the
// differentiable-case envelope phi(t) = h(0) e^{-int alpha}.

#include "dsm/audit.hpp"
#include "dsm/core.hpp"
#include "dsm/integrate.hpp"
#include "dsm/linreg.hpp"

namespace dsm::monotone {

struct MonotoneProblem {
    std::string name;
    int dim = 0;
    std::function<Vector(const Vector&)> A;
    std::optional<std::function<Matrix(const Vector&)>> jacobian;
    Vector f;
    double fd_step = 1e-6;
    std::optional<Vector> oracle_root;  // y with A(y) = f

    [[nodiscard]] Vector evaluate(const Vector& u) const;
    [[nodiscard]] Matrix jacobian_at(const Vector& u) const;
    /// h(t,u) = ||A(u) + alpha(t) u - f||.
    [[nodiscard]] double regularized_residual(double alpha_t, const Vector& u) const;
};

/// Grid checks for the monotone-solver schedule assumptions: positivity,
/// monotone decay, convexity, the decaying-ratio proxy for
/// |alpha'| alpha^{-2} -> 0, and the derived lower bound alpha >= (c1 t+c2)^{-1}.
[[nodiscard]] linreg::ScheduleReport validate_alpha_schedule_A3(
    const linreg::AlphaSchedule& schedule, const std::vector<double>& grid);

/// Integrate u' = -[A(u) + alpha(t)u - f]; trajectory residuals record
/// h(t) = ||A(u(t)) + alpha(t) u(t) - f||.
[[nodiscard]] Trajectory solve_monotone(const MonotoneProblem& problem,
                                        const linreg::AlphaSchedule& schedule, const Vector& u0,
                                        const integrate::IntegrationConfig& config);

/// Compare h(t) against phi(t) = h(0) e^{-int_0^t alpha} pointwise, plus the
/// state tail estimate ||u(inf) - u(t)|| <= int_t^inf phi when finite.
struct MonotoneAudit {
    audit::EnvelopeReport envelope;
    bool tail_finite = false;
    std::vector<double> tail_estimates;  // aligned with trajectory times when finite
};
[[nodiscard]] MonotoneAudit audit_monotone_residual(const Trajectory& traj,
                                                    const linreg::AlphaSchedule& schedule,
                                                    const audit::AuditOptions& options);

}  // namespace dsm::monotone
