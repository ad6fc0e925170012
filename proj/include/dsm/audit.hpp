#pragma once

// Estimates the method constants, checks the sufficient conditions, computes
// the theoretical decay envelopes and verifies computed trajectories against
// them.

#include "dsm/core.hpp"
#include "dsm/fields.hpp"

namespace dsm::audit {

/// Pointwise comparison of a measured curve against its theoretical bound.
struct EnvelopeReport {
    struct Violation {
        double t = 0.0;
        double actual = 0.0;
        double bound = 0.0;
    };
    std::vector<double> times;
    std::vector<double> actual;
    std::vector<double> envelope;
    std::vector<Violation> violations;
    double max_relative_overshoot = 0.0;
};

struct AuditOptions {
    double rel_slack = 1e-6;  // callers add 10 * integrator rel_tol
    double abs_slack = 0.0;
};

/// Sampled estimates of m1, M1, M2, m0 and the monotonicity lower bound c1 on
/// the ball, inflated by a 1.05 safety factor (c1 deflated instead).
[[nodiscard]] Certificate estimate_constants(const ProblemSpec& problem, const Ball& ball,
                                             int samples, std::uint64_t seed);

/// Ball condition: g0 * int_0^inf G <= R.
[[nodiscard]] Certificate::Check check_ball_condition(double g0, const RateFunctions& rates,
                                                      const Ball& ball);

/// Per-method sufficient condition (3.4)-(3.8).
[[nodiscard]] Certificate::Check check_method_condition(fields::Kind kind,
                                                        const Certificate& certificate, double g0,
                                                        double R);

/// Ball radius prescribed for the modified Newton method, (2 M2 m0)^{-1}.
[[nodiscard]] double modified_newton_radius(const Certificate& certificate);

/// Residual decay envelope at time t: exponential for a = 2, finite-time
/// extinction for a < 2, algebraic decay for a > 2.
[[nodiscard]] double residual_envelope(const RateFunctions& rates, double g0, double t);

/// State-error tail bound g0 * int_t^inf G.
[[nodiscard]] double tail_bound(const RateFunctions& rates, double g0, double t);

/// The unique T with g0^{2-a} = (2-a) int_0^T g1, for 0 < a < 2.
[[nodiscard]] double finite_time_horizon(const RateFunctions& rates, double g0);

/// Finite-horizon ball condition: g0 * int_0^T g2 <= R.
[[nodiscard]] Certificate::Check check_theorem2_ball(const RateFunctions& rates, double g0,
                                                     double T, double R);

/// Algebraic-decay ball condition: int_0^inf g2(s) h(s) ds <= R, a > 2.
[[nodiscard]] Certificate::Check check_theorem3_condition(const RateFunctions& rates, double g0,
                                                          double R);

/// Residual-envelope audit of a trajectory, plus the state-error tail audit
/// when a root (oracle or converged final state) is available.
struct TrajectoryAudit {
    EnvelopeReport residual;
    std::optional<EnvelopeReport> state_tail;
};
[[nodiscard]] TrajectoryAudit audit_trajectory(const Trajectory& traj, const RateFunctions& rates,
                                               const AuditOptions& options,
                                               std::optional<Vector> oracle = std::nullopt,
                                               double noise_floor = 0.0);

/// Rate constants a certified field earns, from the estimated constants.
[[nodiscard]] fields::DerivedRates derived_rates_for(fields::Kind kind,
                                                     const Certificate& certificate);

/// Build the field for `kind` wired to the certified constants.
[[nodiscard]] fields::PhiField make_certified_field(fields::Kind kind, const ProblemSpec& problem,
                                                    const Ball& ball,
                                                    const Certificate& certificate);

/// Sampled check that (F'(u) Phi(t,u), F(u)) <= -g1(0) ||F(u)||^a on the ball.
[[nodiscard]] Certificate::Check check_decay_inequality(const ProblemSpec& problem,
                                                        const fields::PhiField& field,
                                                        const RateFunctions& rates,
                                                        const Ball& ball, int samples,
                                                        std::uint64_t seed);

}  // namespace dsm::audit
