#pragma once

// Adaptive initial-value-problem solver for u' = Phi(t,u) with event detection
// for residual convergence, ball exit and a finite time horizon.

#include "dsm/core.hpp"
#include "dsm/fields.hpp"

namespace dsm::integrate {

struct IntegrationConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_time = 50.0;
    double residual_stop = 1e-10;
    long max_steps = 1'000'000;
    double record_every = 0.01;  // output sampling interval; also caps the step size

    void validate() const;
};

using Rhs = std::function<Vector(double, const Vector&)>;
using ResidualFn = std::function<double(double, const Vector&)>;

struct DriveOptions {
    std::optional<Ball> ball;   // enables the ball-exit event
    bool horizon_mode = false;  // integrate to exactly max_time; residual stop disabled
};

/// Shared adaptive driver: integrates rhs from u0 over [0, config.max_time],
/// recording states on the output grid plus the final event point.
[[nodiscard]] Trajectory integrate_recorded(const Rhs& rhs, const ResidualFn& residual,
                                            const Vector& u0, const IntegrationConfig& config,
                                            const DriveOptions& options);

/// Final state only, no recording or events.  Used where a trajectory is not
/// needed (spectral evolution, oracles).
struct OdeResult {
    Vector state;
    double time = 0.0;
    bool step_failed = false;
};
[[nodiscard]] OdeResult integrate_ode(const Rhs& rhs, const Vector& u0, double t0, double t1,
                                      double rel_tol = 1e-10, double abs_tol = 1e-12,
                                      long max_steps = 10'000'000);

/// Integrate the flow of `field` for `problem` starting at ball.center.
[[nodiscard]] Trajectory solve_ivp(const fields::PhiField& field, const ProblemSpec& problem,
                                   const Ball& ball, const IntegrationConfig& config);

/// Integrate on [0, T] where T comes from the finite-time-horizon computation;
/// the residual stop is disabled so the residual at T is reported.
[[nodiscard]] Trajectory solve_to_finite_horizon(const fields::PhiField& field,
                                                 const ProblemSpec& problem, const Ball& ball,
                                                 double T, const IntegrationConfig& config);

}  // namespace dsm::integrate
