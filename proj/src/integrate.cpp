#include "dsm/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace dsm::integrate {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - bhat, for the embedded 4th-order error estimate.
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

constexpr double kStepUnderflow = 1e-14;
constexpr double kEventTimeTol = 1e-9;

// PI step controller constants (order 5, Hairer's dopri5 defaults).
constexpr double kExpo1 = 0.2 - 0.04 * 0.75;
constexpr double kBeta = 0.04;
constexpr double kSafety = 0.9;

struct Stepper {
    Rhs rhs;
    double rel_tol;
    double abs_tol;
    Vector k2, k3, k4, k5, k6, err;

    // One trial step from (t, y, f=rhs(t,y)).  On success y_new/f_new hold the
    // 5th-order solution and its derivative (FSAL).  Returns the scaled error.
    double attempt(double t, const Vector& y, const Vector& f, double h, Vector& y_new,
                   Vector& f_new) {
        k2 = rhs(t + c2 * h, y + h * (a21 * f));
        k3 = rhs(t + c3 * h, y + h * (a31 * f + a32 * k2));
        k4 = rhs(t + c4 * h, y + h * (a41 * f + a42 * k2 + a43 * k3));
        k5 = rhs(t + c5 * h, y + h * (a51 * f + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = rhs(t + h, y + h * (a61 * f + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y_new = y + h * (b1 * f + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        if (!y_new.allFinite()) return std::numeric_limits<double>::infinity();
        f_new = rhs(t + h, y_new);
        if (!f_new.allFinite()) return std::numeric_limits<double>::infinity();
        err = h * (e1 * f + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * f_new);

        double sum = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = abs_tol + rel_tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            const double q = err(i) / sc;
            sum += q * q;
        }
        return std::sqrt(sum / static_cast<double>(y.size()));
    }

    double initial_step(double t0, const Vector& y0, const Vector& f0, double h_max) {
        auto scaled_norm = [&](const Vector& v, const Vector& ref) {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                const double sc = abs_tol + rel_tol * std::abs(ref(i));
                sum += (v(i) / sc) * (v(i) / sc);
            }
            return std::sqrt(sum / static_cast<double>(v.size()));
        };
        const double d0 = scaled_norm(y0, y0);
        const double d1 = scaled_norm(f0, y0);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, h_max);
        Vector f1;
        try {
            f1 = rhs(t0 + h0, y0 + h0 * f0);
        } catch (const Error&) {
            return std::min(1e-6, h_max);
        }
        const double d2 = f1.allFinite() ? scaled_norm(f1 - f0, y0) / h0 : 1e10;
        double h1;
        if (std::max(d1, d2) <= 1e-15) {
            h1 = std::max(1e-6, h0 * 1e-3);
        } else {
            h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
        }
        return std::min({100.0 * h0, h1, h_max});
    }
};

// Cubic Hermite interpolation on an accepted step; exact at theta = 0 and 1.
Vector dense_eval(const Vector& y0, const Vector& f0, const Vector& y1, const Vector& f1, double h,
                  double theta) {
    const double t2 = theta * theta, t3 = t2 * theta;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * h * f0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1;
}

double shrink_factor(double err) {
    return std::min(10.0, std::pow(std::max(err, 1e-10), kExpo1) / kSafety);
}

double grow_factor(double err, double facold) {
    const double fac11 = std::pow(std::max(err, 1e-10), kExpo1);
    const double fac = fac11 / std::pow(facold, kBeta);
    return std::max(0.1, std::min(5.0, fac / kSafety));
}

}  // namespace

void IntegrationConfig::validate() const {
    if (rel_tol <= 0 || abs_tol <= 0) throw Error("integration tolerances must be positive");
    if (max_time <= 0) throw Error("max_time must be positive");
    if (residual_stop < 0) throw Error("residual_stop must be nonnegative");
    if (max_steps <= 0) throw Error("max_steps must be positive");
    if (record_every <= 0) throw Error("record_every must be positive");
    if (record_every > max_time) throw Error("record_every must not exceed max_time");
}

Trajectory integrate_recorded(const Rhs& rhs, const ResidualFn& residual, const Vector& u0,
                              const IntegrationConfig& config, const DriveOptions& options) {
    config.validate();
    const double t_end = config.max_time;

    Rhs safe_rhs = [&rhs](double t, const Vector& y) -> Vector {
        try {
            return rhs(t, y);
        } catch (const FieldEvaluationFailure&) {
            throw;
        } catch (const Error& e) {
            throw FieldEvaluationFailure(
                t, std::string(e.what()) + " (at t = " + std::to_string(t) + ")");
        }
    };

    Trajectory traj;
    auto record = [&](double t, const Vector& y) {
        if (!traj.times.empty() && t <= traj.times.back() + 1e-12 * std::max(1.0, std::abs(t))) {
            return;
        }
        traj.times.push_back(t);
        traj.states.push_back(y);
        traj.residuals.push_back(residual(t, y));
    };

    double t = 0.0;
    Vector y = u0;
    record(t, y);

    const bool use_residual_stop = !options.horizon_mode && config.residual_stop > 0.0;
    if (use_residual_stop && traj.residuals.front() <= config.residual_stop) {
        traj.exit_reason = ExitReason::ResidualConverged;
        return traj;
    }

    Stepper stepper{safe_rhs, config.rel_tol, config.abs_tol, {}, {}, {}, {}, {}, {}};
    Vector f = safe_rhs(t, y);
    if (!f.allFinite()) {
        throw FieldEvaluationFailure(0.0, "non-finite field value at the initial point");
    }

    const double h_cap = config.record_every;
    double h = stepper.initial_step(t, y, f, std::min(h_cap, t_end));
    double next_record = config.record_every;
    double ball_dist_prev =
        options.ball ? (y - options.ball->center).norm() - options.ball->radius : -1.0;
    double residual_prev = traj.residuals.front();
    double facold = 1e-4;

    Vector y_new, f_new;
    long steps = 0;
    bool rejected = false;

    while (true) {
        if (steps >= config.max_steps) {
            record(t, y);
            traj.exit_reason = ExitReason::StepFailure;
            return traj;
        }
        h = std::min({h, h_cap, t_end - t});
        if (h < kStepUnderflow * std::max(1.0, std::abs(t))) {
            record(t, y);
            traj.exit_reason = ExitReason::StepFailure;
            return traj;
        }

        const double err = stepper.attempt(t, y, f, h, y_new, f_new);
        ++steps;
        if (!(err <= 1.0)) {
            h /= shrink_factor(err);
            rejected = true;
            continue;
        }

        const double t_new = t + h;
        double t_stop = t_new;
        const Vector* y_stop = &y_new;
        Vector y_event;
        std::optional<ExitReason> exit;

        auto locate = [&](const std::function<double(double, const Vector&)>& event,
                          double sign_lo) {
            // Bisection on the dense output for the sign change inside the step.
            double lo = 0.0, hi = 1.0;
            Vector u_hi = y_new;
            while ((hi - lo) * h > kEventTimeTol) {
                const double mid = 0.5 * (lo + hi);
                Vector u_mid = dense_eval(y, f, y_new, f_new, h, mid);
                if (event(t + mid * h, u_mid) * sign_lo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                    u_hi = std::move(u_mid);
                }
            }
            return std::pair<double, Vector>{t + hi * h, std::move(u_hi)};
        };

        if (options.ball) {
            const double ball_dist = (y_new - options.ball->center).norm() - options.ball->radius;
            if (ball_dist >= 0.0) {
                if (ball_dist_prev < 0.0) {
                    auto [te, ue] = locate(
                        [&](double, const Vector& u) {
                            return (u - options.ball->center).norm() - options.ball->radius;
                        },
                        ball_dist_prev);
                    t_stop = te;
                    y_event = std::move(ue);
                    y_stop = &y_event;
                }
                exit = ExitReason::LeftBall;
            }
            ball_dist_prev = ball_dist;
        }

        if (!exit && use_residual_stop) {
            const double r_new = residual(t_new, y_new);
            if (r_new <= config.residual_stop && residual_prev > config.residual_stop) {
                auto [te, ue] = locate(
                    [&](double tt, const Vector& u) {
                        return residual(tt, u) - config.residual_stop;
                    },
                    residual_prev - config.residual_stop);
                t_stop = te;
                y_event = std::move(ue);
                y_stop = &y_event;
                exit = ExitReason::ResidualConverged;
            }
            residual_prev = r_new;
        }

        // Emit grid samples inside the accepted (possibly truncated) step; the
        // dense formula is exact at the step end, so grid points landing there
        // use the stepped state itself.
        while (next_record <= t_stop + 1e-12 * std::max(1.0, t_stop) &&
               next_record <= t_end + 1e-12) {
            const double theta = std::min(1.0, (next_record - t) / h);
            record(next_record, dense_eval(y, f, y_new, f_new, h, theta));
            next_record += config.record_every;
        }

        if (exit) {
            record(t_stop, *y_stop);
            traj.exit_reason = *exit;
            return traj;
        }

        t = t_new;
        y.swap(y_new);
        f.swap(f_new);

        if (t >= t_end - 1e-12 * std::max(1.0, t_end)) {
            record(t, y);
            traj.exit_reason = options.horizon_mode ? ExitReason::FiniteHorizonReached
                                                    : ExitReason::MaxTimeReached;
            return traj;
        }

        double h_next = h / grow_factor(err, facold);
        if (rejected) h_next = std::min(h_next, h);
        rejected = false;
        facold = std::max(err, 1e-4);
        h = h_next;
    }
}

OdeResult integrate_ode(const Rhs& rhs, const Vector& u0, double t0, double t1, double rel_tol,
                        double abs_tol, long max_steps) {
    OdeResult result;
    result.state = u0;
    result.time = t0;
    if (t1 <= t0) return result;

    Stepper stepper{rhs, rel_tol, abs_tol, {}, {}, {}, {}, {}, {}};
    double t = t0;
    Vector y = u0;
    Vector f = rhs(t, y);
    double h = stepper.initial_step(t, y, f, t1 - t0);
    double facold = 1e-4;
    Vector y_new, f_new;
    bool rejected = false;
    long steps = 0;

    while (t < t1 - 1e-12 * std::max(1.0, std::abs(t1))) {
        if (steps++ >= max_steps) {
            result.step_failed = true;
            break;
        }
        h = std::min(h, t1 - t);
        if (h < kStepUnderflow * std::max(1.0, std::abs(t))) {
            result.step_failed = true;
            break;
        }
        const double err = stepper.attempt(t, y, f, h, y_new, f_new);
        if (!(err <= 1.0)) {
            h /= shrink_factor(err);
            rejected = true;
            continue;
        }
        t += h;
        y.swap(y_new);
        f.swap(f_new);
        double h_next = h / grow_factor(err, facold);
        if (rejected) h_next = std::min(h_next, h);
        rejected = false;
        facold = std::max(err, 1e-4);
        h = h_next;
    }
    result.state = y;
    result.time = t;
    return result;
}

Trajectory solve_ivp(const fields::PhiField& field, const ProblemSpec& problem, const Ball& ball,
                     const IntegrationConfig& config) {
    DriveOptions options;
    options.ball = ball;
    auto rhs = [&field](double t, const Vector& u) { return field.evaluate(t, u); };
    auto residual = [&problem](double, const Vector& u) { return problem.residual(u); };
    return integrate_recorded(rhs, residual, ball.center, config, options);
}

Trajectory solve_to_finite_horizon(const fields::PhiField& field, const ProblemSpec& problem,
                                   const Ball& ball, double T, const IntegrationConfig& config) {
    if (T < 0.0) throw Error("finite horizon T must be nonnegative");
    auto residual_fn = [&problem](double, const Vector& u) { return problem.residual(u); };
    if (T == 0.0) {
        Trajectory traj;
        traj.times = {0.0};
        traj.states = {ball.center};
        traj.residuals = {residual_fn(0.0, ball.center)};
        traj.exit_reason = ExitReason::FiniteHorizonReached;
        return traj;
    }
    IntegrationConfig horizon_config = config;
    horizon_config.max_time = T;
    horizon_config.record_every = std::min(config.record_every, T);
    DriveOptions options;
    options.ball = ball;
    options.horizon_mode = true;
    auto rhs = [&field](double t, const Vector& u) { return field.evaluate(t, u); };
    return integrate_recorded(rhs, residual_fn, ball.center, horizon_config, options);
}

}  // namespace dsm::integrate
