#include "dsm/monotone.hpp"

#include "dsm/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace dsm::monotone {

Vector MonotoneProblem::evaluate(const Vector& u) const {
    if (u.size() != dim) {
        throw Error("monotone problem '" + name + "': input dimension mismatch");
    }
    Vector out = A(u);
    if (out.size() != dim) {
        throw Error("monotone problem '" + name + "': A output dimension mismatch");
    }
    return out;
}

Matrix MonotoneProblem::jacobian_at(const Vector& u) const {
    if (jacobian) return (*jacobian)(u);
    return finite_difference_jacobian([this](const Vector& x) { return evaluate(x); }, u, fd_step);
}

double MonotoneProblem::regularized_residual(double alpha_t, const Vector& u) const {
    return (evaluate(u) + alpha_t * u - f).norm();
}

linreg::ScheduleReport validate_alpha_schedule_A3(const linreg::AlphaSchedule& schedule,
                                                  const std::vector<double>& grid) {
    if (grid.size() < 10) throw Error("A3 validation needs at least 10 grid points");
    linreg::ScheduleReport report = linreg::validate_alpha_schedule_linear(schedule, grid);
    auto& cert = report.certificate;
    const std::size_t n = grid.size();

    std::vector<double> a(n), ratio(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = schedule.alpha(grid[i]);
    for (std::size_t i = 0; i < n; ++i) {
        double da;
        if (i == 0) {
            da = (a[1] - a[0]) / (grid[1] - grid[0]);
        } else if (i + 1 == n) {
            da = (a[i] - a[i - 1]) / (grid[i] - grid[i - 1]);
        } else {
            da = (a[i + 1] - a[i - 1]) / (grid[i + 1] - grid[i - 1]);
        }
        ratio[i] = std::abs(da) / std::max(a[i] * a[i], kNormFloor);
    }

    // Convexity via second divided differences.
    double min_curved = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dd1 = (a[i] - a[i - 1]) / (grid[i] - grid[i - 1]);
        const double dd2 = (a[i + 1] - a[i]) / (grid[i + 1] - grid[i]);
        min_curved = std::min(min_curved, 2.0 * (dd2 - dd1) / (grid[i + 1] - grid[i - 1]));
    }
    cert.checks.push_back(make_check("A3.alpha.convex", -min_curved, 1e-9));

    // Decade proxy for |alpha'| alpha^{-2} -> 0: the ratio over the last tenth
    // of the grid must have dropped to at most half its level on the first.
    const std::size_t tenth = std::max<std::size_t>(1, n / 10);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < tenth; ++i) first = std::max(first, ratio[i]);
    for (std::size_t i = n - tenth; i < n; ++i) last = std::max(last, ratio[i]);
    cert.checks.push_back(make_check("A3.ratio-decays", last, 0.5 * first));

    // Derived lower bound alpha(t) >= (c1 t + c2)^{-1} with c2 = 1/alpha(0).
    // The fit constant uses secant slopes over the smaller endpoint value, an
    // upper estimate of |alpha'| alpha^{-2} on each cell; the centered-ratio
    // sup reported above can undershoot between grid points.
    double c1 = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double secant = std::abs(a[i + 1] - a[i]) / (grid[i + 1] - grid[i]);
        const double amin = std::max(std::min(a[i], a[i + 1]), kNormFloor);
        c1 = std::max(c1, secant / (amin * amin));
    }
    const double c2 = 1.0 / std::max(a[0], kNormFloor);
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        worst_gap = std::max(worst_gap, 1.0 / (c1 * grid[i] + c2) - a[i]);
    }
    cert.checks.push_back(
        make_check("5.alpha.lower-bound", worst_gap, 1e-9 * (1.0 + std::abs(a[0]))));
    cert.constants["c1"] = c1;
    cert.constants["c2"] = c2;
    return report;
}

Trajectory solve_monotone(const MonotoneProblem& problem, const linreg::AlphaSchedule& schedule,
                          const Vector& u0, const integrate::IntegrationConfig& config) {
    auto rhs = [&problem, &schedule](double t, const Vector& u) -> Vector {
        return -(problem.evaluate(u) + schedule.alpha(t) * u - problem.f);
    };
    auto residual = [&problem, &schedule](double t, const Vector& u) {
        return problem.regularized_residual(schedule.alpha(t), u);
    };
    return integrate::integrate_recorded(rhs, residual, u0, config, {});
}

MonotoneAudit audit_monotone_residual(const Trajectory& traj,
                                      const linreg::AlphaSchedule& schedule,
                                      const audit::AuditOptions& options) {
    if (traj.size() == 0) throw Error("audit_monotone_residual: empty trajectory");
    MonotoneAudit result;
    const double h0 = traj.residuals.front();
    const std::size_t n = traj.size();

    // Cumulative int_0^t alpha along the trajectory grid.
    std::vector<double> I(n, 0.0);
    if (schedule.integral_alpha) {
        for (std::size_t i = 0; i < n; ++i) I[i] = (*schedule.integral_alpha)(traj.times[i]);
    } else {
        for (std::size_t i = 1; i < n; ++i) {
            I[i] = I[i - 1] + quad::integrate(schedule.alpha, traj.times[i - 1], traj.times[i]);
        }
    }

    result.envelope.times = traj.times;
    result.envelope.actual = traj.residuals;
    result.envelope.envelope.resize(n);
    result.envelope.max_relative_overshoot = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = h0 * std::exp(-I[i]);
        result.envelope.envelope[i] = phi;
        const double bound = phi * (1.0 + options.rel_slack) + options.abs_slack;
        if (traj.residuals[i] > bound) {
            result.envelope.violations.push_back({traj.times[i], traj.residuals[i], bound});
        }
        result.envelope.max_relative_overshoot = std::max(
            result.envelope.max_relative_overshoot, (traj.residuals[i] - phi) / rel_den(phi));
    }

    // State tail ||u(inf) - u(t)|| <= int_t^inf phi(s) ds, when finite.
    auto phi_fn = [&](double s) {
        double Is;
        if (schedule.integral_alpha) {
            Is = (*schedule.integral_alpha)(s);
        } else {
            Is = quad::integrate(schedule.alpha, 0.0, s);
        }
        return h0 * std::exp(-Is);
    };
    const auto tail0 = quad::integrate_tail(phi_fn, traj.times.back());
    if (!tail0.divergent) {
        result.tail_finite = true;
        result.tail_estimates.resize(n);
        // int_t^inf = int_{t_end}^inf + int_t^{t_end}, accumulated backwards.
        result.tail_estimates[n - 1] = tail0.value;
        for (std::size_t i = n - 1; i > 0; --i) {
            result.tail_estimates[i - 1] =
                result.tail_estimates[i] +
                quad::integrate(phi_fn, traj.times[i - 1], traj.times[i]);
        }
    }
    return result;
}

}  // namespace dsm::monotone
