#include "dsm/linreg.hpp"

#include "dsm/integrate.hpp"
#include "dsm/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace dsm::linreg {

std::vector<int> SpectralOperator::null_indices() const {
    std::vector<int> indices;
    for (int j = 0; j < dim(); ++j) {
        if (eigenvalues(j) == 0.0) indices.push_back(j);
    }
    return indices;
}

AlphaSchedule AlphaSchedule::zero() {
    AlphaSchedule s;
    s.alpha = [](double) { return 0.0; };
    s.integral_alpha = [](double) { return 0.0; };
    s.q = 0.0;
    return s;
}

AlphaSchedule AlphaSchedule::exponential(double c) {
    AlphaSchedule s;
    s.alpha = [c](double t) { return c * std::exp(-t); };
    s.integral_alpha = [c](double t) { return c * (-std::expm1(-t)); };
    s.q = c;
    return s;
}

AlphaSchedule AlphaSchedule::inverse_sqrt() {
    AlphaSchedule s;
    s.alpha = [](double t) { return 1.0 / std::sqrt(1.0 + t); };
    s.integral_alpha = [](double t) { return 2.0 * (std::sqrt(1.0 + t) - 1.0); };
    return s;
}

AlphaSchedule AlphaSchedule::power_law(double c, double p) {
    AlphaSchedule s;
    NamedRate rate{NamedRate::Kind::PowerLaw, c, p};
    s.alpha = [rate](double t) { return rate.value(t); };
    s.integral_alpha = [rate](double t) { return rate.antiderivative(t); };
    if (p < -1.0) s.q = -c / (p + 1.0);  // int_0^inf c(1+t)^p
    return s;
}

AlphaSchedule AlphaSchedule::constant(double c) {
    AlphaSchedule s;
    s.alpha = [c](double) { return c; };
    s.integral_alpha = [c](double t) { return c * t; };
    return s;
}

Vector minimal_norm_solution(const SpectralOperator& op, const Vector& f) {
    Vector y = Vector::Zero(op.dim());
    for (int j = 0; j < op.dim(); ++j) {
        if (op.eigenvalues(j) > 0.0) y(j) = f(j) / op.eigenvalues(j);
    }
    return y;
}

Vector null_projection(const SpectralOperator& op, const Vector& u) {
    Vector p = Vector::Zero(op.dim());
    for (int j : op.null_indices()) p(j) = u(j);
    return p;
}

Vector evolve_linear(const SpectralOperator& op, const Vector& f, const Vector& u0,
                     const AlphaSchedule& schedule, double t) {
    const int dim = op.dim();
    if (f.size() != dim || u0.size() != dim) {
        throw Error("evolve_linear: dimension mismatch");
    }
    for (int j : op.null_indices()) {
        if (std::abs(f(j)) > 1e-14 * (1.0 + f.norm())) {
            throw InconsistentRightHandSide(
                "f has a component on the null space (index " + std::to_string(j) +
                "); the equation A y = f is unsolvable");
        }
    }
    if (t < 0.0) throw Error("evolve_linear: t must be nonnegative");
    if (t == 0.0) return u0;

    if (!schedule.integral_alpha) {
        // No closed-form h: evolve the componentwise evolution directly.
        auto rhs = [&](double s, const Vector& u) -> Vector {
            return (-op.eigenvalues.array() * u.array() - schedule.alpha(s) * u.array() +
                    f.array())
                .matrix();
        };
        auto result = integrate::integrate_ode(rhs, u0, 0.0, t, 1e-11, 1e-13);
        if (result.step_failed) throw Error("evolve_linear: integration failed");
        return result.state;
    }

    const auto& A = *schedule.integral_alpha;
    const double A_t = A(t);
    Vector u(dim);
    for (int j = 0; j < dim; ++j) {
        const double lambda = op.eigenvalues(j);
        // Homogeneous part e^{-lambda t - A(t)} u0_j.
        const double hom = std::exp(-lambda * t - A_t) * u0(j);
        double conv = 0.0;
        if (f(j) != 0.0) {
            // int_0^t e^{-(lambda (t-s) + A(t) - A(s))} ds; the exponent is
            // nonpositive, so there is no cancellation or overflow.
            auto kernel = [&](double s) {
                return std::exp(-(lambda * (t - s) + (A_t - A(s))));
            };
            const double lo = lambda > 0.0 ? std::max(0.0, t - 70.0 / lambda) : 0.0;
            conv = quad::integrate(kernel, lo, t, 1e-13) * f(j);
        }
        u(j) = hom + conv;
    }
    return u;
}

SlowConvergenceWitness slow_convergence_witness(double T, double margin) {
    if (T <= 0.0) throw Error("slow_convergence_witness: T must be positive");
    if (!(margin > 0.0 && margin < 1.0)) {
        throw Error("slow_convergence_witness: margin must lie in (0,1)");
    }
    // lambda_m = (1 - margin)/T gives deviation e^{-(1-margin)}, which exceeds
    // margin for every margin in (0,1) and satisfies lambda_m < ln(1/margin)/T.
    SlowConvergenceWitness w;
    w.lambda_m = (1.0 - margin) / T;
    w.deviation = std::exp(-(1.0 - margin));
    return w;
}

ScheduleReport validate_alpha_schedule_linear(const AlphaSchedule& schedule,
                                              const std::vector<double>& grid) {
    if (grid.size() < 3) throw Error("schedule validation needs at least 3 grid points");
    ScheduleReport report;
    const std::size_t n = grid.size();

    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = schedule.alpha(grid[i]);

    double min_alpha = a[0];
    double max_increase = -std::numeric_limits<double>::infinity();
    double sup_ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        min_alpha = std::min(min_alpha, a[i]);
        if (i + 1 < n) max_increase = std::max(max_increase, a[i + 1] - a[i]);
        // Finite-difference derivative, one-sided at the ends.
        double da;
        if (i == 0) {
            da = (a[1] - a[0]) / (grid[1] - grid[0]);
        } else if (i + 1 == n) {
            da = (a[i] - a[i - 1]) / (grid[i] - grid[i - 1]);
        } else {
            da = (a[i + 1] - a[i - 1]) / (grid[i + 1] - grid[i - 1]);
        }
        const double denom = std::max(a[i] * a[i], kNormFloor);
        sup_ratio = std::max(sup_ratio, std::abs(da) / denom);
    }

    report.certificate.checks.push_back(make_check("4.alpha.nonnegative", -min_alpha, 0.0));
    report.certificate.checks.push_back(
        make_check("4.alpha.nonincreasing", max_increase, 1e-12 * (1.0 + std::abs(a[0]))));
    report.certificate.checks.push_back(make_check("4.alpha.ratio-bounded", sup_ratio, 1e12));
    report.certificate.constants["min_alpha"] = min_alpha;
    report.certificate.constants["sup_ratio"] = sup_ratio;

    if (schedule.q) {
        report.integral_divergent = false;
        report.q = schedule.q;
    } else {
        const auto tail = quad::integrate_tail(schedule.alpha, 0.0);
        report.integral_divergent = tail.divergent;
        if (!tail.divergent) report.q = tail.value;
    }
    return report;
}

SpectralDecomposition spectral_from_dense(const Matrix& symmetric) {
    if (symmetric.rows() != symmetric.cols()) {
        throw Error("spectral_from_dense: matrix must be square");
    }
    if (!symmetric.isApprox(symmetric.transpose(), 1e-12)) {
        throw Error("spectral_from_dense: matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
    SpectralDecomposition dec;
    dec.op.eigenvalues = eig.eigenvalues();
    dec.basis = eig.eigenvectors();
    // Clamp round-off negatives; genuinely negative eigenvalues are a misuse.
    for (int j = 0; j < dec.op.dim(); ++j) {
        double& lambda = dec.op.eigenvalues(j);
        if (lambda < 0.0) {
            if (lambda < -1e-10 * (1.0 + std::abs(dec.op.eigenvalues(dec.op.dim() - 1)))) {
                throw Error("spectral_from_dense: operator is not nonnegative");
            }
            lambda = 0.0;
        } else if (lambda > 0.0 && lambda < 1e-12) {
            lambda = 0.0;  // treat near-null directions as null
        }
    }
    return dec;
}

}  // namespace dsm::linreg
