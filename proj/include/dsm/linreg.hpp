#pragma once

// Regularized linear evolution u' = -Au - alpha(t)u + f for selfadjoint
// nonnegative A on diagonal spectral models: exact componentwise solutions,
// the null-space limits, and the slow-convergence witness.

#include "dsm/core.hpp"

namespace dsm::linreg {

/// Selfadjoint nonnegative operator given by its eigenvalues; zero
/// eigenvalues span the null space.
struct SpectralOperator {
    Vector eigenvalues;

    [[nodiscard]] int dim() const { return static_cast<int>(eigenvalues.size()); }
    [[nodiscard]] std::vector<int> null_indices() const;
};

/// Regularization schedule alpha(t) >= 0 with optional closed-form
/// antiderivative and total integral q.
struct AlphaSchedule {
    std::function<double(double)> alpha;
    std::optional<std::function<double(double)>> integral_alpha;  // t -> int_0^t alpha
    std::optional<double> q;                                      // int_0^inf alpha, when finite

    [[nodiscard]] static AlphaSchedule zero();
    /// alpha(t) = c e^{-t}; q = c.
    [[nodiscard]] static AlphaSchedule exponential(double c = 1.0);
    /// alpha(t) = (1+t)^{-1/2}.
    [[nodiscard]] static AlphaSchedule inverse_sqrt();
    /// alpha(t) = c (1+t)^p, p <= 0.
    [[nodiscard]] static AlphaSchedule power_law(double c, double p);
    [[nodiscard]] static AlphaSchedule constant(double c);
};

/// Minimal-norm solution of A y = f: y_j = f_j / lambda_j off the null space,
/// 0 on it.
[[nodiscard]] Vector minimal_norm_solution(const SpectralOperator& op, const Vector& f);

/// Orthogonal projection onto the null space.
[[nodiscard]] Vector null_projection(const SpectralOperator& op, const Vector& u);

/// Solution of the regularized evolution at time t, componentwise via the
/// integrating factor.  Requires f_j = 0 on null indices.
[[nodiscard]] Vector evolve_linear(const SpectralOperator& op, const Vector& f, const Vector& u0,
                                   const AlphaSchedule& schedule, double t);

/// Rank-one construction showing the convergence u(t) -> y is not uniform in
/// f: an eigenvalue small enough that the solution at time T still misses the
/// target by more than `margin`.
struct SlowConvergenceWitness {
    double lambda_m = 0.0;
    double deviation = 0.0;  // ||u(T) - y_m|| = e^{-T lambda_m}, exceeds margin
};
[[nodiscard]] SlowConvergenceWitness slow_convergence_witness(double T, double margin = 0.5);

/// Grid checks on a schedule: positivity, monotone decay, bounded
/// alpha^{-2}|alpha'|, and whether int alpha diverges (reported, not
/// required).
struct ScheduleReport {
    Certificate certificate;
    bool integral_divergent = false;
    std::optional<double> q;
};
[[nodiscard]] ScheduleReport validate_alpha_schedule_linear(const AlphaSchedule& schedule,
                                                            const std::vector<double>& grid);

/// Dense symmetric operator diagonalized into spectral form: A = Q diag Q^T.
struct SpectralDecomposition {
    SpectralOperator op;
    Matrix basis;  // columns are eigenvectors

    [[nodiscard]] Vector to_spectral(const Vector& u) const { return basis.transpose() * u; }
    [[nodiscard]] Vector from_spectral(const Vector& u) const { return basis * u; }
};
[[nodiscard]] SpectralDecomposition spectral_from_dense(const Matrix& symmetric);

}  // namespace dsm::linreg
