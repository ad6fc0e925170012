#pragma once

// Constructors for the right-hand side Phi(t,u) of the solver flow
// u' = Phi(t,u), one per classical iterative method, each bundled with the
// decay-rate constants it earns.

#include "dsm/core.hpp"

namespace dsm::fields {

enum class Kind {
    Newton,
    SimpleIteration,
    Gradient,
    GaussNewton,
    ModifiedNewton,
    Descent,
    Custom,
};

[[nodiscard]] const char* to_string(Kind kind);
[[nodiscard]] std::optional<Kind> kind_from_string(std::string_view name);

/// Constant-rate pair certifying (F'(u)Phi, F) <= -c1 ||F||^2 and
/// ||Phi|| <= c2 ||F||^b on the working ball.
struct DerivedRates {
    double c1 = 0.0;
    double c2 = 0.0;
    double b = 1.0;
};

struct PhiField {
    Kind kind = Kind::Custom;
    std::function<Vector(double t, const Vector& u)> evaluate;
    std::optional<DerivedRates> derived_rates;
};

// Rate constants come from the audit module's certificate; pass std::nullopt
// to build an uncertified field (derived_rates left empty).

/// Phi = -[F'(u)]^{-1} F(u).  Rates (1, m1).
[[nodiscard]] PhiField newton_field(const ProblemSpec& problem,
                                    std::optional<double> m1 = std::nullopt);

/// Phi = -F(u).  Rates (c1(R), 1) where c1(R) lower-bounds the symmetric part
/// of F' on the ball.
[[nodiscard]] PhiField simple_iteration_field(const ProblemSpec& problem,
                                              std::optional<double> c1_lower = std::nullopt);

/// Phi = -[F'(u)]^T F(u).  Rates (m1^{-2}, M1).
[[nodiscard]] PhiField gradient_field(const ProblemSpec& problem,
                                      std::optional<double> m1 = std::nullopt,
                                      std::optional<double> M1 = std::nullopt);

/// Phi = -([F']^T F')^{-1} [F']^T F(u).  Rates (1, m1^2 M1).
[[nodiscard]] PhiField gauss_newton_field(const ProblemSpec& problem,
                                          std::optional<double> m1 = std::nullopt,
                                          std::optional<double> M1 = std::nullopt);

/// Phi = -[F'(u0)]^{-1} F(u); the factorization at u0 is computed once.
/// Rates (1/2, m0), valid on the ball of radius (2 M2 m0)^{-1}.
[[nodiscard]] PhiField modified_newton_field(const ProblemSpec& problem, const Vector& u0,
                                             std::optional<double> m0 = std::nullopt);

/// General descent field Phi = -(f / (f',h)) h for a nonnegative functional f.
[[nodiscard]] PhiField descent_field(std::function<double(const Vector&)> functional_f,
                                     std::function<Vector(const Vector&)> gradient_f,
                                     std::function<Vector(const Vector&)> direction_h,
                                     std::optional<DerivedRates> rates = std::nullopt);

/// Canonical descent choice f = ||F||^2, h = f' = 2 [F']^T F.  Rates (1/2, m1/2).
[[nodiscard]] PhiField descent_field_canonical(const ProblemSpec& problem,
                                               std::optional<double> m1 = std::nullopt);

}  // namespace dsm::fields
