#pragma once

// Core domain types shared by every module: problems, balls, rate functions,
// trajectories and certificates.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dsm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Floor for relative-tolerance denominators so that 0/0 never occurs.
inline constexpr double kNormFloor = 1e-30;

[[nodiscard]] inline double vector_norm(const Vector& u) { return u.norm(); }

[[nodiscard]] inline double rel_den(double x) {
    return std::max(std::abs(x), kNormFloor);
}

// =============================================================================
// Errors
// =============================================================================

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// F evaluated to a non-finite value at a finite-difference stencil point.
class StencilFailure : public Error {
public:
    StencilFailure(int coordinate, const std::string& what)
        : Error(what), coordinate(coordinate) {}
    int coordinate;
};

class SingularJacobian : public Error {
public:
    SingularJacobian(const std::string& what, double condition_estimate)
        : Error(what), condition_estimate(condition_estimate) {}
    double condition_estimate;
};

class SingularNormalEquations : public Error {
public:
    using Error::Error;
};

class DegenerateDescentDirection : public Error {
public:
    using Error::Error;
};

class DivergentTailIntegral : public Error {
public:
    using Error::Error;
};

class HorizonNotReached : public Error {
public:
    using Error::Error;
};

class InconsistentRightHandSide : public Error {
public:
    using Error::Error;
};

class IncompleteCertificate : public Error {
public:
    using Error::Error;
};

/// Wraps an error thrown by a field evaluation inside the integrator loop,
/// carrying the time at which it happened.
class FieldEvaluationFailure : public Error {
public:
    FieldEvaluationFailure(double time, const std::string& what)
        : Error(what), time(time) {}
    double time;
};

// =============================================================================
// Problems and balls
// =============================================================================

/// Trust region B = {u : ||u - center|| <= radius}.
struct Ball {
    Vector center;
    double radius = 1.0;

    [[nodiscard]] bool contains(const Vector& u) const {
        return (u - center).norm() <= radius;
    }
};

/// A square nonlinear system F(u) = 0 together with its Jacobian (analytic
/// when available, central finite differences otherwise).
struct ProblemSpec {
    std::string name;
    int dim = 0;
    std::function<Vector(const Vector&)> F;
    std::optional<std::function<Matrix(const Vector&)>> jacobian;
    // Per-coordinate finite-difference step is fd_step * (1 + ||u||).
    double fd_step = 1e-6;
    std::optional<Vector> oracle_root;

    [[nodiscard]] Vector evaluate(const Vector& u) const;
    [[nodiscard]] Matrix jacobian_at(const Vector& u) const;
    [[nodiscard]] double residual(const Vector& u) const { return evaluate(u).norm(); }
};

/// Central-difference Jacobian of an arbitrary vector map.
[[nodiscard]] Matrix finite_difference_jacobian(
    const std::function<Vector(const Vector&)>& f, const Vector& u, double step_scale);

[[nodiscard]] Matrix finite_difference_jacobian(const ProblemSpec& problem, const Vector& u);

// =============================================================================
// Rate functions g1, g2
// =============================================================================

/// The pair of positive rate functions appearing in the decay conditions,
/// with exponents a (residual power) and b (modified growth bound).
struct RateFunctions {
    std::function<double(double)> g1;
    std::function<double(double)> g2;
    double a = 2.0;
    double b = 1.0;
    std::optional<std::function<double(double)>> integral_g1;      // t -> int_0^t g1
    std::optional<std::function<double(double)>> tail_integral_G;  // t -> int_t^inf G
};

/// Serializable closed-form rate: constant c, power law c*(1+t)^p or
/// exponential c*e^{p t}.  These are the shapes the CLI config accepts.
struct NamedRate {
    enum class Kind { Constant, PowerLaw, Exponential };
    Kind kind = Kind::Constant;
    double c = 1.0;
    double p = 0.0;

    [[nodiscard]] double value(double t) const;
    [[nodiscard]] double antiderivative(double t) const;  // int_0^t
};

[[nodiscard]] RateFunctions make_rates(const NamedRate& g1, const NamedRate& g2,
                                       double a = 2.0, double b = 1.0);
[[nodiscard]] RateFunctions constant_rates(double c1, double c2, double a = 2.0);

// =============================================================================
// Trajectories
// =============================================================================

enum class ExitReason {
    ResidualConverged,
    FiniteHorizonReached,
    LeftBall,
    MaxTimeReached,
    StepFailure,
};

[[nodiscard]] const char* to_string(ExitReason reason);
[[nodiscard]] std::optional<ExitReason> exit_reason_from_string(std::string_view name);

/// Time-stamped states with residual norms; the output of an integration run.
struct Trajectory {
    std::vector<double> times;       // strictly increasing, starts at 0
    std::vector<Vector> states;
    std::vector<double> residuals;   // residual norm at each state
    ExitReason exit_reason = ExitReason::MaxTimeReached;

    [[nodiscard]] std::size_t size() const { return times.size(); }
    [[nodiscard]] const Vector& final_state() const { return states.back(); }
    [[nodiscard]] double final_time() const { return times.back(); }
    [[nodiscard]] double final_residual() const { return residuals.back(); }
};

// =============================================================================
// Certificates
// =============================================================================

/// Machine-checked record of the sufficient conditions for a given problem,
/// ball and method, with numeric margins.
struct Certificate {
    struct Check {
        std::string condition_id;
        bool satisfied = false;
        double lhs = 0.0;
        double rhs = 0.0;
        double margin = 0.0;  // rhs - lhs
    };

    std::vector<Check> checks;
    std::map<std::string, double> constants;  // m1, M1, M2, m0, c1, c2, ...
    int sample_count = 0;
    std::uint64_t seed = 0;

    [[nodiscard]] bool all_satisfied() const;
    [[nodiscard]] const Check* find(std::string_view condition_id) const;
    [[nodiscard]] double constant(const std::string& key) const;  // throws IncompleteCertificate
};

[[nodiscard]] Certificate::Check make_check(std::string condition_id, double lhs, double rhs);

// =============================================================================
// Deterministic sampling
// =============================================================================

/// Low-discrepancy points inside the ball (Kronecker sequence with a seeded
/// shift, rejection into the ball).  Deterministic for a fixed seed.
[[nodiscard]] std::vector<Vector> sample_ball(const Ball& ball, int count, std::uint64_t seed);

/// Low-discrepancy unit directions, deterministic for a fixed seed.
[[nodiscard]] std::vector<Vector> sample_unit_directions(int dim, int count, std::uint64_t seed);

}  // namespace dsm
