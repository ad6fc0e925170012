#include "dsm/fields.hpp"

#include <Eigen/LU>

#include <cmath>
#include <memory>
#include <sstream>

namespace dsm::fields {

namespace {

// Beyond this condition estimate a double-precision solve carries no
// information; the Jacobian is treated as singular.
constexpr double kConditionLimit = 1e12;

std::string point_string(const Vector& u) {
    std::ostringstream os;
    os << "(" << u.transpose() << ")";
    return os.str();
}

Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& m, const Vector& u) {
    Eigen::PartialPivLU<Matrix> lu(m);
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / kConditionLimit)) {
        throw SingularJacobian("singular Jacobian at u = " + point_string(u) +
                                   " (condition estimate " + std::to_string(1.0 / rcond) + ")",
                               rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    }
    return lu;
}

}  // namespace

const char* to_string(Kind kind) {
    switch (kind) {
        case Kind::Newton: return "newton";
        case Kind::SimpleIteration: return "simple-iteration";
        case Kind::Gradient: return "gradient";
        case Kind::GaussNewton: return "gauss-newton";
        case Kind::ModifiedNewton: return "modified-newton";
        case Kind::Descent: return "descent";
        case Kind::Custom: return "custom";
    }
    return "custom";
}

std::optional<Kind> kind_from_string(std::string_view name) {
    for (Kind k : {Kind::Newton, Kind::SimpleIteration, Kind::Gradient, Kind::GaussNewton,
                   Kind::ModifiedNewton, Kind::Descent, Kind::Custom}) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

PhiField newton_field(const ProblemSpec& problem, std::optional<double> m1) {
    PhiField field;
    field.kind = Kind::Newton;
    if (m1) field.derived_rates = DerivedRates{1.0, *m1};
    field.evaluate = [problem](double, const Vector& u) -> Vector {
        const Matrix jac = problem.jacobian_at(u);
        auto lu = checked_lu(jac, u);
        return -lu.solve(problem.evaluate(u));
    };
    return field;
}

PhiField simple_iteration_field(const ProblemSpec& problem, std::optional<double> c1_lower) {
    PhiField field;
    field.kind = Kind::SimpleIteration;
    if (c1_lower) field.derived_rates = DerivedRates{*c1_lower, 1.0};
    field.evaluate = [problem](double, const Vector& u) -> Vector { return -problem.evaluate(u); };
    return field;
}

PhiField gradient_field(const ProblemSpec& problem, std::optional<double> m1,
                        std::optional<double> M1) {
    PhiField field;
    field.kind = Kind::Gradient;
    if (m1 && M1) field.derived_rates = DerivedRates{1.0 / (*m1 * *m1), *M1};
    field.evaluate = [problem](double, const Vector& u) -> Vector {
        return -(problem.jacobian_at(u).transpose() * problem.evaluate(u));
    };
    return field;
}

PhiField gauss_newton_field(const ProblemSpec& problem, std::optional<double> m1,
                            std::optional<double> M1) {
    PhiField field;
    field.kind = Kind::GaussNewton;
    if (m1 && M1) field.derived_rates = DerivedRates{1.0, *m1 * *m1 * *M1};
    field.evaluate = [problem](double, const Vector& u) -> Vector {
        const Matrix jac = problem.jacobian_at(u);
        const Matrix normal = jac.transpose() * jac;
        Eigen::PartialPivLU<Matrix> lu(normal);
        if (!(lu.rcond() > 1.0 / kConditionLimit)) {
            throw SingularNormalEquations("singular normal equations at u = " + point_string(u));
        }
        return -lu.solve(jac.transpose() * problem.evaluate(u));
    };
    return field;
}

PhiField modified_newton_field(const ProblemSpec& problem, const Vector& u0,
                               std::optional<double> m0) {
    PhiField field;
    field.kind = Kind::ModifiedNewton;
    if (m0) field.derived_rates = DerivedRates{0.5, *m0};
    auto lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(
        checked_lu(problem.jacobian_at(u0), u0));
    field.evaluate = [problem, lu](double, const Vector& u) -> Vector {
        return -lu->solve(problem.evaluate(u));
    };
    return field;
}

PhiField descent_field(std::function<double(const Vector&)> functional_f,
                       std::function<Vector(const Vector&)> gradient_f,
                       std::function<Vector(const Vector&)> direction_h,
                       std::optional<DerivedRates> rates) {
    PhiField field;
    field.kind = Kind::Descent;
    field.derived_rates = rates;
    field.evaluate = [functional_f = std::move(functional_f), gradient_f = std::move(gradient_f),
                      direction_h = std::move(direction_h)](double, const Vector& u) -> Vector {
        const double f = functional_f(u);
        if (f <= 0.0) return Vector::Zero(u.size());
        const Vector grad = gradient_f(u);
        const Vector h = direction_h(u);
        const double pairing = grad.dot(h);
        if (std::abs(pairing) < kNormFloor * (1.0 + grad.norm() * h.norm())) {
            throw DegenerateDescentDirection("descent pairing (f',h) vanished at u = " +
                                             point_string(u));
        }
        return -(f / pairing) * h;
    };
    return field;
}

PhiField descent_field_canonical(const ProblemSpec& problem, std::optional<double> m1) {
    auto functional = [problem](const Vector& u) { return problem.evaluate(u).squaredNorm(); };
    auto gradient = [problem](const Vector& u) -> Vector {
        return 2.0 * (problem.jacobian_at(u).transpose() * problem.evaluate(u));
    };
    std::optional<DerivedRates> rates;
    if (m1) rates = DerivedRates{0.5, *m1 / 2.0};
    PhiField field = descent_field(functional, gradient, gradient, rates);
    return field;
}

}  // namespace dsm::fields
