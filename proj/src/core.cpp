#include "dsm/core.hpp"

#include <cmath>

namespace dsm {

// =============================================================================
// ProblemSpec
// =============================================================================

Vector ProblemSpec::evaluate(const Vector& u) const {
    if (u.size() != dim) {
        throw Error("problem '" + name + "': input dimension " +
                    std::to_string(u.size()) + " != " + std::to_string(dim));
    }
    Vector out = F(u);
    if (out.size() != dim) {
        throw Error("problem '" + name + "': F output dimension " +
                    std::to_string(out.size()) + " != " + std::to_string(dim));
    }
    return out;
}

Matrix ProblemSpec::jacobian_at(const Vector& u) const {
    if (jacobian) {
        return (*jacobian)(u);
    }
    return finite_difference_jacobian(*this, u);
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                  const Vector& u, double step_scale) {
    const double h = step_scale * (1.0 + u.norm());
    const auto n = u.size();
    Matrix jac;
    Vector x = u;
    for (Eigen::Index j = 0; j < n; ++j) {
        x(j) = u(j) + h;
        Vector fp = f(x);
        x(j) = u(j) - h;
        Vector fm = f(x);
        x(j) = u(j);
        if (!fp.allFinite() || !fm.allFinite()) {
            throw StencilFailure(static_cast<int>(j),
                                 "non-finite F value at finite-difference stencil, coordinate " +
                                     std::to_string(j));
        }
        if (jac.size() == 0) jac.resize(fp.size(), n);
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

Matrix finite_difference_jacobian(const ProblemSpec& problem, const Vector& u) {
    if (!u.allFinite()) throw Error("finite_difference_jacobian: non-finite input point");
    if (problem.fd_step <= 0.0) throw Error("finite_difference_jacobian: fd_step must be positive");
    return finite_difference_jacobian([&](const Vector& x) { return problem.evaluate(x); }, u,
                                      problem.fd_step);
}

// =============================================================================
// Rate functions
// =============================================================================

double NamedRate::value(double t) const {
    switch (kind) {
        case Kind::Constant: return c;
        case Kind::PowerLaw: return c * std::pow(1.0 + t, p);
        case Kind::Exponential: return c * std::exp(p * t);
    }
    return c;
}

double NamedRate::antiderivative(double t) const {
    switch (kind) {
        case Kind::Constant: return c * t;
        case Kind::PowerLaw:
            if (p == -1.0) return c * std::log1p(t);
            return c * (std::pow(1.0 + t, p + 1.0) - 1.0) / (p + 1.0);
        case Kind::Exponential:
            if (p == 0.0) return c * t;
            return c * std::expm1(p * t) / p;
    }
    return c * t;
}

RateFunctions make_rates(const NamedRate& g1, const NamedRate& g2, double a, double b) {
    RateFunctions rates;
    rates.a = a;
    rates.b = b;
    rates.g1 = [g1](double t) { return g1.value(t); };
    rates.g2 = [g2](double t) { return g2.value(t); };
    rates.integral_g1 = [g1](double t) { return g1.antiderivative(t); };

    // Closed-form tails exist when G(x) = g2(x) e^{-int g1} is an exponential.
    if (g1.kind == NamedRate::Kind::Constant) {
        const double c1 = g1.c;
        if (g2.kind == NamedRate::Kind::Constant && c1 > 0.0) {
            const double c2 = g2.c;
            rates.tail_integral_G = [c1, c2](double t) { return (c2 / c1) * std::exp(-c1 * t); };
        } else if (g2.kind == NamedRate::Kind::Exponential && c1 - g2.p > 0.0) {
            const double c2 = g2.c;
            const double rate = c1 - g2.p;
            rates.tail_integral_G = [c2, rate](double t) { return (c2 / rate) * std::exp(-rate * t); };
        }
    }
    return rates;
}

RateFunctions constant_rates(double c1, double c2, double a) {
    return make_rates(NamedRate{NamedRate::Kind::Constant, c1, 0.0},
                      NamedRate{NamedRate::Kind::Constant, c2, 0.0}, a);
}

// =============================================================================
// Trajectory / Certificate
// =============================================================================

const char* to_string(ExitReason reason) {
    switch (reason) {
        case ExitReason::ResidualConverged: return "ResidualConverged";
        case ExitReason::FiniteHorizonReached: return "FiniteHorizonReached";
        case ExitReason::LeftBall: return "LeftBall";
        case ExitReason::MaxTimeReached: return "MaxTimeReached";
        case ExitReason::StepFailure: return "StepFailure";
    }
    return "Unknown";
}

std::optional<ExitReason> exit_reason_from_string(std::string_view name) {
    for (ExitReason r : {ExitReason::ResidualConverged, ExitReason::FiniteHorizonReached,
                         ExitReason::LeftBall, ExitReason::MaxTimeReached,
                         ExitReason::StepFailure}) {
        if (name == to_string(r)) return r;
    }
    return std::nullopt;
}

bool Certificate::all_satisfied() const {
    for (const auto& check : checks) {
        if (!check.satisfied) return false;
    }
    return true;
}

const Certificate::Check* Certificate::find(std::string_view condition_id) const {
    for (const auto& check : checks) {
        if (check.condition_id == condition_id) return &check;
    }
    return nullptr;
}

double Certificate::constant(const std::string& key) const {
    auto it = constants.find(key);
    if (it == constants.end() || std::isnan(it->second)) {
        throw IncompleteCertificate("certificate is missing constant '" + key + "'");
    }
    return it->second;
}

Certificate::Check make_check(std::string condition_id, double lhs, double rhs) {
    Certificate::Check check;
    check.condition_id = std::move(condition_id);
    check.lhs = lhs;
    check.rhs = rhs;
    check.margin = rhs - lhs;
    check.satisfied = lhs <= rhs;
    return check;
}

// =============================================================================
// Deterministic low-discrepancy sampling
// =============================================================================

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Kronecker (R_d) sequence steps: powers of the generalized golden ratio.
std::vector<double> kronecker_alphas(int dim) {
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) {
        phi = std::pow(1.0 + phi, 1.0 / (dim + 1.0));
    }
    std::vector<double> alphas(dim);
    double g = 1.0 / phi;
    for (int i = 0; i < dim; ++i) {
        alphas[i] = g;
        g /= phi;
    }
    return alphas;
}

std::vector<Vector> kronecker_cube(int dim, int count, std::uint64_t seed) {
    const auto alphas = kronecker_alphas(dim);
    std::uint64_t state = seed;
    Vector shift(dim);
    for (int i = 0; i < dim; ++i) shift(i) = unit_double(splitmix64(state));

    std::vector<Vector> points;
    points.reserve(count);
    Vector x(dim);
    for (int n = 0; static_cast<int>(points.size()) < count; ++n) {
        for (int i = 0; i < dim; ++i) {
            double v = shift(i) + (n + 1) * alphas[i];
            x(i) = v - std::floor(v);
        }
        points.push_back(x);
    }
    return points;
}

}  // namespace

std::vector<Vector> sample_ball(const Ball& ball, int count, std::uint64_t seed) {
    if (count <= 0) return {};
    const int dim = static_cast<int>(ball.center.size());
    const auto alphas = kronecker_alphas(dim);
    std::uint64_t state = seed;
    Vector shift(dim);
    for (int i = 0; i < dim; ++i) shift(i) = unit_double(splitmix64(state));

    std::vector<Vector> points;
    points.reserve(count);
    Vector x(dim);
    for (long n = 0; static_cast<int>(points.size()) < count; ++n) {
        double norm2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            double v = shift(i) + (n + 1) * alphas[i];
            v -= std::floor(v);
            x(i) = 2.0 * v - 1.0;
            norm2 += x(i) * x(i);
        }
        if (norm2 > 1.0) continue;  // reject cube corners
        points.push_back(ball.center + ball.radius * x);
    }
    return points;
}

std::vector<Vector> sample_unit_directions(int dim, int count, std::uint64_t seed) {
    std::vector<Vector> dirs;
    dirs.reserve(count);
    for (const Vector& p : kronecker_cube(dim, 4 * count + 16, seed ^ 0xD1F3C7A9ULL)) {
        Vector v = 2.0 * p.array() - 1.0;
        const double n = v.norm();
        if (n < 0.1 || n > 1.0) continue;
        dirs.push_back(v / n);
        if (static_cast<int>(dirs.size()) == count) break;
    }
    // Pathologically unlucky rejection: fall back to coordinate directions.
    for (int i = 0; static_cast<int>(dirs.size()) < count; ++i) {
        Vector e = Vector::Zero(dim);
        e(i % dim) = 1.0;
        dirs.push_back(e);
    }
    return dirs;
}

}  // namespace dsm
