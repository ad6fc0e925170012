#include "dsm/audit.hpp"

#include "dsm/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsm::audit {

namespace {

constexpr double kSafetyFactor = 1.05;
constexpr double kHorizonRelTol = 1e-10;

double integral_g1(const RateFunctions& rates, double t) {
    if (rates.integral_g1) return (*rates.integral_g1)(t);
    return quad::integrate(rates.g1, 0.0, t);
}

double operator_norm(const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace

Certificate estimate_constants(const ProblemSpec& problem, const Ball& ball, int samples,
                               std::uint64_t seed) {
    if (samples < 100) throw Error("estimate_constants requires at least 100 samples");

    Certificate cert;
    cert.sample_count = samples;
    cert.seed = seed;

    const double inf = std::numeric_limits<double>::infinity();
    double m1 = 0.0, M1 = 0.0, M2 = 0.0;
    double c1 = inf;

    auto points = sample_ball(ball, samples, seed);
    points.push_back(ball.center);
    const int dim = static_cast<int>(ball.center.size());
    const auto directions = sample_unit_directions(dim, std::min(2 * dim + 2, 8), seed + 1);

    for (const Vector& u : points) {
        const Matrix jac = problem.jacobian_at(u);
        Eigen::JacobiSVD<Matrix> svd(jac);
        const double sigma_max = svd.singularValues()(0);
        const double sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
        M1 = std::max(M1, sigma_max);
        m1 = std::max(m1, sigma_min > 0.0 ? 1.0 / sigma_min : inf);

        const Matrix sym = 0.5 * (jac + jac.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
        c1 = std::min(c1, eig.eigenvalues()(0));

        const double eps = 1e-4 * (1.0 + u.norm());
        for (const Vector& v : directions) {
            const Matrix jac_shift = problem.jacobian_at(u + eps * v);
            M2 = std::max(M2, operator_norm(jac_shift - jac) / eps);
        }
    }

    const Matrix jac0 = problem.jacobian_at(ball.center);
    Eigen::JacobiSVD<Matrix> svd0(jac0);
    const double sigma0 = svd0.singularValues()(svd0.singularValues().size() - 1);
    const double m0 = sigma0 > 0.0 ? 1.0 / sigma0 : inf;

    cert.constants["m1"] = m1 * kSafetyFactor;
    cert.constants["M1"] = M1 * kSafetyFactor;
    cert.constants["M2"] = M2 * kSafetyFactor;
    cert.constants["m0"] = m0 * kSafetyFactor;
    cert.constants["c1"] = c1 / kSafetyFactor;  // lower bound: deflate instead
    return cert;
}

Certificate::Check check_ball_condition(double g0, const RateFunctions& rates, const Ball& ball) {
    double total_G;
    if (rates.tail_integral_G) {
        total_G = (*rates.tail_integral_G)(0.0);
    } else {
        auto G = [&rates](double x) { return rates.g2(x) * std::exp(-integral_g1(rates, x)); };
        const auto tail = quad::integrate_tail(G, 0.0);
        if (tail.divergent) {
            throw DivergentTailIntegral("int_0^inf G diverges; the ball condition cannot hold");
        }
        total_G = tail.value;
    }
    return make_check("1.7", g0 * total_G, ball.radius);
}

Certificate::Check check_method_condition(fields::Kind kind, const Certificate& certificate,
                                          double g0, double R) {
    using fields::Kind;
    switch (kind) {
        case Kind::Newton:
        case Kind::Descent:
            return make_check("3.4", certificate.constant("m1") * g0, R);
        case Kind::SimpleIteration: {
            const double c1 = certificate.constant("c1");
            const double lhs =
                c1 > 0.0 ? g0 / c1 : std::numeric_limits<double>::infinity();
            return make_check("3.5", lhs, R);
        }
        case Kind::Gradient: {
            const double m1 = certificate.constant("m1");
            return make_check("3.6", certificate.constant("M1") * m1 * m1 * g0, R);
        }
        case Kind::GaussNewton: {
            const double m1 = certificate.constant("m1");
            return make_check("3.7", certificate.constant("M1") * m1 * m1 * g0, R);
        }
        case Kind::ModifiedNewton: {
            const double m0 = certificate.constant("m0");
            return make_check("3.8", 4.0 * m0 * m0 * certificate.constant("M2") * g0, 1.0);
        }
        case Kind::Custom:
            break;
    }
    throw IncompleteCertificate("no method condition for custom fields");
}

double modified_newton_radius(const Certificate& certificate) {
    const double m0 = certificate.constant("m0");
    const double M2 = std::max(certificate.constant("M2"), kNormFloor);
    return 1.0 / (2.0 * M2 * m0);
}

double residual_envelope(const RateFunctions& rates, double g0, double t) {
    if (g0 < 0.0) throw Error("residual_envelope: g0 must be nonnegative");
    if (rates.a <= 0.0) throw Error("residual_envelope: exponent a must be positive");
    if (g0 == 0.0) return 0.0;
    const double I = integral_g1(rates, t);
    const double a = rates.a;
    if (a == 2.0) {
        return g0 * std::exp(-I);
    }
    if (a < 2.0) {
        const double base = std::pow(g0, 2.0 - a) - (2.0 - a) * I;
        if (base <= 0.0) return 0.0;
        return std::pow(base, 1.0 / (2.0 - a));
    }
    const double base = std::pow(g0, -(a - 2.0)) + (a - 2.0) * I;
    return std::pow(base, 1.0 / (2.0 - a));
}

double tail_bound(const RateFunctions& rates, double g0, double t) {
    if (rates.tail_integral_G) return g0 * (*rates.tail_integral_G)(t);
    auto G = [&rates](double x) { return rates.g2(x) * std::exp(-integral_g1(rates, x)); };
    const auto tail = quad::integrate_tail(G, t);
    if (tail.divergent) throw DivergentTailIntegral("int_t^inf G diverges");
    return g0 * tail.value;
}

double finite_time_horizon(const RateFunctions& rates, double g0) {
    if (g0 <= 0.0) throw Error("finite_time_horizon: g0 must be positive");
    if (!(rates.a > 0.0 && rates.a < 2.0)) {
        throw Error("finite_time_horizon requires 0 < a < 2");
    }
    const double target = std::pow(g0, 2.0 - rates.a) / (2.0 - rates.a);

    // Bracket on the monotone map T -> int_0^T g1; a stalling integral means
    // condition int_0^inf g1 = inf fails.
    double hi = 1.0;
    double I_hi = integral_g1(rates, hi);
    double I_prev = I_hi;
    while (I_hi < target) {
        hi *= 2.0;
        if (hi > 1e12) {
            throw HorizonNotReached("int_0^T g1 never reaches the horizon target");
        }
        I_hi = integral_g1(rates, hi);
        if (I_hi - I_prev < 1e-14 * std::max(1.0, target)) {
            throw HorizonNotReached("int_0^T g1 stalls below the horizon target");
        }
        I_prev = I_hi;
    }

    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > kHorizonRelTol * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (integral_g1(rates, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Certificate::Check check_theorem2_ball(const RateFunctions& rates, double g0, double T, double R) {
    const double integral_g2 = quad::integrate(rates.g2, 0.0, T);
    return make_check("2.T2-ball", g0 * integral_g2, R);
}

Certificate::Check check_theorem3_condition(const RateFunctions& rates, double g0, double R) {
    if (!(rates.a > 2.0)) throw Error("check_theorem3_condition requires a > 2");
    auto integrand = [&rates, g0](double s) {
        return rates.g2(s) * residual_envelope(rates, g0, s);
    };
    const auto tail = quad::integrate_tail(integrand, 0.0);
    const double lhs = tail.divergent ? std::numeric_limits<double>::infinity() : tail.value;
    return make_check("2.6", lhs, R);
}

namespace {

EnvelopeReport compare_curves(const std::vector<double>& times, const std::vector<double>& actual,
                              const std::vector<double>& envelope, const AuditOptions& options) {
    EnvelopeReport report;
    report.times = times;
    report.actual = actual;
    report.envelope = envelope;
    report.max_relative_overshoot = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double bound = envelope[i] * (1.0 + options.rel_slack) + options.abs_slack;
        if (actual[i] > bound) {
            report.violations.push_back({times[i], actual[i], bound});
        }
        report.max_relative_overshoot = std::max(
            report.max_relative_overshoot, (actual[i] - envelope[i]) / rel_den(envelope[i]));
    }
    return report;
}

}  // namespace

namespace {

// State-error tail envelope on the whole trajectory grid.  For a = 2 this is
// g0 int_t^inf G; for a > 2 it is int_t^inf g2(s) h(s) ds with h the
// algebraic residual envelope.  For a < 2 the theory makes no pointwise tail
// claim (the trajectory is constant past the horizon), so no values are
// produced.
std::optional<std::vector<double>> tail_values(const RateFunctions& rates, double g0,
                                               const std::vector<double>& times) {
    if (rates.a < 2.0) return std::nullopt;
    const std::size_t n = times.size();
    std::vector<double> values(n);
    if (rates.a == 2.0 && rates.tail_integral_G) {
        for (std::size_t i = 0; i < n; ++i) values[i] = g0 * (*rates.tail_integral_G)(times[i]);
        return values;
    }
    std::function<double(double)> integrand;
    if (rates.a == 2.0) {
        integrand = [&rates, g0](double x) {
            return g0 * rates.g2(x) * std::exp(-integral_g1(rates, x));
        };
    } else {
        integrand = [&rates, g0](double s) {
            return rates.g2(s) * residual_envelope(rates, g0, s);
        };
    }
    const auto tail_end = quad::integrate_tail(integrand, times.back());
    if (tail_end.divergent) throw DivergentTailIntegral("state tail integral diverges");
    values[n - 1] = tail_end.value;
    for (std::size_t i = n - 1; i > 0; --i) {
        values[i - 1] = values[i] + quad::integrate(integrand, times[i - 1], times[i]);
    }
    return values;
}

}  // namespace

TrajectoryAudit audit_trajectory(const Trajectory& traj, const RateFunctions& rates,
                                 const AuditOptions& options, std::optional<Vector> oracle,
                                 double noise_floor) {
    if (traj.size() == 0) throw Error("audit_trajectory: empty trajectory");
    TrajectoryAudit audit;
    const double g0 = traj.residuals.front();

    std::vector<double> envelope(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        envelope[i] = residual_envelope(rates, g0, traj.times[i]);
    }
    audit.residual = compare_curves(traj.times, traj.residuals, envelope, options);

    const auto tail = tail_values(rates, g0, traj.times);
    if (!tail) return audit;

    const bool oracle_is_final = !oracle.has_value();
    const Vector y = oracle ? *oracle : traj.final_state();
    const double final_bound = tail->back();

    std::vector<double> times, actual, bounds;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double bound = (*tail)[i];
        if (bound <= noise_floor) continue;
        // Against the converged final state the late-time comparison is noise
        // against noise; skip once the bound approaches its terminal value.
        if (oracle_is_final && bound <= 10.0 * final_bound) continue;
        times.push_back(traj.times[i]);
        actual.push_back((traj.states[i] - y).norm());
        bounds.push_back(bound);
    }
    if (!times.empty()) {
        audit.state_tail = compare_curves(times, actual, bounds, options);
    }
    return audit;
}

fields::DerivedRates derived_rates_for(fields::Kind kind, const Certificate& certificate) {
    using fields::Kind;
    switch (kind) {
        case Kind::Newton:
            return {1.0, certificate.constant("m1")};
        case Kind::SimpleIteration:
            return {certificate.constant("c1"), 1.0};
        case Kind::Gradient: {
            const double m1 = certificate.constant("m1");
            return {1.0 / (m1 * m1), certificate.constant("M1")};
        }
        case Kind::GaussNewton: {
            const double m1 = certificate.constant("m1");
            return {1.0, m1 * m1 * certificate.constant("M1")};
        }
        case Kind::ModifiedNewton:
            return {0.5, certificate.constant("m0")};
        case Kind::Descent:
            return {0.5, certificate.constant("m1") / 2.0};
        case Kind::Custom:
            break;
    }
    throw IncompleteCertificate("no derived rates for custom fields");
}

fields::PhiField make_certified_field(fields::Kind kind, const ProblemSpec& problem,
                                      const Ball& ball, const Certificate& certificate) {
    using fields::Kind;
    switch (kind) {
        case Kind::Newton:
            return fields::newton_field(problem, certificate.constant("m1"));
        case Kind::SimpleIteration:
            return fields::simple_iteration_field(problem, certificate.constant("c1"));
        case Kind::Gradient:
            return fields::gradient_field(problem, certificate.constant("m1"),
                                          certificate.constant("M1"));
        case Kind::GaussNewton:
            return fields::gauss_newton_field(problem, certificate.constant("m1"),
                                              certificate.constant("M1"));
        case Kind::ModifiedNewton:
            return fields::modified_newton_field(problem, ball.center,
                                                 certificate.constant("m0"));
        case Kind::Descent:
            return fields::descent_field_canonical(problem, certificate.constant("m1"));
        case Kind::Custom:
            break;
    }
    throw IncompleteCertificate("cannot build a certified field of custom kind");
}

Certificate::Check check_decay_inequality(const ProblemSpec& problem,
                                          const fields::PhiField& field,
                                          const RateFunctions& rates, const Ball& ball,
                                          int samples, std::uint64_t seed) {
    // Normalized excess of (F' Phi, F) + g1 ||F||^a over the round-off slack;
    // nonpositive everywhere means the decay inequality holds on the ball.
    double worst = -std::numeric_limits<double>::infinity();
    for (const Vector& u : sample_ball(ball, samples, seed)) {
        const Vector Fu = problem.evaluate(u);
        const Matrix jac = problem.jacobian_at(u);
        const Vector phi = field.evaluate(0.0, u);
        const double pairing = (jac * phi).dot(Fu);
        const double gnorm = Fu.norm();
        const double excess = pairing + rates.g1(0.0) * std::pow(gnorm, rates.a);
        worst = std::max(worst, excess / (1.0 + gnorm * gnorm));
    }
    return make_check("2.2", worst, 1e-9);
}

}  // namespace dsm::audit
