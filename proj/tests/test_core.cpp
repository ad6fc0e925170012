#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsm/core.hpp"
#include "dsm/corpus.hpp"
#include "dsm/quadrature.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>

using namespace dsm;

namespace {

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("vector_norm basics") {
    CHECK(vector_norm(vec({0, 0, 0})) == 0.0);
    CHECK(vector_norm(vec({3, 4})) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(vector_norm(vec({1, 1, 1, 1})) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("ball membership") {
    Ball ball{vec({1, 1}), 0.5};
    CHECK(ball.contains(vec({1.0, 1.2})));
    CHECK(ball.contains(vec({1.0, 1.5})));  // boundary included
    CHECK(!ball.contains(vec({1.0, 1.6})));
}

TEST_CASE("finite-difference jacobian: identity map") {
    ProblemSpec p;
    p.name = "identity";
    p.dim = 2;
    p.F = [](const Vector& u) { return u; };
    const Matrix jac = finite_difference_jacobian(p, vec({0.7, -2.0}));
    CHECK((jac - Matrix::Identity(2, 2)).norm() < 1e-9);
}

TEST_CASE("finite-difference jacobian: componentwise square") {
    ProblemSpec p;
    p.name = "square-first";
    p.dim = 2;
    p.F = [](const Vector& u) { return vec({u(0) * u(0), u(1)}); };
    const Matrix jac = finite_difference_jacobian(p, vec({3.0, 5.0}));
    Matrix expected(2, 2);
    expected << 6.0, 0.0, 0.0, 1.0;
    CHECK((jac - expected).norm() < 1e-7);
}

TEST_CASE("finite-difference jacobian agrees with the analytic cubic derivative") {
    const auto* entry = corpus::find("cubic-monotone");
    REQUIRE(entry != nullptr);
    ProblemSpec p = *entry->problem;
    p.jacobian.reset();
    const Matrix jac = finite_difference_jacobian(p, vec({1.0}));
    CHECK(std::abs(jac(0, 0) - 4.0) < 1e-6);  // analytic 1 + 3u^2 at u = 1
}

TEST_CASE("stencil failure reports the offending coordinate") {
    ProblemSpec p;
    p.name = "sqrt";
    p.dim = 2;
    p.F = [](const Vector& u) { return vec({u(0), std::sqrt(u(1))}); };
    // Central stencil at u(1) = 0 evaluates sqrt of a negative number.
    try {
        finite_difference_jacobian(p, vec({1.0, 0.0}));
        FAIL("expected StencilFailure");
    } catch (const StencilFailure& e) {
        CHECK(e.coordinate == 1);
    }
}

TEST_CASE("analytic jacobians match finite differences on the corpus") {
    for (const auto& entry : corpus::corpus()) {
        if (!entry.problem || !entry.problem->jacobian) continue;
        const auto& problem = *entry.problem;
        double worst = 0.0;
        for (const Vector& u : sample_ball(entry.recommended_ball, 100, 2024)) {
            const Matrix analytic = (*problem.jacobian)(u);
            const Matrix fd = finite_difference_jacobian(problem, u);
            worst = std::max(worst, (analytic - fd).norm() / rel_den(analytic.norm()));
        }
        INFO("entry ", entry.name);
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("LU solves invert well-conditioned matrices to 1e-10") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    for (int dim : {2, 5, 17, 50}) {
        Matrix m(dim, dim);
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) m(i, j) = coeff(rng);
        }
        m += dim * Matrix::Identity(dim, dim);  // diagonally dominant
        const Matrix inverse = Eigen::PartialPivLU<Matrix>(m).inverse();
        const double err = (inverse * m - Matrix::Identity(dim, dim)).norm() /
                           Matrix::Identity(dim, dim).norm();
        CHECK(err < 1e-10);
    }
}

TEST_CASE("certificate margin arithmetic") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> value(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        const double lhs = value(rng), rhs = value(rng);
        const auto check = make_check("x", lhs, rhs);
        CHECK(check.margin == rhs - lhs);
        CHECK(check.satisfied == (check.margin >= 0.0));
    }
    const auto equal = make_check("eq", 1.5, 1.5);
    CHECK(equal.satisfied);
    CHECK(equal.margin == 0.0);
    const auto inf_check = make_check("inf", std::numeric_limits<double>::infinity(), 1.0);
    CHECK(!inf_check.satisfied);
}

TEST_CASE("certificate constant lookup") {
    Certificate cert;
    cert.constants["m1"] = 2.0;
    CHECK(cert.constant("m1") == 2.0);
    CHECK_THROWS_AS((void)cert.constant("M2"), IncompleteCertificate);
}

TEST_CASE("named rates match quadrature on [0, 100]") {
    const NamedRate rates[] = {
        {NamedRate::Kind::Constant, 0.7, 0.0},
        {NamedRate::Kind::PowerLaw, 1.3, -0.5},
        {NamedRate::Kind::PowerLaw, 2.0, -1.0},
        {NamedRate::Kind::PowerLaw, 0.4, 1.0},
        {NamedRate::Kind::Exponential, 1.1, -0.3},
    };
    for (const auto& rate : rates) {
        for (double t : {0.5, 1.0, 10.0, 100.0}) {
            const double closed = rate.antiderivative(t);
            const double numeric =
                quad::integrate([&rate](double s) { return rate.value(s); }, 0.0, t);
            CHECK(std::abs(closed - numeric) <= 1e-8 * rel_den(closed));
        }
    }
}

TEST_CASE("constant rates provide the closed-form tail") {
    const auto rates = constant_rates(2.0, 3.0);
    REQUIRE(rates.tail_integral_G.has_value());
    CHECK((*rates.tail_integral_G)(0.0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK((*rates.tail_integral_G)(1.0) ==
          doctest::Approx(1.5 * std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("ball sampling is deterministic, seed-sensitive and inside the ball") {
    const Ball ball{vec({1.0, -2.0, 0.5}), 1.7};
    const auto a = sample_ball(ball, 200, 42);
    const auto b = sample_ball(ball, 200, 42);
    const auto c = sample_ball(ball, 200, 43);
    REQUIRE(a.size() == 200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(ball.contains(a[i]));
        CHECK(a[i] == b[i]);
    }
    bool identical = true;
    for (std::size_t i = 0; i < a.size(); ++i) identical = identical && a[i] == c[i];
    CHECK(!identical);
}

TEST_CASE("unit directions have unit norm") {
    for (const Vector& v : sample_unit_directions(4, 32, 9)) {
        CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("tail quadrature: closed forms and divergence detection") {
    // int_1^inf e^{-2x} dx = e^{-2}/2
    const auto decay = quad::integrate_tail([](double x) { return std::exp(-2.0 * x); }, 1.0);
    CHECK(!decay.divergent);
    CHECK(decay.value == doctest::Approx(std::exp(-2.0) / 2.0).epsilon(1e-9));

    // int_t^inf (1+x)^{-2} dx = 1/(1+t)
    const auto algebraic =
        quad::integrate_tail([](double x) { return std::pow(1.0 + x, -2.0); }, 3.0);
    CHECK(!algebraic.divergent);
    CHECK(algebraic.value == doctest::Approx(0.25).epsilon(1e-9));

    // harmonic tail diverges (logarithmically)
    const auto harmonic = quad::integrate_tail([](double x) { return 1.0 / (1.0 + x); }, 0.0);
    CHECK(harmonic.divergent);

    // constant integrand diverges (hits the magnitude cap)
    const auto constant = quad::integrate_tail([](double) { return 1.0; }, 0.0);
    CHECK(constant.divergent);
}
