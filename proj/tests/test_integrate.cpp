#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsm/corpus.hpp"
#include "dsm/fields.hpp"
#include "dsm/integrate.hpp"

#include <Eigen/LU>

#include <cmath>

using namespace dsm;
using integrate::IntegrationConfig;

namespace {

Vector scalar(double x) {
    Vector v(1);
    v(0) = x;
    return v;
}

// Discrete damped Newton pushed to residual 1e-14; the independent oracle for
// final-state checks.
Vector damped_newton_oracle(const ProblemSpec& problem, Vector u) {
    for (int it = 0; it < 200; ++it) {
        const Vector Fu = problem.evaluate(u);
        if (Fu.norm() <= 1e-14) break;
        const Vector step = Eigen::PartialPivLU<Matrix>(problem.jacobian_at(u)).solve(Fu);
        double damping = 1.0;
        while (damping > 1e-8 && problem.evaluate(u - damping * step).norm() >= Fu.norm()) {
            damping /= 2.0;
        }
        u -= damping * step;
    }
    return u;
}

}  // namespace

TEST_CASE("newton flow on affine-1d has the closed form 1 - e^{-t}") {
    const auto* entry = corpus::find("affine-1d");
    const auto field = fields::newton_field(*entry->problem);
    IntegrationConfig config;
    config.max_time = 1.0;
    config.residual_stop = 0.0;
    const auto traj = integrate::solve_ivp(field, *entry->problem, entry->recommended_ball, config);
    CHECK(traj.exit_reason == ExitReason::MaxTimeReached);
    CHECK(traj.final_time() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(traj.final_state()(0) - (1.0 - std::exp(-1.0))) < 1e-6);
}

TEST_CASE("simple-iteration flow on scaled-affine decays like 1 + e^{-2t}") {
    const auto* entry = corpus::find("scaled-affine");
    const auto field = fields::simple_iteration_field(*entry->problem);
    IntegrationConfig config;
    config.max_time = 3.0;
    config.residual_stop = 0.0;
    const auto traj = integrate::solve_ivp(field, *entry->problem, entry->recommended_ball, config);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        CHECK(std::abs(traj.states[i](0) - (1.0 + std::exp(-2.0 * t))) < 1e-7);
        CHECK(std::abs(traj.residuals[i] - 2.0 * std::exp(-2.0 * t)) < 2e-7);
    }
}

TEST_CASE("newton flow on twobytwo reaches the damped-Newton oracle root") {
    const auto* entry = corpus::find("twobytwo");
    const Vector oracle = damped_newton_oracle(*entry->problem, entry->recommended_ball.center);
    CHECK(entry->problem->evaluate(oracle).norm() <= 1e-14);
    // The oracle agrees with the closed-form root stored in the corpus.
    CHECK((oracle - *entry->oracle_root).norm() < 1e-12);

    const auto field = fields::newton_field(*entry->problem);
    IntegrationConfig config;
    const auto traj = integrate::solve_ivp(field, *entry->problem, entry->recommended_ball, config);
    CHECK(traj.exit_reason == ExitReason::ResidualConverged);
    CHECK((traj.final_state() - oracle).norm() < 1e-6);
}

TEST_CASE("residual-stop event is localized") {
    const auto* entry = corpus::find("affine-1d");
    const auto field = fields::newton_field(*entry->problem);
    IntegrationConfig config;
    config.residual_stop = 1e-6;
    const auto traj = integrate::solve_ivp(field, *entry->problem, entry->recommended_ball, config);
    CHECK(traj.exit_reason == ExitReason::ResidualConverged);
    CHECK(traj.final_residual() <= 1e-6 * (1.0 + 1e-6));
    // The flow residual is e^{-t}; the stop should land near t = ln(1e6).
    CHECK(std::abs(traj.final_time() - std::log(1e6)) < 1e-3);
}

TEST_CASE("ball exit is recorded at the boundary") {
    ProblemSpec p;
    p.name = "runaway";
    p.dim = 1;
    p.F = [](const Vector& u) { return scalar(u(0) - 10.0); };
    p.jacobian = [](const Vector&) {
        Matrix m(1, 1);
        m(0, 0) = 1.0;
        return m;
    };
    const Ball ball{scalar(0.0), 1.0};
    const auto field = fields::newton_field(p);
    IntegrationConfig config;
    const auto traj = integrate::solve_ivp(field, p, ball, config);
    CHECK(traj.exit_reason == ExitReason::LeftBall);
    const double final_dist = (traj.final_state() - ball.center).norm();
    CHECK(final_dist >= ball.radius * (1.0 - 1e-6));
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        CHECK((traj.states[i] - ball.center).norm() <= ball.radius * (1.0 + 1e-12));
    }
}

TEST_CASE("chattering field ends in StepFailure") {
    ProblemSpec p;
    p.name = "chatter";
    p.dim = 1;
    p.F = [](const Vector& u) { return u; };
    fields::PhiField field;
    field.kind = fields::Kind::Custom;
    field.evaluate = [](double, const Vector& u) {
        return scalar(u(0) >= 0.0 ? -1e8 : 1e8);
    };
    IntegrationConfig config;
    config.max_time = 1.0;
    config.max_steps = 20000;
    config.residual_stop = 0.0;
    const auto traj = integrate::solve_ivp(field, p, Ball{scalar(0.5), 10.0}, config);
    CHECK(traj.exit_reason == ExitReason::StepFailure);
}

TEST_CASE("horizon mode reaches exactly T and reports the residual there") {
    const auto* entry = corpus::find("affine-1d");
    const auto field = fields::newton_field(*entry->problem);
    IntegrationConfig config;
    const auto traj =
        integrate::solve_to_finite_horizon(field, *entry->problem, entry->recommended_ball, 1.0,
                                           config);
    CHECK(traj.exit_reason == ExitReason::FiniteHorizonReached);
    CHECK(traj.final_time() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(traj.final_residual() - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("zero horizon yields the single-point trajectory") {
    const auto* entry = corpus::find("affine-1d");
    const auto field = fields::newton_field(*entry->problem);
    const auto traj = integrate::solve_to_finite_horizon(field, *entry->problem,
                                                         entry->recommended_ball, 0.0, {});
    CHECK(traj.exit_reason == ExitReason::FiniteHorizonReached);
    REQUIRE(traj.size() == 1);
    CHECK(traj.times[0] == 0.0);
}

TEST_CASE("trajectory invariants: grid shape and recomputable residuals") {
    const auto* entry = corpus::find("twobytwo");
    const auto field = fields::gauss_newton_field(*entry->problem);
    IntegrationConfig config;
    config.max_time = 5.0;
    config.residual_stop = 0.0;
    const auto traj = integrate::solve_ivp(field, *entry->problem, entry->recommended_ball, config);
    REQUIRE(traj.size() >= 2);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.size() == traj.states.size());
    CHECK(traj.times.size() == traj.residuals.size());
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        CHECK(traj.times[i] < traj.times[i + 1]);
    }
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double recomputed = entry->problem->evaluate(traj.states[i]).norm();
        CHECK(std::abs(traj.residuals[i] - recomputed) <=
              1e-12 * std::max(traj.residuals[i], 1e-30));
    }
}

TEST_CASE("self-convergence under tolerance halving") {
    for (const char* name : {"affine-1d", "cubic-monotone", "twobytwo"}) {
        const auto* entry = corpus::find(name);
        const auto field = fields::newton_field(*entry->problem);
        IntegrationConfig coarse;
        coarse.max_time = 8.0;
        coarse.residual_stop = 0.0;
        IntegrationConfig fine = coarse;
        fine.rel_tol /= 2.0;
        fine.abs_tol /= 2.0;
        const auto a = integrate::solve_ivp(field, *entry->problem, entry->recommended_ball, coarse);
        const auto b = integrate::solve_ivp(field, *entry->problem, entry->recommended_ball, fine);
        const double diff = (a.final_state() - b.final_state()).norm();
        INFO("entry ", name);
        CHECK(diff < 10.0 * coarse.rel_tol * (1.0 + a.final_state().norm()));
    }
}

TEST_CASE("certified flows have non-increasing residuals") {
    const auto* entry = corpus::find("cubic-monotone");
    for (auto make : {fields::newton_field, fields::simple_iteration_field}) {
        const auto field = make(*entry->problem, std::nullopt);
        IntegrationConfig config;
        config.max_time = 6.0;
        config.residual_stop = 0.0;
        const auto traj =
            integrate::solve_ivp(field, *entry->problem, entry->recommended_ball, config);
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
            CHECK(traj.residuals[i + 1] <= traj.residuals[i] + 1e-9);
        }
    }
}

TEST_CASE("already-converged start returns a single-point trajectory") {
    const auto* entry = corpus::find("affine-1d");
    const auto field = fields::newton_field(*entry->problem);
    IntegrationConfig config;
    const auto traj = integrate::solve_ivp(field, *entry->problem,
                                           Ball{scalar(1.0), 1.0}, config);
    CHECK(traj.exit_reason == ExitReason::ResidualConverged);
    CHECK(traj.size() == 1);
}

TEST_CASE("config validation rejects bad values") {
    IntegrationConfig config;
    config.rel_tol = -1.0;
    CHECK_THROWS_AS(config.validate(), Error);
    config = IntegrationConfig{};
    config.record_every = 100.0;  // exceeds max_time = 50
    CHECK_THROWS_AS(config.validate(), Error);
}
