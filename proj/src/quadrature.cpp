#include "dsm/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace dsm::quad {

namespace {
constexpr double kDivergenceCap = 1e12;
constexpr int kMaxDoublings = 60;
}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 15>::integrate(f, a, b, 17, rel_tol);
}

TailResult integrate_tail(const std::function<double(double)>& f, double t, double rel_tol) {
    // Transformed integrand on s in [0,1): f(t + s/(1-s)) / (1-s)^2.
    auto transformed = [&f, t](double s) {
        const double om = 1.0 - s;
        const double x = t + s / om;
        if (!std::isfinite(x)) return 0.0;
        return f(x) / (om * om);
    };

    TailResult result;
    double total = 0.0;
    double prev_increment = std::numeric_limits<double>::infinity();
    int slow_decay_streak = 0;
    int converged_streak = 0;
    double s_prev = 0.0;
    for (int k = 1; k <= kMaxDoublings; ++k) {
        const double s_next = 1.0 - std::ldexp(1.0, -k);
        const double increment = integrate(transformed, s_prev, s_next, rel_tol);
        total += increment;
        s_prev = s_next;

        if (!std::isfinite(total) || std::abs(total) > kDivergenceCap) {
            result.divergent = true;
            result.value = total;
            return result;
        }
        const double floor = rel_tol * std::max(std::abs(total), 1e-300);
        if (std::abs(increment) <= floor) {
            if (++converged_streak >= 2) {
                result.value = total;
                return result;
            }
        } else {
            converged_streak = 0;
        }
        // Increments that refuse to decay signal log- or polynomial-type
        // divergence long before the magnitude cap can trigger.
        if (k > 4 && std::abs(increment) > 0.95 * std::abs(prev_increment) &&
            std::abs(increment) > floor) {
            if (++slow_decay_streak >= 5) {
                result.divergent = true;
                result.value = total;
                return result;
            }
        } else {
            slow_decay_streak = 0;
        }
        prev_increment = increment;
    }
    result.divergent = true;
    result.value = total;
    return result;
}

}  // namespace dsm::quad
