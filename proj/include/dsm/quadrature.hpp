#pragma once

// Adaptive quadrature helpers: Gauss-Kronrod on finite intervals, and the
// operational tail rule for integrals over [t, inf) with divergence detection.

#include <functional>

namespace dsm::quad {

/// Adaptive Gauss-Kronrod 7-15 on a finite interval.
[[nodiscard]] double integrate(const std::function<double(double)>& f, double a, double b,
                               double rel_tol = 1e-12);

struct TailResult {
    double value = 0.0;
    bool divergent = false;
};

/// int_t^inf f(x) dx via the substitution x = t + s/(1-s), integrated over a
/// doubling sequence of sub-intervals in s.  Declared divergent when partial
/// integrals exceed 1e12 or the increments stop decaying.
[[nodiscard]] TailResult integrate_tail(const std::function<double(double)>& f, double t,
                                        double rel_tol = 1e-11);

}  // namespace dsm::quad
