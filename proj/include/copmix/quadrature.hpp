// One-dimensional quadrature helpers used by the marginal tables, the
// Metropolis-Hastings integrals and the envelope certificates.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "copmix/errors.hpp"

namespace copmix {

// Composite Simpson rule on [a, b] with `intervals` subintervals
// (rounded up to the next even number).
template <typename F>
double composite_simpson(F&& f, double a, double b, int intervals) {
    if (intervals < 2) intervals = 2;
    if (intervals % 2 != 0) ++intervals;
    const double h = (b - a) / intervals;
    double sum = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) {
        sum += f(a + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
    }
    return sum * h / 3.0;
}

namespace detail {

template <typename F>
double adaptive_simpson_impl(F& f, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_impl(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson with absolute tolerance.  Handles mild integrable
// singularities by local refinement; depth is capped to keep recursion finite.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-9, int max_depth = 48) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Trapezoid rule over tabulated values on a uniform grid spanning [a, b].
inline double trapezoid_table(const std::vector<double>& values, double a, double b) {
    if (values.size() < 2) throw InvalidParameter("trapezoid_table: need at least 2 values");
    const double h = (b - a) / static_cast<double>(values.size() - 1);
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * h;
}

} // namespace copmix
