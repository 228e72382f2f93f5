#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "udn/errors.hpp"

namespace udn {

// Tolerances for the adaptive integrator and for semi-infinite tails.
struct QuadratureSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-30;
    int max_subdivisions = 4000;
    // A semi-infinite integral is cut where the closed-form bound on the
    // remaining tail drops below this fraction of the accumulated value.
    double truncation_tail = 1e-7;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(truncation_tail > 0.0))
            throw std::domain_error("QuadratureSpec: tolerances must be positive");
        if (max_subdivisions < 1)
            throw std::domain_error("QuadratureSpec: max_subdivisions must be >= 1");
    }
};

struct IntegralResult {
    double value = 0.0;
    double abs_error = 0.0;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1]. Column 0: abscissa,
// column 1: Gauss-7 weight (0 for Kronrod-only nodes), column 2: Kronrod-15 weight.
inline constexpr double kG7K15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0,               0.204432940075298},
    {0.586087235467691, 0.0,               0.169004726639267},
    {0.864864423359769, 0.0,               0.104790010322250},
    {0.991455371120813, 0.0,               0.022935322010529},
};

template <class F>
double g7k15(const F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double y0 = f(mid);
    double g7 = kG7K15[0][1] * y0;
    double k15 = kG7K15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kG7K15[i][0];
        const double yi = f(mid + dx) + f(mid - dx);
        g7 += kG7K15[i][1] * yi;
        k15 += kG7K15[i][2] * yi;
    }
    g7 *= half;
    k15 *= half;
    const double diff = 200.0 * std::fabs(g7 - k15);
    err = diff * std::sqrt(diff);
    return k15;
}

} // namespace detail

// Adaptive interval-halving Gauss-Kronrod integration over a finite interval.
// Throws numerical_error when the subdivision budget is exhausted.
template <class F>
IntegralResult integrate(const F& f, double a, double b, const QuadratureSpec& spec = {}) {
    if (a == b) return {0.0, 0.0};

    struct Interval {
        double a, b;
    };
    std::vector<Interval> stack{{a, b}};
    stack.reserve(64);

    double sum = 0.0;
    double err_sum = 0.0;
    int used = 0;
    while (!stack.empty()) {
        const Interval iv = stack.back();
        stack.pop_back();
        double err = 0.0;
        const double s = detail::g7k15(f, iv.a, iv.b, err);
        if (err < spec.rel_tol * std::fabs(s) || err < spec.abs_tol) {
            sum += s;
            err_sum += err;
            continue;
        }
        if (++used > spec.max_subdivisions)
            throw numerical_error(
                "quadrature: no convergence after " + std::to_string(spec.max_subdivisions) +
                " subdivisions on [" + std::to_string(iv.a) + ", " + std::to_string(iv.b) +
                "], local error " + std::to_string(err));
        const double mid = 0.5 * (iv.a + iv.b);
        stack.push_back({iv.a, mid});
        stack.push_back({mid, iv.b});
    }
    return {sum, err_sum};
}

// Convenience: integrate over consecutive panels [knots[0], knots[n-1]].
template <class F>
IntegralResult integrate_panels(const F& f, const std::vector<double>& knots,
                                const QuadratureSpec& spec = {}) {
    IntegralResult total;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const IntegralResult r = integrate(f, knots[i], knots[i + 1], spec);
        total.value += r.value;
        total.abs_error += r.abs_error;
    }
    return total;
}

} // namespace udn
