#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "udn/errors.hpp"
#include "udn/pathloss.hpp"
#include "udn/quadrature.hpp"

// Shared machinery for Campbell-type radial integrals int f(u) du over
// [a, inf), where f couples the path-loss model with the 2D->3D distance
// w = sqrt(u^2 + L^2). Panels are split at the segment-break abscissae and at
// u = L (scale knee); the far tail is added in closed form from a power-law
// bound instead of being truncated.

namespace udn::detail {

// Abscissae in u at which the radial integrand changes segment, plus the
// scale knee at u = L. Strictly increasing, all > a.
inline std::vector<double> radial_knots(const PathLossModel& model, double height_km,
                                        double a) {
    std::vector<double> knots{a};
    auto push = [&](double u) {
        if (u > knots.back() * (1.0 + 1e-14) && u > a) knots.push_back(u);
    };
    std::vector<double> candidates;
    if (height_km > 0.0) candidates.push_back(height_km);
    for (const auto& s : model.segments())
        if (std::isfinite(s.upper_break) && s.upper_break > height_km)
            candidates.push_back(std::sqrt(s.upper_break * s.upper_break -
                                           height_km * height_km));
    std::sort(candidates.begin(), candidates.end());
    for (double u : candidates) push(u);
    return knots;
}

// Verify the outermost segment's exponents support a convergent radial tail.
inline void require_convergent_tail(const PathLossModel& model, const char* who) {
    const PathLossSegment& last = model.segments().back();
    if (!(last.alpha_nlos > 2.0) || !(last.alpha_los > 2.0))
        throw model_error(std::string(who) +
                          ": outermost path-loss exponents must exceed 2 for the "
                          "semi-infinite integral to converge");
}

// Integrate f over [knots.front(), inf). `tail_bound(R)` must upper-bound
// int_R^inf f for any R >= max(knots.back(), last finite break) and be
// asymptotically tight; it is added in closed form once it is below
// `spec.truncation_tail` of the total.
template <class F, class TailBound>
IntegralResult semi_infinite_radial(const F& f, std::vector<double> knots,
                                    double min_tail_start, const TailBound& tail_bound,
                                    const QuadratureSpec& spec) {
    IntegralResult acc = integrate_panels(f, knots, spec);
    double r = std::max(knots.back(), min_tail_start);
    if (r > knots.back()) {
        const IntegralResult seg = integrate(f, knots.back(), r, spec);
        acc.value += seg.value;
        acc.abs_error += seg.abs_error;
    }
    for (int i = 0; i < 200; ++i) {
        const double bound = tail_bound(r);
        if (bound <= spec.truncation_tail * (std::fabs(acc.value) + bound)) {
            acc.value += bound;
            acc.abs_error += spec.truncation_tail * std::fabs(acc.value);
            return acc;
        }
        const IntegralResult seg = integrate(f, r, 2.0 * r, spec);
        acc.value += seg.value;
        acc.abs_error += seg.abs_error;
        r *= 2.0;
    }
    throw numerical_error("semi-infinite integral: tail did not fall below the "
                          "truncation threshold within 200 doublings (last R = " +
                          std::to_string(r) + ")");
}

// int_a^inf mean_path_gain(sqrt(u^2+L^2)) * u du. The density / power
// prefactors of Campbell's formula are applied by callers.
inline IntegralResult mean_gain_radial_integral(const PathLossModel& model,
                                                double height_km, double a,
                                                const QuadratureSpec& spec) {
    require_convergent_tail(model, "mean interference");
    const PathLossSegment& last = model.segments().back();

    auto f = [&](double u) {
        const double w = std::hypot(u, height_km);
        if (w <= 0.0) return 0.0;
        return mean_path_gain(model, w) * u;
    };
    // For u >= R in the last segment: w >= u, both gains decreasing, and the
    // LoS weight is bounded by its value at the inner edge of the tail.
    auto tail_bound = [&](double r) {
        const double w_lo = std::hypot(r, height_km);
        const double p_los = last.los_prob.eval(w_lo);
        const double nlos = last.a_nlos * std::pow(r, 2.0 - last.alpha_nlos) /
                            (last.alpha_nlos - 2.0);
        const double los = p_los >= kLosProbFloor
                               ? p_los * last.a_los * std::pow(r, 2.0 - last.alpha_los) /
                                     (last.alpha_los - 2.0)
                               : 0.0;
        return nlos + los;
    };

    double last_break_u = a;
    for (const auto& s : model.segments())
        if (std::isfinite(s.upper_break)) last_break_u = std::max(last_break_u, s.upper_break);
    const double min_tail_start = std::max({last_break_u, height_km, 1e-3});

    return semi_infinite_radial(f, radial_knots(model, height_km, a), min_tail_start,
                                tail_bound, spec);
}

} // namespace udn::detail
