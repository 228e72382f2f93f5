#pragma once

#include <cmath>
#include <string>

#include "udn/deployment.hpp"
#include "udn/detail/campbell.hpp"
#include "udn/errors.hpp"
#include "udn/pathloss.hpp"
#include "udn/quadrature.hpp"

// Closed-form asymptotics of the coverage probability in the dense limit:
// the interference Laplace functional over the active-BS field, the coverage
// limit it yields, its power-law decomposition in the UE density, and a
// finite-density approximation that swaps the UE density for the active-BS
// density.

namespace udn {

struct PowerLawFactors {
    double c = 1.0; // noise factor, exp(-P_N s)
    double g = 1.0; // per-unit-UE-density Laplace base
};

namespace detail {

struct LaplaceExponent {
    double integral = 0.0; // radial integral before the -2*pi*density factor
    double abs_error = 0.0;
};

// Radial integral of the Laplace exponent at transform variable s:
//   int_0^inf [ Pr(w) u / (1 + 1/(s P zetaL(w))) +
//               (1-Pr(w)) u / (1 + 1/(s P zetaNL(w))) ] du,  w = sqrt(u^2+L^2).
inline LaplaceExponent laplace_exponent_integral(double s, const PathLossModel& model,
                                                 double height_km, double tx_power,
                                                 const QuadratureSpec& quad) {
    require_convergent_tail(model, "laplace transform");
    const double sp = s * tx_power;
    const PathLossSegment& last = model.segments().back();

    auto f = [&](double u) {
        const double w = std::hypot(u, height_km);
        if (w <= 0.0) return 0.0;
        const PathLossSegment& seg = model.segment_for(w);
        const double p = seg.los_prob.eval(w);
        const double xl = sp * seg.gain_los(w);
        const double xn = sp * seg.gain_nlos(w);
        return u * (p * xl / (1.0 + xl) + (1.0 - p) * xn / (1.0 + xn));
    };
    // u * x/(1+x) <= s P zeta(u) u and w >= u in the tail.
    auto tail_bound = [&](double r) {
        const double w_lo = std::hypot(r, height_km);
        const double p_los = last.los_prob.eval(w_lo);
        const double nlos =
            sp * last.a_nlos * std::pow(r, 2.0 - last.alpha_nlos) / (last.alpha_nlos - 2.0);
        const double los = p_los >= kLosProbFloor
                               ? p_los * sp * last.a_los *
                                     std::pow(r, 2.0 - last.alpha_los) / (last.alpha_los - 2.0)
                               : 0.0;
        return nlos + los;
    };

    double last_break_u = 0.0;
    for (const auto& seg : model.segments())
        if (std::isfinite(seg.upper_break))
            last_break_u = std::max(last_break_u, seg.upper_break);
    const double min_tail_start = std::max({last_break_u, height_km, 1e-3});

    const IntegralResult r = semi_infinite_radial(f, radial_knots(model, height_km, 0.0),
                                                  min_tail_start, tail_bound, quad);
    return {r.value, r.abs_error};
}

// First-piece LoS gain at the height offset; the dense-limit serving link is
// pinned there. The regime assumes the offset sits inside the first piece.
inline double first_piece_los_gain(const PathLossModel& model, double height_km) {
    if (!(height_km > 0.0))
        throw std::domain_error("analytic: height must be positive in the dense limit");
    if (height_km > model.first_break())
        warn("height offset " + std::to_string(height_km) +
             " km exceeds the first path-loss break; first-piece LoS gain is "
             "extrapolated");
    return model.segments().front().gain_los(height_km);
}

} // namespace detail

// E[exp(-s I)] for the shot-noise interference of an HPPP of active BSs with
// the given density, unit-mean exponential fading on every branch. Returns a
// value in (0, 1].
inline double laplace_interference(double s, double density, const PathLossModel& model,
                                   double height_km, double tx_power,
                                   const QuadratureSpec& quad = {}) {
    if (s < 0.0) throw std::domain_error("laplace_interference: s must be >= 0");
    if (density < 0.0) throw std::domain_error("laplace_interference: density must be >= 0");
    if (s == 0.0 || density == 0.0) return 1.0;
    const auto e = detail::laplace_exponent_integral(s, model, height_km, tx_power, quad);
    return std::exp(-2.0 * M_PI * density * e.integral);
}

// Coverage probability in the lambda -> infinity limit: the serving link sits
// at the height offset on the first-piece LoS law and the interferer density
// converges to the UE density. Independent of lambda by construction.
inline double coverage_limit(const NetworkParams& params, const PathLossModel& model,
                             double gamma, const QuadratureSpec& quad = {}) {
    params.validate();
    if (!(gamma > 0.0)) throw std::domain_error("coverage_limit: gamma must be positive");
    const double signal_gain = detail::first_piece_los_gain(model, params.height);
    const double s = gamma / (params.tx_power * signal_gain);
    const double c = std::exp(-params.noise_power * s);
    return c * laplace_interference(s, params.rho, model, params.height, params.tx_power, quad);
}

// Power-law decomposition of the limit: coverage = c(gamma) * g(gamma)^rho.
inline PowerLawFactors power_law_factors(const NetworkParams& params,
                                         const PathLossModel& model, double gamma,
                                         const QuadratureSpec& quad = {}) {
    params.validate();
    if (!(gamma > 0.0)) throw std::domain_error("power_law_factors: gamma must be positive");
    const double signal_gain = detail::first_piece_los_gain(model, params.height);
    const double s = gamma / (params.tx_power * signal_gain);
    PowerLawFactors out;
    out.c = std::exp(-params.noise_power * s);
    out.g = laplace_interference(s, 1.0, model, params.height, params.tx_power, quad);
    return out;
}

// Finite-density approximation: the limit form evaluated at the active-BS
// density instead of the UE density. Exact only as lambda -> infinity; its
// accuracy at moderate density is measured against the simulator, never
// assumed.
inline double dense_coverage_approx(const NetworkParams& params, const PathLossModel& model,
                                    double gamma, const QuadratureSpec& quad = {}) {
    params.validate();
    if (!(gamma > 0.0))
        throw std::domain_error("dense_coverage_approx: gamma must be positive");
    const double active = active_bs_density(params.lambda, params.rho, params.idle_exponent);
    const double signal_gain = detail::first_piece_los_gain(model, params.height);
    const double s = gamma / (params.tx_power * signal_gain);
    const double c = std::exp(-params.noise_power * s);
    return c * laplace_interference(s, active, model, params.height, params.tx_power, quad);
}

// Campbell mean of the aggregate interference from an HPPP of transmitting
// BSs with the given density (unit-mean fading): 2 pi density P int gain u du.
inline double mean_interference(double density, const PathLossModel& model, double height_km,
                                double tx_power, const QuadratureSpec& quad = {}) {
    if (density < 0.0) throw std::domain_error("mean_interference: density must be >= 0");
    if (density == 0.0) return 0.0;
    const IntegralResult r = detail::mean_gain_radial_integral(model, height_km, 0.0, quad);
    return 2.0 * M_PI * density * tx_power * r.value;
}

} // namespace udn
