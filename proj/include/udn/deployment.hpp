#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "udn/detail/campbell.hpp"
#include "udn/errors.hpp"
#include "udn/pathloss.hpp"
#include "udn/quadrature.hpp"
#include "udn/rng.hpp"

namespace udn {

// Scenario scalars in internal units (km, linear mW, linear SINR).
struct NetworkParams {
    double lambda = 1e6;        // BS density, per km^2
    double rho = 300.0;         // active-UE density, per km^2
    double height = 0.0085;     // BS-to-UE antenna height difference, km
    double tx_power = 251.18864315095823;   // 24 dBm in mW
    double noise_power = 3.1622776601683795e-10; // -95 dBm in mW
    double idle_exponent = 3.5; // q of the active-density law
    double gamma0 = 1.0;        // minimum working SINR, linear
    double epsilon = 0.05;      // relative ASE gap for the deployment problem

    void validate() const {
        if (!(lambda > 0.0)) throw std::domain_error("params: lambda must be positive");
        if (!(rho > 0.0)) throw std::domain_error("params: rho must be positive");
        if (!(height >= 0.0)) throw std::domain_error("params: height must be >= 0");
        if (!(tx_power > 0.0)) throw std::domain_error("params: tx power must be positive");
        if (!(noise_power > 0.0)) throw std::domain_error("params: noise power must be positive");
        if (!(idle_exponent > 0.0)) throw std::domain_error("params: q must be positive");
        if (!(gamma0 > 0.0)) throw std::domain_error("params: gamma0 must be positive");
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::domain_error("params: epsilon must lie in (0,1)");
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Points of one process realization inside a disk window centered on the origin.
struct PointSet {
    std::vector<Point> points;
    double window_radius = 0.0;
};

// Density of simultaneously transmitting BSs once idle mode thins the
// deployment: lambda * [1 - (1 + rho/(q lambda))^(-q)]. Always below both
// lambda and rho.
inline double active_bs_density(double lambda, double rho, double q) {
    if (!(lambda > 0.0) || !(rho > 0.0) || !(q > 0.0))
        throw std::domain_error("active_bs_density: inputs must be positive");
    return lambda * (-std::expm1(-q * std::log1p(rho / (q * lambda))));
}

inline double distance_3d(double r, double height) {
    if (r < 0.0 || height < 0.0)
        throw std::domain_error("distance_3d: negative input");
    return std::hypot(r, height);
}

// Homogeneous PPP on a disk: Poisson count, i.i.d. uniform positions.
inline PointSet sample_hppp(double density, double radius, rng::Stream& stream) {
    if (density < 0.0) throw std::domain_error("sample_hppp: negative density");
    if (!(radius > 0.0)) throw std::domain_error("sample_hppp: radius must be positive");
    const double mean = density * M_PI * radius * radius;
    const std::uint64_t n = stream.poisson(mean);
    PointSet set;
    set.window_radius = radius;
    set.points.resize(n);
    for (auto& p : set.points) {
        const double r = radius * std::sqrt(stream.uniform01());
        const double theta = 2.0 * M_PI * stream.uniform01();
        p.x = r * std::cos(theta);
        p.y = r * std::sin(theta);
    }
    return set;
}

// Simulation window radius: smallest R at which the Campbell mean
// interference from beyond R falls below tail_fraction of the total, clamped
// below by ten mean BS spacings so the serving BS is captured at low density.
// The density and power prefactors cancel in the ratio.
inline double required_sim_radius(const NetworkParams& params, const PathLossModel& model,
                                  double tail_fraction,
                                  const QuadratureSpec& quad = {}) {
    params.validate();
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw std::domain_error("required_sim_radius: tail_fraction must lie in (0,1)");

    const double total =
        detail::mean_gain_radial_integral(model, params.height, 0.0, quad).value;
    const double target = tail_fraction * total;
    auto tail = [&](double r) {
        return detail::mean_gain_radial_integral(model, params.height, r, quad).value;
    };

    double hi = std::max(params.height, 1e-3);
    int guard = 0;
    while (tail(hi) > target) {
        hi *= 2.0;
        if (++guard > 60)
            throw numerical_error("required_sim_radius: tail target unreachable");
    }
    double lo = 0.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (tail(mid) > target)
            lo = mid;
        else
            hi = mid;
    }

    const double floor = 10.0 / std::sqrt(params.lambda);
    return std::max(hi, floor);
}

} // namespace udn
