#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "udn/errors.hpp"
#include "udn/rng.hpp"

// Multi-piece probabilistic LoS/NLoS path-loss model. Distances are 3D link
// distances in km, gains are linear (the reference gain applies at 1 km).

namespace udn {

enum class LinkState { LoS, NLoS };

// Links whose LoS probability falls below this floor are treated as NLoS
// without consuming a random draw. Over ~1e10 link draws per experiment the
// expected number of misclassified links is ~1e-5, far below Monte Carlo
// resolution; the floor is what makes nearest-BS shortcuts sound at low
// density where every candidate is light-years outside LoS range.
inline constexpr double kLosProbFloor = 1e-15;

// One-dimensional LoS-probability descriptor, distance (km) -> probability.
struct LosProbSpec {
    enum class Kind {
        constant,      // p(w) = a
        one_minus_exp, // p(w) = 1 - a * exp(-r_km / w)
        exp_decay,     // p(w) = a * exp(-w / r_km)
    };

    Kind kind = Kind::constant;
    double a = 0.0;
    double r_km = 0.0;

    static LosProbSpec constant(double p) { return {Kind::constant, p, 0.0}; }
    static LosProbSpec one_minus_exp(double a, double r_km) {
        return {Kind::one_minus_exp, a, r_km};
    }
    static LosProbSpec exp_decay(double a, double r_km) {
        return {Kind::exp_decay, a, r_km};
    }

    double eval(double w) const {
        double p = 0.0;
        switch (kind) {
        case Kind::constant: p = a; break;
        case Kind::one_minus_exp: p = 1.0 - a * std::exp(-r_km / w); break;
        case Kind::exp_decay: p = a * std::exp(-w / r_km); break;
        }
        return std::clamp(p, 0.0, 1.0);
    }

    // Largest w at which p(w) >= floor, given the descriptor is
    // non-increasing. +inf when the probability never drops below floor.
    double cutoff(double floor) const {
        switch (kind) {
        case Kind::constant:
            return a >= floor ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
        case Kind::one_minus_exp: {
            const double tail = 1.0 - floor; // solve 1 - a*exp(-r/w) = floor
            if (a <= tail) return std::numeric_limits<double>::infinity();
            return r_km / std::log(a / tail);
        }
        case Kind::exp_decay:
            if (a < floor) return -std::numeric_limits<double>::infinity();
            return r_km * std::log(a / floor);
        }
        return -std::numeric_limits<double>::infinity();
    }

    std::string describe() const {
        switch (kind) {
        case Kind::constant: return "const " + std::to_string(a);
        case Kind::one_minus_exp:
            return "one-minus-exp " + std::to_string(a) + " " + std::to_string(r_km);
        case Kind::exp_decay:
            return "exp-decay " + std::to_string(a) + " " + std::to_string(r_km);
        }
        return "?";
    }
};

struct PathLossSegment {
    // Exclusive upper bound of the segment in km; +inf for the last segment.
    double upper_break = std::numeric_limits<double>::infinity();
    double a_los = 0.0;    // linear gain at 1 km, LoS branch
    double a_nlos = 0.0;   // linear gain at 1 km, NLoS branch
    double alpha_los = 0.0;
    double alpha_nlos = 0.0;
    LosProbSpec los_prob;

    double gain_los(double w) const { return a_los * std::pow(w, -alpha_los); }
    double gain_nlos(double w) const { return a_nlos * std::pow(w, -alpha_nlos); }
};

class PathLossModel {
public:
    PathLossModel() = default;

    PathLossModel(std::vector<PathLossSegment> segments, double r1 = 0.0, double r2 = 0.0)
        : segments_(std::move(segments)), r1_(r1), r2_(r2) {
        validate();
    }

    const std::vector<PathLossSegment>& segments() const { return segments_; }
    std::size_t n_pieces() const { return segments_.size(); }
    double r1() const { return r1_; }
    double r2() const { return r2_; }
    double first_break() const { return segments_.front().upper_break; }

    // Break distances at which the stitched LoS probability jumps upward
    // (non-fatal; the 3GPP preset has exactly one, at d_1).
    const std::vector<double>& los_prob_jumps() const { return los_prob_jumps_; }

    // Lower pieces own their upper bounds: w <= break -> that piece.
    const PathLossSegment& segment_for(double w) const {
        for (const auto& s : segments_)
            if (w <= s.upper_break) return s;
        return segments_.back();
    }

    std::size_t segment_index_for(double w) const {
        for (std::size_t i = 0; i < segments_.size(); ++i)
            if (w <= segments_[i].upper_break) return i;
        return segments_.size() - 1;
    }

    // Largest distance at which a LoS draw is still possible anywhere in the
    // model (probability >= kLosProbFloor).
    double los_reachable_max_w() const { return los_reachable_max_w_; }

    // True when the stitched NLoS gain is non-increasing over the whole
    // domain, so "nearest BS" equals "max NLoS gain".
    bool nlos_globally_decreasing() const { return nlos_globally_decreasing_; }

    // Upper bound on the gain any BS at 3D distance >= w can present under
    // any drawable link state. Non-increasing in w.
    double max_reachable_gain(double w) const {
        const std::size_t i = segment_index_for(w);
        const PathLossSegment& s = segments_[i];
        double g = s.gain_nlos(w);
        if (s.los_prob.eval(w) >= kLosProbFloor) g = std::max(g, s.gain_los(w));
        if (i + 1 < segments_.size()) g = std::max(g, suffix_reach_[i + 1]);
        return g;
    }

private:
    void validate() {
        if (segments_.empty())
            throw model_error("path loss model: at least one segment required");
        double prev_break = 0.0;
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto& s = segments_[i];
            if (!(s.a_los > 0.0) || !(s.a_nlos > 0.0) || !(s.alpha_los > 0.0) ||
                !(s.alpha_nlos > 0.0))
                throw model_error("path loss model: segment " + std::to_string(i + 1) +
                                  ": gains and exponents must be positive");
            const bool last = i + 1 == segments_.size();
            if (last) {
                if (std::isfinite(s.upper_break))
                    throw model_error("path loss model: last segment must be unbounded");
            } else {
                if (!(s.upper_break > prev_break) || !std::isfinite(s.upper_break))
                    throw model_error("path loss model: breaks must be strictly increasing");
                prev_break = s.upper_break;
            }
        }
        check_los_monotone();
        compute_reach();
    }

    // Dense log-grid check that each piece's LoS probability is
    // non-increasing and within [0,1]; upward jumps at breaks are recorded,
    // not fatal.
    void check_los_monotone() {
        constexpr int kGridPoints = 10000;
        const double w_lo = 1e-4;
        const double w_hi = std::max(10.0, 10.0 * last_finite_break());
        const double step = std::log(w_hi / w_lo) / (kGridPoints - 1);
        double prev = -1.0;
        std::size_t prev_seg = 0;
        for (int k = 0; k < kGridPoints; ++k) {
            const double w = w_lo * std::exp(step * k);
            const std::size_t seg = segment_index_for(w);
            const double p = raw_los_prob(w);
            if (p < -1e-12 || p > 1.0 + 1e-12)
                throw model_error("path loss model: LoS probability outside [0,1] at w=" +
                                  std::to_string(w));
            if (k > 0 && p > prev + 1e-12) {
                if (seg != prev_seg) {
                    const double br = segments_[prev_seg].upper_break;
                    if (los_prob_jumps_.empty() || los_prob_jumps_.back() != br)
                        los_prob_jumps_.push_back(br);
                } else {
                    throw model_error(
                        "path loss model: LoS probability increases inside a piece at w=" +
                        std::to_string(w));
                }
            }
            prev = p;
            prev_seg = seg;
        }
    }

    double raw_los_prob(double w) const { return segment_for(w).los_prob.eval(w); }

    double last_finite_break() const {
        double b = 0.0;
        for (const auto& s : segments_)
            if (std::isfinite(s.upper_break)) b = s.upper_break;
        return b;
    }

    void compute_reach() {
        const std::size_t n = segments_.size();
        suffix_reach_.assign(n, 0.0);
        double lower_edge = 0.0;
        std::vector<double> reach(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = segments_[i];
            if (i == 0) {
                reach[i] = std::numeric_limits<double>::infinity();
            } else {
                double g = s.gain_nlos(lower_edge);
                if (s.los_prob.eval(lower_edge) >= kLosProbFloor)
                    g = std::max(g, s.gain_los(lower_edge));
                reach[i] = g;
            }
            lower_edge = s.upper_break;
        }
        double running = 0.0;
        for (std::size_t i = n; i-- > 0;) {
            running = std::max(running, reach[i]);
            suffix_reach_[i] = running;
        }

        los_reachable_max_w_ = -std::numeric_limits<double>::infinity();
        double lo = 0.0;
        for (const auto& s : segments_) {
            const double cut = s.los_prob.cutoff(kLosProbFloor);
            const double segment_cut = std::min(cut, s.upper_break);
            if (segment_cut > lo) los_reachable_max_w_ = std::max(los_reachable_max_w_, segment_cut);
            lo = s.upper_break;
        }

        nlos_globally_decreasing_ = true;
        double prev_gain = std::numeric_limits<double>::infinity();
        const double w_lo = 1e-4;
        const double w_hi = std::max(10.0, 10.0 * last_finite_break());
        constexpr int kGridPoints = 4096;
        const double step = std::log(w_hi / w_lo) / (kGridPoints - 1);
        for (int k = 0; k < kGridPoints; ++k) {
            const double w = w_lo * std::exp(step * k);
            const double g = segment_for(w).gain_nlos(w);
            if (g > prev_gain * (1.0 + 1e-12)) {
                nlos_globally_decreasing_ = false;
                break;
            }
            prev_gain = g;
        }
    }

    std::vector<PathLossSegment> segments_;
    double r1_ = 0.0;
    double r2_ = 0.0;
    std::vector<double> los_prob_jumps_;
    std::vector<double> suffix_reach_;
    double los_reachable_max_w_ = 0.0;
    bool nlos_globally_decreasing_ = false;
};

// Two-piece 3GPP model (TR 36.828 style): shared power laws across pieces,
// inverse-exponential LoS probability below d1 = R1/ln(10), exponential decay
// above. Constants are dimensioned for distances in km.
inline PathLossModel three_gpp_case() {
    const double a_los = std::pow(10.0, -10.38);
    const double a_nlos = std::pow(10.0, -14.54);
    const double alpha_los = 2.09;
    const double alpha_nlos = 3.75;
    const double r1 = 0.156;
    const double r2 = 0.030;
    const double d1 = r1 / std::log(10.0);

    std::vector<PathLossSegment> segs(2);
    segs[0] = {d1, a_los, a_nlos, alpha_los, alpha_nlos, LosProbSpec::one_minus_exp(5.0, r1)};
    segs[1] = {std::numeric_limits<double>::infinity(), a_los, a_nlos, alpha_los, alpha_nlos,
               LosProbSpec::exp_decay(5.0, r2)};
    return PathLossModel(std::move(segs), r1, r2);
}

inline double eval_pathloss(const PathLossModel& model, double w, LinkState state) {
    if (!(w > 0.0)) throw std::domain_error("eval_pathloss: w must be positive");
    const PathLossSegment& s = model.segment_for(w);
    return state == LinkState::LoS ? s.gain_los(w) : s.gain_nlos(w);
}

inline double los_probability(const PathLossModel& model, double w) {
    if (!(w > 0.0)) throw std::domain_error("los_probability: w must be positive");
    return model.segment_for(w).los_prob.eval(w);
}

inline LinkState sample_link_state(const PathLossModel& model, double w, rng::Stream& stream) {
    const double p = los_probability(model, w);
    if (p < kLosProbFloor) return LinkState::NLoS;
    return stream.bernoulli(p) ? LinkState::LoS : LinkState::NLoS;
}

// Expected gain over the LoS/NLoS mixture at distance w.
inline double mean_path_gain(const PathLossModel& model, double w) {
    if (!(w > 0.0)) throw std::domain_error("mean_path_gain: w must be positive");
    const PathLossSegment& s = model.segment_for(w);
    const double p = s.los_prob.eval(w);
    return p * s.gain_los(w) + (1.0 - p) * s.gain_nlos(w);
}

} // namespace udn
