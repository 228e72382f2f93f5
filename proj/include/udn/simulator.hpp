#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "udn/coverage_curve.hpp"
#include "udn/deployment.hpp"
#include "udn/errors.hpp"
#include "udn/pathloss.hpp"
#include "udn/quadrature.hpp"
#include "udn/rng.hpp"

// Monte Carlo ground truth for finite BS density. Each trial realizes BSs and
// UEs on a disk around the typical UE at the origin, associates every UE to
// the BS with the largest state-dependent mean gain, and evaluates the typical
// UE's SINR against the interference of the active (non-idle) BSs.
//
// Per-link randomness (LoS states, fading) is keyed on (trial seed, indices),
// not drawn from a sequential stream, so the realized random field does not
// depend on the traversal order: pruned and exhaustive association see the
// same network, and trials can run on any number of workers with bit-identical
// results.

namespace udn {

namespace detail {

inline constexpr std::uint64_t kSaltRealize = 0x52454C495A45ULL;
inline constexpr std::uint64_t kSaltLos = 0x4C4F53ULL;
inline constexpr std::uint64_t kSaltFade = 0x46414445ULL;

// Uniform-cell spatial index over points in [-radius, radius]^2.
class PointGrid {
public:
    PointGrid() = default;

    void build(const std::vector<Point>& pts, double radius, double cell_hint) {
        radius_ = radius;
        double h = std::clamp(cell_hint, 2.0 * radius / 1024.0, 2.0 * radius);
        n_ = std::max(1, static_cast<int>(std::ceil(2.0 * radius / h)));
        h_ = 2.0 * radius / n_;
        offsets_.assign(static_cast<std::size_t>(n_) * n_ + 1, 0);
        ids_.resize(pts.size());
        for (const auto& p : pts) ++offsets_[cell_index(p.x, p.y) + 1];
        for (std::size_t c = 1; c < offsets_.size(); ++c) offsets_[c] += offsets_[c - 1];
        std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (std::uint32_t i = 0; i < pts.size(); ++i)
            ids_[cursor[cell_index(pts[i].x, pts[i].y)]++] = i;
    }

    double cell_size() const { return h_; }
    int dim() const { return n_; }

    int cell_x(double x) const {
        return std::clamp(static_cast<int>((x + radius_) / h_), 0, n_ - 1);
    }
    int cell_y(double y) const { return cell_x(y); }

    // Visit point ids in the cells at Chebyshev distance k from (cx, cy).
    template <class Fn>
    void for_ring(int cx, int cy, int k, Fn&& fn) const {
        if (k == 0) {
            visit_cell(cx, cy, fn);
            return;
        }
        for (int x = cx - k; x <= cx + k; ++x) {
            visit_cell(x, cy - k, fn);
            visit_cell(x, cy + k, fn);
        }
        for (int y = cy - k + 1; y <= cy + k - 1; ++y) {
            visit_cell(cx - k, y, fn);
            visit_cell(cx + k, y, fn);
        }
    }

    int max_rings() const { return n_; }

private:
    std::size_t cell_index(double x, double y) const {
        return static_cast<std::size_t>(cell_y(y)) * n_ + cell_x(x);
    }

    template <class Fn>
    void visit_cell(int x, int y, Fn&& fn) const {
        if (x < 0 || y < 0 || x >= n_ || y >= n_) return;
        const std::size_t c = static_cast<std::size_t>(y) * n_ + x;
        for (std::uint32_t i = offsets_[c]; i < offsets_[c + 1]; ++i) fn(ids_[i]);
    }

    double radius_ = 0.0;
    double h_ = 1.0;
    int n_ = 1;
    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint32_t> ids_;
};

// Deterministic worker pool over trial indices; results must be written by
// index so the outcome is independent of scheduling.
template <class Fn>
void parallel_trials(long n, int workers, Fn&& fn) {
    int w = workers > 0 ? workers
                        : static_cast<int>(std::thread::hardware_concurrency());
    if (w < 1) w = 1;
    w = static_cast<int>(std::min<long>(w, n));
    if (w <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next(0);
    std::exception_ptr first_error;
    std::atomic<bool> failed(false);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            long i;
            while ((i = next.fetch_add(1)) < n && !failed.load(std::memory_order_relaxed)) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace detail

// One sampled network. UE index 0 is the typical UE at the origin.
struct NetworkRealization {
    std::uint64_t trial_seed = 0;
    PointSet bs_points;
    PointSet ue_points;
    std::vector<std::int32_t> serving; // per UE; filled by associate()
    std::vector<std::uint32_t> active_set; // ascending BS indices
    long resamples = 0; // empty-BS-window rejections before this draw
    detail::PointGrid bs_grid;

    std::int32_t serving_bs() const { return serving.empty() ? -1 : serving[0]; }
};

struct SinrSample {
    double signal = 0.0;       // linear mW
    double interference = 0.0; // linear mW
    double sinr = 0.0;
};

struct CoverageEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long trials = 0;
    double gamma = 0.0; // linear threshold
};

struct SimOptions {
    std::uint64_t seed = 1;
    long trials = 10000;
    int workers = 0;        // 0 = hardware concurrency
    double radius_km = 0.0; // 0 = derive from required_sim_radius
    double tail_fraction = 1e-3;
};

// LoS/NLoS state of the (ue, bs) link; a pure function of the realization
// seed, so association and interference always agree.
inline LinkState link_state(const NetworkRealization& real, const PathLossModel& model,
                            double height_km, std::uint32_t ue, std::uint32_t bs) {
    const Point& u = real.ue_points.points[ue];
    const Point& b = real.bs_points.points[bs];
    const double w = std::hypot(std::hypot(b.x - u.x, b.y - u.y), height_km);
    const double p = model.segment_for(w).los_prob.eval(w);
    if (p < kLosProbFloor) return LinkState::NLoS;
    return rng::keyed_uniform(real.trial_seed, ue, bs, detail::kSaltLos) < p
               ? LinkState::LoS
               : LinkState::NLoS;
}

// Sample one network: BSs ~ HPPP(lambda), UEs ~ HPPP(rho), typical UE
// prepended at the origin. Empty BS windows are resampled and counted.
inline NetworkRealization realize_network(const NetworkParams& params, double radius,
                                          std::uint64_t trial_seed) {
    params.validate();
    if (!(radius > 0.0)) throw std::domain_error("realize_network: radius must be positive");

    NetworkRealization real;
    real.trial_seed = trial_seed;
    for (std::uint64_t attempt = 0;; ++attempt) {
        rng::Stream stream(rng::keyed_u64(trial_seed, attempt, 0, detail::kSaltRealize));
        real.bs_points = sample_hppp(params.lambda, radius, stream);
        if (real.bs_points.points.empty()) {
            ++real.resamples;
            continue;
        }
        real.ue_points = sample_hppp(params.rho, radius, stream);
        break;
    }
    real.ue_points.points.insert(real.ue_points.points.begin(), Point{0.0, 0.0});
    real.bs_grid.build(real.bs_points.points, radius, 2.0 / std::sqrt(params.lambda));
    return real;
}

namespace detail {

struct Candidate {
    double gain = -1.0;
    double d2 = 0.0;
    std::int32_t idx = -1;

    bool beats(double g, double dd, std::int32_t i) const {
        if (g != gain) return g > gain;
        if (dd != d2) return dd < d2;
        return i < idx;
    }
};

// Argmax of the state-dependent gain over all BSs, by expanding grid rings
// until no remaining BS can reach the incumbent's gain. Candidates beyond the
// model's LoS-reachable range are NLoS-certain, so when the stitched NLoS gain
// is monotone only their nearest representative needs a gain evaluation.
inline std::int32_t best_server(const NetworkRealization& real, const PathLossModel& model,
                                double height_km, std::uint32_t ue) {
    const auto& bss = real.bs_points.points;
    const Point& u = real.ue_points.points[ue];
    const PointGrid& grid = real.bs_grid;
    const double h2 = height_km * height_km;

    const double cutoff_w = model.los_reachable_max_w();
    const bool far_shortcut = model.nlos_globally_decreasing();
    const double far_d2 =
        far_shortcut ? cutoff_w * cutoff_w - h2 : std::numeric_limits<double>::infinity();

    Candidate best;     // fully evaluated candidates (LoS draw possible)
    double nn_far_d2 = std::numeric_limits<double>::infinity();
    std::int32_t nn_far_idx = -1; // nearest NLoS-certain candidate

    auto merged_best = [&]() {
        Candidate m = best;
        if (nn_far_idx >= 0) {
            const double gain =
                model.segment_for(std::sqrt(nn_far_d2 + h2)).gain_nlos(std::sqrt(nn_far_d2 + h2));
            if (m.beats(gain, nn_far_d2, nn_far_idx)) m = {gain, nn_far_d2, nn_far_idx};
        }
        return m;
    };

    const int cx = grid.cell_x(u.x), cy = grid.cell_y(u.y);
    for (int k = 0; k <= grid.max_rings(); ++k) {
        if (best.idx >= 0 || nn_far_idx >= 0) {
            const double rmin = (k - 1) * grid.cell_size();
            if (rmin > 0.0) {
                const Candidate m = merged_best();
                if (model.max_reachable_gain(std::sqrt(rmin * rmin + h2)) < m.gain) {
                    best = m;
                    return best.idx;
                }
            }
        }
        grid.for_ring(cx, cy, k, [&](std::uint32_t j) {
            const double dx = bss[j].x - u.x, dy = bss[j].y - u.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 > far_d2) {
                if (d2 < nn_far_d2 ||
                    (d2 == nn_far_d2 && static_cast<std::int32_t>(j) < nn_far_idx)) {
                    nn_far_d2 = d2;
                    nn_far_idx = static_cast<std::int32_t>(j);
                }
                return;
            }
            const double w = std::sqrt(d2 + h2);
            const PathLossSegment& seg = model.segment_for(w);
            const double p = seg.los_prob.eval(w);
            double gain;
            if (p >= kLosProbFloor &&
                rng::keyed_uniform(real.trial_seed, ue, j, kSaltLos) < p)
                gain = seg.gain_los(w);
            else
                gain = seg.gain_nlos(w);
            if (best.beats(gain, d2, static_cast<std::int32_t>(j)))
                best = {gain, d2, static_cast<std::int32_t>(j)};
        });
    }
    return merged_best().idx;
}

} // namespace detail

// Associate every UE (typical included) to its max-mean-gain BS under the
// realized link states; fading plays no part in the decision. Recomputes the
// active set: exactly the BSs serving at least one UE.
inline NetworkRealization& associate(NetworkRealization& real, const PathLossModel& model,
                                     const NetworkParams& params) {
    const std::size_t n_ue = real.ue_points.points.size();
    real.serving.assign(n_ue, -1);
    for (std::uint32_t ue = 0; ue < n_ue; ++ue)
        real.serving[ue] = detail::best_server(real, model, params.height, ue);

    std::vector<std::uint8_t> mark(real.bs_points.points.size(), 0);
    for (const std::int32_t s : real.serving)
        if (s >= 0) mark[static_cast<std::size_t>(s)] = 1;
    real.active_set.clear();
    for (std::uint32_t i = 0; i < mark.size(); ++i)
        if (mark[i]) real.active_set.push_back(i);
    return real;
}

// SINR of the typical UE: Rayleigh fading on the serving link and on every
// active interferer, idle BSs contribute nothing.
inline SinrSample typical_ue_sinr(const NetworkRealization& real, const NetworkParams& params,
                                  const PathLossModel& model) {
    const std::int32_t b0 = real.serving_bs();
    if (b0 < 0) throw std::logic_error("typical_ue_sinr: association not done");
    const double h2 = params.height * params.height;
    const auto& bss = real.bs_points.points;

    auto link_gain = [&](std::uint32_t bs) {
        const double d2 = bss[bs].x * bss[bs].x + bss[bs].y * bss[bs].y;
        const double w = std::sqrt(d2 + h2);
        return eval_pathloss(model, w, link_state(real, model, params.height, 0, bs));
    };

    SinrSample out;
    const double h_fade =
        rng::keyed_exponential(real.trial_seed, static_cast<std::uint32_t>(b0), 0,
                               detail::kSaltFade);
    out.signal = params.tx_power * link_gain(static_cast<std::uint32_t>(b0)) * h_fade;
    for (const std::uint32_t bs : real.active_set) {
        if (static_cast<std::int32_t>(bs) == b0) continue;
        const double g = rng::keyed_exponential(real.trial_seed, bs, 0, detail::kSaltFade);
        out.interference += params.tx_power * link_gain(bs) * g;
    }
    out.sinr = out.signal / (out.interference + params.noise_power);
    return out;
}

// Per-trial observables collected by the trial farm.
struct TrialStats {
    double sinr = 0.0;
    double interference = 0.0;
    double signal = 0.0;
    std::uint32_t active_count = 0;
    std::uint32_t resamples = 0;
};

inline double sim_window_radius(const NetworkParams& params, const PathLossModel& model,
                                const SimOptions& opts) {
    if (opts.radius_km > 0.0) return opts.radius_km;
    return required_sim_radius(params, model, opts.tail_fraction);
}

// Run independent trials; results are indexed by trial, so estimates are
// bit-identical for any worker count.
inline std::vector<TrialStats> simulate_trials(const NetworkParams& params,
                                               const PathLossModel& model,
                                               const SimOptions& opts) {
    params.validate();
    if (opts.trials < 1) throw std::domain_error("simulate_trials: trials must be >= 1");
    const double radius = sim_window_radius(params, model, opts);

    std::vector<TrialStats> stats(static_cast<std::size_t>(opts.trials));
    detail::parallel_trials(opts.trials, opts.workers, [&](long t) {
        NetworkRealization real =
            realize_network(params, radius, rng::derive_seed(opts.seed, t));
        associate(real, model, params);
        const SinrSample s = typical_ue_sinr(real, params, model);
        stats[static_cast<std::size_t>(t)] = {
            s.sinr, s.interference, s.signal,
            static_cast<std::uint32_t>(real.active_set.size()),
            static_cast<std::uint32_t>(real.resamples)};
    });

    long resamples = 0;
    for (const auto& s : stats) resamples += s.resamples;
    if (resamples > 1e-6 * static_cast<double>(opts.trials))
        warn("empty-window resample rate " + std::to_string(resamples) + "/" +
             std::to_string(opts.trials) + " exceeds 1e-6");
    return stats;
}

// Pr[SINR > gamma] with binomial standard error.
inline CoverageEstimate estimate_coverage(const NetworkParams& params,
                                          const PathLossModel& model, double gamma,
                                          const SimOptions& opts) {
    const std::vector<TrialStats> stats = simulate_trials(params, model, opts);
    long hits = 0;
    for (const auto& s : stats) hits += s.sinr > gamma ? 1 : 0;
    CoverageEstimate est;
    est.trials = opts.trials;
    est.gamma = gamma;
    est.mean = static_cast<double>(hits) / static_cast<double>(opts.trials);
    est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(opts.trials));
    return est;
}

// Coverage over a threshold grid from shared SINR samples; non-increasing in
// gamma by construction.
inline CoverageCurve estimate_coverage_curve(const NetworkParams& params,
                                             const PathLossModel& model,
                                             const std::vector<double>& gammas,
                                             const SimOptions& opts) {
    if (gammas.empty())
        throw std::domain_error("estimate_coverage_curve: empty threshold grid");
    for (std::size_t i = 1; i < gammas.size(); ++i)
        if (!(gammas[i] > gammas[i - 1]))
            throw std::domain_error(
                "estimate_coverage_curve: thresholds must be strictly increasing");

    const std::vector<TrialStats> stats = simulate_trials(params, model, opts);
    std::vector<long> counts(gammas.size(), 0);
    for (const auto& s : stats) {
        // SINR > gammas[j] for all j with gammas[j] < sinr.
        const auto it = std::lower_bound(gammas.begin(), gammas.end(), s.sinr);
        const std::size_t upto = static_cast<std::size_t>(it - gammas.begin());
        for (std::size_t j = 0; j < upto; ++j) ++counts[j];
    }
    CoverageCurve curve;
    curve.gammas = gammas;
    curve.values.resize(gammas.size());
    curve.errors.resize(gammas.size());
    const double n = static_cast<double>(opts.trials);
    for (std::size_t j = 0; j < gammas.size(); ++j) {
        const double p = static_cast<double>(counts[j]) / n;
        curve.values[j] = p;
        curve.errors[j] = std::sqrt(p * (1.0 - p) / n);
    }
    return curve;
}

struct DensityEstimate {
    double mean = 0.0;      // per km^2
    double std_error = 0.0;
    long trials = 0;
};

// Mean density of active BSs over trials, the empirical counterpart of the
// active-density law.
inline DensityEstimate estimate_active_density(const NetworkParams& params,
                                               const PathLossModel& model,
                                               const SimOptions& opts) {
    const double radius = sim_window_radius(params, model, opts);
    SimOptions fixed = opts;
    fixed.radius_km = radius;
    const std::vector<TrialStats> stats = simulate_trials(params, model, fixed);
    const double area = M_PI * radius * radius;
    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : stats) {
        const double d = static_cast<double>(s.active_count) / area;
        sum += d;
        sum2 += d * d;
    }
    const double n = static_cast<double>(opts.trials);
    DensityEstimate est;
    est.trials = opts.trials;
    est.mean = sum / n;
    const double var = std::max(0.0, sum2 / n - est.mean * est.mean);
    est.std_error = std::sqrt(var / n);
    return est;
}

} // namespace udn
