#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "udn/analytic.hpp"
#include "udn/simulator.hpp"
#include "udn/units.hpp"

using namespace udn;

namespace {

NetworkParams base_params(double lambda, double rho, double height_m = 8.5) {
    NetworkParams p;
    p.lambda = lambda;
    p.rho = rho;
    p.height = m_to_km(height_m);
    p.tx_power = dbm_to_mw(24.0);
    p.noise_power = dbm_to_mw(-95.0);
    return p;
}

// Exhaustive association over all BSs; the keyed link states make this walk
// the exact same realization as the pruned production path.
std::int32_t best_server_exhaustive(const NetworkRealization& real,
                                    const PathLossModel& model, double height,
                                    std::uint32_t ue) {
    const Point& u = real.ue_points.points[ue];
    double best_gain = -1.0, best_d2 = 0.0;
    std::int32_t best = -1;
    for (std::uint32_t j = 0; j < real.bs_points.points.size(); ++j) {
        const Point& b = real.bs_points.points[j];
        const double dx = b.x - u.x, dy = b.y - u.y;
        const double d2 = dx * dx + dy * dy;
        const double w = std::sqrt(d2 + height * height);
        const double gain = eval_pathloss(model, w, link_state(real, model, height, ue, j));
        const bool better =
            gain > best_gain ||
            (gain == best_gain &&
             (d2 < best_d2 || (d2 == best_d2 && static_cast<std::int32_t>(j) < best)));
        if (better) {
            best_gain = gain;
            best_d2 = d2;
            best = static_cast<std::int32_t>(j);
        }
    }
    return best;
}

} // namespace

TEST_CASE("realizations are deterministic in the trial seed") {
    const NetworkParams p = base_params(500.0, 300.0);
    const NetworkRealization a = realize_network(p, 0.5, 42);
    const NetworkRealization b = realize_network(p, 0.5, 42);
    REQUIRE(a.bs_points.points.size() == b.bs_points.points.size());
    REQUIRE(a.ue_points.points.size() == b.ue_points.points.size());
    for (std::size_t i = 0; i < a.bs_points.points.size(); ++i) {
        CHECK(a.bs_points.points[i].x == b.bs_points.points[i].x);
        CHECK(a.bs_points.points[i].y == b.bs_points.points[i].y);
    }
    const NetworkRealization c = realize_network(p, 0.5, 43);
    CHECK(a.bs_points.points.size() != c.bs_points.points.size());

    // typical UE at the origin, index 0
    CHECK(a.ue_points.points[0].x == 0.0);
    CHECK(a.ue_points.points[0].y == 0.0);
}

TEST_CASE("realized BS counts follow the Poisson law at high density") {
    const NetworkParams p = base_params(1e6, 300.0);
    const double radius = std::sqrt(1e4 / (M_PI * 1e6)); // expected 1e4 BSs
    const int trials = 1000;
    double sum = 0.0;
    for (int t = 0; t < trials; ++t)
        sum += static_cast<double>(realize_network(p, radius, 1000 + t).bs_points.points.size());
    const double mean = sum / trials;
    CHECK(std::fabs(mean - 1e4) < 4.0 * std::sqrt(1e4 / trials));
}

TEST_CASE("empty windows are resampled, never returned") {
    NetworkParams p = base_params(0.1, 300.0);
    long resamples = 0;
    for (int t = 0; t < 50; ++t) {
        const NetworkRealization r = realize_network(p, 0.5, 7000 + t);
        CHECK(!r.bs_points.points.empty());
        resamples += r.resamples;
    }
    CHECK(resamples > 0); // P(empty) ~ 0.92 per attempt here
}

TEST_CASE("vanishing UE density leaves only the typical UE and its serving BS") {
    NetworkParams p = base_params(200.0, 1e-9);
    NetworkRealization real = realize_network(p, 1.0, 5);
    REQUIRE(real.ue_points.points.size() == 1);
    const PathLossModel model = three_gpp_case();
    associate(real, model, p);
    REQUIRE(real.active_set.size() == 1);
    CHECK(static_cast<std::int32_t>(real.active_set[0]) == real.serving_bs());

    const SinrSample s = typical_ue_sinr(real, p, model);
    CHECK(s.interference == 0.0);
    CHECK(s.sinr == doctest::Approx(s.signal / p.noise_power).epsilon(1e-12));
}

TEST_CASE("single-BS network: every UE associates to it") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(1.0, 300.0);
    NetworkRealization real;
    real.trial_seed = 11;
    real.bs_points.window_radius = 0.3;
    real.bs_points.points = {{0.05, -0.02}};
    rng::Stream st(3);
    real.ue_points = sample_hppp(300.0, 0.3, st);
    real.ue_points.points.insert(real.ue_points.points.begin(), Point{0.0, 0.0});
    real.bs_grid.build(real.bs_points.points, 0.3, 0.1);

    associate(real, model, p);
    for (const std::int32_t s : real.serving) CHECK(s == 0);
    REQUIRE(real.active_set.size() == 1);
}

TEST_CASE("a farther LoS BS beats the nearest NLoS BS") {
    // deterministic LoS zones: NLoS-certain inside 10 m, LoS-certain outside
    std::vector<PathLossSegment> segs(2);
    const double a_los = std::pow(10.0, -10.38), a_nlos = std::pow(10.0, -14.54);
    segs[0] = {0.010, a_los, a_nlos, 2.09, 3.75, LosProbSpec::constant(0.0)};
    segs[1] = {std::numeric_limits<double>::infinity(), a_los, a_nlos, 2.09, 3.75,
               LosProbSpec::constant(1.0)};
    const PathLossModel zones(std::move(segs));

    const NetworkParams p = base_params(100.0, 300.0);
    NetworkRealization real;
    real.trial_seed = 1;
    real.bs_points.window_radius = 0.3;
    // BS 0 at 5 m (w = 9.86 m -> NLoS-certain), BS 1 at 15 m (w = 17.2 m -> LoS)
    real.bs_points.points = {{0.005, 0.0}, {0.015, 0.0}};
    real.ue_points.points = {{0.0, 0.0}};
    real.bs_grid.build(real.bs_points.points, 0.3, 0.1);

    associate(real, zones, p);
    const double g0 = eval_pathloss(zones, std::hypot(0.005, p.height), LinkState::NLoS);
    const double g1 = eval_pathloss(zones, std::hypot(0.015, p.height), LinkState::LoS);
    CHECK(g1 > g0);
    CHECK(real.serving_bs() == 1);
}

TEST_CASE("pruned association equals exhaustive association") {
    const PathLossModel model = three_gpp_case();
    for (const double lambda : {50.0, 500.0}) {
        const NetworkParams p = base_params(lambda, 300.0);
        for (int t = 0; t < 12; ++t) {
            NetworkRealization real = realize_network(p, 0.45, 900 + t);
            associate(real, model, p);
            for (std::uint32_t ue = 0; ue < real.ue_points.points.size(); ++ue)
                REQUIRE(real.serving[ue] ==
                        best_server_exhaustive(real, model, p.height, ue));
        }
    }

    // sparse instance with the window wider than the LoS-reachable range, so
    // the NLoS-certain nearest-representative path carries the decision
    const NetworkParams sparse = base_params(3.0, 30.0);
    for (int t = 0; t < 4; ++t) {
        NetworkRealization real = realize_network(sparse, 3.0, 1300 + t);
        associate(real, model, sparse);
        for (std::uint32_t ue = 0; ue < real.ue_points.points.size(); ++ue)
            REQUIRE(real.serving[ue] == best_server_exhaustive(real, model, sparse.height, ue));
    }
}

TEST_CASE("active set: exactly the BSs serving someone, sorted") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(800.0, 400.0);
    NetworkRealization real = realize_network(p, 0.4, 77);
    associate(real, model, p);

    std::set<std::int32_t> served(real.serving.begin(), real.serving.end());
    REQUIRE(real.active_set.size() == served.size());
    CHECK(std::is_sorted(real.active_set.begin(), real.active_set.end()));
    for (const std::uint32_t b : real.active_set)
        CHECK(served.count(static_cast<std::int32_t>(b)) == 1);
}

TEST_CASE("empirical active fraction tracks the active-density law at lambda = 10 rho") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(3000.0, 300.0);
    SimOptions opts;
    opts.trials = 400;
    opts.seed = 31;
    opts.radius_km = 0.4;
    const DensityEstimate est = estimate_active_density(p, model, opts);
    const double expected = active_bs_density(p.lambda, p.rho, p.idle_exponent);
    CHECK(std::fabs(est.mean - expected) / expected < 0.05);
}

TEST_CASE("active density saturates at the smaller of the two densities") {
    const PathLossModel model = three_gpp_case();
    SimOptions opts;
    opts.trials = 200;
    opts.seed = 13;

    // all BSs busy when UEs are plentiful
    opts.radius_km = 3.0;
    const DensityEstimate sparse =
        estimate_active_density(base_params(3.0, 300.0), model, opts);
    CHECK(sparse.mean == doctest::Approx(3.0).epsilon(0.05));

    // one BS per UE when BSs are plentiful
    opts.radius_km = 0.4;
    const DensityEstimate dense =
        estimate_active_density(base_params(30000.0, 300.0), model, opts);
    CHECK(dense.mean == doctest::Approx(300.0).epsilon(0.05));

    // equal densities: the law is approximate here; record the deviation
    opts.radius_km = 0.6;
    const DensityEstimate eq = estimate_active_density(base_params(300.0, 300.0), model, opts);
    const double law = active_bs_density(300.0, 300.0, 3.5);
    MESSAGE("lambda = rho = 300: empirical ", eq.mean, " vs law ", law, " (",
            100.0 * (eq.mean - law) / law, "% deviation)");
}

TEST_CASE("serving link dominates every interferer in mean gain") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(2000.0, 600.0);
    for (int t = 0; t < 10; ++t) {
        NetworkRealization real = realize_network(p, 0.3, 400 + t);
        associate(real, model, p);
        const Point o = real.ue_points.points[0];
        auto gain_of = [&](std::uint32_t bs) {
            const Point& b = real.bs_points.points[bs];
            const double w = std::hypot(std::hypot(b.x - o.x, b.y - o.y), p.height);
            return eval_pathloss(model, w, link_state(real, model, p.height, 0, bs));
        };
        const double g0 = gain_of(static_cast<std::uint32_t>(real.serving_bs()));
        for (const std::uint32_t bs : real.active_set) CHECK(gain_of(bs) <= g0);
    }
}

TEST_CASE("mean aggregate interference matches the Campbell oracle at the "
          "law-predicted active density") {
    // BS density high enough that the serving BS's exclusion void around the
    // origin carries well under a standard error of the Campbell mean
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(6e5, 1800.0);
    SimOptions opts;
    opts.trials = 4000;
    opts.seed = 71;
    opts.radius_km = 0.1883; // window holds ~200 active BSs

    const std::vector<TrialStats> stats = simulate_trials(p, model, opts);
    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : stats) {
        sum += s.interference;
        sum2 += s.interference * s.interference;
    }
    const double n = static_cast<double>(opts.trials);
    const double mc = sum / n;
    const double se = std::sqrt((sum2 / n - mc * mc) / n);

    const double active = active_bs_density(p.lambda, p.rho, p.idle_exponent);
    const double campbell = mean_interference(active, model, p.height, p.tx_power);
    CHECK(std::fabs(mc - campbell) < 3.0 * se);
}

TEST_CASE("coverage at a vanishing threshold approaches one") {
    const PathLossModel model = three_gpp_case();
    SimOptions opts;
    opts.trials = 500;
    opts.seed = 3;
    const CoverageEstimate est =
        estimate_coverage(base_params(1000.0, 300.0), model, 1e-12, opts);
    CHECK(est.mean > 0.99);
}

TEST_CASE("estimates are bit-identical across worker counts") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(1000.0, 300.0);
    SimOptions one;
    one.trials = 400;
    one.seed = 123;
    one.workers = 1;
    SimOptions four = one;
    four.workers = 4;
    const CoverageEstimate a = estimate_coverage(p, model, 1.0, one);
    const CoverageEstimate b = estimate_coverage(p, model, 1.0, four);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("singleton curve equals the scalar estimate with the same seed") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(1000.0, 300.0);
    SimOptions opts;
    opts.trials = 300;
    opts.seed = 9;
    const CoverageCurve curve = estimate_coverage_curve(p, model, {2.0}, opts);
    const CoverageEstimate scalar = estimate_coverage(p, model, 2.0, opts);
    CHECK(curve.values[0] == scalar.mean);

    CHECK_THROWS_AS(estimate_coverage_curve(p, model, {}, opts), std::domain_error);
    CHECK_THROWS_AS(estimate_coverage_curve(p, model, {2.0, 2.0}, opts), std::domain_error);
}

TEST_CASE("shared-sample curves are non-increasing, exactly") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(5000.0, 300.0);
    SimOptions opts;
    opts.trials = 600;
    opts.seed = 21;
    std::vector<double> grid;
    for (double gdb = -10.0; gdb <= 20.0; gdb += 2.0) grid.push_back(db_to_linear(gdb));
    const CoverageCurve curve = estimate_coverage_curve(p, model, grid, opts);
    curve.validate();
    for (std::size_t j = 1; j < curve.values.size(); ++j)
        CHECK(curve.values[j] <= curve.values[j - 1]);
}

TEST_CASE("doubling the served density at high BS density squares the coverage") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(1e6, 600.0);
    SimOptions opts;
    opts.trials = 2500;
    opts.seed = 606;
    const CoverageEstimate est = estimate_coverage(p, model, 1.0, opts);
    CHECK(std::fabs(est.mean - 0.65) <= 3.0 * est.std_error);
}

TEST_CASE("simulator curve agrees with the analytic limit pointwise at high density") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(1e6, 300.0);
    SimOptions opts;
    opts.trials = 2000;
    opts.seed = 2;
    std::vector<double> grid;
    for (double gdb = -10.0; gdb <= 20.0; gdb += 5.0) grid.push_back(db_to_linear(gdb));
    const CoverageCurve curve = estimate_coverage_curve(p, model, grid, opts);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double lim = coverage_limit(p, model, grid[j]);
        const double band = 3.0 * std::max(curve.errors[j], 1e-3);
        CHECK(std::fabs(curve.values[j] - lim) < band);
    }
}

TEST_CASE("association and active set are invariant under transmit-power scaling") {
    const PathLossModel model = three_gpp_case();
    NetworkParams p = base_params(2000.0, 500.0);
    NetworkRealization a = realize_network(p, 0.3, 55);
    associate(a, model, p);

    NetworkParams scaled = p;
    scaled.tx_power *= 13.0;
    NetworkRealization b = realize_network(scaled, 0.3, 55);
    associate(b, model, scaled);

    REQUIRE(a.serving.size() == b.serving.size());
    for (std::size_t i = 0; i < a.serving.size(); ++i) CHECK(a.serving[i] == b.serving[i]);
    CHECK(a.active_set == b.active_set);
}

TEST_CASE("adding UEs to a fixed BS layout never shrinks the active set") {
    const PathLossModel model = three_gpp_case();
    const NetworkParams p = base_params(2000.0, 300.0);
    NetworkRealization real = realize_network(p, 0.3, 88);
    associate(real, model, p);
    const std::vector<std::uint32_t> before = real.active_set;

    rng::Stream extra(1234);
    for (int i = 0; i < 40; ++i) {
        const double r = 0.3 * std::sqrt(extra.uniform01());
        const double th = 2.0 * M_PI * extra.uniform01();
        real.ue_points.points.push_back({r * std::cos(th), r * std::sin(th)});
    }
    associate(real, model, p);
    for (const std::uint32_t b : before)
        CHECK(std::binary_search(real.active_set.begin(), real.active_set.end(), b));
}
