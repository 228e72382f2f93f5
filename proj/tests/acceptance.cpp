// Acceptance suite: end-to-end checks of the headline numbers and the
// property battery, one pass/fail line per criterion. Exit code is the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "udn/analytic.hpp"
#include "udn/capacity.hpp"
#include "udn/simulator.hpp"
#include "udn/units.hpp"

using namespace udn;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::vector<std::string> g_lines;

struct Criterion {
    std::string name;
    bool pass = true;
    std::string detail;
    clock_type::time_point t0 = clock_type::now();

    explicit Criterion(std::string n) : name(std::move(n)) {}

    void check(bool ok, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
        if (!ok) {
            pass = false;
            detail += " <-- FAILED";
        }
    }

    void finish() {
        const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
        char buf[2048];
        std::snprintf(buf, sizeof(buf), "criterion %-28s %s  (%.1f s)\n    %s", name.c_str(),
                      pass ? "PASS" : "FAIL", secs, detail.c_str());
        g_lines.push_back(buf);
        std::printf("%s\n", buf);
        if (!pass) ++g_failures;
    }
};

std::string fmt(double x) {
    char b[64];
    std::snprintf(b, sizeof(b), "%.6g", x);
    return b;
}

NetworkParams scenario(double lambda, double rho, double height_m) {
    NetworkParams p;
    p.lambda = lambda;
    p.rho = rho;
    p.height = m_to_km(height_m);
    p.tx_power = dbm_to_mw(24.0);
    p.noise_power = dbm_to_mw(-95.0);
    p.gamma0 = 1.0;
    p.epsilon = 0.05;
    return p;
}

bool within(double x, double target, double tol) { return std::fabs(x - target) <= tol; }

} // namespace

// 1. coverage limit at rho = 300
static void criterion_1(const PathLossModel& model) {
    Criterion c("1 [coverage limit rho=300]");
    const double v = coverage_limit(scenario(1e6, 300, 8.5), model, 1.0);
    c.check(within(v, 0.806, 0.01), "pcov = " + fmt(v) + " vs 0.806 +- 0.01");
    c.finish();
}

// 2. coverage limit at rho = 600 and the power-law square identity
static void criterion_2(const PathLossModel& model) {
    Criterion c("2 [power law rho=600]");
    const NetworkParams p300 = scenario(1e6, 300, 8.5);
    const double v600 = coverage_limit(scenario(1e6, 600, 8.5), model, 1.0);
    c.check(within(v600, 0.65, 0.01), "pcov = " + fmt(v600) + " vs 0.65 +- 0.01");

    const double v300 = coverage_limit(p300, model, 1.0);
    const double noise_c = power_law_factors(p300, model, 1.0).c;
    const double squared = v300 * v300 / noise_c;
    c.check(std::fabs(squared - v600) / v600 < 1e-3,
            "square-rule " + fmt(squared) + " vs direct " + fmt(v600) + " (1e-3 rel)");
    c.finish();
}

// 3. dense approximation within 0.5% of the limit at lambda = 1e6
static void criterion_3(const PathLossModel& model) {
    Criterion c("3 [limit gap at 1e6]");
    for (const double rho : {300.0, 600.0}) {
        for (const double h : {3.5, 8.5}) {
            const NetworkParams p = scenario(1e6, rho, h);
            const double lim = coverage_limit(p, model, 1.0);
            const double dense = dense_coverage_approx(p, model, 1.0);
            const double gap = std::fabs(dense - lim) / lim;
            c.check(gap < 0.005, "rho=" + fmt(rho) + " L=" + fmt(h) + "m gap " + fmt(gap));
        }
    }
    c.finish();
}

// 4. Monte Carlo coverage at lambda = 1e6 within 3 standard errors of 0.806
static void criterion_4(const PathLossModel& model) {
    Criterion c("4 [monte carlo convergence]");
    SimOptions opts;
    opts.trials = 10000;
    opts.seed = 20260808;
    const CoverageEstimate est =
        estimate_coverage(scenario(1e6, 300, 8.5), model, 1.0, opts);
    c.check(std::fabs(est.mean - 0.806) <= 3.0 * est.std_error,
            "pcov_mc = " + fmt(est.mean) + " +- " + fmt(est.std_error) +
                " vs 0.806 at 3 se");
    c.finish();
}

// 5. ASE limit at rho = 300
static void criterion_5(const PathLossModel& model) {
    Criterion c("5 [ase limit rho=300]");
    const double v = ase_limit(scenario(1e6, 300, 8.5), model, 1.0);
    c.check(within(v, 784.4, 7.844), "ase = " + fmt(v) + " vs 784.4 +- 1%");
    c.finish();
}

// 6. UE scheduling optimum at lambda = 1e6
static void criterion_6(const PathLossModel& model) {
    Criterion c("6 [ue scheduling optimum]");
    const DesignSolution sol =
        solve_ue_scheduling(scenario(1e6, 300, 8.5), model, 1.0, AseEngine::dense(), {});
    c.check(sol.solved && sol.diagnostic.empty(), "solver converged");
    c.check(within(sol.located_value, 804.0, 0.02 * 804.0),
            "rho* = " + fmt(sol.located_value) + " vs 804 +- 2%");
    c.check(within(sol.achieved_ase, 928.2, 0.01 * 928.2),
            "ase = " + fmt(sol.achieved_ase) + " vs 928.2 +- 1%");
    c.check(within(sol.implied_ssr_density, 803.58, 0.02 * 803.58),
            "ssr = " + fmt(sol.implied_ssr_density) + " vs 803.58 +- 2%");
    c.finish();
}

// 7. BS deployment: target from the limit, located density, MC verification
static void criterion_7(const PathLossModel& model) {
    Criterion c("7 [bs deployment]");
    NetworkParams p = scenario(1e6, 300, 8.5);
    p.epsilon = 0.05;
    SimOptions sim;
    sim.trials = 20000;
    sim.seed = 424242;
    const DesignSolution sol = solve_bs_deployment(p, model, AseEngine::monte_carlo(sim), {});
    c.check(sol.solved, "solver returned a solution");

    const double lim = ase_limit(p, model, 1.0);
    c.check(std::fabs(sol.target_ase - 0.95 * lim) < 1e-9 * lim,
            "target " + fmt(sol.target_ase) + " equals (1-eps) x own limit");
    c.check(within(sol.target_ase, 745.2, 0.01 * 745.2),
            "target " + fmt(sol.target_ase) + " vs 745.2 +- 1%");
    c.check(sol.located_value >= 0.5 * 33420.0 && sol.located_value <= 2.0 * 33420.0,
            "lambda* = " + fmt(sol.located_value) + " within [0.5, 2.0] x 33420");
    c.check(sol.verified, "independent MC verification at 3 sigma");
    c.finish();
}

// 8. property battery (no external reference numbers)
static void criterion_8(const PathLossModel& model) {
    Criterion c("8 [property suite]");
    const NetworkParams p = scenario(1e6, 300, 8.5);
    const double zeta = model.segments().front().gain_los(p.height);

    // Laplace bounds and monotonicity
    {
        bool ok = true;
        double prev = 1.0;
        for (double s = 1e2; s <= 1e8; s *= 10.0) {
            const double v = laplace_interference(s, p.rho, model, p.height, p.tx_power);
            ok = ok && v > 0.0 && v <= 1.0 && v < prev;
            prev = v;
        }
        prev = 1.0;
        for (double d = 10.0; d <= 1e5; d *= 10.0) {
            const double v = laplace_interference(4500.0, d, model, p.height, p.tx_power);
            ok = ok && v > 0.0 && v <= 1.0 && v < prev;
            prev = v;
        }
        c.check(ok, "laplace in (0,1], strictly decreasing in s and density");
    }

    // Campbell mean-interference oracle at 3 sigma (simulator side); the BS
    // density keeps the serving-BS exclusion void negligible at this precision
    {
        NetworkParams q = scenario(6e5, 1800, 8.5);
        SimOptions opts;
        opts.trials = 10000;
        opts.seed = 99;
        opts.radius_km = 0.1883;
        const std::vector<TrialStats> stats = simulate_trials(q, model, opts);
        double sum = 0.0, sum2 = 0.0;
        for (const auto& s : stats) {
            sum += s.interference;
            sum2 += s.interference * s.interference;
        }
        const double n = static_cast<double>(opts.trials);
        const double mc = sum / n;
        const double se = std::sqrt((sum2 / n - mc * mc) / n);
        const double active = active_bs_density(q.lambda, q.rho, q.idle_exponent);
        const double campbell = mean_interference(active, model, q.height, q.tx_power);
        c.check(std::fabs(mc - campbell) < 3.0 * se,
                "Campbell mean I: mc " + fmt(mc) + " vs " + fmt(campbell) + " at 3 se");
    }

    // association argmax invariance under power scaling
    {
        NetworkParams q = scenario(2000, 500, 8.5);
        NetworkRealization a = realize_network(q, 0.3, 555);
        associate(a, model, q);
        NetworkParams scaled = q;
        scaled.tx_power *= 10.0;
        NetworkRealization b = realize_network(scaled, 0.3, 555);
        associate(b, model, scaled);
        c.check(a.serving == b.serving && a.active_set == b.active_set,
                "association invariant under tx-power scaling");
    }

    // idle-mode monotonicity
    {
        NetworkParams q = scenario(2000, 300, 8.5);
        NetworkRealization real = realize_network(q, 0.3, 777);
        associate(real, model, q);
        const std::vector<std::uint32_t> before = real.active_set;
        rng::Stream extra(31415);
        for (int i = 0; i < 30; ++i) {
            const double r = 0.3 * std::sqrt(extra.uniform01());
            const double th = 2.0 * M_PI * extra.uniform01();
            real.ue_points.points.push_back({r * std::cos(th), r * std::sin(th)});
        }
        associate(real, model, q);
        bool superset = true;
        for (const std::uint32_t b : before)
            superset = superset && std::binary_search(real.active_set.begin(),
                                                      real.active_set.end(), b);
        c.check(superset, "adding UEs never shrinks the active set");
    }

    // PDF/CCDF throughput-integral equivalence at 1e-6
    {
        QuadratureSpec quad;
        quad.rel_tol = 1e-12;
        const double g0 = 1.0;
        const double pdf_route =
            integrate([](double g) { return std::log2(1.0 + g) * std::exp(-g); }, g0, 80.0,
                      quad)
                .value;
        const double ccdf_route =
            integrate([](double g) { return std::exp(-g) / (1.0 + g); }, g0, 80.0, quad)
                    .value /
                std::log(2.0) +
            std::log2(1.0 + g0) * std::exp(-g0);
        c.check(std::fabs(pdf_route - ccdf_route) / ccdf_route < 1e-6,
                "throughput integral, PDF vs CCDF route at 1e-6");
    }

    // active-density law bounded by both densities on a 20x20 grid
    {
        bool ok = true;
        for (int i = 0; i < 20 && ok; ++i)
            for (int j = 0; j < 20 && ok; ++j) {
                const double lambda = std::pow(10.0, -1.0 + 0.4 * i);
                const double rho = std::pow(10.0, -1.0 + 0.4 * j);
                const double a = active_bs_density(lambda, rho, 3.5);
                ok = a > 0.0 && a <= std::min(lambda, rho) * (1.0 + 1e-12);
            }
        c.check(ok, "active density within (0, min(lambda, rho)] on a 20x20 grid");
    }

    // deterministic reproducibility across worker counts
    {
        NetworkParams q = scenario(1000, 300, 8.5);
        SimOptions one;
        one.trials = 500;
        one.seed = 777;
        one.workers = 1;
        SimOptions many = one;
        many.workers = 4;
        const CoverageEstimate a = estimate_coverage(q, model, 1.0, one);
        const CoverageEstimate b = estimate_coverage(q, model, 1.0, many);
        c.check(a.mean == b.mean, "seeded runs bit-identical across worker counts");
    }

    // MC Laplace-functional oracle at 3 sigma
    {
        rng::Stream st(4096);
        const int n = 20000;
        const double s = 1.0 / (p.tx_power * zeta);
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const PointSet pts = sample_hppp(p.rho, 1.5, st);
            double total = 0.0;
            for (const Point& pt : pts.points) {
                const double w = std::sqrt(pt.x * pt.x + pt.y * pt.y + p.height * p.height);
                const double pr = los_probability(model, w);
                const double z = st.uniform01() < pr
                                     ? eval_pathloss(model, w, LinkState::LoS)
                                     : eval_pathloss(model, w, LinkState::NLoS);
                total += p.tx_power * z * st.exponential();
            }
            const double e = std::exp(-s * total);
            sum += e;
            sum2 += e * e;
        }
        const double mc = sum / n;
        const double se = std::sqrt((sum2 / n - mc * mc) / n);
        const double analytic = laplace_interference(s, p.rho, model, p.height, p.tx_power);
        c.check(std::fabs(analytic - mc) < 3.0 * se,
                "shot-noise Laplace oracle: " + fmt(analytic) + " vs " + fmt(mc) + " at 3 se");
    }

    c.finish();
}

// 9. qualitative coverage-vs-density shape: high at 1e2, low at 1e3, high at 1e5
static void criterion_9(const PathLossModel& model) {
    Criterion c("9 [coverage shape vs density]");
    SimOptions opts;
    opts.trials = 4000;
    opts.seed = 31337;
    const CoverageEstimate p2 = estimate_coverage(scenario(1e2, 300, 8.5), model, 1.0, opts);
    const CoverageEstimate p3 = estimate_coverage(scenario(1e3, 300, 8.5), model, 1.0, opts);
    const CoverageEstimate p5 = estimate_coverage(scenario(1e5, 300, 8.5), model, 1.0, opts);
    auto sep = [](const CoverageEstimate& hi, const CoverageEstimate& lo) {
        return hi.mean - lo.mean >
               3.0 * std::sqrt(hi.std_error * hi.std_error + lo.std_error * lo.std_error);
    };
    c.check(sep(p2, p3), "p(1e2) = " + fmt(p2.mean) + " > p(1e3) = " + fmt(p3.mean) +
                             " at 3 sigma (interference dip)");
    c.check(sep(p5, p3), "p(1e5) = " + fmt(p5.mean) + " > p(1e3) = " + fmt(p3.mean) +
                             " at 3 sigma (idle-mode recovery)");
    c.finish();
}

int main() {
    const PathLossModel model = three_gpp_case();
    criterion_1(model);
    criterion_2(model);
    criterion_3(model);
    criterion_4(model);
    criterion_5(model);
    criterion_6(model);
    criterion_7(model);
    criterion_8(model);
    criterion_9(model);

    std::printf("\nACCEPTANCE: %d/9 criteria passed\n", 9 - g_failures);
    return g_failures;
}
