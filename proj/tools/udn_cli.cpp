// Command-line front end: scenario configuration, parameter sweeps, and the
// reproduction recipes. Numeric output goes to provenance-stamped CSV files
// (atomic rename, no partial files) or to stdout as key = value lines.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "udn/analytic.hpp"
#include "udn/capacity.hpp"
#include "udn/config.hpp"
#include "udn/csv.hpp"
#include "udn/deployment.hpp"
#include "udn/pathloss.hpp"
#include "udn/simulator.hpp"
#include "udn/units.hpp"
#include "udn/version.hpp"

namespace {

using udn::format_number;

std::string join_axis(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += udn::format_number(xs[i]);
    }
    return out;
}

void stamp_scenario(udn::CsvWriter& csv, const udn::RunConfig& cfg) {
    const auto& sc = cfg.scenario;
    csv.provenance("lambda_per_km2", sc.lambda_per_km2);
    csv.provenance("rho_per_km2", sc.rho_per_km2);
    csv.provenance("height_m", sc.height_m);
    csv.provenance("tx_power_dbm", sc.tx_power_dbm);
    csv.provenance("noise_power_dbm", sc.noise_power_dbm);
    csv.provenance("q", sc.q);
    csv.provenance("gamma0_db", sc.gamma0_db);
    csv.provenance("epsilon", sc.epsilon);
    csv.provenance("seed", static_cast<long>(sc.seed));
    csv.provenance("tail_fraction", sc.tail_fraction);
    csv.provenance("model", sc.model);
    csv.provenance("trials", cfg.engine.trials);
    csv.provenance("radius_km", cfg.engine.radius_km > 0.0
                                    ? format_number(cfg.engine.radius_km)
                                    : std::string("auto"));
    csv.provenance("rel_tol", cfg.engine.rel_tol);
    csv.provenance("engine", cfg.engine.engine);
    if (!cfg.sweep.lambdas.empty()) csv.provenance("sweep_lambdas", join_axis(cfg.sweep.lambdas));
    if (!cfg.sweep.rhos.empty()) csv.provenance("sweep_rhos", join_axis(cfg.sweep.rhos));
    if (!cfg.sweep.gammas_db.empty())
        csv.provenance("sweep_gammas_db", join_axis(cfg.sweep.gammas_db));
}

void emit(const udn::CsvWriter& csv, const std::string& out_path) {
    if (out_path.empty())
        csv.write(std::cout);
    else
        csv.write_atomic(out_path);
}

std::vector<double> axis_or(const std::vector<double>& axis, double fallback) {
    return axis.empty() ? std::vector<double>{fallback} : axis;
}

udn::AseEngine make_engine(const udn::RunConfig& cfg) {
    if (cfg.engine.engine == "mc" || cfg.engine.engine == "monte-carlo")
        return udn::AseEngine::monte_carlo(cfg.engine.to_sim_options(cfg.scenario));
    if (cfg.engine.engine == "dense-approx" || cfg.engine.engine == "dense")
        return udn::AseEngine::dense();
    throw udn::config_error("unknown engine '" + cfg.engine.engine +
                            "' (expected mc or dense-approx)");
}

int cmd_limit(const udn::RunConfig& cfg, double gamma_db) {
    const udn::NetworkParams params = cfg.scenario.to_params();
    const udn::PathLossModel model = cfg.make_model();
    const udn::QuadratureSpec quad = cfg.engine.to_quad();
    const double gamma = udn::db_to_linear(gamma_db);

    const double pcov = udn::coverage_limit(params, model, gamma, quad);
    const udn::PowerLawFactors f = udn::power_law_factors(params, model, gamma, quad);
    const double ase = udn::ase_limit(params, model, params.gamma0, quad);

    std::printf("pcov_limit = %.10g\n", pcov);
    std::printf("c = %.10g\n", f.c);
    std::printf("g = %.10g\n", f.g);
    std::printf("ase_limit = %.10g\n", ase);

    if (!cfg.output_path.empty()) {
        udn::CsvWriter csv("limit");
        stamp_scenario(csv, cfg);
        csv.provenance("gamma_db", gamma_db);
        csv.header({"rho", "height_m", "gamma_db", "pcov_limit", "c", "g", "ase_limit"});
        csv.row({format_number(params.rho), format_number(cfg.scenario.height_m),
                 format_number(gamma_db), format_number(pcov), format_number(f.c),
                 format_number(f.g), format_number(ase)});
        csv.write_atomic(cfg.output_path);
    }
    return 0;
}

int cmd_coverage_sweep(const udn::RunConfig& cfg) {
    const udn::PathLossModel model = cfg.make_model();
    const udn::QuadratureSpec quad = cfg.engine.to_quad();
    const auto lambdas = axis_or(cfg.sweep.lambdas, cfg.scenario.lambda_per_km2);
    const auto rhos = axis_or(cfg.sweep.rhos, cfg.scenario.rho_per_km2);
    const auto gammas_db = axis_or(cfg.sweep.gammas_db, cfg.scenario.gamma0_db);

    udn::CsvWriter csv("coverage-sweep");
    stamp_scenario(csv, cfg);
    csv.header({"lambda", "rho", "gamma_db", "pcov_limit", "pcov_dense_approx", "c", "g"});
    for (const double rho : rhos) {
        udn::RunConfig at = cfg;
        at.scenario.rho_per_km2 = rho;
        for (const double gdb : gammas_db) {
            udn::NetworkParams params = at.scenario.to_params();
            const double gamma = udn::db_to_linear(gdb);
            const double plim = udn::coverage_limit(params, model, gamma, quad);
            const udn::PowerLawFactors f = udn::power_law_factors(params, model, gamma, quad);
            for (const double lambda : lambdas) {
                params.lambda = lambda;
                const double pdense = udn::dense_coverage_approx(params, model, gamma, quad);
                csv.row({format_number(lambda), format_number(rho), format_number(gdb),
                         format_number(plim), format_number(pdense), format_number(f.c),
                         format_number(f.g)});
            }
        }
    }
    emit(csv, cfg.output_path);
    return 0;
}

int cmd_simulate(const udn::RunConfig& cfg, double gamma_db) {
    const udn::PathLossModel model = cfg.make_model();
    const auto lambdas = axis_or(cfg.sweep.lambdas, cfg.scenario.lambda_per_km2);
    const auto rhos = axis_or(cfg.sweep.rhos, cfg.scenario.rho_per_km2);
    const double gamma = udn::db_to_linear(gamma_db);

    udn::CsvWriter csv("simulate");
    stamp_scenario(csv, cfg);
    csv.provenance("gamma_db", gamma_db);
    csv.header({"lambda", "rho", "height_m", "gamma_db", "pcov_mc", "pcov_stderr",
                "active_density_mc", "trials", "seed"});
    for (const double lambda : lambdas) {
        for (const double rho : rhos) {
            udn::RunConfig at = cfg;
            at.scenario.lambda_per_km2 = lambda;
            at.scenario.rho_per_km2 = rho;
            const udn::NetworkParams params = at.scenario.to_params();
            const udn::SimOptions opts = cfg.engine.to_sim_options(at.scenario);

            const double radius = udn::sim_window_radius(params, model, opts);
            udn::SimOptions fixed = opts;
            fixed.radius_km = radius;
            const std::vector<udn::TrialStats> stats =
                udn::simulate_trials(params, model, fixed);

            long hits = 0;
            double active_sum = 0.0;
            const double area = M_PI * radius * radius;
            for (const auto& s : stats) {
                hits += s.sinr > gamma ? 1 : 0;
                active_sum += static_cast<double>(s.active_count) / area;
            }
            const double n = static_cast<double>(stats.size());
            const double p = static_cast<double>(hits) / n;
            const double se = std::sqrt(p * (1.0 - p) / n);
            csv.row({format_number(lambda), format_number(rho),
                     format_number(cfg.scenario.height_m), format_number(gamma_db),
                     format_number(p), format_number(se), format_number(active_sum / n),
                     std::to_string(opts.trials),
                     std::to_string(static_cast<long>(opts.seed))});
        }
    }
    emit(csv, cfg.output_path);
    return 0;
}

int cmd_ase_sweep(const udn::RunConfig& cfg) {
    const udn::PathLossModel model = cfg.make_model();
    const udn::QuadratureSpec quad = cfg.engine.to_quad();
    const udn::AseEngine engine = make_engine(cfg);
    const auto lambdas = axis_or(cfg.sweep.lambdas, cfg.scenario.lambda_per_km2);
    const auto rhos = axis_or(cfg.sweep.rhos, cfg.scenario.rho_per_km2);

    udn::CsvWriter csv("ase-sweep");
    stamp_scenario(csv, cfg);
    csv.header({"lambda", "rho", "gamma0_db", "ase", "ase_limit", "engine", "uncertainty"});
    for (const double rho : rhos) {
        udn::RunConfig at = cfg;
        at.scenario.rho_per_km2 = rho;
        udn::NetworkParams params = at.scenario.to_params();
        const double lim = udn::ase_limit(params, model, params.gamma0, quad);
        for (const double lambda : lambdas) {
            params.lambda = lambda;
            const udn::AseEstimate est =
                udn::ase_finite(params, model, params.gamma0, engine, quad);
            csv.row({format_number(lambda), format_number(rho),
                     format_number(cfg.scenario.gamma0_db), format_number(est.value),
                     format_number(lim), cfg.engine.engine, format_number(est.std_error)});
        }
    }
    emit(csv, cfg.output_path);
    return 0;
}

int cmd_deploy(const udn::RunConfig& cfg) {
    const udn::NetworkParams params = cfg.scenario.to_params();
    const udn::PathLossModel model = cfg.make_model();
    const udn::QuadratureSpec quad = cfg.engine.to_quad();
    const udn::DesignSolution sol =
        udn::solve_bs_deployment(params, model, make_engine(cfg), quad);

    if (!sol.solved) {
        std::fprintf(stderr, "error: deploy: %s\n", sol.diagnostic.c_str());
        return 1;
    }
    std::printf("lambda_star = %.10g\n", sol.located_value);
    std::printf("target_ase = %.10g\n", sol.target_ase);
    std::printf("achieved_ase = %.10g\n", sol.achieved_ase);
    if (sol.achieved_se > 0.0) std::printf("achieved_se = %.10g\n", sol.achieved_se);
    std::printf("iterations = %ld\n", sol.iterations);
    std::printf("bracket = [%.10g, %.10g]\n", sol.bracket_lo, sol.bracket_hi);
    std::printf("verified = %s\n", sol.verified ? "true" : "false");
    if (!sol.diagnostic.empty()) std::printf("diagnostic = %s\n", sol.diagnostic.c_str());

    if (!cfg.output_path.empty()) {
        udn::CsvWriter csv("deploy");
        stamp_scenario(csv, cfg);
        csv.header({"lambda_star", "target_ase", "achieved_ase", "achieved_se", "iterations",
                    "bracket_lo", "bracket_hi", "verified"});
        csv.row({format_number(sol.located_value), format_number(sol.target_ase),
                 format_number(sol.achieved_ase), format_number(sol.achieved_se),
                 std::to_string(sol.iterations), format_number(sol.bracket_lo),
                 format_number(sol.bracket_hi), sol.verified ? "true" : "false"});
        csv.write_atomic(cfg.output_path);
    }
    return sol.verified ? 0 : 1;
}

int cmd_schedule(const udn::RunConfig& cfg) {
    const udn::NetworkParams params = cfg.scenario.to_params();
    const udn::PathLossModel model = cfg.make_model();
    const udn::QuadratureSpec quad = cfg.engine.to_quad();
    const udn::DesignSolution sol =
        udn::solve_ue_scheduling(params, model, params.gamma0, make_engine(cfg), quad);

    std::printf("rho_star = %.10g\n", sol.located_value);
    std::printf("ase = %.10g\n", sol.achieved_ase);
    std::printf("ssr_density = %.10g\n", sol.implied_ssr_density);
    std::printf("iterations = %ld\n", sol.iterations);
    std::printf("bracket = [%.10g, %.10g]\n", sol.bracket_lo, sol.bracket_hi);
    if (!sol.diagnostic.empty()) std::printf("diagnostic = %s\n", sol.diagnostic.c_str());

    if (!cfg.output_path.empty()) {
        udn::CsvWriter csv("schedule");
        stamp_scenario(csv, cfg);
        csv.header({"rho_star", "ase", "ssr_density", "iterations", "bracket_lo",
                    "bracket_hi"});
        csv.row({format_number(sol.located_value), format_number(sol.achieved_ase),
                 format_number(sol.implied_ssr_density), std::to_string(sol.iterations),
                 format_number(sol.bracket_lo), format_number(sol.bracket_hi)});
        csv.write_atomic(cfg.output_path);
    }
    return 0;
}

// Coverage vs BS density sweep: Monte Carlo markers against the dense
// approximation and the limit, for rho x height combinations.
int cmd_reproduce_fig1(udn::RunConfig cfg) {
    const udn::PathLossModel model = cfg.make_model();
    const udn::QuadratureSpec quad = cfg.engine.to_quad();
    if (cfg.sweep.lambdas.empty())
        cfg.sweep.lambdas = udn::detail::parse_axis("1e-1:1e6:29", true, 0);
    const std::vector<double> rhos = cfg.sweep.rhos.empty()
                                         ? std::vector<double>{300.0, 600.0}
                                         : cfg.sweep.rhos;
    const std::vector<double> heights_m{3.5, 8.5};
    const double gamma_db = 0.0;
    const double gamma = udn::db_to_linear(gamma_db);

    udn::CsvWriter csv("reproduce fig1");
    stamp_scenario(csv, cfg);
    csv.provenance("gamma_db", gamma_db);
    csv.header({"lambda", "rho", "height_m", "gamma_db", "pcov_mc", "pcov_stderr",
                "pcov_dense_approx", "pcov_limit", "trials", "seed"});
    for (const double rho : rhos) {
        for (const double height_m : heights_m) {
            udn::RunConfig at = cfg;
            at.scenario.rho_per_km2 = rho;
            at.scenario.height_m = height_m;
            udn::NetworkParams params = at.scenario.to_params();
            const double plim = udn::coverage_limit(params, model, gamma, quad);
            for (const double lambda : cfg.sweep.lambdas) {
                params.lambda = lambda;
                const double pdense = udn::dense_coverage_approx(params, model, gamma, quad);
                const udn::SimOptions opts = cfg.engine.to_sim_options(at.scenario);
                udn::NetworkParams p = params;
                const udn::CoverageEstimate mc =
                    udn::estimate_coverage(p, model, gamma, opts);
                csv.row({format_number(lambda), format_number(rho), format_number(height_m),
                         format_number(gamma_db), format_number(mc.mean),
                         format_number(mc.std_error), format_number(pdense),
                         format_number(plim), std::to_string(opts.trials),
                         std::to_string(static_cast<long>(opts.seed))});
            }
        }
    }
    emit(csv, cfg.output_path.empty() ? "fig1.csv" : cfg.output_path);
    return 0;
}

// ASE vs BS density for several UE densities, against the constant limit.
int cmd_reproduce_fig2(udn::RunConfig cfg) {
    const udn::PathLossModel model = cfg.make_model();
    const udn::QuadratureSpec quad = cfg.engine.to_quad();
    if (cfg.sweep.lambdas.empty())
        cfg.sweep.lambdas = udn::detail::parse_axis("1e2:1e6:17", true, 0);
    const std::vector<double> rhos = cfg.sweep.rhos.empty()
                                         ? std::vector<double>{300.0, 600.0, 1000.0, 2000.0}
                                         : cfg.sweep.rhos;

    udn::CsvWriter csv("reproduce fig2");
    stamp_scenario(csv, cfg);
    csv.header({"lambda", "rho", "gamma0_db", "ase", "ase_limit", "engine", "uncertainty"});
    for (const double rho : rhos) {
        udn::RunConfig at = cfg;
        at.scenario.rho_per_km2 = rho;
        at.scenario.height_m = 8.5;
        udn::NetworkParams params = at.scenario.to_params();
        const double lim = udn::ase_limit(params, model, params.gamma0, quad);
        for (const double lambda : cfg.sweep.lambdas) {
            params.lambda = lambda;
            const udn::AseEstimate est =
                udn::ase_finite(params, model, params.gamma0, udn::AseEngine::dense(), quad);
            csv.row({format_number(lambda), format_number(rho),
                     format_number(cfg.scenario.gamma0_db), format_number(est.value),
                     format_number(lim), "dense-approx", format_number(est.std_error)});
        }
    }
    emit(csv, cfg.output_path.empty() ? "fig2.csv" : cfg.output_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"udn " + std::string(udn::version_string) +
                 " - coverage and spectral-efficiency analysis of ultra-dense "
                 "cellular networks"};
    app.fallthrough();

    std::string config_path, out_path, model_name, engine_name, radius_spec;
    std::string lambdas_spec, rhos_spec, gammas_db_spec;
    double lambda = 0, rho = 0, height_m = 0, tx_dbm = 0, noise_dbm = 0, q = 0;
    double gamma0_db = 0, epsilon = 0, tail_fraction = 0, gamma_db = 0, rel_tol = 0;
    long trials = 0, seed = 0;
    int workers = 0;

    auto* o_config = app.add_option("--config", config_path, "Config file (key = value sections)");
    auto* o_out = app.add_option("--out", out_path, "Output CSV path (stdout when omitted)");
    auto* o_lambda = app.add_option("--lambda", lambda, "BS density per km^2");
    auto* o_rho = app.add_option("--rho", rho, "Active-UE density per km^2");
    auto* o_height = app.add_option("--height-m", height_m, "Antenna height difference, m");
    auto* o_tx = app.add_option("--tx-power-dbm", tx_dbm, "BS transmit power, dBm");
    auto* o_noise = app.add_option("--noise-power-dbm", noise_dbm, "Noise power, dBm");
    auto* o_q = app.add_option("--q", q, "Idle-mode exponent of the active-density law");
    auto* o_g0 = app.add_option("--gamma0-db", gamma0_db, "Minimum working SINR, dB");
    auto* o_eps = app.add_option("--epsilon", epsilon, "Relative ASE gap for deploy");
    auto* o_tail = app.add_option("--tail-fraction", tail_fraction,
                                  "Mean-interference tail kept outside the window");
    auto* o_seed = app.add_option("--seed", seed, "Master RNG seed");
    auto* o_trials = app.add_option("--trials", trials, "Monte Carlo trials");
    auto* o_workers = app.add_option("--workers", workers, "Worker threads (0 = auto)");
    auto* o_model = app.add_option("--model", model_name, "Path-loss model (3gpp-36828|custom)");
    auto* o_engine = app.add_option("--engine", engine_name, "ASE engine (mc|dense-approx)");
    auto* o_radius = app.add_option("--radius-km", radius_spec, "Window radius, km or 'auto'");
    auto* o_rel_tol = app.add_option("--rel-tol", rel_tol, "Quadrature relative tolerance");
    auto* o_gamma = app.add_option("--gamma-db", gamma_db, "SINR threshold, dB");
    auto* o_lambdas = app.add_option("--lambdas", lambdas_spec, "Lambda axis: list or lo:hi:n (log)");
    auto* o_rhos = app.add_option("--rhos", rhos_spec, "Rho axis: list or lo:hi:n (log)");
    auto* o_gammas = app.add_option("--gammas-db", gammas_db_spec,
                                    "Threshold axis in dB: list or lo:hi:n (linear)");

    app.require_subcommand(1);
    auto* sub_limit = app.add_subcommand("limit", "Dense-limit coverage, power-law factors, ASE limit");
    auto* sub_cov = app.add_subcommand("coverage-sweep", "Analytic coverage over lambda/rho/gamma axes");
    auto* sub_sim = app.add_subcommand("simulate", "Monte Carlo coverage and active density");
    auto* sub_ase = app.add_subcommand("ase-sweep", "ASE over lambda/rho axes");
    auto* sub_deploy = app.add_subcommand("deploy", "Smallest BS density within epsilon of the ASE limit");
    auto* sub_sched = app.add_subcommand("schedule", "UE density maximizing the ASE");
    auto* sub_repro = app.add_subcommand("reproduce", "Canned sweep recipes");
    std::string recipe;
    sub_repro->add_option("recipe", recipe, "fig1 | fig2")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        udn::RunConfig cfg;
        if (o_config->count()) cfg = udn::parse_config_file(config_path);

        if (o_lambda->count()) cfg.scenario.lambda_per_km2 = lambda;
        if (o_rho->count()) cfg.scenario.rho_per_km2 = rho;
        if (o_height->count()) cfg.scenario.height_m = height_m;
        if (o_tx->count()) cfg.scenario.tx_power_dbm = tx_dbm;
        if (o_noise->count()) cfg.scenario.noise_power_dbm = noise_dbm;
        if (o_q->count()) cfg.scenario.q = q;
        if (o_g0->count()) cfg.scenario.gamma0_db = gamma0_db;
        if (o_eps->count()) cfg.scenario.epsilon = epsilon;
        if (o_tail->count()) cfg.scenario.tail_fraction = tail_fraction;
        if (o_seed->count()) cfg.scenario.seed = static_cast<std::uint64_t>(seed);
        if (o_model->count()) cfg.scenario.model = model_name;
        if (o_trials->count()) cfg.engine.trials = trials;
        if (o_workers->count()) cfg.engine.workers = workers;
        if (o_engine->count()) cfg.engine.engine = engine_name;
        if (o_rel_tol->count()) cfg.engine.rel_tol = rel_tol;
        if (o_radius->count())
            cfg.engine.radius_km =
                radius_spec == "auto" ? 0.0 : udn::detail::parse_double(radius_spec, 0);
        if (o_lambdas->count())
            cfg.sweep.lambdas = udn::detail::parse_axis(lambdas_spec, true, 0);
        if (o_rhos->count()) cfg.sweep.rhos = udn::detail::parse_axis(rhos_spec, true, 0);
        if (o_gammas->count())
            cfg.sweep.gammas_db = udn::detail::parse_axis(gammas_db_spec, false, 0);
        if (o_out->count()) cfg.output_path = out_path;

        const double gdb = o_gamma->count() ? gamma_db : cfg.scenario.gamma0_db;

        if (*sub_limit) { cfg.command = "limit"; return cmd_limit(cfg, gdb); }
        if (*sub_cov) { cfg.command = "coverage-sweep"; return cmd_coverage_sweep(cfg); }
        if (*sub_sim) { cfg.command = "simulate"; return cmd_simulate(cfg, gdb); }
        if (*sub_ase) { cfg.command = "ase-sweep"; return cmd_ase_sweep(cfg); }
        if (*sub_deploy) {
            cfg.command = "deploy";
            if (!o_engine->count() && cfg.engine.engine == "dense-approx")
                cfg.engine.engine = "mc"; // deploy defaults to the MC-verified engine
            return cmd_deploy(cfg);
        }
        if (*sub_sched) { cfg.command = "schedule"; return cmd_schedule(cfg); }
        if (*sub_repro) {
            cfg.command = "reproduce " + recipe;
            if (!o_trials->count()) cfg.engine.trials = 2000;
            if (recipe == "fig1") return cmd_reproduce_fig1(cfg);
            if (recipe == "fig2") return cmd_reproduce_fig2(cfg);
            throw udn::config_error("unknown recipe '" + recipe + "' (expected fig1 or fig2)");
        }
        throw udn::config_error("no command given");
    } catch (const udn::config_error& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
