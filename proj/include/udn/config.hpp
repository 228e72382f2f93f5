#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "udn/deployment.hpp"
#include "udn/errors.hpp"
#include "udn/pathloss.hpp"
#include "udn/quadrature.hpp"
#include "udn/simulator.hpp"
#include "udn/units.hpp"

// Flat key = value config with [sections]. External units (dBm, dB, m) are
// converted to internal units (mW, linear, km) exactly once, here.

namespace udn {

struct ScenarioConfig {
    double lambda_per_km2 = 1e6;
    double rho_per_km2 = 300.0;
    double height_m = 8.5;
    double tx_power_dbm = 24.0;
    double noise_power_dbm = -95.0;
    double q = 3.5;
    double gamma0_db = 0.0;
    double epsilon = 0.05;
    std::uint64_t seed = 1;
    double tail_fraction = 1e-3;
    std::string model = "3gpp-36828";

    NetworkParams to_params() const {
        NetworkParams p;
        p.lambda = lambda_per_km2;
        p.rho = rho_per_km2;
        p.height = m_to_km(height_m);
        p.tx_power = dbm_to_mw(tx_power_dbm);
        p.noise_power = dbm_to_mw(noise_power_dbm);
        p.idle_exponent = q;
        p.gamma0 = db_to_linear(gamma0_db);
        p.epsilon = epsilon;
        p.validate();
        return p;
    }
};

struct EngineConfig {
    long trials = 10000;
    int workers = 0;
    double radius_km = 0.0; // 0 = auto
    double rel_tol = 1e-9;
    std::string engine = "dense-approx"; // or "mc"

    SimOptions to_sim_options(const ScenarioConfig& sc) const {
        SimOptions o;
        o.seed = sc.seed;
        o.trials = trials;
        o.workers = workers;
        o.radius_km = radius_km;
        o.tail_fraction = sc.tail_fraction;
        return o;
    }

    QuadratureSpec to_quad() const {
        QuadratureSpec q;
        q.rel_tol = rel_tol;
        q.validate();
        return q;
    }
};

struct SweepConfig {
    std::vector<double> lambdas;   // per km^2; empty = scenario value
    std::vector<double> rhos;      // per km^2
    std::vector<double> gammas_db; // thresholds in dB
};

struct RunConfig {
    ScenarioConfig scenario;
    EngineConfig engine;
    SweepConfig sweep;
    std::string command;
    std::string output_path;
    std::optional<PathLossModel> custom_model;

    PathLossModel make_model() const {
        if (scenario.model == "3gpp-36828" || scenario.model == "3gpp") return three_gpp_case();
        if (scenario.model == "custom") {
            if (!custom_model)
                throw config_error("model = custom requires [model.segment.N] sections");
            return *custom_model;
        }
        throw config_error("unknown model '" + scenario.model +
                           "' (expected 3gpp-36828 or custom)");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("expected a number, got '" + v + "'", line);
    }
}

inline long parse_long(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("expected an integer, got '" + v + "'", line);
    }
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline LosProbSpec parse_los_prob(const std::string& v, int line) {
    const auto tok = split_ws(v);
    if (tok.size() == 2 && tok[0] == "const")
        return LosProbSpec::constant(parse_double(tok[1], line));
    if (tok.size() == 3 && tok[0] == "one-minus-exp")
        return LosProbSpec::one_minus_exp(parse_double(tok[1], line),
                                          parse_double(tok[2], line));
    if (tok.size() == 3 && tok[0] == "exp-decay")
        return LosProbSpec::exp_decay(parse_double(tok[1], line), parse_double(tok[2], line));
    throw config_error("bad los_prob spec '" + v +
                       "' (expected: const p | one-minus-exp a r_km | exp-decay a r_km)",
                       line);
}

// Axis spec: "a,b,c" explicit list, or "lo:hi:n" range. Ranges are log-spaced
// for densities and linearly spaced for dB axes.
inline std::vector<double> parse_axis(const std::string& v, bool log_spaced, int line) {
    std::vector<double> out;
    if (v.find(':') != std::string::npos) {
        double lo = 0.0, hi = 0.0;
        long n = 0;
        std::string s = v;
        for (auto& c : s)
            if (c == ':') c = ' ';
        std::istringstream is(s);
        if (!(is >> lo >> hi >> n) || n < 1)
            throw config_error("bad axis range '" + v + "' (expected lo:hi:n)", line);
        if (log_spaced && (!(lo > 0.0) || !(hi > 0.0)))
            throw config_error("log-spaced axis needs positive bounds in '" + v + "'", line);
        if (n == 1) return {lo};
        for (long i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(n - 1);
            out.push_back(log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
        }
        return out;
    }
    std::string s = v;
    for (auto& c : s)
        if (c == ',') c = ' ';
    std::istringstream is(s);
    double x;
    while (is >> x) out.push_back(x);
    if (out.empty()) throw config_error("empty axis spec '" + v + "'", line);
    return out;
}

struct SegmentDraft {
    std::optional<double> break_km, a_los, a_nlos, alpha_los, alpha_nlos;
    std::optional<LosProbSpec> los_prob;
    int line = 0;
};

} // namespace detail

// Parse a config file. Unknown keys and malformed values are errors with the
// offending line number.
inline RunConfig parse_config(std::istream& in) {
    using detail::parse_double;
    using detail::parse_long;
    RunConfig cfg;
    std::map<int, detail::SegmentDraft> segments;

    std::string raw, section = "scenario";
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const std::size_t hash = s.find('#');
        if (hash != std::string::npos) s.erase(hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw config_error("unterminated section header", line);
            section = detail::trim(s.substr(1, s.size() - 2));
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw config_error("expected key = value", line);
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty()) throw config_error("expected key = value", line);

        if (section == "scenario") {
            auto& sc = cfg.scenario;
            if (key == "lambda_per_km2") sc.lambda_per_km2 = parse_double(val, line);
            else if (key == "rho_per_km2") sc.rho_per_km2 = parse_double(val, line);
            else if (key == "height_m") sc.height_m = parse_double(val, line);
            else if (key == "tx_power_dbm") sc.tx_power_dbm = parse_double(val, line);
            else if (key == "noise_power_dbm") sc.noise_power_dbm = parse_double(val, line);
            else if (key == "q") sc.q = parse_double(val, line);
            else if (key == "gamma0_db") sc.gamma0_db = parse_double(val, line);
            else if (key == "epsilon") sc.epsilon = parse_double(val, line);
            else if (key == "seed") sc.seed = static_cast<std::uint64_t>(parse_long(val, line));
            else if (key == "tail_fraction") sc.tail_fraction = parse_double(val, line);
            else if (key == "model") sc.model = val;
            else throw config_error("unknown scenario key '" + key + "'", line);
        } else if (section == "engine") {
            auto& en = cfg.engine;
            if (key == "trials") en.trials = parse_long(val, line);
            else if (key == "workers") en.workers = static_cast<int>(parse_long(val, line));
            else if (key == "radius_km")
                en.radius_km = (val == "auto") ? 0.0 : parse_double(val, line);
            else if (key == "rel_tol") en.rel_tol = parse_double(val, line);
            else if (key == "engine") en.engine = val;
            else throw config_error("unknown engine key '" + key + "'", line);
        } else if (section == "sweep") {
            auto& sw = cfg.sweep;
            if (key == "lambdas") sw.lambdas = detail::parse_axis(val, true, line);
            else if (key == "rhos") sw.rhos = detail::parse_axis(val, true, line);
            else if (key == "gammas_db") sw.gammas_db = detail::parse_axis(val, false, line);
            else throw config_error("unknown sweep key '" + key + "'", line);
        } else if (section == "output") {
            if (key == "path") cfg.output_path = val;
            else throw config_error("unknown output key '" + key + "'", line);
        } else if (section.rfind("model.segment.", 0) == 0) {
            const int idx = static_cast<int>(parse_long(section.substr(14), line));
            auto& seg = segments[idx];
            seg.line = line;
            if (key == "break_km")
                seg.break_km = (val == "inf") ? std::numeric_limits<double>::infinity()
                                              : parse_double(val, line);
            else if (key == "a_los") seg.a_los = parse_double(val, line);
            else if (key == "a_nlos") seg.a_nlos = parse_double(val, line);
            else if (key == "alpha_los") seg.alpha_los = parse_double(val, line);
            else if (key == "alpha_nlos") seg.alpha_nlos = parse_double(val, line);
            else if (key == "los_prob") seg.los_prob = detail::parse_los_prob(val, line);
            else throw config_error("unknown segment key '" + key + "'", line);
        } else {
            throw config_error("unknown section [" + section + "]", line);
        }
    }

    if (!segments.empty()) {
        std::vector<PathLossSegment> segs;
        int expect = 1;
        for (const auto& [idx, draft] : segments) {
            if (idx != expect)
                throw config_error("model segments must be numbered 1..N contiguously",
                                   draft.line);
            ++expect;
            if (!draft.a_los || !draft.a_nlos || !draft.alpha_los || !draft.alpha_nlos ||
                !draft.los_prob)
                throw config_error("segment " + std::to_string(idx) +
                                       " missing a_los/a_nlos/alpha_los/alpha_nlos/los_prob",
                                   draft.line);
            PathLossSegment s;
            s.upper_break = draft.break_km.value_or(std::numeric_limits<double>::infinity());
            s.a_los = *draft.a_los;
            s.a_nlos = *draft.a_nlos;
            s.alpha_los = *draft.alpha_los;
            s.alpha_nlos = *draft.alpha_nlos;
            s.los_prob = *draft.los_prob;
            segs.push_back(s);
        }
        try {
            cfg.custom_model = PathLossModel(std::move(segs));
        } catch (const model_error& e) {
            throw config_error(std::string("invalid custom model: ") + e.what());
        }
    }
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    try {
        return parse_config(in);
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

} // namespace udn
