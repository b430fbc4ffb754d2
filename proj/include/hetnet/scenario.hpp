#pragma once

// Scenario-file front end: a line-oriented format with [network], [tier],
// [mc], [sweep] and [output] sections, plus the batch runner that turns a
// parsed scenario into CSV rows.

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hetnet/mcsim.hpp"
#include "hetnet/rate_multi.hpp"

namespace hetnet {

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SweepVariable { snr_db, lambda, rho, freq_bands };

struct SweepSpec {
    SweepVariable variable;
    std::vector<double> values;
};

struct ScenarioFile {
    NetworkSpec network;
    std::optional<SweepSpec> sweep;
    std::optional<McConfig> mc;
    std::optional<std::string> output;
    std::vector<std::optional<double>> tier_snr_db;  // per-tier snr_db keys, if given
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_number(std::string_view v, int line) {
    try {
        size_t used = 0;
        const std::string tmp(v);
        const double x = std::stod(tmp, &used);
        if (used != tmp.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw parse_error("line " + std::to_string(line) + ": expected a number, got '" +
                          std::string(v) + "'");
    }
}

inline FadingModel parse_fading(std::string_view v, int line) {
    std::istringstream in{std::string(v)};
    std::string name;
    in >> name;
    std::map<std::string, double> kv;
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw parse_error("line " + std::to_string(line) + ": fading parameter '" + tok +
                              "' is not key=value");
        kv[tok.substr(0, eq)] = parse_number(tok.substr(eq + 1), line);
    }
    auto take = [&](const char* key, std::optional<double> def = {}) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (def) return *def;
            throw parse_error("line " + std::to_string(line) + ": fading '" + name +
                              "' needs parameter " + key);
        }
        const double x = it->second;
        kv.erase(it);
        return x;
    };
    FadingModel model;
    if (name == "rayleigh") {
        model = Rayleigh{take("omega", 1.0)};
    } else if (name == "nakagami") {
        model = Nakagami{take("m"), take("omega", 1.0)};
    } else if (name == "lognormal") {
        const double sg = take("sigma_db");
        model = LogNormal{take("mu_db", unit_mean_mu_db(sg)), sg};
    } else if (name == "nakagami_lognormal") {
        const double m = take("m");
        const double sg = take("sigma_db");
        model = NakagamiLogNormal{m, take("mu_db", unit_mean_mu_db(sg)), sg};
    } else if (name == "rice_lognormal") {
        const double k = take("k"), sg = take("sigma_db");
        model = RiceLogNormal{k, take("mu_db", unit_mean_mu_db(sg)), sg};
    } else {
        throw parse_error("line " + std::to_string(line) + ": unknown fading model '" + name + "'");
    }
    if (!kv.empty())
        throw parse_error("line " + std::to_string(line) + ": unknown fading parameter '" +
                          kv.begin()->first + "'");
    try {
        validate(model);
    } catch (const std::domain_error& e) {
        throw validation_error("line " + std::to_string(line) + ": " + e.what());
    }
    return model;
}

inline std::vector<double> parse_list(std::string_view v, int line) {
    std::string s(v);
    for (auto& ch : s)
        if (ch == ',') ch = ' ';
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_number(tok, line));
    if (out.empty()) throw parse_error("line " + std::to_string(line) + ": empty value list");
    return out;
}

}  // namespace detail

inline ScenarioFile parse_scenario(std::string_view text) {
    ScenarioFile sc;
    sc.network.noise_power = -1.0;  // sentinel: not set
    std::string section;
    int tier_index = -1;
    std::optional<double> network_snr_db;
    bool have_mc = false, have_sweep = false;
    McConfig mc;
    SweepSpec sweep{SweepVariable::snr_db, {}};

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw parse_error("line " + std::to_string(line_no) + ": malformed section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section == "tier") {
                sc.network.tiers.push_back(TierSpec{});
                sc.network.tiers.back().lambda = -1.0;
                sc.network.tiers.back().power = -1.0;
                sc.network.tiers.back().alpha = -1.0;
                sc.tier_snr_db.push_back(std::nullopt);
                ++tier_index;
            } else if (section == "mc") {
                have_mc = true;
            } else if (section == "sweep") {
                have_sweep = true;
            } else if (section != "network" && section != "output") {
                throw parse_error("line " + std::to_string(line_no) + ": unknown section [" +
                                  section + "]");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw parse_error("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key{detail::trim(line.substr(0, eq))};
        const std::string_view val = detail::trim(line.substr(eq + 1));

        if (section == "network") {
            if (key == "noise_power")
                sc.network.noise_power = detail::parse_number(val, line_no);
            else if (key == "noise_dbm")
                sc.network.noise_power =
                    1e-3 * std::pow(10.0, detail::parse_number(val, line_no) / 10.0);
            else if (key == "snr_db")
                network_snr_db = detail::parse_number(val, line_no);
            else if (key == "n_gcq")
                sc.network.numerics.n_gcq = static_cast<int>(detail::parse_number(val, line_no));
            else if (key == "n_ghq")
                sc.network.numerics.n_ghq = static_cast<int>(detail::parse_number(val, line_no));
            else if (key == "epsilon")
                sc.network.numerics.epsilon = detail::parse_number(val, line_no);
            else if (key == "series_max_terms")
                sc.network.numerics.series.max_terms =
                    static_cast<int>(detail::parse_number(val, line_no));
            else if (key == "series_rel_stop")
                sc.network.numerics.series.rel_stop = detail::parse_number(val, line_no);
            else if (key == "inner_rel_tol")
                sc.network.numerics.inner_rel_tol = detail::parse_number(val, line_no);
            else if (key == "g_i_mode") {
                if (val == "closed")
                    sc.network.numerics.g_i_mode = GiMode::closed;
                else if (val == "integral")
                    sc.network.numerics.g_i_mode = GiMode::integral;
                else if (val == "auto")
                    sc.network.numerics.g_i_mode = GiMode::auto_mode;
                else
                    throw parse_error("line " + std::to_string(line_no) +
                                      ": g_i_mode must be closed|integral|auto");
            } else
                throw parse_error("line " + std::to_string(line_no) + ": unknown network key '" +
                                  key + "'");
        } else if (section == "tier") {
            if (tier_index < 0)
                throw parse_error("line " + std::to_string(line_no) + ": key outside any [tier]");
            auto& tier = sc.network.tiers.back();
            if (key == "lambda")
                tier.lambda = detail::parse_number(val, line_no);
            else if (key == "power")
                tier.power = detail::parse_number(val, line_no);
            else if (key == "alpha")
                tier.alpha = detail::parse_number(val, line_no);
            else if (key == "bias")
                tier.bias = detail::parse_number(val, line_no);
            else if (key == "freq_bands")
                tier.freq_bands = static_cast<int>(detail::parse_number(val, line_no));
            else if (key == "snr_db")
                sc.tier_snr_db.back() = detail::parse_number(val, line_no);
            else if (key == "fading") {
                tier.serving_fading = detail::parse_fading(val, line_no);
                tier.interferer_fading = tier.serving_fading;
            } else if (key == "serving_fading")
                tier.serving_fading = detail::parse_fading(val, line_no);
            else if (key == "interferer_fading")
                tier.interferer_fading = detail::parse_fading(val, line_no);
            else
                throw parse_error("line " + std::to_string(line_no) + ": unknown tier key '" + key +
                                  "'");
        } else if (section == "mc") {
            if (key == "trials")
                mc.n_trials = static_cast<uint64_t>(detail::parse_number(val, line_no));
            else if (key == "seed")
                mc.master_seed = static_cast<uint64_t>(detail::parse_number(val, line_no));
            else if (key == "radius")
                mc.radius_override = detail::parse_number(val, line_no);
            else if (key == "rho")
                mc.correlation_rho = detail::parse_number(val, line_no);
            else
                throw parse_error("line " + std::to_string(line_no) + ": unknown mc key '" + key +
                                  "'");
        } else if (section == "sweep") {
            if (key == "variable") {
                if (val == "snr_db")
                    sweep.variable = SweepVariable::snr_db;
                else if (val == "lambda")
                    sweep.variable = SweepVariable::lambda;
                else if (val == "rho")
                    sweep.variable = SweepVariable::rho;
                else if (val == "freq_bands")
                    sweep.variable = SweepVariable::freq_bands;
                else
                    throw parse_error("line " + std::to_string(line_no) +
                                      ": sweep variable must be snr_db|lambda|rho|freq_bands");
            } else if (key == "values")
                sweep.values = detail::parse_list(val, line_no);
            else
                throw parse_error("line " + std::to_string(line_no) + ": unknown sweep key '" +
                                  key + "'");
        } else if (section == "output") {
            if (key == "path")
                sc.output = std::string(val);
            else
                throw parse_error("line " + std::to_string(line_no) + ": unknown output key '" +
                                  key + "'");
        } else {
            throw parse_error("line " + std::to_string(line_no) + ": key outside any section");
        }
    }

    if (sc.network.tiers.empty()) throw validation_error("scenario needs at least one [tier]");

    // Resolve powers/noise from snr_db where needed and cross-check.
    const bool noise_set = sc.network.noise_power >= 0.0;
    for (size_t t = 0; t < sc.network.tiers.size(); ++t) {
        auto& tier = sc.network.tiers[t];
        std::optional<double> snr = sc.tier_snr_db[t];
        if (!snr && sc.network.tiers.size() == 1) snr = network_snr_db;
        if (tier.power <= 0.0) {
            if (!snr)
                throw validation_error("tier " + std::to_string(t + 1) +
                                       ": needs power or snr_db");
            if (!noise_set) sc.network.noise_power = 1.0;
            tier.power = std::pow(10.0, *snr / 10.0) * sc.network.noise_power;
        } else if (snr) {
            if (!noise_set)
                throw validation_error("tier " + std::to_string(t + 1) +
                                       ": snr_db with power needs noise_power");
            const double expect = std::pow(10.0, *snr / 10.0) * sc.network.noise_power;
            if (std::fabs(expect - tier.power) > 1e-6 * std::max(expect, tier.power))
                throw validation_error("tier " + std::to_string(t + 1) +
                                       ": snr_db inconsistent with power/noise_power");
        }
    }
    if (sc.network.noise_power < 0.0)
        throw validation_error("network: noise_power (or per-tier snr_db) is required");

    if (have_sweep) {
        if (sweep.values.empty()) throw validation_error("sweep: values are required");
        for (const double v : sweep.values) {
            switch (sweep.variable) {
                case SweepVariable::snr_db:
                    break;
                case SweepVariable::lambda:
                    if (!(v > 0.0)) throw validation_error("sweep: lambda values must be positive");
                    break;
                case SweepVariable::rho:
                    if (!(v >= 0.0 && v <= 1.0))
                        throw validation_error("sweep: rho values must lie in [0,1]");
                    break;
                case SweepVariable::freq_bands:
                    if (!(v >= 1.0 && v == std::floor(v)))
                        throw validation_error("sweep: freq_bands values must be integers >= 1");
                    break;
            }
        }
        sc.sweep = sweep;
    }
    if (have_mc) sc.mc = mc;

    try {
        validate(sc.network);
    } catch (const std::domain_error& e) {
        throw validation_error(e.what());
    }
    return sc;
}

enum class RunCommand { rate, mc, compare, sweep };

struct RunOptions {
    std::optional<uint64_t> seed_override{};
    bool bits = false;
};

struct RunOutput {
    std::string csv;
    int exit_code = 0;
};

namespace detail {

inline std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// the network with one sweep variable applied
inline NetworkSpec apply_sweep_point(const NetworkSpec& base, SweepVariable var, double value,
                                     double& rho_io) {
    NetworkSpec net = base;
    switch (var) {
        case SweepVariable::snr_db: {
            // scale all powers so tier 1 hits the requested SNR, keeping ratios
            const double target = std::pow(10.0, value / 10.0);
            if (!(net.noise_power > 0.0))
                throw validation_error("snr_db sweep needs noise_power > 0");
            const double factor = target / (net.tiers.front().power / net.noise_power);
            for (auto& t : net.tiers) t.power *= factor;
            break;
        }
        case SweepVariable::lambda: {
            const double factor = value / net.tiers.front().lambda;
            for (auto& t : net.tiers) t.lambda *= factor;
            break;
        }
        case SweepVariable::rho:
            rho_io = value;
            break;
        case SweepVariable::freq_bands:
            for (auto& t : net.tiers) t.freq_bands = static_cast<int>(value);
            break;
    }
    return net;
}

inline double analytic_rate(const NetworkSpec& net, double rho) {
    if (rho > 0.0) {
        const QuadratureRule outer = ghq_nodes(net.numerics.n_ghq);
        return network_rate_correlated(net, rho, outer).rate_nats;
    }
    return network_rate(net).rate_nats;
}

}  // namespace detail

// Runs one command over the scenario (all sweep points when a sweep is
// present) and renders the CSV. The CLI does no arithmetic of its own.
inline RunOutput run(RunCommand command, const ScenarioFile& scenario,
                     const RunOptions& opts = {}) {
    RunOutput out;
    const bool needs_mc = command == RunCommand::mc || command == RunCommand::compare;
    if (needs_mc && !scenario.mc.has_value()) {
        out.csv = "error: command requires an [mc] section\n";
        out.exit_code = 1;
        return out;
    }
    if (command == RunCommand::sweep && !scenario.sweep.has_value()) {
        out.csv = "error: sweep command requires a [sweep] section\n";
        out.exit_code = 1;
        return out;
    }

    const double unit = opts.bits ? 1.0 / std::log(2.0) : 1.0;
    McConfig mc = scenario.mc.value_or(McConfig{});
    if (opts.seed_override) mc.master_seed = *opts.seed_override;

    std::string var_name = "none";
    std::vector<double> values{0.0};
    if (scenario.sweep) {
        values = scenario.sweep->values;
        switch (scenario.sweep->variable) {
            case SweepVariable::snr_db: var_name = "snr_db"; break;
            case SweepVariable::lambda: var_name = "lambda"; break;
            case SweepVariable::rho: var_name = "rho"; break;
            case SweepVariable::freq_bands: var_name = "freq_bands"; break;
        }
    }

    std::string csv;
    if (command == RunCommand::rate || command == RunCommand::sweep)
        csv = "sweep_var,value,rate_nats\n";
    else if (command == RunCommand::mc)
        csv = "sweep_var,value,mc_mean,mc_se\n";
    else
        csv = "sweep_var,value,rate_nats,mc_mean,mc_se,rel_gap,pass\n";

    try {
        for (const double v : values) {
            double rho = mc.correlation_rho;
            NetworkSpec net = scenario.network;
            if (scenario.sweep)
                net = detail::apply_sweep_point(scenario.network, scenario.sweep->variable, v, rho);
            csv += var_name + "," + detail::fmt12(v);
            if (command == RunCommand::rate || command == RunCommand::sweep) {
                csv += "," + detail::fmt12(unit * detail::analytic_rate(net, rho)) + "\n";
                continue;
            }
            McConfig point_cfg = mc;
            point_cfg.correlation_rho = rho;
            const McEstimate est = estimate_rate(net, point_cfg);
            if (command == RunCommand::mc) {
                csv += "," + detail::fmt12(unit * est.mean_rate_nats) + "," +
                       detail::fmt12(unit * est.std_error) + "\n";
                continue;
            }
            const double rate = detail::analytic_rate(net, rho);
            const double gap = std::fabs(rate - est.mean_rate_nats) / rate;
            const double tol = std::max(0.03, 3.0 * est.std_error / rate);
            csv += "," + detail::fmt12(unit * rate) + "," + detail::fmt12(unit * est.mean_rate_nats) +
                   "," + detail::fmt12(unit * est.std_error) + "," + detail::fmt12(gap) + "," +
                   (gap <= tol ? "pass" : "fail") + "\n";
        }
    } catch (const validation_error& e) {
        out.csv = std::string("error: ") + e.what() + "\n";
        out.exit_code = 1;
        return out;
    } catch (const std::domain_error& e) {
        out.csv = std::string("error: ") + e.what() + "\n";
        out.exit_code = 1;
        return out;
    } catch (const series_error& e) {
        out.csv = std::string("error: ") + e.what() + "\n";
        out.exit_code = 2;
        return out;
    } catch (const integration_error& e) {
        out.csv = std::string("error: ") + e.what() + "\n";
        out.exit_code = 2;
        return out;
    }
    out.csv = csv;
    return out;
}

}  // namespace hetnet
