// hetnet-rate: batch front end for the average-rate library.
//
//   hetnet-rate <rate|mc|compare|sweep> --scenario <path> [--seed N] [--bits] [--out <path>]
//
// Emits CSV on stdout (mirrored to --out when given). Exit code 1 on
// validation failure, 2 on numeric non-convergence.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hetnet/scenario.hpp"

namespace {

int run_command(hetnet::RunCommand cmd, const std::string& scenario_path,
                const std::optional<uint64_t>& seed, bool bits,
                const std::optional<std::string>& out_path) {
    std::ifstream in(scenario_path);
    if (!in) {
        std::cerr << "error: cannot open scenario file '" << scenario_path << "'\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    hetnet::ScenarioFile scenario;
    try {
        scenario = hetnet::parse_scenario(buf.str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    hetnet::RunOptions opts;
    opts.seed_override = seed;
    opts.bits = bits;
    const hetnet::RunOutput out = hetnet::run(cmd, scenario, opts);
    if (out.exit_code != 0) {
        std::cerr << out.csv;
        return out.exit_code;
    }

    std::optional<std::string> target = out_path;
    if (!target && scenario.output) target = scenario.output;
    if (target) {
        std::ofstream f(*target, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot write '" << *target << "'\n";
            return 1;
        }
        f << out.csv;
    }
    if (!out_path) std::cout << out.csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Downlink average rate of Poisson cellular networks: analytic and Monte Carlo"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> out_path;
    bool bits = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "scenario file")->required();
        sub->add_option("--seed", seed, "override the Monte Carlo master seed");
        sub->add_flag("--bits", bits, "report rates in bits/s/Hz instead of nats");
        sub->add_option("--out", out_path, "write CSV here instead of stdout");
    };

    auto* rate = app.add_subcommand("rate", "analytic rate (per sweep point when a sweep exists)");
    auto* mc = app.add_subcommand("mc", "Monte Carlo estimate");
    auto* compare = app.add_subcommand("compare", "analytic vs Monte Carlo with pass/fail");
    auto* sweep = app.add_subcommand("sweep", "analytic rate over a required [sweep] section");
    for (auto* sub : {rate, mc, compare, sweep}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    hetnet::RunCommand cmd = hetnet::RunCommand::rate;
    if (mc->parsed()) cmd = hetnet::RunCommand::mc;
    if (compare->parsed()) cmd = hetnet::RunCommand::compare;
    if (sweep->parsed()) cmd = hetnet::RunCommand::sweep;

    return run_command(cmd, scenario_path, seed, bits, out_path);
}
