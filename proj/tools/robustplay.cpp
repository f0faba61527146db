// robustplay: run or validate an experiment configuration.
//
//   robustplay run --config configs/counterexample.ini --repeats 20 --out out/ce
//   robustplay validate --config my.ini
//
// Exit codes: 0 ok, 2 configuration error, 3 schedule violation.

#include "robustplay/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cli = robustplay::cli;

int main(int argc, char** argv) {
    CLI::App app{"Robust optimization by online learning: batch runner"};
    app.require_subcommand(1);

    std::string config_path;
    cli::RunnerOptions opts;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t repeats = 0;

    auto* run = app.add_subcommand("run", "run every repeat and write transcripts, summary.csv and plotdata.csv");
    run->add_option("--config", config_path, "configuration file (INI)")->required();
    auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides run.seed)");
    auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides run.output_dir)");
    auto* rep_opt = run->add_option("--repeats", repeats, "number of repeats (overrides run.repeats)");
    run->add_flag("--quiet", opts.quiet, "only report errors");

    auto* check = app.add_subcommand("validate", "list configuration findings; none means runnable");
    check->add_option("--config", config_path, "configuration file (INI)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::exit_config;
    }

    cli::RunConfig config;
    try {
        config = cli::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return cli::exit_config;
    }

    if (*check) {
        const auto findings = cli::validate(config);
        for (const auto& f : findings) {
            std::cout << f.field << ": " << f.message;
            if (!f.citation.empty()) std::cout << " [" << f.citation << "]";
            std::cout << '\n';
        }
        if (findings.empty()) std::cout << "ok\n";
        return findings.empty() ? cli::exit_ok : cli::exit_config;
    }

    if (*seed_opt) opts.seed = seed;
    if (*out_opt) opts.output_dir = out_dir;
    if (*rep_opt) opts.repeats = repeats;
    try {
        return cli::run(std::move(config), opts, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_failure;
    }
}
