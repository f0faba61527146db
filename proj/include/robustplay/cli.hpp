#pragma once

#include "robustplay/learners.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace robustplay::cli {

enum class Experiment { counterexample, routing, mdp, custom_game };

enum class Algorithm {
    rool,
    r2ool,
    biased_dual,
    biased_primal_randomized,
    multi_explicit,
    multi_distributional,
    multi_biased_dual,
    multi_biased_primal,
    randomized_multi_explicit,
    randomized_multi_distributional,
};

const char* to_string(Experiment e);
const char* to_string(Algorithm a);
std::optional<Experiment> parse_experiment(const std::string& text);
std::optional<Algorithm> parse_algorithm(const std::string& text);

using Section = std::map<std::string, std::string>;

/// Flat INI: a [run] section, one [learner_<slot>] section per learner slot
/// (x, u, lambda, u1, u2, ...) and experiment sections ([routing], [mdp], [game],
/// [objective1].., [lambda]).
struct RunConfig {
    std::map<std::string, Section> sections;

    std::string experiment_name() const;
    std::string algorithm_name() const;
    std::size_t T() const;
    double delta() const;
    std::uint64_t seed() const;
    std::size_t repeats() const;
    std::string output_dir() const;

    /// Value of `section.key`, or nullopt.
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
};

/// Parses INI text. Throws ConfigurationError on syntax errors.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

/// FNV-1a over the canonical form of every section except output settings and the seed.
std::string config_hash(const RunConfig& config);

struct Finding {
    std::string field;     // e.g. "learner_u.name"
    std::string message;
    std::string citation;  // where the rule comes from, empty for plumbing checks
};

/// Empty iff the configuration can be run.
std::vector<Finding> validate(const RunConfig& config);

struct RunnerOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<std::size_t> repeats;
    bool quiet = false;
    /// Worker cap; 0 reads ROBUSTPLAY_THREADS, falling back to the hardware concurrency.
    std::size_t threads = 0;
};

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_schedule = 3 };

/// Validates, runs every repeat and writes transcripts, summary.csv and plotdata.csv.
/// Returns the exit code; messages go to `log` (suppressed by quiet, except errors).
int run(RunConfig config, const RunnerOptions& options, std::ostream& log, std::ostream& err);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& contents);

/// Parses "simplex:3", "box:lo,..;hi,..", "ball:c,..;r", "budget:n;K", "hull:v;v;..".
Domain parse_domain(const std::string& text);
/// Rows separated by ';', entries by ','.
std::vector<std::vector<double>> parse_matrix(const std::string& text);
std::vector<double> parse_reals(const std::string& text);

}  // namespace robustplay::cli
