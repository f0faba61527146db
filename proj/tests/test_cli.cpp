#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "robustplay/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace robustplay;
namespace cli = robustplay::cli;
namespace fs = std::filesystem;

namespace {

cli::RunConfig cfg(const std::string& text) {
    std::istringstream in(text);
    return cli::parse_config(in);
}

bool has_finding(const std::vector<cli::Finding>& fs, const std::string& field, const std::string& needle = "") {
    for (const auto& f : fs)
        if (f.field == field && f.message.find(needle) != std::string::npos) return true;
    return false;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("robustplay_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

const std::string kGame = "[game]\nx_domain=simplex:2\nu_domain=simplex:2\nmatrix=1,-1;-1,1\n";

}  // namespace

TEST_CASE("config parsing and defaults") {
    const auto c = cfg("experiment = routing\nT=500\n[routing]\nn=20\n");
    CHECK(c.experiment_name() == "routing");
    CHECK(c.algorithm_name() == "rool");
    CHECK(c.T() == 500);
    CHECK(c.delta() == doctest::Approx(0.05));
    CHECK(c.repeats() == 1);
    CHECK(c.get("routing", "n") == "20");
    CHECK_FALSE(c.get("routing", "p").has_value());
    CHECK(cfg("[run]\nexperiment=counterexample\n").algorithm_name() == "biased_dual");
    CHECK_THROWS_AS(cfg("[run\nT=1\n"), ConfigurationError);
    CHECK(cli::parse_algorithm("multi_biased_dual") == cli::Algorithm::multi_biased_dual);
    CHECK_FALSE(cli::parse_experiment("knapsack").has_value());
}

TEST_CASE("config hash ignores the seed and the output settings") {
    auto a = cfg("[run]\nexperiment=routing\nT=100\nseed=1\noutput_dir=a\n");
    auto b = cfg("[run]\nexperiment=routing\nT=100\nseed=2\noutput_dir=b\nrepeats=4\n");
    auto c = cfg("[run]\nexperiment=routing\nT=101\nseed=1\n");
    CHECK(cli::config_hash(a) == cli::config_hash(b));
    CHECK(cli::config_hash(a) != cli::config_hash(c));
    CHECK(cli::config_hash(a).size() == 16);
}

TEST_CASE("domain and matrix parsing") {
    CHECK(cli::parse_domain("simplex:3").dims() == 3);
    const auto box = cli::parse_domain("box:0,-1;1,2");
    REQUIRE(box.is<Domain::Box>());
    CHECK(box.as<Domain::Box>().hi == Point{1.0, 2.0});
    const auto ball = cli::parse_domain("ball:1,1;0.5");
    CHECK(ball.as<Domain::L2Ball>().radius == 0.5);
    CHECK(cli::parse_domain("budget:4;2").as<Domain::Budget>().K == 2.0);
    CHECK(cli::parse_domain("hull:0,1;-2,-1;0,0").as<Domain::VertexHull>().vertices.size() == 3);
    CHECK_THROWS(cli::parse_domain("cone:3"));
    CHECK_THROWS(cli::parse_domain("simplex:x"));
    CHECK(cli::parse_matrix("1,2;3,4") == std::vector<std::vector<double>>{{1.0, 2.0}, {3.0, 4.0}});
    CHECK_THROWS(cli::parse_matrix("1,2;3"));
    CHECK(cli::parse_reals("0.5, 1e-3") == std::vector<double>{0.5, 1e-3});
}

TEST_CASE("validate: slot rules") {
    SUBCASE("weak learner in the strong slot") {
        const auto f = cli::validate(cfg("[run]\nexperiment=custom_game\nalgorithm=biased_dual\n" + kGame +
                                         "[learner_u]\nname=fpl\n"));
        REQUIRE(has_finding(f, "learner_u.name", "weak learner in strong slot"));
        for (const auto& x : f)
            if (x.field == "learner_u.name") CHECK(x.citation.find("Sec. 2.2") != std::string::npos);
    }
    SUBCASE("sampled exponential weights in the strong x slot") {
        const auto f = cli::validate(cfg("[run]\nexperiment=custom_game\nalgorithm=biased_primal_randomized\n" + kGame +
                                         "[learner_x]\nname=ew_sampled\n"));
        CHECK(has_finding(f, "learner_x.name", "weak learner in strong slot"));
    }
    SUBCASE("OGD anywhere is fine") {
        for (const char* alg : {"rool", "r2ool", "biased_dual", "biased_primal_randomized"}) {
            CAPTURE(alg);
            const auto f = cli::validate(cfg(std::string("[run]\nexperiment=custom_game\nalgorithm=") + alg + "\n" +
                                             kGame + "[learner_x]\nname=ogd\n[learner_u]\nname=ogd\n"));
            CHECK(f.empty());
        }
    }
    SUBCASE("weak learners are fine in parallel play") {
        CHECK(cli::validate(cfg("[run]\nexperiment=custom_game\n" + kGame + "[learner_x]\nname=fpl\n[learner_u]\nname=fpl\n"))
                  .empty());
    }
    SUBCASE("unknown names") {
        CHECK(has_finding(cli::validate(cfg("[run]\nexperiment=custom_game\nalgorithm=magic\n" + kGame)), "run.algorithm"));
        CHECK(has_finding(cli::validate(cfg("[run]\nexperiment=lottery\n")), "run.experiment"));
        CHECK(has_finding(cli::validate(cfg("[run]\nexperiment=custom_game\n" + kGame + "[learner_x]\nname=hedge\n")),
                          "learner_x.name"));
    }
    SUBCASE("learner needs a usable domain") {
        const auto f = cli::validate(cfg("[run]\nexperiment=custom_game\n[game]\nx_domain=ball:0,0;1\nu_domain=simplex:2\n"
                                         "matrix=1,0;0,1\n[learner_x]\nname=ew_averaged\n"));
        CHECK(has_finding(f, "learner_x.name"));
    }
}

TEST_CASE("validate: Lambda must lie in the simplex") {
    const std::string multi = "[run]\nexperiment=custom_game\nalgorithm=multi_distributional\n[game]\nx_domain=simplex:2\n"
                              "objectives=2\n[objective1]\nmatrix=1,0\nu_domain=box:0;1\n[objective2]\nmatrix=0,1\n"
                              "u_domain=box:0;1\n";
    CHECK(cli::validate(cfg(multi)).empty());
    const auto f = cli::validate(cfg(multi + "[lambda]\ndomain=box:0,0;1,1\n"));
    REQUIRE(has_finding(f, "lambda.domain"));
    for (const auto& x : f)
        if (x.field == "lambda.domain") CHECK(x.citation.find("Proposition 1") != std::string::npos);

    auto randomized = multi;
    randomized.replace(randomized.find("multi_distributional"), 20, "randomized_multi_explicit");
    CHECK(cli::validate(cfg(randomized)).empty());
    CHECK(has_finding(cli::validate(cfg(randomized + "[lambda]\ndomain=hull:0.5,0.5\n")), "lambda.domain"));
}

TEST_CASE("validate: other checks") {
    CHECK(has_finding(cli::validate(cfg("[run]\nexperiment=counterexample\nT=10\n")), "run.T"));
    CHECK(has_finding(cli::validate(cfg("[run]\nexperiment=routing\ndelta=2\n")), "run.delta"));
    CHECK(has_finding(cli::validate(cfg("[run]\nexperiment=routing\n[routing]\nuncertainty=edge_removal\n")),
                      "run.algorithm"));
    CHECK(cli::validate(cfg("[run]\nexperiment=routing\nalgorithm=r2ool\n[routing]\nuncertainty=edge_removal\n")).empty());
    CHECK(cli::validate(cfg("[run]\nexperiment=mdp\n[mdp]\nstates=3\nactions=2\n")).empty());
}

TEST_CASE("run: exit codes") {
    std::ostringstream log, err;
    cli::RunnerOptions o;
    o.quiet = true;
    o.output_dir = scratch("codes").string();
    CHECK(cli::run(cfg("[run]\nexperiment=custom_game\nalgorithm=nope\n" + kGame), o, log, err) == cli::exit_config);
    CHECK(err.str().find("run.algorithm") != std::string::npos);
    CHECK(cli::run(cfg("[run]\nexperiment=custom_game\nalgorithm=biased_dual\n" + kGame + "[learner_u]\nname=fpl\n"), o,
                   log, err) == cli::exit_config);
    CHECK(cli::run(cfg("[run]\nexperiment=custom_game\n" + kGame + "[learner_x]\nname=best_response\n"), o, log, err) ==
          cli::exit_schedule);
    CHECK(cli::run(cfg("[run]\nexperiment=custom_game\nT=50\n" + kGame), o, log, err) == cli::exit_ok);
}

TEST_CASE("run: counter-example artifacts") {
    const auto dir = scratch("ce");
    cli::RunnerOptions o;
    o.quiet = true;
    o.output_dir = dir.string();
    o.repeats = 3;
    std::ostringstream log, err;
    REQUIRE(cli::run(cfg("[run]\nexperiment=counterexample\nT=2000\nseed=3\n"), o, log, err) == cli::exit_ok);
    std::size_t transcripts = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        transcripts += name.rfind("flawed_r", 0) == 0 || name.rfind("corrected_r", 0) == 0;
        CHECK(name.find(".tmp") == std::string::npos);
    }
    CHECK(transcripts == 6);
    const auto summary = slurp(dir / "summary.csv");
    CHECK(summary.rfind("config_hash,seed,T,gap_bound,gap_evaluated,verdict\n", 0) == 0);
    CHECK(lines(summary) == 1 + 6);
    const auto d = slurp(dir / "dichotomy.csv");
    CHECK(d.rfind("seeds,flawed_hits,corrected_hits,verdict\n3,", 0) == 0);
    CHECK(slurp(dir / "flawed_r000.csv").rfind("t,x_0,x_1,u_0,u_1,loss", 0) == 0);
}

TEST_CASE("run: routing plot data has one row per round") {
    const auto dir = scratch("routing");
    cli::RunnerOptions o;
    o.quiet = true;
    o.output_dir = dir.string();
    std::ostringstream log, err;
    REQUIRE(cli::run(cfg("[run]\nexperiment=routing\nT=1000\n[routing]\nn=50\np=0.1\nbenchmark_rounds=5000\n"), o, log,
                     err) == cli::exit_ok);
    CHECK(lines(slurp(dir / "plotdata.csv")) == 1 + 1000);
    CHECK(lines(slurp(dir / "routing_r000.csv")) == 1 + 1000);
}

TEST_CASE("run: reruns are byte-identical whatever the thread count") {
    const std::string text = "[run]\nexperiment=custom_game\nalgorithm=r2ool\nT=500\nrepeats=4\nseed=11\n" + kGame +
                             "[learner_x]\nname=fpl\n[learner_u]\nname=ew_sampled\n";
    std::map<std::string, std::string> files[2];
    for (int k = 0; k < 2; ++k) {
        const auto dir = scratch("det" + std::to_string(k));
        cli::RunnerOptions o;
        o.quiet = true;
        o.output_dir = dir.string();
        o.threads = k == 0 ? 1 : 3;
        std::ostringstream log, err;
        REQUIRE(cli::run(cfg(text), o, log, err) == cli::exit_ok);
        for (const auto& e : fs::directory_iterator(dir)) files[k][e.path().filename().string()] = slurp(e.path());
    }
    CHECK(files[0].size() == 4 + 2);
    CHECK(files[0] == files[1]);
}

TEST_CASE("write_atomic replaces the file and leaves no temporary") {
    const auto dir = scratch("atomic");
    fs::create_directories(dir);
    const auto p = (dir / "a.txt").string();
    cli::write_atomic(p, "one");
    cli::write_atomic(p, "two");
    CHECK(slurp(p) == "two");
    CHECK_FALSE(fs::exists(p + ".tmp"));
}
