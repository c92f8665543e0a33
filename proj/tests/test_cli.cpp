// End-to-end CLI contract: subcommands, flag handling, exit codes,
// deterministic outputs.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cogrec/eval.hpp"
#include "cogrec/features.hpp"
#include "cogrec/session_io.hpp"

using namespace cogrec;
namespace fs = std::filesystem;

namespace {

const std::string kCli = COGREC_CLI_PATH;

int run(const std::string& args, const fs::path& log = {}) {
    std::string cmd = kCli + " " + args;
    if (!log.empty()) cmd += " > " + log.string() + " 2>&1";
    else cmd += " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path work_dir(const std::string& tag) {
    const auto p = fs::temp_directory_path() / ("cogrec_cli_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generate writes the requested number of sessions") {
    const auto dir = work_dir("gen");
    REQUIRE(run("--seed 42 --out " + (dir / "corpus").string() +
                " generate --players 3 --rounds-per-game 1 --round-len 30 --pause-len 10") ==
            0);
    const auto sessions = list_session_dirs(dir / "corpus");
    REQUIRE(sessions.size() == 3);

    SECTION("rerunning with the same flags is byte-identical") {
        REQUIRE(run("--seed 42 --out " + (dir / "again").string() +
                    " generate --players 3 --rounds-per-game 1 --round-len 30 "
                    "--pause-len 10") == 0);
        for (const auto& entry : fs::recursive_directory_iterator(dir / "corpus")) {
            if (!entry.is_regular_file()) continue;
            const auto rel = fs::relative(entry.path(), dir / "corpus");
            REQUIRE(read_file(entry.path()) == read_file(dir / "again" / rel));
        }
    }
}

TEST_CASE("usage errors exit with 1") {
    REQUIRE(run("generate --players 0") == 1);
    REQUIRE(run("no-such-command") == 1);
    REQUIRE(run("") == 1);
    REQUIRE(run("--help") == 0);
}

TEST_CASE("features writes one CSV per signal set with the right shape") {
    const auto dir = work_dir("feat");
    REQUIRE(run("--seed 7 --out " + (dir / "corpus").string() +
                " generate --players 2 --rounds-per-game 1 --round-len 40 --pause-len 15") ==
            0);
    REQUIRE(run("--out " + (dir / "out").string() + " features --corpus " +
                (dir / "corpus").string() + " --signals SIG-1,SIG-3") == 0);

    const auto sig1 = read_feature_csv(dir / "out" / "features_SIG-1.csv");
    const auto sig3 = read_feature_csv(dir / "out" / "features_SIG-3.csv");
    REQUIRE_FALSE(fs::exists(dir / "out" / "features_SIG-2.csv"));
    REQUIRE(sig1.size() == sig3.size());
    REQUIRE(sig1[0].values.size() == 13);
    REQUIRE(sig3[0].values.size() == 35);

    // column sets nest and values agree
    for (std::size_t i = 0; i < sig1.size(); ++i)
        for (std::size_t f = 0; f < 13; ++f) {
            const double a = sig1[i].values[f], b = sig3[i].values[f];
            REQUIRE(((std::isnan(a) && std::isnan(b)) || a == b));
        }

    SECTION("rerun produces identical bytes") {
        REQUIRE(run("--out " + (dir / "out2").string() + " features --corpus " +
                    (dir / "corpus").string() + " --signals SIG-1,SIG-3") == 0);
        REQUIRE(read_file(dir / "out" / "features_SIG-1.csv") ==
                read_file(dir / "out2" / "features_SIG-1.csv"));
        REQUIRE(read_file(dir / "out" / "features_SIG-3.csv") ==
                read_file(dir / "out2" / "features_SIG-3.csv"));
    }

    SECTION("bad corpus path is a data error (exit 2)") {
        REQUIRE(run("features --corpus /nonexistent/place") == 2);
    }
}

TEST_CASE("evaluate writes reports and prints tables; trace exports a player") {
    const auto dir = work_dir("eval");
    REQUIRE(run("--seed 11 --out " + (dir / "corpus").string() +
                " generate --players 3 --rounds-per-game 2 --round-len 45 --pause-len 15") ==
            0);
    const auto log = dir / "eval.log";
    REQUIRE(run("--seed 11 --out " + (dir / "out").string() + " evaluate --corpus " +
                (dir / "corpus").string() +
                " --scenario dependent --signals SIG-1 --rounds 8 --learning-rate 0.3",
                log) == 0);
    REQUIRE(fs::exists(dir / "out" / "report_dependent_SIG-1.json"));
    REQUIRE(fs::exists(dir / "out" / "table_dependent.txt"));

    const auto table = read_file(dir / "out" / "table_dependent.txt");
    REQUIRE(table.find("signals") != std::string::npos);
    REQUIRE(table.find("random") != std::string::npos);
    REQUIRE(table.find("SIG-1") != std::string::npos);
    REQUIRE(read_file(log).find("Player-dependent classification") != std::string::npos);

    SECTION("trace export") {
        REQUIRE(run("--out " + (dir / "out").string() + " trace --report " +
                    (dir / "out" / "report_dependent_SIG-1.json").string() +
                    " --player p02") == 0);
        const auto csv = read_file(dir / "out" / "trace_p02.csv");
        REQUIRE(csv.rfind("center_s,p_SpaceInvaders,", 0) == 0);
        // probabilities per row sum to 1
        std::istringstream is(csv);
        std::string line;
        std::getline(is, line);
        std::size_t rows = 0;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto fields = split_csv_line(line);
            REQUIRE(fields.size() == 6);
            double sum = 0.0, v = 0.0;
            for (int k = 1; k <= 4; ++k) {
                REQUIRE(parse_double(fields[(std::size_t)k], v));
                sum += v;
            }
            REQUIRE(std::abs(sum - 1.0) <= 1e-9);
            ++rows;
        }
        // trace length equals the player's test-window count
        const auto report = report_from_json(
            nlohmann::json::parse(read_file(dir / "out" / "report_dependent_SIG-1.json")));
        std::size_t expected = 0;
        for (const auto& t : report.traces)
            if (t.player == "p02") ++expected;
        REQUIRE(rows == expected);
        REQUIRE(rows > 0);
    }

    SECTION("unknown player exits 2") {
        REQUIRE(run("--out " + (dir / "out").string() + " trace --report " +
                    (dir / "out" / "report_dependent_SIG-1.json").string() +
                    " --player nobody") == 2);
    }
}

TEST_CASE("evaluate can reuse extracted feature CSVs") {
    const auto dir = work_dir("reuse");
    REQUIRE(run("--seed 3 --out " + (dir / "corpus").string() +
                " generate --players 2 --rounds-per-game 2 --round-len 40 --pause-len 15") ==
            0);
    REQUIRE(run("--out " + (dir / "features").string() + " features --corpus " +
                (dir / "corpus").string() + " --signals SIG-3") == 0);

    const std::string eval_flags =
        " evaluate --corpus " + (dir / "corpus").string() +
        " --scenario independent --signals SIG-2 --rounds 5 --depth 3 --no-traces";
    REQUIRE(run("--seed 3 --out " + (dir / "from_corpus").string() + eval_flags) == 0);
    REQUIRE(run("--seed 3 --out " + (dir / "from_csv").string() + eval_flags +
                " --features-dir " + (dir / "features").string()) == 0);

    // the CSV path reproduces the auto-extracted reports exactly
    REQUIRE(read_file(dir / "from_corpus" / "report_independent_SIG-2.json") ==
            read_file(dir / "from_csv" / "report_independent_SIG-2.json"));
}

TEST_CASE("config file values apply and flags take precedence") {
    const auto dir = work_dir("config");
    {
        std::ofstream cfg(dir / "exp.cfg");
        cfg << "seed=5\n";
        cfg << "out=" << (dir / "from_config").string() << "\n";
    }
    REQUIRE(run("--config " + (dir / "exp.cfg").string() +
                " generate --players 2 --rounds-per-game 1 --round-len 30 --pause-len 10") ==
            0);
    REQUIRE(list_session_dirs(dir / "from_config").size() == 2);

    // the explicit flag overrides the config value
    REQUIRE(run("--config " + (dir / "exp.cfg").string() + " --out " +
                (dir / "flag_wins").string() +
                " generate --players 2 --rounds-per-game 1 --round-len 30 --pause-len 10") ==
            0);
    REQUIRE(list_session_dirs(dir / "flag_wins").size() == 2);

    // seed came from the config: outputs must match a --seed 5 run
    REQUIRE(run("--seed 5 --out " + (dir / "explicit_seed").string() +
                " generate --players 2 --rounds-per-game 1 --round-len 30 --pause-len 10") ==
            0);
    REQUIRE(read_file(dir / "from_config" / "session_p01" / "ecg.csv") ==
            read_file(dir / "explicit_seed" / "session_p01" / "ecg.csv"));
}
