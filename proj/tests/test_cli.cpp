#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(VOTEWATCH_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string data(const char* name) { return std::string(VOTEWATCH_DATA_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const char* name) {
    auto p = fs::temp_directory_path() / ("votewatch_cli_test_" + std::string(name));
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Cli, Fprob) {
    EXPECT_EQ(run("fprob --p0 0.6 --pprime 0.6 --n 1000 --case b").out, "1.00000000\n");
    const auto r = run("fprob --p0 0.55 --pprime 0.45 --n 100000 --case b");
    EXPECT_EQ(r.code, 0);
    EXPECT_LT(std::stod(r.out), 0.01);
    EXPECT_EQ(run("fprob --p0 0.5 --pprime 1.5").code, 2);
    EXPECT_EQ(run("fprob --p0 0.45 --pprime 0.5 --case b").code, 3);
    EXPECT_EQ(run("fprob --p0 0.45 --pprime 0.5 --case z").code, 2);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("test --bogus").code, 2);
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("test --results " + data("us2016_results.csv")).code, 2);  // exit method needs polls
    EXPECT_EQ(run("test --results /nonexistent.csv --method cost").code, 2);
    EXPECT_EQ(run("simulate --reps 0").code, 2);
}

TEST(Cli, TestTable2016) {
    const auto r = run("test --results " + data("us2016_results.csv") + " --polls " + data("us2016_polls.csv"));
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("# config:"), std::string::npos);
    std::istringstream lines(r.out);
    std::string line;
    std::vector<std::string> decisions;
    while (std::getline(lines, line))
        if (line.ends_with("Do not reject")) decisions.push_back("retain");
        else if (line.ends_with("Reject")) decisions.push_back("reject");
    EXPECT_EQ(decisions, (std::vector<std::string>{"reject", "reject", "retain", "reject", "reject"}));
}

TEST(Cli, JsonReport) {
    const auto r = run("test --results " + data("us2016_results.csv") + " --method cost --cost beta:30 --json -");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["command"], "test");
    EXPECT_EQ(j["config"]["cost"], "beta:30");
    ASSERT_EQ(j["results"].size(), 5u);
    EXPECT_EQ(j["results"][2]["decision"], "retain");
}

TEST(Cli, CandidateOrderInvariance) {
    const auto dir = scratch("swap");
    fs::create_directories(dir);
    std::ifstream in(data("us2016_results.csv"));
    std::ofstream out(dir / "r.csv");
    std::string header;
    std::getline(in, header);
    out << header << '\n';
    // Reverse the candidate rows inside each region.
    std::vector<std::string> rows;
    for (std::string line; std::getline(in, line);) rows.push_back(line);
    std::vector<std::string> block;
    auto flush = [&] {
        for (auto it = block.rbegin(); it != block.rend(); ++it) out << *it << '\n';
        block.clear();
    };
    std::string region;
    for (const auto& line : rows) {
        const auto r = line.substr(0, line.find(','));
        if (r != region) flush();
        region = r;
        block.push_back(line);
    }
    flush();
    out.close();
    const auto base = nlohmann::json::parse(
        run("test --results " + data("us2016_results.csv") + " --method cost --json -").out);
    const auto swapped =
        nlohmann::json::parse(run("test --results " + (dir / "r.csv").string() + " --method cost --json -").out);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(base["results"][i]["statistic"], swapped["results"][i]["statistic"]);
        EXPECT_EQ(base["results"][i]["decision"], swapped["results"][i]["decision"]);
    }
}

TEST(Cli, SimulateIsDeterministic) {
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    const std::string args = "simulate --protocol b --n 20000 --k 5000 --p0 0.52 --pprime 0.45 --reps 10 --seed 7";
    ASSERT_EQ(run(args + " --out-dir " + a.string()).code, 0);
    ASSERT_EQ(run(args + " --out-dir " + b.string()).code, 0);
    for (const char* f : {"sim_rows.csv", "sim_summary.csv", "sim_report.json"}) {
        EXPECT_FALSE(slurp(a / f).empty());
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST(Cli, SeedPrecedence) {
    const auto dir = scratch("seed");
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.json") << R"({"protocol": "b", "reps": 3, "n": [20000], "k": [5000], "seed": 11})";
    auto with_env = [&](const std::string& env, const std::string& extra) {
        const std::string cmd = env + " " + VOTEWATCH_CLI + " simulate --config " + (dir / "cfg.json").string() +
                                " --out-dir " + dir.string() + " " + extra + " >/dev/null 2>&1";
        EXPECT_EQ(std::system(cmd.c_str()), 0);
        return nlohmann::json::parse(slurp(dir / "sim_report.json"))["config"]["seed"].get<int>();
    };
    EXPECT_EQ(with_env("VOTEWATCH_SEED=3", ""), 11);           // config beats env
    EXPECT_EQ(with_env("VOTEWATCH_SEED=3", "--seed 5"), 5);    // flag beats config
    std::ofstream(dir / "cfg.json") << R"({"protocol": "b", "reps": 3, "n": [20000], "k": [5000]})";
    EXPECT_EQ(with_env("VOTEWATCH_SEED=3", ""), 3);            // env beats default
}
