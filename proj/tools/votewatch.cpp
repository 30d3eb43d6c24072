// votewatch: command-line front end.
//
//   votewatch test     --results R.csv [--polls P.csv] [--method exit|cost] ...
//   votewatch simulate [--config C.json] [--protocol a|b] [--reps N] ...
//   votewatch fprob    --p0 X --pprime Y --n N [--case b|c]
//
// Exit codes: 0 success, 2 input or validation error, 3 infeasible computation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <votewatch/votewatch.hpp>

namespace vw = votewatch;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;

void warn_shallow(const vw::CostFunction& c) {
    if (c.parameter() < 10.0)
        std::cerr << "warning: cost parameter " << c.parameter() << " is below 10; "
                  << "type-1 error of the cost test is inflated for flat cost functions\n";
}

vw::IntervalCalibration parse_calibration(const std::string& s) {
    if (s == "joint") return vw::IntervalCalibration::Joint;
    if (s == "marginal") return vw::IntervalCalibration::Marginal;
    throw vw::InputError("calibration must be 'joint' or 'marginal'");
}

void write_json(const json& doc, const std::string& where) {
    if (where == "-") {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream out(where);
    if (!out) throw vw::InputError("cannot write '" + where + "'");
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// test

struct TestArgs {
    std::string results;
    std::optional<std::string> polls;
    std::string method = "exit";
    std::string cost = "texp:30";
    double alpha = 0.05;
    double tau_c = 0.5;
    std::string calibration = "joint";
    std::vector<std::string> candidates;
    int grid = 64;
    std::optional<std::string> json_out;
};

int run_test(const TestArgs& a) {
    vw::detail::require(a.method == "exit" || a.method == "cost", "method must be 'exit' or 'cost'");
    vw::detail::require(a.candidates.empty() || a.candidates.size() == 2, "--candidates takes exactly two names");
    if (a.method == "exit" && !a.polls) throw vw::InputError("--method exit needs --polls");

    vw::TestOptions opt;
    opt.alpha = a.alpha;
    opt.tau_c = a.tau_c;
    opt.extremize.grid = a.grid;
    opt.calibration = parse_calibration(a.calibration);
    const auto cost = vw::CostFunction::parse(a.cost);
    if (a.method == "cost") warn_shallow(cost);

    vw::io::IngestOptions ing;
    if (!a.candidates.empty()) ing.candidates = std::pair{a.candidates[0], a.candidates[1]};
    const auto data = vw::io::ingest_files(a.results, a.method == "exit" ? a.polls : std::nullopt, ing);

    std::vector<vw::TestResult> results;
    for (const auto& r : data.results) {
        if (a.method == "exit") {
            const auto* poll = data.poll_for(r.region());
            if (!poll) throw vw::InputError("region '" + r.region() + "' has no exit poll");
            results.push_back(vw::run_test_exit_poll(r, *poll, opt));
        } else {
            results.push_back(vw::run_test_cost(r, cost, opt));
        }
    }

    json config{{"results", a.results},
                {"polls", a.polls ? json(*a.polls) : json(nullptr)},
                {"method", a.method},
                {"cost", a.method == "cost" ? json(cost.to_string()) : json(nullptr)},
                {"alpha", opt.alpha},
                {"tau_c", opt.tau_c},
                {"calibration", a.calibration},
                {"grid", opt.extremize.grid},
                {"candidates", a.candidates}};
    json rows = json::array();
    for (const auto& r : results) rows.push_back(vw::io::to_json(r));
    const auto report = vw::io::make_report("test", config, rows);

    const bool json_to_stdout = a.json_out && *a.json_out == "-";
    std::ostream& table = json_to_stdout ? std::cerr : std::cout;
    table << "# config: " << config.dump() << '\n';
    vw::io::write_test_table(table, results);
    if (a.json_out) write_json(report, *a.json_out);
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimArgs {
    std::optional<std::string> config;
    std::optional<std::string> protocol;
    std::optional<std::string> generation;
    std::optional<std::int64_t> reps;
    std::optional<std::uint64_t> seed;
    std::vector<std::int64_t> n, k;
    std::vector<double> p0, pprime, p0_range;
    std::vector<std::string> true_cost, assumed_cost;
    std::optional<double> alpha, tau_c;
    std::optional<int> grid;
    std::string out_dir = ".";
};

std::vector<vw::CostFunction> parse_costs(const std::vector<std::string>& specs) {
    std::vector<vw::CostFunction> out;
    for (const auto& s : specs) out.push_back(vw::CostFunction::parse(s));
    return out;
}

// Precedence: flags > config file > VOTEWATCH_SEED (seed only) > defaults.
vw::SimConfig effective_config(const SimArgs& a) {
    vw::SimConfig c;
    if (const char* env = std::getenv("VOTEWATCH_SEED")) {
        try {
            std::size_t used = 0;
            c.seed = std::stoull(env, &used);
            vw::detail::require(used == std::string(env).size(), "");
        } catch (const std::exception&) {
            throw vw::InputError("VOTEWATCH_SEED must be a nonnegative integer");
        }
    }
    if (a.config) {
        std::ifstream in(*a.config);
        if (!in) throw vw::InputError("cannot open '" + *a.config + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw vw::InputError(*a.config + ": " + e.what());
        }
        c = vw::io::sim_config_from_json(j, c);
    }
    if (a.protocol) {
        vw::detail::require(*a.protocol == "a" || *a.protocol == "b", "protocol must be 'a' or 'b'");
        c.protocol = *a.protocol == "a" ? vw::Protocol::CostTest : vw::Protocol::ExitPoll;
    }
    if (a.generation) {
        vw::detail::require(*a.generation == "root" || *a.generation == "draw", "generation must be 'root' or 'draw'");
        c.generation = *a.generation == "root" ? vw::Generation::CostRoot : vw::Generation::DrawFromCost;
    }
    if (a.reps) c.reps = *a.reps;
    if (a.seed) c.seed = *a.seed;
    if (!a.n.empty()) c.n = a.n;
    if (!a.k.empty()) c.k = a.k;
    if (!a.p0.empty()) c.p0 = a.p0;
    if (!a.pprime.empty()) c.p_prime = a.pprime;
    if (!a.p0_range.empty()) {
        vw::detail::require(a.p0_range.size() == 2, "--p0-range takes two values");
        c.p0_range = {a.p0_range[0], a.p0_range[1]};
    }
    if (!a.true_cost.empty()) c.true_cost = parse_costs(a.true_cost);
    if (!a.assumed_cost.empty()) c.assumed_cost = parse_costs(a.assumed_cost);
    if (a.alpha) c.alpha = *a.alpha;
    if (a.tau_c) c.tau_c = *a.tau_c;
    if (a.grid) c.extremize.grid = *a.grid;
    c.validate();
    return c;
}

std::string rate_text(const vw::Proportion& p) {
    if (!p.rate()) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << *p.rate() << " (se " << *p.std_error() << ", " << p.count << ")";
    return os.str();
}

int run_simulate(const SimArgs& a) {
    const auto cfg = effective_config(a);
    if (cfg.protocol == vw::Protocol::CostTest)
        for (const auto& h : cfg.assumed_cost) warn_shallow(h);

    const auto rows = vw::run_sim(cfg);
    const auto summary = vw::summarize(rows);

    std::filesystem::create_directories(a.out_dir);
    const auto dir = std::filesystem::path(a.out_dir);
    {
        std::ofstream out(dir / "sim_rows.csv");
        if (!out) throw vw::InputError("cannot write to '" + a.out_dir + "'");
        vw::io::write_sim_rows_csv(out, rows);
    }
    {
        std::ofstream out(dir / "sim_summary.csv");
        vw::io::write_summary_csv(out, summary);
    }
    json cells = json::array();
    for (const auto& s : summary) cells.push_back(vw::io::to_json(s));
    write_json(vw::io::make_report("simulate", vw::io::to_json(cfg), cells), (dir / "sim_report.json").string());

    std::cout << "# config: " << vw::io::to_json(cfg).dump() << '\n';
    for (const auto& s : summary)
        std::cout << s.cell_label << "  type1 " << rate_text(s.type1) << "  power " << rate_text(s.power) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// fprob

int run_fprob(double p0, double pprime, std::int64_t n, const std::string& c) {
    vw::detail::require(c == "b" || c == "c", "case must be 'b' (flips the first candidate) or 'c' (flips the second)");
    vw::detail::require(vw::detail::is_probability(p0) && vw::detail::is_probability(pprime),
                        "p0 and p' must lie in [0, 1]");
    vw::detail::require(n >= 1, "n must be positive");
    const auto ic = c == "b" ? vw::InterventionCase::FlipsFirst : vw::InterventionCase::FlipsSecond;
    std::cout << std::fixed << std::setprecision(8) << vw::eta(p0, pprime, n, ic) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detect majority-changing intervention in two-candidate elections"};
    app.set_version_flag("--version", std::string(vw::kVersion));
    app.require_subcommand(1);

    TestArgs ta;
    auto* test = app.add_subcommand("test", "Test every region of a results file");
    test->add_option("--results", ta.results, "Results CSV (region,candidate,votes)")->required();
    test->add_option("--polls", ta.polls,
                     "Exit polls CSV (region,poll_id,candidate,respondents); polls of one region are assumed "
                     "disjoint and pooled by summing counts");
    test->add_option("--method", ta.method, "exit or cost")->capture_default_str();
    test->add_option("--cost", ta.cost, "Cost function for --method cost, texp:L or beta:B")->capture_default_str();
    test->add_option("--alpha", ta.alpha, "Significance level")->capture_default_str();
    test->add_option("--tau-c", ta.tau_c, "Critical value for the statistic")->capture_default_str();
    test->add_option("--calibration", ta.calibration,
                     "joint: each interval at level sqrt(1 - alpha); marginal: each at 1 - alpha")
        ->capture_default_str();
    test->add_option("--candidates", ta.candidates, "Two candidate names to keep (default: top two per region)")
        ->delimiter(',');
    test->add_option("--grid", ta.grid, "Extremization grid per axis")->capture_default_str();
    test->add_option("--json", ta.json_out, "Write the JSON report to a path, or - for standard output");

    SimArgs sa;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo type-1 error and power");
    sim->add_option("--config", sa.config, "JSON simulation config; flags override it");
    sim->add_option("--protocol", sa.protocol, "a: cost-function test, b: exit-poll test");
    sim->add_option("--generation", sa.generation, "Protocol a data generation: root or draw");
    sim->add_option("--reps", sa.reps, "Replications per cell");
    sim->add_option("--seed", sa.seed, "Master seed (fallback: VOTEWATCH_SEED)");
    sim->add_option("--n", sa.n, "Electorate sizes")->delimiter(',');
    sim->add_option("--k", sa.k, "Exit poll sizes (protocol b)")->delimiter(',');
    sim->add_option("--p0", sa.p0, "Pre-intervention shares (protocol b)")->delimiter(',');
    sim->add_option("--pprime", sa.pprime, "Post-intervention shares (protocol b)")->delimiter(',');
    sim->add_option("--p0-range", sa.p0_range, "lo,hi for p0 ~ U(lo, hi) (protocol a)")->delimiter(',');
    sim->add_option("--true-cost", sa.true_cost, "True cost functions (protocol a)")->delimiter(',');
    sim->add_option("--assumed-cost", sa.assumed_cost, "Assumed cost functions (protocol a)")->delimiter(',');
    sim->add_option("--alpha", sa.alpha, "Significance level");
    sim->add_option("--tau-c", sa.tau_c, "Critical value");
    sim->add_option("--grid", sa.grid, "Extremization grid per axis");
    sim->add_option("--out-dir", sa.out_dir, "Directory for sim_rows.csv, sim_summary.csv, sim_report.json")
        ->capture_default_str();

    double fp0 = 0.0, fpp = 0.0;
    std::int64_t fn = 1;
    std::string fcase = "b";
    auto* fprob = app.add_subcommand("fprob", "Probability that the majority is unchanged");
    fprob->add_option("--p0", fp0, "Pre-intervention share")->required();
    fprob->add_option("--pprime", fpp, "Post-intervention share")->required();
    fprob->add_option("--n", fn, "Electorate size")->capture_default_str();
    fprob->add_option("--case", fcase, "b: intervention flips the first candidate's voters, c: the second's")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*test) return run_test(ta);
        if (*sim) return run_simulate(sa);
        return run_fprob(fp0, fpp, fn, fcase);
    } catch (const vw::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const vw::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
