#pragma once

// CSV ingestion and report serialization.
//
// Results file (long form, one row per candidate per region):
//   region,candidate,votes
// Polls file (long form; rows of the same region are pooled, assuming the
// polls sampled disjoint respondents):
//   region,poll_id,candidate,respondents
//
// Each region is reduced to two candidates: the two with the most votes
// unless the caller designates them. Other candidates are dropped and shares
// renormalized over the remaining two.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "records.hpp"
#include "simlab.hpp"
#include "testing.hpp"

namespace votewatch {

inline constexpr std::string_view kVersion = "1.0.0";

namespace io {

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Splits one line on commas; double quotes protect embedded commas.
inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"') {
            if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else {
                quoted = !quoted;
            }
        } else if (c == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline std::optional<std::int64_t> parse_count(const std::string& s) {
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::string quote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

} // namespace detail

// Reads a CSV file with the expected header. Blank lines are skipped.
inline std::vector<CsvRow> read_csv(std::istream& in, const std::vector<std::string>& header, const std::string& name) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<CsvRow> rows;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_line(line);
        if (!have_header) {
            if (fields != header) {
                std::string want;
                for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
                throw InputError(name + ": expected header '" + want + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != header.size())
            throw InputError(name + " line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(fields.size()));
        rows.push_back({lineno, std::move(fields)});
    }
    if (!have_header) throw InputError(name + ": missing header row");
    return rows;
}

inline std::vector<CsvRow> read_csv_file(const std::string& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_csv(in, header, path);
}

struct Dataset {
    std::vector<ElectionRecord> results;
    std::vector<ExitPollRecord> polls;  // same order as results; empty without a polls file

    const ExitPollRecord* poll_for(const std::string& region) const {
        for (const auto& p : polls)
            if (p.region() == region) return &p;
        return nullptr;
    }
};

struct IngestOptions {
    // Designated pair; when unset, each region keeps its top two candidates.
    std::optional<std::pair<std::string, std::string>> candidates;
};

namespace detail {

struct Tally {
    std::vector<std::string> order;  // first appearance
    std::map<std::string, std::int64_t> counts;
    std::size_t first_line = 0;
};

inline std::map<std::string, Tally> tally_rows(const std::vector<CsvRow>& rows, std::size_t candidate_col,
                                               std::size_t count_col, const std::string& name,
                                               std::vector<std::string>& region_order,
                                               std::vector<std::string>& errors) {
    std::map<std::string, Tally> out;
    for (const auto& r : rows) {
        const auto& region = r.fields[0];
        const auto& cand = r.fields[candidate_col];
        const auto count = parse_count(r.fields[count_col]);
        const std::string where = name + " line " + std::to_string(r.line) + ": ";
        if (region.empty() || cand.empty()) {
            errors.push_back(where + "empty region or candidate");
            continue;
        }
        if (!count || *count < 0) {
            errors.push_back(where + "count '" + r.fields[count_col] + "' is not a nonnegative integer");
            continue;
        }
        auto [it, fresh] = out.try_emplace(region);
        if (fresh) {
            region_order.push_back(region);
            it->second.first_line = r.line;
        }
        auto& t = it->second;
        if (!t.counts.contains(cand)) t.order.push_back(cand);
        t.counts[cand] += *count;
    }
    return out;
}

inline void throw_if(const std::vector<std::string>& errors) {
    if (errors.empty()) return;
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw InputError(msg);
}

} // namespace detail

inline Dataset ingest(std::istream& results, std::istream* polls, const IngestOptions& opt = {},
                      const std::string& results_name = "results", const std::string& polls_name = "polls") {
    std::vector<std::string> errors, regions;
    const auto result_rows = read_csv(results, {"region", "candidate", "votes"}, results_name);
    auto tallies = detail::tally_rows(result_rows, 1, 2, results_name, regions, errors);

    Dataset out;
    std::map<std::string, std::pair<std::string, std::string>> pairs;
    for (const auto& region : regions) {
        const auto& t = tallies.at(region);
        const std::string where = results_name + " line " + std::to_string(t.first_line) + " (" + region + "): ";
        std::string a, b;
        if (opt.candidates) {
            std::tie(a, b) = *opt.candidates;
            if (!t.counts.contains(a) || !t.counts.contains(b)) {
                errors.push_back(where + "missing votes for '" + a + "' or '" + b + "'");
                continue;
            }
        } else {
            if (t.order.size() < 2) {
                errors.push_back(where + "needs at least two candidates");
                continue;
            }
            auto ranked = t.order;
            std::stable_sort(ranked.begin(), ranked.end(),
                             [&](const auto& x, const auto& y) { return t.counts.at(x) > t.counts.at(y); });
            // Keep file order between the chosen two.
            a = ranked[0], b = ranked[1];
            if (std::find(t.order.begin(), t.order.end(), a) > std::find(t.order.begin(), t.order.end(), b))
                std::swap(a, b);
        }
        const auto va = t.counts.at(a), vb = t.counts.at(b);
        if (va == 0 || vb == 0) {
            errors.push_back(where + "degenerate two-candidate share (a candidate has zero votes)");
            continue;
        }
        pairs[region] = {a, b};
        out.results.emplace_back(region, a, b, va, vb);
    }

    if (polls) {
        std::vector<std::string> poll_regions;
        const auto poll_rows = read_csv(*polls, {"region", "poll_id", "candidate", "respondents"}, polls_name);
        auto poll_tallies = detail::tally_rows(poll_rows, 2, 3, polls_name, poll_regions, errors);
        for (const auto& region : poll_regions) {
            const auto& t = poll_tallies.at(region);
            const std::string where = polls_name + " line " + std::to_string(t.first_line) + " (" + region + "): ";
            const auto pit = pairs.find(region);
            if (pit == pairs.end()) {
                if (!tallies.contains(region)) errors.push_back(where + "region has no final result");
                continue;
            }
            const auto& [a, b] = pit->second;
            const auto ca = t.counts.contains(a) ? t.counts.at(a) : 0;
            const auto cb = t.counts.contains(b) ? t.counts.at(b) : 0;
            if (ca == 0 || cb == 0) {
                errors.push_back(where + "degenerate poll share for '" + a + "' vs '" + b + "'");
                continue;
            }
            out.polls.emplace_back(region, ca, cb);
        }
        // Align polls with results.
        std::vector<ExitPollRecord> aligned;
        for (const auto& r : out.results)
            for (const auto& p : out.polls)
                if (p.region() == r.region()) aligned.push_back(p);
        out.polls = std::move(aligned);
    }
    detail::throw_if(errors);
    return out;
}

inline Dataset ingest_files(const std::string& results_path, const std::optional<std::string>& polls_path,
                            const IngestOptions& opt = {}) {
    std::ifstream results(results_path);
    if (!results) throw InputError("cannot open '" + results_path + "'");
    if (!polls_path) return ingest(results, nullptr, opt, results_path);
    std::ifstream polls(*polls_path);
    if (!polls) throw InputError("cannot open '" + *polls_path + "'");
    return ingest(results, &polls, opt, results_path, *polls_path);
}

inline void write_results_csv(std::ostream& os, const std::vector<ElectionRecord>& results) {
    os << "region,candidate,votes\n";
    for (const auto& r : results) {
        os << detail::quote(r.region()) << ',' << detail::quote(r.first_name()) << ',' << r.first_votes() << '\n';
        os << detail::quote(r.region()) << ',' << detail::quote(r.second_name()) << ',' << r.second_votes() << '\n';
    }
}

inline void write_polls_csv(std::ostream& os, const Dataset& d) {
    os << "region,poll_id,candidate,respondents\n";
    for (const auto& p : d.polls) {
        const ElectionRecord* r = nullptr;
        for (const auto& x : d.results)
            if (x.region() == p.region()) r = &x;
        if (!r) throw InputError("poll region '" + p.region() + "' has no final result");
        os << detail::quote(p.region()) << ",pooled," << detail::quote(r->first_name()) << ','
           << p.first_respondents() << '\n';
        os << detail::quote(p.region()) << ",pooled," << detail::quote(r->second_name()) << ','
           << p.second_respondents() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::json to_json(const Interval& iv) { return nlohmann::json::array({iv.lo, iv.hi}); }

inline nlohmann::json to_json(const TestResult& r) {
    nlohmann::json j;
    j["region"] = r.region;
    j["method"] = to_string(r.method);
    j["cost"] = r.cost ? nlohmann::json(r.cost->to_string()) : nlohmann::json(nullptr);
    j["first_candidate"] = r.first_candidate;
    j["second_candidate"] = r.second_candidate;
    j["swapped"] = r.swapped;
    j["n"] = r.n;
    j["final_share"] = r.final_share;
    j["k"] = r.method == TestMethod::ExitPoll ? nlohmann::json(r.k) : nlohmann::json(nullptr);
    j["p0_estimate"] = r.p0_estimate;
    j["case"] = to_string(r.intervention_case);
    j["p_prime_interval"] = to_json(r.rectangle.p_prime);
    j["p0_interval"] = to_json(r.rectangle.p0);
    j["lower"] = r.lower;
    j["statistic"] = r.statistic;
    j["argmax"] = {{"p_prime", r.argmax.p_prime}, {"p0", r.argmax.p0}};
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
    j["tau_c"] = r.tau_c;
    j["decision"] = to_string(r.decision);
    j["grid"] = r.grid;
    j["clipped"] = r.clipped;
    return j;
}

// Required keys of a per-region result object in the JSON report.
inline const std::vector<std::string>& result_schema_keys() {
    static const std::vector<std::string> keys{
        "region", "method", "cost", "first_candidate", "second_candidate", "swapped", "n", "final_share", "k",
        "p0_estimate", "case", "p_prime_interval", "p0_interval", "lower", "statistic", "argmax", "alpha", "beta",
        "tau_c", "decision", "grid", "clipped"};
    return keys;
}

inline nlohmann::json make_report(std::string_view command, nlohmann::json config, nlohmann::json results) {
    return {{"tool", "votewatch"}, {"version", kVersion}, {"command", command}, {"config", std::move(config)},
            {"results", std::move(results)}};
}

// Values below 1e-6 are shown as "≈ 0".
inline std::string display_probability(double v) {
    if (v < 1e-6) return "≈ 0";
    std::ostringstream os;
    os << std::fixed << std::setprecision(5) << v;
    return os.str();
}

namespace detail {

// Left-justifies to `width` code points; setw counts bytes, which misaligns "≈".
inline std::string pad(const std::string& s, std::size_t width) {
    std::size_t points = 0;
    for (unsigned char c : s) points += (c & 0xC0) != 0x80;
    return points >= width ? s + ' ' : s + std::string(width - points, ' ');
}

} // namespace detail

inline void write_test_table(std::ostream& os, const std::vector<TestResult>& results) {
    os << std::left << std::setw(18) << "region" << std::setw(16) << "first" << std::setw(10) << "p'"
       << std::setw(10) << "p0 est" << std::setw(12) << "m" << std::setw(12) << "M" << "decision\n";
    for (const auto& r : results) {
        std::ostringstream pp, p0;
        pp << std::fixed << std::setprecision(4) << r.final_share;
        p0 << std::fixed << std::setprecision(4) << r.p0_estimate;
        os << std::left << std::setw(18) << r.region << std::setw(16) << r.first_candidate << std::setw(10) << pp.str()
           << std::setw(10) << p0.str() << detail::pad(display_probability(r.lower), 12)
           << detail::pad(display_probability(r.statistic), 12) << (r.decision == Decision::Reject ? "Reject" : "Do not reject")
           << '\n';
    }
}

inline std::string to_csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void write_sim_rows_csv(std::ostream& os, const std::vector<SimResultRow>& rows) {
    os << "cell,cell_label,rep,n,k,true_cost,assumed_cost,p0,p_prime,pi0,residual,eta,truth,statistic,reject\n";
    for (const auto& r : rows) {
        os << r.cell << ',' << detail::quote(r.cell_label) << ',' << r.rep << ',' << r.n << ',' << r.k << ','
           << r.true_cost << ',' << r.assumed_cost << ',' << to_csv_number(r.p0) << ',' << to_csv_number(r.p_prime)
           << ',' << to_csv_number(r.pi0) << ',' << to_csv_number(r.residual) << ',' << to_csv_number(r.eta) << ','
           << (r.truth == Truth::H1 ? "H1" : "H0") << ',' << to_csv_number(r.statistic) << ',' << (r.reject ? 1 : 0)
           << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    auto opt = [](const std::optional<double>& v) { return v ? to_csv_number(*v) : std::string(); };
    os << "cell,cell_label,reps,h0_count,type1_error,type1_se,h1_count,power,power_se,mean_statistic\n";
    for (const auto& s : rows) {
        os << s.cell << ',' << detail::quote(s.cell_label) << ',' << s.reps << ',' << s.type1.count << ','
           << opt(s.type1.rate()) << ',' << opt(s.type1.std_error()) << ',' << s.power.count << ','
           << opt(s.power.rate()) << ',' << opt(s.power.std_error()) << ',' << to_csv_number(s.mean_statistic)
           << '\n';
    }
}

inline nlohmann::json to_json(const SummaryRow& s) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"cell", s.cell},
            {"cell_label", s.cell_label},
            {"reps", s.reps},
            {"h0_count", s.type1.count},
            {"type1_error", opt(s.type1.rate())},
            {"type1_se", opt(s.type1.std_error())},
            {"h1_count", s.power.count},
            {"power", opt(s.power.rate())},
            {"power_se", opt(s.power.std_error())},
            {"mean_statistic", s.mean_statistic}};
}

inline nlohmann::json to_json(const SimConfig& c) {
    nlohmann::json j;
    j["protocol"] = to_string(c.protocol);
    j["reps"] = c.reps;
    j["n"] = c.n;
    j["alpha"] = c.alpha;
    j["tau_c"] = c.tau_c;
    j["seed"] = c.seed;
    j["grid"] = c.extremize.grid;
    if (c.protocol == Protocol::CostTest) {
        std::vector<std::string> t, a;
        for (const auto& x : c.true_cost) t.push_back(x.to_string());
        for (const auto& x : c.assumed_cost) a.push_back(x.to_string());
        j["true_cost"] = t;
        j["assumed_cost"] = a;
        j["p0_range"] = to_json(c.p0_range);
        j["generation"] = to_string(c.generation);
    } else {
        j["k"] = c.k;
        j["p0"] = c.p0;
        j["pprime"] = c.p_prime;
    }
    return j;
}

// Reads a SimConfig from JSON with the same keys to_json(SimConfig) writes.
// Missing keys keep the values already in `base`.
inline SimConfig sim_config_from_json(const nlohmann::json& j, SimConfig base = {}) {
    try {
        if (j.contains("protocol")) {
            const auto p = j.at("protocol").get<std::string>();
            votewatch::detail::require(p == "a" || p == "b", "protocol must be 'a' or 'b'");
            base.protocol = p == "a" ? Protocol::CostTest : Protocol::ExitPoll;
        }
        if (j.contains("generation")) {
            const auto g = j.at("generation").get<std::string>();
            votewatch::detail::require(g == "root" || g == "draw", "generation must be 'root' or 'draw'");
            base.generation = g == "root" ? Generation::CostRoot : Generation::DrawFromCost;
        }
        if (j.contains("reps")) base.reps = j.at("reps").get<std::int64_t>();
        if (j.contains("n")) base.n = j.at("n").get<std::vector<std::int64_t>>();
        if (j.contains("k")) base.k = j.at("k").get<std::vector<std::int64_t>>();
        if (j.contains("p0")) base.p0 = j.at("p0").get<std::vector<double>>();
        if (j.contains("pprime")) base.p_prime = j.at("pprime").get<std::vector<double>>();
        if (j.contains("alpha")) base.alpha = j.at("alpha").get<double>();
        if (j.contains("tau_c")) base.tau_c = j.at("tau_c").get<double>();
        if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("grid")) base.extremize.grid = j.at("grid").get<int>();
        if (j.contains("p0_range")) {
            const auto r = j.at("p0_range").get<std::vector<double>>();
            votewatch::detail::require(r.size() == 2, "p0_range must have two entries");
            base.p0_range = {r[0], r[1]};
        }
        auto costs = [](const nlohmann::json& arr) {
            std::vector<CostFunction> out;
            for (const auto& s : arr) out.push_back(CostFunction::parse(s.get<std::string>()));
            return out;
        };
        if (j.contains("true_cost")) base.true_cost = costs(j.at("true_cost"));
        if (j.contains("assumed_cost")) base.assumed_cost = costs(j.at("assumed_cost"));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid simulation config: ") + e.what());
    }
    return base;
}

} // namespace io
} // namespace votewatch
