#pragma once

// Monte Carlo type-1 error and power of the intervention tests.
//
// Protocol a (cost-function tests): per replication draw p0 ~ U(p0_range) and
// generate p' so that the true cost h satisfies the cost-function assumption
// for the realized triple: p' solves phi_h(p') = p0 and pi0 = 1 - p'/p0 is
// the residual root. (DrawFromCost instead draws pi0 ~ h and sets
// p' = p0 (1 - pi0); the assumption then holds only on average.) The final
// tally ~ Binomial(n, p') is tested with the assumed cost h_hat. The data
// stream depends only on (seed, n, true cost, replication), so every assumed
// cost is evaluated on the same simulated elections.
//
// Protocol b (exit-poll test): per (p0, p', n, k) cell and replication draw an
// exit poll ~ Binomial(k, p0) and a final tally ~ Binomial(n, p'), then run
// the exit-poll test.
//
// A replication is H1 ("significant intervention") when eta(p0, p', n) is
// below tau_c; type-1 error is the rejection rate over H0 rows and power the
// rejection rate over H1 rows.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cost.hpp"
#include "error.hpp"
#include "records.hpp"
#include "rng.hpp"
#include "testing.hpp"
#include "voter_core.hpp"

namespace votewatch {

namespace detail {

// Odd electorates exclude exact ties.
constexpr std::int64_t odd(std::int64_t n) { return n % 2 == 0 ? n + 1 : n; }

inline InterventionCase case_for(double p0, double p_prime) {
    return p_prime <= p0 ? InterventionCase::FlipsFirst : InterventionCase::FlipsSecond;
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace detail

enum class Protocol { CostTest, ExitPoll };  // protocol a, protocol b

inline std::string_view to_string(Protocol p) { return p == Protocol::CostTest ? "a" : "b"; }

enum class Generation { CostRoot, DrawFromCost };

inline std::string_view to_string(Generation g) {
    return g == Generation::CostRoot ? "root" : "draw";
}

struct SimConfig {
    Protocol protocol = Protocol::ExitPoll;
    Generation generation = Generation::CostRoot;  // protocol a
    std::int64_t reps = 100;
    std::vector<std::int64_t> n{50'000};
    std::vector<std::int64_t> k{20'000};             // protocol b
    std::vector<CostFunction> true_cost{CostFunction::truncated_exponential(30)};     // protocol a
    std::vector<CostFunction> assumed_cost{CostFunction::truncated_exponential(30)};  // protocol a
    Interval p0_range{0.45, 0.55};                   // protocol a
    std::vector<double> p0{0.52};                    // protocol b
    std::vector<double> p_prime{0.45};               // protocol b
    double alpha = 0.05;
    double tau_c = 0.5;
    std::uint64_t seed = 1;
    ExtremizeOptions extremize{};

    void validate() const {
        detail::require(reps >= 1, "reps must be at least 1");
        detail::require(!n.empty(), "at least one population size n is required");
        for (auto v : n) detail::require(v >= 1, "population size n must be positive");
        detail::require(detail::is_open_probability(alpha), "alpha must lie in (0, 1)");
        detail::require(detail::is_open_probability(tau_c), "tau_c must lie in (0, 1)");
        if (protocol == Protocol::CostTest) {
            detail::require(!true_cost.empty() && !assumed_cost.empty(), "protocol a needs true and assumed costs");
            detail::require(detail::is_open_probability(p0_range.lo) && detail::is_open_probability(p0_range.hi) &&
                                p0_range.lo <= p0_range.hi,
                            "p0 range must be an interval inside (0, 1)");
        } else {
            detail::require(!k.empty() && !p0.empty() && !p_prime.empty(), "protocol b needs k, p0 and p' values");
            for (auto v : k)
                for (auto m : n) detail::require(v >= 1 && v < detail::odd(m), "exit poll size k must satisfy 1 <= k <= n");
            for (auto v : p0) detail::require(detail::is_open_probability(v), "p0 values must lie in (0, 1)");
            for (auto v : p_prime) detail::require(detail::is_open_probability(v), "p' values must lie in (0, 1)");
        }
    }
};

enum class Truth { H0, H1 };

struct SimResultRow {
    std::size_t cell = 0;
    std::string cell_label;
    std::int64_t rep = 0;
    std::int64_t n = 0;
    std::int64_t k = 0;
    std::string true_cost;
    std::string assumed_cost;
    double p0 = 0.0;
    double p_prime = 0.0;
    double pi0 = 0.0;
    double residual = 0.0;     // cost-assumption residual of the realized triple (protocol a)
    double eta = 0.0;          // ground-truth eta(p0, p', n)
    Truth truth = Truth::H0;
    double statistic = 0.0;
    bool reject = false;
};

inline std::vector<SimResultRow> run_sim_a(const SimConfig& cfg) {
    detail::require(cfg.protocol == Protocol::CostTest, "run_sim_a needs protocol a");
    cfg.validate();
    TestOptions opt{cfg.alpha, cfg.tau_c, cfg.extremize};
    std::vector<SimResultRow> rows;
    std::size_t cell = 0;
    for (std::size_t ni = 0; ni < cfg.n.size(); ++ni) {
        const std::int64_t n = detail::odd(cfg.n[ni]);
        for (std::size_t ti = 0; ti < cfg.true_cost.size(); ++ti) {
            const auto& h = cfg.true_cost[ti];
            for (const auto& h_hat : cfg.assumed_cost) {
                const std::string label = "n=" + std::to_string(cfg.n[ni]) + ";h=" + h.to_string() +
                                          ";h_hat=" + h_hat.to_string();
                for (std::int64_t rep = 0; rep < cfg.reps; ++rep) {
                    const std::uint64_t base = derive_seed(cfg.seed, {0xA, ni, ti, static_cast<std::uint64_t>(rep)});
                    auto eng = make_engine(base);
                    std::uniform_real_distribution<double> u(0.0, 1.0);
                    const double p0 = cfg.p0_range.lo + (cfg.p0_range.hi - cfg.p0_range.lo) * u(eng);
                    double pi0 = 0.0, p_prime = 0.0;
                    if (cfg.generation == Generation::CostRoot) {
                        p_prime = phi_inverse(h, p0);
                        pi0 = 1.0 - p_prime / p0;
                    } else {
                        pi0 = h.quantile(u(eng));
                        p_prime = p0 * (1.0 - pi0);
                    }
                    const auto tally = simulate_votes(p_prime, n, derive_seed(base, {1}));

                    SimResultRow row;
                    row.cell = cell;
                    row.cell_label = label;
                    row.rep = rep;
                    row.n = n;
                    row.true_cost = h.to_string();
                    row.assumed_cost = h_hat.to_string();
                    row.p0 = p0;
                    row.p_prime = p_prime;
                    row.pi0 = pi0;
                    row.residual = p_prime > 0.0 && pi0 < 1.0 ? cost_residual(h, pi0, p_prime) : 0.0;
                    row.eta = p_prime > 0.0 ? eta(p0, p_prime, n, InterventionCase::FlipsFirst) : 0.0;
                    row.truth = row.eta < cfg.tau_c ? Truth::H1 : Truth::H0;
                    const auto result = run_test_cost(
                        ElectionRecord("sim", "first", "second", tally.first_votes(), tally.second_votes()), h_hat, opt);
                    row.statistic = result.statistic;
                    row.reject = result.decision == Decision::Reject;
                    rows.push_back(std::move(row));
                }
                ++cell;
            }
        }
    }
    return rows;
}

inline std::vector<SimResultRow> run_sim_b(const SimConfig& cfg) {
    detail::require(cfg.protocol == Protocol::ExitPoll, "run_sim_b needs protocol b");
    cfg.validate();
    TestOptions opt{cfg.alpha, cfg.tau_c, cfg.extremize};
    std::vector<SimResultRow> rows;
    std::size_t cell = 0;
    for (std::size_t ni = 0; ni < cfg.n.size(); ++ni) {
        const std::int64_t n = detail::odd(cfg.n[ni]);
        for (std::size_t ki = 0; ki < cfg.k.size(); ++ki) {
            const std::int64_t k = cfg.k[ki];
            for (std::size_t ai = 0; ai < cfg.p0.size(); ++ai) {
                for (std::size_t bi = 0; bi < cfg.p_prime.size(); ++bi) {
                    const double p0 = cfg.p0[ai], p_prime = cfg.p_prime[bi];
                    const double truth_eta = eta(p0, p_prime, n, detail::case_for(p0, p_prime));
                    const std::string label = "n=" + std::to_string(cfg.n[ni]) + ";k=" + std::to_string(k) +
                                              ";p0=" + detail::fmt(p0) + ";p'=" + detail::fmt(p_prime);
                    for (std::int64_t rep = 0; rep < cfg.reps; ++rep) {
                        const std::uint64_t base =
                            derive_seed(cfg.seed, {0xB, ni, ki, ai, bi, static_cast<std::uint64_t>(rep)});
                        const auto poll = simulate_votes(p0, k, derive_seed(base, {1}));
                        const auto tally = simulate_votes(p_prime, n, derive_seed(base, {2}));

                        SimResultRow row;
                        row.cell = cell;
                        row.cell_label = label;
                        row.rep = rep;
                        row.n = n;
                        row.k = k;
                        row.p0 = p0;
                        row.p_prime = p_prime;
                        row.eta = truth_eta;
                        row.truth = truth_eta < cfg.tau_c ? Truth::H1 : Truth::H0;
                        const auto result = run_test_exit_poll(
                            ElectionRecord("sim", "first", "second", tally.first_votes(), tally.second_votes()),
                            ExitPollRecord("sim", poll.first_votes(), poll.second_votes()), opt);
                        row.statistic = result.statistic;
                        row.reject = result.decision == Decision::Reject;
                        rows.push_back(std::move(row));
                    }
                    ++cell;
                }
            }
        }
    }
    return rows;
}

inline std::vector<SimResultRow> run_sim(const SimConfig& cfg) {
    return cfg.protocol == Protocol::CostTest ? run_sim_a(cfg) : run_sim_b(cfg);
}

struct Proportion {
    std::int64_t count = 0;  // rows in the class
    std::int64_t rejections = 0;
    std::optional<double> rate() const {
        if (count == 0) return std::nullopt;
        return static_cast<double>(rejections) / static_cast<double>(count);
    }
    std::optional<double> std_error() const {
        auto p = rate();
        if (!p) return std::nullopt;
        return std::sqrt(*p * (1.0 - *p) / static_cast<double>(count));
    }
};

struct SummaryRow {
    std::size_t cell = 0;
    std::string cell_label;
    std::int64_t reps = 0;
    Proportion type1;  // over H0 rows
    Proportion power;  // over H1 rows
    double mean_statistic = 0.0;
};

// Per-cell aggregation, ordered by cell index.
inline std::vector<SummaryRow> summarize(const std::vector<SimResultRow>& rows) {
    detail::require(!rows.empty(), "cannot summarize an empty result table");
    std::map<std::size_t, SummaryRow> cells;
    for (const auto& r : rows) {
        auto& s = cells[r.cell];
        s.cell = r.cell;
        s.cell_label = r.cell_label;
        ++s.reps;
        s.mean_statistic += r.statistic;
        auto& cls = r.truth == Truth::H0 ? s.type1 : s.power;
        ++cls.count;
        cls.rejections += r.reject;
    }
    std::vector<SummaryRow> out;
    out.reserve(cells.size());
    for (auto& [_, s] : cells) {
        s.mean_statistic /= static_cast<double>(s.reps);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace votewatch
