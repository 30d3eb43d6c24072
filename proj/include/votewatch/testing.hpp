#pragma once

// Tests for significant electoral intervention.
//
// eta(p0, p', n) is the probability that the majority survives an
// intervention moving the first candidate's support from p0 to p'. An
// intervention is significant when eta < tau_c. Since p0 and p' are unknown,
// both are replaced by confidence intervals at level 1 - beta each (so the
// rectangle has joint coverage (1 - beta)^2 = 1 - alpha), and the test
// statistic is M = sup eta over the rectangle. H0 is rejected iff M < tau_c.
//
// p' always comes from the final tally. p0 comes either from an exit poll
// or from a cost function through phi.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cost.hpp"
#include "error.hpp"
#include "gaussian.hpp"
#include "records.hpp"
#include "voter_core.hpp"

namespace votewatch {

// Joint: each interval at level 1 - beta with (1 - beta)^2 = 1 - alpha.
// Marginal: each interval at level 1 - alpha (no adjustment); reproduces the
// published table values but does not give joint coverage 1 - alpha.
enum class IntervalCalibration { Joint, Marginal };

inline double interval_beta(double alpha, IntervalCalibration cal = IntervalCalibration::Joint) {
    detail::require(detail::is_open_probability(alpha), "alpha must lie in (0, 1)");
    return cal == IntervalCalibration::Joint ? 1.0 - std::sqrt(1.0 - alpha) : alpha;
}

// Half-width sqrt(p (1 - p)) z_{beta/2} / sqrt(n).
inline double gamma_n(double p_hat, std::int64_t n, double alpha, IntervalCalibration cal = IntervalCalibration::Joint) {
    detail::require(detail::is_open_probability(p_hat), "proportion must lie in (0, 1)");
    detail::require(n >= 1, "sample size must be positive");
    const double z = normal_upper_quantile(interval_beta(alpha, cal) / 2.0);
    return std::sqrt(p_hat * (1.0 - p_hat)) * z / std::sqrt(static_cast<double>(n));
}

inline double eta(double p0, double p_prime, std::int64_t n, InterventionCase c) {
    if (c == InterventionCase::NoFlip) {
        detail::require(detail::is_open_probability(p0), "p0 must lie in (0, 1)");
        if (p0 != p_prime) throw InfeasibleError("a non-flipping intervention leaves p' = p0");
        return 1.0;
    }
    return same_sign_prob(moments(p0, p_prime, c, n));
}

// eta with the cross covariance capped so that |rho| <= 1; used only when the
// confidence rectangle misses the case's feasible region entirely.
inline double eta_clamped(double p0, double p_prime, std::int64_t n, InterventionCase c) {
    detail::require(detail::is_open_probability(p0) && detail::is_open_probability(p_prime),
                    "p0 and p' must lie in (0, 1)");
    const double v0 = 4.0 * p0 * (1.0 - p0), v1 = 4.0 * p_prime * (1.0 - p_prime);
    double cross = c == InterventionCase::FlipsSecond ? 4.0 * p0 * (1.0 - p_prime) : 4.0 * p_prime * (1.0 - p0);
    cross = std::min(cross, std::sqrt(v0 * v1));
    return same_sign_prob(GaussianPair({2.0 * p0 - 1.0, 2.0 * p_prime - 1.0}, {Vec2{v0, cross}, Vec2{cross, v1}}, n));
}

// eta parameterized by the intervention probability instead of p0.
inline double eta_from_pi(double pi0, double p_prime, std::int64_t n, InterventionCase c) {
    detail::require(pi0 >= 0.0 && pi0 < 1.0, "pi0 must lie in [0, 1)");
    detail::require(detail::is_open_probability(p_prime), "p' must lie in (0, 1)");
    double p0 = p_prime;
    if (c == InterventionCase::FlipsFirst) p0 = p_prime / (1.0 - pi0);
    if (c == InterventionCase::FlipsSecond) p0 = (p_prime - pi0) / (1.0 - pi0);
    if (!detail::is_open_probability(p0)) throw InfeasibleError("recovered p0 lies outside (0, 1)");
    if (pi0 == 0.0 || c == InterventionCase::NoFlip) return 1.0;
    return eta(p0, p_prime, n, c);
}

struct Interval {
    double lo;
    double hi;

    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

inline constexpr double kProbabilityEpsilon = 1e-9;

inline Interval symmetric_interval(double centre, double half_width) {
    return {std::clamp(centre - half_width, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon),
            std::clamp(centre + half_width, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon)};
}

struct ConfidenceRectangle {
    Interval p_prime;
    Interval p0;
    double alpha = 0.05;
    double beta = interval_beta(0.05);
};

struct Point {
    double p_prime;
    double p0;
};

struct EtaExtrema {
    double lower;  // m
    double upper;  // M
    Point argmin;
    Point argmax;
    // The rectangle missed the feasible region; eta_clamped was used.
    bool clipped;
};

struct ExtremizeOptions {
    int grid = 64;
    int refinement_rounds = 2;
};

namespace detail {

inline bool feasible(const Point& x, InterventionCase c) {
    if (c == InterventionCase::FlipsFirst) return x.p_prime <= x.p0;
    if (c == InterventionCase::FlipsSecond) return x.p_prime >= x.p0;
    return x.p_prime == x.p0;
}

} // namespace detail

// (inf, sup) of eta over the rectangle intersected with the case's feasible
// region (p' <= p0 for flips-first, p' >= p0 for flips-second). Grid search
// over the rectangle plus the corners of the feasible polygon, followed by
// local 9-point refinement with halving steps around both extrema.
// Ties keep the lexicographically first grid point (p' index, then p0 index).
inline EtaExtrema extremize_eta(const ConfidenceRectangle& rect, std::int64_t n, InterventionCase c,
                                const ExtremizeOptions& opt = {}) {
    const Interval& a = rect.p_prime;
    const Interval& b = rect.p0;
    detail::require(a.lo <= a.hi && b.lo <= b.hi, "confidence rectangle is empty");
    detail::require(a.lo > 0.0 && a.hi < 1.0 && b.lo > 0.0 && b.hi < 1.0, "confidence rectangle must lie in (0, 1)^2");
    detail::require(opt.grid >= 2 && opt.refinement_rounds >= 0, "grid needs at least 2 points per axis");
    detail::require(c != InterventionCase::NoFlip, "extremization needs a flipping case");

    const bool overlap = c == InterventionCase::FlipsFirst ? a.lo <= b.hi : a.hi >= b.lo;
    const bool clipped = !overlap;
    auto admissible = [&](const Point& x) { return clipped || detail::feasible(x, c); };
    auto value = [&](const Point& x) { return clipped ? eta_clamped(x.p0, x.p_prime, n, c) : eta(x.p0, x.p_prime, n, c); };

    EtaExtrema out{2.0, -1.0, {}, {}, clipped};
    auto consider = [&](const Point& x) {
        if (!admissible(x)) return;
        const double v = value(x);
        if (v < out.lower) out.lower = v, out.argmin = x;
        if (v > out.upper) out.upper = v, out.argmax = x;
    };

    const int g = opt.grid;
    const double da = a.width() / (g - 1), db = b.width() / (g - 1);
    auto axis = [](const Interval& iv, int i, int g) { return i == g - 1 ? iv.hi : iv.lo + iv.width() * i / (g - 1); };
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) consider({axis(a, i, g), axis(b, j, g)});

    // Where the diagonal p' = p0 crosses the rectangle edges.
    const double d_lo = std::max(a.lo, b.lo), d_hi = std::min(a.hi, b.hi);
    if (d_lo <= d_hi) {
        consider({d_lo, d_lo});
        consider({d_hi, d_hi});
    }
    if (out.upper < 0.0) throw InfeasibleError("no admissible point in the confidence rectangle");

    auto refine = [&](Point best, double best_v, bool minimize) {
        double sa = da, sb = db;
        for (int round = 0; round < opt.refinement_rounds; ++round) {
            sa /= 2.0;
            sb /= 2.0;
            const Point centre = best;
            for (int di = -1; di <= 1; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const Point x{std::clamp(centre.p_prime + di * sa, a.lo, a.hi),
                                  std::clamp(centre.p0 + dj * sb, b.lo, b.hi)};
                    if (!admissible(x)) continue;
                    const double v = value(x);
                    if (minimize ? v < best_v : v > best_v) best_v = v, best = x;
                }
            }
        }
        return std::pair{best, best_v};
    };
    std::tie(out.argmin, out.lower) = refine(out.argmin, out.lower, true);
    std::tie(out.argmax, out.upper) = refine(out.argmax, out.upper, false);
    return out;
}

enum class Decision { Reject, Retain };

inline std::string_view to_string(Decision d) { return d == Decision::Reject ? "reject" : "retain"; }

enum class TestMethod { ExitPoll, Cost };

inline std::string_view to_string(TestMethod m) { return m == TestMethod::ExitPoll ? "exit-poll" : "cost"; }

struct TestOptions {
    double alpha = 0.05;
    double tau_c = 0.5;
    ExtremizeOptions extremize{};
    IntervalCalibration calibration = IntervalCalibration::Joint;
};

struct TestResult {
    std::string region;
    TestMethod method = TestMethod::ExitPoll;
    std::optional<CostFunction> cost;
    // Candidate labels after orientation: first is the final-result loser.
    std::string first_candidate;
    std::string second_candidate;
    bool swapped = false;
    std::int64_t n = 0;
    double final_share = 0.0;
    std::int64_t k = 0;             // exit-poll size (exit-poll method only)
    double p0_estimate = 0.0;       // poll share or phi(p')
    double statistic = 0.0;         // M
    double lower = 0.0;             // m
    double tau_c = 0.5;
    double alpha = 0.05;
    double beta = 0.0;
    Decision decision = Decision::Retain;
    InterventionCase intervention_case = InterventionCase::FlipsFirst;
    ConfidenceRectangle rectangle{};
    Point argmax{};
    int grid = 64;
    bool clipped = false;
};

namespace detail {

inline void check_options(const TestOptions& opt) {
    require(is_open_probability(opt.alpha), "alpha must lie in (0, 1)");
    require(is_open_probability(opt.tau_c), "tau_c must lie in (0, 1)");
}

inline void finish(TestResult& r, const TestOptions& opt) {
    const auto ext = extremize_eta(r.rectangle, r.n, r.intervention_case, opt.extremize);
    r.statistic = std::clamp(ext.upper, 0.0, 1.0);
    r.lower = std::clamp(ext.lower, 0.0, r.statistic);
    r.argmax = ext.argmax;
    r.clipped = ext.clipped;
    r.grid = opt.extremize.grid;
    r.decision = r.statistic < opt.tau_c ? Decision::Reject : Decision::Retain;
}

} // namespace detail

// Exit-poll test. Candidates are relabelled so that the final-result
// loser comes first; the intervention is then taken to have flipped
// first-candidate voters when the poll gives them at least their final share,
// and second-candidate voters otherwise.
inline TestResult run_test_exit_poll(const ElectionRecord& final_result, const ExitPollRecord& poll,
                                     const TestOptions& opt = {}) {
    detail::check_options(opt);
    detail::require(final_result.region() == poll.region(),
                    "region mismatch: '" + final_result.region() + "' vs '" + poll.region() + "'");
    detail::require(poll.k() < final_result.n(), "exit poll must be smaller than the electorate (k < n)");

    const bool swap = final_result.first_share() > 0.5;
    const ElectionRecord fr = swap ? final_result.swapped() : final_result;
    const ExitPollRecord ep = swap ? poll.swapped() : poll;
    const double p_prime = fr.first_share(), p_k = ep.first_share();
    detail::require(detail::is_open_probability(p_prime), "final-result share must lie in (0, 1)");
    detail::require(detail::is_open_probability(p_k), "exit-poll share must lie in (0, 1)");

    TestResult r;
    r.region = fr.region();
    r.method = TestMethod::ExitPoll;
    r.first_candidate = fr.first_name();
    r.second_candidate = fr.second_name();
    r.swapped = swap;
    r.n = fr.n();
    r.final_share = p_prime;
    r.k = ep.k();
    r.p0_estimate = p_k;
    r.tau_c = opt.tau_c;
    r.alpha = opt.alpha;
    r.beta = interval_beta(opt.alpha, opt.calibration);
    r.intervention_case = p_k >= p_prime ? InterventionCase::FlipsFirst : InterventionCase::FlipsSecond;
    r.rectangle = {symmetric_interval(p_prime, gamma_n(p_prime, r.n, opt.alpha, opt.calibration)),
                   symmetric_interval(p_k, gamma_n(p_k, r.k, opt.alpha, opt.calibration)), opt.alpha, r.beta};
    detail::finish(r, opt);
    return r;
}

// Cost-function test: p0 is estimated by phi(p') with a delta-method
// interval phi(p') +- |phi'(p')| gamma_n(p').
inline TestResult run_test_cost(const ElectionRecord& final_result, const CostFunction& c,
                                const TestOptions& opt = {}) {
    detail::check_options(opt);
    const bool swap = final_result.first_share() > 0.5;
    const ElectionRecord fr = swap ? final_result.swapped() : final_result;
    const double p_prime = fr.first_share();
    detail::require(detail::is_open_probability(p_prime), "final-result share must lie in (0, 1)");

    TestResult r;
    r.region = fr.region();
    r.method = TestMethod::Cost;
    r.cost = c;
    r.first_candidate = fr.first_name();
    r.second_candidate = fr.second_name();
    r.swapped = swap;
    r.n = fr.n();
    r.final_share = p_prime;
    r.tau_c = opt.tau_c;
    r.alpha = opt.alpha;
    r.beta = interval_beta(opt.alpha, opt.calibration);
    r.intervention_case = InterventionCase::FlipsFirst;

    const double g = gamma_n(p_prime, r.n, opt.alpha, opt.calibration);
    r.p0_estimate = phi(c, p_prime);
    const double slope = std::abs(phi_prime(c, p_prime));
    r.rectangle = {symmetric_interval(p_prime, g), symmetric_interval(r.p0_estimate, slope * g), opt.alpha, r.beta};
    detail::finish(r, opt);
    return r;
}

} // namespace votewatch
