#pragma once

// Two-candidate voter model with vector-valued interventions.
//
// A voter holds opinion (1,0) or (0,1), stored here as +1 / -1. An
// intervention v = (alpha, beta) acting on opinion x produces
// x + <x, v> v, and the voter ends up with whichever coordinate is larger:
//   (1,0) -> (alpha^2 + 1, alpha*beta)   flips iff alpha^2 + 1 < alpha*beta
//   (0,1) -> (alpha*beta, beta^2 + 1)    flips iff beta^2 + 1  < alpha*beta
// Both conditions together would need (alpha - beta)^2 + 2 < 0, so no
// intervention flips everybody.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace votewatch {

enum class Opinion : std::int8_t { First = 1, Second = -1 };

constexpr Opinion flipped(Opinion o) { return o == Opinion::First ? Opinion::Second : Opinion::First; }

class InterventionVector {
public:
    InterventionVector(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        detail::require(alpha >= 0.0 && beta >= 0.0 && std::isfinite(alpha) && std::isfinite(beta),
                        "intervention vector components must be finite and nonnegative");
    }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

private:
    double alpha_;
    double beta_;
};

// NoFlip: p' = p0. FlipsFirst: first-candidate voters hit by the intervention
// switch, p' = p0 (1 - pi0). FlipsSecond: second-candidate voters switch,
// p' = p0 + pi0 - p0 pi0.
enum class InterventionCase { NoFlip, FlipsFirst, FlipsSecond };

inline std::string_view to_string(InterventionCase c) {
    switch (c) {
    case InterventionCase::NoFlip: return "no-flip";
    case InterventionCase::FlipsFirst: return "flips-first";
    case InterventionCase::FlipsSecond: return "flips-second";
    }
    return "?";
}

// Equality falls to the non-flipping side.
inline InterventionCase classify_intervention(const InterventionVector& v) {
    const double a = v.alpha(), b = v.beta();
    const bool first_flips = a * a + 1.0 < a * b;
    const bool second_flips = b * b + 1.0 < a * b;
    if (first_flips) return InterventionCase::FlipsFirst;
    if (second_flips) return InterventionCase::FlipsSecond;
    return InterventionCase::NoFlip;
}

// Whether an intervention of the given case switches a voter holding `o`.
constexpr bool flips(InterventionCase c, Opinion o) {
    return (c == InterventionCase::FlipsFirst && o == Opinion::First) ||
           (c == InterventionCase::FlipsSecond && o == Opinion::Second);
}

inline double post_intervention_prob(double p0, double pi0, InterventionCase c) {
    detail::require(detail::is_probability(p0) && detail::is_probability(pi0),
                    "p0 and pi0 must lie in [0, 1]");
    switch (c) {
    case InterventionCase::NoFlip: return p0;
    case InterventionCase::FlipsFirst: return p0 * (1.0 - pi0);
    case InterventionCase::FlipsSecond: return std::min(1.0, p0 + pi0 - p0 * pi0);
    }
    return p0;
}

class VoteTally {
public:
    VoteTally(std::int64_t n, std::int64_t first_votes) : n_(n), first_(first_votes) {
        detail::require(n >= 1, "vote tally needs at least one voter");
        detail::require(first_votes >= 0 && first_votes <= n, "first_votes must lie in [0, n]");
    }
    std::int64_t n() const { return n_; }
    std::int64_t first_votes() const { return first_; }
    std::int64_t second_votes() const { return n_ - first_; }
    double proportion() const { return static_cast<double>(first_) / static_cast<double>(n_); }

private:
    std::int64_t n_;
    std::int64_t first_;
};

enum class Majority { First, Second, Tie };

inline Majority majority(const VoteTally& t) {
    const auto twice = 2 * t.first_votes();
    if (twice > t.n()) return Majority::First;
    if (twice < t.n()) return Majority::Second;
    return Majority::Tie;
}

inline Majority majority(std::span<const Opinion> opinions) {
    std::int64_t first = 0;
    for (auto o : opinions) first += (o == Opinion::First);
    return majority(VoteTally(static_cast<std::int64_t>(opinions.size()), first));
}

// Binomial(n, p) draw of the first candidate's vote count.
inline VoteTally simulate_votes(double p, std::int64_t n, std::uint64_t seed) {
    detail::require(detail::is_probability(p), "p must lie in [0, 1]");
    detail::require(n >= 1, "n must be positive");
    auto eng = make_engine(seed);
    std::binomial_distribution<std::int64_t> draw(n, p);
    return VoteTally(n, draw(eng));
}

// Voter-level realization of the iid Bernoulli(p) model.
inline std::vector<Opinion> simulate_opinions(double p, std::int64_t n, std::uint64_t seed) {
    detail::require(detail::is_probability(p), "p must lie in [0, 1]");
    detail::require(n >= 1, "n must be positive");
    auto eng = make_engine(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Opinion> out(static_cast<std::size_t>(n));
    for (auto& o : out) o = u(eng) < p ? Opinion::First : Opinion::Second;
    return out;
}

// Each voter is independently selected with probability pi0; selected voters
// switch iff the intervention's case flips their current opinion.
inline std::vector<Opinion> apply_intervention(std::span<const Opinion> opinions, const InterventionVector& v,
                                               double pi0, std::uint64_t seed) {
    detail::require(detail::is_probability(pi0), "pi0 must lie in [0, 1]");
    const auto c = classify_intervention(v);
    auto eng = make_engine(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Opinion> out(opinions.begin(), opinions.end());
    for (auto& o : out) {
        const bool selected = u(eng) < pi0;
        if (selected && flips(c, o)) o = flipped(o);
    }
    return out;
}

} // namespace votewatch
