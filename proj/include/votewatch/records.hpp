#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "error.hpp"

namespace votewatch {

// Two-candidate final result for one region. Votes for anyone else are
// already removed.
class ElectionRecord {
public:
    ElectionRecord(std::string region, std::string first_name, std::string second_name, std::int64_t first_votes,
                   std::int64_t second_votes)
        : region_(std::move(region)), first_name_(std::move(first_name)), second_name_(std::move(second_name)),
          first_votes_(first_votes), second_votes_(second_votes) {
        detail::require(first_votes >= 0 && second_votes >= 0, "vote counts must be nonnegative");
        detail::require(first_votes + second_votes >= 1, "region '" + region_ + "' has no two-candidate votes");
    }

    // n voters with the first candidate's share rounded to whole votes.
    static ElectionRecord from_share(std::string region, std::int64_t n, double first_share,
                                     std::string first_name = "first", std::string second_name = "second") {
        detail::require(n >= 1, "population size must be positive");
        detail::require(detail::is_probability(first_share), "share must lie in [0, 1]");
        const auto first = static_cast<std::int64_t>(std::llround(first_share * static_cast<double>(n)));
        return {std::move(region), std::move(first_name), std::move(second_name), first, n - first};
    }

    const std::string& region() const { return region_; }
    const std::string& first_name() const { return first_name_; }
    const std::string& second_name() const { return second_name_; }
    std::int64_t first_votes() const { return first_votes_; }
    std::int64_t second_votes() const { return second_votes_; }
    std::int64_t n() const { return first_votes_ + second_votes_; }
    double first_share() const { return static_cast<double>(first_votes_) / static_cast<double>(n()); }

    ElectionRecord swapped() const { return {region_, second_name_, first_name_, second_votes_, first_votes_}; }

    friend bool operator==(const ElectionRecord&, const ElectionRecord&) = default;

private:
    std::string region_;
    std::string first_name_;
    std::string second_name_;
    std::int64_t first_votes_;
    std::int64_t second_votes_;
};

// Exit poll for one region, pooled over all polls, with respondents for the
// same two candidates as the matching ElectionRecord.
class ExitPollRecord {
public:
    ExitPollRecord(std::string region, std::int64_t first_respondents, std::int64_t second_respondents)
        : region_(std::move(region)), first_(first_respondents), second_(second_respondents) {
        detail::require(first_respondents >= 0 && second_respondents >= 0, "respondent counts must be nonnegative");
        detail::require(first_ + second_ >= 1, "exit poll for '" + region_ + "' has no respondents");
    }

    static ExitPollRecord from_share(std::string region, std::int64_t k, double first_share) {
        detail::require(k >= 1, "exit poll size must be positive");
        detail::require(detail::is_probability(first_share), "share must lie in [0, 1]");
        const auto first = static_cast<std::int64_t>(std::llround(first_share * static_cast<double>(k)));
        return {std::move(region), first, k - first};
    }

    const std::string& region() const { return region_; }
    std::int64_t first_respondents() const { return first_; }
    std::int64_t second_respondents() const { return second_; }
    std::int64_t k() const { return first_ + second_; }
    double first_share() const { return static_cast<double>(first_) / static_cast<double>(k()); }

    ExitPollRecord swapped() const { return {region_, second_, first_}; }

    friend bool operator==(const ExitPollRecord&, const ExitPollRecord&) = default;

private:
    std::string region_;
    std::int64_t first_;
    std::int64_t second_;
};

} // namespace votewatch
