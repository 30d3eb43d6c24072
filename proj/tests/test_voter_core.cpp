#include <gtest/gtest.h>

#include <random>

#include <votewatch/voter_core.hpp>

using namespace votewatch;

TEST(Classify, CoversEachCase) {
    EXPECT_EQ(classify_intervention({0.0, 0.0}), InterventionCase::NoFlip);
    EXPECT_EQ(classify_intervention({1.0, 1.0}), InterventionCase::NoFlip);
    EXPECT_EQ(classify_intervention({1.0, 3.0}), InterventionCase::FlipsFirst);
    EXPECT_EQ(classify_intervention({3.0, 1.0}), InterventionCase::FlipsSecond);
}

TEST(Classify, BoundaryFallsToNoFlip) {
    // alpha^2 + 1 == alpha beta exactly.
    EXPECT_EQ(classify_intervention({1.0, 2.0}), InterventionCase::NoFlip);
    EXPECT_EQ(classify_intervention({2.0, 1.0}), InterventionCase::NoFlip);
}

TEST(Classify, NeverFlipsBoth) {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 0; i < 20000; ++i) {
        const double a = u(eng), b = u(eng);
        EXPECT_FALSE(a * a + 1 < a * b && b * b + 1 < a * b);
        const auto c = classify_intervention({a, b});
        if (c == InterventionCase::FlipsFirst) {
            EXPECT_LT(a, b);
        } else if (c == InterventionCase::FlipsSecond) {
            EXPECT_GT(a, b);
        }
    }
}

TEST(Classify, RejectsNegativeOrNonFinite) {
    EXPECT_THROW(InterventionVector(-1.0, 1.0), InputError);
    EXPECT_THROW(InterventionVector(1.0, std::nan("")), InputError);
}

TEST(PostIntervention, MatchesCaseFormulas) {
    EXPECT_DOUBLE_EQ(post_intervention_prob(0.52, 0.1, InterventionCase::FlipsFirst), 0.52 * 0.9);
    EXPECT_DOUBLE_EQ(post_intervention_prob(0.45, 0.1, InterventionCase::FlipsSecond), 0.45 + 0.1 - 0.045);
    EXPECT_DOUBLE_EQ(post_intervention_prob(0.45, 0.3, InterventionCase::NoFlip), 0.45);
    EXPECT_DOUBLE_EQ(post_intervention_prob(0.6, 0.0, InterventionCase::FlipsFirst), 0.6);
    EXPECT_THROW(post_intervention_prob(1.2, 0.1, InterventionCase::FlipsFirst), InputError);
}

TEST(Majority, StrictAndTie) {
    EXPECT_EQ(majority(VoteTally(5, 3)), Majority::First);
    EXPECT_EQ(majority(VoteTally(5, 2)), Majority::Second);
    EXPECT_EQ(majority(VoteTally(4, 2)), Majority::Tie);
    const std::vector<Opinion> ops{Opinion::First, Opinion::Second, Opinion::Second};
    EXPECT_EQ(majority(ops), Majority::Second);
    EXPECT_THROW(VoteTally(3, 4), InputError);
}

TEST(Simulate, SeededAndUnbiased) {
    EXPECT_EQ(simulate_votes(0.5, 1000, 3).first_votes(), simulate_votes(0.5, 1000, 3).first_votes());
    const auto t = simulate_votes(0.3, 1'000'000, 9);
    EXPECT_NEAR(t.proportion(), 0.3, 5 * std::sqrt(0.21 / 1e6));
    EXPECT_EQ(simulate_votes(1.0, 10, 1).first_votes(), 10);
}

TEST(Simulate, InterventionFlipsOnlyTargetedOpinion) {
    const auto before = simulate_opinions(0.5, 20000, 4);
    const auto after = apply_intervention(before, {1.0, 3.0}, 0.2, 5);  // flips first
    std::int64_t first_before = 0, first_after = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        if (before[i] == Opinion::Second) {
            EXPECT_EQ(after[i], Opinion::Second);
        }
        first_before += before[i] == Opinion::First;
        first_after += after[i] == Opinion::First;
    }
    const double expected = 0.8 * static_cast<double>(first_before);
    EXPECT_NEAR(static_cast<double>(first_after), expected, 5 * std::sqrt(first_before * 0.16));

    const auto untouched = apply_intervention(before, {1.0, 1.0}, 0.9, 5);
    EXPECT_EQ(untouched, before);
}
