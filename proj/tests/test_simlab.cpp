#include <gtest/gtest.h>

#include <votewatch/simlab.hpp>

using namespace votewatch;

namespace {

SimConfig small_b() {
    SimConfig c;
    c.protocol = Protocol::ExitPoll;
    c.reps = 20;
    c.n = {20000};
    c.k = {5000};
    c.p0 = {0.52, 0.45};
    c.p_prime = {0.45};
    c.seed = 5;
    return c;
}

SimConfig small_a() {
    SimConfig c;
    c.protocol = Protocol::CostTest;
    c.reps = 15;
    c.assumed_cost = {CostFunction::truncated_exponential(30), CostFunction::truncated_exponential(100)};
    c.seed = 5;
    return c;
}

} // namespace

TEST(Seeds, DerivationIsStableAndPathSensitive) {
    EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
    EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
    EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
}

TEST(ProtocolB, ReproducibleAndLabelled) {
    const auto a = run_sim(small_b()), b = run_sim(small_b());
    ASSERT_EQ(a.size(), 40u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].statistic, b[i].statistic);
        EXPECT_EQ(a[i].reject, b[i].reject);
    }
    EXPECT_EQ(a[0].truth, Truth::H1);
    EXPECT_EQ(a[20].truth, Truth::H0);
    EXPECT_EQ(a[0].cell_label, "n=20000;k=5000;p0=0.52;p'=0.45");
}

TEST(ProtocolB, SeedChangesDraws) {
    auto c = small_b();
    const auto a = run_sim(c);
    c.seed = 6;
    const auto b = run_sim(c);
    bool differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) differ |= a[i].statistic != b[i].statistic;
    EXPECT_TRUE(differ);
}

TEST(ProtocolB, AddingCellsKeepsExistingStreams) {
    auto c = small_b();
    c.p0 = {0.52};
    const auto a = run_sim(c);
    const auto b = run_sim(small_b());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].statistic, b[i].statistic);
}

TEST(ProtocolA, RootGenerationZeroesResidual) {
    const auto rows = run_sim(small_a());
    ASSERT_EQ(rows.size(), 30u);
    for (const auto& r : rows) {
        EXPECT_NEAR(r.residual, 0.0, 1e-12);
        EXPECT_GE(r.p0, 0.45);
        EXPECT_LE(r.p0, 0.55);
        EXPECT_LT(r.p_prime, r.p0);
    }
    // Common random numbers across assumed costs.
    for (std::size_t i = 0; i < 15; ++i) EXPECT_EQ(rows[i].p0, rows[i + 15].p0);
}

TEST(ProtocolA, DrawGeneration) {
    auto c = small_a();
    c.generation = Generation::DrawFromCost;
    const auto rows = run_sim(c);
    for (const auto& r : rows) EXPECT_NEAR(r.p_prime, r.p0 * (1 - r.pi0), 1e-15);
}

TEST(Summary, CountsAndRates) {
    std::vector<SimResultRow> rows(4);
    rows[0].truth = Truth::H0;
    rows[0].reject = true;
    rows[1].truth = Truth::H0;
    rows[2].truth = Truth::H1;
    rows[2].reject = true;
    rows[3].truth = Truth::H1;
    rows[3].reject = true;
    for (auto& r : rows) r.statistic = 0.5;
    const auto s = summarize(rows);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].type1.rate(), 0.5);
    EXPECT_EQ(s[0].power.rate(), 1.0);
    EXPECT_NEAR(*s[0].type1.std_error(), 0.5 / std::sqrt(2.0), 1e-15);
    EXPECT_DOUBLE_EQ(s[0].mean_statistic, 0.5);
    EXPECT_THROW(summarize({}), InputError);
    EXPECT_FALSE(Proportion{}.rate());
}

TEST(Config, Validation) {
    auto c = small_b();
    c.reps = 0;
    EXPECT_THROW(c.validate(), InputError);
    c = small_b();
    c.k = {30000};
    EXPECT_THROW(c.validate(), InputError);
    c = small_b();
    c.p0 = {1.0};
    EXPECT_THROW(c.validate(), InputError);
    auto a = small_a();
    a.p0_range = {0.6, 0.5};
    EXPECT_THROW(a.validate(), InputError);
}
