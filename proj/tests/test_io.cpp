#include <gtest/gtest.h>

#include <sstream>

#include <votewatch/io.hpp>

using namespace votewatch;

namespace {

io::Dataset ingest_text(const std::string& results, const std::string& polls = "", io::IngestOptions opt = {}) {
    std::istringstream r(results), p(polls);
    return io::ingest(r, polls.empty() ? nullptr : &p, opt);
}

std::string data_path(const char* name) { return std::string(VOTEWATCH_DATA_DIR) + "/" + name; }

} // namespace

TEST(Ingest, DropsThirdCandidateAndRescales) {
    const auto d = ingest_text("region,candidate,votes\nMichigan,Clinton,2268733\nMichigan,Trump,2279649\n"
                               "Michigan,Other,250902\n");
    ASSERT_EQ(d.results.size(), 1u);
    EXPECT_EQ(d.results[0].n(), 4548382);
    EXPECT_NEAR(d.results[0].first_share(), 0.4988, 5e-5);
    EXPECT_EQ(d.results[0].first_name(), "Clinton");
}

TEST(Ingest, DesignatedCandidates) {
    io::IngestOptions opt;
    opt.candidates = std::pair<std::string, std::string>{"B", "C"};
    const auto d = ingest_text("region,candidate,votes\nX,A,500\nX,B,300\nX,C,200\n", "", opt);
    EXPECT_EQ(d.results[0].first_name(), "B");
    EXPECT_EQ(d.results[0].n(), 500);
}

TEST(Ingest, PoolsPollsByRegion) {
    const auto d = ingest_text("region,candidate,votes\nX,A,500\nX,B,400\n",
                               "region,poll_id,candidate,respondents\nX,p1,A,60\nX,p1,B,40\nX,p2,A,10\nX,p2,B,90\n");
    ASSERT_EQ(d.polls.size(), 1u);
    EXPECT_EQ(d.polls[0].k(), 200);
    EXPECT_DOUBLE_EQ(d.polls[0].first_share(), 0.35);
}

TEST(Ingest, ErrorsCarryLineNumbers) {
    try {
        ingest_text("region,candidate,votes\nX,A,10\nY,A,5\nY,B,-3\n");
        FAIL();
    } catch (const InputError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;  // single candidate
        EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;  // negative count
    }
}

TEST(Ingest, RejectsMalformedInput) {
    EXPECT_THROW(ingest_text("region,cand,votes\nX,A,1\n"), InputError);
    EXPECT_THROW(ingest_text("region,candidate,votes\nX,A\n"), InputError);
    EXPECT_THROW(ingest_text("region,candidate,votes\nX,A,1\nX,B,0\n"), InputError);
    EXPECT_THROW(ingest_text("region,candidate,votes\nX,A,5\nX,B,4\n",
                             "region,poll_id,candidate,respondents\nZ,p,A,1\nZ,p,B,1\n"),
                 InputError);
    EXPECT_THROW(io::ingest_files("/nonexistent.csv", std::nullopt), InputError);
}

TEST(Ingest, QuotedFields) {
    const auto d = ingest_text("region,candidate,votes\n\"North, East\",\"A \"\"x\"\"\",5\n\"North, East\",B,4\n");
    EXPECT_EQ(d.results[0].region(), "North, East");
    EXPECT_EQ(d.results[0].first_name(), "A \"x\"");
}

TEST(Ingest, RoundTripIsIdempotent) {
    const auto a = io::ingest_files(data_path("us2016_results.csv"), data_path("us2016_polls.csv"));
    std::ostringstream r, p;
    io::write_results_csv(r, a.results);
    io::write_polls_csv(p, a);
    const auto b = ingest_text(r.str(), p.str());
    EXPECT_EQ(a.results, b.results);
    EXPECT_EQ(a.polls, b.polls);
}

TEST(Report, SchemaOnBundledData) {
    for (auto [res, pol] : {std::pair{"us2016_results.csv", "us2016_polls.csv"},
                            {"ua_ve2004_results.csv", "ua_ve2004_polls.csv"},
                            {"synthetic_null_results.csv", "synthetic_null_polls.csv"}}) {
        const auto d = io::ingest_files(data_path(res), data_path(pol));
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < d.results.size(); ++i) {
            rows.push_back(io::to_json(run_test_exit_poll(d.results[i], d.polls[i])));
            rows.push_back(io::to_json(run_test_cost(d.results[i], CostFunction::beta(30))));
        }
        const auto doc = io::make_report("test", {{"alpha", 0.05}}, rows);
        for (const char* key : {"tool", "version", "command", "config", "results"}) EXPECT_TRUE(doc.contains(key));
        for (const auto& row : doc["results"])
            for (const auto& key : io::result_schema_keys()) EXPECT_TRUE(row.contains(key)) << key;
    }
}

TEST(Report, NullDatasetHasNoRejections) {
    const auto d = io::ingest_files(data_path("synthetic_null_results.csv"), data_path("synthetic_null_polls.csv"));
    ASSERT_EQ(d.results.size(), 50u);
    for (std::size_t i = 0; i < d.results.size(); ++i)
        EXPECT_EQ(run_test_exit_poll(d.results[i], d.polls[i]).decision, Decision::Retain) << d.results[i].region();
}

TEST(Display, NearZeroRendering) {
    EXPECT_EQ(io::display_probability(1e-7), "≈ 0");
    EXPECT_EQ(io::display_probability(0.00109), "0.00109");
}

TEST(SimConfigJson, RoundTrip) {
    SimConfig c;
    c.protocol = Protocol::CostTest;
    c.reps = 7;
    c.assumed_cost = {CostFunction::beta(30)};
    c.p0_range = {0.4, 0.6};
    c.generation = Generation::DrawFromCost;
    const auto back = io::sim_config_from_json(io::to_json(c));
    EXPECT_EQ(io::to_json(back), io::to_json(c));
    EXPECT_THROW(io::sim_config_from_json({{"reps", "many"}}), InputError);
    EXPECT_THROW(io::sim_config_from_json({{"protocol", "z"}}), InputError);
}
