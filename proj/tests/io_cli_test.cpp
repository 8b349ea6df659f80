#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "graphdist/cli.hpp"
#include "graphdist/io.hpp"
#include "oracles.hpp"

using namespace graphdist;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream o;
    o << f.rdbuf();
    return o.str();
}

std::string without_comments(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
        if (!line.starts_with("#")) {
            out += line + '\n';
        }
    }
    return out;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("graphdist_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        out_.str({});
        err_.str({});
        return cli::run(args, out_, err_);
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

} // namespace

TEST(GraphSampleFormat, RoundTrip) {
    std::mt19937 rng(1);
    for (int base : {0, 1}) {
        auto s = oracle::random_sample(9, 12, 0.4, rng);
        s.push_back(Graph::empty(9));
        s.push_back(Graph::complete(9));
        std::stringstream buf;
        io::write_graph_sample(buf, s, base, {"a comment"});
        const auto loaded = io::read_graph_sample(buf);
        EXPECT_EQ(loaded.sample, s);
        EXPECT_EQ(loaded.base, base);
    }
}

TEST(GraphSampleFormat, EmptyGraphsHaveNoLines) {
    std::stringstream buf;
    io::write_graph_sample(buf, GraphSample(4, std::vector<Graph>(3, Graph::empty(4))));
    EXPECT_EQ(buf.str(), "graphsample v=4 n=3 base=0\n");
}

TEST(GraphSampleFormat, ErrorsCarryLineNumbers) {
    const std::vector<std::pair<std::string, std::size_t>> cases{
        {"graphsample v=4 n=2 base=0\n0 0 1\n2 0 1\n", 3},
        {"graphsample v=4 n=2 base=0\n# c\n0 0 4\n", 3},
        {"graphsample v=4 n=2 base=0\n1 2 2\n", 2},
        {"graphsample v=4 n=2 base=0\n1 2 3\n1 3 2\n", 3},
        {"graphsample v=4 n=2 base=1\n0 0 1\n", 2},
        {"graph v=4\n", 1},
        {"graphsample v=4 n=2 base=0\n0 1\n", 2},
        {"# only a comment\n", 1},
    };
    for (const auto& [text, line] : cases) {
        std::istringstream in(text);
        try {
            io::read_graph_sample(in);
            ADD_FAILURE() << "no error for:\n" << text;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), line) << text;
        }
    }
}

TEST(ChannelCsv, ParsesAndValidates) {
    std::istringstream good("a,b,c\n1,2,3\n4,5,6\n");
    const auto m = io::read_channel_matrix(good, 100.0);
    EXPECT_EQ(m.labels, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(m.channels[1], (std::vector<double>{2, 5}));

    std::istringstream ragged("a,b\n1,2\n3\n");
    EXPECT_THROW(io::read_channel_matrix(ragged, 100.0), ParseError);
    std::istringstream bad("a,b\n1,x\n");
    EXPECT_THROW(io::read_channel_matrix(bad, 100.0), ParseError);
    std::istringstream inf("a,b\n1,inf\n");
    EXPECT_THROW(io::read_channel_matrix(inf, 100.0), ParseError);
    std::istringstream single("a\n1\n2\n");
    EXPECT_THROW(io::read_channel_matrix(single, 100.0), DataError);
}

TEST(MarginalsCsv, RoundTripAndCoverage) {
    const EdgeMarginals m(4, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    std::stringstream buf;
    io::write_marginals(buf, m, 1);
    EXPECT_EQ(io::read_marginals(buf, 4, 1), m);
    std::istringstream partial("i,j,value\n0,1,0.5\n");
    EXPECT_THROW(io::read_marginals(partial, 4), DataError);
}

TEST_F(CliTest, SampleWritesHeaderAndIsDeterministic) {
    const auto out = path("s.txt");
    ASSERT_EQ(run({"sample", "--model", "er", "--v", "10", "--p", "0.5", "--n", "20", "--seed", "7", "--out", out}), 0);
    const auto first = slurp(out);
    EXPECT_TRUE(first.starts_with("graphsample v=10 n=20 base=0\n"));
    EXPECT_NE(first.find("# manifest: s.txt.manifest.json"), std::string::npos);
    EXPECT_TRUE(fs::exists(out + ".manifest.json"));
    ASSERT_EQ(run({"sample", "--model", "er", "--v", "10", "--p", "0.5", "--n", "20", "--seed", "7", "--out", out}), 0);
    EXPECT_EQ(slurp(out), first);
    std::ifstream f(out);
    const auto loaded = io::read_graph_sample(f);
    EXPECT_EQ(loaded.sample.size(), 20u);
}

TEST_F(CliTest, SampleWithZeroProbabilityHasNoEdges) {
    const auto out = path("z.txt");
    ASSERT_EQ(run({"sample", "--model", "er", "--v", "6", "--p", "0", "--n", "5", "--out", out}), 0);
    EXPECT_EQ(without_comments(slurp(out)), "graphsample v=6 n=5 base=0\n");
}

TEST_F(CliTest, ManifestRecordsSeedAndParameters) {
    const auto out = path("m.txt");
    const auto manifest = path("run.json");
    ASSERT_EQ(run({"sample", "--model", "modified-er", "--v", "8", "--p", "0.9", "--q", "0.25", "--n", "3", "--seed",
                   "11", "--out", out, "--manifest", manifest}),
              0);
    const auto doc = nlohmann::json::parse(slurp(manifest));
    EXPECT_EQ(doc["seed"], 11);
    EXPECT_EQ(doc["command"], "sample");
    EXPECT_EQ(doc["version"], version);
    EXPECT_EQ(doc["parameters"]["model"], "modified-er");
    EXPECT_EQ(doc["parameters"]["modified_pairs"].size(), 7u);
    EXPECT_TRUE(doc.contains("started_at"));
    EXPECT_NE(slurp(out).find("# manifest: " + manifest), std::string::npos);
}

TEST_F(CliTest, TwoSampleAgainstItself) {
    const auto s = path("s.txt");
    ASSERT_EQ(run({"sample", "--model", "er", "--v", "6", "--p", "0.4", "--n", "15", "--out", s}), 0);
    const auto csv = path("t.csv");
    ASSERT_EQ(run({"test", "--sample", s, "--sample2", s, "--out", csv}), 0);
    const auto text = slurp(csv);
    EXPECT_TRUE(text.starts_with(
        "kind,n,m,statistic,alpha,critical_value,p_value,reject,replications,seed,marginals_source\n"
        "two-sample,15,15,0,0.05,,1,0,1000,0,\n"));
    EXPECT_NE(out_.str().find("W = 0"), std::string::npos);
}

TEST_F(CliTest, OneSampleCompleteGraphsReject) {
    const auto s = path("complete.txt");
    {
        std::ofstream f(s);
        io::write_graph_sample(f, GraphSample(10, std::vector<Graph>(20, Graph::complete(10))));
    }
    const auto csv = path("r.csv");
    ASSERT_EQ(run({"test", "--sample", s, "--null", "er", "--p", "0.5", "--replications", "1000", "--out", csv}), 0);
    const auto text = slurp(csv);
    EXPECT_NE(text.find("\none-sample,20,,22.5,0.05,"), std::string::npos);
    EXPECT_NE(text.find(",1,1000,0,closed-form\n"), std::string::npos);
}

TEST_F(CliTest, BuildGraphsFixture) {
    const auto out = path("g.txt");
    const auto diag = path("d.json");
    ASSERT_EQ(run({"build-graphs", "--input", GRAPHDIST_TEST_DATA "/three_channel.csv", "--sampling-rate", "1000",
                   "--width-ms", "5", "--step-ms", "5", "--out", out, "--diagnostics", diag}),
              0);
    EXPECT_EQ(without_comments(slurp(out)), slurp(GRAPHDIST_TEST_DATA "/three_channel_expected.edges"));
    const auto d = nlohmann::json::parse(slurp(diag));
    EXPECT_EQ(d["windows"], 4);
}

TEST_F(CliTest, BuildGraphsNeedsSamplingRate) {
    EXPECT_EQ(run({"build-graphs", "--input", GRAPHDIST_TEST_DATA "/three_channel.csv", "--out", path("g.txt")}), 2);
}

TEST_F(CliTest, SummaryListsTopEdges) {
    const auto s = path("s.txt");
    {
        std::ofstream f(s);
        const std::vector<VertexPair> edges{{0, 1}, {2, 3}};
        io::write_graph_sample(f, GraphSample(4, std::vector<Graph>(3, Graph::from_pairs(4, edges))));
    }
    const auto csv = path("top.csv");
    ASSERT_EQ(run({"summary", "--sample", s, "--k", "6", "--out", csv}), 0);
    EXPECT_TRUE(slurp(csv).starts_with("i,j,frequency\n0,1,1\n2,3,1\n0,2,0\n0,3,0\n1,2,0\n1,3,0\n"));
}

TEST_F(CliTest, PowerCsvSchema) {
    const auto csv = path("p.csv");
    ASSERT_EQ(run({"power", "--null", "er", "--null-p", "0.5", "--alt", "er", "--grid", "0.3,0.5,0.7", "--v", "6",
                   "--n", "10", "--M", "200", "--quantile-reps", "500", "--baseline", "bonferroni", "--out", csv}),
              0);
    std::istringstream in(slurp(csv));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "param,power_w,power_bc,replications");
    int rows = 0;
    while (std::getline(in, line) && !line.starts_with("#")) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
        EXPECT_TRUE(line.ends_with(",200"));
        ++rows;
    }
    EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, DensitySweepWarnsOnDegeneracy) {
    const auto csv = path("d.csv");
    ASSERT_EQ(run({"density-sweep", "--stats", "triangle", "--theta1", "-1", "--grid", "0,3", "--v", "6", "--n", "50",
                   "--out", csv}),
              0);
    EXPECT_NE(err_.str().find("degenerate"), std::string::npos);
    EXPECT_TRUE(slurp(csv).starts_with("theta1,theta2,density,exact_density,degenerate\n"));
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"sample", "--model", "nope", "--out", path("x")}), 2);
    EXPECT_EQ(run({"sample", "--model", "er", "--p", "2", "--out", path("x")}), 2);
    EXPECT_EQ(run({"test", "--sample", path("missing.txt"), "--null", "er"}), 3);
    {
        std::ofstream f(path("bad.txt"));
        f << "graphsample v=4 n=1 base=0\n0 0 9\n";
    }
    EXPECT_EQ(run({"test", "--sample", path("bad.txt"), "--null", "er"}), 3);
    EXPECT_NE(err_.str().find("line 2"), std::string::npos);
    {
        std::ofstream f(path("v8.txt"));
        io::write_graph_sample(f, GraphSample(8, std::vector<Graph>(3, Graph::empty(8))));
    }
    EXPECT_EQ(run({"test", "--sample", path("v8.txt"), "--null", "ergm", "--replications", "100"}), 4);
    EXPECT_EQ(run({"--version"}), 0);
}
