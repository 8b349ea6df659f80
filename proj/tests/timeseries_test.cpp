#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "graphdist/io.hpp"
#include "graphdist/timeseries.hpp"
#include "oracles.hpp"

using namespace graphdist;

namespace {

ChannelMatrix load_fixture() {
    std::ifstream f(GRAPHDIST_TEST_DATA "/three_channel.csv");
    return io::read_channel_matrix(f, 1000.0);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream o;
    o << f.rdbuf();
    return o.str();
}

} // namespace

TEST(Spearman, PerfectMonotone) {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const std::vector<double> up{0.1, 0.5, 2, 9, 10, 100};
    const std::vector<double> down{6, 5, 4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(spearman(x, up), 1.0);
    EXPECT_DOUBLE_EQ(spearman(x, down), -1.0);
}

TEST(Spearman, MatchesRankPearsonOracle) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{1, 3, 2, 5, 4};
    EXPECT_NEAR(spearman(x, y), oracle::spearman(x, y), 1e-12);
    EXPECT_NEAR(spearman(x, y), 0.8, 1e-12);

    std::mt19937 rng(1);
    std::uniform_int_distribution<int> small(0, 4);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> a(9);
        std::vector<double> b(9);
        for (std::size_t k = 0; k < 9; ++k) {
            a[k] = small(rng);
            b[k] = small(rng);
        }
        bool constant = std::all_of(a.begin(), a.end(), [&](double z) { return z == a[0]; }) ||
                        std::all_of(b.begin(), b.end(), [&](double z) { return z == b[0]; });
        if (constant) {
            EXPECT_THROW(spearman(a, b), UndefinedCorrelation);
        } else {
            EXPECT_NEAR(spearman(a, b), oracle::spearman(a, b), 1e-12);
        }
    }
}

TEST(Spearman, AverageRanksForTies) {
    const std::vector<double> x{3, 1, 3, 2, 3};
    const auto r = average_ranks(x);
    EXPECT_EQ(r, (std::vector<double>{4, 1, 4, 2, 4}));
}

TEST(Spearman, ConstantInputIsUndefined) {
    const std::vector<double> x{2, 2, 2};
    const std::vector<double> y{1, 2, 3};
    EXPECT_THROW(spearman(x, y), UndefinedCorrelation);
}

TEST(Windows, LayoutFromMilliseconds) {
    const auto w = window_layout(20, 1000.0, WindowSpec{5.0, 5.0});
    ASSERT_EQ(w.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(w[k].start, 5 * k);
        EXPECT_EQ(w[k].end, 5 * k + 5);
    }
    const auto whole = window_layout(20, 1000.0, WindowSpec{20.0, 3.0});
    EXPECT_EQ(whole.size(), 1u);
}

TEST(Windows, DefaultSpecAtTwoHundredFiftyHertz) {
    // 333 ms -> 83 samples; 16.66 ms steps at 250 Hz land on round(4.165 k)
    const auto w = window_layout(1000, 250.0, WindowSpec{});
    EXPECT_EQ(w.front().start, 0u);
    EXPECT_EQ(w.front().end, 83u);
    EXPECT_EQ(w[1].start, 4u);
    EXPECT_EQ(w[2].start, 8u);
    EXPECT_EQ(w[3].start, 12u);
    EXPECT_LE(w.back().end, 1000u);
}

TEST(Windows, RejectsInvalidSpecs) {
    EXPECT_THROW(window_layout(10, 1000.0, WindowSpec{20.0, 5.0}), InvalidArgument);
    EXPECT_THROW(window_layout(10, 1000.0, WindowSpec{1.0, 5.0}), InvalidArgument);
    EXPECT_THROW(window_layout(10, 1000.0, WindowSpec{5.0, 0.0}), InvalidArgument);
}

TEST(CorrelationSeries, IdenticalChannelsAreOne) {
    ChannelMatrix m{{"x", "y"}, {{1, 4, 2, 8, 5, 7, 3, 6}, {1, 4, 2, 8, 5, 7, 3, 6}}, 1000.0};
    const auto cs = correlation_series(m, WindowSpec{4.0, 2.0});
    for (double r : cs.values[0]) {
        EXPECT_DOUBLE_EQ(r, 1.0);
    }
}

TEST(CorrelationSeries, FixtureMatchesOracle) {
    const auto m = load_fixture();
    const auto cs = correlation_series(m, WindowSpec{5.0, 5.0});
    ASSERT_EQ(cs.windows.size(), 4u);
    const auto pairs = canonical_pairs(3);
    for (std::size_t s = 0; s < pairs.size(); ++s) {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& a = m.channels[pairs[s].i];
            const auto& b = m.channels[pairs[s].j];
            const std::vector<double> x(a.begin() + 5 * k, a.begin() + 5 * k + 5);
            const std::vector<double> y(b.begin() + 5 * k, b.begin() + 5 * k + 5);
            EXPECT_NEAR(cs.values[s][k], oracle::spearman(x, y), 1e-12);
        }
    }
    EXPECT_EQ(cs.undefined_windows, 0u);
}

TEST(CorrelationSeries, ConstantWindowsAreCountedAndZeroed) {
    ChannelMatrix m{{"x", "y"}, {{1, 1, 1, 1, 2, 3, 4, 5}, {5, 3, 2, 1, 1, 2, 3, 4}}, 1000.0};
    const auto cs = correlation_series(m, WindowSpec{4.0, 4.0});
    EXPECT_EQ(cs.values[0][0], 0.0);
    EXPECT_DOUBLE_EQ(cs.values[0][1], 1.0);
    EXPECT_EQ(cs.undefined_windows, 1u);
}

TEST(CorrelationSeries, ThreadCountDoesNotMatter) {
    std::mt19937 rng(2);
    std::normal_distribution<double> z;
    ChannelMatrix m;
    m.sampling_rate = 250.0;
    for (int c = 0; c < 6; ++c) {
        m.labels.push_back("c" + std::to_string(c));
        std::vector<double> x(600);
        for (auto& v : x) {
            v = z(rng);
        }
        m.channels.push_back(x);
    }
    const auto one = correlation_series(m, WindowSpec{}, 1);
    const auto four = correlation_series(m, WindowSpec{}, 4);
    EXPECT_EQ(one.values, four.values);
    EXPECT_EQ(build_graphs(one, {}), build_graphs(four, {}));
}

TEST(Quartiles, KnownValues) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const auto q = pair_quartiles(x);
    EXPECT_DOUBLE_EQ(q.q1, 2.0);
    EXPECT_DOUBLE_EQ(q.q3, 4.0);
    const std::vector<double> c(7, 0.3);
    EXPECT_EQ(pair_quartiles(c).q1, 0.3);
    EXPECT_EQ(pair_quartiles(c).q3, 0.3);
    EXPECT_THROW(pair_quartiles(std::vector<double>{1, 2, 3}), InvalidArgument);
}

TEST(Quartiles, MatchesInterpolationOracle) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(10);
        for (auto& v : x) {
            v = u(rng);
        }
        const auto q = pair_quartiles(x);
        EXPECT_NEAR(q.q1, oracle::quantile7(x, 0.25), 1e-12);
        EXPECT_NEAR(q.q3, oracle::quantile7(x, 0.75), 1e-12);
    }
}

TEST(Threshold, ConstantSeries) {
    const Quartiles ones{1.0, 1.0};
    EXPECT_TRUE(threshold_edge(1.0, 0.5, ones));
    const Quartiles zeros{0.0, 0.0};
    EXPECT_FALSE(threshold_edge(0.0, 0.5, zeros));
}

TEST(Threshold, HandAppliedFixtureSeries) {
    // (0.9, 0.1, -0.8, 0.2): sorted (-0.8, 0.1, 0.2, 0.9); q1 at position 0.75
    // gives -0.8 + 0.75 * 0.9 = -0.125, q3 at 2.25 gives 0.2 + 0.25 * 0.7 = 0.375.
    const std::vector<double> series{0.9, 0.1, -0.8, 0.2};
    const auto q = pair_quartiles(series);
    EXPECT_NEAR(q.q1, -0.125, 1e-12);
    EXPECT_NEAR(q.q3, 0.375, 1e-12);
    // edge iff rho >= max(0.5, 0.375) = 0.5 or rho <= min(-0.5, -0.125) = -0.5
    const std::vector<bool> expected{true, false, true, false};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(threshold_edge(series[k], 0.5, q), expected[k]);
    }
}

TEST(BuildGraphs, IdenticalChannelsGiveCompleteGraphs) {
    std::vector<double> x{3, 1, 4, 1.5, 5, 9, 2, 6, 5.5, 3.5, 8, 9.7};
    ChannelMatrix m{{"a", "b", "c"}, {x, x, x}, 1000.0};
    const auto s = build_graphs(correlation_series(m, WindowSpec{4.0, 2.0}), {});
    EXPECT_EQ(s.size(), 5u);
    for (const auto& g : s) {
        EXPECT_EQ(g, Graph::complete(3));
    }
}

TEST(BuildGraphs, FixtureFileIsBitIdentical) {
    const auto s = build_graphs(correlation_series(load_fixture(), WindowSpec{5.0, 5.0}), {});
    std::ostringstream out;
    io::write_graph_sample(out, s);
    EXPECT_EQ(out.str(), slurp(GRAPHDIST_TEST_DATA "/three_channel_expected.edges"));
}

TEST(BuildGraphs, RejectsBadThreshold) {
    const auto cs = correlation_series(load_fixture(), WindowSpec{5.0, 5.0});
    EXPECT_THROW(build_graphs(cs, ThresholdSpec{0.0}), InvalidArgument);
    EXPECT_THROW(build_graphs(cs, ThresholdSpec{1.0}), InvalidArgument);
}

TEST(SummaryGraph, IdenticalGraphs) {
    const std::vector<VertexPair> edges{{0, 1}, {1, 3}, {2, 4}};
    const auto g = Graph::from_pairs(5, edges);
    const GraphSample s(5, std::vector<Graph>(4, g));
    const auto summary = summary_graph(s, 3);
    EXPECT_EQ(summary.graph, g);
    for (const auto& e : summary.edges) {
        EXPECT_EQ(e.frequency, 1.0);
    }
}

TEST(SummaryGraph, AllPairsWhenKIsPairCount) {
    std::mt19937 rng(4);
    const auto s = oracle::random_sample(6, 10, 0.3, rng);
    EXPECT_EQ(summary_graph(s, 15).graph, Graph::complete(6));
    EXPECT_THROW(summary_graph(s, 16), InvalidArgument);
}

TEST(SummaryGraph, MatchesSortOracle) {
    std::mt19937 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const auto s = oracle::random_sample(7, 25, 0.4, rng);
        const auto mats = oracle::matrices(s);
        // (count, i, j) sorted by count descending then pair ascending
        std::vector<std::tuple<int, std::size_t, std::size_t>> rows;
        for (std::size_t i = 0; i < 7; ++i) {
            for (std::size_t j = i + 1; j < 7; ++j) {
                int count = 0;
                for (const auto& a : mats) {
                    count += a[i][j];
                }
                rows.emplace_back(-count, i, j);
            }
        }
        std::sort(rows.begin(), rows.end());
        const auto summary = summary_graph(s, 8);
        for (std::size_t r = 0; r < 8; ++r) {
            EXPECT_EQ(summary.edges[r].pair.i, std::get<1>(rows[r]));
            EXPECT_EQ(summary.edges[r].pair.j, std::get<2>(rows[r]));
            EXPECT_DOUBLE_EQ(summary.edges[r].frequency, -std::get<0>(rows[r]) / 25.0);
        }
    }
}
