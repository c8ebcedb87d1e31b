#include <gtest/gtest.h>

#include <numeric>

#include <dismantler/centrality.hpp>

#include "support.hpp"

using namespace dismantler;
using namespace testing_support;

namespace {

void expect_near_all(const ScoreVector &got, const std::vector<double> &want, double tol, const char *what) {
    ASSERT_EQ(got.size(), want.size()) << what;
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << what << " node " << i;
}

// Small random graphs, some disconnected, some with isolated nodes.
std::vector<Graph> small_corpus() {
    Rng rng(2024);
    std::vector<Graph> out;
    for (int i = 0; i < 40; ++i) {
        const auto n = 2 + rng.below(29);
        const double p = rng.uniform(0.02, 0.4);
        out.push_back(i % 3 == 0 ? random_connected_graph(n, p / 3, rng) : random_graph(n, p, rng));
    }
    out.push_back(star4());
    out.push_back(path(7));
    out.push_back(complete(6));
    return out;
}

} // namespace

TEST(RankNodes, DescendingWithIdTieBreak) {
    EXPECT_EQ(rank_nodes({1.0, 3.0, 3.0, 2.0}), (std::vector<NodeId>{1, 2, 3, 0}));
    EXPECT_EQ(rank_nodes({2.0, 2.0, 2.0}), (std::vector<NodeId>{0, 1, 2}));
}

TEST(Degree, Examples) {
    EXPECT_EQ(degree_centrality(star4()), (ScoreVector{4, 1, 1, 1, 1}));
    EXPECT_EQ(degree_centrality(triangle()), (ScoreVector{2, 2, 2}));
}

TEST(Betweenness, Examples) {
    EXPECT_EQ(betweenness_centrality(path(3)), (ScoreVector{0, 1, 0}));
    EXPECT_EQ(betweenness_centrality(star4()), (ScoreVector{6, 0, 0, 0, 0}));
}

TEST(Betweenness, MatchesPairEnumerationOracle) {
    for (const auto &g : small_corpus())
        expect_near_all(betweenness_centrality(g), betweenness_oracle(g), 1e-9, "bc");
}

TEST(Closeness, Examples) {
    EXPECT_DOUBLE_EQ(closeness_centrality(path(3))[1], 1.0);
    auto iso = closeness_centrality(make_graph(3, {{0, 1}}));
    EXPECT_EQ(iso[2], 0.0);
    EXPECT_EQ(iso[0], 1.0);
}

TEST(Closeness, MatchesDistanceOracle) {
    for (const auto &g : small_corpus())
        expect_near_all(closeness_centrality(g), closeness_oracle(g), 1e-9, "cc");
}

TEST(Harmonic, Examples) {
    EXPECT_EQ(harmonic_centrality(make_graph(4, {{0, 1}, {2, 3}})), (ScoreVector{1, 1, 1, 1}));
    EXPECT_DOUBLE_EQ(harmonic_centrality(path(3))[0], 1.5);
}

TEST(Harmonic, MatchesDistanceOracle) {
    for (const auto &g : small_corpus())
        expect_near_all(harmonic_centrality(g), harmonic_oracle(g), 1e-9, "hc");
}

TEST(Eigenvector, CompleteGraphUniform) {
    auto r = eigenvector_centrality(complete(5));
    EXPECT_TRUE(r.converged);
    for (double x : r.scores) EXPECT_NEAR(x, 1.0 / std::sqrt(5.0), 1e-9);
}

TEST(Eigenvector, StarCenterToLeafRatioIsTwo) {
    auto r = eigenvector_centrality(star4());
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.scores[0] / r.scores[1], 2.0, 1e-6);
}

TEST(Eigenvector, DisconnectedMassOnLargerSpectralRadius) {
    // K4 (radius 3) beside a single edge (radius 1)
    auto g = make_graph(6, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {4, 5}});
    auto r = eigenvector_centrality(g, 5000, 1e-12);
    EXPECT_TRUE(r.converged);
    auto o = eigenvector_oracle(g);
    expect_near_all(r.scores, o.vector, 1e-6, "ec");
    EXPECT_LT(r.scores[4], 1e-6);
}

TEST(Eigenvector, MatchesDenseEigensolverWhenGapIsClear) {
    Rng rng(5);
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
        auto g = random_connected_graph(3 + rng.below(18), rng.uniform(0.05, 0.4), rng);
        auto o = eigenvector_oracle(g);
        if (o.gap < 0.05) continue;
        auto r = eigenvector_centrality(g, 100000, 1e-12);
        EXPECT_TRUE(r.converged);
        expect_near_all(r.scores, o.vector, 1e-6, "ec");
        ++checked;
    }
    EXPECT_GT(checked, 30);
}

TEST(Eigenvector, NonConvergenceIsFlagged) {
    auto r = eigenvector_centrality(path(30), 2, 1e-15);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 2u);
    for (double x : r.scores) EXPECT_TRUE(std::isfinite(x));
}

TEST(CollectiveInfluence, Examples) {
    EXPECT_EQ(collective_influence(path(5), 1)[2], 2.0);
    EXPECT_EQ(collective_influence(star4(), 2)[0], 0.0);
    for (std::size_t ell = 1; ell <= 3; ++ell) {
        auto ci = collective_influence(path(5), ell);
        EXPECT_EQ(ci[0], 0.0);
        EXPECT_EQ(ci[4], 0.0);
    }
    EXPECT_THROW(collective_influence(path(3), 0), std::invalid_argument);
}

TEST(CollectiveInfluence, MatchesDistanceOracle) {
    for (const auto &g : small_corpus()) {
        const auto d = all_pairs_distances(g);
        for (std::size_t ell = 1; ell <= 3; ++ell) {
            std::vector<double> want(g.num_nodes(), 0.0);
            for (NodeId i = 0; i < g.num_nodes(); ++i) {
                double sum = 0.0;
                for (NodeId j = 0; j < g.num_nodes(); ++j)
                    if (d[i][j] == static_cast<std::int64_t>(ell)) sum += static_cast<double>(g.degree(j)) - 1.0;
                want[i] = (static_cast<double>(g.degree(i)) - 1.0) * sum;
                if (g.degree(i) == 0) want[i] = 0.0;
            }
            expect_near_all(collective_influence(g, ell), want, 1e-9, "ci");
        }
    }
}

TEST(PageRank, Examples) {
    auto cycle = make_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
    for (double x : pagerank(cycle).scores) EXPECT_NEAR(x, 1.0 / 6.0, 1e-12);
    auto star = pagerank(star4()).scores;
    for (int leaf = 1; leaf <= 4; ++leaf) EXPECT_GT(star[0], star[leaf]);
    EXPECT_THROW(pagerank(star4(), 1.0), std::invalid_argument);
}

TEST(PageRank, MatchesDenseSolveAndSumsToOne) {
    Rng rng(8);
    for (int i = 0; i < 40; ++i) {
        auto g = random_graph(2 + rng.below(19), rng.uniform(0.05, 0.5), rng);
        auto r = pagerank(g, 0.85, 1000, 1e-13);
        EXPECT_TRUE(r.converged);
        expect_near_all(r.scores, pagerank_oracle(g, 0.85), 1e-8, "pr");
        EXPECT_NEAR(std::accumulate(r.scores.begin(), r.scores.end(), 0.0), 1.0, 1e-6);
    }
}

TEST(PageRank, DefaultsSumToOneOnLargeGraph) {
    Rng rng(9);
    auto g = random_graph(500, 0.01, rng);
    auto r = pagerank(g);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(std::accumulate(r.scores.begin(), r.scores.end(), 0.0), 1.0, 1e-6);
}

TEST(Random, SeededPermutationScores) {
    auto a = random_scores(50, 3);
    auto b = random_scores(50, 3);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, random_scores(50, 4));
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], static_cast<double>(i + 1));
}

TEST(Centrality, PermutationEquivariant) {
    Rng rng(13);
    for (int trial = 0; trial < 15; ++trial) {
        auto g = random_graph(25, 0.15, rng);
        auto perm = random_permutation(25, rng);
        auto h = relabel(g, perm);
        using Fn = std::function<ScoreVector(const Graph &)>;
        std::vector<std::pair<const char *, Fn>> fns{
            {"dc", degree_centrality},
            {"bc", betweenness_centrality},
            {"cc", closeness_centrality},
            {"hc", harmonic_centrality},
            {"ci", [](const Graph &x) { return collective_influence(x, 2); }},
            {"pr", [](const Graph &x) { return pagerank(x, 0.85, 1000, 1e-14).scores; }},
            {"ec", [](const Graph &x) { return eigenvector_centrality(x, 200).scores; }},
        };
        for (auto &[name, fn] : fns) {
            auto sg = fn(g), sh = fn(h);
            for (NodeId u = 0; u < 25; ++u) EXPECT_NEAR(sg[u], sh[perm[u]], 1e-9) << name;
        }
    }
}

TEST(Centrality, AllFinite) {
    for (const auto &g : small_corpus()) {
        for (const auto &s : {degree_centrality(g), betweenness_centrality(g), closeness_centrality(g),
                              harmonic_centrality(g), collective_influence(g, 2), pagerank(g).scores,
                              eigenvector_centrality(g).scores})
            for (double x : s) EXPECT_TRUE(std::isfinite(x));
    }
}
