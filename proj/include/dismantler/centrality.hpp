#pragma once

// Classical one-pass node centralities used as dismantling baselines.
// Every function returns one finite score per node; larger means "attack first".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace dismantler {

using ScoreVector = std::vector<double>;

/// Node order by descending score, ties broken by ascending node id.
inline std::vector<NodeId> rank_nodes(const ScoreVector &scores) {
    std::vector<NodeId> order(scores.size());
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return scores[a] > scores[b]; });
    return order;
}

inline ScoreVector degree_centrality(const Graph &g) {
    ScoreVector s(g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u) s[u] = static_cast<double>(g.degree(u));
    return s;
}

/**
 * Brandes betweenness, unnormalized, each unordered pair counted once.
 * Sources are processed in node order and accumulated into one vector, so the
 * result does not depend on scheduling.
 */
inline ScoreVector betweenness_centrality(const Graph &g) {
    const auto n = g.num_nodes();
    ScoreVector bc(n, 0.0);
    std::vector<NodeId> stack;
    std::vector<std::int64_t> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<NodeId> queue(n);
    for (NodeId s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        stack.clear();
        dist[s] = 0;
        sigma[s] = 1.0;
        std::size_t head = 0, tail = 0;
        queue[tail++] = s;
        while (head < tail) {
            NodeId v = queue[head++];
            stack.push_back(v);
            for (NodeId w : g.neighbors(v)) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue[tail++] = w;
                }
                if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
            }
        }
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            NodeId w = *it;
            for (NodeId v : g.neighbors(w))
                if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    for (auto &x : bc) x /= 2.0;
    return bc;
}

/// Closeness within each node's own component: (|C|-1) / sum of distances.
/// Isolated nodes score 0.
inline ScoreVector closeness_centrality(const Graph &g) {
    ScoreVector s(g.num_nodes(), 0.0);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        auto d = bfs_distances(g, u);
        std::int64_t total = 0, reached = 0;
        for (auto x : d)
            if (x > 0) {
                total += x;
                ++reached;
            }
        if (total > 0) s[u] = static_cast<double>(reached) / static_cast<double>(total);
    }
    return s;
}

/// Sum of inverse distances; unreachable pairs contribute 0.
inline ScoreVector harmonic_centrality(const Graph &g) {
    ScoreVector s(g.num_nodes(), 0.0);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        auto d = bfs_distances(g, u);
        double acc = 0.0;
        for (auto x : d)
            if (x > 0) acc += 1.0 / static_cast<double>(x);
        s[u] = acc;
    }
    return s;
}

struct IterativeResult {
    ScoreVector scores;
    std::size_t iterations = 0;
    bool converged = false;
};

/**
 * Eigenvector centrality by power iteration from the all-ones vector,
 * L2-normalized every step. Iterates x <- (A + I) x: same eigenvectors as A,
 * but the shift keeps bipartite graphs (stars, paths) from oscillating
 * between the +lambda and -lambda eigenvectors.
 */
inline IterativeResult eigenvector_centrality(const Graph &g, std::size_t max_iter = 1000, double tol = 1e-10) {
    const auto n = g.num_nodes();
    if (n == 0) throw GraphError("eigenvector centrality of empty graph");
    IterativeResult r;
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
    for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
        for (NodeId u = 0; u < n; ++u) {
            double acc = x[u];
            for (NodeId v : g.neighbors(u)) acc += x[v];
            next[u] = acc;
        }
        double norm = 0.0;
        for (double v : next) norm += v * v;
        norm = std::sqrt(norm);
        double diff = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            next[u] /= norm;
            diff = std::max(diff, std::abs(next[u] - x[u]));
        }
        x.swap(next);
        if (diff < tol) {
            r.converged = true;
            break;
        }
    }
    r.iterations = std::min(r.iterations, max_iter);
    r.scores = std::move(x);
    return r;
}

/// CI_l(i) = (k_i - 1) * sum over nodes j at distance exactly l of (k_j - 1).
inline ScoreVector collective_influence(const Graph &g, std::size_t ell = 2) {
    if (ell < 1) throw std::invalid_argument("collective influence radius must be >= 1");
    const auto n = g.num_nodes();
    ScoreVector s(n, 0.0);
    std::vector<std::int64_t> dist(n, -1);
    std::vector<NodeId> frontier, next, touched;
    for (NodeId u = 0; u < n; ++u) {
        const double ku = static_cast<double>(g.degree(u)) - 1.0;
        if (ku <= 0.0) continue;
        frontier.assign(1, u);
        touched.assign(1, u);
        dist[u] = 0;
        for (std::size_t level = 0; level < ell && !frontier.empty(); ++level) {
            next.clear();
            for (NodeId v : frontier)
                for (NodeId w : g.neighbors(v))
                    if (dist[w] < 0) {
                        dist[w] = static_cast<std::int64_t>(level + 1);
                        next.push_back(w);
                        touched.push_back(w);
                    }
            frontier.swap(next);
        }
        double boundary = 0.0;
        for (NodeId v : frontier) boundary += static_cast<double>(g.degree(v)) - 1.0;
        s[u] = ku * boundary;
        for (NodeId v : touched) dist[v] = -1;
    }
    return s;
}

/// PageRank with uniform teleport. Mass sitting on isolated nodes is spread
/// uniformly. Stops when the L1 change drops below tol.
inline IterativeResult pagerank(const Graph &g, double damping = 0.85, std::size_t max_iter = 200, double tol = 1e-8) {
    if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("pagerank damping must lie in (0, 1)");
    const auto n = g.num_nodes();
    if (n == 0) throw GraphError("pagerank of empty graph");
    const double inv_n = 1.0 / static_cast<double>(n);
    IterativeResult r;
    std::vector<double> x(n, inv_n), next(n);
    for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
        double dangling = 0.0;
        for (NodeId u = 0; u < n; ++u)
            if (g.degree(u) == 0) dangling += x[u];
        const double base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
        for (NodeId u = 0; u < n; ++u) {
            double acc = 0.0;
            for (NodeId v : g.neighbors(u)) acc += x[v] / static_cast<double>(g.degree(v));
            next[u] = base + damping * acc;
        }
        double diff = 0.0;
        for (NodeId u = 0; u < n; ++u) diff += std::abs(next[u] - x[u]);
        x.swap(next);
        if (diff < tol) {
            r.converged = true;
            break;
        }
    }
    r.iterations = std::min(r.iterations, max_iter);
    r.scores = std::move(x);
    return r;
}

/// Seeded uniform shuffle expressed as scores: the first node of the
/// permutation gets score n, the last gets 1.
inline ScoreVector random_scores(std::size_t n, std::uint64_t seed) {
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    Rng rng(seed);
    rng.shuffle(perm.begin(), perm.end());
    ScoreVector s(n);
    for (std::size_t pos = 0; pos < n; ++pos) s[perm[pos]] = static_cast<double>(n - pos);
    return s;
}

} // namespace dismantler
