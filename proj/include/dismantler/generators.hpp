#pragma once

// Synthetic network models: Erdos-Renyi G(n,p), Barabasi-Albert, Watts-Strogatz
// and Holme-Kim powerlaw-cluster. All are deterministic for a fixed seed.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace dismantler {

class GeneratorError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline Graph generate_er(std::size_t n, double avg_degree, std::uint64_t seed) {
    if (n < 2) throw GeneratorError("er: n must be >= 2");
    // avg_degree == n-1 is accepted and yields the complete graph
    if (!(avg_degree > 0.0) || avg_degree > static_cast<double>(n - 1))
        throw GeneratorError("er: average degree must lie in (0, n-1]");
    const double p = avg_degree / static_cast<double>(n - 1);
    Rng rng(seed);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.uniform() < p) edges.emplace_back(u, v);
    return Graph::from_edges(n, edges);
}

namespace detail {

// Growth state shared by the preferential-attachment models. `targets_pool`
// lists every edge endpoint, so a uniform draw from it is degree-proportional.
struct GrowthState {
    std::vector<std::vector<NodeId>> adj;
    std::vector<NodeId> pool;
    std::vector<Edge> edges;

    explicit GrowthState(std::size_t n) : adj(n) {}

    void add(NodeId u, NodeId v) {
        adj[u].push_back(v);
        adj[v].push_back(u);
        pool.push_back(u);
        pool.push_back(v);
        edges.emplace_back(u, v);
    }

    // Star on nodes 0..m with center 0: m initial edges.
    void seed_star(std::size_t m) {
        for (NodeId v = 1; v <= m; ++v) add(0, v);
    }

    NodeId preferential(Rng &rng) { return pool[rng.below(pool.size())]; }
};

inline bool contains(const std::vector<NodeId> &xs, NodeId x) {
    for (NodeId y : xs)
        if (y == x) return true;
    return false;
}

inline void check_attachment(const char *model, std::size_t n, std::size_t m) {
    if (m < 1 || m >= n) throw GeneratorError(std::string(model) + ": require 1 <= m < n");
}

inline void check_probability(const char *model, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw GeneratorError(std::string(model) + ": p must lie in [0, 1]");
}

} // namespace detail

/// Barabasi-Albert: star on m+1 nodes, then each arrival attaches m edges to
/// distinct existing nodes chosen proportional to degree. |E| = m (n - m).
inline Graph generate_ba(std::size_t n, std::size_t m, std::uint64_t seed) {
    detail::check_attachment("ba", n, m);
    Rng rng(seed);
    detail::GrowthState st(n);
    st.seed_star(m);
    std::vector<NodeId> chosen;
    for (NodeId v = static_cast<NodeId>(m + 1); v < n; ++v) {
        chosen.clear();
        while (chosen.size() < m) {
            NodeId t = st.preferential(rng);
            if (!detail::contains(chosen, t)) chosen.push_back(t);
        }
        for (NodeId t : chosen) st.add(v, t);
    }
    return Graph::from_edges(n, st.edges);
}

/// Holme-Kim powerlaw-cluster graph: BA growth where, after each preferential
/// pick, the next edge closes a triangle with probability p. p = 0 reproduces
/// generate_ba exactly for the same seed.
inline Graph generate_plc(std::size_t n, std::size_t m, double p, std::uint64_t seed) {
    detail::check_attachment("plc", n, m);
    detail::check_probability("plc", p);
    Rng rng(seed);
    detail::GrowthState st(n);
    st.seed_star(m);
    std::vector<NodeId> chosen;
    std::vector<NodeId> candidates;
    for (NodeId v = static_cast<NodeId>(m + 1); v < n; ++v) {
        chosen.clear();
        NodeId last = 0;
        auto pick_preferential = [&] {
            while (true) {
                NodeId t = st.preferential(rng);
                if (!detail::contains(chosen, t)) {
                    chosen.push_back(t);
                    last = t;
                    return;
                }
            }
        };
        pick_preferential();
        while (chosen.size() < m) {
            if (p > 0.0 && rng.uniform() < p) {
                candidates.clear();
                for (NodeId w : st.adj[last])
                    if (w != v && !detail::contains(chosen, w)) candidates.push_back(w);
                if (!candidates.empty()) {
                    chosen.push_back(candidates[rng.below(candidates.size())]);
                    continue;
                }
            }
            pick_preferential();
        }
        for (NodeId t : chosen) st.add(v, t);
    }
    return Graph::from_edges(n, st.edges);
}

/// Watts-Strogatz: ring lattice where each node links to m/2 neighbors per
/// side (total degree m), then each lattice edge (u, u+j) has its far end
/// rewired with probability p to a uniform node, avoiding self-loops and
/// duplicates. The edge count n*m/2 is preserved.
inline Graph generate_ws(std::size_t n, std::size_t m, double p, std::uint64_t seed) {
    if (m % 2 != 0) throw GeneratorError("ws: m (total lattice degree) must be even");
    if (m >= n) throw GeneratorError("ws: require m < n");
    detail::check_probability("ws", p);
    Rng rng(seed);
    std::vector<std::unordered_set<NodeId>> adj(n);
    auto link = [&](NodeId a, NodeId b) {
        adj[a].insert(b);
        adj[b].insert(a);
    };
    for (NodeId u = 0; u < n; ++u)
        for (std::size_t j = 1; j <= m / 2; ++j) link(u, static_cast<NodeId>((u + j) % n));
    if (p > 0.0) {
        for (std::size_t j = 1; j <= m / 2; ++j) {
            for (NodeId u = 0; u < n; ++u) {
                const auto v = static_cast<NodeId>((u + j) % n);
                if (!rng.bernoulli(p)) continue;
                if (adj[u].size() >= n - 1) continue;
                NodeId w;
                do {
                    w = static_cast<NodeId>(rng.below(n));
                } while (w == u || adj[u].count(w));
                adj[u].erase(v);
                adj[v].erase(u);
                link(u, w);
            }
        }
    }
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : adj[u])
            if (u < v) edges.emplace_back(u, v);
    return Graph::from_edges(n, edges);
}

} // namespace dismantler
