#pragma once

// Attack evaluation for a fixed node ranking: percolation trajectory,
// minimal target-attack-set prefix, NGCC curves and threshold sweeps.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "centrality.hpp"
#include "graph.hpp"
#include "union_find.hpp"

namespace dismantler {

class DismantleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * gcc[t] = size of the largest component after removing ranking[0..t),
 * for t = 0..N. Built backwards: start from the empty graph and re-insert
 * nodes from the end of the ranking, merging with already present neighbors.
 */
inline std::vector<std::size_t> percolation_trajectory(const Graph &g, std::span<const NodeId> ranking) {
    const auto n = g.num_nodes();
    if (ranking.size() != n) throw DismantleError("ranking must list every node exactly once");
    std::vector<char> present(n, 0), seen(n, 0);
    for (NodeId v : ranking) {
        if (v >= n || seen[v]) throw DismantleError("ranking must list every node exactly once");
        seen[v] = 1;
    }
    std::vector<std::size_t> gcc(n + 1, 0);
    UnionFind uf(n);
    for (std::size_t t = n; t-- > 0;) {
        const NodeId v = ranking[t];
        present[v] = 1;
        for (NodeId w : g.neighbors(v))
            if (present[w]) uf.unite(v, w);
        gcc[t] = uf.max_component();
    }
    return gcc;
}

struct DismantleReport {
    std::vector<NodeId> ranking;
    std::size_t num_nodes = 0;
    std::size_t tas_size = 0;
    double rho = 0.0;
    double theta = 0.0;
    std::vector<double> ngcc_curve;  // t = 1..tas_size
    double auc = 0.0;
};

inline void check_theta(double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw DismantleError("theta must lie in (0, 1], got " + std::to_string(theta));
}

namespace detail {

// Smallest K with gcc[K] / N <= theta. gcc is non-increasing in K.
inline std::size_t minimal_prefix(const std::vector<std::size_t> &gcc, std::size_t n, double theta) {
    const double limit = theta * static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k)
        if (static_cast<double>(gcc[k]) <= limit) return k;
    throw DismantleError("threshold unreachable");
}

} // namespace detail

struct NgccCurve {
    std::vector<double> curve;
    double auc = 0.0;
};

/// curve[t-1] = |GCC after removing the first t ranked nodes| / N, t = 1..K;
/// auc is the plain sum of the curve.
inline NgccCurve ngcc_curve_and_auc(const Graph &g, std::span<const NodeId> ranking, std::size_t k) {
    if (k > g.num_nodes()) throw DismantleError("K exceeds node count");
    NgccCurve out;
    if (k == 0) return out;
    const auto gcc = percolation_trajectory(g, ranking);
    const auto n = static_cast<double>(g.num_nodes());
    out.curve.reserve(k);
    for (std::size_t t = 1; t <= k; ++t) {
        out.curve.push_back(static_cast<double>(gcc[t]) / n);
        out.auc += out.curve.back();
    }
    return out;
}

/**
 * Ranks by (score desc, id asc) and finds the shortest ranking prefix whose
 * removal leaves |GCC| / N <= theta, N being the original node count. If the
 * intact graph already satisfies the bound the attack set is empty (rho = 0).
 */
inline DismantleReport minimal_prefix_tas(const Graph &g, const ScoreVector &scores, double theta) {
    check_theta(theta);
    if (scores.size() != g.num_nodes()) throw DismantleError("score vector length does not match graph");
    if (g.num_nodes() == 0) throw DismantleError("cannot dismantle an empty graph");
    DismantleReport r;
    r.ranking = rank_nodes(scores);
    r.num_nodes = g.num_nodes();
    r.theta = theta;
    const auto gcc = percolation_trajectory(g, r.ranking);
    r.tas_size = detail::minimal_prefix(gcc, r.num_nodes, theta);
    r.rho = static_cast<double>(r.tas_size) / static_cast<double>(r.num_nodes);
    for (std::size_t t = 1; t <= r.tas_size; ++t) {
        r.ngcc_curve.push_back(static_cast<double>(gcc[t]) / static_cast<double>(r.num_nodes));
        r.auc += r.ngcc_curve.back();
    }
    return r;
}

/// rho for each theta (ascending) from a single trajectory.
inline std::vector<double> threshold_sweep(const Graph &g, const ScoreVector &scores, std::span<const double> thetas) {
    if (scores.size() != g.num_nodes()) throw DismantleError("score vector length does not match graph");
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        check_theta(thetas[i]);
        if (i > 0 && thetas[i] < thetas[i - 1]) throw DismantleError("thetas must be sorted ascending");
    }
    const auto ranking = rank_nodes(scores);
    const auto gcc = percolation_trajectory(g, ranking);
    std::vector<double> rho;
    rho.reserve(thetas.size());
    for (double th : thetas)
        rho.push_back(static_cast<double>(detail::minimal_prefix(gcc, g.num_nodes(), th)) /
                      static_cast<double>(g.num_nodes()));
    return rho;
}

} // namespace dismantler
