#pragma once

// Helpers shared by the unit tests and the acceptance runner: random graphs,
// brute-force oracles and a finite-difference gradient checker.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <dismantler/autograd.hpp>
#include <dismantler/graph.hpp>
#include <dismantler/rng.hpp>

namespace testing_support {

using namespace dismantler;

inline Graph make_graph(std::size_t n, std::initializer_list<Edge> edges) {
    std::vector<Edge> e(edges);
    return Graph::from_edges(n, e);
}

inline Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
inline Graph star4() { return make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}); }
inline Graph path(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Graph::from_edges(n, e);
}
inline Graph complete(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph::from_edges(n, e);
}

/// G(n, p) with an explicit generator, independent of the library's ER code.
inline Graph random_graph(std::size_t n, double p, Rng &rng) {
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (rng.uniform() < p) e.emplace_back(i, j);
    return Graph::from_edges(n, e);
}

/// Random spanning tree plus G(n, p) extras: always connected.
inline Graph random_connected_graph(std::size_t n, double p, Rng &rng) {
    std::vector<Edge> e;
    for (NodeId i = 1; i < n; ++i) e.emplace_back(static_cast<NodeId>(rng.below(i)), i);
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (rng.uniform() < p) e.emplace_back(i, j);
    return Graph::from_edges(n, e);
}

inline std::vector<NodeId> random_permutation(std::size_t n, Rng &rng) {
    std::vector<NodeId> perm(n);
    for (NodeId i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm.begin(), perm.end());
    return perm;
}

/// Same graph with node u renamed perm[u].
inline Graph relabel(const Graph &g, const std::vector<NodeId> &perm) {
    std::vector<Edge> e;
    for (auto [u, v] : g.edges()) e.emplace_back(perm[u], perm[v]);
    return Graph::from_edges(g.num_nodes(), e);
}

// ---- distance-based oracles -----------------------------------------------

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

/// Floyd-Warshall over the adjacency matrix.
inline std::vector<std::vector<std::int64_t>> all_pairs_distances(const Graph &g) {
    const auto n = g.num_nodes();
    std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, kInf));
    for (NodeId u = 0; u < n; ++u) {
        d[u][u] = 0;
        for (NodeId v : g.neighbors(u)) d[u][v] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    return d;
}

/// Number of shortest paths for every pair, by dynamic programming over
/// distance layers of the Floyd matrix.
inline std::vector<std::vector<double>> shortest_path_counts(const Graph &g,
                                                             const std::vector<std::vector<std::int64_t>> &d) {
    const auto n = g.num_nodes();
    std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::size_t> order;
        for (std::size_t t = 0; t < n; ++t)
            if (d[s][t] < kInf) order.push_back(t);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return d[s][a] < d[s][b]; });
        sigma[s][s] = 1.0;
        for (auto t : order) {
            if (t == s) continue;
            for (NodeId p : g.neighbors(static_cast<NodeId>(t)))
                if (d[s][p] + 1 == d[s][t]) sigma[s][t] += sigma[s][p];
        }
    }
    return sigma;
}

/// bc(v) = sum over unordered pairs {s, t} not containing v of
/// sigma_sv * sigma_vt / sigma_st, restricted to v on a shortest s-t path.
inline std::vector<double> betweenness_oracle(const Graph &g) {
    const auto n = g.num_nodes();
    const auto d = all_pairs_distances(g);
    const auto sigma = shortest_path_counts(g, d);
    std::vector<double> bc(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t t = s + 1; t < n; ++t) {
                if (s == v || t == v || d[s][t] >= kInf) continue;
                if (d[s][v] + d[v][t] != d[s][t]) continue;
                bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
            }
    return bc;
}

inline std::vector<double> closeness_oracle(const Graph &g) {
    const auto d = all_pairs_distances(g);
    std::vector<double> out(g.num_nodes(), 0.0);
    for (std::size_t u = 0; u < d.size(); ++u) {
        double total = 0.0, reached = 0.0;
        for (std::size_t v = 0; v < d.size(); ++v)
            if (v != u && d[u][v] < kInf) {
                total += static_cast<double>(d[u][v]);
                reached += 1.0;
            }
        out[u] = total > 0.0 ? reached / total : 0.0;
    }
    return out;
}

inline std::vector<double> harmonic_oracle(const Graph &g) {
    const auto d = all_pairs_distances(g);
    std::vector<double> out(g.num_nodes(), 0.0);
    for (std::size_t u = 0; u < d.size(); ++u)
        for (std::size_t v = 0; v < d.size(); ++v)
            if (v != u && d[u][v] < kInf) out[u] += 1.0 / static_cast<double>(d[u][v]);
    return out;
}

// ---- spectral oracles -------------------------------------------------------

inline Eigen::MatrixXd adjacency_matrix(const Graph &g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (auto [u, v] : g.edges()) a(u, v) = a(v, u) = 1.0;
    return a;
}

/// (1 - d)/N * (I - d P)^{-1} 1, P column-stochastic with isolated columns uniform.
inline std::vector<double> pagerank_oracle(const Graph &g, double damping) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index v = 0; v < n; ++v) {
        const auto deg = g.degree(static_cast<NodeId>(v));
        if (deg == 0) {
            p.col(v).setConstant(1.0 / static_cast<double>(n));
        } else {
            for (NodeId u : g.neighbors(static_cast<NodeId>(v))) p(u, v) = 1.0 / static_cast<double>(deg);
        }
    }
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - damping * p;
    Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, (1.0 - damping) / static_cast<double>(n));
    Eigen::VectorXd x = lhs.fullPivLu().solve(rhs);
    return {x.data(), x.data() + n};
}

struct EigenOracle {
    std::vector<double> vector;  // non-negative, unit L2 norm
    double gap = 0.0;            // lambda_1 - lambda_2
};

inline EigenOracle eigenvector_oracle(const Graph &g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adjacency_matrix(g));
    const auto n = es.eigenvalues().size();
    Eigen::VectorXd v = es.eigenvectors().col(n - 1);
    if (v.sum() < 0) v = -v;
    v /= v.norm();
    EigenOracle o;
    o.vector.assign(v.data(), v.data() + n);
    for (auto &x : o.vector) x = std::abs(x);
    o.gap = n > 1 ? es.eigenvalues()(n - 1) - es.eigenvalues()(n - 2) : 1.0;
    return o;
}

// ---- percolation oracle -----------------------------------------------------

/// gcc[t] after deleting ranking[0..t), recomputed from scratch by BFS.
inline std::vector<std::size_t> naive_percolation(const Graph &g, const std::vector<NodeId> &ranking) {
    const auto n = g.num_nodes();
    std::vector<std::size_t> out;
    std::vector<char> removed(n, 0);
    for (std::size_t t = 0; t <= n; ++t) {
        if (t > 0) removed[ranking[t - 1]] = 1;
        std::vector<char> seen(n, 0);
        std::size_t best = 0;
        for (NodeId s = 0; s < n; ++s) {
            if (removed[s] || seen[s]) continue;
            std::size_t size = 0;
            std::vector<NodeId> queue{s};
            seen[s] = 1;
            while (!queue.empty()) {
                NodeId u = queue.back();
                queue.pop_back();
                ++size;
                for (NodeId v : g.neighbors(u))
                    if (!removed[v] && !seen[v]) {
                        seen[v] = 1;
                        queue.push_back(v);
                    }
            }
            best = std::max(best, size);
        }
        out.push_back(best);
    }
    return out;
}

// ---- gradient checking ------------------------------------------------------

/// |a - n| / max(floor, |a|, |n|): relative for ordinary gradients,
/// absolute (against floor) for near-zero ones.
/// Splits one CSV line, honouring double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.emplace_back();
        } else {
            cells.back() += c;
        }
    }
    return cells;
}

inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({floor, std::abs(analytic), std::abs(numeric)});
}

/**
 * Central differences for every entry of every input. `f` builds a scalar
 * loss on the given tape from leaves holding `inputs`. Returns the largest
 * relative error.
 */
inline double gradcheck(const std::function<ad::Var(ad::Tape &, std::vector<ad::Var> &)> &f,
                        std::vector<Matrix> inputs, double h = 1e-5, double floor = 1e-6) {
    std::vector<Matrix> analytic;
    {
        ad::Tape tape;
        std::vector<ad::Var> leaves;
        for (auto &m : inputs) leaves.push_back(tape.leaf(m));
        auto loss = f(tape, leaves);
        tape.backward(loss);
        for (auto &l : leaves) {
            Matrix g = l.grad();
            if (g.empty()) g = Matrix(l.rows(), l.cols());
            analytic.push_back(std::move(g));
        }
    }
    auto eval = [&](const std::vector<Matrix> &xs) {
        ad::Tape tape;
        std::vector<ad::Var> leaves;
        for (const auto &m : xs) leaves.push_back(tape.leaf(m));
        return f(tape, leaves).item();
    };
    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (std::size_t i = 0; i < inputs[k].size(); ++i) {
            const double keep = inputs[k].data()[i];
            inputs[k].data()[i] = keep + h;
            const double up = eval(inputs);
            inputs[k].data()[i] = keep - h;
            const double down = eval(inputs);
            inputs[k].data()[i] = keep;
            const double numeric = (up - down) / (2.0 * h);
            worst = std::max(worst, relative_error(analytic[k].data()[i], numeric, floor));
        }
    }
    return worst;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng &rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (auto &x : m.data()) x = rng.uniform(lo, hi);
    return m;
}

} // namespace testing_support
