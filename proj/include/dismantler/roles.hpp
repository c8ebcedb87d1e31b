#pragma once

// Structural role discovery: egonet features, recursive neighbor aggregation,
// non-negative factorization with MDL rank choice, and the top-k role graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace dismantler {

class RoleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FeatureMatrix {
    Matrix values;  // N x f, non-negative
    std::vector<std::string> names;

    std::size_t num_features() const { return values.cols(); }
};

/**
 * Four egonet features per node, where the egonet is the node plus its
 * neighbors:
 *   degree, local clustering coefficient (0 below degree 2),
 *   sum of degrees over the egonet (including the node itself),
 *   edges inside the egonet / (1 + edges leaving it).
 */
inline FeatureMatrix egonet_features(const Graph &g) {
    const auto n = g.num_nodes();
    FeatureMatrix fm{Matrix(n, 4), {"degree", "clustering", "egonet_degree_sum", "egonet_edge_ratio"}};
    std::vector<char> mark(n, 0);
    for (NodeId u = 0; u < n; ++u) {
        auto nb = g.neighbors(u);
        const double k = static_cast<double>(nb.size());
        for (NodeId v : nb) mark[v] = 1;
        std::size_t links = 0;  // edges among neighbors, each counted twice
        std::size_t deg_sum = g.degree(u);
        for (NodeId v : nb) {
            deg_sum += g.degree(v);
            for (NodeId w : g.neighbors(v))
                if (mark[w]) ++links;
        }
        for (NodeId v : nb) mark[v] = 0;
        const double triangles = static_cast<double>(links / 2);
        const double within = k + triangles;
        const double leaving = static_cast<double>(deg_sum) - 2.0 * within;
        fm.values(u, 0) = k;
        fm.values(u, 1) = nb.size() < 2 ? 0.0 : 2.0 * triangles / (k * (k - 1.0));
        fm.values(u, 2) = static_cast<double>(deg_sum);
        fm.values(u, 3) = within / (1.0 + leaving);
    }
    return fm;
}

namespace detail {

inline double pearson(const std::vector<double> &a, const std::vector<double> &b) {
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    // Zero-variance columns: two constants are perfectly correlated, a
    // constant against a varying column is uncorrelated.
    const double eps = 1e-12 * n;
    const bool ca = saa <= eps, cb = sbb <= eps;
    if (ca && cb) return 1.0;
    if (ca || cb) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace detail

/// Drops every column whose Pearson correlation with an earlier retained
/// column exceeds `threshold`.
inline FeatureMatrix prune_correlated(const FeatureMatrix &fm, double threshold = 0.99) {
    std::vector<std::vector<double>> kept_cols;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < fm.num_features(); ++c) {
        auto col = fm.values.column(c);
        bool redundant = false;
        for (const auto &k : kept_cols)
            if (detail::pearson(col, k) > threshold) {
                redundant = true;
                break;
            }
        if (!redundant) {
            kept.push_back(c);
            kept_cols.push_back(std::move(col));
        }
    }
    FeatureMatrix out{Matrix(fm.values.rows(), kept.size()), {}};
    for (std::size_t j = 0; j < kept.size(); ++j) {
        out.names.push_back(fm.names[kept[j]]);
        for (std::size_t r = 0; r < fm.values.rows(); ++r) out.values(r, j) = kept_cols[j][r];
    }
    return out;
}

/**
 * ReFeX-style recursion. Level l appends the neighbor mean of the level l-1
 * mean columns and the neighbor sum of the level l-1 sum columns (level 0 is
 * the input), so the unpruned width is f * (1 + 2 * levels). Correlated
 * columns are pruned afterwards; levels = 0 returns the input untouched.
 */
inline FeatureMatrix recursive_aggregate(const FeatureMatrix &feat, const Graph &g, std::size_t levels,
                                         double prune_threshold = 0.99) {
    if (levels == 0) return feat;
    const auto n = g.num_nodes();
    const auto f = feat.num_features();
    if (feat.values.rows() != n) throw ShapeError("feature rows do not match graph size");

    const std::size_t width = f * (1 + 2 * levels);
    FeatureMatrix all{Matrix(n, width), {}};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < f; ++c) all.values(r, c) = feat.values(r, c);
    all.names = feat.names;

    std::vector<std::size_t> mean_src(f), sum_src(f);
    std::iota(mean_src.begin(), mean_src.end(), 0);
    std::iota(sum_src.begin(), sum_src.end(), 0);
    std::size_t next = f;
    for (std::size_t level = 1; level <= levels; ++level) {
        std::vector<std::size_t> new_mean(f), new_sum(f);
        for (std::size_t c = 0; c < f; ++c) {
            new_mean[c] = next++;
            all.names.push_back("mean(" + all.names[mean_src[c]] + ")");
        }
        for (std::size_t c = 0; c < f; ++c) {
            new_sum[c] = next++;
            all.names.push_back("sum(" + all.names[sum_src[c]] + ")");
        }
        for (NodeId u = 0; u < n; ++u) {
            const auto nb = g.neighbors(u);
            for (std::size_t c = 0; c < f; ++c) {
                double ms = 0.0, ss = 0.0;
                for (NodeId v : nb) {
                    ms += all.values(v, mean_src[c]);
                    ss += all.values(v, sum_src[c]);
                }
                all.values(u, new_mean[c]) = nb.empty() ? 0.0 : ms / static_cast<double>(nb.size());
                all.values(u, new_sum[c]) = ss;
            }
        }
        mean_src = new_mean;
        sum_src = new_sum;
    }
    return prune_correlated(all, prune_threshold);
}

/// Min-max scales every column to [0, 1]; constant columns become 0.
inline Matrix normalize_columns(const Matrix &m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            lo = std::min(lo, m(r, c));
            hi = std::max(hi, m(r, c));
        }
        const double span = hi - lo;
        for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = span > 0.0 ? (m(r, c) - lo) / span : 0.0;
    }
    return out;
}

struct NmfResult {
    Matrix R;  // N x r
    Matrix M;  // r x f
    std::vector<double> objective_history;  // [0] at initialization
    std::size_t iterations = 0;

    double objective() const { return objective_history.back(); }
};

/**
 * Lee-Seung multiplicative updates for min ||F - RM||_F^2 with R, M >= 0.
 * Factors start uniform in (0, 1]. Stops after `iters` sweeps or when the
 * relative decrease of the objective falls below `tol`.
 */
inline NmfResult nmf(const Matrix &F, std::size_t r, std::size_t iters = 500, double tol = 1e-6,
                     std::uint64_t seed = 0) {
    const auto n = F.rows(), f = F.cols();
    if (r < 1 || r > std::min(n, f))
        throw RoleError("nmf rank " + std::to_string(r) + " outside [1, " + std::to_string(std::min(n, f)) + "]");
    for (double v : F.data()) {
        if (!std::isfinite(v)) throw RoleError("nmf input has non-finite entries");
        if (v < 0.0) throw RoleError("nmf input has negative entries");
    }

    Rng rng(seed);
    NmfResult res{Matrix(n, r), Matrix(r, f), {}, 0};
    for (auto &x : res.R.data()) x = rng.uniform_open_closed();
    for (auto &x : res.M.data()) x = rng.uniform_open_closed();

    auto objective = [&] { return frobenius_sq_diff(F, matmul(res.R, res.M)); };
    // x <- x * num / den; a zero denominator implies a zero numerator here.
    auto update = [](Matrix &x, const Matrix &num, const Matrix &den) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = den.data()[i];
            if (d > 0.0) x.data()[i] *= num.data()[i] / d;
        }
    };

    double prev = objective();
    res.objective_history.push_back(prev);
    for (std::size_t it = 0; it < iters; ++it) {
        {
            Matrix num = matmul_tn(res.R, F);                         // r x f
            Matrix den = matmul(matmul_tn(res.R, res.R), res.M);     // r x f
            update(res.M, num, den);
        }
        {
            Matrix num = matmul_nt(F, res.M);                         // n x r
            Matrix den = matmul(res.R, matmul_nt(res.M, res.M));     // n x r
            update(res.R, num, den);
        }
        const double cur = objective();
        res.objective_history.push_back(cur);
        res.iterations = it + 1;
        if (prev <= 0.0 || (prev - cur) / prev < tol) break;
        prev = cur;
    }
    return res;
}

/// Description length in bits of a rank-r factorization of an N x f matrix.
inline double mdl_cost(std::size_t r, std::size_t n, std::size_t f, double squared_error, double bits = 4.0) {
    const double cells = static_cast<double>(n) * static_cast<double>(f);
    return bits * static_cast<double>(r) * static_cast<double>(n + f) + cells * std::log2(1.0 + squared_error / cells);
}

struct NmfOptions {
    std::size_t iters = 500;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

struct MdlSelection {
    std::size_t rank = 0;
    std::vector<std::size_t> candidates;
    std::vector<double> costs;
    NmfResult best;
};

/// Factorizes at every rank in [r_min, r_max] and keeps the cheapest
/// description; ties go to the smaller rank.
inline MdlSelection select_rank_mdl(const Matrix &F, std::size_t r_min, std::size_t r_max, double bits = 4.0,
                                    const NmfOptions &opts = {}) {
    if (r_min < 1 || r_min > r_max || r_max > std::min(F.rows(), F.cols()))
        throw RoleError("mdl rank range invalid: [" + std::to_string(r_min) + ", " + std::to_string(r_max) + "]");
    MdlSelection sel;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t r = r_min; r <= r_max; ++r) {
        NmfResult fit = nmf(F, r, opts.iters, opts.tol, opts.seed);
        const double cost = mdl_cost(r, F.rows(), F.cols(), fit.objective(), bits);
        sel.candidates.push_back(r);
        sel.costs.push_back(cost);
        if (cost < best_cost) {
            best_cost = cost;
            sel.rank = r;
            sel.best = std::move(fit);
        }
    }
    return sel;
}

struct RoleModel {
    Matrix R;  // N x r role memberships
    Matrix M;  // r x f role contributions
    std::size_t r = 0;
    double mdl_cost = 0.0;
    std::vector<std::string> feature_names;
};

struct RoleOptions {
    std::size_t levels = 1;
    double prune_threshold = 0.99;
    std::size_t r_min = 2;
    std::size_t r_max = 8;
    double bits = 4.0;
    NmfOptions nmf;
};

/// Features -> aggregation -> column normalization -> MDL-selected NMF. The
/// rank window is clipped to what the pruned feature matrix can support.
inline RoleModel discover_roles(const Graph &g, const RoleOptions &opts = {}) {
    if (g.num_nodes() == 0) throw RoleError("role discovery on empty graph");
    FeatureMatrix feat = recursive_aggregate(egonet_features(g), g, opts.levels, opts.prune_threshold);
    Matrix F = normalize_columns(feat.values);
    const std::size_t cap = std::min(F.rows(), F.cols());
    const std::size_t hi = std::min(opts.r_max, cap);
    const std::size_t lo = std::min(std::max<std::size_t>(opts.r_min, 1), hi);
    MdlSelection sel = select_rank_mdl(F, lo, hi, opts.bits, opts.nmf);
    RoleModel model;
    model.R = std::move(sel.best.R);
    model.M = std::move(sel.best.M);
    model.r = sel.rank;
    model.mdl_cost = sel.costs[sel.rank - lo];
    model.feature_names = std::move(feat.names);
    return model;
}

/// Cosine similarity of two role rows; 0 when either row is all zero.
inline double role_similarity(const Matrix &R, std::size_t i, std::size_t j) {
    double dot = 0.0, ni = 0.0, nj = 0.0;
    auto a = R.row(i), b = R.row(j);
    for (std::size_t c = 0; c < R.cols(); ++c) {
        dot += a[c] * b[c];
        ni += a[c] * a[c];
        nj += b[c] * b[c];
    }
    if (ni == 0.0 || nj == 0.0) return 0.0;
    return dot / (std::sqrt(ni) * std::sqrt(nj));
}

struct RoleGraph {
    Graph graph;
    std::size_t k = 0;
};

/**
 * Every node proposes edges to its min(k, N-1) most role-similar other nodes
 * (ties by ascending id); the union of proposals, symmetrized, is the role
 * graph. Exact all-pairs computation.
 */
inline RoleGraph build_role_graph(const Matrix &R, std::size_t k) {
    if (k < 1) throw RoleError("role graph k must be >= 1");
    const auto n = R.rows();
    const std::size_t take = n > 0 ? std::min(k, n - 1) : 0;
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : R.row(i)) s += v * v;
        norms[i] = std::sqrt(s);
    }
    std::vector<Edge> edges;
    edges.reserve(n * take);
    std::vector<std::pair<double, NodeId>> cand;
    cand.reserve(n);
    auto better = [](const std::pair<double, NodeId> &a, const std::pair<double, NodeId> &b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    };
    for (NodeId i = 0; i < n; ++i) {
        cand.clear();
        auto ri = R.row(i);
        for (NodeId j = 0; j < n; ++j) {
            if (j == i) continue;
            double sim = 0.0;
            if (norms[i] > 0.0 && norms[j] > 0.0) {
                auto rj = R.row(j);
                double dot = 0.0;
                for (std::size_t c = 0; c < R.cols(); ++c) dot += ri[c] * rj[c];
                sim = dot / (norms[i] * norms[j]);
            }
            cand.emplace_back(sim, j);
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(), better);
        for (std::size_t t = 0; t < take; ++t) edges.emplace_back(i, cand[t].second);
    }
    return {Graph::from_edges(n, edges), k};
}

} // namespace dismantler
