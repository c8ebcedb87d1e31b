#pragma once

// DCRS node scoring: a graph diffusion network on the input graph encodes
// diffusion competence, a GCN on the role graph encodes role significance,
// two affine+ReLU heads score each node and a sigmoid gate fuses them. The
// model is trained unsupervised on the graph it scores.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "autograd.hpp"
#include "graph.hpp"
#include "roles.hpp"

namespace dismantler {

enum class Ablation { full, no_rs, no_dc };

inline std::string to_string(Ablation a) {
    switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_rs: return "no_rs";
    case Ablation::no_dc: return "no_dc";
    }
    return "full";
}

inline Ablation parse_ablation(const std::string &s) {
    if (s == "full") return Ablation::full;
    if (s == "no_rs") return Ablation::no_rs;
    if (s == "no_dc") return Ablation::no_dc;
    throw std::invalid_argument("unknown ablation: " + s);
}

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class TrainingError : public std::runtime_error {
public:
    TrainingError(std::size_t epoch, const std::string &what)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

struct DcrsConfig {
    std::size_t hidden_dim = 32;
    std::size_t gdn_layers = 2;
    std::size_t gcn_layers = 2;
    double lambda = 0.5;
    double gamma = 0.1;
    double leaky_slope = 0.2;
    std::size_t role_k = 10;
    std::size_t epochs = 500;
    double lr = 0.01;
    double head_bias_init = 0.01;
    std::uint64_t seed = 0;
    Ablation ablation = Ablation::full;

    /// Sets the ablation and the gate weight it implies.
    DcrsConfig &with_ablation(Ablation a) {
        ablation = a;
        if (a == Ablation::no_rs) lambda = 1.0;
        if (a == Ablation::no_dc) lambda = 0.0;
        return *this;
    }

    void validate() const {
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
        if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
        if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
        if (gdn_layers < 1) throw ConfigError("gdn_layers must be >= 1");
        if (gcn_layers < 1) throw ConfigError("gcn_layers must be >= 1");
        if (role_k < 1) throw ConfigError("role_k must be >= 1");
        if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
        if (ablation == Ablation::no_rs && lambda != 1.0) throw ConfigError("ablation no_rs requires lambda = 1");
        if (ablation == Ablation::no_dc && lambda != 0.0) throw ConfigError("ablation no_dc requires lambda = 0");
    }
};

struct DcrsOutput {
    std::vector<double> s_dc;
    std::vector<double> s_rs;
    std::vector<double> s_dis;
    Matrix H;
    Matrix Z;
    /// [0] is the loss at initialization, back() the loss of the returned scores.
    std::vector<double> loss_history;
};

/// Directed-arc view of a graph: arc e runs src[e] -> dst[e]; arcs are
/// grouped by source, matching Graph::adjacency().
struct ArcIndex {
    std::size_t num_nodes = 0;
    ad::Index src;
    ad::Index dst;

    static ArcIndex of(const Graph &g) {
        auto s = g.arc_sources();
        std::vector<std::uint32_t> d(g.adjacency().begin(), g.adjacency().end());
        return {g.num_nodes(), ad::make_index(std::move(s)), ad::make_index(std::move(d))};
    }
};

/// Sparse D^-1/2 (A + I) D^-1/2 with D = deg + 1, as (row, col, weight) entries.
struct NormalizedAdjacency {
    std::size_t num_nodes = 0;
    ad::Index row;
    ad::Index col;
    Matrix weight;  // entries x 1

    static NormalizedAdjacency of(const Graph &g) {
        const auto n = g.num_nodes();
        std::vector<std::uint32_t> r, c;
        std::vector<double> w;
        r.reserve(n + g.num_arcs());
        c.reserve(n + g.num_arcs());
        w.reserve(n + g.num_arcs());
        for (NodeId i = 0; i < n; ++i) {
            const double di = static_cast<double>(g.degree(i)) + 1.0;
            r.push_back(i);
            c.push_back(i);
            w.push_back(1.0 / di);
            for (NodeId j : g.neighbors(i)) {
                r.push_back(i);
                c.push_back(j);
                w.push_back(1.0 / std::sqrt(di * (static_cast<double>(g.degree(j)) + 1.0)));
            }
        }
        const auto m = w.size();
        return {n, ad::make_index(std::move(r)), ad::make_index(std::move(c)), Matrix(m, 1, std::move(w))};
    }
};

/// Registers every DCRS parameter in a fixed order.
inline void register_dcrs_params(ad::ParamStore &store, const DcrsConfig &cfg) {
    const auto d = cfg.hidden_dim;
    for (std::size_t l = 0; l < cfg.gdn_layers; ++l) {
        const std::string p = "gdn." + std::to_string(l) + ".";
        store.add(p + "w1", d, d);
        store.add(p + "w2", d, d);
        store.add(p + "beta", d, 1);
        store.add(p + "w3", d, d);
        store.add(p + "b3", 1, d, ad::Init::Zeros);
    }
    for (std::size_t l = 0; l < cfg.gcn_layers; ++l) store.add("gcn." + std::to_string(l) + ".w", d, d);
    // Score heads start at a small positive constant output so both ReLUs
    // receive gradient from the first epoch.
    store.add("score.w4", d, 1, ad::Init::Zeros);
    store.add("score.b4", 1, 1, ad::Init::Constant, cfg.head_bias_init);
    store.add("score.w5", d, 1, ad::Init::Zeros);
    store.add("score.b5", 1, 1, ad::Init::Constant, cfg.head_bias_init);
}

/**
 * Graph diffusion layers. Per layer, for every arc i -> j:
 *   alpha_ij = beta^T LeakyReLU(W1 h_i + W2 h_j)
 *   w_ij     = softmax of alpha over the out-arcs of i
 * and every node aggregates along its in-arcs with the weights its
 * neighbors assigned:
 *   m_i = sum_{j in N(i)} w_ji h_j,   h_i = ReLU(W3 m_i + b3).
 * H starts as all ones; isolated nodes get m_i = 0.
 */
inline ad::Var gdn_forward(ad::Tape &tape, const ArcIndex &arcs, ad::ParamStore &store, std::size_t layers,
                           std::size_t hidden, double leaky_slope = 0.2) {
    ad::Var h = tape.constant(Matrix::ones(arcs.num_nodes, hidden));
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string p = "gdn." + std::to_string(l) + ".";
        auto w1 = tape.param(store.get(p + "w1"));
        auto w2 = tape.param(store.get(p + "w2"));
        auto beta = tape.param(store.get(p + "beta"));
        auto w3 = tape.param(store.get(p + "w3"));
        auto b3 = tape.param(store.get(p + "b3"));

        auto from = ad::row_gather(ad::matmul(h, w1), arcs.src);
        auto to = ad::row_gather(ad::matmul(h, w2), arcs.dst);
        auto alpha = ad::matmul(ad::leaky_relu(ad::add(from, to), leaky_slope), beta);
        auto weight = ad::segment_softmax(alpha, arcs.src, arcs.num_nodes);
        // arc i -> j carries w_ij * h_i into j
        auto msg = ad::mul_col(ad::row_gather(h, arcs.src), weight);
        auto m = ad::segment_sum(msg, arcs.dst, arcs.num_nodes);
        h = ad::relu(ad::add_bias(ad::matmul(m, w3), b3));
    }
    return h;
}

/// GCN layers Z <- ReLU(D^-1/2 (A_r + I) D^-1/2 Z W) from an all-ones start.
inline ad::Var gcn_forward(ad::Tape &tape, const NormalizedAdjacency &adj, ad::ParamStore &store, std::size_t layers,
                           std::size_t hidden) {
    ad::Var z = tape.constant(Matrix::ones(adj.num_nodes, hidden));
    ad::Var weight = tape.constant(adj.weight);
    for (std::size_t l = 0; l < layers; ++l) {
        auto w = tape.param(store.get("gcn." + std::to_string(l) + ".w"));
        auto zw = ad::matmul(z, w);
        auto spread = ad::mul_col(ad::row_gather(zw, adj.col), weight);
        z = ad::relu(ad::segment_sum(spread, adj.row, adj.num_nodes));
    }
    return z;
}

struct ScoreVars {
    ad::Var s_dc;
    ad::Var s_rs;
    ad::Var s_dis;
};

/// s_dc = ReLU(H w4 + b4), s_rs = ReLU(Z w5 + b5),
/// s_dis = sigmoid(lambda s_dc + (1 - lambda) s_rs).
inline ScoreVars score_and_fuse(ad::Tape &tape, const ad::Var &H, const ad::Var &Z, ad::ParamStore &store,
                                double lambda) {
    auto s_dc = ad::relu(ad::add_bias(ad::matmul(H, tape.param(store.get("score.w4"))),
                                      tape.param(store.get("score.b4"))));
    auto s_rs = ad::relu(ad::add_bias(ad::matmul(Z, tape.param(store.get("score.w5"))),
                                      tape.param(store.get("score.b5"))));
    auto fused = ad::add(ad::scale(s_dc, lambda), ad::scale(s_rs, 1.0 - lambda));
    return {s_dc, s_rs, ad::sigmoid(fused)};
}

/**
 * Expected uninfluenced nodes plus attack-set size:
 *   L = sum_i prod_{j in N(i)} 1 / (1 + s_j) + gamma * sum_i s_i.
 * The product is evaluated as exp(sum log(1 / (1 + s_j))); an isolated node
 * contributes exp(0) = 1.
 */
inline ad::Var dcrs_loss(const ArcIndex &arcs, const ad::Var &s_dis, double gamma) {
    auto log_keep = ad::log(ad::reciprocal_1p(s_dis));
    auto per_node = ad::exp(ad::segment_sum(ad::row_gather(log_keep, arcs.dst), arcs.src, arcs.num_nodes));
    return ad::add(ad::reduce_sum(per_node), ad::scale(ad::reduce_sum(s_dis), gamma));
}

/// Plain evaluation of the same loss, for checking and reporting.
inline double dcrs_loss_value(const Graph &g, std::span<const double> s, double gamma) {
    if (s.size() != g.num_nodes()) throw ShapeError("score length does not match graph");
    double total = 0.0;
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
        double prod = 1.0;
        for (NodeId j : g.neighbors(i)) prod *= 1.0 / (1.0 + s[j]);
        total += prod + gamma * s[i];
    }
    return total;
}

/// A DCRS instance bound to one graph and its role graph.
class DcrsModel {
public:
    DcrsModel(const Graph &g, const Graph &role_graph, DcrsConfig cfg)
        : cfg_(std::move(cfg)), store_(cfg_.seed), arcs_(ArcIndex::of(g)), role_adj_(NormalizedAdjacency::of(role_graph)) {
        cfg_.validate();
        if (role_graph.num_nodes() != g.num_nodes()) throw ConfigError("role graph node count differs from graph");
        register_dcrs_params(store_, cfg_);
    }

    struct Forward {
        ad::Var H;
        ad::Var Z;
        ScoreVars scores;
        ad::Var loss;
    };

    Forward forward(ad::Tape &tape) {
        Forward f;
        f.H = gdn_forward(tape, arcs_, store_, cfg_.gdn_layers, cfg_.hidden_dim, cfg_.leaky_slope);
        f.Z = gcn_forward(tape, role_adj_, store_, cfg_.gcn_layers, cfg_.hidden_dim);
        f.scores = score_and_fuse(tape, f.H, f.Z, store_, cfg_.lambda);
        f.loss = dcrs_loss(arcs_, f.scores.s_dis, cfg_.gamma);
        return f;
    }

    double loss_value() {
        ad::Tape tape;
        return forward(tape).loss.item();
    }

    /// Accumulates d(loss)/d(param) into the store; returns the loss.
    double accumulate_gradients() {
        ad::Tape tape;
        auto f = forward(tape);
        tape.backward(f.loss);
        return f.loss.item();
    }

    DcrsOutput train() {
        DcrsOutput out;
        const ad::AdamOptions adam{cfg_.lr, 0.9, 0.999, 1e-8};
        for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
            double l = 0.0;
            try {
                l = accumulate_gradients();
            } catch (const ad::NumericError &e) {
                throw TrainingError(epoch, e.what());
            }
            if (!std::isfinite(l)) throw TrainingError(epoch, "non-finite loss");
            out.loss_history.push_back(l);
            ad::adam_step(store_, adam);
        }
        ad::Tape tape;
        Forward f;
        try {
            f = forward(tape);
        } catch (const ad::NumericError &e) {
            throw TrainingError(cfg_.epochs, e.what());
        }
        out.loss_history.push_back(f.loss.item());
        out.s_dc = f.scores.s_dc.value().data();
        out.s_rs = f.scores.s_rs.value().data();
        out.s_dis = f.scores.s_dis.value().data();
        out.H = f.H.value();
        out.Z = f.Z.value();
        return out;
    }

    ad::ParamStore &params() { return store_; }
    const ad::ParamStore &params() const { return store_; }
    ad::ParamStore take_params() && { return std::move(store_); }
    const DcrsConfig &config() const { return cfg_; }

private:
    DcrsConfig cfg_;
    ad::ParamStore store_;
    ArcIndex arcs_;
    NormalizedAdjacency role_adj_;
};

inline DcrsOutput train(const Graph &g, const RoleGraph &role_graph, const DcrsConfig &cfg) {
    DcrsModel model(g, role_graph.graph, cfg);
    return model.train();
}

struct DcrsRun {
    RoleModel roles;
    RoleGraph role_graph;
    DcrsOutput output;
    ad::ParamStore params;  // trained values
};

/// Full pipeline: roles, role graph, training.
inline DcrsRun score_dcrs(const Graph &g, const DcrsConfig &cfg, RoleOptions role_opts = {}) {
    cfg.validate();
    role_opts.nmf.seed = cfg.seed;
    DcrsRun run;
    run.roles = discover_roles(g, role_opts);
    run.role_graph = build_role_graph(run.roles.R, cfg.role_k);
    DcrsModel model(g, run.role_graph.graph, cfg);
    run.output = model.train();
    run.params = std::move(model).take_params();
    return run;
}

} // namespace dismantler
