#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "union_find.hpp"

namespace dismantler {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string message, const std::string &source = "")
        : std::runtime_error((source.empty() ? "" : source + ":") + "line " + std::to_string(line) + ": " + message),
          line_(line), message_(std::move(message)) {}
    std::size_t line() const { return line_; }
    const std::string &message() const { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

/**
 * Immutable undirected simple graph in compressed row layout.
 *
 * Every undirected edge {u, v} is stored twice, once in each endpoint's
 * neighbor list; lists are sorted ascending. Directed-edge index e in
 * [0, 2m) addresses the flat neighbor array, which makes the layout double
 * as the edge array for message passing: source(e) is the row owning e.
 */
class Graph {
public:
    Graph() : offsets_(1, 0) {}

    /// Builds from an arbitrary edge list. Self-loops are dropped and
    /// parallel edges collapsed. Endpoints must be < n.
    static Graph from_edges(std::size_t n, std::span<const Edge> edges) {
        std::vector<std::size_t> degree(n, 0);
        for (const auto &[u, v] : edges) {
            if (u >= n || v >= n) throw GraphError("edge endpoint out of range");
            if (u == v) continue;
            ++degree[u];
            ++degree[v];
        }
        Graph g;
        g.offsets_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
        g.neighbors_.resize(g.offsets_[n]);
        std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto &[u, v] : edges) {
            if (u == v) continue;
            g.neighbors_[cursor[u]++] = v;
            g.neighbors_[cursor[v]++] = u;
        }
        // sort + dedup each row, then compact
        std::vector<std::size_t> new_offsets(n + 1, 0);
        std::size_t write = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto first = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
            auto last = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
            std::sort(first, last);
            last = std::unique(first, last);
            for (auto it = first; it != last; ++it) g.neighbors_[write++] = *it;
            new_offsets[i + 1] = write;
        }
        g.neighbors_.resize(write);
        g.offsets_ = std::move(new_offsets);
        return g;
    }

    std::size_t num_nodes() const { return offsets_.size() - 1; }
    std::size_t num_edges() const { return neighbors_.size() / 2; }
    /// Number of directed edges (2 * num_edges).
    std::size_t num_arcs() const { return neighbors_.size(); }

    std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

    std::span<const NodeId> neighbors(NodeId u) const {
        return {neighbors_.data() + offsets_[u], degree(u)};
    }

    bool has_edge(NodeId u, NodeId v) const {
        auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    std::span<const std::size_t> offsets() const { return offsets_; }
    std::span<const NodeId> adjacency() const { return neighbors_; }

    /// Undirected edges with u < v, in row order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(num_edges());
        for (NodeId u = 0; u < num_nodes(); ++u)
            for (NodeId v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    /// Source node of every directed edge, aligned with adjacency().
    std::vector<NodeId> arc_sources() const {
        std::vector<NodeId> src(num_arcs());
        for (NodeId u = 0; u < num_nodes(); ++u)
            for (std::size_t e = offsets_[u]; e < offsets_[u + 1]; ++e) src[e] = u;
        return src;
    }

    double average_degree() const {
        return num_nodes() == 0 ? 0.0 : 2.0 * static_cast<double>(num_edges()) / static_cast<double>(num_nodes());
    }

    bool operator==(const Graph &) const = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
};

/// Returns an empty string when g satisfies the simple-undirected invariants,
/// otherwise a description of the first violation.
inline std::string validate(const Graph &g) {
    const auto n = g.num_nodes();
    auto off = g.offsets();
    if (off.empty() || off.front() != 0) return "offsets must start at 0";
    if (off.back() != g.adjacency().size()) return "offsets do not cover adjacency";
    if (g.adjacency().size() % 2 != 0) return "odd number of arcs";
    for (NodeId u = 0; u < n; ++u) {
        if (off[u + 1] < off[u]) return "offsets not monotone";
        auto nb = g.neighbors(u);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            const NodeId v = nb[i];
            if (v >= n) return "neighbor id out of range at node " + std::to_string(u);
            if (v == u) return "self-loop at node " + std::to_string(u);
            if (i > 0 && nb[i - 1] >= v) return "neighbor list unsorted or duplicated at node " + std::to_string(u);
            if (!g.has_edge(v, u)) return "asymmetric edge " + std::to_string(u) + "-" + std::to_string(v);
        }
    }
    return {};
}

/// Graph plus the external label of every node (dense id -> label).
struct LabeledGraph {
    Graph graph;
    std::vector<std::string> labels;

    static LabeledGraph with_numeric_labels(Graph g) {
        LabeledGraph lg{std::move(g), {}};
        lg.labels.reserve(lg.graph.num_nodes());
        for (std::size_t i = 0; i < lg.graph.num_nodes(); ++i) lg.labels.push_back(std::to_string(i));
        return lg;
    }
};

struct EdgeListDialect {
    std::string_view separators = " \t,";
    std::string_view comment_prefixes = "#%";
};

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view line, std::string_view seps) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && seps.find(line[i]) != std::string_view::npos) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && seps.find(line[j]) == std::string_view::npos) ++j;
        out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// "# nodes <N>" pre-registers labels 0..N-1 so isolated nodes survive a
// write/read round trip. Other readers see an ordinary comment.
inline std::optional<std::size_t> node_count_directive(std::string_view comment) {
    auto toks = split_tokens(comment, " \t");
    if (toks.size() < 2 || toks[0] != "nodes") return std::nullopt;
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), n);
    if (ec != std::errc{} || ptr != toks[1].data() + toks[1].size()) return std::nullopt;
    return n;
}

} // namespace detail

/// Parses an edge list. Labels are re-indexed densely in first-seen order.
inline LabeledGraph parse_edge_list(std::istream &in, const EdgeListDialect &dialect = {}) {
    std::unordered_map<std::string, NodeId> index;
    std::vector<std::string> labels;
    std::vector<Edge> edges;
    auto intern = [&](std::string_view tok) {
        auto [it, inserted] = index.try_emplace(std::string(tok), static_cast<NodeId>(labels.size()));
        if (inserted) labels.emplace_back(tok);
        return it->second;
    };

    std::string raw;
    std::size_t line_no = 0;
    bool seen_edge = false;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty()) continue;
        if (dialect.comment_prefixes.find(line.front()) != std::string_view::npos) {
            if (!seen_edge && labels.empty() && line.front() == '#') {
                if (auto n = detail::node_count_directive(line.substr(1))) {
                    for (std::size_t i = 0; i < *n; ++i) intern(std::to_string(i));
                }
            }
            continue;
        }
        auto toks = detail::split_tokens(line, dialect.separators);
        if (toks.size() != 2)
            throw ParseError(line_no, "expected 2 tokens, found " + std::to_string(toks.size()));
        const NodeId u = intern(toks[0]);
        const NodeId v = intern(toks[1]);
        edges.emplace_back(u, v);
        seen_edge = true;
    }
    if (in.bad()) throw GraphError("read error");
    if (labels.empty()) throw GraphError("empty graph");
    return {Graph::from_edges(labels.size(), edges), std::move(labels)};
}

inline LabeledGraph load_edge_list(const std::string &path, const EdgeListDialect &dialect = {}) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open edge list: " + path);
    try {
        return parse_edge_list(in, dialect);
    } catch (const ParseError &e) {
        throw ParseError(e.line(), e.message(), path);
    }
}

inline void write_edge_list(std::ostream &out, const LabeledGraph &lg) {
    const auto &g = lg.graph;
    out << "# nodes " << g.num_nodes() << "\n# edges " << g.num_edges() << "\n";
    for (const auto &[u, v] : g.edges()) out << lg.labels[u] << ' ' << lg.labels[v] << '\n';
}

/// Induced subgraph plus the original id of each remaining node.
struct Subgraph {
    Graph graph;
    std::vector<NodeId> original_ids;
};

inline Subgraph remove_nodes(const Graph &g, std::span<const NodeId> victims) {
    const auto n = g.num_nodes();
    std::vector<char> gone(n, 0);
    for (NodeId v : victims) {
        if (v >= n) throw GraphError("victim id out of range");
        gone[v] = 1;
    }
    constexpr NodeId kNone = ~NodeId{0};
    std::vector<NodeId> remap(n, kNone);
    Subgraph sub;
    for (NodeId u = 0; u < n; ++u) {
        if (gone[u]) continue;
        remap[u] = static_cast<NodeId>(sub.original_ids.size());
        sub.original_ids.push_back(u);
    }
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        if (gone[u]) continue;
        for (NodeId v : g.neighbors(u))
            if (u < v && !gone[v]) edges.emplace_back(remap[u], remap[v]);
    }
    sub.graph = Graph::from_edges(sub.original_ids.size(), edges);
    return sub;
}

/// Component label per node, labels dense in order of smallest member.
inline std::vector<NodeId> connected_components(const Graph &g) {
    constexpr NodeId kUnset = ~NodeId{0};
    std::vector<NodeId> comp(g.num_nodes(), kUnset);
    NodeId next = 0;
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < g.num_nodes(); ++s) {
        if (comp[s] != kUnset) continue;
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            for (NodeId v : g.neighbors(u))
                if (comp[v] == kUnset) {
                    comp[v] = next;
                    stack.push_back(v);
                }
        }
        ++next;
    }
    return comp;
}

/// Size of the largest connected component (0 for the empty graph).
inline std::size_t gcc_size(const Graph &g) {
    if (g.num_nodes() == 0) return 0;
    UnionFind uf(g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v) uf.unite(u, v);
    return uf.max_component();
}

/// Breadth-first distances from source; unreachable nodes get -1.
inline std::vector<std::int64_t> bfs_distances(const Graph &g, NodeId source) {
    std::vector<std::int64_t> dist(g.num_nodes(), -1);
    std::queue<NodeId> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (NodeId v : g.neighbors(u))
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    return dist;
}

} // namespace dismantler
