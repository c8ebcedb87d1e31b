#pragma once

// Text serialization: score CSVs, role models, parameter checkpoints,
// dismantling reports and NGCC curves.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "autograd.hpp"
#include "centrality.hpp"
#include "dismantle.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "roles.hpp"

namespace dismantler {

using json = nlohmann::json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline void write_text_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- score vectors ---------------------------------------------------------

inline void write_scores_csv(std::ostream &out, const std::vector<std::string> &labels, const ScoreVector &scores) {
    if (labels.size() != scores.size()) throw IoError("label count does not match score count");
    out << "node_id,score\n";
    for (std::size_t i = 0; i < scores.size(); ++i) out << labels[i] << ',' << format_double(scores[i]) << '\n';
}

inline void write_dcrs_csv(std::ostream &out, const std::vector<std::string> &labels, const DcrsOutput &o) {
    const auto n = labels.size();
    if (o.s_dc.size() != n || o.s_rs.size() != n || o.s_dis.size() != n)
        throw IoError("label count does not match score count");
    out << "node_id,s_dc,s_rs,s_dis\n";
    for (std::size_t i = 0; i < n; ++i)
        out << labels[i] << ',' << format_double(o.s_dc[i]) << ',' << format_double(o.s_rs[i]) << ','
            << format_double(o.s_dis[i]) << '\n';
}

/**
 * Reads a score CSV back into node order. The first column holds node
 * labels; the score is taken from the column named `column` (default: the
 * last one, so both score and DCRS files work). Every node of the graph
 * must appear exactly once.
 */
inline ScoreVector read_scores_csv(std::istream &in, const std::vector<std::string> &labels,
                                   const std::string &column = "") {
    std::unordered_map<std::string, std::size_t> id_of;
    for (std::size_t i = 0; i < labels.size(); ++i) id_of.emplace(labels[i], i);

    auto split = [](const std::string &line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw IoError("score file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.size() < 2) throw IoError("score header needs a node column and a score column");
    std::size_t col = header.size() - 1;
    if (!column.empty()) {
        auto it = std::find(header.begin(), header.end(), column);
        if (it == header.end()) throw IoError("score column not found: " + column);
        col = static_cast<std::size_t>(it - header.begin());
    }

    ScoreVector scores(labels.size(), 0.0);
    std::vector<char> seen(labels.size(), 0);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw IoError("line " + std::to_string(lineno) + ": wrong field count");
        auto it = id_of.find(cells[0]);
        if (it == id_of.end()) throw IoError("line " + std::to_string(lineno) + ": unknown node " + cells[0]);
        if (seen[it->second]) throw IoError("line " + std::to_string(lineno) + ": duplicate node " + cells[0]);
        seen[it->second] = 1;
        const auto &text = cells[col];
        double v = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            throw IoError("line " + std::to_string(lineno) + ": bad score '" + text + "'");
        scores[it->second] = v;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) throw IoError("score file has no entry for node " + labels[i]);
    return scores;
}

// ---- matrices, role models, checkpoints ------------------------------------

inline json matrix_to_json(const Matrix &m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.data()}};
}

inline Matrix matrix_from_json(const json &j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != rows * cols) throw IoError("matrix value count does not match its shape");
    return {rows, cols, std::move(values)};
}

inline json role_model_to_json(const RoleModel &m) {
    return json{{"r", m.r},
                {"mdl_cost", m.mdl_cost},
                {"R", matrix_to_json(m.R)},
                {"M", matrix_to_json(m.M)},
                {"feature_names", m.feature_names}};
}

inline RoleModel role_model_from_json(const json &j) {
    RoleModel m;
    m.r = j.at("r").get<std::size_t>();
    m.mdl_cost = j.value("mdl_cost", 0.0);
    m.R = matrix_from_json(j.at("R"));
    m.M = matrix_from_json(j.at("M"));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (m.R.cols() != m.r || m.M.rows() != m.r) throw IoError("role model factors do not match r");
    if (m.M.cols() != m.feature_names.size()) throw IoError("role model feature names do not match M");
    return m;
}

/// {"seed": s, "params": [{"name", "rows", "cols", "values"}, ...]} in registration order.
inline json checkpoint_to_json(const ad::ParamStore &store) {
    json params = json::array();
    for (std::size_t i = 0; i < store.size(); ++i) {
        auto entry = matrix_to_json(store[i].value);
        entry["name"] = store[i].name;
        params.push_back(std::move(entry));
    }
    return json{{"seed", store.seed()}, {"params", std::move(params)}};
}

/// Overwrites values of an already registered store; names and shapes must match.
inline void load_checkpoint(ad::ParamStore &store, const json &j) {
    const auto &params = j.at("params");
    if (params.size() != store.size()) throw IoError("checkpoint parameter count does not match model");
    for (const auto &entry : params) {
        const auto name = entry.at("name").get<std::string>();
        if (!store.contains(name)) throw IoError("checkpoint has unknown parameter " + name);
        auto &p = store.get(name);
        Matrix value = matrix_from_json(entry);
        if (!value.same_shape(p.value))
            throw IoError("checkpoint shape mismatch for " + name + ": " + value.shape_string() + " vs " +
                          p.value.shape_string());
        p.value = std::move(value);
    }
}

// ---- dismantling reports ---------------------------------------------------

inline json report_to_json(const std::string &method, const DismantleReport &r) {
    return json{{"method", method}, {"theta", r.theta}, {"tas_size", r.tas_size}, {"rho", r.rho}, {"auc", r.auc}};
}

inline void write_curve_csv(std::ostream &out, const std::vector<double> &curve) {
    out << "step,ngcc\n";
    for (std::size_t t = 0; t < curve.size(); ++t) out << (t + 1) << ',' << format_double(curve[t]) << '\n';
}

} // namespace dismantler
