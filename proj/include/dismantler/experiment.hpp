#pragma once

// Batch runs: networks x seeds x methods x thresholds, with per-run reports
// and a summary table.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "centrality.hpp"
#include "dismantle.hpp"
#include "generators.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "model.hpp"
#include "roles.hpp"

namespace dismantler {

class ExperimentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---- generator specs -------------------------------------------------------

/// "er:n=1000,k=6", "ba:n=1000,m=4", "ws:n=1000,m=8,p=0.8", "plc:n=1000,m=4,p=0.5".
struct GeneratorSpec {
    std::string kind;
    std::size_t n = 0;
    double k = 0.0;     // er
    std::size_t m = 0;  // ba, ws, plc
    double p = 0.0;     // ws, plc

    Graph build(std::uint64_t seed) const {
        if (kind == "er") return generate_er(n, k, seed);
        if (kind == "ba") return generate_ba(n, m, seed);
        if (kind == "ws") return generate_ws(n, m, p, seed);
        if (kind == "plc") return generate_plc(n, m, p, seed);
        throw GeneratorError("unknown generator '" + kind + "'");
    }

    /// Filesystem-friendly name, e.g. "er-n1000-k6".
    std::string name() const {
        std::string s = kind + "-n" + std::to_string(n);
        if (kind == "er") return s + "-k" + format_double(k);
        s += "-m" + std::to_string(m);
        if (kind != "ba") s += "-p" + format_double(p);
        return s;
    }
};

inline bool is_generator_kind(const std::string &kind) {
    return kind == "er" || kind == "ba" || kind == "ws" || kind == "plc";
}

inline GeneratorSpec parse_generator_spec(const std::string &text) {
    const auto colon = text.find(':');
    GeneratorSpec spec;
    spec.kind = text.substr(0, colon);
    if (!is_generator_kind(spec.kind)) throw GeneratorError("unknown generator '" + spec.kind + "'");
    std::set<std::string> keys;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw GeneratorError("expected key=value in generator spec, got '" + item + "'");
            const auto key = item.substr(0, eq), value = item.substr(eq + 1);
            keys.insert(key);
            try {
                std::size_t used = 0;
                if (key == "n") {
                    spec.n = std::stoul(value, &used);
                } else if (key == "m") {
                    spec.m = std::stoul(value, &used);
                } else if (key == "k") {
                    spec.k = std::stod(value, &used);
                } else if (key == "p") {
                    spec.p = std::stod(value, &used);
                } else {
                    throw GeneratorError("unknown generator parameter '" + key + "'");
                }
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const GeneratorError &) {
                throw;
            } catch (const std::exception &) {
                throw GeneratorError("bad value for " + key + ": '" + value + "'");
            }
        }
    }
    auto need = [&](const char *key) {
        if (!keys.count(key)) throw GeneratorError(spec.kind + " spec needs " + key);
    };
    need("n");
    if (spec.kind == "er") {
        need("k");
    } else {
        need("m");
        if (spec.kind != "ba") need("p");
    }
    return spec;
}

// ---- ranking methods -------------------------------------------------------

struct MethodParams {
    std::size_t ci_ell = 2;
    double pr_damping = 0.85;
    std::size_t pr_max_iter = 200;
    double pr_tol = 1e-8;
    std::size_t ec_max_iter = 1000;
    double ec_tol = 1e-10;
    DcrsConfig dcrs;
    RoleOptions roles;
};

inline const std::vector<std::string> &known_methods() {
    static const std::vector<std::string> m{"dc", "bc", "cc", "ec", "hc", "ci", "pr", "dcrs", "random",
                                            "dcrs_no_rs", "dcrs_no_dc"};
    return m;
}

inline bool is_known_method(const std::string &m) {
    const auto &all = known_methods();
    return std::find(all.begin(), all.end(), m) != all.end();
}

struct MethodResult {
    ScoreVector scores;
    std::optional<DcrsRun> dcrs;
};

/// Scores every node of g. `seed` feeds the random baseline and DCRS.
inline MethodResult run_method(const std::string &method, const Graph &g, std::uint64_t seed,
                               const MethodParams &params = {}) {
    MethodResult r;
    if (method == "dc") {
        r.scores = degree_centrality(g);
    } else if (method == "bc") {
        r.scores = betweenness_centrality(g);
    } else if (method == "cc") {
        r.scores = closeness_centrality(g);
    } else if (method == "hc") {
        r.scores = harmonic_centrality(g);
    } else if (method == "ec") {
        r.scores = eigenvector_centrality(g, params.ec_max_iter, params.ec_tol).scores;
    } else if (method == "ci") {
        r.scores = collective_influence(g, params.ci_ell);
    } else if (method == "pr") {
        r.scores = pagerank(g, params.pr_damping, params.pr_max_iter, params.pr_tol).scores;
    } else if (method == "random") {
        r.scores = random_scores(g.num_nodes(), seed);
    } else if (method == "dcrs" || method == "dcrs_no_rs" || method == "dcrs_no_dc") {
        DcrsConfig cfg = params.dcrs;
        cfg.seed = seed;
        if (method == "dcrs_no_rs") cfg.with_ablation(Ablation::no_rs);
        if (method == "dcrs_no_dc") cfg.with_ablation(Ablation::no_dc);
        r.dcrs = score_dcrs(g, cfg, params.roles);
        r.scores = r.dcrs->output.s_dis;
    } else {
        throw ExperimentError("unknown method '" + method + "'");
    }
    return r;
}

/// Writes the score file for a method result: DCRS gets its three columns.
inline void write_method_scores(std::ostream &out, const std::vector<std::string> &labels, const MethodResult &r) {
    if (r.dcrs)
        write_dcrs_csv(out, labels, r.dcrs->output);
    else
        write_scores_csv(out, labels, r.scores);
}

// ---- experiment configuration ----------------------------------------------

struct ExperimentConfig {
    std::vector<std::string> inputs;  // edge-list paths or generator specs
    std::vector<std::string> methods;
    std::vector<double> thetas{0.01};
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "results";
    std::size_t jobs = 1;
    MethodParams params;

    void validate() const {
        if (inputs.empty()) throw ExperimentError("experiment needs at least one input");
        if (methods.empty()) throw ExperimentError("experiment needs at least one method");
        if (thetas.empty()) throw ExperimentError("experiment needs at least one theta");
        for (const auto &m : methods)
            if (!is_known_method(m)) throw ExperimentError("unknown method '" + m + "'");
        for (double t : thetas) check_theta(t);
        for (const auto &in : inputs)
            if (is_generator_input(in) && seeds.empty())
                throw ExperimentError("generator input '" + in + "' needs at least one seed");
        if (jobs < 1) throw ExperimentError("jobs must be >= 1");
        params.dcrs.validate();
    }

    /// An input is a generator spec unless it names an existing file.
    static bool is_generator_input(const std::string &in) {
        if (std::filesystem::exists(in)) return false;
        return is_generator_kind(in.substr(0, in.find(':')));
    }
};

namespace detail {

template <class T>
std::vector<T> one_or_many(const json &j) {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
}

inline void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &where) {
    if (!j.is_object()) throw ExperimentError(where + " must be a JSON object");
    for (const auto &[key, _] : j.items())
        if (!allowed.count(key)) throw ExperimentError("unknown key '" + key + "' in " + where);
}

} // namespace detail

/**
 * Reads the JSON form of an experiment. Keys: input (string or list),
 * methods, thetas, seeds, out, jobs, ci_ell, pagerank_damping, dcrs {...},
 * roles {...}. Absent keys keep their defaults; unknown keys are errors.
 */
inline ExperimentConfig experiment_config_from_json(const json &j) {
    detail::check_keys(j,
                       {"input", "methods", "thetas", "seeds", "out", "jobs", "ci_ell", "pagerank_damping", "dcrs",
                        "roles"},
                       "experiment config");
    ExperimentConfig c;
    try {
        if (j.contains("input")) c.inputs = detail::one_or_many<std::string>(j["input"]);
        if (j.contains("methods")) c.methods = detail::one_or_many<std::string>(j["methods"]);
        if (j.contains("thetas")) c.thetas = detail::one_or_many<double>(j["thetas"]);
        if (j.contains("seeds")) c.seeds = detail::one_or_many<std::uint64_t>(j["seeds"]);
        if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
        if (j.contains("jobs")) c.jobs = j["jobs"].get<std::size_t>();
        if (j.contains("ci_ell")) c.params.ci_ell = j["ci_ell"].get<std::size_t>();
        if (j.contains("pagerank_damping")) c.params.pr_damping = j["pagerank_damping"].get<double>();
        if (j.contains("dcrs")) {
            const auto &d = j["dcrs"];
            detail::check_keys(d,
                               {"hidden_dim", "gdn_layers", "gcn_layers", "lambda", "gamma", "role_k", "epochs", "lr",
                                "ablation"},
                               "dcrs");
            auto &cfg = c.params.dcrs;
            cfg.hidden_dim = d.value("hidden_dim", cfg.hidden_dim);
            cfg.gdn_layers = d.value("gdn_layers", cfg.gdn_layers);
            cfg.gcn_layers = d.value("gcn_layers", cfg.gcn_layers);
            cfg.lambda = d.value("lambda", cfg.lambda);
            cfg.gamma = d.value("gamma", cfg.gamma);
            cfg.role_k = d.value("role_k", cfg.role_k);
            cfg.epochs = d.value("epochs", cfg.epochs);
            cfg.lr = d.value("lr", cfg.lr);
            if (d.contains("ablation")) cfg.with_ablation(parse_ablation(d["ablation"].get<std::string>()));
        }
        if (j.contains("roles")) {
            const auto &r = j["roles"];
            detail::check_keys(r, {"levels", "r_min", "r_max", "bits", "nmf_iters", "nmf_tol"}, "roles");
            auto &ro = c.params.roles;
            ro.levels = r.value("levels", ro.levels);
            ro.r_min = r.value("r_min", ro.r_min);
            ro.r_max = r.value("r_max", ro.r_max);
            ro.bits = r.value("bits", ro.bits);
            ro.nmf.iters = r.value("nmf_iters", ro.nmf.iters);
            ro.nmf.tol = r.value("nmf_tol", ro.nmf.tol);
        }
    } catch (const json::exception &e) {
        throw ExperimentError(std::string("bad experiment config: ") + e.what());
    }
    return c;
}

// ---- running ---------------------------------------------------------------

struct RunRecord {
    std::string input;
    std::string network;
    std::string method;
    std::uint64_t seed = 0;
    double theta = 0.0;
    bool ok = false;
    std::size_t num_nodes = 0;
    std::size_t tas_size = 0;
    double rho = 0.0;
    double auc = 0.0;
    std::string error;
};

struct SummaryRecord {
    std::string input;
    std::string method;
    double theta = 0.0;
    std::size_t runs = 0;    // successful runs
    std::size_t failed = 0;
    double rho_mean = 0.0;
    std::optional<double> rho_std;  // sample std, needs two runs
    double auc_mean = 0.0;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;
    std::vector<SummaryRecord> summary;
    bool all_ok() const {
        return std::all_of(runs.begin(), runs.end(), [](const RunRecord &r) { return r.ok; });
    }
};

inline std::vector<SummaryRecord> summarize(const std::vector<RunRecord> &runs) {
    std::vector<SummaryRecord> out;
    std::map<std::tuple<std::string, std::string, double>, std::size_t> slot;
    std::vector<std::vector<const RunRecord *>> groups;
    for (const auto &r : runs) {
        auto key = std::make_tuple(r.input, r.method, r.theta);
        auto [it, fresh] = slot.emplace(key, out.size());
        if (fresh) {
            SummaryRecord rec;
            rec.input = r.input;
            rec.method = r.method;
            rec.theta = r.theta;
            out.push_back(std::move(rec));
            groups.emplace_back();
        }
        groups[it->second].push_back(&r);
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
        auto &s = out[g];
        double rho_sum = 0.0, auc_sum = 0.0;
        for (const auto *r : groups[g]) {
            if (!r->ok) {
                ++s.failed;
                continue;
            }
            ++s.runs;
            rho_sum += r->rho;
            auc_sum += r->auc;
        }
        if (s.runs == 0) continue;
        s.rho_mean = rho_sum / static_cast<double>(s.runs);
        s.auc_mean = auc_sum / static_cast<double>(s.runs);
        if (s.runs > 1) {
            double ss = 0.0;
            for (const auto *r : groups[g])
                if (r->ok) ss += (r->rho - s.rho_mean) * (r->rho - s.rho_mean);
            s.rho_std = std::sqrt(ss / static_cast<double>(s.runs - 1));
        }
    }
    return out;
}

inline std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

/**
 * row_type,input,network,method,seed,theta,status,num_nodes,tas_size,rho,rho_std,auc,runs,error
 * "run" rows first, in (input, seed, method, theta) order, then one
 * "summary" row per (input, method, theta) where rho / auc are means.
 */
inline void write_summary_csv(std::ostream &out, const ExperimentResult &res) {
    out << "row_type,input,network,method,seed,theta,status,num_nodes,tas_size,rho,rho_std,auc,runs,error\n";
    for (const auto &r : res.runs) {
        out << "run," << csv_field(r.input) << ',' << csv_field(r.network) << ',' << r.method << ',' << r.seed << ','
            << format_double(r.theta) << ',' << (r.ok ? "ok" : "error") << ',';
        if (r.ok)
            out << r.num_nodes << ',' << r.tas_size << ',' << format_double(r.rho) << ",," << format_double(r.auc)
                << ",1,";
        else
            out << ",,,,,0," << csv_field(r.error);
        out << '\n';
    }
    for (const auto &s : res.summary) {
        out << "summary," << csv_field(s.input) << ",," << s.method << ",," << format_double(s.theta) << ','
            << (s.failed == 0 ? "ok" : (s.runs == 0 ? "error" : "partial")) << ",,,";
        if (s.runs > 0)
            out << format_double(s.rho_mean) << ',' << (s.rho_std ? format_double(*s.rho_std) : "") << ','
                << format_double(s.auc_mean);
        else
            out << ",,";
        out << ',' << s.runs << ",\n";
    }
}

inline json errors_to_json(const ExperimentResult &res) {
    json errs = json::array();
    for (const auto &r : res.runs)
        if (!r.ok)
            errs.push_back({{"input", r.input},
                            {"network", r.network},
                            {"method", r.method},
                            {"seed", r.seed},
                            {"theta", r.theta},
                            {"error", r.error}});
    return errs;
}

namespace detail {

struct Network {
    std::string input;
    std::string name;
    std::uint64_t seed = 0;
    std::optional<LabeledGraph> graph;
    std::string error;
};

inline std::string file_stem(const std::string &path) {
    auto stem = std::filesystem::path(path).stem().string();
    return stem.empty() ? "network" : stem;
}

} // namespace detail

/**
 * Runs the full cross product. Each (network instance, method) pair is one
 * unit of work: the method scores the graph once and every theta is read off
 * the same ranking. Units execute on up to cfg.jobs threads and each writes
 * only below <out>/<network>/<method>/. Failures are recorded and the
 * remaining units still run.
 */
inline ExperimentResult run_experiment(const ExperimentConfig &cfg) {
    cfg.validate();
    namespace fs = std::filesystem;

    // Network instances: generators get one per seed, files are loaded once
    // and paired with every seed (seeds then only affect random and DCRS).
    std::vector<detail::Network> nets;
    std::vector<std::uint64_t> file_seeds = cfg.seeds.empty() ? std::vector<std::uint64_t>{0} : cfg.seeds;
    for (const auto &in : cfg.inputs) {
        if (ExperimentConfig::is_generator_input(in)) {
            std::optional<GeneratorSpec> spec;
            std::string spec_error;
            try {
                spec = parse_generator_spec(in);
            } catch (const std::exception &e) {
                spec_error = e.what();
            }
            for (auto seed : cfg.seeds) {
                detail::Network net{in, (spec ? spec->name() : "invalid") + "-s" + std::to_string(seed), seed, {}, spec_error};
                if (spec) {
                    try {
                        net.graph = LabeledGraph::with_numeric_labels(spec->build(seed));
                    } catch (const std::exception &e) {
                        net.error = e.what();
                    }
                }
                nets.push_back(std::move(net));
            }
        } else {
            std::optional<LabeledGraph> g;
            std::string err;
            try {
                g = load_edge_list(in);
            } catch (const std::exception &e) {
                err = e.what();
            }
            for (auto seed : file_seeds) {
                const auto name =
                    detail::file_stem(in) + (file_seeds.size() > 1 ? "-s" + std::to_string(seed) : std::string());
                nets.push_back({in, name, seed, g, err});
            }
        }
    }

    const std::size_t nm = cfg.methods.size(), nt = cfg.thetas.size();
    ExperimentResult res;
    res.runs.resize(nets.size() * nm * nt);
    const bool single_theta = nt == 1;

    auto work = [&](std::size_t unit) {
        const auto &net = nets[unit / nm];
        const auto &method = cfg.methods[unit % nm];
        RunRecord *rows = &res.runs[unit * nt];
        for (std::size_t t = 0; t < nt; ++t) {
            rows[t].input = net.input;
            rows[t].network = net.name;
            rows[t].method = method;
            rows[t].seed = net.seed;
            rows[t].theta = cfg.thetas[t];
        }
        auto fail = [&](const std::string &msg) {
            for (std::size_t t = 0; t < nt; ++t) rows[t].error = msg;
        };
        if (!net.graph) return fail(net.error);
        try {
            const auto &g = net.graph->graph;
            const auto result = run_method(method, g, net.seed, cfg.params);
            const fs::path dir = fs::path(cfg.out_dir) / net.name / method;
            fs::create_directories(dir);
            std::ostringstream scores;
            write_method_scores(scores, net.graph->labels, result);
            write_text_file((dir / "scores.csv").string(), scores.str());
            for (std::size_t t = 0; t < nt; ++t) {
                const auto report = minimal_prefix_tas(g, result.scores, cfg.thetas[t]);
                const std::string suffix = single_theta ? "" : "-theta" + format_double(cfg.thetas[t]);
                write_text_file((dir / ("report" + suffix + ".json")).string(),
                                report_to_json(method, report).dump(2) + "\n");
                std::ostringstream curve;
                write_curve_csv(curve, report.ngcc_curve);
                write_text_file((dir / ("curve" + suffix + ".csv")).string(), curve.str());
                auto &row = rows[t];
                row.ok = true;
                row.num_nodes = report.num_nodes;
                row.tas_size = report.tas_size;
                row.rho = report.rho;
                row.auc = report.auc;
            }
        } catch (const std::exception &e) {
            for (std::size_t t = 0; t < nt; ++t) rows[t].ok = false;
            fail(e.what());
        }
    };

    const std::size_t units = nets.size() * nm;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t u; (u = next.fetch_add(1)) < units;) work(u);
    };
    const std::size_t threads = std::min(cfg.jobs, units);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    res.summary = summarize(res.runs);
    fs::create_directories(cfg.out_dir);
    std::ostringstream summary;
    write_summary_csv(summary, res);
    write_text_file((fs::path(cfg.out_dir) / "summary.csv").string(), summary.str());
    write_text_file((fs::path(cfg.out_dir) / "errors.json").string(), errors_to_json(res).dump(2) + "\n");
    return res;
}

} // namespace dismantler
