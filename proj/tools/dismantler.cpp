// dismantler: command-line front end.
//
//   dismantler generate er --n 1000 --k 6 --seed 1 --out er.txt
//   dismantler rank --input er.txt --method dcrs --out scores.csv
//   dismantler dismantle --input er.txt --method dc --theta 0.01 --out-dir run/
//   dismantler experiment --config exp.json --jobs 4
//   dismantler ablate --input ba:n=1000,m=4 --seeds 0 1 2
//
// DISMANTLER_SEED supplies the seed whenever --seed / --seeds is not given.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <dismantler/alloc.hpp>
#include <dismantler/experiment.hpp>
#include <dismantler/io.hpp>

namespace fs = std::filesystem;
using namespace dismantler;

namespace {

std::uint64_t default_seed() {
    const char *env = std::getenv("DISMANTLER_SEED");
    if (!env || !*env) return 0;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string(env).size()) return v;
    } catch (const std::exception &) {
    }
    throw std::invalid_argument(std::string("DISMANTLER_SEED is not an unsigned integer: ") + env);
}

// Flags that may override a config file; unset optionals leave it alone.
struct ModelFlags {
    std::optional<std::size_t> hidden_dim, gdn_layers, gcn_layers, role_k, epochs, ci_ell, role_levels;
    std::optional<double> lambda, gamma, lr, damping;
    std::optional<std::string> ablation;

    void attach(CLI::App *cmd) {
        auto *g = "Model options";
        cmd->add_option("--hidden", hidden_dim, "Embedding width")->group(g);
        cmd->add_option("--gdn-layers", gdn_layers, "Diffusion encoder layers")->group(g);
        cmd->add_option("--gcn-layers", gcn_layers, "Role encoder layers")->group(g);
        cmd->add_option("--lambda", lambda, "Gate weight of the diffusion score, in [0, 1]")->group(g);
        cmd->add_option("--gamma", gamma, "Weight of the attack-set size term in the loss")->group(g);
        cmd->add_option("--role-k", role_k, "Neighbors per node in the role graph")->group(g);
        cmd->add_option("--role-levels", role_levels, "Recursive feature aggregation depth")->group(g);
        cmd->add_option("--epochs", epochs, "Training epochs")->group(g);
        cmd->add_option("--lr", lr, "Adam learning rate")->group(g);
        cmd->add_option("--ablation", ablation, "full | no_rs | no_dc")
            ->check(CLI::IsMember({"full", "no_rs", "no_dc"}))
            ->group(g);
        cmd->add_option("--ci-ell", ci_ell, "Collective influence radius")->group(g);
        cmd->add_option("--damping", damping, "PageRank damping factor")->group(g);
    }

    void apply(MethodParams &p) const {
        auto &d = p.dcrs;
        if (hidden_dim) d.hidden_dim = *hidden_dim;
        if (gdn_layers) d.gdn_layers = *gdn_layers;
        if (gcn_layers) d.gcn_layers = *gcn_layers;
        if (lambda) d.lambda = *lambda;
        if (gamma) d.gamma = *gamma;
        if (role_k) d.role_k = *role_k;
        if (epochs) d.epochs = *epochs;
        if (lr) d.lr = *lr;
        if (ablation) {
            d.ablation = Ablation::full;
            d.with_ablation(parse_ablation(*ablation));
        }
        if (role_levels) p.roles.levels = *role_levels;
        if (ci_ell) p.ci_ell = *ci_ell;
        if (damping) p.pr_damping = *damping;
    }
};

void write_output(const std::optional<std::string> &path, const std::string &content) {
    if (path && *path != "-")
        write_text_file(*path, content);
    else
        std::cout << content;
}

// ---- generate ----------------------------------------------------------------

struct GenerateArgs {
    std::string kind;
    std::size_t n = 0, m = 0;
    double k = 0.0, p = 0.0;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

int cmd_generate(const GenerateArgs &a) {
    GeneratorSpec spec{a.kind, a.n, a.k, a.m, a.p};
    const auto g = spec.build(a.seed.value_or(default_seed()));
    std::ostringstream ss;
    write_edge_list(ss, LabeledGraph::with_numeric_labels(g));
    write_output(a.out, ss.str());
    return 0;
}

// ---- rank --------------------------------------------------------------------

struct RankArgs {
    std::string input;
    std::string method = "dc";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, roles_out, checkpoint;
    ModelFlags model;
};

int cmd_rank(const RankArgs &a) {
    const auto lg = load_edge_list(a.input);
    MethodParams params;
    a.model.apply(params);
    const auto result = run_method(a.method, lg.graph, a.seed.value_or(default_seed()), params);
    std::ostringstream ss;
    write_method_scores(ss, lg.labels, result);
    write_output(a.out, ss.str());
    if (a.roles_out) {
        if (!result.dcrs) throw std::invalid_argument("--roles-out needs --method dcrs");
        write_text_file(*a.roles_out, role_model_to_json(result.dcrs->roles).dump(2) + "\n");
    }
    if (a.checkpoint) {
        if (!result.dcrs) throw std::invalid_argument("--checkpoint needs --method dcrs");
        write_text_file(*a.checkpoint, checkpoint_to_json(result.dcrs->params).dump() + "\n");
    }
    return 0;
}

// ---- dismantle ---------------------------------------------------------------

struct DismantleArgs {
    std::string input;
    std::optional<std::string> method, scores, column, out_dir;
    double theta = 0.01;
    std::optional<std::uint64_t> seed;
    ModelFlags model;
};

int cmd_dismantle(const DismantleArgs &a) {
    const auto lg = load_edge_list(a.input);
    ScoreVector scores;
    std::string method_name;
    if (a.scores) {
        std::ifstream in(*a.scores);
        if (!in) throw IoError("cannot open " + *a.scores);
        scores = read_scores_csv(in, lg.labels, a.column.value_or(""));
        method_name = a.method.value_or(fs::path(*a.scores).stem().string());
    } else {
        MethodParams params;
        a.model.apply(params);
        method_name = a.method.value_or("dc");
        scores = run_method(method_name, lg.graph, a.seed.value_or(default_seed()), params).scores;
    }
    const auto report = minimal_prefix_tas(lg.graph, scores, a.theta);
    const auto doc = report_to_json(method_name, report).dump(2) + "\n";
    std::ostringstream curve;
    write_curve_csv(curve, report.ngcc_curve);
    if (a.out_dir) {
        fs::create_directories(*a.out_dir);
        write_text_file((fs::path(*a.out_dir) / "report.json").string(), doc);
        write_text_file((fs::path(*a.out_dir) / "curve.csv").string(), curve.str());
    } else {
        std::cout << doc;
    }
    return 0;
}

// ---- experiment / ablate -----------------------------------------------------

struct ExperimentArgs {
    std::optional<std::string> config;
    std::vector<std::string> inputs, methods;
    std::vector<double> thetas;
    std::vector<std::uint64_t> seeds;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;
    ModelFlags model;
};

ExperimentConfig build_experiment(const ExperimentArgs &a) {
    ExperimentConfig cfg;
    if (a.config) cfg = experiment_config_from_json(json::parse(read_text_file(*a.config)));
    if (!a.inputs.empty()) cfg.inputs = a.inputs;
    if (!a.methods.empty()) cfg.methods = a.methods;
    if (!a.thetas.empty()) cfg.thetas = a.thetas;
    if (!a.seeds.empty()) cfg.seeds = a.seeds;
    if (cfg.seeds.empty()) cfg.seeds = {default_seed()};
    if (a.out) cfg.out_dir = *a.out;
    if (a.jobs) cfg.jobs = *a.jobs;
    a.model.apply(cfg.params);
    return cfg;
}

int run_and_report(const ExperimentConfig &cfg) {
    const auto res = run_experiment(cfg);
    std::size_t failed = 0;
    for (const auto &r : res.runs) failed += r.ok ? 0 : 1;
    std::cerr << res.runs.size() - failed << "/" << res.runs.size() << " runs succeeded; summary in "
              << (fs::path(cfg.out_dir) / "summary.csv").string() << "\n";
    if (failed) {
        std::cerr << errors_to_json(res).dump(2) << "\n";
        return 1;
    }
    return 0;
}

void attach_experiment_options(CLI::App *cmd, ExperimentArgs &a, bool with_methods) {
    cmd->add_option("--config", a.config, "JSON experiment file; flags override its fields")->check(CLI::ExistingFile);
    cmd->add_option("--input", a.inputs, "Edge-list files or generator specs such as er:n=1000,k=6");
    if (with_methods) cmd->add_option("--methods", a.methods, "dc bc cc ec hc ci pr dcrs random");
    cmd->add_option("--thetas", a.thetas, "Dismantling thresholds");
    cmd->add_option("--seeds", a.seeds, "Seeds (one network instance per seed for generators)");
    cmd->add_option("--out", a.out, "Output directory");
    cmd->add_option("--jobs", a.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    a.model.attach(cmd);
}

} // namespace

int main(int argc, char **argv) {
    tune_allocator();
    CLI::App app{"Network dismantling with learned node scores and centrality baselines"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto *generate = app.add_subcommand("generate", "Write a synthetic graph as an edge list");
    generate->add_option("kind", gen.kind, "er | ba | ws | plc")->required()->check(CLI::IsMember({"er", "ba", "ws", "plc"}));
    generate->add_option("--n", gen.n, "Number of nodes")->required();
    generate->add_option("--k", gen.k, "Average degree (er)");
    generate->add_option("--m", gen.m, "Edges per new node (ba, plc) or lattice degree (ws)");
    generate->add_option("--p", gen.p, "Rewiring (ws) or triad-formation (plc) probability");
    generate->add_option("--seed", gen.seed, "Random seed");
    generate->add_option("--out", gen.out, "Output file (default stdout)");

    RankArgs rk;
    auto *rank = app.add_subcommand("rank", "Score every node with one method and write a CSV");
    rank->add_option("--input", rk.input, "Edge-list file")->required()->check(CLI::ExistingFile);
    rank->add_option("--method", rk.method, "dc bc cc ec hc ci pr dcrs random")
        ->check(CLI::IsMember(known_methods()));
    rank->add_option("--seed", rk.seed, "Seed for random and dcrs");
    rank->add_option("--out", rk.out, "Output CSV (default stdout)");
    rank->add_option("--roles-out", rk.roles_out, "Also write the role model as JSON (dcrs)");
    rank->add_option("--checkpoint", rk.checkpoint, "Also write trained parameters as JSON (dcrs)");
    rk.model.attach(rank);

    DismantleArgs dm;
    auto *dismantle = app.add_subcommand("dismantle", "Find the attack set for a threshold");
    dismantle->add_option("--input", dm.input, "Edge-list file")->required()->check(CLI::ExistingFile);
    auto *method_opt = dismantle->add_option("--method", dm.method, "Ranking method (default dc)")
                           ->check(CLI::IsMember(known_methods()));
    auto *scores_opt =
        dismantle->add_option("--scores", dm.scores, "Score CSV to rank by instead of a method")->check(CLI::ExistingFile);
    method_opt->excludes(scores_opt);
    dismantle->add_option("--column", dm.column, "Score column in the CSV (default: last)")->needs(scores_opt);
    dismantle->add_option("--theta", dm.theta, "Largest allowed GCC fraction, in (0, 1]")
        ->check(CLI::Range(0.0, 1.0));
    dismantle->add_option("--seed", dm.seed, "Seed for random and dcrs");
    dismantle->add_option("--out-dir", dm.out_dir, "Write report.json and curve.csv here (default: report to stdout)");
    dm.model.attach(dismantle);

    ExperimentArgs ex;
    auto *experiment = app.add_subcommand("experiment", "Run methods x seeds x thresholds and summarize");
    attach_experiment_options(experiment, ex, true);

    ExperimentArgs ab;
    auto *ablate = app.add_subcommand("ablate", "Compare full DCRS against its two single-branch variants");
    attach_experiment_options(ablate, ab, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) return cmd_generate(gen);
        if (*rank) return cmd_rank(rk);
        if (*dismantle) return cmd_dismantle(dm);
        if (*experiment) return run_and_report(build_experiment(ex));
        if (*ablate) {
            auto cfg = build_experiment(ab);
            cfg.methods = {"dcrs", "dcrs_no_rs", "dcrs_no_dc"};
            return run_and_report(cfg);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
