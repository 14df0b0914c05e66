// otc: command-line front end for transport-based graph compression.
//
// Exit codes: 0 success, 1 input error (including bad flags), 2 solver failure.
// Log level comes from OTC_LOG_LEVEL (trace, debug, info, warn, error, off);
// default warn. Logs go to stderr.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "otc/compressor.hpp"
#include "otc/io/config.hpp"
#include "otc/io/edgelist.hpp"
#include "otc/io/generators.hpp"
#include "otc/io/report.hpp"
#include "otc/io/tudataset.hpp"
#include "otc/projections.hpp"
#include "otc/transport.hpp"

namespace fs = std::filesystem;
using namespace otc;
using io::Json;

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("otc");
    logger->set_pattern("otc: %l: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("OTC_LOG_LEVEL")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only accept "off" when asked for.
        if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
        else spdlog::warn("ignoring unknown OTC_LOG_LEVEL '{}'", env);
    }
}

/// Flags that override the config file when given.
struct RunFlags {
    std::string config_file;
    std::optional<std::size_t> k;
    std::optional<double> k_frac;
    std::optional<double> lambda;
    std::optional<std::size_t> iterations;
    std::optional<double> alpha, beta, gamma;
    std::optional<std::string> convention;
    std::optional<std::string> cost_mode;
    std::optional<double> label_same, label_diff;
    std::optional<std::string> prior;
    std::optional<std::string> prior_file;
    std::optional<std::uint64_t> seed;
    bool backtracking = false;

    void add_to(CLI::App* app, bool with_budget) {
        app->add_option("--config", config_file, "key = value config file (flags override it)");
        if (with_budget) {
            app->add_option("-k,--k", k, "node budget");
            app->add_option("--k-frac", k_frac, "budget as ceil(f * |V|)");
        }
        app->add_option("--lambda", lambda, "regularization weight (default 1)");
        app->add_option("-T,--iterations", iterations, "Mirror Prox iterations (default 25)");
        app->add_option("--alpha", alpha, "selector step (default 0.1)");
        app->add_option("--beta", beta, "potential step (default 0.1)");
        app->add_option("--gamma", gamma, "multiplier step (default 0.1)");
        app->add_option("--convention", convention, "incidence convention")
            ->check(CLI::IsMember({"oriented", "as-written"}));
        app->add_option("--cost-mode", cost_mode, "edge costs from the file or from labels")
            ->check(CLI::IsMember({"file", "label"}));
        app->add_option("--label-same", label_same, "cost of an edge between equal labels (default 0.01)");
        app->add_option("--label-diff", label_diff, "cost of an edge between different labels (default 0.02)");
        app->add_option("--prior", prior, "prior distribution")->check(CLI::IsMember({"degree", "file"}));
        app->add_option("--prior-file", prior_file, "prior as '<node-id> <mass>' lines");
        app->add_option("--seed", seed, "recorded in reports");
        app->add_flag("--backtracking", backtracking, "halve steps when the extragradient step is too long");
    }

    io::RunConfig resolve() const {
        io::RunConfig cfg;
        if (!config_file.empty()) io::read_config_file(config_file, cfg);
        if (k) {
            cfg.k = k;
            cfg.k_frac.reset();
        }
        if (k_frac) {
            cfg.k_frac = k_frac;
            if (!k) cfg.k.reset();
        }
        if (lambda) cfg.lambda = *lambda;
        if (iterations) cfg.iterations = *iterations;
        if (alpha) cfg.steps.alpha = *alpha;
        if (beta) cfg.steps.beta = *beta;
        if (gamma) cfg.steps.gamma = *gamma;
        if (convention) cfg.convention = parse_convention(*convention);
        if (cost_mode) io::set_config_value(cfg, "cost_mode", *cost_mode);
        if (label_same) cfg.label_same = *label_same;
        if (label_diff) cfg.label_diff = *label_diff;
        if (prior) io::set_config_value(cfg, "prior", *prior);
        if (prior_file) io::set_config_value(cfg, "prior_file", *prior_file);
        if (seed) cfg.seed = *seed;
        if (backtracking) cfg.backtracking = true;
        return cfg;
    }
};

io::NamedGraph read_graph(const std::string& input) {
    if (input == "-") return io::parse_edgelist(std::cin, "stdin");
    auto bundle = io::parse_edgelist_file(input);
    return std::move(bundle.graphs.front());
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
    } else {
        io::write_text_file(path, text);
    }
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::string_view s = text;
    while (!s.empty()) {
        const auto comma = s.find(',');
        const std::string item = io::detail::trim(s.substr(0, comma));
        auto v = io::detail::parse_number<double>(item);
        if (!v || !std::isfinite(*v)) throw InputError("bad number '" + item + "' in vector");
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<NodeId> parse_support(const std::string& text, const io::NamedGraph& ng) {
    std::vector<NodeId> out;
    for (double d : parse_vector(text)) {
        const auto name = static_cast<io::NodeName>(d);
        if (static_cast<double>(name) != d) throw InputError("support ids must be integers");
        auto it = std::find(ng.names.begin(), ng.names.end(), name);
        if (it == ng.names.end()) throw InputError("support node " + std::to_string(name) + " is not in the graph");
        out.push_back(static_cast<NodeId>(it - ng.names.begin()));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------- compress

struct CompressArgs {
    std::string input = "-";
    std::string out;
    std::string dot;
    std::string edges;
    std::string out_dir;
    std::size_t threads = 1;
    bool timings = false;
};

struct GraphOutcome {
    std::string id;
    std::size_t num_nodes = 0;
    std::size_t k = 0;
    std::optional<io::ReportSummary> summary;
    bool fallback = false;
    std::string error;
    int error_code = 0;
};

GraphOutcome compress_one(const io::NamedGraph& ng, const io::RunConfig& cfg, const fs::path& out_dir, bool timings) {
    GraphOutcome o;
    o.id = ng.id;
    o.num_nodes = ng.graph.num_nodes();
    try {
        const auto inst = io::prepare_instance(ng, cfg);
        o.k = cfg.resolve_k(ng.graph.num_nodes());
        const CompressionReport rep = compress(inst.graph, inst.prior, o.k, cfg.compress_options());
        io::ReportContext ctx{&ng, &inst.graph, &cfg, timings};
        const Json j = io::report_to_json(rep, ctx);
        o.summary = io::report_from_json(j);
        o.fallback = rep.recovery_fallback;
        io::write_text_file(out_dir / (ng.id + ".json"), io::dump_json(j));
        io::NamedGraph solved{ng.id, inst.graph, ng.names, ng.has_costs};
        io::write_text_file(out_dir / (ng.id + ".edges"),
                            io::emit_edgelist_string(io::induced_subgraph(solved, rep.support)));
    } catch (const InputError& e) {
        o.error = e.what();
        o.error_code = 1;
    } catch (const SolverError& e) {
        o.error = e.what();
        o.error_code = 2;
    }
    return o;
}

/// Compresses every graph of a TUDataset directory with a bounded worker pool.
int run_bundle(const fs::path& dir, const io::RunConfig& cfg, const fs::path& out_dir, std::size_t threads,
               bool timings) {
    const auto start = std::chrono::steady_clock::now();
    const io::GraphBundle bundle = io::parse_tudataset(dir);
    if (bundle.skipped_disconnected > 0)
        spdlog::warn("skipped {} graph(s) with a disconnected skeleton", bundle.skipped_disconnected);
    if (cfg.cost_mode == io::CostMode::label)
        for (const auto& g : bundle.graphs)
            if (!g.graph.fully_labeled())
                throw InputError("cost_mode = label needs node labels (" + io::tudataset_prefix(dir) +
                                 "_node_labels.txt)");
    if (bundle.graphs.empty()) throw InputError("no usable graphs in " + dir.string());
    cfg.resolve_k(bundle.graphs.front().graph.num_nodes());  // fail fast on a missing budget
    fs::create_directories(out_dir);

    std::vector<GraphOutcome> outcomes(bundle.graphs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < bundle.graphs.size(); i = next++) {
            outcomes[i] = compress_one(bundle.graphs[i], cfg, out_dir, timings);
            spdlog::info("graph {}: {}", outcomes[i].id, outcomes[i].error.empty() ? "ok" : outcomes[i].error);
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, bundle.graphs.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    Json summary;
    summary["schema"] = "otc-batch-summary";
    summary["version"] = 1;
    summary["dataset"] = io::tudataset_prefix(dir);
    summary["graphs"] = bundle.graphs.size();
    summary["skipped_disconnected"] = bundle.skipped_disconnected;
    Json results = Json::array();
    int exit_code = 0;
    std::size_t failures = 0, certified = 0;
    for (const auto& o : outcomes) {
        Json r;
        r["graph_id"] = o.id;
        r["num_nodes"] = o.num_nodes;
        r["k"] = o.k;
        if (o.summary) {
            r["status"] = "ok";
            r["support_size"] = o.summary->support.size();
            r["transport_cost"] = o.summary->transport_cost ? Json(*o.summary->transport_cost) : Json(nullptr);
            r["certificate"] = o.summary->exact ? "exact" : "not_certified";
            r["recovery_fallback"] = o.fallback;
            certified += o.summary->exact ? 1 : 0;
        } else {
            r["status"] = "error";
            r["error"] = o.error;
            ++failures;
            exit_code = std::max(exit_code, o.error_code);
        }
        results.push_back(r);
    }
    summary["failures"] = failures;
    summary["certified"] = certified;
    summary["results"] = results;
    if (timings)
        summary["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_text_file(out_dir / "summary.json", io::dump_json(summary));
    if (failures > 0) spdlog::error("{} graph(s) failed; see summary.json", failures);
    // Input errors outrank solver failures when both occur.
    if (exit_code == 2 && std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.error_code == 1; }))
        exit_code = 1;
    return exit_code;
}

int run_compress(const CompressArgs& a, const RunFlags& flags) {
    const io::RunConfig cfg = flags.resolve();
    if (a.input != "-" && fs::is_directory(a.input)) {
        if (a.out_dir.empty()) throw InputError("compressing a dataset directory needs --out-dir");
        return run_bundle(a.input, cfg, a.out_dir, a.threads, a.timings);
    }
    const io::NamedGraph ng = read_graph(a.input);
    const auto inst = io::prepare_instance(ng, cfg);
    const std::size_t k = cfg.resolve_k(ng.graph.num_nodes());
    spdlog::info("compressing {} nodes, {} edges to k = {}", ng.graph.num_nodes(), ng.graph.num_edges(), k);
    const CompressionReport rep = compress(inst.graph, inst.prior, k, cfg.compress_options());
    if (rep.recovery_fallback) spdlog::info("rho1 recovered by the restricted re-solve");
    io::ReportContext ctx{&ng, &inst.graph, &cfg, a.timings};
    write_output(a.out, io::dump_json(io::report_to_json(rep, ctx)));
    io::NamedGraph solved{ng.id, inst.graph, ng.names, ng.has_costs};
    if (!a.dot.empty()) io::write_text_file(a.dot, io::emit_dot_string(rep, solved));
    if (!a.edges.empty())
        io::write_text_file(a.edges, io::emit_edgelist_string(io::induced_subgraph(solved, rep.support)));
    return 0;
}

// ---------------------------------------------------------------- distance

struct DistanceArgs {
    std::string input = "-";
    std::string rho0_file;
    std::string rho1_file;
    std::string convention = "oriented";
    std::string out;
};

int run_distance(const DistanceArgs& a) {
    const io::NamedGraph ng = read_graph(a.input);
    const NodeDistribution rho0 = a.rho0_file.empty() ? stationary_prior(ng.graph) : io::read_prior_file(a.rho0_file, ng);
    const NodeDistribution rho1 = a.rho1_file.empty() ? stationary_prior(ng.graph) : io::read_prior_file(a.rho1_file, ng);
    const Convention conv = parse_convention(a.convention);
    const TransportSolution sol = ot_distance(ng.graph, rho0, rho1, conv);
    Json j;
    j["schema"] = "otc-distance";
    j["version"] = 1;
    j["convention"] = to_string(conv);
    if (!sol.optimal()) {
        j["status"] = "infeasible";
        write_output(a.out, io::dump_json(j));
        return 0;
    }
    j["status"] = "optimal";
    j["distance"] = sol.primal_value;
    j["dual_value"] = sol.dual_value;
    Json pot = Json::array();
    for (NodeId v = 0; v < ng.graph.num_nodes(); ++v) pot.push_back({{"node", ng.names[v]}, {"t", sol.potentials[v]}});
    j["potentials"] = pot;
    Json flows = Json::array();
    for (std::size_t e = 0; e < ng.graph.num_edges(); ++e) {
        const Edge& ed = ng.graph.edge(e);
        flows.push_back({{"u", ng.names[ed.u]}, {"v", ng.names[ed.v]}, {"jplus", sol.jplus[e]}, {"jminus", sol.jminus[e]}});
    }
    j["flows"] = flows;
    write_output(a.out, io::dump_json(j));
    return 0;
}

// ---------------------------------------------------------------- project

struct ProjectArgs {
    std::string kind;
    std::string y;
    std::string eps;
    double budget = 1.0;
    std::string graph;
    std::string convention = "oriented";
};

int run_project(const ProjectArgs& a) {
    const std::vector<double> y = parse_vector(a.y);
    std::vector<double> x;
    if (a.kind == "simplex") {
        const std::vector<double> eps = parse_vector(a.eps);
        if (eps.size() != y.size()) throw InputError("--y and --eps differ in length");
        x = project_diag_simplex(y, DiagonalWeights(eps));
    } else if (a.kind == "box") {
        x = project_capped_box(y, a.budget);
    } else {
        if (a.graph.empty()) throw InputError("slab projection needs --graph");
        const io::NamedGraph ng = read_graph(a.graph);
        if (y.size() != ng.graph.num_nodes()) throw InputError("--y length does not match the graph");
        x = project_slabs(y, ng.graph, parse_convention(a.convention));
    }
    Json j;
    j["projection"] = a.kind;
    j["x"] = x;
    std::cout << io::dump_json(j);
    return 0;
}

// ---------------------------------------------------------------- certify

struct CertifyArgs {
    std::string input = "-";
    std::string support;
    std::string out;
};

int run_certify(const CertifyArgs& a, const RunFlags& flags) {
    const io::RunConfig cfg = flags.resolve();
    const io::NamedGraph ng = read_graph(a.input);
    const auto inst = io::prepare_instance(ng, cfg);
    const std::vector<NodeId> support = parse_support(a.support, ng);
    if (support.empty()) throw InputError("--support is empty");
    const Certificate cert = certify(inst.graph, inst.prior, support, cfg.lambda, cfg.convention);
    Json j;
    j["schema"] = "otc-certificate";
    j["version"] = 1;
    Json s = Json::array();
    for (NodeId v : support) s.push_back(ng.names[v]);
    j["support"] = s;
    j["status"] = cert.exact() ? "exact" : "not_certified";
    if (cert.exact()) j["gamma"] = cert.gamma;
    else j["reason"] = cert.reason;
    j["separation"] = cert.separation;
    write_output(a.out, io::dump_json(j));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Graph compression by optimal transport with a node budget"};
    app.require_subcommand(1);

    RunFlags compress_flags;
    CompressArgs compress_args;
    auto* c = app.add_subcommand("compress", "compress a graph (edge list or stdin) or a TUDataset directory");
    c->add_option("input", compress_args.input, "edge-list file, '-' for stdin, or dataset directory");
    c->add_option("-o,--out", compress_args.out, "JSON report path (default stdout)");
    c->add_option("--dot", compress_args.dot, "also write a DOT rendering");
    c->add_option("--edges", compress_args.edges, "also write the compressed graph as an edge list");
    c->add_option("--out-dir", compress_args.out_dir, "output directory for dataset input");
    c->add_option("-j,--threads", compress_args.threads, "worker threads for dataset input");
    c->add_flag("--timings", compress_args.timings, "include wall time (reports are then not reproducible)");
    compress_flags.add_to(c, true);

    DistanceArgs distance_args;
    auto* d = app.add_subcommand("distance", "transport distance, potentials and flows between two distributions");
    d->add_option("input", distance_args.input, "edge-list file or '-'");
    d->add_option("--rho0", distance_args.rho0_file, "source distribution (default: degree prior)");
    d->add_option("--rho1", distance_args.rho1_file, "target distribution (default: degree prior)");
    d->add_option("--convention", distance_args.convention)->check(CLI::IsMember({"oriented", "as-written"}));
    d->add_option("-o,--out", distance_args.out, "output path (default stdout)");

    ProjectArgs project_args;
    auto* p = app.add_subcommand("project", "run one of the projections on a vector");
    p->add_option("kind", project_args.kind, "simplex | box | slabs")
        ->required()
        ->check(CLI::IsMember({"simplex", "box", "slabs"}));
    p->add_option("--y", project_args.y, "comma-separated input vector")->required();
    p->add_option("--eps", project_args.eps, "comma-separated weights (simplex)");
    p->add_option("--budget", project_args.budget, "sum bound (box)");
    p->add_option("--graph", project_args.graph, "edge-list file (slabs)");
    p->add_option("--convention", project_args.convention)->check(CLI::IsMember({"oriented", "as-written"}));

    RunFlags certify_flags;
    CertifyArgs certify_args;
    auto* cf = app.add_subcommand("certify", "check whether the relaxation provably recovers a support");
    cf->add_option("input", certify_args.input, "edge-list file or '-'");
    cf->add_option("--support", certify_args.support, "comma-separated node ids")->required();
    cf->add_option("-o,--out", certify_args.out, "output path (default stdout)");
    certify_flags.add_to(cf, false);

    std::string tree_out;
    auto* gt = app.add_subcommand("gen-tree", "write the 21-node three-weight tree as an edge list");
    gt->add_option("-o,--out", tree_out, "output path (default stdout)");

    std::string batch_dir, batch_out;
    std::size_t batch_threads = std::max(1u, std::thread::hardware_concurrency());
    bool batch_timings = false;
    RunFlags batch_flags;
    auto* b = app.add_subcommand("batch", "compress every graph of a TUDataset directory");
    b->add_option("dataset", batch_dir, "dataset directory")->required();
    b->add_option("--out-dir", batch_out, "output directory")->required();
    b->add_option("-j,--threads", batch_threads, "worker threads");
    b->add_flag("--timings", batch_timings, "include wall time in summary.json");
    batch_flags.add_to(b, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*c) return run_compress(compress_args, compress_flags);
        if (*d) return run_distance(distance_args);
        if (*p) return run_project(project_args);
        if (*cf) return run_certify(certify_args, certify_flags);
        if (*gt) {
            write_output(tree_out, io::emit_edgelist_string(io::make_three_weight_named()));
            return 0;
        }
        if (*b) return run_bundle(batch_dir, batch_flags.resolve(), batch_out, batch_threads, batch_timings);
    } catch (const InputError& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const SolverError& e) {
        spdlog::error("solver failure: {}", e.what());
        return 2;
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
