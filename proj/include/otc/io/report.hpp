#pragma once

// Compression reports as JSON (schema "otc-report", version 1) and DOT.
//
// JSON keys appear in a fixed order and doubles use the shortest round-trip
// form, so equal inputs give byte-equal files. Node ids in the report are the
// external names of the input graph.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "otc/compressor.hpp"
#include "otc/error.hpp"
#include "otc/io/config.hpp"
#include "otc/io/edgelist.hpp"

namespace otc::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "otc-report";
inline constexpr int kReportVersion = 1;

struct ReportContext {
    const NamedGraph* graph = nullptr;
    /// Graph the solver ran on (after cost_mode); defaults to graph->graph.
    const Graph* solved = nullptr;
    const RunConfig* config = nullptr;
    bool include_timing = false;
};

inline Json report_to_json(const CompressionReport& rep, const ReportContext& ctx) {
    if (!ctx.graph) throw InputError("report needs the input graph");
    const NamedGraph& ng = *ctx.graph;
    const Graph& g = ctx.solved ? *ctx.solved : ng.graph;
    Json j;
    j["schema"] = kReportSchema;
    j["version"] = kReportVersion;
    j["graph_id"] = ng.id;
    j["graph"] = {{"num_nodes", g.num_nodes()}, {"num_edges", g.num_edges()}, {"nodes", ng.names}};

    Json cfg;
    cfg["k"] = rep.k;
    cfg["lambda"] = rep.options.lambda;
    cfg["iterations"] = rep.options.iterations;
    cfg["steps"] = {{"alpha", rep.options.steps.alpha}, {"beta", rep.options.steps.beta},
                    {"gamma", rep.options.steps.gamma}};
    cfg["convention"] = to_string(rep.options.convention);
    cfg["backtracking"] = rep.options.backtracking;
    if (ctx.config) {
        cfg["cost_mode"] = to_string(ctx.config->cost_mode);
        cfg["prior"] = to_string(ctx.config->prior_mode);
        cfg["seed"] = ctx.config->seed;
    }
    j["config"] = cfg;

    Json support = Json::array();
    for (NodeId v : rep.support) support.push_back(ng.names[v]);
    j["support"] = support;

    Json rho = Json::array();
    for (NodeId v = 0; v < rep.rho1.size(); ++v)
        if (rep.rho1[v] > 0.0) rho.push_back({{"node", ng.names[v]}, {"mass", rep.rho1[v]}});
    j["rho1"] = rho;

    Json kept = Json::array();
    for (std::size_t i : rep.kept_edges) {
        const Edge& e = g.edge(i);
        kept.push_back({{"u", ng.names[e.u]}, {"v", ng.names[e.v]}, {"cost", e.cost},
                        {"directed", e.kind == EdgeKind::directed}});
    }
    j["kept_edges"] = kept;
    j["transport_cost"] = rep.transport_cost ? Json(*rep.transport_cost) : Json(nullptr);
    j["recovery"] = {{"raw_mass", rep.raw_mass},
                     {"fallback", rep.recovery_fallback},
                     {"degenerate", rep.recovery_degenerate}};

    Json cert;
    cert["status"] = rep.certificate.exact() ? "exact" : "not_certified";
    if (rep.certificate.exact()) cert["gamma"] = rep.certificate.gamma;
    cert["separation"] = rep.certificate.separation;
    if (!rep.certificate.exact()) cert["reason"] = rep.certificate.reason;
    j["certificate"] = cert;

    j["epsilon_avg"] = rep.epsilon_avg;
    Json trace = Json::array();
    for (const TraceEntry& t : rep.trace)
        trace.push_back({{"iteration", t.iteration}, {"psi", t.psi}, {"gap", t.gap}, {"best_gap", t.best_gap}});
    j["trace"] = trace;
    j["final_state"] = {{"zeta", rep.final_state.zeta}, {"t", rep.final_state.t}};
    if (ctx.include_timing) j["wall_time_seconds"] = rep.wall_time_seconds;
    return j;
}

/// Structural check of a parsed report. Returns a list of problems; empty
/// means valid.
inline std::vector<std::string> validate_report(const Json& j) {
    std::vector<std::string> errs;
    auto need = [&](const Json& obj, const char* key, auto pred, const char* what) {
        if (!obj.is_object() || !obj.contains(key)) {
            errs.push_back(std::string("missing ") + key);
            return false;
        }
        if (!pred(obj.at(key))) {
            errs.push_back(std::string(key) + " must be " + what);
            return false;
        }
        return true;
    };
    auto is_num = [](const Json& x) { return x.is_number(); };
    auto is_uint = [](const Json& x) { return x.is_number_unsigned() || (x.is_number_integer() && x.get<long long>() >= 0); };
    auto is_int = [](const Json& x) { return x.is_number_integer(); };
    auto is_str = [](const Json& x) { return x.is_string(); };
    auto is_bool = [](const Json& x) { return x.is_boolean(); };
    auto is_arr = [](const Json& x) { return x.is_array(); };
    auto is_obj = [](const Json& x) { return x.is_object(); };

    if (!j.is_object()) return {"report must be an object"};
    if (need(j, "schema", is_str, "a string") && j["schema"] != kReportSchema) errs.push_back("unknown schema");
    if (need(j, "version", is_int, "an integer") && j["version"] != kReportVersion) errs.push_back("unsupported version");
    need(j, "graph_id", is_str, "a string");
    std::size_t n = 0;
    if (need(j, "graph", is_obj, "an object")) {
        const Json& g = j["graph"];
        if (need(g, "num_nodes", is_uint, "a nonnegative integer")) n = g["num_nodes"].get<std::size_t>();
        need(g, "num_edges", is_uint, "a nonnegative integer");
        if (need(g, "nodes", is_arr, "an array") && g["nodes"].size() != n) errs.push_back("graph.nodes length mismatch");
    }
    std::size_t k = 0;
    if (need(j, "config", is_obj, "an object")) {
        const Json& c = j["config"];
        if (need(c, "k", is_uint, "a nonnegative integer")) k = c["k"].get<std::size_t>();
        need(c, "lambda", is_num, "a number");
        need(c, "iterations", is_uint, "a nonnegative integer");
        if (need(c, "steps", is_obj, "an object"))
            for (const char* s : {"alpha", "beta", "gamma"}) need(c["steps"], s, is_num, "a number");
        if (need(c, "convention", is_str, "a string") && c["convention"] != "oriented" && c["convention"] != "as-written")
            errs.push_back("config.convention invalid");
        need(c, "backtracking", is_bool, "a boolean");
    }
    if (need(j, "support", is_arr, "an array")) {
        if (j["support"].size() > k) errs.push_back("support larger than k");
        for (const Json& v : j["support"])
            if (!v.is_number_integer()) errs.push_back("support entries must be integers");
    }
    if (need(j, "rho1", is_arr, "an array")) {
        double mass = 0.0;
        for (const Json& e : j["rho1"]) {
            if (!e.is_object() || !e.contains("node") || !e.contains("mass") || !e["mass"].is_number()) {
                errs.push_back("rho1 entries need node and mass");
                break;
            }
            mass += e["mass"].get<double>();
        }
        if (std::abs(mass - 1.0) > 1e-9) errs.push_back("rho1 mass is not 1");
    }
    need(j, "kept_edges", is_arr, "an array");
    if (!j.contains("transport_cost") || !(j["transport_cost"].is_number() || j["transport_cost"].is_null()))
        errs.push_back("transport_cost must be a number or null");
    if (need(j, "recovery", is_obj, "an object")) {
        need(j["recovery"], "raw_mass", is_num, "a number");
        need(j["recovery"], "fallback", is_bool, "a boolean");
        need(j["recovery"], "degenerate", is_bool, "a boolean");
    }
    if (need(j, "certificate", is_obj, "an object")) {
        const Json& c = j["certificate"];
        if (need(c, "status", is_str, "a string")) {
            if (c["status"] == "exact") need(c, "gamma", is_num, "a number");
            else if (c["status"] == "not_certified") need(c, "reason", is_str, "a string");
            else errs.push_back("certificate.status invalid");
        }
        need(c, "separation", is_num, "a number");
    }
    if (need(j, "epsilon_avg", is_arr, "an array") && j["epsilon_avg"].size() != n)
        errs.push_back("epsilon_avg length mismatch");
    if (need(j, "trace", is_arr, "an array")) {
        for (const Json& t : j["trace"]) {
            if (!t.is_object() || !t.contains("iteration") || !t.contains("psi") || !t.contains("gap") ||
                !t.contains("best_gap")) {
                errs.push_back("trace entries need iteration, psi, gap, best_gap");
                break;
            }
        }
    }
    if (need(j, "final_state", is_obj, "an object")) need(j["final_state"], "zeta", is_num, "a number");
    if (j.contains("wall_time_seconds") && !j["wall_time_seconds"].is_number())
        errs.push_back("wall_time_seconds must be a number");
    return errs;
}

/// The parts of a report needed downstream (batch summaries, tests).
struct ReportSummary {
    std::string graph_id;
    std::size_t num_nodes = 0;
    std::size_t k = 0;
    std::vector<NodeName> support;
    std::vector<std::pair<NodeName, double>> rho1;
    std::optional<double> transport_cost;
    bool exact = false;
    double gamma = 0.0;
};

inline ReportSummary report_from_json(const Json& j) {
    const auto errs = validate_report(j);
    if (!errs.empty()) throw InputError("invalid report: " + errs.front());
    ReportSummary s;
    s.graph_id = j["graph_id"].get<std::string>();
    s.num_nodes = j["graph"]["num_nodes"].get<std::size_t>();
    s.k = j["config"]["k"].get<std::size_t>();
    s.support = j["support"].get<std::vector<NodeName>>();
    for (const Json& e : j["rho1"]) s.rho1.emplace_back(e["node"].get<NodeName>(), e["mass"].get<double>());
    if (j["transport_cost"].is_number()) s.transport_cost = j["transport_cost"].get<double>();
    s.exact = j["certificate"]["status"] == "exact";
    if (s.exact) s.gamma = j["certificate"]["gamma"].get<double>();
    return s;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

/// Kept nodes red, removed nodes and edges gray.
inline void emit_dot(const CompressionReport& rep, const NamedGraph& ng, std::ostream& out) {
    const Graph& g = ng.graph;
    std::vector<char> kept(g.num_nodes(), 0);
    for (NodeId v : rep.support) kept[v] = 1;
    out << "digraph \"" << ng.id << "\" {\n";
    out << "  node [shape=circle];\n";
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        out << "  \"" << ng.names[v] << "\" [color=\"" << (kept[v] ? "red" : "gray") << "\"";
        if (!kept[v]) out << ", fontcolor=\"gray\"";
        out << "];\n";
    }
    for (const Edge& e : g.edges()) {
        const bool keep = kept[e.u] && kept[e.v];
        out << "  \"" << ng.names[e.u] << "\" -> \"" << ng.names[e.v] << "\" [label=\""
            << detail::format_cost(e.cost) << "\"";
        if (e.kind == EdgeKind::undirected) out << ", dir=none";
        out << ", color=\"" << (keep ? "black" : "gray") << "\"];\n";
    }
    out << "}\n";
}

inline std::string emit_dot_string(const CompressionReport& rep, const NamedGraph& ng) {
    std::ostringstream out;
    emit_dot(rep, ng, out);
    return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace otc::io
