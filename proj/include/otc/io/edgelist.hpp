#pragma once

// Edge-list text format.
//
//   # comment (also allowed after a record)
//   [nodes]            optional; fixes node order and carries labels
//   <id> [label]
//   [edges]            records before any section header are edges too
//   <u> <v> [cost] [D]
//
// Node ids are nonnegative integers. Without a [nodes] section, nodes are
// numbered by first appearance (u before v within a line). Cost defaults to
// 1.0; a trailing D marks the edge directed u -> v.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "otc/error.hpp"
#include "otc/graph.hpp"

namespace otc::io {

using NodeName = long long;

/// A graph together with the external ids of its nodes.
struct NamedGraph {
    std::string id;
    Graph graph;
    std::vector<NodeName> names;
    /// True when at least one edge carried an explicit cost.
    bool has_costs = false;
};

struct GraphBundle {
    std::vector<NamedGraph> graphs;
    std::size_t skipped_disconnected = 0;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
    T value{};
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

inline std::string format_cost(double c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", c);
    return buf;
}

}  // namespace detail

inline NamedGraph parse_edgelist(std::istream& in, std::string id = "0",
                                 Connectivity connectivity = Connectivity::required) {
    std::map<NodeName, NodeId> index;
    std::vector<NodeName> names;
    std::vector<std::optional<int>> labels;
    std::vector<Edge> edges;
    bool has_costs = false;
    bool nodes_section_seen = false;
    enum class Section { edges, nodes } section = Section::edges;

    auto fail = [](std::size_t line_no, const std::string& msg) -> InputError {
        return InputError("line " + std::to_string(line_no) + ": " + msg);
    };
    auto node_of = [&](std::string_view tok, std::size_t line_no, bool declare) -> NodeId {
        auto name = detail::parse_number<NodeName>(tok);
        if (!name || *name < 0) throw fail(line_no, "bad node id '" + std::string(tok) + "'");
        auto it = index.find(*name);
        if (it != index.end()) {
            if (declare) throw fail(line_no, "node " + std::to_string(*name) + " declared twice");
            return it->second;
        }
        if (nodes_section_seen && !declare)
            throw fail(line_no, "node " + std::to_string(*name) + " is not listed in [nodes]");
        index.emplace(*name, names.size());
        names.push_back(*name);
        labels.emplace_back();
        return names.size() - 1;
    };

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok[0].front() == '[') {
            if (tok.size() != 1) throw fail(line_no, "unexpected text after section header");
            if (tok[0] == "[nodes]") {
                if (nodes_section_seen || !edges.empty() || !names.empty())
                    throw fail(line_no, "[nodes] must come first and only once");
                nodes_section_seen = true;
                section = Section::nodes;
            } else if (tok[0] == "[edges]") {
                section = Section::edges;
            } else {
                throw fail(line_no, "unknown section " + std::string(tok[0]));
            }
            continue;
        }
        if (section == Section::nodes) {
            if (tok.size() > 2) throw fail(line_no, "node records are '<id> [label]'");
            NodeId v = node_of(tok[0], line_no, true);
            if (tok.size() == 2) {
                auto label = detail::parse_number<int>(tok[1]);
                if (!label) throw fail(line_no, "bad label '" + std::string(tok[1]) + "'");
                labels[v] = *label;
            }
            continue;
        }
        if (tok.size() < 2 || tok.size() > 4) throw fail(line_no, "edge records are '<u> <v> [cost] [D]'");
        Edge e;
        e.u = node_of(tok[0], line_no, false);
        e.v = node_of(tok[1], line_no, false);
        std::size_t next = 2;
        if (next < tok.size() && tok[next] != "D") {
            auto cost = detail::parse_number<double>(tok[next]);
            if (!cost || !std::isfinite(*cost) || *cost <= 0.0)
                throw fail(line_no, "cost '" + std::string(tok[next]) + "' is not a positive number");
            e.cost = *cost;
            has_costs = true;
            ++next;
        }
        if (next < tok.size()) {
            if (tok[next] != "D") throw fail(line_no, "expected 'D', got '" + std::string(tok[next]) + "'");
            e.kind = EdgeKind::directed;
            ++next;
        }
        if (next != tok.size()) throw fail(line_no, "trailing tokens");
        if (e.u == e.v) throw fail(line_no, "self-loop at node " + std::to_string(names[e.u]));
        edges.push_back(e);
    }
    if (in.bad()) throw InputError("read error");
    if (names.empty()) throw InputError("edge list defines no nodes");

    NamedGraph out;
    out.id = std::move(id);
    out.names = names;
    out.has_costs = has_costs;
    out.graph = Graph(names.size(), std::move(edges), std::move(labels), Connectivity::not_required);
    if (connectivity == Connectivity::required) {
        const auto comps = out.graph.components();
        if (comps.size() > 1) {
            std::string msg = "graph is disconnected (" + std::to_string(comps.size()) + " components):";
            for (std::size_t c = 0; c < comps.size() && c < 8; ++c) {
                msg += " {";
                for (std::size_t i = 0; i < comps[c].size() && i < 8; ++i)
                    msg += (i ? " " : "") + std::to_string(names[comps[c][i]]);
                if (comps[c].size() > 8) msg += " ...";
                msg += "}";
            }
            throw InputError(msg);
        }
    }
    return out;
}

inline NamedGraph parse_edgelist_string(const std::string& text, std::string id = "0",
                                        Connectivity connectivity = Connectivity::required) {
    std::istringstream in(text);
    return parse_edgelist(in, std::move(id), connectivity);
}

inline GraphBundle parse_edgelist_file(const std::filesystem::path& path,
                                       Connectivity connectivity = Connectivity::required) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    GraphBundle b;
    b.graphs.push_back(parse_edgelist(in, path.stem().string(), connectivity));
    return b;
}

/// Writes the [nodes]/[edges] form. Costs use %.17g so parsing the output
/// reproduces the graph exactly.
inline void emit_edgelist(const NamedGraph& ng, std::ostream& out) {
    const Graph& g = ng.graph;
    out << "[nodes]\n";
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        out << ng.names[v];
        if (g.label(v)) out << ' ' << *g.label(v);
        out << '\n';
    }
    out << "[edges]\n";
    for (const Edge& e : g.edges()) {
        out << ng.names[e.u] << ' ' << ng.names[e.v] << ' ' << detail::format_cost(e.cost);
        if (e.kind == EdgeKind::directed) out << " D";
        out << '\n';
    }
}

inline std::string emit_edgelist_string(const NamedGraph& ng) {
    std::ostringstream out;
    emit_edgelist(ng, out);
    return out.str();
}

/// Subgraph induced by `nodes`, keeping external ids and labels. The result
/// need not be connected.
inline NamedGraph induced_subgraph(const NamedGraph& ng, std::span<const NodeId> nodes) {
    const Graph& g = ng.graph;
    std::vector<NodeId> local(g.num_nodes(), g.num_nodes());
    NamedGraph out;
    out.id = ng.id;
    out.has_costs = ng.has_costs;
    std::vector<std::optional<int>> labels;
    for (NodeId v : nodes) {
        local.at(v) = out.names.size();
        out.names.push_back(ng.names[v]);
        labels.push_back(g.label(v));
    }
    std::vector<Edge> edges;
    for (std::size_t i : induced_edges(g, nodes)) {
        Edge e = g.edge(i);
        e.u = local[e.u];
        e.v = local[e.v];
        edges.push_back(e);
    }
    out.graph = Graph(out.names.size(), std::move(edges), std::move(labels), Connectivity::not_required);
    return out;
}

}  // namespace otc::io
