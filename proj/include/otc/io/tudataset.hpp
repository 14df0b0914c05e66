#pragma once

// TUDataset directory layout: <NAME>_A.txt (one "u, v" pair per line, global
// 1-indexed node ids), <NAME>_graph_indicator.txt (graph id of node i on line
// i), and optionally <NAME>_node_labels.txt (integer label of node i).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "otc/error.hpp"
#include "otc/graph.hpp"
#include "otc/io/edgelist.hpp"

namespace otc::io {

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw InputError("cannot open " + p.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back(line);
    }
    return lines;
}

inline long long parse_int_field(std::string_view s, const std::filesystem::path& file, std::size_t line) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    auto v = parse_number<long long>(s);
    if (!v) throw InputError(file.filename().string() + ":" + std::to_string(line) + ": bad integer '" +
                             std::string(s) + "'");
    return *v;
}

}  // namespace detail

/// Finds the dataset prefix from the single *_A.txt file in `dir`.
inline std::string tudataset_prefix(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError(dir.string() + " is not a directory");
    std::vector<std::string> found;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 6 && name.ends_with("_A.txt")) found.push_back(name.substr(0, name.size() - 6));
    }
    if (found.empty()) throw InputError("no *_A.txt file in " + dir.string());
    if (found.size() > 1) throw InputError("several *_A.txt files in " + dir.string());
    return found.front();
}

/// Per-graph split with 0-indexed local node ids (the names). Reversed
/// duplicate pairs collapse into one undirected edge of cost 1.0; self-loops
/// are dropped. Graphs whose skeleton is disconnected are skipped and counted.
inline GraphBundle parse_tudataset(const std::filesystem::path& dir) {
    const std::string prefix = tudataset_prefix(dir);
    const auto a_path = dir / (prefix + "_A.txt");
    const auto gi_path = dir / (prefix + "_graph_indicator.txt");
    const auto nl_path = dir / (prefix + "_node_labels.txt");
    if (!std::filesystem::exists(gi_path)) throw InputError("missing " + gi_path.string());

    const auto gi_lines = detail::read_lines(gi_path);
    const std::size_t total_nodes = gi_lines.size();
    std::vector<long long> graph_of(total_nodes);
    for (std::size_t i = 0; i < total_nodes; ++i) graph_of[i] = detail::parse_int_field(gi_lines[i], gi_path, i + 1);

    std::vector<std::optional<int>> global_labels(total_nodes);
    if (std::filesystem::exists(nl_path)) {
        const auto nl_lines = detail::read_lines(nl_path);
        if (nl_lines.size() != total_nodes)
            throw InputError(nl_path.filename().string() + " has " + std::to_string(nl_lines.size()) +
                             " lines for " + std::to_string(total_nodes) + " nodes");
        for (std::size_t i = 0; i < total_nodes; ++i)
            global_labels[i] = static_cast<int>(detail::parse_int_field(nl_lines[i], nl_path, i + 1));
    }

    // Local numbering in order of global id within each graph.
    std::map<long long, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < total_nodes; ++i) members[graph_of[i]].push_back(i);
    std::vector<std::size_t> local(total_nodes);
    for (auto& [gid, nodes] : members)
        for (std::size_t j = 0; j < nodes.size(); ++j) local[nodes[j]] = j;

    std::map<long long, std::set<std::pair<std::size_t, std::size_t>>> pairs;
    const auto a_lines = detail::read_lines(a_path);
    for (std::size_t l = 0; l < a_lines.size(); ++l) {
        const std::string& line = a_lines[l];
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw InputError(a_path.filename().string() + ":" + std::to_string(l + 1) + ": expected 'u, v'");
        const long long u = detail::parse_int_field(std::string_view(line).substr(0, comma), a_path, l + 1);
        const long long v = detail::parse_int_field(std::string_view(line).substr(comma + 1), a_path, l + 1);
        if (u < 1 || v < 1 || static_cast<std::size_t>(u) > total_nodes || static_cast<std::size_t>(v) > total_nodes)
            throw InputError(a_path.filename().string() + ":" + std::to_string(l + 1) + ": node id out of range");
        const auto gu = static_cast<std::size_t>(u - 1), gv = static_cast<std::size_t>(v - 1);
        if (graph_of[gu] != graph_of[gv])
            throw InputError(a_path.filename().string() + ":" + std::to_string(l + 1) + ": edge crosses graphs");
        if (gu == gv) continue;
        pairs[graph_of[gu]].insert({std::min(local[gu], local[gv]), std::max(local[gu], local[gv])});
    }

    GraphBundle bundle;
    for (const auto& [gid, nodes] : members) {
        std::vector<Edge> edges;
        for (const auto& [u, v] : pairs[gid]) edges.push_back({u, v, EdgeKind::undirected, 1.0});
        std::vector<std::optional<int>> labels;
        for (std::size_t i : nodes) labels.push_back(global_labels[i]);
        Graph g(nodes.size(), std::move(edges), std::move(labels), Connectivity::not_required);
        if (!g.is_connected() || (g.num_nodes() == 1)) {
            ++bundle.skipped_disconnected;
            continue;
        }
        NamedGraph ng;
        ng.id = std::to_string(gid);
        ng.graph = std::move(g);
        ng.names.resize(nodes.size());
        for (std::size_t j = 0; j < nodes.size(); ++j) ng.names[j] = static_cast<NodeName>(j);
        bundle.graphs.push_back(std::move(ng));
    }
    return bundle;
}

}  // namespace otc::io
