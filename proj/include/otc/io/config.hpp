#pragma once

// Run configuration and its key = value file format:
//
//   # comment
//   k = 5              budget (absolute); or
//   k_frac = 0.5       budget ceil(k_frac * |V|)
//   lambda = 1
//   T = 25             (alias: iterations)
//   alpha = 0.1
//   beta = 0.1
//   gamma = 0.1
//   convention = oriented | as-written
//   cost_mode = file | label
//   label_same = 0.01
//   label_diff = 0.02
//   prior = degree | file
//   prior_file = path  (lines "<node-id> <mass>")
//   seed = 0
//   backtracking = false

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>

#include "otc/compressor.hpp"
#include "otc/error.hpp"
#include "otc/graph.hpp"
#include "otc/io/edgelist.hpp"

namespace otc::io {

enum class CostMode { from_file, label };
enum class PriorMode { degree, from_file };

struct RunConfig {
    std::optional<std::size_t> k;
    std::optional<double> k_frac;
    double lambda = 1.0;
    std::size_t iterations = 25;
    StepSizes steps;
    Convention convention = Convention::oriented;
    CostMode cost_mode = CostMode::from_file;
    double label_same = kSameLabelCost;
    double label_diff = kDiffLabelCost;
    PriorMode prior_mode = PriorMode::degree;
    std::string prior_file;
    std::uint64_t seed = 0;
    bool backtracking = false;

    /// Absolute budget for a graph with n nodes, clamped to n.
    std::size_t resolve_k(std::size_t n) const {
        if (k && k_frac) throw InputError("give either k or k_frac, not both");
        if (k) {
            if (*k < 1) throw InputError("k must be at least 1");
            return std::min(*k, n);
        }
        if (k_frac) {
            if (!(*k_frac > 0.0 && *k_frac <= 1.0)) throw InputError("k_frac must lie in (0, 1]");
            const auto v = static_cast<std::size_t>(std::ceil(*k_frac * static_cast<double>(n) - 1e-12));
            return std::max<std::size_t>(1, std::min(v, n));
        }
        throw InputError("no budget given (k or k_frac)");
    }

    CompressOptions compress_options() const {
        CompressOptions o;
        o.lambda = lambda;
        o.iterations = iterations;
        o.steps = steps;
        o.convention = convention;
        o.backtracking = backtracking;
        return o;
    }
};

inline const char* to_string(CostMode m) { return m == CostMode::label ? "label" : "file"; }
inline const char* to_string(PriorMode m) { return m == PriorMode::from_file ? "file" : "degree"; }

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double config_double(const std::string& key, const std::string& v) {
    auto d = parse_number<double>(v);
    if (!d || !std::isfinite(*d)) throw InputError("config: " + key + " expects a number, got '" + v + "'");
    return *d;
}

inline std::uint64_t config_uint(const std::string& key, const std::string& v) {
    auto d = parse_number<std::uint64_t>(v);
    if (!d) throw InputError("config: " + key + " expects a nonnegative integer, got '" + v + "'");
    return *d;
}

inline bool config_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InputError("config: " + key + " expects true or false, got '" + v + "'");
}

}  // namespace detail

inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    using namespace detail;
    if (key == "k") {
        cfg.k = static_cast<std::size_t>(config_uint(key, value));
    } else if (key == "k_frac") {
        cfg.k_frac = config_double(key, value);
    } else if (key == "lambda") {
        cfg.lambda = config_double(key, value);
        if (!(cfg.lambda > 0.0)) throw InputError("config: lambda must be positive");
    } else if (key == "T" || key == "iterations") {
        cfg.iterations = static_cast<std::size_t>(config_uint(key, value));
    } else if (key == "alpha") {
        cfg.steps.alpha = config_double(key, value);
    } else if (key == "beta") {
        cfg.steps.beta = config_double(key, value);
    } else if (key == "gamma") {
        cfg.steps.gamma = config_double(key, value);
    } else if (key == "convention") {
        cfg.convention = parse_convention(value);
    } else if (key == "cost_mode") {
        if (value == "file") cfg.cost_mode = CostMode::from_file;
        else if (value == "label") cfg.cost_mode = CostMode::label;
        else throw InputError("config: cost_mode must be file or label");
    } else if (key == "label_same") {
        cfg.label_same = config_double(key, value);
    } else if (key == "label_diff") {
        cfg.label_diff = config_double(key, value);
    } else if (key == "prior") {
        if (value == "degree") cfg.prior_mode = PriorMode::degree;
        else if (value == "file") cfg.prior_mode = PriorMode::from_file;
        else throw InputError("config: prior must be degree or file");
    } else if (key == "prior_file") {
        cfg.prior_file = value;
        cfg.prior_mode = PriorMode::from_file;
    } else if (key == "seed") {
        cfg.seed = config_uint(key, value);
    } else if (key == "backtracking") {
        cfg.backtracking = config_bool(key, value);
    } else {
        throw InputError("config: unknown key '" + key + "'");
    }
}

inline void read_config(std::istream& in, RunConfig& cfg) {
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (detail::trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw InputError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            set_config_value(cfg, key, value);
        } catch (const InputError& e) {
            throw InputError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

inline void read_config_file(const std::filesystem::path& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    read_config(in, cfg);
}

/// Prior from "<node-id> <mass>" lines; unlisted nodes get zero mass.
inline NodeDistribution read_prior(std::istream& in, const NamedGraph& ng) {
    std::map<NodeName, NodeId> index;
    for (NodeId v = 0; v < ng.names.size(); ++v) index.emplace(ng.names[v], v);
    std::vector<double> mass(ng.names.size(), 0.0);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        const auto fail = [&](const std::string& m) { return InputError("prior line " + std::to_string(line_no) + ": " + m); };
        if (tok.size() != 2) throw fail("expected '<node-id> <mass>'");
        auto name = detail::parse_number<NodeName>(tok[0]);
        auto m = detail::parse_number<double>(tok[1]);
        if (!name || !index.count(*name)) throw fail("unknown node '" + std::string(tok[0]) + "'");
        if (!m || !std::isfinite(*m) || *m < 0.0) throw fail("bad mass '" + std::string(tok[1]) + "'");
        mass[index[*name]] = *m;
    }
    return NodeDistribution::probability(std::move(mass));
}

inline NodeDistribution read_prior_file(const std::filesystem::path& path, const NamedGraph& ng) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open prior " + path.string());
    return read_prior(in, ng);
}

/// Applies cost_mode to the graph and builds the prior.
struct PreparedInstance {
    Graph graph;
    NodeDistribution prior;
};

inline PreparedInstance prepare_instance(const NamedGraph& ng, const RunConfig& cfg) {
    PreparedInstance p;
    p.graph = cfg.cost_mode == CostMode::label ? label_costs(ng.graph, cfg.label_same, cfg.label_diff) : ng.graph;
    if (cfg.prior_mode == PriorMode::from_file) {
        if (cfg.prior_file.empty()) throw InputError("prior = file needs prior_file");
        p.prior = read_prior_file(cfg.prior_file, ng);
    } else {
        p.prior = stationary_prior(p.graph);
    }
    return p;
}

}  // namespace otc::io
