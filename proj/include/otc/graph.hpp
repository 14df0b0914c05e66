#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otc/error.hpp"

namespace otc {

using NodeId = std::size_t;

enum class EdgeKind { undirected, directed };

/// Incidence convention for undirected edges. Directed edges are always signed
/// (-1 at the tail, +1 at the head).
enum class Convention { oriented, as_written };

enum class Connectivity { required, not_required };

struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    EdgeKind kind = EdgeKind::undirected;
    double cost = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

inline const char* to_string(Convention c) { return c == Convention::oriented ? "oriented" : "as-written"; }

inline Convention parse_convention(const std::string& s) {
    if (s == "oriented") return Convention::oriented;
    if (s == "as-written" || s == "as_written") return Convention::as_written;
    throw InputError("unknown incidence convention '" + s + "'");
}

/// Mixed graph with positive edge costs and optional integer node labels.
/// Immutable after construction.
class Graph {
  public:
    Graph() = default;

    Graph(std::size_t num_nodes, std::vector<Edge> edges, std::vector<std::optional<int>> labels = {},
          Connectivity connectivity = Connectivity::required)
        : num_nodes_(num_nodes), edges_(std::move(edges)), labels_(std::move(labels)) {
        if (labels_.empty()) labels_.assign(num_nodes_, std::nullopt);
        if (labels_.size() != num_nodes_)
            throw InputError("label vector has " + std::to_string(labels_.size()) + " entries for " +
                             std::to_string(num_nodes_) + " nodes");
        if (num_nodes_ == 0) throw InputError("graph has no nodes");
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const Edge& e = edges_[i];
            if (e.u >= num_nodes_ || e.v >= num_nodes_)
                throw InputError("edge " + std::to_string(i) + " has an endpoint out of range");
            if (e.u == e.v) throw InputError("edge " + std::to_string(i) + " is a self-loop on node " + std::to_string(e.u));
            if (!(e.cost > 0.0) || !std::isfinite(e.cost))
                throw InputError("edge " + std::to_string(i) + " (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                 ") has non-positive or non-finite cost");
        }
        build_adjacency();
        if (connectivity == Connectivity::required) {
            auto comps = components();
            if (comps.size() > 1) {
                std::string msg = "graph skeleton is disconnected (" + std::to_string(comps.size()) + " components:";
                for (const auto& c : comps) {
                    msg += " {";
                    for (std::size_t j = 0; j < c.size() && j < 8; ++j) msg += (j ? " " : "") + std::to_string(c[j]);
                    if (c.size() > 8) msg += " ...";
                    msg += "}";
                }
                throw InputError(msg + ")");
            }
        }
    }

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    std::span<const Edge> edges() const { return edges_; }
    const Edge& edge(std::size_t i) const { return edges_[i]; }

    /// Edge indices incident on v, in increasing order.
    std::span<const std::size_t> incident_edges(NodeId v) const {
        return {incident_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

    const std::optional<int>& label(NodeId v) const { return labels_[v]; }
    std::span<const std::optional<int>> labels() const { return labels_; }
    bool fully_labeled() const {
        return std::all_of(labels_.begin(), labels_.end(), [](const auto& l) { return l.has_value(); });
    }
    bool has_directed_edges() const {
        return std::any_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.kind == EdgeKind::directed; });
    }
    double total_cost() const {
        return std::accumulate(edges_.begin(), edges_.end(), 0.0, [](double s, const Edge& e) { return s + e.cost; });
    }

    /// Connected components of the undirected skeleton, each sorted, ordered by smallest member.
    std::vector<std::vector<NodeId>> components() const {
        std::vector<std::vector<NodeId>> out;
        std::vector<char> seen(num_nodes_, 0);
        std::vector<NodeId> stack;
        for (NodeId s = 0; s < num_nodes_; ++s) {
            if (seen[s]) continue;
            out.emplace_back();
            seen[s] = 1;
            stack.push_back(s);
            while (!stack.empty()) {
                NodeId v = stack.back();
                stack.pop_back();
                out.back().push_back(v);
                for (std::size_t ei : incident_edges(v)) {
                    NodeId w = other_endpoint(ei, v);
                    if (!seen[w]) {
                        seen[w] = 1;
                        stack.push_back(w);
                    }
                }
            }
            std::sort(out.back().begin(), out.back().end());
        }
        return out;
    }
    bool is_connected() const { return components().size() <= 1; }

    NodeId other_endpoint(std::size_t edge_index, NodeId v) const {
        const Edge& e = edges_[edge_index];
        return e.u == v ? e.v : e.u;
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_ && a.labels_ == b.labels_;
    }

  private:
    void build_adjacency() {
        offsets_.assign(num_nodes_ + 1, 0);
        for (const Edge& e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
        incident_.assign(offsets_.back(), 0);
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            incident_[fill[edges_[i].u]++] = i;
            incident_[fill[edges_[i].v]++] = i;
        }
    }

    std::size_t num_nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::optional<int>> labels_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> incident_;
};

/// Sparse |E| x |V| incidence matrix with exactly two nonzeros per row.
class IncidenceMatrix {
  public:
    struct Row {
        NodeId tail;
        NodeId head;
        double tail_value;
        double head_value;
    };

    IncidenceMatrix(std::size_t num_nodes, std::vector<Row> rows, Convention convention)
        : num_nodes_(num_nodes), rows_(std::move(rows)), convention_(convention) {}

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return num_nodes_; }
    Convention convention() const { return convention_; }
    const Row& row(std::size_t e) const { return rows_[e]; }

    /// (F t)(e) for a single row.
    double apply_row(std::size_t e, std::span<const double> t) const {
        const Row& r = rows_[e];
        return r.tail_value * t[r.tail] + r.head_value * t[r.head];
    }

    std::vector<double> apply(std::span<const double> t) const {
        std::vector<double> out(rows_.size());
        for (std::size_t e = 0; e < rows_.size(); ++e) out[e] = apply_row(e, t);
        return out;
    }

    std::vector<double> apply_transpose(std::span<const double> x) const {
        std::vector<double> out(num_nodes_, 0.0);
        for (std::size_t e = 0; e < rows_.size(); ++e) {
            out[rows_[e].tail] += rows_[e].tail_value * x[e];
            out[rows_[e].head] += rows_[e].head_value * x[e];
        }
        return out;
    }

    /// Dense row-major copy, mostly for tests.
    std::vector<std::vector<double>> dense() const {
        std::vector<std::vector<double>> out(rows_.size(), std::vector<double>(num_nodes_, 0.0));
        for (std::size_t e = 0; e < rows_.size(); ++e) {
            out[e][rows_[e].tail] += rows_[e].tail_value;
            out[e][rows_[e].head] += rows_[e].head_value;
        }
        return out;
    }

  private:
    std::size_t num_nodes_;
    std::vector<Row> rows_;
    Convention convention_;
};

/// Undirected edges in the oriented convention run from the lower id (tail, -1)
/// to the higher id (head, +1). Directed edges run u -> v in both conventions.
inline IncidenceMatrix build_incidence(const Graph& g, Convention convention) {
    std::vector<IncidenceMatrix::Row> rows;
    rows.reserve(g.num_edges());
    for (const Edge& e : g.edges()) {
        if (e.kind == EdgeKind::directed) {
            rows.push_back({e.u, e.v, -1.0, 1.0});
        } else if (convention == Convention::oriented) {
            rows.push_back({std::min(e.u, e.v), std::max(e.u, e.v), -1.0, 1.0});
        } else {
            rows.push_back({std::min(e.u, e.v), std::max(e.u, e.v), 1.0, 1.0});
        }
    }
    return IncidenceMatrix(g.num_nodes(), std::move(rows), convention);
}

inline constexpr double kSimplexTolerance = 1e-9;

/// Nonnegative vector over the nodes. `probability()` additionally enforces unit mass.
class NodeDistribution {
  public:
    NodeDistribution() = default;
    explicit NodeDistribution(std::vector<double> values) : values_(std::move(values)) {
        for (std::size_t v = 0; v < values_.size(); ++v) {
            if (!std::isfinite(values_[v]) || values_[v] < 0.0)
                throw InputError("distribution entry " + std::to_string(v) + " is negative or non-finite");
        }
    }

    static NodeDistribution probability(std::vector<double> values, double tol = kSimplexTolerance) {
        NodeDistribution d(std::move(values));
        if (std::abs(d.mass() - 1.0) > tol)
            throw InputError("distribution mass " + std::to_string(d.mass()) + " is not 1");
        return d;
    }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    double mass() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }
    bool in_simplex(double tol = kSimplexTolerance) const { return std::abs(mass() - 1.0) <= tol; }

    std::vector<NodeId> support(double threshold = 0.0) const {
        std::vector<NodeId> s;
        for (std::size_t v = 0; v < values_.size(); ++v)
            if (values_[v] > threshold) s.push_back(v);
        return s;
    }

  private:
    std::vector<double> values_;
};

/// Degree-stationary random-walk distribution deg(v) / sum deg.
inline NodeDistribution stationary_prior(const Graph& g) {
    std::vector<double> rho(g.num_nodes());
    double total = 0.0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (g.degree(v) == 0) throw InputError("node " + std::to_string(v) + " is isolated; no stationary prior");
        total += static_cast<double>(g.degree(v));
    }
    for (NodeId v = 0; v < g.num_nodes(); ++v) rho[v] = static_cast<double>(g.degree(v)) / total;
    return NodeDistribution(std::move(rho));
}

inline constexpr double kSameLabelCost = 0.01;
inline constexpr double kDiffLabelCost = 0.02;

/// Reassigns edge costs by endpoint-label equality.
inline Graph label_costs(const Graph& g, double same_cost = kSameLabelCost, double diff_cost = kDiffLabelCost) {
    if (!(same_cost > 0.0) || !(diff_cost > 0.0)) throw InputError("label costs must be positive");
    if (!g.fully_labeled()) throw InputError("label cost mode requires a label on every node");
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    for (Edge& e : edges) e.cost = (*g.label(e.u) == *g.label(e.v)) ? same_cost : diff_cost;
    std::vector<std::optional<int>> labels(g.labels().begin(), g.labels().end());
    return Graph(g.num_nodes(), std::move(edges), std::move(labels), Connectivity::not_required);
}

/// Indices of edges with both endpoints in `nodes`.
inline std::vector<std::size_t> induced_edges(const Graph& g, std::span<const NodeId> nodes) {
    std::vector<char> keep(g.num_nodes(), 0);
    for (NodeId v : nodes) keep.at(v) = 1;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < g.num_edges(); ++i)
        if (keep[g.edge(i).u] && keep[g.edge(i).v]) out.push_back(i);
    return out;
}

}  // namespace otc
