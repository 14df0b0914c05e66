#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "otc/detail/simplex.hpp"
#include "otc/error.hpp"
#include "otc/graph.hpp"

namespace otc {

enum class TransportStatus { optimal, infeasible };

/// Optimal flows and potentials for W(rho0, rho1).
///
/// `jplus[e]` is flow along the stored orientation of edge e (tail -> head of
/// its incidence row), `jminus[e]` flow against it; net flow satisfies
/// F^T (jplus - jminus) = rho1 - rho0. Directed edges never carry jminus.
struct TransportSolution {
    TransportStatus status = TransportStatus::infeasible;
    Convention convention = Convention::oriented;
    std::vector<double> jplus;
    std::vector<double> jminus;
    std::vector<double> potentials;
    double primal_value = 0.0;
    double dual_value = 0.0;
    std::vector<std::size_t> active_edges;
    /// Largest per-node rounding error introduced by the fixed-point mass grid.
    double quantization_error = 0.0;

    bool optimal() const { return status == TransportStatus::optimal; }
};

inline constexpr std::int64_t kMassUnits = 1'000'000'000;
inline constexpr double kActiveTolerance = 1e-9;

namespace detail {

/// Rounds a distribution onto an integer grid summing to `units`, by largest remainder.
inline std::vector<std::int64_t> quantize_mass(std::span<const double> p, std::int64_t units) {
    const double mass = std::accumulate(p.begin(), p.end(), 0.0);
    std::vector<std::int64_t> q(p.size());
    std::vector<std::pair<double, std::size_t>> rem(p.size());
    std::int64_t total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double scaled = p[i] / mass * static_cast<double>(units);
        q[i] = static_cast<std::int64_t>(std::floor(scaled));
        rem[i] = {scaled - static_cast<double>(q[i]), i};
        total += q[i];
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    // floor() never overshoots, so only a deficit of at most p.size() units remains.
    for (std::size_t j = 0; total < units; ++j, ++total) ++q[rem[j % rem.size()].second];
    return q;
}

/// Successive shortest paths on the directed expansion of the graph
/// (undirected edge -> two antiparallel uncapacitated arcs). Node potentials
/// are maintained so reduced costs stay nonnegative; they end up dual-feasible.
class SuccessiveShortestPaths {
  public:
    SuccessiveShortestPaths(const Graph& g, const IncidenceMatrix& F) : n_(g.num_nodes()), adj_(g.num_nodes()) {
        plus_arc_.resize(g.num_edges());
        minus_arc_.assign(g.num_edges(), kNone);
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
            const auto& row = F.row(e);
            plus_arc_[e] = add_arc(row.tail, row.head, g.edge(e).cost);
            if (g.edge(e).kind == EdgeKind::undirected) minus_arc_[e] = add_arc(row.head, row.tail, g.edge(e).cost);
        }
    }

    /// supply[v] > 0 is mass leaving v. Returns false if some deficit is unreachable.
    bool solve(std::vector<std::int64_t> supply) {
        potential_.assign(n_, 0.0);
        std::vector<double> dist(n_);
        std::vector<std::size_t> pred_arc(n_);
        std::vector<char> done(n_);
        using Item = std::pair<double, NodeId>;
        std::size_t guard = 0;
        const std::size_t guard_limit = 50 * (n_ + arcs_.size()) * (n_ + 1) + 1000;
        while (true) {
            bool any = std::any_of(supply.begin(), supply.end(), [](std::int64_t s) { return s > 0; });
            if (!any) return true;
            if (++guard > guard_limit) throw SolverError("min-cost flow exceeded its augmentation limit");

            std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
            std::fill(pred_arc.begin(), pred_arc.end(), kNone);
            std::fill(done.begin(), done.end(), 0);
            std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
            for (NodeId v = 0; v < n_; ++v)
                if (supply[v] > 0) {
                    dist[v] = 0.0;
                    heap.emplace(0.0, v);
                }
            NodeId sink = kNone;
            while (!heap.empty()) {
                auto [d, v] = heap.top();
                heap.pop();
                if (done[v]) continue;
                done[v] = 1;
                if (supply[v] < 0 && sink == kNone) sink = v;
                for (std::size_t a : adj_[v]) {
                    const Arc& arc = arcs_[a];
                    if (arc.cap <= 0) continue;
                    double reduced = std::max(0.0, arc.cost + potential_[v] - potential_[arc.to]);
                    if (d + reduced < dist[arc.to]) {
                        dist[arc.to] = d + reduced;
                        pred_arc[arc.to] = a;
                        heap.emplace(dist[arc.to], arc.to);
                    }
                }
            }
            if (sink == kNone) return false;
            const double dsink = dist[sink];
            for (NodeId v = 0; v < n_; ++v) potential_[v] += std::min(dist[v], dsink);

            std::int64_t delta = -supply[sink];
            NodeId v = sink;
            while (pred_arc[v] != kNone) {
                const Arc& arc = arcs_[pred_arc[v]];
                delta = std::min(delta, arc.cap);
                v = arcs_[arc.rev].to;
            }
            delta = std::min(delta, supply[v]);
            const NodeId source = v;
            v = sink;
            while (pred_arc[v] != kNone) {
                Arc& arc = arcs_[pred_arc[v]];
                arc.cap -= delta;
                arcs_[arc.rev].cap += delta;
                v = arcs_[arc.rev].to;
            }
            supply[source] -= delta;
            supply[sink] += delta;
        }
    }

    /// Net flow along the stored orientation of edge e, in mass units.
    std::int64_t net_flow(std::size_t e) const {
        std::int64_t f = arcs_[arcs_[plus_arc_[e]].rev].cap;
        if (minus_arc_[e] != kNone) f -= arcs_[arcs_[minus_arc_[e]].rev].cap;
        return f;
    }

    const std::vector<double>& potentials() const { return potential_; }

  private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    static constexpr std::int64_t kInfCap = std::numeric_limits<std::int64_t>::max() / 4;

    struct Arc {
        NodeId to;
        std::int64_t cap;
        double cost;
        std::size_t rev;
    };

    std::size_t add_arc(NodeId from, NodeId to, double cost) {
        std::size_t a = arcs_.size();
        arcs_.push_back({to, kInfCap, cost, a + 1});
        arcs_.push_back({from, 0, -cost, a});
        adj_[from].push_back(a);
        adj_[to].push_back(a + 1);
        return a;
    }

    std::size_t n_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::size_t> plus_arc_;
    std::vector<std::size_t> minus_arc_;
    std::vector<double> potential_;
};

inline void finalize_solution(TransportSolution& sol, const Graph& g, std::span<const double> net) {
    sol.jplus.assign(g.num_edges(), 0.0);
    sol.jminus.assign(g.num_edges(), 0.0);
    sol.primal_value = 0.0;
    sol.active_edges.clear();
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        // Opposite flows on one edge cancel; only the net amount is ever kept.
        sol.jplus[e] = std::max(net[e], 0.0);
        sol.jminus[e] = std::max(-net[e], 0.0);
        sol.primal_value += g.edge(e).cost * (sol.jplus[e] + sol.jminus[e]);
        if (sol.jplus[e] + sol.jminus[e] > kActiveTolerance) sol.active_edges.push_back(e);
    }
}

}  // namespace detail

/// Exact transport distance W(rho0, rho1) on a (mixed) graph.
///
/// Oriented convention: min-cost flow by successive shortest paths on a
/// 1e9-unit mass grid. As-written convention: dense LP.
inline TransportSolution ot_distance(const Graph& g, const NodeDistribution& rho0, const NodeDistribution& rho1,
                                     Convention convention = Convention::oriented) {
    const std::size_t n = g.num_nodes();
    if (rho0.size() != n || rho1.size() != n) throw InputError("distribution length does not match node count");
    if (!rho0.in_simplex() || !rho1.in_simplex()) throw InputError("transport endpoints must be probability vectors");

    const IncidenceMatrix F = build_incidence(g, convention);
    TransportSolution sol;
    sol.convention = convention;

    if (convention == Convention::oriented) {
        auto a = detail::quantize_mass(rho0.values(), kMassUnits);
        auto b = detail::quantize_mass(rho1.values(), kMassUnits);
        std::vector<std::int64_t> supply(n);
        for (std::size_t v = 0; v < n; ++v) {
            supply[v] = a[v] - b[v];
            const double unit = static_cast<double>(kMassUnits);
            sol.quantization_error =
                std::max({sol.quantization_error, std::abs(static_cast<double>(a[v]) / unit - rho0[v]),
                          std::abs(static_cast<double>(b[v]) / unit - rho1[v])});
        }
        detail::SuccessiveShortestPaths ssp(g, F);
        if (!ssp.solve(supply)) {
            sol.status = TransportStatus::infeasible;
            return sol;
        }
        std::vector<double> net(g.num_edges());
        for (std::size_t e = 0; e < g.num_edges(); ++e)
            net[e] = static_cast<double>(ssp.net_flow(e)) / static_cast<double>(kMassUnits);
        detail::finalize_solution(sol, g, net);
        sol.potentials = ssp.potentials();
        const double shift = *std::min_element(sol.potentials.begin(), sol.potentials.end());
        for (double& t : sol.potentials) t -= shift;
        sol.dual_value = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            sol.dual_value += sol.potentials[v] * static_cast<double>(b[v] - a[v]) / static_cast<double>(kMassUnits);
        sol.status = TransportStatus::optimal;
        return sol;
    }

    // As-written convention: columns are (J+_e, J-_e) with F^T (J+ - J-) = rho1 - rho0.
    std::vector<std::size_t> column_edge;
    std::vector<double> column_sign;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        column_edge.push_back(e);
        column_sign.push_back(1.0);
        if (g.edge(e).kind == EdgeKind::undirected) {
            column_edge.push_back(e);
            column_sign.push_back(-1.0);
        }
    }
    const auto cols = static_cast<Eigen::Index>(column_edge.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), cols);
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    Eigen::VectorXd c(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const auto& row = F.row(column_edge[static_cast<std::size_t>(j)]);
        const double s = column_sign[static_cast<std::size_t>(j)];
        A(static_cast<Eigen::Index>(row.tail), j) += s * row.tail_value;
        A(static_cast<Eigen::Index>(row.head), j) += s * row.head_value;
        c(j) = g.edge(column_edge[static_cast<std::size_t>(j)]).cost;
    }
    for (std::size_t v = 0; v < n; ++v) b(static_cast<Eigen::Index>(v)) = rho1[v] - rho0[v];
    auto lp = detail::solve_standard_lp(A, b, c);
    if (lp.status == detail::LpStatus::infeasible) {
        sol.status = TransportStatus::infeasible;
        return sol;
    }
    if (lp.status != detail::LpStatus::optimal) throw SolverError("as-written transport LP did not terminate");
    std::vector<double> net(g.num_edges(), 0.0);
    for (std::size_t j = 0; j < column_edge.size(); ++j) net[column_edge[j]] += column_sign[j] * lp.x[j];
    detail::finalize_solution(sol, g, net);
    sol.potentials = lp.y;
    sol.dual_value = 0.0;
    for (std::size_t v = 0; v < n; ++v) sol.dual_value += sol.potentials[v] * (rho1[v] - rho0[v]);
    sol.status = TransportStatus::optimal;
    return sol;
}

/// Largest violation of the dual constraints -c <= F t <= c (upper side only
/// for directed edges), together with the offending edge.
struct DualFeasibility {
    double max_violation = 0.0;
    std::size_t worst_edge = 0;
};

inline DualFeasibility dual_feasibility(const Graph& g, std::span<const double> t,
                                        Convention convention = Convention::oriented) {
    const IncidenceMatrix F = build_incidence(g, convention);
    DualFeasibility out;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const double ft = F.apply_row(e, t);
        const double c = g.edge(e).cost;
        double viol = ft - c;
        if (g.edge(e).kind == EdgeKind::undirected) viol = std::max(viol, -c - ft);
        if (viol > out.max_violation) out = {viol, e};
    }
    return out;
}

/// t^T (rho1 - rho0) for dual-feasible potentials t.
inline double dual_objective(const Graph& g, std::span<const double> t, const NodeDistribution& rho0,
                             const NodeDistribution& rho1, Convention convention = Convention::oriented,
                             double tol = 1e-9) {
    if (t.size() != g.num_nodes() || rho0.size() != g.num_nodes() || rho1.size() != g.num_nodes())
        throw InputError("dual_objective: size mismatch");
    auto feas = dual_feasibility(g, t, convention);
    if (feas.max_violation > tol) {
        const Edge& e = g.edge(feas.worst_edge);
        throw InputError("potentials violate the dual constraint on edge " + std::to_string(feas.worst_edge) + " (" +
                         std::to_string(e.u) + "," + std::to_string(e.v) + ") by " +
                         std::to_string(feas.max_violation));
    }
    double value = 0.0;
    for (std::size_t v = 0; v < t.size(); ++v) value += t[v] * (rho1[v] - rho0[v]);
    return value;
}

struct TightnessViolation {
    std::size_t edge;
    double ft;
    double cost;
};

struct TightnessReport {
    std::vector<TightnessViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Every active edge must have |F t(e)| = c(e).
inline TightnessReport check_active_tightness(const TransportSolution& sol, const Graph& g, double tol = 1e-6) {
    TightnessReport report;
    if (!sol.optimal()) return report;
    const IncidenceMatrix F = build_incidence(g, sol.convention);
    for (std::size_t e : sol.active_edges) {
        const double ft = F.apply_row(e, sol.potentials);
        if (std::abs(std::abs(ft) - g.edge(e).cost) > tol) report.violations.push_back({e, ft, g.edge(e).cost});
    }
    return report;
}

/// Wasserstein-1 under the shortest-path metric induced by the edge costs,
/// computed as a dense transportation LP. Independent check of the oriented
/// convention; meant for graphs with at most a dozen nodes.
inline double w1_oracle(const Graph& g, const NodeDistribution& rho0, const NodeDistribution& rho1) {
    const std::size_t n = g.num_nodes();
    if (n > 12) throw InputError("w1_oracle is limited to 12 nodes");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
    for (const Edge& e : g.edges()) {
        d[e.u][e.v] = std::min(d[e.u][e.v], e.cost);
        if (e.kind == EdgeKind::undirected) d[e.v][e.u] = std::min(d[e.v][e.u], e.cost);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (d[i][j] < inf) pairs.emplace_back(i, j);
    const auto cols = static_cast<Eigen::Index>(pairs.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n), cols);
    Eigen::VectorXd b(static_cast<Eigen::Index>(2 * n));
    Eigen::VectorXd c(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        auto [src, dst] = pairs[static_cast<std::size_t>(j)];
        A(static_cast<Eigen::Index>(src), j) = 1.0;
        A(static_cast<Eigen::Index>(n + dst), j) = 1.0;
        c(j) = d[src][dst];
    }
    for (std::size_t v = 0; v < n; ++v) {
        b(static_cast<Eigen::Index>(v)) = rho0[v];
        b(static_cast<Eigen::Index>(n + v)) = rho1[v];
    }
    auto lp = detail::solve_standard_lp(A, b, c);
    if (lp.status != detail::LpStatus::optimal) throw SolverError("w1_oracle: transportation LP not solved");
    return lp.objective;
}

}  // namespace otc
