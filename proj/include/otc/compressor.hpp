#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otc/detail/qp_ipm.hpp"
#include "otc/detail/simplex.hpp"
#include "otc/error.hpp"
#include "otc/graph.hpp"
#include "otc/projections.hpp"
#include "otc/transport.hpp"

namespace otc {

struct StepSizes {
    double alpha = 0.1;  // selector (descent)
    double beta = 0.1;   // potentials (ascent)
    double gamma = 0.1;  // mass multiplier (ascent)
};

/// Iterate of the saddle-point solver: relaxed selector, potentials, and the
/// scalar multiplier of the unit-mass constraint.
struct SaddleState {
    std::vector<double> epsilon;
    std::vector<double> t;
    double zeta = 0.0;
    StepSizes steps;
    std::size_t iteration = 0;
};

struct PsiGradient {
    std::vector<double> epsilon;
    std::vector<double> t;
    double zeta = 0.0;
};

namespace detail {

inline void check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be positive and finite");
}

}  // namespace detail

/// psi(eps, t, zeta) = -(1/2 lambda) sum_{t_v <= -zeta} (eps_v (t_v + zeta)^2 + 2 lambda t_v rho0_v)
///                     - sum_{t_v > -zeta} t_v rho0_v - zeta.
inline double psi_value(std::span<const double> eps, std::span<const double> t, double zeta,
                        const NodeDistribution& rho0, double lambda) {
    detail::check_lambda(lambda);
    if (eps.size() != t.size() || t.size() != rho0.size()) throw InputError("psi_value: size mismatch");
    double value = -zeta;
    for (std::size_t v = 0; v < t.size(); ++v) {
        const double s = t[v] + zeta;
        value -= t[v] * rho0[v];
        if (s <= 0.0) value -= eps[v] * s * s / (2.0 * lambda);
    }
    return value;
}

inline double psi_value(const SaddleState& state, const NodeDistribution& rho0, double lambda) {
    return psi_value(state.epsilon, state.t, state.zeta, rho0, lambda);
}

inline PsiGradient psi_gradients(std::span<const double> eps, std::span<const double> t, double zeta,
                                 const NodeDistribution& rho0, double lambda) {
    detail::check_lambda(lambda);
    if (eps.size() != t.size() || t.size() != rho0.size()) throw InputError("psi_gradients: size mismatch");
    PsiGradient g;
    g.epsilon.assign(t.size(), 0.0);
    g.t.assign(t.size(), 0.0);
    g.zeta = -1.0;
    for (std::size_t v = 0; v < t.size(); ++v) {
        const double s = t[v] + zeta;
        g.t[v] = -rho0[v];
        if (s <= 0.0) {
            g.epsilon[v] = -s * s / (2.0 * lambda);
            g.t[v] -= eps[v] * s / lambda;
            g.zeta -= eps[v] * s / lambda;
        }
    }
    return g;
}

inline PsiGradient psi_gradients(const SaddleState& state, const NodeDistribution& rho0, double lambda) {
    return psi_gradients(state.epsilon, state.t, state.zeta, rho0, lambda);
}

struct MirrorProxOptions {
    double lambda = 1.0;
    std::size_t iterations = 25;
    StepSizes steps;
    Convention convention = Convention::oriented;
    /// Halve all step sizes whenever the extragradient step looks too long.
    bool backtracking = false;
    double zeta_limit = 1e6;
};

struct TraceEntry {
    std::size_t iteration = 0;
    double psi = 0.0;
    /// psi at the gradient-step point minus its minimum over the relaxed
    /// selector set with (t, zeta) held fixed.
    double gap = 0.0;
    double best_gap = 0.0;
};

struct MirrorProxResult {
    SaddleState state;
    std::vector<double> epsilon_avg;
    std::vector<TraceEntry> trace;
};

namespace detail {

/// min over {eps in [0,1]^n, sum eps <= k} of psi, with (t, zeta) fixed.
inline double psi_min_over_selectors(std::span<const double> t, double zeta, const NodeDistribution& rho0,
                                     double lambda, std::size_t k) {
    const std::vector<double> zero(t.size(), 0.0);
    const PsiGradient g = psi_gradients(zero, t, zeta, rho0, lambda);
    std::vector<double> coeff = g.epsilon;
    std::sort(coeff.begin(), coeff.end());
    double value = psi_value(zero, t, zeta, rho0, lambda);
    for (std::size_t i = 0; i < std::min(k, coeff.size()); ++i) value += std::min(coeff[i], 0.0);
    return value;
}

inline void check_finite(std::span<const double> v, const char* what, std::size_t iteration) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw SolverError(std::string("mirror prox: non-finite ") + what + "[" + std::to_string(i) +
                              "] at iteration " + std::to_string(iteration));
}

}  // namespace detail

/// Projected extragradient on psi: descent in the selector over the capped
/// box, ascent in the potentials over the slab set, unprojected ascent in zeta.
/// Runs iterations 0..T and returns the alpha-weighted average of the
/// gradient-step selectors from iterations 1..T.
inline MirrorProxResult mirror_prox(const Graph& g, const NodeDistribution& rho0, std::size_t k,
                                    const MirrorProxOptions& opt = {}) {
    const std::size_t n = g.num_nodes();
    detail::check_lambda(opt.lambda);
    if (rho0.size() != n) throw InputError("prior length does not match node count");
    if (k < 1 || k > n) throw InputError("budget k must satisfy 1 <= k <= |V|");
    if (opt.iterations < 1) throw InputError("iteration count must be at least 1");
    StepSizes steps = opt.steps;
    if (!(steps.alpha > 0 && steps.beta > 0 && steps.gamma > 0)) throw InputError("step sizes must be positive");

    const double budget = static_cast<double>(k);
    MirrorProxResult out;
    SaddleState& s = out.state;
    s.epsilon.assign(n, budget / static_cast<double>(n));
    s.t.assign(n, 0.0);
    s.zeta = 0.0;

    std::vector<double> avg(n, 0.0);
    double weight = 0.0;
    double best_gap = std::numeric_limits<double>::infinity();
    std::vector<double> buf(n);

    auto descend = [&](std::span<const double> base, std::span<const double> grad, double step) {
        for (std::size_t v = 0; v < n; ++v) buf[v] = base[v] - step * grad[v];
        return project_capped_box(buf, budget);
    };
    auto ascend = [&](std::span<const double> base, std::span<const double> grad, double step) {
        for (std::size_t v = 0; v < n; ++v) buf[v] = base[v] + step * grad[v];
        return project_slabs(buf, g, opt.convention);
    };

    for (std::size_t l = 0; l <= opt.iterations; ++l) {
        const PsiGradient g0 = psi_gradients(s, rho0, opt.lambda);
        std::vector<double> eps_h, t_h, eps_n, t_n;
        double zeta_h = 0.0, zeta_n = 0.0;
        while (true) {
            eps_h = descend(s.epsilon, g0.epsilon, steps.alpha);
            t_h = ascend(s.t, g0.t, steps.beta);
            zeta_h = s.zeta + steps.gamma * g0.zeta;
            const PsiGradient g1 = psi_gradients(eps_h, t_h, zeta_h, rho0, opt.lambda);
            if (opt.backtracking) {
                double move = 0.0, change = 0.0;
                for (std::size_t v = 0; v < n; ++v) {
                    move += std::pow(eps_h[v] - s.epsilon[v], 2) + std::pow(t_h[v] - s.t[v], 2);
                    change += std::pow(steps.alpha * (g1.epsilon[v] - g0.epsilon[v]), 2) +
                              std::pow(steps.beta * (g1.t[v] - g0.t[v]), 2);
                }
                move += std::pow(zeta_h - s.zeta, 2);
                change += std::pow(steps.gamma * (g1.zeta - g0.zeta), 2);
                if (change > 0.81 * move && steps.alpha > 1e-12) {
                    steps.alpha *= 0.5;
                    steps.beta *= 0.5;
                    steps.gamma *= 0.5;
                    continue;
                }
            }
            eps_n = descend(s.epsilon, g1.epsilon, steps.alpha);
            t_n = ascend(s.t, g1.t, steps.beta);
            zeta_n = s.zeta + steps.gamma * g1.zeta;
            break;
        }
        detail::check_finite(eps_n, "epsilon", l);
        detail::check_finite(t_n, "t", l);
        if (!std::isfinite(zeta_n) || std::abs(zeta_n) > opt.zeta_limit)
            throw SolverError("mirror prox: zeta diverged to " + std::to_string(zeta_n) + " at iteration " +
                              std::to_string(l));

        if (l >= 1) {
            for (std::size_t v = 0; v < n; ++v) avg[v] += steps.alpha * eps_h[v];
            weight += steps.alpha;
        }
        TraceEntry entry;
        entry.iteration = l;
        entry.psi = psi_value(eps_h, t_h, zeta_h, rho0, opt.lambda);
        entry.gap = entry.psi - detail::psi_min_over_selectors(t_h, zeta_h, rho0, opt.lambda, k);
        best_gap = std::min(best_gap, entry.gap);
        entry.best_gap = best_gap;
        out.trace.push_back(entry);

        s.epsilon = std::move(eps_n);
        s.t = std::move(t_n);
        s.zeta = zeta_n;
        s.iteration = l + 1;
    }
    s.steps = steps;
    for (double& v : avg) v /= weight;
    out.epsilon_avg = std::move(avg);
    return out;
}

/// Up to k node ids with the largest averaged selector value; ties go to the
/// larger prior mass, then the smaller id. Zero entries are never selected.
/// Returned in increasing id order.
inline std::vector<NodeId> round_topk(std::span<const double> epsilon_avg, std::size_t k,
                                      const NodeDistribution& rho0) {
    if (rho0.size() != epsilon_avg.size()) throw InputError("round_topk: size mismatch");
    std::vector<NodeId> order;
    for (NodeId v = 0; v < epsilon_avg.size(); ++v)
        if (epsilon_avg[v] > 0.0) order.push_back(v);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        if (epsilon_avg[a] != epsilon_avg[b]) return epsilon_avg[a] > epsilon_avg[b];
        if (rho0[a] != rho0[b]) return rho0[a] > rho0[b];
        return a < b;
    });
    if (order.size() > k) order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

/// Optimum of the compression objective with the support restricted to a
/// fixed node set: min over rho1 in the simplex, supp(rho1) in S, of
/// W(rho0, rho1) + lambda/2 ||rho1||^2. Potentials are the node multipliers,
/// gauged so that zeta = 0, i.e. rho1_v = max(-t_v, 0) / lambda on S.
struct RestrictedSolution {
    bool converged = false;
    std::vector<double> rho1;
    std::vector<double> potentials;
    double zeta = 0.0;
    double value = 0.0;
    double transport_cost = 0.0;
};

inline RestrictedSolution solve_restricted(const Graph& g, const NodeDistribution& rho0, std::span<const NodeId> support,
                                           double lambda, Convention convention = Convention::oriented) {
    detail::check_lambda(lambda);
    const std::size_t n = g.num_nodes();
    if (support.empty()) throw InputError("restricted solve needs a nonempty support");
    const IncidenceMatrix F = build_incidence(g, convention);

    std::size_t flow_cols = 0;
    for (const Edge& e : g.edges()) flow_cols += e.kind == EdgeKind::undirected ? 2 : 1;
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(flow_cols + support.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd b(rows), c = Eigen::VectorXd::Zero(cols), h = Eigen::VectorXd::Zero(cols);
    Eigen::Index j = 0;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto& r = F.row(e);
        const int sides = g.edge(e).kind == EdgeKind::undirected ? 2 : 1;
        for (int side = 0; side < sides; ++side, ++j) {
            const double sign = side == 0 ? 1.0 : -1.0;
            A(static_cast<Eigen::Index>(r.tail), j) += sign * r.tail_value;
            A(static_cast<Eigen::Index>(r.head), j) += sign * r.head_value;
            c(j) = g.edge(e).cost;
        }
    }
    for (NodeId v : support) {
        if (v >= n) throw InputError("support node " + std::to_string(v) + " out of range");
        A(static_cast<Eigen::Index>(v), j) = -1.0;
        h(j) = lambda;
        ++j;
    }
    for (std::size_t v = 0; v < n; ++v) b(static_cast<Eigen::Index>(v)) = -rho0[v];

    const auto qp = detail::solve_diagonal_qp(A, b, c, h);
    RestrictedSolution out;
    out.converged = qp.converged;
    out.rho1.assign(n, 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        double x = qp.x(static_cast<Eigen::Index>(flow_cols + i));
        if (x < 1e-12) x = 0.0;
        out.rho1[support[i]] = x;
        mass += x;
    }
    if (mass > 0.0)
        for (double& x : out.rho1) x /= mass;
    out.potentials.assign(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) out.potentials[v] = qp.y(static_cast<Eigen::Index>(v));
    out.transport_cost = c.head(static_cast<Eigen::Index>(flow_cols)).dot(qp.x.head(static_cast<Eigen::Index>(flow_cols)));
    double sq = 0.0;
    for (double x : out.rho1) sq += x * x;
    out.value = out.transport_cost + 0.5 * lambda * sq;
    return out;
}

/// rho1 recovered from a binary selector and the potentials:
/// rho1_v = (eps_v / lambda) * max(-(t_v + zeta), 0).
inline std::vector<double> recover_rho1_raw(std::span<const double> eps, std::span<const double> t, double zeta,
                                            double lambda) {
    detail::check_lambda(lambda);
    if (eps.size() != t.size()) throw InputError("recover_rho1: size mismatch");
    std::vector<double> rho(t.size());
    for (std::size_t v = 0; v < t.size(); ++v) rho[v] = eps[v] / lambda * std::max(-(t[v] + zeta), 0.0);
    return rho;
}

inline constexpr double kRenormalizeBand = 0.05;

struct RecoveredRho1 {
    NodeDistribution rho1;
    double raw_mass = 0.0;
    bool degenerate = false;
    bool fallback = false;
};

/// Applies the recovery formula and renormalizes when the raw mass is within
/// 5% of one. Otherwise (including the all-zero case) the support is re-solved
/// exactly with solve_restricted.
inline RecoveredRho1 recover_rho1(const Graph& g, const NodeDistribution& rho0, std::span<const double> eps,
                                  std::span<const double> t, double zeta, double lambda,
                                  Convention convention = Convention::oriented) {
    for (double e : eps)
        if (e != 0.0 && e != 1.0) throw InputError("recover_rho1 expects a binary selector");
    std::vector<double> raw = recover_rho1_raw(eps, t, zeta, lambda);
    RecoveredRho1 out;
    out.raw_mass = std::accumulate(raw.begin(), raw.end(), 0.0);
    out.degenerate = !(out.raw_mass > 0.0);
    if (!out.degenerate && std::abs(out.raw_mass - 1.0) <= kRenormalizeBand) {
        for (double& x : raw) x /= out.raw_mass;
        out.rho1 = NodeDistribution(std::move(raw));
        return out;
    }
    out.fallback = true;
    std::vector<NodeId> support;
    for (NodeId v = 0; v < eps.size(); ++v)
        if (eps[v] == 1.0) support.push_back(v);
    auto sol = solve_restricted(g, rho0, support, lambda, convention);
    if (!sol.converged) throw SolverError("recover_rho1: restricted re-solve did not converge");
    out.rho1 = NodeDistribution(std::move(sol.rho1));
    return out;
}

inline constexpr double kCertificateMargin = 1e-6;

struct Certificate {
    enum class Status { exact, not_certified };
    Status status = Status::not_certified;
    double gamma = 0.0;
    /// min over the support of |t - nu + zeta| minus max over the complement.
    double separation = 0.0;
    std::string reason;

    bool exact() const { return status == Status::exact; }
};

/// Checks whether the Boolean relaxation with budget |support| provably
/// recovers `support`.
///
/// The restricted problem is solved to high accuracy; its multipliers fix
/// t - nu + zeta on the support (there it equals -lambda * rho1). Over the
/// remaining optimal face an LP minimizes the largest off-support value
/// max(-(t_v + zeta), 0), which is the best nu can do there. Exact(gamma) is
/// returned when the two sides are separated by at least 1e-6.
inline Certificate certify(const Graph& g, const NodeDistribution& rho0, std::span<const NodeId> support,
                           double lambda, Convention convention = Convention::oriented) {
    detail::check_lambda(lambda);
    const std::size_t n = g.num_nodes();
    if (support.empty()) throw InputError("certify needs a nonempty support");
    std::vector<char> in_support(n, 0);
    for (NodeId v : support) {
        if (v >= n) throw InputError("support node out of range");
        in_support[v] = 1;
    }

    Certificate cert;
    const RestrictedSolution sol = solve_restricted(g, rho0, support, lambda, convention);
    if (!sol.converged) {
        cert.reason = "solver";
        return cert;
    }
    double in_min = std::numeric_limits<double>::infinity();
    for (NodeId v : support) {
        if (sol.rho1[v] <= 1e-7) {
            cert.reason = "node " + std::to_string(v) + " carries no mass at the restricted optimum";
            return cert;
        }
        in_min = std::min(in_min, lambda * sol.rho1[v]);
    }

    std::vector<NodeId> outside;
    for (NodeId v = 0; v < n; ++v)
        if (!in_support[v]) outside.push_back(v);

    double out_max = 0.0;
    if (!outside.empty()) {
        // Variables: x_v = t_v + offset for v outside (x >= 0), then sigma >= 0.
        const std::vector<double>& t = sol.potentials;
        double lowest = std::numeric_limits<double>::infinity();
        for (NodeId v : support) lowest = std::min(lowest, t[v]);
        const double offset = std::abs(lowest) + 2.0 * g.total_cost() + 10.0;
        std::vector<std::size_t> var(n, 0);
        for (std::size_t i = 0; i < outside.size(); ++i) var[outside[i]] = i;
        const std::size_t sigma = outside.size();
        detail::LpBuilder lp(outside.size() + 1);
        lp.set_cost(sigma, 1.0);

        const IncidenceMatrix F = build_incidence(g, convention);
        using Sense = detail::LpBuilder::Sense;
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
            const auto& r = F.row(e);
            if (in_support[r.tail] && in_support[r.head]) continue;
            std::vector<std::pair<std::size_t, double>> terms;
            double constant = 0.0;
            for (auto [node, coef] : {std::pair{r.tail, r.tail_value}, std::pair{r.head, r.head_value}}) {
                if (in_support[node]) {
                    constant += coef * t[node];
                } else {
                    terms.emplace_back(var[node], coef);
                    constant -= coef * offset;
                }
            }
            lp.add_row(terms, Sense::le, g.edge(e).cost - constant);
            if (g.edge(e).kind == EdgeKind::undirected) lp.add_row(terms, Sense::ge, -g.edge(e).cost - constant);
        }
        std::vector<std::pair<std::size_t, double>> face;
        double face_rhs = 0.0;
        for (NodeId v : outside) {
            if (rho0[v] > 0.0) {
                face.emplace_back(var[v], rho0[v]);
                face_rhs += rho0[v] * (t[v] + offset);
            }
        }
        if (!face.empty()) lp.add_row(face, Sense::le, face_rhs + 1e-9 * (1.0 + std::abs(face_rhs)));
        for (NodeId v : outside) lp.add_row({{var[v], 1.0}, {sigma, 1.0}}, Sense::ge, offset);

        const auto res = lp.solve();
        if (res.status != detail::LpStatus::optimal) {
            cert.reason = "solver";
            return cert;
        }
        out_max = std::max(0.0, res.x[sigma]);
    }
    cert.separation = in_min - out_max;
    if (cert.separation >= kCertificateMargin) {
        cert.status = Certificate::Status::exact;
        cert.gamma = 0.5 * (in_min + out_max);
    } else {
        cert.reason = "separation margin " + std::to_string(cert.separation) + " below 1e-6";
    }
    return cert;
}

struct BruteForceResult {
    std::vector<NodeId> support;
    std::vector<double> rho1;
    double value = 0.0;
    /// Positive supports of every subset whose value ties the optimum.
    std::vector<std::vector<NodeId>> optimal_supports;
};

/// Exhaustive reference for the compression problem on small graphs: solves
/// the restricted problem for every node set of size min(k, |V|).
inline BruteForceResult compress_bruteforce(const Graph& g, const NodeDistribution& rho0, std::size_t k,
                                            double lambda, Convention convention = Convention::oriented) {
    const std::size_t n = g.num_nodes();
    if (n > 10) throw InputError("compress_bruteforce supports at most 10 nodes");
    if (k < 1) throw InputError("budget k must be at least 1");
    const std::size_t size = std::min(k, n);

    struct Candidate {
        double value;
        std::vector<NodeId> support;
        std::vector<double> rho1;
    };
    std::vector<Candidate> all;
    std::vector<NodeId> subset(size);
    std::iota(subset.begin(), subset.end(), NodeId{0});
    while (true) {
        auto sol = solve_restricted(g, rho0, subset, lambda, convention);
        if (!sol.converged) throw SolverError("compress_bruteforce: restricted solve did not converge");
        std::vector<NodeId> positive;
        for (NodeId v = 0; v < n; ++v)
            if (sol.rho1[v] > 1e-7) positive.push_back(v);
        all.push_back({sol.value, std::move(positive), std::move(sol.rho1)});
        // Next combination in lexicographic order.
        std::size_t i = size;
        while (i > 0 && subset[i - 1] == n - size + (i - 1)) --i;
        if (i == 0) break;
        ++subset[i - 1];
        for (std::size_t j = i; j < size; ++j) subset[j] = subset[j - 1] + 1;
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : all) best = std::min(best, c.value);
    BruteForceResult out;
    out.value = best;
    const double tie = 1e-9 * (1.0 + std::abs(best));
    for (const auto& c : all) {
        if (c.value > best + tie) continue;
        if (out.support.empty()) {
            out.support = c.support;
            out.rho1 = c.rho1;
        }
        if (std::find(out.optimal_supports.begin(), out.optimal_supports.end(), c.support) ==
            out.optimal_supports.end())
            out.optimal_supports.push_back(c.support);
    }
    return out;
}

struct CompressOptions {
    double lambda = 1.0;
    std::size_t iterations = 25;
    StepSizes steps;
    Convention convention = Convention::oriented;
    bool backtracking = false;
};

struct CompressionReport {
    std::size_t k = 0;
    CompressOptions options;
    std::vector<NodeId> support;
    std::vector<std::size_t> kept_edges;
    NodeDistribution rho1;
    std::vector<double> epsilon_avg;
    std::vector<TraceEntry> trace;
    SaddleState final_state;
    Certificate certificate;
    std::optional<double> transport_cost;
    double raw_mass = 0.0;
    bool recovery_fallback = false;
    bool recovery_degenerate = false;
    double wall_time_seconds = 0.0;
};

/// Full pipeline: Mirror Prox, top-k rounding, rho1 recovery, induced
/// subgraph, certificate, and the transport cost of the recovered pair.
inline CompressionReport compress(const Graph& g, const NodeDistribution& rho0, std::size_t k,
                                  const CompressOptions& opt = {}) {
    const auto start = std::chrono::steady_clock::now();
    if (!rho0.in_simplex()) throw InputError("prior must be a probability distribution");

    MirrorProxOptions mp;
    mp.lambda = opt.lambda;
    mp.iterations = opt.iterations;
    mp.steps = opt.steps;
    mp.convention = opt.convention;
    mp.backtracking = opt.backtracking;
    MirrorProxResult run = mirror_prox(g, rho0, k, mp);

    CompressionReport rep;
    rep.k = k;
    rep.options = opt;
    rep.support = round_topk(run.epsilon_avg, k, rho0);
    if (rep.support.empty()) throw SolverError("compress: averaged selector is identically zero");
    std::vector<double> selector(g.num_nodes(), 0.0);
    for (NodeId v : rep.support) selector[v] = 1.0;

    auto rec = recover_rho1(g, rho0, selector, run.state.t, run.state.zeta, opt.lambda, opt.convention);
    rep.rho1 = std::move(rec.rho1);
    rep.raw_mass = rec.raw_mass;
    rep.recovery_fallback = rec.fallback;
    rep.recovery_degenerate = rec.degenerate;
    rep.kept_edges = induced_edges(g, rep.support);
    rep.certificate = certify(g, rho0, rep.support, opt.lambda, opt.convention);
    auto transport = ot_distance(g, rho0, rep.rho1, opt.convention);
    if (transport.optimal()) rep.transport_cost = transport.primal_value;

    rep.epsilon_avg = std::move(run.epsilon_avg);
    rep.trace = std::move(run.trace);
    rep.final_state = std::move(run.state);
    rep.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace otc
