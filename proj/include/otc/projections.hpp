#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otc/error.hpp"
#include "otc/graph.hpp"

namespace otc {

/// Weights below this are treated as exact zeros when splitting indices.
inline constexpr double kZeroWeight = 1e-15;

/// Diagonal of the transformation in the weighted simplex projection:
/// entries in [0, 1], not all zero.
class DiagonalWeights {
  public:
    explicit DiagonalWeights(std::vector<double> eps) : eps_(std::move(eps)) {
        bool any_positive = false;
        for (std::size_t j = 0; j < eps_.size(); ++j) {
            if (!(eps_[j] >= 0.0 && eps_[j] <= 1.0))
                throw InputError("weight " + std::to_string(j) + " is outside [0, 1]");
            if (eps_[j] < kZeroWeight) eps_[j] = 0.0;
            any_positive |= eps_[j] > 0.0;
        }
        if (!any_positive) throw InputError("weights are all zero; the feasible set is empty");
    }

    std::size_t size() const { return eps_.size(); }
    double operator[](std::size_t j) const { return eps_[j]; }
    std::span<const double> values() const { return eps_; }

    std::vector<std::size_t> positive_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < eps_.size(); ++j)
            if (eps_[j] > 0.0) out.push_back(j);
        return out;
    }

  private:
    std::vector<double> eps_;
};

/// Euclidean projection of y onto {x : x (.) eps in the probability simplex}.
///
/// Sorts the positive-weight coordinates by y_j / eps_j (non-increasing, stable
/// on index), finds the largest prefix whose candidate value stays positive,
/// and shifts by the resulting multiplier. Zero-weight coordinates are
/// unconstrained and returned unchanged. O(d log d).
inline std::vector<double> project_diag_simplex(std::span<const double> y, const DiagonalWeights& eps) {
    if (y.size() != eps.size()) throw InputError("project_diag_simplex: size mismatch");
    std::vector<std::size_t> order = eps.positive_indices();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] / eps[a] > y[b] / eps[b]; });

    double sum_ey = 0.0;
    double sum_ee = 0.0;
    double alpha = 0.0;
    std::size_t ell = 0;
    for (std::size_t j = 0; j < order.size(); ++j) {
        const double yj = y[order[j]];
        const double ej = eps[order[j]];
        sum_ey += ej * yj;
        sum_ee += ej * ej;
        const double a = (1.0 - sum_ey) / sum_ee;
        if (yj + ej * a > 0.0) {
            ell = j + 1;
            alpha = a;
        }
    }
    // The first candidate equals 1/eps > 0, so the prefix is never empty.
    if (ell == 0) throw SolverError("project_diag_simplex: no positive prefix (non-finite input?)");

    std::vector<double> x(y.begin(), y.end());
    for (std::size_t j : order) x[j] = std::max(y[j] + alpha * eps[j], 0.0);
    return x;
}

/// Exhaustive reference for project_diag_simplex: tries every candidate
/// positive support and keeps the closest feasible stationary point.
inline std::vector<double> project_diag_simplex_oracle(std::span<const double> y, const DiagonalWeights& eps) {
    const std::size_t d = y.size();
    if (d != eps.size()) throw InputError("project_diag_simplex_oracle: size mismatch");
    if (d > 12) throw InputError("project_diag_simplex_oracle supports d <= 12");
    const std::vector<std::size_t> pos = eps.positive_indices();
    std::vector<double> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 1; mask < (std::size_t{1} << pos.size()); ++mask) {
        double sum_ey = 0.0, sum_ee = 0.0;
        for (std::size_t i = 0; i < pos.size(); ++i)
            if (mask >> i & 1U) {
                sum_ey += eps[pos[i]] * y[pos[i]];
                sum_ee += eps[pos[i]] * eps[pos[i]];
            }
        const double alpha = (1.0 - sum_ey) / sum_ee;
        std::vector<double> x(y.begin(), y.end());
        bool feasible = true;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            const std::size_t j = pos[i];
            if (mask >> i & 1U) {
                x[j] = y[j] + alpha * eps[j];
                feasible &= x[j] >= -1e-12;
                x[j] = std::max(x[j], 0.0);
            } else {
                x[j] = 0.0;
            }
        }
        if (!feasible) continue;
        double dist = 0.0;
        for (std::size_t j = 0; j < d; ++j) dist += (x[j] - y[j]) * (x[j] - y[j]);
        if (dist < best_dist) {
            best_dist = dist;
            best = std::move(x);
        }
    }
    return best;
}

/// Euclidean projection onto {x in [0,1]^d : sum x <= budget}.
///
/// If clipping to the box already meets the budget that is the answer;
/// otherwise sum clip(y - tau, 0, 1) = budget is solved exactly by sweeping
/// the sorted breakpoints {y_j - 1, y_j}.
inline std::vector<double> project_capped_box(std::span<const double> y, double budget) {
    const std::size_t d = y.size();
    if (!(budget >= 1.0) || budget > static_cast<double>(d))
        throw InputError("project_capped_box: budget must lie in [1, d]");
    auto clip = [](double v) { return std::clamp(v, 0.0, 1.0); };

    double f = 0.0;
    double slope = 0.0;
    std::vector<std::pair<double, double>> events;
    events.reserve(2 * d);
    for (double yj : y) {
        if (!std::isfinite(yj)) throw InputError("project_capped_box: non-finite input");
        f += clip(yj);
        if (yj - 1.0 <= 0.0 && yj > 0.0) slope -= 1.0;
        if (yj - 1.0 > 0.0) events.emplace_back(yj - 1.0, -1.0);
        if (yj > 0.0) events.emplace_back(yj, +1.0);
    }
    std::vector<double> x(d);
    if (f <= budget) {
        std::transform(y.begin(), y.end(), x.begin(), clip);
        return x;
    }
    std::sort(events.begin(), events.end());
    double tau = 0.0;
    double shift = 0.0;
    bool found = false;
    for (const auto& [point, delta] : events) {
        const double f_next = f + slope * (point - tau);
        if (f_next <= budget) {
            shift = tau + (f - budget) / (-slope);
            found = true;
            break;
        }
        f = f_next;
        tau = point;
        slope += delta;
    }
    if (!found) shift = tau;
    for (std::size_t j = 0; j < d; ++j) x[j] = clip(y[j] - shift);
    return x;
}

namespace detail {

/// Half-space a^T t <= b with a = sign * (incidence row of `edge`).
struct SlabConstraint {
    std::size_t edge;
    double sign;
    double bound;
};

inline std::vector<SlabConstraint> slab_constraints(const Graph& g) {
    std::vector<SlabConstraint> out;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        out.push_back({e, 1.0, g.edge(e).cost});
        if (g.edge(e).kind == EdgeKind::undirected) out.push_back({e, -1.0, g.edge(e).cost});
    }
    return out;
}

inline double max_slab_violation(const Graph& g, const IncidenceMatrix& F, std::span<const double> t) {
    double worst = 0.0;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const double ft = F.apply_row(e, t);
        worst = std::max(worst, ft - g.edge(e).cost);
        if (g.edge(e).kind == EdgeKind::undirected) worst = std::max(worst, -ft - g.edge(e).cost);
    }
    return worst;
}

}  // namespace detail

/// Projection onto the slab set by Dykstra's alternating projections.
/// Slower than project_slabs, kept as the fallback path and a reference.
inline std::vector<double> project_slabs_dykstra(std::span<const double> y, const Graph& g,
                                                 Convention convention = Convention::oriented, double tol = 1e-13,
                                                 std::size_t max_sweeps = 200000) {
    const IncidenceMatrix F = build_incidence(g, convention);
    std::vector<double> t(y.begin(), y.end());
    // One increment per edge: both sides of a slab form a single convex set.
    std::vector<std::array<double, 2>> incr(g.num_edges(), {0.0, 0.0});
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
            const auto& r = F.row(e);
            const double lo = g.edge(e).kind == EdgeKind::undirected ? -g.edge(e).cost
                                                                      : -std::numeric_limits<double>::infinity();
            const double hi = g.edge(e).cost;
            const double pt = t[r.tail] + incr[e][0];
            const double ph = t[r.head] + incr[e][1];
            const double ft = r.tail_value * pt + r.head_value * ph;
            const double target = std::clamp(ft, lo, hi);
            const double norm2 = r.tail_value * r.tail_value + r.head_value * r.head_value;
            const double step = (ft - target) / norm2;
            const double nt = pt - step * r.tail_value;
            const double nh = ph - step * r.head_value;
            incr[e] = {pt - nt, ph - nh};
            change = std::max({change, std::abs(nt - t[r.tail]), std::abs(nh - t[r.head])});
            t[r.tail] = nt;
            t[r.head] = nh;
        }
        if (change < tol) return t;
    }
    throw SolverError("project_slabs_dykstra did not converge");
}

/// Euclidean projection of y onto {t : -c <= F t <= c} (only the upper side
/// for directed edges).
///
/// Dual active-set method (Goldfarb-Idnani with identity Hessian): starts from
/// the unconstrained minimizer y, repeatedly adds the most violated half-space
/// and drops constraints whose multipliers would turn negative. Terminates
/// finitely with an exact solution up to rounding; falls back to Dykstra if the
/// active set cycles.
inline std::vector<double> project_slabs(std::span<const double> y, const Graph& g,
                                         Convention convention = Convention::oriented) {
    const std::size_t n = g.num_nodes();
    if (y.size() != n) throw InputError("project_slabs: size mismatch");
    const IncidenceMatrix F = build_incidence(g, convention);
    const auto cons = detail::slab_constraints(g);

    auto dot_rows = [&](const detail::SlabConstraint& a, const detail::SlabConstraint& b) {
        const auto& ra = F.row(a.edge);
        const auto& rb = F.row(b.edge);
        double s = 0.0;
        if (ra.tail == rb.tail) s += ra.tail_value * rb.tail_value;
        if (ra.tail == rb.head) s += ra.tail_value * rb.head_value;
        if (ra.head == rb.tail) s += ra.head_value * rb.tail_value;
        if (ra.head == rb.head) s += ra.head_value * rb.head_value;
        return a.sign * b.sign * s;
    };
    auto lhs = [&](const detail::SlabConstraint& a, std::span<const double> t) {
        return a.sign * F.apply_row(a.edge, t);
    };

    std::vector<double> t(y.begin(), y.end());
    std::vector<std::size_t> active;
    std::vector<double> mult;
    const double feas_tol = 1e-13;
    const std::size_t max_steps = 50 * (cons.size() + n) + 100;
    std::size_t steps = 0;
    bool stalled = false;

    while (!stalled) {
        std::size_t p = cons.size();
        double worst = feas_tol;
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const double scaled = (lhs(cons[i], t) - cons[i].bound) / (1.0 + cons[i].bound);
            if (scaled > worst) {
                worst = scaled;
                p = i;
            }
        }
        if (p == cons.size()) break;

        double mult_p = 0.0;
        while (true) {
            if (++steps > max_steps) {
                stalled = true;
                break;
            }
            const auto k = static_cast<Eigen::Index>(active.size());
            Eigen::VectorXd r = Eigen::VectorXd::Zero(k);
            if (k > 0) {
                Eigen::MatrixXd G(k, k);
                Eigen::VectorXd rhs(k);
                for (Eigen::Index i = 0; i < k; ++i) {
                    rhs(i) = dot_rows(cons[active[static_cast<std::size_t>(i)]], cons[p]);
                    for (Eigen::Index j = 0; j < k; ++j)
                        G(i, j) = dot_rows(cons[active[static_cast<std::size_t>(i)]],
                                           cons[active[static_cast<std::size_t>(j)]]);
                }
                r = G.ldlt().solve(rhs);
            }
            // Primal direction: n_p minus its projection on the active normals.
            std::vector<double> z(n, 0.0);
            auto add_normal = [&](const detail::SlabConstraint& c, double w) {
                const auto& row = F.row(c.edge);
                z[row.tail] += w * c.sign * row.tail_value;
                z[row.head] += w * c.sign * row.head_value;
            };
            add_normal(cons[p], 1.0);
            for (Eigen::Index i = 0; i < k; ++i) add_normal(cons[active[static_cast<std::size_t>(i)]], -r(i));
            double zn = 0.0;
            {
                const auto& row = F.row(cons[p].edge);
                zn = cons[p].sign * (row.tail_value * z[row.tail] + row.head_value * z[row.head]);
            }
            const double inf = std::numeric_limits<double>::infinity();
            const double full = zn > 1e-12 ? (lhs(cons[p], t) - cons[p].bound) / zn : inf;
            double partial = inf;
            std::size_t drop = active.size();
            for (std::size_t i = 0; i < active.size(); ++i) {
                if (r(static_cast<Eigen::Index>(i)) > 1e-12) {
                    const double ratio = mult[i] / r(static_cast<Eigen::Index>(i));
                    if (ratio < partial) {
                        partial = ratio;
                        drop = i;
                    }
                }
            }
            const double step = std::min(full, partial);
            if (step == inf) throw SolverError("project_slabs: constraints are inconsistent");
            if (full < inf)
                for (std::size_t v = 0; v < n; ++v) t[v] -= step * z[v];
            for (std::size_t i = 0; i < active.size(); ++i) mult[i] -= step * r(static_cast<Eigen::Index>(i));
            mult_p += step;
            if (full <= partial) {
                active.push_back(p);
                mult.push_back(mult_p);
                break;
            }
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
            mult.erase(mult.begin() + static_cast<std::ptrdiff_t>(drop));
        }
    }
    if (stalled || detail::max_slab_violation(g, F, t) > 1e-10) t = project_slabs_dykstra(y, g, convention);
    const double residual = detail::max_slab_violation(g, F, t);
    if (residual > 1e-8)
        throw SolverError("project_slabs: residual " + std::to_string(residual) + " exceeds 1e-8 after fallback");
    return t;
}

}  // namespace otc
