#pragma once

// Dense two-phase primal simplex with Bland's rule. Intended for the small
// LPs in this library (a few hundred variables at most).

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace otc::detail {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::iteration_limit;
    std::vector<double> x;  // primal solution
    std::vector<double> y;  // equality-row duals: c - A^T y >= 0 at optimum
    double objective = 0.0;
};

/// min c^T x  s.t.  A x = b,  x >= 0.
inline LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                  int max_iterations = 200000) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    constexpr double kPivotTol = 1e-10;
    constexpr double kCostTol = 1e-12;

    // Tableau columns: n structural, m artificial, 1 rhs.
    const Eigen::Index rhs = n + m;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, n + m + 1);
    std::vector<double> row_sign(static_cast<std::size_t>(m), 1.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        double s = b(i) < 0 ? -1.0 : 1.0;
        row_sign[static_cast<std::size_t>(i)] = s;
        T.block(i, 0, 1, n) = s * A.row(i);
        T(i, n + i) = 1.0;
        T(i, rhs) = s * b(i);
    }
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

    Eigen::VectorXd obj(n + m + 1);
    auto load_objective = [&](const Eigen::VectorXd& cost) {
        obj.setZero();
        obj.head(n + m) = cost;
        for (Eigen::Index i = 0; i < m; ++i) {
            double cb = cost(basis[static_cast<std::size_t>(i)]);
            if (cb != 0.0) obj -= cb * T.row(i).transpose();
        }
    };
    auto pivot = [&](Eigen::Index r, Eigen::Index col) {
        T.row(r) /= T(r, col);
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i != r && T(i, col) != 0.0) T.row(i) -= T(i, col) * T.row(r);
        }
        if (obj(col) != 0.0) obj -= obj(col) * T.row(r).transpose();
        basis[static_cast<std::size_t>(r)] = col;
    };

    int iterations = 0;
    auto run = [&](Eigen::Index allowed_columns) -> LpStatus {
        while (true) {
            if (++iterations > max_iterations) return LpStatus::iteration_limit;
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed_columns; ++j) {
                if (obj(j) < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::optimal;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m; ++i) {
                if (T(i, enter) > kPivotTol) {
                    double ratio = T(i, rhs) / T(i, enter);
                    bool take = leave < 0 || ratio < best - 1e-14 ||
                                (ratio <= best + 1e-14 &&
                                 basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)]);
                    if (take) {
                        best = std::min(best, ratio);
                        leave = i;
                    }
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            pivot(leave, enter);
        }
    };

    LpResult result;
    // Phase 1.
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n + m);
    phase1_cost.tail(m).setOnes();
    load_objective(phase1_cost);
    LpStatus st = run(n + m);
    if (st == LpStatus::iteration_limit) {
        result.status = st;
        return result;
    }
    double infeasibility = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        if (basis[static_cast<std::size_t>(i)] >= n) infeasibility += T(i, rhs);
    if (infeasibility > 1e-9 * (1.0 + b.lpNorm<1>())) {
        result.status = LpStatus::infeasible;
        return result;
    }
    // Drive remaining artificials out of the basis; rows that cannot be pivoted are redundant.
    for (Eigen::Index i = 0; i < m; ++i) {
        if (basis[static_cast<std::size_t>(i)] < n) continue;
        Eigen::Index col = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(T(i, j)) > 1e-9) {
                col = j;
                break;
            }
        }
        if (col >= 0) pivot(i, col);
    }

    // Phase 2.
    Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(n + m);
    phase2_cost.head(n) = c;
    load_objective(phase2_cost);
    st = run(n);
    result.status = st;
    if (st != LpStatus::optimal) return result;

    result.x.assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index j = basis[static_cast<std::size_t>(i)];
        if (j < n) result.x[static_cast<std::size_t>(j)] = std::max(0.0, T(i, rhs));
    }
    result.y.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
        result.y[static_cast<std::size_t>(i)] = -obj(n + i) * row_sign[static_cast<std::size_t>(i)];
    result.objective = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) result.objective += c(j) * result.x[static_cast<std::size_t>(j)];
    return result;
}

/// Small helper for LPs with inequality rows. Variables are nonnegative.
class LpBuilder {
  public:
    enum class Sense { le, ge, eq };

    explicit LpBuilder(std::size_t num_vars) : cost_(num_vars, 0.0) {}

    void set_cost(std::size_t j, double c) { cost_[j] = c; }

    void add_row(std::vector<std::pair<std::size_t, double>> terms, Sense sense, double rhs) {
        rows_.push_back({std::move(terms), sense, rhs});
    }

    LpResult solve() const {
        std::size_t slacks = 0;
        for (const auto& r : rows_)
            if (r.sense != Sense::eq) ++slacks;
        const auto m = static_cast<Eigen::Index>(rows_.size());
        const auto n = static_cast<Eigen::Index>(cost_.size() + slacks);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
        Eigen::VectorXd b(m);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        for (std::size_t j = 0; j < cost_.size(); ++j) c(static_cast<Eigen::Index>(j)) = cost_[j];
        Eigen::Index slack = static_cast<Eigen::Index>(cost_.size());
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& r = rows_[static_cast<std::size_t>(i)];
            for (const auto& [j, a] : r.terms) A(i, static_cast<Eigen::Index>(j)) += a;
            if (r.sense == Sense::le) A(i, slack++) = 1.0;
            if (r.sense == Sense::ge) A(i, slack++) = -1.0;
            b(i) = r.rhs;
        }
        LpResult res = solve_standard_lp(A, b, c);
        if (res.status == LpStatus::optimal) res.x.resize(cost_.size());
        return res;
    }

  private:
    struct Row {
        std::vector<std::pair<std::size_t, double>> terms;
        Sense sense;
        double rhs;
    };
    std::vector<double> cost_;
    std::vector<Row> rows_;
};

}  // namespace otc::detail
