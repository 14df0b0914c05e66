#pragma once

// Mehrotra predictor-corrector interior point method for convex QPs with a
// diagonal Hessian:
//
//     min  1/2 sum_i h_i x_i^2 + c^T x   s.t.  A x = b,  x >= 0.
//
// A must have full row rank. Dense normal equations; sized for graphs with a
// few hundred edges. Once the iterate is close, the active set is guessed and
// the KKT system solved directly; the polished point is kept if it is primal
// and dual feasible.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace otc::detail {

struct QpResult {
    bool converged = false;
    bool polished = false;
    Eigen::VectorXd x;
    Eigen::VectorXd y;  // multipliers of A x = b
    Eigen::VectorXd z;  // multipliers of x >= 0
    double objective = 0.0;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double complementarity = 0.0;
};

namespace qp {

struct Point {
    Eigen::VectorXd x, y, z;
};

inline std::optional<Point> polish(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                   const Eigen::VectorXd& h, const Point& p, double tol) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    std::vector<Eigen::Index> basic;
    for (Eigen::Index j = 0; j < n; ++j)
        if (p.x(j) > p.z(j)) basic.push_back(j);
    const auto nb = static_cast<Eigen::Index>(basic.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nb + m, nb + m);
    Eigen::VectorXd rhs(nb + m);
    for (Eigen::Index a = 0; a < nb; ++a) {
        const Eigen::Index j = basic[static_cast<std::size_t>(a)];
        K(a, a) = h(j);
        K.block(0, nb, nb, m).row(a) = -A.col(j).transpose();
        K.block(nb, 0, m, nb).col(a) = A.col(j);
        rhs(a) = -c(j);
    }
    rhs.tail(m) = b;
    const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return std::nullopt;

    Point q;
    q.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < nb; ++a) q.x(basic[static_cast<std::size_t>(a)]) = sol(a);
    q.y = sol.tail(m);
    q.z = h.cwiseProduct(q.x) + c - A.transpose() * q.y;
    for (Eigen::Index j : basic) q.z(j) = 0.0;

    const double xscale = 1.0 + b.lpNorm<Eigen::Infinity>();
    const double cscale = 1.0 + c.lpNorm<Eigen::Infinity>();
    if (q.x.minCoeff() < -tol * xscale || q.z.minCoeff() < -tol * cscale) return std::nullopt;
    q.x = q.x.cwiseMax(0.0);
    q.z = q.z.cwiseMax(0.0);
    if ((b - A * q.x).lpNorm<Eigen::Infinity>() > tol * xscale) return std::nullopt;
    if ((h.cwiseProduct(q.x) + c - A.transpose() * q.y - q.z).lpNorm<Eigen::Infinity>() > tol * cscale)
        return std::nullopt;
    return q;
}

}  // namespace qp

inline QpResult solve_diagonal_qp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                  const Eigen::VectorXd& h, double tol = 1e-12, int max_iterations = 300) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    QpResult r;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd z = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

    const double bscale = 1.0 + b.lpNorm<Eigen::Infinity>();
    const double cscale = 1.0 + c.lpNorm<Eigen::Infinity>();

    auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
        double a = 1.0;
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
        return a;
    };
    auto finish = [&](const Eigen::VectorXd& xf, const Eigen::VectorXd& yf, const Eigen::VectorXd& zf) {
        r.x = xf;
        r.y = yf;
        r.z = zf;
        r.primal_residual = (b - A * xf).lpNorm<Eigen::Infinity>() / bscale;
        r.dual_residual = (h.cwiseProduct(xf) + c - A.transpose() * yf - zf).lpNorm<Eigen::Infinity>() / cscale;
        r.complementarity = xf.dot(zf) / static_cast<double>(n);
        r.objective = 0.5 * xf.dot(h.cwiseProduct(xf)) + c.dot(xf);
        return r;
    };

    std::optional<qp::Point> fallback;
    for (int it = 0; it < max_iterations; ++it) {
        r.iterations = it;
        Eigen::VectorXd rp = b - A * x;
        Eigen::VectorXd rd = h.cwiseProduct(x) + c - A.transpose() * y - z;
        const double mu = x.dot(z) / static_cast<double>(n);
        const double pres = rp.lpNorm<Eigen::Infinity>() / bscale;
        const double dres = rd.lpNorm<Eigen::Infinity>() / cscale;
        if (pres < 1e-9 && dres < 1e-9 && mu < 1e-9) {
            if (auto q = qp::polish(A, b, c, h, {x, y, z}, tol)) {
                r.converged = true;
                r.polished = true;
                return finish(q->x, q->y, q->z);
            }
        }
        if (pres < tol && dres < tol && mu < tol) {
            // Degenerate problems leave x of order sqrt(mu); keep going while it helps.
            if (!fallback) fallback = qp::Point{x, y, z};
            if (mu < tol * tol) break;
        }
        if (!x.allFinite() || !z.allFinite() || !y.allFinite()) break;

        Eigen::VectorXd d = (h + z.cwiseQuotient(x)).cwiseInverse();
        Eigen::MatrixXd M = A * d.asDiagonal() * A.transpose();
        M.diagonal().array() += 1e-14 * (1.0 + M.diagonal().maxCoeff());
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() != Eigen::Success) break;

        auto solve = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz) {
            Eigen::VectorXd hx = -rd + rc.cwiseQuotient(x);
            dy = ldlt.solve(rp - A * d.cwiseProduct(hx));
            dx = d.cwiseProduct(hx + A.transpose() * dy);
            // Refine against A dx = rp; the normal matrix is badly conditioned near the end.
            for (int pass = 0; pass < 3; ++pass) {
                Eigen::VectorXd res = rp - A * dx;
                if (res.lpNorm<Eigen::Infinity>() <= 1e-15 * bscale) break;
                Eigen::VectorXd corr = ldlt.solve(res);
                dy += corr;
                dx += d.cwiseProduct(A.transpose() * corr);
            }
            dz = (rc - z.cwiseProduct(dx)).cwiseQuotient(x);
        };

        Eigen::VectorXd dx, dy, dz;
        Eigen::VectorXd rc = -x.cwiseProduct(z);
        solve(rc, dx, dy, dz);
        double a_aff = std::min(max_step(x, dx), max_step(z, dz));
        double mu_aff = (x + a_aff * dx).dot(z + a_aff * dz) / static_cast<double>(n);
        double sigma = std::pow(mu_aff / mu, 3.0);

        rc = Eigen::VectorXd::Constant(n, sigma * mu) - x.cwiseProduct(z) - dx.cwiseProduct(dz);
        solve(rc, dx, dy, dz);
        double a = std::min(1.0, 0.995 * std::min(max_step(x, dx), max_step(z, dz)));
        x += a * dx;
        y += a * dy;
        z += a * dz;
        x = x.cwiseMax(1e-300);
        z = z.cwiseMax(1e-300);
    }
    if (fallback) {
        r.converged = true;
        return finish(fallback->x, fallback->y, fallback->z);
    }
    return finish(x, y, z);
}

}  // namespace otc::detail
