#include <gtest/gtest.h>

#include "otc/compressor.hpp"
#include "otc/io/generators.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace otc;
using namespace otc::testkit;
using testkit::max_abs_diff;
using io::make_three_weight_tree;

namespace {

double objective(const Graph& g, const NodeDistribution& rho0, const std::vector<double>& rho1, double lambda) {
    auto sol = ot_distance(g, rho0, NodeDistribution(rho1));
    double sq = 0.0;
    for (double x : rho1) sq += x * x;
    return sol.primal_value + 0.5 * lambda * sq;
}

}  // namespace

TEST(Psi, MatchesReferenceFormula) {
    testkit::Rng rng(10);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = testkit::uniform_index(rng, 1, 9);
        auto eps = testkit::random_vector(rng, n, 0, 1);
        auto t = testkit::random_vector(rng, n, -2, 2);
        const double zeta = testkit::uniform(rng, -1, 1), lambda = testkit::uniform(rng, 0.1, 3);
        auto rho0 = testkit::random_simplex(rng, n);
        EXPECT_NEAR(psi_value(eps, t, zeta, rho0, lambda), psi_reference(eps, t, zeta, rho0.values(), lambda), 1e-12);
    }
}

TEST(Psi, GradientsMatchFiniteDifferences) {
    testkit::Rng rng(11);
    const double h = 1e-6;
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 6;
        auto eps = testkit::random_vector(rng, n, 0, 1);
        auto t = testkit::random_vector(rng, n, -2, 2);
        const double zeta = testkit::uniform(rng, -1, 1), lambda = testkit::uniform(rng, 0.2, 2);
        auto rho0 = testkit::random_simplex(rng, n);
        bool near_kink = false;
        for (std::size_t v = 0; v < n; ++v) near_kink |= std::abs(t[v] + zeta) < 1e-4;
        if (near_kink) continue;
        const auto r = rho0.values();
        auto g = psi_gradients(eps, t, zeta, rho0, lambda);
        for (std::size_t v = 0; v < n; ++v) {
            auto ep = eps, em = eps, tp = t, tm = t;
            ep[v] += h;
            em[v] -= h;
            tp[v] += h;
            tm[v] -= h;
            EXPECT_NEAR(g.epsilon[v], (psi_reference(ep, t, zeta, r, lambda) - psi_reference(em, t, zeta, r, lambda)) / (2 * h), 1e-5);
            EXPECT_NEAR(g.t[v], (psi_reference(eps, tp, zeta, r, lambda) - psi_reference(eps, tm, zeta, r, lambda)) / (2 * h), 1e-5);
        }
        EXPECT_NEAR(g.zeta, (psi_reference(eps, t, zeta + h, r, lambda) - psi_reference(eps, t, zeta - h, r, lambda)) / (2 * h), 1e-5);
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(Psi, ConcaveInPotentialsLinearInSelector) {
    testkit::Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = testkit::uniform_index(rng, 1, 8);
        auto rho0 = testkit::random_simplex(rng, n);
        auto eps = testkit::random_vector(rng, n, 0, 1), eps2 = testkit::random_vector(rng, n, 0, 1);
        auto t1 = testkit::random_vector(rng, n, -2, 2), t2 = testkit::random_vector(rng, n, -2, 2);
        const double z1 = testkit::uniform(rng, -1, 1), z2 = testkit::uniform(rng, -1, 1);
        std::vector<double> tm(n), em(n);
        for (std::size_t v = 0; v < n; ++v) {
            tm[v] = 0.5 * (t1[v] + t2[v]);
            em[v] = 0.5 * (eps[v] + eps2[v]);
        }
        const double mid = psi_value(eps, tm, 0.5 * (z1 + z2), rho0, 1.0);
        EXPECT_GE(mid, 0.5 * (psi_value(eps, t1, z1, rho0, 1.0) + psi_value(eps, t2, z2, rho0, 1.0)) - 1e-12);
        EXPECT_NEAR(psi_value(em, t1, z1, rho0, 1.0),
                    0.5 * (psi_value(eps, t1, z1, rho0, 1.0) + psi_value(eps2, t1, z1, rho0, 1.0)), 1e-12);
    }
}

TEST(MirrorProx, IteratesStayFeasible) {
    testkit::Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = testkit::uniform_index(rng, 3, 12);
        Graph g = testkit::random_connected_graph(rng, n);
        auto rho0 = stationary_prior(g);
        const std::size_t k = testkit::uniform_index(rng, 1, n);
        MirrorProxOptions opt;
        opt.iterations = 40;
        auto res = mirror_prox(g, rho0, k, opt);
        ASSERT_EQ(res.trace.size(), 41u);
        double sum = 0.0;
        for (double e : res.state.epsilon) {
            EXPECT_GE(e, -1e-12);
            EXPECT_LE(e, 1.0 + 1e-12);
            sum += e;
        }
        EXPECT_LE(sum, static_cast<double>(k) + 1e-9);
        EXPECT_LE(detail::max_slab_violation(g, build_incidence(g, Convention::oriented), res.state.t), 1e-8);
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
            EXPECT_GE(res.trace[i].gap, -1e-12);
            if (i > 0) EXPECT_LE(res.trace[i].best_gap, res.trace[i - 1].best_gap);
        }
        double avg_sum = 0.0;
        for (double e : res.epsilon_avg) avg_sum += e;
        EXPECT_LE(avg_sum, static_cast<double>(k) + 1e-9);
    }
}

TEST(MirrorProx, RejectsBadArguments) {
    Graph g(3, {{0, 1}, {1, 2}});
    auto rho0 = stationary_prior(g);
    EXPECT_THROW(mirror_prox(g, rho0, 0), InputError);
    EXPECT_THROW(mirror_prox(g, rho0, 4), InputError);
    MirrorProxOptions opt;
    opt.iterations = 0;
    EXPECT_THROW(mirror_prox(g, rho0, 1, opt), InputError);
    opt.iterations = 5;
    opt.lambda = 0.0;
    EXPECT_THROW(mirror_prox(g, rho0, 1, opt), InputError);
}

TEST(MirrorProx, BacktrackingKeepsRunsFinite) {
    Graph g = make_three_weight_tree();
    MirrorProxOptions opt;
    opt.iterations = 50;
    opt.steps = {5.0, 5.0, 5.0};
    opt.backtracking = true;
    auto res = mirror_prox(g, stationary_prior(g), 5, opt);
    EXPECT_LT(res.state.steps.alpha, 5.0);
    for (double e : res.epsilon_avg) EXPECT_TRUE(std::isfinite(e));
}

TEST(RoundTopK, TieBreaking) {
    NodeDistribution rho0({0.1, 0.3, 0.3, 0.2, 0.1});
    std::vector<double> eps{0.5, 0.5, 0.5, 0.9, 0.0};
    EXPECT_EQ(round_topk(eps, 2, rho0), (std::vector<NodeId>{1, 3}));
    EXPECT_EQ(round_topk(eps, 3, rho0), (std::vector<NodeId>{1, 2, 3}));
    EXPECT_EQ(round_topk(eps, 5, rho0), (std::vector<NodeId>{0, 1, 2, 3}));
}

TEST(Recover, RenormalizesNearUnitMass) {
    Graph g(3, {{0, 1}, {1, 2}});
    NodeDistribution rho0({0.25, 0.5, 0.25});
    std::vector<double> eps{1, 1, 0}, t{-0.51, -0.51, 5.0};
    auto r = recover_rho1(g, rho0, eps, t, 0.0, 1.0);
    EXPECT_FALSE(r.fallback);
    EXPECT_NEAR(r.raw_mass, 1.02, 1e-12);
    EXPECT_NEAR(r.rho1[0], 0.5, 1e-12);
    EXPECT_EQ(r.rho1[2], 0.0);
}

TEST(Recover, FallsBackOutsideBand) {
    Graph g(3, {{0, 1}, {1, 2}});
    NodeDistribution rho0({0.25, 0.5, 0.25});
    std::vector<double> eps{1, 1, 0}, t{-1.0, -1.0, 0.0};
    auto r = recover_rho1(g, rho0, eps, t, 0.0, 1.0);
    EXPECT_TRUE(r.fallback);
    EXPECT_FALSE(r.degenerate);
    auto exact = solve_restricted(g, rho0, std::vector<NodeId>{0, 1}, 1.0);
    EXPECT_LE(max_abs_diff(r.rho1.values(), exact.rho1), 1e-12);
}

TEST(Recover, DegenerateZeroMass) {
    Graph g(3, {{0, 1}, {1, 2}});
    NodeDistribution rho0({0.25, 0.5, 0.25});
    std::vector<double> eps{0, 1, 0}, t{0.0, 0.0, 0.0};
    auto r = recover_rho1(g, rho0, eps, t, 0.5, 1.0);
    EXPECT_TRUE(r.degenerate);
    EXPECT_TRUE(r.fallback);
    EXPECT_NEAR(r.rho1[1], 1.0, 1e-12);
    std::vector<double> fractional{0.5, 1, 0};
    EXPECT_THROW(recover_rho1(g, rho0, fractional, t, 0.0, 1.0), InputError);
}

TEST(Restricted, OptimalityAndDualConsistency) {
    testkit::Rng rng(14);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = testkit::uniform_index(rng, 2, 7);
        Graph g = testkit::random_connected_graph(rng, n);
        auto rho0 = testkit::random_simplex(rng, n, 0.2);
        const double lambda = testkit::uniform(rng, 0.2, 3.0);
        std::vector<NodeId> support;
        for (NodeId v = 0; v < n; ++v)
            if (testkit::uniform(rng, 0, 1) < 0.6) support.push_back(v);
        if (support.empty()) support.push_back(0);
        auto sol = solve_restricted(g, rho0, support, lambda);
        ASSERT_TRUE(sol.converged);
        double mass = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            mass += sol.rho1[v];
            if (std::find(support.begin(), support.end(), v) == support.end()) EXPECT_EQ(sol.rho1[v], 0.0);
        }
        EXPECT_NEAR(mass, 1.0, 1e-12);
        EXPECT_NEAR(sol.value, objective(g, rho0, sol.rho1, lambda), 1e-7);
        EXPECT_LE(dual_feasibility(g, sol.potentials, Convention::oriented).max_violation, 1e-7);
        for (NodeId v : support) EXPECT_NEAR(sol.rho1[v], std::max(-sol.potentials[v], 0.0) / lambda, 1e-6);
        // No random point supported on S does better.
        for (int probe = 0; probe < 20; ++probe) {
            const auto w = testkit::random_simplex(rng, support.size(), 0.3);
            std::vector<double> cand(n, 0.0);
            for (std::size_t i = 0; i < support.size(); ++i) cand[support[i]] = w[i];
            EXPECT_LE(sol.value, objective(g, rho0, cand, lambda) + 1e-8);
        }
    }
}

TEST(BruteForce, TwoNodeTieListsBothSingletons) {
    Graph g(2, {{0, 1}});
    NodeDistribution rho0({0.5, 0.5});
    auto bf = compress_bruteforce(g, rho0, 1, 1.0);
    EXPECT_NEAR(bf.value, 1.0, 1e-9);
    ASSERT_EQ(bf.optimal_supports.size(), 2u);
    EXPECT_EQ(bf.optimal_supports[0], (std::vector<NodeId>{0}));
    EXPECT_EQ(bf.optimal_supports[1], (std::vector<NodeId>{1}));
}

TEST(BruteForce, StarKeepsHub) {
    Graph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    auto bf = compress_bruteforce(star, stationary_prior(star), 1, 1.0);
    EXPECT_EQ(bf.support, (std::vector<NodeId>{0}));
    EXPECT_EQ(bf.optimal_supports.size(), 1u);
    EXPECT_THROW(compress_bruteforce(make_three_weight_tree(), stationary_prior(make_three_weight_tree()), 3, 1.0), InputError);
}

TEST(Certify, PathWithInteriorPrior) {
    Graph path(4, {{0, 1}, {1, 2}, {2, 3}});
    NodeDistribution rho0({0.0, 0.5, 0.5, 0.0});
    auto good = certify(path, rho0, std::vector<NodeId>{1, 2}, 1.0);
    ASSERT_TRUE(good.exact()) << good.reason;
    EXPECT_NEAR(good.gamma, 0.25, 1e-6);
    auto bad = certify(path, rho0, std::vector<NodeId>{0, 3}, 1.0);
    EXPECT_FALSE(bad.exact());
    EXPECT_FALSE(bad.reason.empty());
}

TEST(Certify, FullSupport) {
    Graph g(3, {{0, 1}, {1, 2}});
    NodeDistribution rho0({0.2, 0.5, 0.3});
    auto c = certify(g, rho0, std::vector<NodeId>{0, 1, 2}, 2.0);
    ASSERT_TRUE(c.exact()) << c.reason;
    EXPECT_NEAR(c.gamma, 0.5 * 2.0 * 0.2, 1e-6);
}

TEST(Certify, ExactSupportsMatchBruteForce) {
    testkit::Rng rng(15);
    int exact = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = testkit::uniform_index(rng, 3, 6);
        Graph g = testkit::random_connected_graph(rng, n);
        auto rho0 = testkit::random_simplex(rng, n, 0.5);
        const std::size_t k = testkit::uniform_index(rng, 1, n);
        CompressOptions opt;
        opt.iterations = 100;
        auto rep = compress(g, rho0, k, opt);
        if (!rep.certificate.exact()) continue;
        ++exact;
        auto bf = compress_bruteforce(g, rho0, rep.support.size(), opt.lambda);
        EXPECT_NE(std::find(bf.optimal_supports.begin(), bf.optimal_supports.end(), rep.support),
                  bf.optimal_supports.end());
    }
    EXPECT_GT(exact, 0);
}

TEST(Compress, RecoveredPairIsTight) {
    testkit::Rng rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = testkit::uniform_index(rng, 3, 10);
        Graph g = testkit::random_connected_graph(rng, n);
        auto rho0 = stationary_prior(g);
        const std::size_t k = testkit::uniform_index(rng, 1, n);
        auto rep = compress(g, rho0, k);
        EXPECT_LE(rep.support.size(), k);
        EXPECT_TRUE(rep.rho1.in_simplex());
        for (NodeId v = 0; v < n; ++v)
            if (std::find(rep.support.begin(), rep.support.end(), v) == rep.support.end()) EXPECT_EQ(rep.rho1[v], 0.0);
        auto sol = ot_distance(g, rho0, rep.rho1);
        ASSERT_TRUE(sol.optimal());
        EXPECT_TRUE(check_active_tightness(sol, g).ok());
        ASSERT_TRUE(rep.transport_cost.has_value());
        EXPECT_NEAR(*rep.transport_cost, sol.primal_value, 1e-12);
    }
}

TEST(Compress, ThreeWeightTreeKeepsRootAndInternalNodes) {
    Graph g = make_three_weight_tree();
    CompressOptions opt;
    opt.iterations = 200;
    auto rep = compress(g, stationary_prior(g), 5, opt);
    EXPECT_EQ(rep.support, (std::vector<NodeId>{0, 1, 2, 3, 4}));
    EXPECT_EQ(rep.kept_edges.size(), 4u);
}

TEST(Compress, FullBudgetReproducesPrior) {
    Graph g = make_three_weight_tree();
    auto rho0 = stationary_prior(g);
    auto rep = compress(g, rho0, g.num_nodes());
    EXPECT_EQ(rep.support.size(), g.num_nodes());
    EXPECT_LE(max_abs_diff(rep.rho1.values(), rho0.values()), 1e-9);
    ASSERT_TRUE(rep.transport_cost.has_value());
    EXPECT_NEAR(*rep.transport_cost, 0.0, 1e-9);
    EXPECT_TRUE(rep.certificate.exact());
}
