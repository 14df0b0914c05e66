#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "otc/projections.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace otc;
using namespace otc::testkit;
using testkit::max_abs_diff;

TEST(DiagSimplex, UnitWeightsGiveSimplexProjection) {
    std::vector<double> y{0.5, 0.2, -0.3};
    auto x = project_diag_simplex(y, DiagonalWeights({1, 1, 1}));
    // Standard simplex projection: threshold 0.15 over the first two entries.
    EXPECT_NEAR(x[0], 0.65, 1e-15);
    EXPECT_NEAR(x[1], 0.35, 1e-15);
    EXPECT_EQ(x[2], 0.0);
}

TEST(DiagSimplex, ZeroWeightsKeepInput) {
    std::vector<double> y{0.3, -4.0, 0.9};
    auto x = project_diag_simplex(y, DiagonalWeights({1.0, 0.0, 0.5}));
    EXPECT_EQ(x[1], -4.0);
    EXPECT_NEAR(1.0 * x[0] + 0.5 * x[2], 1.0, 1e-12);
}

TEST(DiagSimplex, RejectsAllZeroWeights) {
    EXPECT_THROW(DiagonalWeights({0.0, 0.0}), InputError);
    EXPECT_THROW(DiagonalWeights({0.5, 1.5}), InputError);
}

TEST(DiagSimplex, AgreesWithOracles) {
    testkit::Rng rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = testkit::uniform_index(rng, 1, 12);
        auto y = testkit::random_vector(rng, d, -2, 2);
        std::vector<double> eps(d);
        for (double& e : eps) e = testkit::uniform(rng, 0, 1) < 0.2 ? 0.0 : testkit::uniform(rng, 0.01, 1.0);
        if (std::all_of(eps.begin(), eps.end(), [](double e) { return e == 0.0; })) eps[0] = 0.7;
        const DiagonalWeights w(eps);
        auto x = project_diag_simplex(y, w);
        EXPECT_LE(max_abs_diff(x, project_diag_simplex_oracle(y, w)), 1e-8);
        EXPECT_LE(max_abs_diff(x, simplex_bisection(y, eps)), 1e-8);
        double mass = 0;
        for (std::size_t i = 0; i < d; ++i) {
            mass += eps[i] * x[i];
            if (eps[i] > 0) EXPECT_GE(x[i], 0.0);
        }
        EXPECT_NEAR(mass, 1.0, 1e-10);
    }
}

TEST(CappedBox, InteriorPointIsFixed) {
    std::vector<double> y{0.2, 0.3, 0.1};
    EXPECT_EQ(project_capped_box(y, 2.0), y);
}

TEST(CappedBox, AgreesWithBisection) {
    testkit::Rng rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = testkit::uniform_index(rng, 1, 15);
        auto y = testkit::random_vector(rng, d, -1, 2);
        const double budget = testkit::uniform(rng, 1.0, static_cast<double>(d));
        auto x = project_capped_box(y, budget);
        EXPECT_LE(max_abs_diff(x, box_bisection(y, budget)), 1e-9);
        double s = 0;
        for (double v : x) {
            EXPECT_GE(v, -1e-12);
            EXPECT_LE(v, 1.0 + 1e-12);
            s += v;
        }
        EXPECT_LE(s, budget + 1e-9);
    }
}

TEST(CappedBox, BudgetOutOfRange) {
    std::vector<double> y{0.2, 0.3};
    EXPECT_THROW(project_capped_box(y, 0.5), InputError);
    EXPECT_THROW(project_capped_box(y, 3.0), InputError);
}

TEST(CappedBox, NonexpansiveAndIdempotent) {
    testkit::Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = testkit::uniform_index(rng, 1, 10);
        const double budget = testkit::uniform(rng, 1.0, static_cast<double>(d));
        auto a = testkit::random_vector(rng, d, -1, 2), b = testkit::random_vector(rng, d, -1, 2);
        auto pa = project_capped_box(a, budget), pb = project_capped_box(b, budget);
        EXPECT_LE(norm_diff(pa, pb), norm_diff(a, b) + 1e-12);
        EXPECT_LE(max_abs_diff(project_capped_box(pa, budget), pa), 1e-12);
    }
}

TEST(Slabs, SingleEdgeByHand) {
    Graph g(2, {{0, 1, EdgeKind::undirected, 1.0}});
    auto x = project_slabs(std::vector<double>{0.0, 3.0}, g, Convention::oriented);
    EXPECT_NEAR(x[0], 1.0, 1e-12);
    EXPECT_NEAR(x[1], 2.0, 1e-12);
    auto w = project_slabs(std::vector<double>{1.0, 3.0}, g, Convention::as_written);
    EXPECT_NEAR(w[0], -0.5, 1e-12);
    EXPECT_NEAR(w[1], 1.5, 1e-12);
}

TEST(Slabs, DirectedEdgeHasOneSide) {
    Graph g(2, {{0, 1, EdgeKind::directed, 1.0}});
    std::vector<double> y{3.0, 0.0};  // t1 - t0 = -3 is allowed
    EXPECT_EQ(project_slabs(y, g, Convention::oriented), y);
}

TEST(Slabs, AgreesWithActiveSetOracleAndDykstra) {
    testkit::Rng rng(4);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = testkit::uniform_index(rng, 2, 5);
        Graph g = testkit::random_connected_graph(rng, n, 0.3, 0.1, 1.0, 0.3);
        if (g.num_edges() > 6) continue;
        for (auto conv : {Convention::oriented, Convention::as_written}) {
            auto y = testkit::random_vector(rng, n, -2, 2);
            auto x = project_slabs(y, g, conv);
            auto oracle = slab_active_set_oracle(y, g, conv);
            ASSERT_FALSE(oracle.empty());
            EXPECT_LE(max_abs_diff(x, oracle), 1e-6);
            EXPECT_LE(max_abs_diff(x, project_slabs_dykstra(y, g, conv)), 1e-6);
            const auto F = build_incidence(g, conv);
            EXPECT_LE(detail::max_slab_violation(g, F, x), 1e-8);
            ++checked;
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(Slabs, NonexpansiveAndIdempotentOnLargerGraphs) {
    testkit::Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = testkit::uniform_index(rng, 3, 25);
        Graph g = testkit::random_connected_graph(rng, n, 0.2, 0.05, 1.0, 0.2);
        const auto conv = trial % 2 ? Convention::oriented : Convention::as_written;
        auto a = testkit::random_vector(rng, n, -3, 3), b = testkit::random_vector(rng, n, -3, 3);
        auto pa = project_slabs(a, g, conv), pb = project_slabs(b, g, conv);
        const auto F = build_incidence(g, conv);
        EXPECT_LE(detail::max_slab_violation(g, F, pa), 1e-8);
        EXPECT_LE(norm_diff(pa, pb), norm_diff(a, b) + 1e-8);
        EXPECT_LE(max_abs_diff(project_slabs(pa, g, conv), pa), 1e-8);
    }
}
