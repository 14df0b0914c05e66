#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "otc/graph.hpp"

namespace otc::testkit {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Random spanning tree plus extra edges. Extra edges are directed with
/// probability `directed_prob`; the tree stays undirected so flows exist.
inline Graph random_connected_graph(Rng& rng, std::size_t n, double extra_prob = 0.3, double cmin = 0.1,
                                    double cmax = 2.0, double directed_prob = 0.0) {
    std::vector<Edge> edges;
    std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
    for (NodeId v = 1; v < n; ++v) {
        const NodeId u = uniform_index(rng, 0, v - 1);
        edges.push_back({u, v, EdgeKind::undirected, uniform(rng, cmin, cmax)});
        used[u][v] = used[v][u] = 1;
    }
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (used[u][v] || uniform(rng, 0, 1) >= extra_prob) continue;
            Edge e{u, v, EdgeKind::undirected, uniform(rng, cmin, cmax)};
            if (uniform(rng, 0, 1) < directed_prob) {
                e.kind = EdgeKind::directed;
                if (uniform(rng, 0, 1) < 0.5) std::swap(e.u, e.v);
            }
            edges.push_back(e);
        }
    }
    std::shuffle(edges.begin(), edges.end(), rng);
    return Graph(n, std::move(edges));
}

/// Random point of the simplex; entries are zeroed with probability
/// `zero_prob` (at least one entry stays positive).
inline NodeDistribution random_simplex(Rng& rng, std::size_t n, double zero_prob = 0.0) {
    std::vector<double> p(n);
    std::exponential_distribution<double> expo(1.0);
    double total = 0.0;
    for (double& x : p) {
        x = uniform(rng, 0, 1) < zero_prob ? 0.0 : expo(rng);
        total += x;
    }
    if (total == 0.0) {
        p[uniform_index(rng, 0, n - 1)] = 1.0;
        total = 1.0;
    }
    for (double& x : p) x /= total;
    return NodeDistribution(std::move(p));
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(rng, lo, hi);
    return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double norm_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace otc::testkit
