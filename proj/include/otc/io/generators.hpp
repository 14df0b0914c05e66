#pragma once

#include <vector>

#include "otc/graph.hpp"
#include "otc/io/edgelist.hpp"

namespace otc::io {

/// 4-ary tree of depth 2 with three edge weights. Root 0, internal nodes 1-4,
/// leaves 5-8 under 1, 9-12 under 2, 13-16 under 3, 17-20 under 4. Internal
/// node i has i heavy (0.5) child edges on its highest-numbered leaves; the
/// other leaf edges cost 0.1 and root edges 0.3.
inline Graph make_three_weight_tree() {
    std::vector<Edge> edges;
    for (NodeId i = 1; i <= 4; ++i) edges.push_back({0, i, EdgeKind::undirected, 0.3});
    for (NodeId i = 1; i <= 4; ++i) {
        const NodeId first = 5 + 4 * (i - 1);
        for (NodeId j = 0; j < 4; ++j) {
            const bool heavy = j >= 4 - i;
            edges.push_back({i, first + j, EdgeKind::undirected, heavy ? 0.5 : 0.1});
        }
    }
    return Graph(21, std::move(edges));
}

inline NamedGraph make_three_weight_named() {
    NamedGraph ng;
    ng.id = "tree";
    ng.graph = make_three_weight_tree();
    ng.has_costs = true;
    for (NodeName v = 0; v < 21; ++v) ng.names.push_back(v);
    return ng;
}

}  // namespace otc::io
