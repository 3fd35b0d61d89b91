#pragma once

#include <cstddef>
#include <vector>

#include "newsky/analytics/graph.hpp"

namespace newsky::analytics {

/// Coreness of every node (unweighted degree), by bucket peeling in O(n + m).
std::vector<std::size_t> coreness(const Graph& graph);

/// Nodes of the k-core, ascending.
std::vector<NodeId> k_core_nodes(const Graph& graph, std::size_t k);
Graph k_core(const Graph& graph, std::size_t k);

struct MaxCore {
    std::size_t k = 0;
    Graph core;
};

/// Largest k with a non-empty k-core. An edgeless graph gives k = 0 and the
/// whole node set; an empty graph gives k = 0 and an empty core.
MaxCore max_k_core(const Graph& graph);

}  // namespace newsky::analytics
