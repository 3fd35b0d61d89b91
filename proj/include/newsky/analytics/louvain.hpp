#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "newsky/analytics/graph.hpp"

namespace newsky::analytics {

struct LouvainOptions {
    std::uint64_t seed = 42;
    double resolution = 1.0;
    std::size_t max_levels = 32;
    std::size_t max_sweeps = 1000;
};

struct Partition {
    std::vector<std::size_t> community;  // per node; labels are 0..count-1 by first node
    std::size_t count = 0;
    double modularity = 0.0;
};

/// Weighted Newman modularity of a node labelling.
double modularity(const Graph& graph, const std::vector<std::size_t>& community, double resolution = 1.0);

/// Multi-level greedy modularity optimisation. The node visiting order is a
/// seeded shuffle, so equal seeds give equal partitions.
Partition louvain(const Graph& graph, const LouvainOptions& options = {});

}  // namespace newsky::analytics
