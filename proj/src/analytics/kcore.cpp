#include "newsky/analytics/kcore.hpp"

#include <algorithm>

namespace newsky::analytics {

std::vector<std::size_t> coreness(const Graph& graph) {
    const std::size_t n = graph.node_count();
    std::vector<std::size_t> deg(n);
    std::size_t max_deg = 0;
    for (NodeId v = 0; v < n; ++v) {
        deg[v] = graph.degree(v);
        max_deg = std::max(max_deg, deg[v]);
    }

    // Nodes sorted by degree, with bin[d] the first position of degree d.
    std::vector<std::size_t> bin(max_deg + 1, 0);
    for (NodeId v = 0; v < n; ++v) ++bin[deg[v]];
    std::size_t start = 0;
    for (auto& b : bin) {
        const std::size_t count = b;
        b = start;
        start += count;
    }
    std::vector<NodeId> order(n);
    std::vector<std::size_t> pos(n);
    for (NodeId v = 0; v < n; ++v) {
        pos[v] = bin[deg[v]]++;
        order[pos[v]] = v;
    }
    for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
    if (!bin.empty()) bin[0] = 0;

    for (std::size_t i = 0; i < n; ++i) {
        const NodeId v = order[i];
        for (const auto& [u, w] : graph.neighbors(v)) {
            if (deg[u] > deg[v]) {
                const std::size_t du = deg[u];
                const std::size_t pu = pos[u];
                const std::size_t pw = bin[du];
                const NodeId first = order[pw];
                if (u != first) {
                    order[pu] = first;
                    pos[first] = pu;
                    order[pw] = u;
                    pos[u] = pw;
                }
                ++bin[du];
                --deg[u];
            }
        }
    }
    return deg;
}

std::vector<NodeId> k_core_nodes(const Graph& graph, std::size_t k) {
    const auto core = coreness(graph);
    std::vector<NodeId> out;
    for (NodeId v = 0; v < core.size(); ++v) {
        if (core[v] >= k) out.push_back(v);
    }
    return out;
}

Graph k_core(const Graph& graph, std::size_t k) { return graph.induced(k_core_nodes(graph, k)); }

MaxCore max_k_core(const Graph& graph) {
    const auto core = coreness(graph);
    MaxCore result;
    if (core.empty()) return result;
    result.k = *std::max_element(core.begin(), core.end());
    result.core = k_core(graph, result.k);
    return result;
}

}  // namespace newsky::analytics
