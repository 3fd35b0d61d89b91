#include "newsky/analytics/louvain.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace newsky::analytics {

namespace {

// Working graph for one level; self-loop weight counts each internal edge once.
struct Level {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    std::vector<double> self;
    std::vector<double> strength;  // weighted degree, self-loops counted twice
    double total = 0.0;            // sum of edge weights, each edge once
};

Level from_graph(const Graph& graph) {
    Level level;
    const std::size_t n = graph.node_count();
    level.adj.resize(n);
    level.self.assign(n, 0.0);
    level.strength.assign(n, 0.0);
    for (NodeId v = 0; v < n; ++v) {
        for (const auto& [u, w] : graph.neighbors(v)) {
            level.adj[v].emplace_back(u, w);
            level.strength[v] += w;
            if (v < u) level.total += w;
        }
    }
    return level;
}

// Seeded Fisher-Yates with explicit index draws so the order does not depend
// on the standard library's shuffle implementation.
std::vector<std::size_t> visiting_order(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

// Local moving phase. Returns true when any node changed community.
bool local_moves(const Level& level, std::vector<std::size_t>& comm, double resolution,
                 std::size_t max_sweeps, std::mt19937_64& rng) {
    const std::size_t n = level.adj.size();
    const double m2 = 2.0 * level.total;
    std::vector<double> tot(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) tot[comm[v]] += level.strength[v];

    std::vector<double> links(n, 0.0);
    std::vector<std::size_t> touched;
    bool moved_any = false;
    const auto order = visiting_order(n, rng);

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool moved = false;
        for (const std::size_t v : order) {
            const std::size_t own = comm[v];
            const double k = level.strength[v];
            touched.clear();
            for (const auto& [u, w] : level.adj[v]) {
                const std::size_t c = comm[u];
                if (links[c] == 0.0) touched.push_back(c);
                links[c] += w;
            }
            tot[own] -= k;

            std::size_t best = own;
            double best_gain = links[own] - resolution * tot[own] * k / m2;
            for (const std::size_t c : touched) {
                const double gain = links[c] - resolution * tot[c] * k / m2;
                if (gain > best_gain + 1e-12) {
                    best = c;
                    best_gain = gain;
                }
            }
            tot[best] += k;
            comm[v] = best;
            if (best != own) moved = true;
            for (const std::size_t c : touched) links[c] = 0.0;
            links[own] = 0.0;
        }
        if (!moved) break;
        moved_any = true;
    }
    return moved_any;
}

// Renumbers labels 0..k-1 in order of first appearance.
std::size_t compact(std::vector<std::size_t>& comm) {
    std::vector<std::size_t> remap(comm.size(), SIZE_MAX);
    std::size_t next = 0;
    for (auto& c : comm) {
        if (remap[c] == SIZE_MAX) remap[c] = next++;
        c = remap[c];
    }
    return next;
}

Level aggregate(const Level& level, const std::vector<std::size_t>& comm, std::size_t count) {
    Level next;
    next.adj.resize(count);
    next.self.assign(count, 0.0);
    next.strength.assign(count, 0.0);
    next.total = level.total;
    std::vector<std::map<std::size_t, double>> acc(count);
    for (std::size_t v = 0; v < level.adj.size(); ++v) {
        const std::size_t cv = comm[v];
        next.self[cv] += level.self[v];
        next.strength[cv] += level.strength[v];
        for (const auto& [u, w] : level.adj[v]) {
            const std::size_t cu = comm[u];
            if (cu == cv) {
                if (v < u) next.self[cv] += w;
            } else {
                acc[cv][cu] += w;
            }
        }
    }
    for (std::size_t c = 0; c < count; ++c) {
        next.adj[c].assign(acc[c].begin(), acc[c].end());
    }
    return next;
}

}  // namespace

double modularity(const Graph& graph, const std::vector<std::size_t>& community, double resolution) {
    double total = 0.0;
    const std::size_t n = graph.node_count();
    std::size_t labels = 0;
    for (const auto c : community) labels = std::max(labels, c + 1);
    std::vector<double> internal(labels, 0.0);
    std::vector<double> tot(labels, 0.0);
    for (NodeId v = 0; v < n; ++v) {
        for (const auto& [u, w] : graph.neighbors(v)) {
            tot[community[v]] += w;
            if (v < u) {
                total += w;
                if (community[v] == community[u]) internal[community[v]] += w;
            }
        }
    }
    if (total == 0.0) return 0.0;
    double q = 0.0;
    for (std::size_t c = 0; c < labels; ++c) {
        q += internal[c] / total - resolution * (tot[c] / (2.0 * total)) * (tot[c] / (2.0 * total));
    }
    return q;
}

Partition louvain(const Graph& graph, const LouvainOptions& options) {
    Partition result;
    const std::size_t n = graph.node_count();
    result.community.resize(n);
    std::iota(result.community.begin(), result.community.end(), 0);
    if (n == 0) return result;

    Level level = from_graph(graph);
    if (level.total == 0.0) {
        result.count = compact(result.community);
        return result;
    }

    std::mt19937_64 rng(options.seed);
    for (std::size_t depth = 0; depth < options.max_levels; ++depth) {
        std::vector<std::size_t> comm(level.adj.size());
        std::iota(comm.begin(), comm.end(), 0);
        if (!local_moves(level, comm, options.resolution, options.max_sweeps, rng)) break;
        const std::size_t count = compact(comm);
        for (auto& c : result.community) c = comm[c];
        if (count == level.adj.size()) break;
        level = aggregate(level, comm, count);
    }
    result.count = compact(result.community);
    result.modularity = modularity(graph, result.community, options.resolution);
    return result;
}

}  // namespace newsky::analytics
