#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newsky::analytics {

using NodeId = std::size_t;

struct Edge {
    NodeId a;  // a < b
    NodeId b;
    double weight;
};

// Undirected graph with string labels and accumulated edge weights.
// Self-loops are dropped. Node ids are dense and stable.
class Graph {
public:
    /// Returns the existing id when the label is already present.
    NodeId add_node(std::string_view label);
    std::optional<NodeId> find(std::string_view label) const;

    /// Adds `weight` to the (a, b) edge, creating it if needed.
    void add_edge(NodeId a, NodeId b, double weight = 1.0);
    void add_edge(std::string_view a, std::string_view b, double weight = 1.0);

    std::size_t node_count() const { return labels_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    bool empty() const { return labels_.empty(); }

    const std::string& label(NodeId id) const { return labels_[id]; }
    /// Neighbour -> weight, ordered by neighbour id.
    const std::map<NodeId, double>& neighbors(NodeId id) const { return adj_[id]; }
    std::size_t degree(NodeId id) const { return adj_[id].size(); }
    std::optional<double> weight(NodeId a, NodeId b) const;

    /// Sorted by (a, b).
    std::vector<Edge> edges() const;

    /// Subgraph on `nodes`, keeping their relative id order.
    Graph induced(const std::vector<NodeId>& nodes) const;

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> index_;
    std::vector<std::map<NodeId, double>> adj_;
    std::size_t edge_count_ = 0;
};

}  // namespace newsky::analytics
