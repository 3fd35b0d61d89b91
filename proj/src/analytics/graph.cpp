#include "newsky/analytics/graph.hpp"

#include <algorithm>

namespace newsky::analytics {

NodeId Graph::add_node(std::string_view label) {
    const auto it = index_.find(std::string(label));
    if (it != index_.end()) return it->second;
    const NodeId id = labels_.size();
    labels_.emplace_back(label);
    index_.emplace(labels_.back(), id);
    adj_.emplace_back();
    return id;
}

std::optional<NodeId> Graph::find(std::string_view label) const {
    const auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void Graph::add_edge(NodeId a, NodeId b, double weight) {
    if (a == b) return;
    auto [it, inserted] = adj_[a].try_emplace(b, 0.0);
    it->second += weight;
    adj_[b][a] += weight;
    if (inserted) ++edge_count_;
}

void Graph::add_edge(std::string_view a, std::string_view b, double weight) {
    const NodeId ia = add_node(a);
    const NodeId ib = add_node(b);
    add_edge(ia, ib, weight);
}

std::optional<double> Graph::weight(NodeId a, NodeId b) const {
    const auto it = adj_[a].find(b);
    if (it == adj_[a].end()) return std::nullopt;
    return it->second;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId a = 0; a < adj_.size(); ++a) {
        for (const auto& [b, w] : adj_[a]) {
            if (a < b) out.push_back({a, b, w});
        }
    }
    return out;
}

Graph Graph::induced(const std::vector<NodeId>& nodes) const {
    std::vector<NodeId> sorted = nodes;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    Graph sub;
    std::unordered_map<NodeId, NodeId> remap;
    for (const NodeId id : sorted) remap.emplace(id, sub.add_node(labels_[id]));
    for (const NodeId a : sorted) {
        for (const auto& [b, w] : adj_[a]) {
            if (a < b) {
                const auto it = remap.find(b);
                if (it != remap.end()) sub.add_edge(remap[a], it->second, w);
            }
        }
    }
    return sub;
}

}  // namespace newsky::analytics
