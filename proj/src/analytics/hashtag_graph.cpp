#include "newsky/analytics/hashtag_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "newsky/analytics/kcore.hpp"

namespace newsky::analytics {

std::optional<MixedPolicy> parse_mixed_policy(std::string_view text) {
    if (text == "unreliable") return MixedPolicy::Unreliable;
    if (text == "reliable") return MixedPolicy::Reliable;
    if (text == "skip") return MixedPolicy::Skip;
    return std::nullopt;
}

double edge_weight(std::int64_t w_ut, std::int64_t w_t) {
    if (w_ut < 0 || w_t < 0 || w_ut + w_t == 0) {
        throw std::invalid_argument("edge weight needs a positive post count");
    }
    return static_cast<double>(w_ut - w_t) / static_cast<double>(w_ut + w_t);
}

HashtagGraph from_edges(std::vector<HashtagEdge> edges) {
    std::sort(edges.begin(), edges.end(), [](const HashtagEdge& x, const HashtagEdge& y) {
        return std::tie(x.tag_a, x.tag_b) < std::tie(y.tag_a, y.tag_b);
    });
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& e : edges) {
        for (const auto* tag : {&e.tag_a, &e.tag_b}) {
            auto& [sum, degree] = acc[*tag];
            sum += e.weight;
            ++degree;
        }
    }
    HashtagGraph graph;
    graph.edges = std::move(edges);
    for (const auto& [tag, sd] : acc) {
        graph.nodes.push_back({tag, sd.first / static_cast<double>(sd.second), sd.second});
    }
    return graph;
}

HashtagGraph build_hashtag_graph(const std::vector<HashtagPost>& posts, std::int64_t min_cooccurrence,
                                 MixedPolicy mixed) {
    std::map<std::pair<std::string, std::string>, std::pair<std::int64_t, std::int64_t>> counts;
    for (const auto& post : posts) {
        const bool unreliable = post.unreliable_links > 0;
        const bool reliable = post.reliable_links > 0;
        if (!unreliable && !reliable) continue;
        bool counts_unreliable = unreliable;
        if (unreliable && reliable) {
            if (mixed == MixedPolicy::Skip) continue;
            counts_unreliable = mixed == MixedPolicy::Unreliable;
        }
        std::vector<std::string> tags = post.hashtags;
        std::sort(tags.begin(), tags.end());
        tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
        for (std::size_t i = 0; i < tags.size(); ++i) {
            for (std::size_t j = i + 1; j < tags.size(); ++j) {
                auto& [w_ut, w_t] = counts[{tags[i], tags[j]}];
                (counts_unreliable ? w_ut : w_t) += 1;
            }
        }
    }
    std::vector<HashtagEdge> edges;
    for (const auto& [pair, w] : counts) {
        if (w.first + w.second < std::max<std::int64_t>(1, min_cooccurrence)) continue;
        edges.push_back({pair.first, pair.second, w.first, w.second, edge_weight(w.first, w.second)});
    }
    return from_edges(std::move(edges));
}

Graph HashtagGraph::topology() const {
    Graph g;
    for (const auto& n : nodes) g.add_node(n.tag);
    for (const auto& e : edges) g.add_edge(e.tag_a, e.tag_b, 1.0);
    return g;
}

HashtagGraph HashtagGraph::k_core(std::size_t k) const {
    const Graph g = topology();
    std::set<std::string> keep;
    for (const NodeId id : k_core_nodes(g, k)) keep.insert(g.label(id));
    std::vector<HashtagEdge> kept;
    for (const auto& e : edges) {
        if (keep.count(e.tag_a) && keep.count(e.tag_b)) kept.push_back(e);
    }
    return from_edges(std::move(kept));
}

std::size_t HashtagGraph::max_core() const { return max_k_core(topology()).k; }

std::vector<HashtagPost> hashtag_posts(const std::vector<store::NewsLinkObservation>& observations,
                                       const ratings::RatingTable& table) {
    std::vector<HashtagPost> posts;
    std::unordered_map<std::string, std::size_t> index;
    std::unordered_map<std::string, ratings::Reliability> classes;
    for (const auto& obs : observations) {
        if (obs.event_kind != ingest::EventKind::Post) continue;
        auto [it, inserted] = index.try_emplace(obs.post_uri, posts.size());
        if (inserted) posts.push_back({obs.hashtags, 0, 0});
        auto cls = classes.find(obs.domain);
        if (cls == classes.end()) cls = classes.emplace(obs.domain, table.classify(obs.domain).reliability).first;
        auto& post = posts[it->second];
        if (cls->second == ratings::Reliability::Reliable) ++post.reliable_links;
        if (cls->second == ratings::Reliability::Unreliable) ++post.unreliable_links;
    }
    return posts;
}

HashtagGraph build_hashtag_graph(const store::Store& store, const store::Window& window,
                                 const ratings::RatingTable& table, std::int64_t min_cooccurrence,
                                 MixedPolicy mixed) {
    if (window.empty()) throw EmptyWindow("hashtag graph window is empty");
    store::KindSet posts_only = store::KindSet::none();
    posts_only.add(ingest::EventKind::Post);
    return build_hashtag_graph(hashtag_posts(store.observations(window, posts_only), table), min_cooccurrence,
                               mixed);
}

}  // namespace newsky::analytics
