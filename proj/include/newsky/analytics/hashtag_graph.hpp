#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "newsky/analytics/graph.hpp"
#include "newsky/ratings/ratings.hpp"
#include "newsky/store/store.hpp"

namespace newsky::analytics {

class EmptyWindow : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Which side a post with both reliable and unreliable links counts toward.
enum class MixedPolicy { Unreliable, Reliable, Skip };
std::optional<MixedPolicy> parse_mixed_policy(std::string_view text);

/// (w_ut - w_t) / (w_ut + w_t). Throws std::invalid_argument when both are zero.
double edge_weight(std::int64_t w_ut, std::int64_t w_t);

// One post reduced to its hashtags and its rated-link composition.
struct HashtagPost {
    std::vector<std::string> hashtags;
    std::int64_t reliable_links = 0;
    std::int64_t unreliable_links = 0;
};

struct HashtagEdge {
    std::string tag_a;  // tag_a < tag_b
    std::string tag_b;
    std::int64_t w_ut = 0;
    std::int64_t w_t = 0;
    double weight = 0.0;
};

struct HashtagNode {
    std::string tag;
    double node_weight = 0.0;
    std::size_t degree = 0;
};

struct HashtagGraph {
    std::vector<HashtagNode> nodes;  // sorted by tag
    std::vector<HashtagEdge> edges;  // sorted by (tag_a, tag_b)

    Graph topology() const;
    /// Restriction to the k-core; node weights are recomputed over the kept edges.
    HashtagGraph k_core(std::size_t k) const;
    std::size_t max_core() const;
};

/// Node weights and degrees derived from an edge list.
HashtagGraph from_edges(std::vector<HashtagEdge> edges);

HashtagGraph build_hashtag_graph(const std::vector<HashtagPost>& posts, std::int64_t min_cooccurrence = 1,
                                 MixedPolicy mixed = MixedPolicy::Unreliable);

/// Groups Post observations by origin post and classifies their links.
std::vector<HashtagPost> hashtag_posts(const std::vector<store::NewsLinkObservation>& observations,
                                       const ratings::RatingTable& table);

/// Throws EmptyWindow when the window is empty.
HashtagGraph build_hashtag_graph(const store::Store& store, const store::Window& window,
                                 const ratings::RatingTable& table, std::int64_t min_cooccurrence = 1,
                                 MixedPolicy mixed = MixedPolicy::Unreliable);

}  // namespace newsky::analytics
