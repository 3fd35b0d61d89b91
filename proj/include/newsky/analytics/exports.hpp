#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "newsky/analytics/audiences.hpp"
#include "newsky/analytics/distribution.hpp"
#include "newsky/analytics/hashtag_graph.hpp"
#include "newsky/store/store.hpp"

namespace newsky::analytics {

// CSV: source,target,w_ut,w_t,weight
std::string hashtag_edges_csv(const HashtagGraph& graph);
// CSV: tag,node_weight,degree
std::string hashtag_nodes_csv(const HashtagGraph& graph);
// CSV: community,word,delta,count
std::string lexicon_csv(const AudienceResult& result);
// CSV: rank,domain,frequency
std::string rank_frequency_csv(const std::vector<RankFrequencyEntry>& entries);
// CSV: reliability,orientation,links,percent (unknown rows carry an empty percent)
std::string orientation_csv(const OrientationDistribution& dist);

nlohmann::json to_json(const HashtagGraph& graph);
nlohmann::json to_json(const std::vector<RankFrequencyEntry>& entries);
nlohmann::json to_json(const OrientationDistribution& dist);
nlohmann::json to_json(const std::vector<store::PrevalenceBucket>& buckets);
nlohmann::json to_json(const std::vector<store::RelativePoint>& points);

/// Shortest decimal form that round-trips, as written to CSV files.
std::string format_number(double value);

}  // namespace newsky::analytics
