#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "newsky/analytics/graph.hpp"
#include "newsky/analytics/lexicon.hpp"
#include "newsky/store/store.hpp"

namespace newsky::analytics {

struct AudienceOptions {
    std::uint64_t seed = 42;
    std::size_t top_words = 100;
    bool news_only = true;  // build the graph from engagements with news-linking posts only
    DenominatorForm form = DenominatorForm::AsPrinted;
};

struct Community {
    std::size_t id = 0;
    std::vector<std::string> members;  // sorted
    std::int64_t total_words = 0;
    std::vector<ScoredWord> top_terms;
};

struct AudienceResult {
    std::optional<store::Window> window;
    std::uint64_t seed = 42;
    std::size_t k_max = 0;
    std::size_t core_size = 0;
    double modularity = 0.0;
    std::vector<Community> communities;  // by size descending, then first member
};

/// Undirected actor graph; edge multiplicity counts likes and reposts either way.
Graph engagement_graph(const std::vector<store::EngagementRecord>& engagements, bool news_only = true);

/// Max k-core of the engagement graph, Louvain on that core, then one
/// timeline lexicon per community scored against the other communities.
AudienceResult segment_audiences(const std::vector<store::EngagementRecord>& engagements,
                                 const std::vector<store::TimelineEntry>& timelines,
                                 const AudienceOptions& options = {});

AudienceResult run_audience_job(const store::Store& store, const std::optional<store::Window>& window,
                                const AudienceOptions& options = {});

nlohmann::json to_json(const AudienceResult& result, std::optional<std::size_t> top_words = std::nullopt,
                       bool include_members = true);
AudienceResult audience_result_from_json(const nlohmann::json& doc);

/// Job results live as JSON files in `dir`, one per window.
std::filesystem::path audience_job_path(const std::filesystem::path& dir, const std::optional<store::Window>& window);
void save_audience_job(const std::filesystem::path& dir, const AudienceResult& result);
std::optional<AudienceResult> load_audience_job(const std::filesystem::path& dir,
                                                const std::optional<store::Window>& window);

}  // namespace newsky::analytics
