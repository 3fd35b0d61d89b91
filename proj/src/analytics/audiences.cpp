#include "newsky/analytics/audiences.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "newsky/analytics/kcore.hpp"
#include "newsky/analytics/louvain.hpp"
#include "newsky/time.hpp"

namespace newsky::analytics {

using nlohmann::json;

Graph engagement_graph(const std::vector<store::EngagementRecord>& engagements, bool news_only) {
    Graph graph;
    for (const auto& e : engagements) {
        if (news_only && !e.news_linking) continue;
        if (e.actor_id.empty() || e.subject_author.empty() || e.actor_id == e.subject_author) continue;
        graph.add_edge(e.actor_id, e.subject_author, 1.0);
    }
    return graph;
}

AudienceResult segment_audiences(const std::vector<store::EngagementRecord>& engagements,
                                 const std::vector<store::TimelineEntry>& timelines,
                                 const AudienceOptions& options) {
    AudienceResult result;
    result.seed = options.seed;
    const Graph full = engagement_graph(engagements, options.news_only);
    if (full.edge_count() == 0) return result;

    auto core = max_k_core(full);
    result.k_max = core.k;
    result.core_size = core.core.node_count();
    const Partition partition = louvain(core.core, {.seed = options.seed});
    result.modularity = partition.modularity;

    std::vector<std::vector<std::string>> groups(partition.count);
    for (NodeId v = 0; v < core.core.node_count(); ++v) {
        groups[partition.community[v]].push_back(core.core.label(v));
    }
    for (auto& g : groups) std::sort(g.begin(), g.end());
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });

    std::unordered_map<std::string, std::size_t> member_of;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        for (const auto& actor : groups[c]) member_of.emplace(actor, c);
    }
    std::vector<CommunityLexicon> lexicons(groups.size());
    for (std::size_t c = 0; c < groups.size(); ++c) lexicons[c].community_id = c;
    for (const auto& entry : timelines) {
        if (entry.kind != ingest::EventKind::Post && entry.kind != ingest::EventKind::Repost) continue;
        const auto it = member_of.find(entry.actor_id);
        if (it == member_of.end()) continue;
        std::optional<std::string_view> lang;
        if (entry.lang) lang = *entry.lang;
        for (const auto& word : tokenize(entry.text, lang)) lexicons[it->second].add(word);
    }

    const WordCounts prior = pooled_counts(lexicons);
    for (std::size_t c = 0; c < groups.size(); ++c) {
        Community community;
        community.id = c;
        community.members = std::move(groups[c]);
        community.total_words = lexicons[c].total;
        const auto delta = log_odds(lexicons[c], complement(lexicons, c), prior, options.form);
        community.top_terms = top_words(lexicons[c], delta, options.top_words);
        result.communities.push_back(std::move(community));
    }
    return result;
}

AudienceResult run_audience_job(const store::Store& store, const std::optional<store::Window>& window,
                                const AudienceOptions& options) {
    AudienceResult result = segment_audiences(store.engagements(window), store.timelines(window), options);
    result.window = window;
    return result;
}

json to_json(const AudienceResult& result, std::optional<std::size_t> top_words, bool include_members) {
    json doc;
    if (result.window) {
        doc["window"] = {{"from", format_rfc3339(result.window->from)}, {"to", format_rfc3339(result.window->to)}};
    } else {
        doc["window"] = nullptr;
    }
    doc["seed"] = result.seed;
    doc["k_max"] = result.k_max;
    doc["core_size"] = result.core_size;
    doc["modularity"] = result.modularity;
    doc["communities"] = json::array();
    for (const auto& c : result.communities) {
        json item = {{"id", c.id}, {"size", c.members.size()}, {"total_words", c.total_words}};
        if (include_members) item["members"] = c.members;
        json terms = json::array();
        const std::size_t n = std::min(c.top_terms.size(), top_words.value_or(c.top_terms.size()));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& t = c.top_terms[i];
            terms.push_back({{"word", t.word}, {"delta", t.delta}, {"count", t.count}});
        }
        item["top_terms"] = std::move(terms);
        doc["communities"].push_back(std::move(item));
    }
    return doc;
}

AudienceResult audience_result_from_json(const json& doc) {
    AudienceResult result;
    if (!doc.at("window").is_null()) {
        const auto from = parse_rfc3339(doc["window"].at("from").get<std::string>());
        const auto to = parse_rfc3339(doc["window"].at("to").get<std::string>());
        if (!from || !to) throw std::invalid_argument("bad window in audience job");
        result.window = store::Window{*from, *to};
    }
    result.seed = doc.at("seed").get<std::uint64_t>();
    result.k_max = doc.at("k_max").get<std::size_t>();
    result.core_size = doc.at("core_size").get<std::size_t>();
    result.modularity = doc.at("modularity").get<double>();
    for (const auto& item : doc.at("communities")) {
        Community c;
        c.id = item.at("id").get<std::size_t>();
        c.total_words = item.at("total_words").get<std::int64_t>();
        c.members = item.value("members", std::vector<std::string>{});
        for (const auto& t : item.at("top_terms")) {
            c.top_terms.push_back({t.at("word").get<std::string>(), t.at("delta").get<double>(),
                                   t.at("count").get<std::int64_t>()});
        }
        result.communities.push_back(std::move(c));
    }
    return result;
}

std::filesystem::path audience_job_path(const std::filesystem::path& dir,
                                        const std::optional<store::Window>& window) {
    if (!window) return dir / "audiences_all.json";
    return dir / ("audiences_" + std::to_string(to_unix(window->from)) + "_" + std::to_string(to_unix(window->to)) +
                  ".json");
}

void save_audience_job(const std::filesystem::path& dir, const AudienceResult& result) {
    std::filesystem::create_directories(dir);
    const auto path = audience_job_path(dir, result.window);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << to_json(result).dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

std::optional<AudienceResult> load_audience_job(const std::filesystem::path& dir,
                                                const std::optional<store::Window>& window) {
    std::ifstream in(audience_job_path(dir, window), std::ios::binary);
    if (!in) return std::nullopt;
    return audience_result_from_json(json::parse(in));
}

}  // namespace newsky::analytics
