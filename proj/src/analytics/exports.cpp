#include "newsky/analytics/exports.hpp"

#include <charconv>
#include <sstream>

#include "newsky/ratings/csv.hpp"
#include "newsky/time.hpp"

namespace newsky::analytics {

using nlohmann::json;
using ratings::csv_escape;

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string hashtag_edges_csv(const HashtagGraph& graph) {
    std::ostringstream out;
    out << "source,target,w_ut,w_t,weight\n";
    for (const auto& e : graph.edges) {
        out << csv_escape(e.tag_a) << ',' << csv_escape(e.tag_b) << ',' << e.w_ut << ',' << e.w_t << ','
            << format_number(e.weight) << '\n';
    }
    return out.str();
}

std::string hashtag_nodes_csv(const HashtagGraph& graph) {
    std::ostringstream out;
    out << "tag,node_weight,degree\n";
    for (const auto& n : graph.nodes) {
        out << csv_escape(n.tag) << ',' << format_number(n.node_weight) << ',' << n.degree << '\n';
    }
    return out.str();
}

std::string lexicon_csv(const AudienceResult& result) {
    std::ostringstream out;
    out << "community,word,delta,count\n";
    for (const auto& c : result.communities) {
        for (const auto& t : c.top_terms) {
            out << c.id << ',' << csv_escape(t.word) << ',' << format_number(t.delta) << ',' << t.count << '\n';
        }
    }
    return out.str();
}

std::string rank_frequency_csv(const std::vector<RankFrequencyEntry>& entries) {
    std::ostringstream out;
    out << "rank,domain,frequency\n";
    for (const auto& e : entries) out << e.rank << ',' << csv_escape(e.domain) << ',' << e.frequency << '\n';
    return out.str();
}

std::string orientation_csv(const OrientationDistribution& dist) {
    std::ostringstream out;
    out << "reliability,orientation,links,percent\n";
    for (const auto& row : dist.rows) {
        for (const auto& s : row.shares) {
            out << ratings::to_string(row.reliability) << ',' << ratings::to_string(s.orientation) << ','
                << s.links << ',' << format_number(s.percent) << '\n';
        }
        out << ratings::to_string(row.reliability) << ",unknown," << row.unknown << ",\n";
    }
    return out.str();
}

json to_json(const HashtagGraph& graph) {
    json nodes = json::array();
    for (const auto& n : graph.nodes) {
        nodes.push_back({{"tag", n.tag}, {"node_weight", n.node_weight}, {"degree", n.degree}});
    }
    json edges = json::array();
    for (const auto& e : graph.edges) {
        edges.push_back(
            {{"source", e.tag_a}, {"target", e.tag_b}, {"w_ut", e.w_ut}, {"w_t", e.w_t}, {"weight", e.weight}});
    }
    return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

json to_json(const std::vector<RankFrequencyEntry>& entries) {
    json out = json::array();
    for (const auto& e : entries) out.push_back({{"rank", e.rank}, {"domain", e.domain}, {"frequency", e.frequency}});
    return out;
}

json to_json(const OrientationDistribution& dist) {
    json rows = json::array();
    for (const auto& row : dist.rows) {
        json shares = json::object();
        json counts = json::object();
        for (const auto& s : row.shares) {
            shares[std::string(ratings::to_string(s.orientation))] = s.percent;
            counts[std::string(ratings::to_string(s.orientation))] = s.links;
        }
        rows.push_back({{"reliability", ratings::to_string(row.reliability)},
                        {"links", row.links},
                        {"unknown", row.unknown},
                        {"counts", std::move(counts)},
                        {"shares", std::move(shares)}});
    }
    return {{"rows", std::move(rows)}};
}

json to_json(const std::vector<store::PrevalenceBucket>& buckets) {
    json out = json::array();
    for (const auto& b : buckets) {
        out.push_back({{"bucket_start", format_rfc3339(b.bucket_start)},
                       {"total_links", b.total_links},
                       {"total_rated", b.total_rated},
                       {"reliable", b.reliable},
                       {"unreliable", b.unreliable}});
    }
    return out;
}

json to_json(const std::vector<store::RelativePoint>& points) {
    json out = json::array();
    for (const auto& p : points) {
        json ratio = p.ratio ? json(*p.ratio) : json(nullptr);
        out.push_back({{"bucket", format_rfc3339(p.bucket_start)}, {"ratio", std::move(ratio)}});
    }
    return out;
}

}  // namespace newsky::analytics
