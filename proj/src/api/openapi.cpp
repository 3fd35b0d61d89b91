#include "newsky/api/contract.hpp"

#include <algorithm>

namespace newsky::api {

namespace {

const std::string kWindowHelp = "\"all\" or an RFC 3339 interval \"<from>/<to>\" (half-open)";
const std::string kKindsHelp = "comma-separated subset of post,repost,like";

}  // namespace

const std::vector<RouteSpec>& routes() {
    static const std::vector<RouteSpec> table = {
        {"/v1/prevalence",
         "Absolute counts or relative unreliable share per time bucket",
         {
             {"mode", "string", {"absolute", "relative"}, false, "absolute", "series type"},
             {"granularity", "string", {"hour", "day"}, false, "hour", "bucket size (UTC)"},
             {"from", "date-time", {}, true, "", "window start, inclusive"},
             {"to", "date-time", {}, true, "", "window end, exclusive"},
             {"kinds", "string", {}, false, "post,repost,like", kKindsHelp},
             {"dedup", "string", {"per_link", "per_post"}, false, "per_link", "link counting rule"},
             {"format", "string", {"json", "csv"}, false, "json", "csv exports absolute buckets"},
         },
         {400, 416}},
        {"/v1/domains/top",
         "Rank-frequency table of rated domains",
         {
             {"class", "string", {"reliable", "unreliable", "all"}, false, "all", "reliability class"},
             {"limit", "integer", {}, false, "10", "1 to 1000"},
             {"window", "window", {}, false, "all", kWindowHelp},
             {"kinds", "string", {}, false, "post,repost,like", kKindsHelp},
             {"dedup", "string", {"per_link", "per_post"}, false, "per_link", "link counting rule"},
         },
         {400}},
        {"/v1/hashtag-graph",
         "k-core of the hashtag co-occurrence graph",
         {
             {"k", "integer", {}, false, "0", "minimum degree within the core"},
             {"window", "window", {}, false, "all", kWindowHelp},
             {"min_cooccurrence", "integer", {}, false, "", "rated posts needed for an edge"},
         },
         {400}},
        {"/v1/audiences",
         "Engagement communities with their most distinctive terms",
         {
             {"window", "window", {}, false, "all", kWindowHelp},
             {"top_words", "integer", {}, false, "20", "terms per community"},
         },
         {400, 409}},
        {"/v1/orientation",
         "Orientation shares per reliability class",
         {
             {"window", "window", {}, false, "all", kWindowHelp},
             {"lang", "string", {}, false, "", "keep sources rated for this language"},
             {"kinds", "string", {}, false, "post,repost,like", kKindsHelp},
         },
         {400}},
        {"/v1/health", "Ingest cursor, decode errors and store size", {}, {}},
        {"/v1/openapi.json", "This document", {}, {}},
    };
    return table;
}

const RouteSpec* find_route(const std::string& path) {
    const auto& table = routes();
    const auto it = std::find_if(table.begin(), table.end(), [&](const RouteSpec& r) { return r.path == path; });
    return it == table.end() ? nullptr : &*it;
}

nlohmann::json openapi_document() {
    using nlohmann::json;
    json paths = json::object();
    for (const auto& route : routes()) {
        json params = json::array();
        for (const auto& p : route.params) {
            json schema;
            if (p.type == "integer") {
                schema = {{"type", "integer"}};
            } else if (p.type == "date-time") {
                schema = {{"type", "string"}, {"format", "date-time"}};
            } else {
                schema = {{"type", "string"}};
            }
            if (!p.values.empty()) schema["enum"] = p.values;
            if (!p.default_value.empty()) schema["default"] = p.default_value;
            params.push_back({{"name", p.name},
                              {"in", "query"},
                              {"required", p.required},
                              {"description", p.description},
                              {"schema", std::move(schema)}});
        }
        json responses = {{"200", {{"description", "OK"}}}};
        for (const int status : route.error_statuses) {
            std::string text = "Error";
            if (status == 400) text = "Invalid or unknown query parameter";
            if (status == 409) text = "Analytics job has not been run for this window";
            if (status == 416) text = "Window spans too many buckets";
            responses[std::to_string(status)] = {{"description", text}};
        }
        paths[route.path] = {
            {"get", {{"summary", route.summary}, {"parameters", std::move(params)}, {"responses", std::move(responses)}}}};
    }
    return {{"openapi", "3.0.3"},
            {"info", {{"title", "newsky observatory API"}, {"version", "1.0.0"}}},
            {"paths", std::move(paths)}};
}

}  // namespace newsky::api
