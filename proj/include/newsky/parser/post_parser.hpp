#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "newsky/ingest/event.hpp"
#include "newsky/time.hpp"

namespace newsky::parser {

/// The single normalization point for news-source identity: lowercase host,
/// one leading "www." removed, reduced to its registrable domain with the
/// bundled public-suffix snapshot. IP literals come back verbatim.
/// nullopt means the string has no usable host.
std::optional<std::string> normalize_domain(std::string_view raw_url);

struct LinkRef {
    std::string raw_url;
    std::string domain;

    bool operator==(const LinkRef&) const = default;
};

struct ParsedPost {
    std::string post_uri;
    std::string actor_id;
    Timestamp created_at{};
    std::vector<LinkRef> urls;
    std::vector<std::string> hashtags;  // case-folded, no '#', unique
    std::optional<std::string> lang;    // primary subtag of the first declared language
    std::string text;
};

nlohmann::json to_json(const ParsedPost& post);
/// Throws nlohmann::json::exception on a malformed document.
ParsedPost parsed_post_from_json(const nlohmann::json& doc);

/// Throws std::invalid_argument unless event.kind == Post.
ParsedPost parse_post(const ingest::FirehoseEvent& event);
ParsedPost parse_post_record(std::string post_uri, std::string actor_id, Timestamp created_at,
                             const ingest::PostRecord& record);

/// Full Unicode case folding of UTF-8 text.
std::string fold_case(std::string_view utf8);

/// "#tag" tokens in free text, in order of first appearance, folded and unique.
std::vector<std::string> extract_hashtags(std::string_view text);

}  // namespace newsky::parser
