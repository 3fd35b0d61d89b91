#include "newsky/parser/post_parser.hpp"

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>
#include <unordered_set>

#include "newsky/parser/public_suffix.hpp"

namespace newsky::parser {

namespace {

bool is_scheme_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '+' ||
           c == '-' || c == '.';
}

bool is_ipv4(std::string_view host) {
    int parts = 0;
    std::size_t start = 0;
    while (start <= host.size()) {
        const auto dot = host.find('.', start);
        const auto part = host.substr(start, dot == std::string_view::npos ? host.npos : dot - start);
        if (part.empty() || part.size() > 3) return false;
        unsigned value = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc{} || ptr != part.data() + part.size() || value > 255) return false;
        ++parts;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts == 4;
}

bool valid_host_chars(std::string_view host) {
    bool label_empty = true;
    for (const char ch : host) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == '.') {
            if (label_empty) return false;
            label_empty = true;
            continue;
        }
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                        c >= 0x80;
        if (!ok) return false;
        label_empty = false;
    }
    return !label_empty;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Decodes one code point at `pos` (advancing it); U+FFFD on malformed input.
UChar32 next_code_point(std::string_view s, std::size_t& pos) {
    UChar32 c = 0;
    auto i = static_cast<int32_t>(pos);
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
    pos = static_cast<std::size_t>(i);
    return c < 0 ? 0xFFFD : c;
}

bool is_tag_terminator(UChar32 c) {
    return u_isUWhiteSpace(c) || c == 0x00AD || c == 0x2060 || c == 0x200A || c == 0x200B ||
           c == 0x200C || c == 0x200D || c == 0x20E2;
}

// Strips a leading '#', folds case; empty when not a usable tag.
std::string clean_tag(std::string_view raw) {
    if (!raw.empty() && raw.front() == '#') raw.remove_prefix(1);
    // Trailing punctuation is not part of a tag ("#news," -> "news").
    std::size_t end = raw.size();
    while (end > 0) {
        std::size_t start = end - 1;
        while (start > 0 && (static_cast<unsigned char>(raw[start]) & 0xC0) == 0x80) --start;
        std::size_t pos = start;
        const UChar32 c = next_code_point(raw, pos);
        if (!u_ispunct(c)) break;
        end = start;
    }
    raw = raw.substr(0, end);
    if (raw.empty()) return {};
    bool has_non_digit = false;
    std::size_t count = 0;
    for (std::size_t pos = 0; pos < raw.size();) {
        const UChar32 c = next_code_point(raw, pos);
        if (!u_isdigit(c)) has_non_digit = true;
        ++count;
    }
    if (!has_non_digit || count > 64) return {};
    return fold_case(raw);
}

std::optional<std::string> primary_language(const std::vector<std::string>& langs) {
    if (langs.empty()) return std::nullopt;
    std::string_view tag = langs.front();
    tag = tag.substr(0, tag.find_first_of("-_"));
    if (tag.empty()) return std::nullopt;
    std::string out(tag);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::optional<std::string> normalize_domain(std::string_view raw_url) {
    std::string_view s = trim(raw_url);
    if (s.substr(0, 2) == "//") {
        s.remove_prefix(2);
    } else {
        const auto sep = s.find("://");
        if (sep == std::string_view::npos || sep == 0) return std::nullopt;
        const auto scheme = s.substr(0, sep);
        const bool letter_first = (scheme[0] >= 'a' && scheme[0] <= 'z') || (scheme[0] >= 'A' && scheme[0] <= 'Z');
        if (!letter_first || !std::all_of(scheme.begin(), scheme.end(), is_scheme_char)) {
            return std::nullopt;
        }
        s.remove_prefix(sep + 3);
    }

    std::string_view authority = s.substr(0, s.find_first_of("/?#\\"));
    if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
        authority.remove_prefix(at + 1);
    }
    if (authority.empty()) return std::nullopt;

    std::string host;
    if (authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos || close == 1) return std::nullopt;
        const auto inner = authority.substr(1, close - 1);
        const bool ok = std::all_of(inner.begin(), inner.end(), [](char c) {
            return std::isxdigit(static_cast<unsigned char>(c)) || c == ':' || c == '.';
        });
        if (!ok) return std::nullopt;
        host = std::string(authority.substr(0, close + 1));
        std::transform(host.begin(), host.end(), host.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return host;
    }

    std::string_view host_view = authority;
    if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
        const auto port = authority.substr(colon + 1);
        if (!std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            return std::nullopt;
        }
        host_view = authority.substr(0, colon);
    }
    host.assign(host_view);
    for (auto& c : host) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (!host.empty() && host.back() == '.') host.pop_back();
    if (!valid_host_chars(host)) return std::nullopt;
    if (is_ipv4(host)) return host;

    if (host.rfind("www.", 0) == 0 && host.size() > 4) host.erase(0, 4);
    if (auto registrable = PublicSuffixList::bundled().registrable_domain(host)) {
        return registrable;
    }
    return host;
}

std::string fold_case(std::string_view utf8) {
    bool ascii = true;
    for (const char c : utf8) {
        if (static_cast<unsigned char>(c) >= 0x80) {
            ascii = false;
            break;
        }
    }
    std::string out;
    if (ascii) {
        out.assign(utf8);
        for (auto& c : out) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
        return out;
    }
    auto ustr = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    ustr.foldCase();
    ustr.toUTF8String(out);
    return out;
}

std::vector<std::string> extract_hashtags(std::string_view text) {
    std::vector<std::string> tags;
    std::unordered_set<std::string> seen;
    bool at_boundary = true;
    for (std::size_t pos = 0; pos < text.size();) {
        const UChar32 c = next_code_point(text, pos);
        if (at_boundary && (c == '#' || c == 0xFF03)) {
            std::size_t end = pos;
            while (end < text.size()) {
                std::size_t probe = end;
                if (is_tag_terminator(next_code_point(text, probe))) break;
                end = probe;
            }
            auto tag = clean_tag(text.substr(pos, end - pos));
            if (!tag.empty() && seen.insert(tag).second) tags.push_back(std::move(tag));
            pos = end;
            at_boundary = false;
            continue;
        }
        at_boundary = is_tag_terminator(c);
    }
    return tags;
}

ParsedPost parse_post_record(std::string post_uri, std::string actor_id, Timestamp created_at,
                             const ingest::PostRecord& record) {
    ParsedPost post;
    post.post_uri = std::move(post_uri);
    post.actor_id = std::move(actor_id);
    post.created_at = created_at;
    post.text = record.text;
    post.lang = primary_language(record.langs);

    std::unordered_set<std::string> seen_urls;
    auto add_url = [&](const std::string& raw) {
        if (raw.empty() || seen_urls.count(raw)) return;
        auto domain = normalize_domain(raw);
        if (!domain) return;
        seen_urls.insert(raw);
        post.urls.push_back({raw, std::move(*domain)});
    };
    for (const auto& facet : record.facets) {
        if (facet.type == ingest::Facet::Type::Link) add_url(facet.value);
    }
    for (const auto& uri : record.embed_uris) add_url(uri);

    std::unordered_set<std::string> seen_tags;
    for (const auto& facet : record.facets) {
        if (facet.type != ingest::Facet::Type::Tag) continue;
        auto tag = clean_tag(facet.value);
        if (!tag.empty() && seen_tags.insert(tag).second) post.hashtags.push_back(std::move(tag));
    }
    for (auto& tag : extract_hashtags(record.text)) {
        if (seen_tags.insert(tag).second) post.hashtags.push_back(std::move(tag));
    }
    return post;
}

ParsedPost parse_post(const ingest::FirehoseEvent& event) {
    if (event.kind != ingest::EventKind::Post || !event.record) {
        throw std::invalid_argument("parse_post needs a post event with a record");
    }
    return parse_post_record(event.record_uri(), event.actor_id, event.created_at, *event.record);
}

nlohmann::json to_json(const ParsedPost& post) {
    nlohmann::json urls = nlohmann::json::array();
    for (const auto& link : post.urls) urls.push_back({link.raw_url, link.domain});
    nlohmann::json doc = {{"post_uri", post.post_uri},
                          {"actor_id", post.actor_id},
                          {"created_at", to_unix(post.created_at)},
                          {"urls", std::move(urls)},
                          {"hashtags", post.hashtags},
                          {"text", post.text}};
    doc["lang"] = post.lang ? nlohmann::json(*post.lang) : nlohmann::json(nullptr);
    return doc;
}

ParsedPost parsed_post_from_json(const nlohmann::json& doc) {
    ParsedPost post;
    post.post_uri = doc.at("post_uri").get<std::string>();
    post.actor_id = doc.at("actor_id").get<std::string>();
    post.created_at = from_unix(doc.at("created_at").get<std::int64_t>());
    for (const auto& link : doc.at("urls")) {
        post.urls.push_back({link.at(0).get<std::string>(), link.at(1).get<std::string>()});
    }
    post.hashtags = doc.at("hashtags").get<std::vector<std::string>>();
    post.text = doc.value("text", "");
    if (const auto it = doc.find("lang"); it != doc.end() && it->is_string()) {
        post.lang = it->get<std::string>();
    }
    return post;
}

}  // namespace newsky::parser
