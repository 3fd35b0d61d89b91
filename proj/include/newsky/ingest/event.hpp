#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "newsky/time.hpp"

namespace newsky::ingest {

inline constexpr std::string_view kPostCollection = "app.bsky.feed.post";
inline constexpr std::string_view kRepostCollection = "app.bsky.feed.repost";
inline constexpr std::string_view kLikeCollection = "app.bsky.feed.like";

enum class EventKind { Post, Repost, Like, Other };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

// at://<authority>/<collection>/<rkey>
struct AtUri {
    std::string authority;
    std::string collection;
    std::string rkey;

    static std::optional<AtUri> parse(std::string_view text);
    std::string str() const;
};

struct StrongRef {
    std::string target_uri;
    std::string target_cid;
};

struct Facet {
    enum class Type { Link, Tag };
    Type type;
    std::string value;
};

// The subset of a post record the observatory consumes.
struct PostRecord {
    std::string text;
    std::vector<std::string> langs;
    std::vector<Facet> facets;
    std::vector<std::string> embed_uris;
};

struct FirehoseEvent {
    std::int64_t cursor = 0;
    std::string actor_id;
    EventKind kind = EventKind::Other;
    Timestamp created_at{};
    std::string rkey;
    std::optional<PostRecord> record;      // kind == Post
    std::optional<StrongRef> subject_ref;  // kind == Repost || kind == Like

    /// AT-URI of the record this event created.
    std::string record_uri() const;
};

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws DecodeError when the kind/payload invariants do not hold.
void validate(const FirehoseEvent& event);

}  // namespace newsky::ingest
