#include "newsky/ingest/event.hpp"

namespace newsky::ingest {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Post: return "post";
        case EventKind::Repost: return "repost";
        case EventKind::Like: return "like";
        case EventKind::Other: return "other";
    }
    return "other";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
    if (text == "post") return EventKind::Post;
    if (text == "repost") return EventKind::Repost;
    if (text == "like") return EventKind::Like;
    if (text == "other") return EventKind::Other;
    return std::nullopt;
}

std::optional<AtUri> AtUri::parse(std::string_view text) {
    constexpr std::string_view scheme = "at://";
    if (text.substr(0, scheme.size()) != scheme) return std::nullopt;
    text.remove_prefix(scheme.size());
    const auto first = text.find('/');
    if (first == std::string_view::npos || first == 0) return std::nullopt;
    const auto second = text.find('/', first + 1);
    if (second == std::string_view::npos || second == first + 1) return std::nullopt;
    AtUri uri;
    uri.authority = std::string(text.substr(0, first));
    uri.collection = std::string(text.substr(first + 1, second - first - 1));
    uri.rkey = std::string(text.substr(second + 1));
    if (uri.rkey.empty() || uri.rkey.find('/') != std::string::npos) return std::nullopt;
    return uri;
}

std::string AtUri::str() const { return "at://" + authority + "/" + collection + "/" + rkey; }

std::string FirehoseEvent::record_uri() const {
    std::string_view collection = kPostCollection;
    if (kind == EventKind::Repost) collection = kRepostCollection;
    if (kind == EventKind::Like) collection = kLikeCollection;
    return AtUri{actor_id, std::string(collection), rkey}.str();
}

void validate(const FirehoseEvent& event) {
    if (event.actor_id.empty()) throw DecodeError("event without actor");
    switch (event.kind) {
        case EventKind::Post:
            if (!event.record) throw DecodeError("post event without record");
            break;
        case EventKind::Repost:
        case EventKind::Like:
            if (!event.subject_ref) throw DecodeError("engagement event without subject");
            if (!AtUri::parse(event.subject_ref->target_uri)) {
                throw DecodeError("subject uri is not an at:// uri: " + event.subject_ref->target_uri);
            }
            break;
        case EventKind::Other: break;
    }
}

}  // namespace newsky::ingest
