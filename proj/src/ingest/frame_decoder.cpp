#include "newsky/ingest/frame_decoder.hpp"

#include "newsky/ingest/dagcbor.hpp"

namespace newsky::ingest {

using nlohmann::json;

namespace {

constexpr std::string_view kLinkFeature = "app.bsky.richtext.facet#link";
constexpr std::string_view kTagFeature = "app.bsky.richtext.facet#tag";

std::string string_field(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return {};
    return it->get<std::string>();
}

void add_external_embed(const json& embed, PostRecord& out) {
    if (!embed.is_object()) return;
    const auto type = string_field(embed, "$type");
    if (type == "app.bsky.embed.external") {
        const auto ext = embed.find("external");
        if (ext != embed.end() && ext->is_object()) {
            auto uri = string_field(*ext, "uri");
            if (!uri.empty()) out.embed_uris.push_back(std::move(uri));
        }
    } else if (type == "app.bsky.embed.recordWithMedia") {
        const auto media = embed.find("media");
        if (media != embed.end()) add_external_embed(*media, out);
    }
}

StrongRef strong_ref_from(const json& subject) {
    if (!subject.is_object()) throw DecodeError("subject is not an object");
    StrongRef ref{string_field(subject, "uri"), string_field(subject, "cid")};
    if (ref.target_uri.empty()) throw DecodeError("subject without uri");
    return ref;
}

const json& require(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw DecodeError(std::string("missing field '") + key + "'");
    return *it;
}

DecodedFrame decode_commit(const json& body, Timestamp received_at) {
    DecodedFrame frame;
    const auto& seq = require(body, "seq");
    if (!seq.is_number_integer()) throw DecodeError("commit seq is not an integer");
    frame.cursor = seq.get<std::int64_t>();

    const auto& repo = require(body, "repo");
    const auto& ops = require(body, "ops");
    if (!repo.is_string() || !ops.is_array()) throw DecodeError("malformed commit body");
    if (body.value("tooBig", false)) return frame;

    Timestamp fallback = received_at;
    if (const auto it = body.find("time"); it != body.end() && it->is_string()) {
        if (auto t = parse_rfc3339(it->get_ref<const std::string&>())) fallback = *t;
    }

    std::optional<dagcbor::CarFile> car;
    for (const auto& op : ops) {
        if (!op.is_object()) throw DecodeError("commit op is not an object");
        if (string_field(op, "action") != "create") continue;
        const auto path = string_field(op, "path");
        const auto slash = path.find('/');
        if (slash == std::string::npos) throw DecodeError("malformed op path: " + path);
        const std::string_view collection = std::string_view(path).substr(0, slash);

        FirehoseEvent event;
        if (collection == kPostCollection) {
            event.kind = EventKind::Post;
        } else if (collection == kRepostCollection) {
            event.kind = EventKind::Repost;
        } else if (collection == kLikeCollection) {
            event.kind = EventKind::Like;
        } else {
            continue;
        }

        if (!car) {
            const auto& blocks = require(body, "blocks");
            if (!blocks.is_binary()) throw DecodeError("commit blocks are not a byte string");
            car = dagcbor::parse_car(blocks.get_binary());
        }
        const auto block = car->blocks.find(dagcbor::cid_key(require(op, "cid")));
        if (block == car->blocks.end()) throw DecodeError("op cid not present in blocks: " + path);
        const json record = dagcbor::decode(block->second);
        if (!record.is_object()) throw DecodeError("record is not a map");

        event.cursor = *frame.cursor;
        event.actor_id = repo.get<std::string>();
        event.rkey = path.substr(slash + 1);
        event.created_at = fallback;
        if (auto t = parse_rfc3339(string_field(record, "createdAt"))) event.created_at = *t;
        if (event.kind == EventKind::Post) {
            event.record = post_record_from_lexicon(record);
        } else {
            event.subject_ref = strong_ref_from(require(record, "subject"));
        }
        validate(event);
        frame.events.push_back(std::move(event));
    }
    return frame;
}

}  // namespace

PostRecord post_record_from_lexicon(const json& record) {
    PostRecord out;
    if (!record.is_object()) return out;
    out.text = string_field(record, "text");
    if (const auto it = record.find("langs"); it != record.end() && it->is_array()) {
        for (const auto& lang : *it) {
            if (lang.is_string()) out.langs.push_back(lang.get<std::string>());
        }
    }
    if (const auto it = record.find("facets"); it != record.end() && it->is_array()) {
        for (const auto& facet : *it) {
            const auto features = facet.find("features");
            if (!facet.is_object() || features == facet.end() || !features->is_array()) continue;
            for (const auto& feature : *features) {
                if (!feature.is_object()) continue;
                const auto type = string_field(feature, "$type");
                if (type == kLinkFeature) {
                    auto uri = string_field(feature, "uri");
                    if (!uri.empty()) out.facets.push_back({Facet::Type::Link, std::move(uri)});
                } else if (type == kTagFeature) {
                    auto tag = string_field(feature, "tag");
                    if (!tag.empty()) out.facets.push_back({Facet::Type::Tag, std::move(tag)});
                }
            }
        }
    }
    if (const auto it = record.find("embed"); it != record.end()) add_external_embed(*it, out);
    return out;
}

PostRecord post_record_from_replay(const json& record) {
    if (!record.is_object()) throw DecodeError("record is not an object");
    PostRecord out;
    out.text = string_field(record, "text");
    if (const auto it = record.find("langs"); it != record.end()) {
        if (!it->is_array()) throw DecodeError("record.langs is not an array");
        for (const auto& lang : *it) {
            if (!lang.is_string()) throw DecodeError("record.langs entry is not a string");
            out.langs.push_back(lang.get<std::string>());
        }
    }
    if (const auto it = record.find("facets"); it != record.end()) {
        if (!it->is_array()) throw DecodeError("record.facets is not an array");
        for (const auto& facet : *it) {
            if (!facet.is_object()) throw DecodeError("facet is not an object");
            const auto type = string_field(facet, "type");
            auto value = string_field(facet, "value");
            if (type == "link") {
                out.facets.push_back({Facet::Type::Link, std::move(value)});
            } else if (type == "tag") {
                out.facets.push_back({Facet::Type::Tag, std::move(value)});
            }
        }
    }
    if (const auto it = record.find("embed_uris"); it != record.end()) {
        if (!it->is_array()) throw DecodeError("record.embed_uris is not an array");
        for (const auto& uri : *it) {
            if (!uri.is_string()) throw DecodeError("embed uri is not a string");
            out.embed_uris.push_back(uri.get<std::string>());
        }
    }
    return out;
}

json post_record_to_replay(const PostRecord& record) {
    json facets = json::array();
    for (const auto& f : record.facets) {
        facets.push_back({{"type", f.type == Facet::Type::Link ? "link" : "tag"}, {"value", f.value}});
    }
    return {{"text", record.text},
            {"langs", record.langs},
            {"facets", std::move(facets)},
            {"embed_uris", record.embed_uris}};
}

DecodedFrame decode_replay_line(std::string_view line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw DecodeError(std::string("replay: invalid json: ") + e.what());
    }
    if (!obj.is_object()) throw DecodeError("replay: line is not an object");

    const auto& cursor = require(obj, "cursor");
    if (!cursor.is_number_integer()) throw DecodeError("replay: cursor is not an integer");
    DecodedFrame frame;
    frame.cursor = cursor.get<std::int64_t>();

    const auto& kind_field = require(obj, "kind");
    if (!kind_field.is_string()) throw DecodeError("replay: kind is not a string");
    const auto kind = parse_event_kind(kind_field.get_ref<const std::string&>());
    if (!kind || *kind == EventKind::Other) return frame;

    FirehoseEvent event;
    event.cursor = *frame.cursor;
    event.kind = *kind;
    event.rkey = std::to_string(event.cursor);
    const auto& actor = require(obj, "actor");
    if (!actor.is_string()) throw DecodeError("replay: actor is not a string");
    event.actor_id = actor.get<std::string>();
    const auto& created = require(obj, "created_at");
    const auto ts = created.is_string() ? parse_rfc3339(created.get_ref<const std::string&>())
                                        : std::nullopt;
    if (!ts) throw DecodeError("replay: created_at is not RFC 3339");
    event.created_at = *ts;

    if (event.kind == EventKind::Post) {
        event.record = post_record_from_replay(require(obj, "record"));
    } else {
        event.subject_ref = strong_ref_from(require(obj, "subject"));
    }
    validate(event);
    frame.events.push_back(std::move(event));
    return frame;
}

std::string to_replay_line(const FirehoseEvent& event) {
    json obj = {{"cursor", event.cursor},
                {"kind", to_string(event.kind)},
                {"actor", event.actor_id},
                {"created_at", format_rfc3339(event.created_at)}};
    if (event.record) obj["record"] = post_record_to_replay(*event.record);
    if (event.subject_ref) {
        obj["subject"] = {{"uri", event.subject_ref->target_uri}, {"cid", event.subject_ref->target_cid}};
    }
    return obj.dump();
}

DecodedFrame decode_live_frame(std::span<const std::uint8_t> data, Timestamp received_at) {
    if (data.empty()) throw DecodeError("empty frame");
    const auto header_len = dagcbor::item_length(data);
    const json header = dagcbor::decode(data.first(header_len));
    const auto rest = data.subspan(header_len);
    if (rest.empty()) throw DecodeError("frame without body");
    if (dagcbor::item_length(rest) != rest.size()) throw DecodeError("trailing bytes after body");
    const json body = dagcbor::decode(rest);
    if (!header.is_object() || !body.is_object()) throw DecodeError("frame parts are not maps");

    const auto op = header.find("op");
    if (op == header.end() || !op->is_number_integer()) throw DecodeError("header without op");
    DecodedFrame frame;
    if (op->get<int>() == -1) {
        frame.signal = DecodedFrame::Signal::ServerError;
        frame.message = string_field(body, "error");
        if (auto msg = string_field(body, "message"); !msg.empty()) frame.message += ": " + msg;
        return frame;
    }
    if (op->get<int>() != 1) throw DecodeError("unknown frame op");

    const auto type = string_field(header, "t");
    if (type == "#commit") return decode_commit(body, received_at);
    if (type == "#info") {
        if (string_field(body, "name") == "OutdatedCursor") {
            frame.signal = DecodedFrame::Signal::CursorGap;
            frame.message = string_field(body, "message");
        }
        return frame;
    }
    if (const auto seq = body.find("seq"); seq != body.end() && seq->is_number_integer()) {
        frame.cursor = seq->get<std::int64_t>();
    }
    return frame;
}

}  // namespace newsky::ingest
