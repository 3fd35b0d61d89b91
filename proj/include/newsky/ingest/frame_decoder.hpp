#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "newsky/ingest/event.hpp"

namespace newsky::ingest {

// Result of decoding one frame. An empty `events` list is a Skip: the frame
// still advances the cursor but carries nothing the pipeline consumes.
struct DecodedFrame {
    enum class Signal { None, CursorGap, ServerError };

    std::optional<std::int64_t> cursor;
    std::vector<FirehoseEvent> events;
    Signal signal = Signal::None;
    std::string message;

    bool skipped() const { return events.empty(); }
};

/// One line of the JSONL replay format. Throws DecodeError.
DecodedFrame decode_replay_line(std::string_view line);

/// One binary websocket message from a subscribeRepos relay: a CBOR header
/// ({op, t}) followed by a CBOR body. Throws DecodeError.
DecodedFrame decode_live_frame(std::span<const std::uint8_t> frame, Timestamp received_at);

/// app.bsky.feed.post lexicon record -> PostRecord.
PostRecord post_record_from_lexicon(const nlohmann::json& record);

/// Replay-format record object -> PostRecord. Throws DecodeError.
PostRecord post_record_from_replay(const nlohmann::json& record);
nlohmann::json post_record_to_replay(const PostRecord& record);

/// Serializes an event as one replay line (no trailing newline).
std::string to_replay_line(const FirehoseEvent& event);

}  // namespace newsky::ingest
