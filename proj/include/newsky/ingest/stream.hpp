#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "newsky/ingest/bounded_queue.hpp"
#include "newsky/ingest/event.hpp"
#include "newsky/ingest/transport.hpp"

namespace newsky::ingest {

struct StreamSource {
    enum class Mode { LiveWebsocket, ReplayFile };

    Mode mode = Mode::ReplayFile;
    std::string location;  // websocket url or file path
    std::optional<std::int64_t> resume_cursor;

    /// "live:<url>" or "replay:<path>". Throws std::invalid_argument.
    static StreamSource parse(std::string_view spec);
};

struct StreamOptions {
    std::size_t queue_capacity = 10'000;
    std::chrono::milliseconds backoff_base{1000};
    std::chrono::milliseconds backoff_cap{60'000};
    // nullopt retries forever. Counts consecutive failures only.
    std::optional<int> max_reconnect_attempts;
    std::uint64_t jitter_seed = 0x5eed;
};

struct StreamStats {
    std::uint64_t delivered = 0;
    std::uint64_t skipped = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t decode_errors = 0;
    std::uint64_t cursor_gaps = 0;
    std::uint64_t server_errors = 0;
    std::uint64_t reconnects = 0;
    std::optional<std::int64_t> last_cursor;
};

/// Exponential backoff with jitter in [delay/2, delay].
std::chrono::milliseconds backoff_delay(int attempt, std::chrono::milliseconds base,
                                        std::chrono::milliseconds cap, double unit_jitter);

// Cursor-ordered, resumable event sequence. One reader thread owns the
// transport and feeds a bounded queue; next() pops from it.
class EventStream {
public:
    EventStream(std::unique_ptr<FrameTransport> transport, std::optional<std::int64_t> resume_cursor,
                StreamOptions options = {});
    ~EventStream();

    EventStream(const EventStream&) = delete;
    EventStream& operator=(const EventStream&) = delete;

    /// Blocks for the next event; nullopt at end of stream or after stop().
    /// Rethrows ConnectFailed once reconnect attempts are exhausted.
    std::optional<FirehoseEvent> next();

    /// Like next() but gives up after `timeout`; `finished` reports end of stream.
    std::optional<FirehoseEvent> next_for(std::chrono::milliseconds timeout, bool& finished);

    void stop();
    StreamStats stats() const;
    std::size_t queue_high_water() const { return queue_.high_water(); }

private:
    void run();
    bool pump();
    void handle_frame(const RawFrame& raw);
    void rethrow_if_failed();

    std::unique_ptr<FrameTransport> transport_;
    StreamOptions options_;
    BoundedQueue<FirehoseEvent> queue_;
    std::atomic<bool> stopping_{false};

    mutable std::mutex stats_mutex_;
    StreamStats stats_;
    std::exception_ptr failure_;

    std::thread reader_;
};

/// Opens `source`. Replay files are checked eagerly and throw ConnectFailed
/// when unreadable; live connection failures surface from next().
std::unique_ptr<EventStream> connect(const StreamSource& source, const StreamOptions& options = {});

}  // namespace newsky::ingest
