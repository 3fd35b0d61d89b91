#include "newsky/ingest/stream.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <stdexcept>

#include "newsky/ingest/frame_decoder.hpp"

namespace newsky::ingest {

StreamSource StreamSource::parse(std::string_view spec) {
    StreamSource source;
    if (spec.rfind("live:", 0) == 0) {
        source.mode = Mode::LiveWebsocket;
        source.location = std::string(spec.substr(5));
    } else if (spec.rfind("replay:", 0) == 0) {
        source.mode = Mode::ReplayFile;
        source.location = std::string(spec.substr(7));
    } else {
        throw std::invalid_argument("source must be live:<url> or replay:<path>, got '" +
                                    std::string(spec) + "'");
    }
    if (source.location.empty()) throw std::invalid_argument("empty source location");
    return source;
}

std::chrono::milliseconds backoff_delay(int attempt, std::chrono::milliseconds base,
                                        std::chrono::milliseconds cap, double unit_jitter) {
    const double exp = std::ldexp(static_cast<double>(base.count()), std::clamp(attempt, 0, 30));
    const double capped = std::min(exp, static_cast<double>(cap.count()));
    const double jittered = capped * (0.5 + 0.5 * std::clamp(unit_jitter, 0.0, 1.0));
    return std::chrono::milliseconds(static_cast<std::int64_t>(jittered));
}

EventStream::EventStream(std::unique_ptr<FrameTransport> transport,
                         std::optional<std::int64_t> resume_cursor, StreamOptions options)
    : transport_(std::move(transport)), options_(options), queue_(options.queue_capacity) {
    stats_.last_cursor = resume_cursor;
    reader_ = std::thread([this] { run(); });
}

EventStream::~EventStream() {
    stop();
    if (reader_.joinable()) reader_.join();
}

void EventStream::stop() {
    stopping_ = true;
    transport_->interrupt();
    queue_.close();
}

StreamStats EventStream::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

void EventStream::rethrow_if_failed() {
    std::exception_ptr failure;
    {
        std::lock_guard lock(stats_mutex_);
        failure = failure_;
    }
    if (failure) std::rethrow_exception(failure);
}

std::optional<FirehoseEvent> EventStream::next() {
    auto event = queue_.pop();
    if (!event) {
        rethrow_if_failed();
        return std::nullopt;
    }
    std::lock_guard lock(stats_mutex_);
    ++stats_.delivered;
    return event;
}

std::optional<FirehoseEvent> EventStream::next_for(std::chrono::milliseconds timeout,
                                                   bool& finished) {
    auto event = queue_.pop_for(timeout);
    finished = !event && queue_.drained();
    if (!event) {
        if (finished) rethrow_if_failed();
        return std::nullopt;
    }
    std::lock_guard lock(stats_mutex_);
    ++stats_.delivered;
    return event;
}

void EventStream::handle_frame(const RawFrame& raw) {
    DecodedFrame frame;
    try {
        if (transport_->encoding() == FrameEncoding::ReplayJsonLine) {
            frame = decode_replay_line(raw.bytes);
        } else {
            frame = decode_live_frame(
                std::span(reinterpret_cast<const std::uint8_t*>(raw.bytes.data()), raw.bytes.size()),
                raw.received_at);
        }
    } catch (const DecodeError&) {
        std::lock_guard lock(stats_mutex_);
        ++stats_.decode_errors;
        return;
    }

    std::optional<std::int64_t> last;
    {
        std::lock_guard lock(stats_mutex_);
        if (frame.signal == DecodedFrame::Signal::CursorGap) ++stats_.cursor_gaps;
        if (frame.signal == DecodedFrame::Signal::ServerError) ++stats_.server_errors;
        last = stats_.last_cursor;
    }
    if (!frame.cursor) return;
    if (last && *frame.cursor <= *last) {
        std::lock_guard lock(stats_mutex_);
        ++stats_.duplicates;
        return;
    }
    for (auto& event : frame.events) {
        if (!queue_.push(std::move(event))) return;
    }
    std::lock_guard lock(stats_mutex_);
    if (frame.skipped()) ++stats_.skipped;
    stats_.last_cursor = frame.cursor;
}

// Returns true when the stream reached its final end.
bool EventStream::pump() {
    while (!stopping_) {
        auto raw = transport_->read();
        if (!raw) return transport_->finite();
        handle_frame(*raw);
    }
    return true;
}

void EventStream::run() {
    std::mt19937_64 rng(options_.jitter_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::mutex sleep_mutex;
    std::condition_variable_any sleeper;
    int failures = 0;
    bool opened_once = false;

    auto wait_backoff = [&] {
        const auto delay =
            backoff_delay(failures - 1, options_.backoff_base, options_.backoff_cap, unit(rng));
        const auto deadline = std::chrono::steady_clock::now() + delay;
        std::unique_lock lock(sleep_mutex);
        while (!stopping_ && std::chrono::steady_clock::now() < deadline) {
            sleeper.wait_for(lock, std::min<std::chrono::steady_clock::duration>(
                                       deadline - std::chrono::steady_clock::now(),
                                       std::chrono::milliseconds(50)));
        }
    };

    while (!stopping_) {
        try {
            transport_->open(stats().last_cursor);
            if (opened_once) {
                std::lock_guard lock(stats_mutex_);
                ++stats_.reconnects;
            }
            opened_once = true;
            failures = 0;
            if (pump()) break;
        } catch (const ConnectFailed&) {
            ++failures;
            if (options_.max_reconnect_attempts && failures > *options_.max_reconnect_attempts) {
                std::lock_guard lock(stats_mutex_);
                failure_ = std::current_exception();
                break;
            }
            wait_backoff();
            continue;
        } catch (const TransportClosed&) {
            if (stopping_) break;
        }
        transport_->close();
        ++failures;
        if (options_.max_reconnect_attempts && failures > *options_.max_reconnect_attempts) {
            std::lock_guard lock(stats_mutex_);
            failure_ = std::make_exception_ptr(ConnectFailed("stream dropped and reconnects exhausted"));
            break;
        }
        wait_backoff();
    }
    transport_->close();
    queue_.close();
}

std::unique_ptr<EventStream> connect(const StreamSource& source, const StreamOptions& options) {
    std::unique_ptr<FrameTransport> transport;
    if (source.mode == StreamSource::Mode::ReplayFile) {
        std::ifstream probe(source.location);
        if (!probe) throw ConnectFailed("cannot open replay file: " + source.location);
        transport = std::make_unique<ReplayFileTransport>(source.location);
    } else {
        transport = make_websocket_transport(source.location);
    }
    return std::make_unique<EventStream>(std::move(transport), source.resume_cursor, options);
}

}  // namespace newsky::ingest
