#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>

#include "newsky/ingest/stream.hpp"
#include "newsky/resolver/resolver.hpp"
#include "newsky/store/store.hpp"

namespace newsky::app {

struct PipelineOptions {
    ingest::StreamSource source;
    ingest::StreamOptions stream;
    resolver::ResolverOptions resolver;
    std::shared_ptr<resolver::PostFetcher> fetcher;
    int max_resolve_attempts = 3;
    std::chrono::milliseconds retry_base{250};
    // Engagements wait at most this long for a full resolve batch.
    std::chrono::milliseconds resolve_linger{500};
    const std::atomic<bool>* stop = nullptr;
};

struct PipelineStats {
    std::uint64_t events = 0;
    std::uint64_t posts = 0;
    std::uint64_t reposts = 0;
    std::uint64_t likes = 0;
    std::uint64_t observations = 0;
    std::uint64_t engagements = 0;
    std::uint64_t not_found = 0;
    std::uint64_t dropped_unresolved = 0;  // Failed after every retry
    std::uint64_t already_stored = 0;      // cursor at or below the stored one
    ingest::StreamStats stream;
    resolver::ResolverStats resolver;
    std::optional<std::int64_t> last_cursor;
    bool interrupted = false;
};

// Meta keys the pipeline maintains in the store.
inline constexpr const char* kMetaLastCursor = "last_cursor";
inline constexpr const char* kMetaHeadCursor = "head_cursor";
inline constexpr const char* kMetaDecodeErrors = "decode_errors";

/// Stream -> parse/resolve -> store, until end of stream or *options.stop.
/// Without an explicit resume cursor the stream resumes after the store's
/// last_cursor; events at or below it are never written twice.
/// Throws ingest::ConnectFailed when the source cannot be opened.
PipelineStats run_pipeline(store::Store& store, PipelineOptions options);

}  // namespace newsky::app
