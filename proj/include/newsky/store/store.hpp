#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "newsky/ingest/event.hpp"
#include "newsky/ratings/ratings.hpp"
#include "newsky/resolver/resolver.hpp"
#include "newsky/time.hpp"

struct sqlite3;

namespace newsky::store {

using ingest::EventKind;

struct NewsLinkObservation {
    EventKind event_kind = EventKind::Post;
    std::string actor_id;
    Timestamp observed_at{};
    std::string raw_url;
    std::string domain;
    std::string post_uri;  // the origin post
    std::vector<std::string> hashtags;
    std::int64_t cursor = 0;
};

struct PrevalenceBucket {
    Timestamp bucket_start{};
    std::int64_t total_links = 0;
    std::int64_t total_rated = 0;
    std::int64_t reliable = 0;
    std::int64_t unreliable = 0;

    bool operator==(const PrevalenceBucket&) const = default;
};

struct RelativePoint {
    Timestamp bucket_start{};
    std::optional<double> ratio;  // unreliable / total_rated; empty when nothing is rated
};

enum class Dedup { PerLink, PerPost };
std::optional<Dedup> parse_dedup(std::string_view text);

// Subset of {post, repost, like}.
class KindSet {
public:
    static KindSet all() { return KindSet(0b111); }
    static KindSet none() { return KindSet(0); }
    /// Comma-separated kind names, e.g. "post,repost". nullopt on an unknown name.
    static std::optional<KindSet> parse(std::string_view text);

    KindSet& add(EventKind kind);
    bool contains(EventKind kind) const;
    bool empty() const { return bits_ == 0; }
    std::vector<EventKind> kinds() const;

    bool operator==(const KindSet&) const = default;

private:
    explicit KindSet(unsigned bits) : bits_(bits) {}
    unsigned bits_;
};

// Half-open [from, to).
struct Window {
    Timestamp from{};
    Timestamp to{};

    bool empty() const { return to <= from; }
};

struct PrevalenceQuery {
    Window window;
    Granularity granularity = Granularity::Hour;
    Dedup dedup = Dedup::PerLink;
    KindSet kinds = KindSet::all();
};

struct EngagementRecord {
    std::int64_t cursor = 0;
    EventKind kind = EventKind::Like;
    std::string actor_id;
    std::string subject_author;
    std::string post_uri;
    Timestamp observed_at{};
    bool news_linking = false;
};

// Text of a post or repost in an actor's timeline.
struct TimelineEntry {
    std::string actor_id;
    EventKind kind = EventKind::Post;
    Timestamp observed_at{};
    std::string post_uri;
    std::string text;
    std::optional<std::string> lang;
};

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class StorageFull : public StoreError {
public:
    using StoreError::StoreError;
};
class StoreLocked : public StoreError {
public:
    using StoreError::StoreError;
};
class RangeTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StoreOptions {
    bool read_only = false;
    std::size_t max_buckets = 20'000;
    std::chrono::milliseconds commit_interval{1000};
    std::size_t commit_batch = 20'000;
};

// Embedded SQLite store. Writers hold an exclusive lock file next to the
// database (one writer process); readers may be other processes.
// Aggregates are kept per (hour, domain, kind); classification happens at
// query time against whatever RatingTable the caller passes.
class Store {
public:
    /// Throws StoreLocked when another writer holds the lock, StoreError otherwise.
    static std::unique_ptr<Store> open(const std::filesystem::path& path, StoreOptions options = {});
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // ---- writer side (buffered in a transaction; see commit) ----
    void record(const NewsLinkObservation& obs);
    void record_engagement(const EngagementRecord& engagement);
    void record_timeline(const TimelineEntry& entry);
    void set_meta(std::string_view key, std::string_view value);
    void save_resolver_cache(const std::vector<resolver::CacheEntry>& entries);

    /// Commits the open write transaction, if any.
    void commit();
    /// Commits when the batch is full or commit_interval has passed.
    void maybe_commit();

    // ---- reader side ----
    std::optional<std::string> meta(std::string_view key) const;
    std::vector<resolver::CacheEntry> load_resolver_cache(std::size_t limit) const;

    /// Contiguous zero-filled buckets covering the window. Throws RangeTooLarge.
    std::vector<PrevalenceBucket> query_absolute(const PrevalenceQuery& query,
                                                 const ratings::RatingTable& table) const;
    std::vector<RelativePoint> query_relative(const PrevalenceQuery& query,
                                              const ratings::RatingTable& table) const;

    /// Link counts per domain; an absent window means everything stored.
    std::map<std::string, std::int64_t> domain_counts(const std::optional<Window>& window,
                                                      KindSet kinds, Dedup dedup) const;
    std::vector<NewsLinkObservation> observations(const std::optional<Window>& window,
                                                  KindSet kinds) const;
    std::vector<EngagementRecord> engagements(const std::optional<Window>& window) const;
    std::vector<TimelineEntry> timelines(const std::optional<Window>& window) const;

    std::uint64_t observation_count() const;
    std::uint64_t size_bytes() const;
    const std::filesystem::path& path() const { return path_; }

    /// Bucket count for a window, as used by the RangeTooLarge check.
    static std::size_t bucket_count(const Window& window, Granularity granularity);

private:
    Store(std::filesystem::path path, StoreOptions options);
    void exec(const char* sql) const;
    void ensure_transaction();
    void bump_pending();

    std::filesystem::path path_;
    StoreOptions options_;
    sqlite3* db_ = nullptr;
    int lock_fd_ = -1;
    mutable std::recursive_mutex mutex_;
    bool in_transaction_ = false;
    std::size_t pending_ = 0;
    std::chrono::steady_clock::time_point last_commit_;
};

/// Zero-filled buckets covering the query window. Throws RangeTooLarge
/// beyond max_buckets.
std::vector<PrevalenceBucket> zero_buckets(const PrevalenceQuery& query, std::size_t max_buckets);

std::vector<RelativePoint> to_relative(const std::vector<PrevalenceBucket>& buckets);

/// CSV export: bucket_start,total_links,total_rated,reliable,unreliable
std::string prevalence_csv(const std::vector<PrevalenceBucket>& buckets);

}  // namespace newsky::store
