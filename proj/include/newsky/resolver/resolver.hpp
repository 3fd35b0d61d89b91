#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "newsky/ingest/event.hpp"
#include "newsky/parser/post_parser.hpp"
#include "newsky/resolver/lru_cache.hpp"
#include "newsky/time.hpp"

namespace newsky::resolver {

class EndpointDown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One entry of a getPosts response.
struct PostView {
    std::string uri;
    std::string author_did;
    nlohmann::json record;
    std::string indexed_at;
};

/// Parses a getPosts JSON body ({"posts": [...]}). Throws EndpointDown on a
/// body that does not have that shape.
std::vector<PostView> parse_get_posts_body(const nlohmann::json& body);

class PostFetcher {
public:
    virtual ~PostFetcher() = default;
    /// One upstream call. URIs the endpoint does not know are simply absent
    /// from the result. Throws EndpointDown.
    virtual std::vector<PostView> get_posts(std::span<const std::string> uris) = 0;
};

// HTTP GET <base>/xrpc/app.bsky.feed.getPosts?uris=..&uris=..
class HttpPostFetcher final : public PostFetcher {
public:
    explicit HttpPostFetcher(std::string base_url,
                             std::chrono::seconds timeout = std::chrono::seconds(10));
    std::vector<PostView> get_posts(std::span<const std::string> uris) override;

private:
    std::string base_url_;
    std::chrono::seconds timeout_;
};

/// Builds the request target for a getPosts call (path plus repeated
/// percent-encoded `uris` parameters).
std::string get_posts_target(std::span<const std::string> uris);

// In-process stand-in for the endpoint, backed by a getPosts-shaped document.
class FixturePostFetcher final : public PostFetcher {
public:
    explicit FixturePostFetcher(const nlohmann::json& get_posts_body);
    static std::shared_ptr<FixturePostFetcher> from_file(const std::string& path);

    std::vector<PostView> get_posts(std::span<const std::string> uris) override;

    std::uint64_t calls() const { return calls_; }
    void set_down(bool down) { down_ = down; }

private:
    std::unordered_map<std::string, PostView> posts_;
    std::atomic<std::uint64_t> calls_{0};
    std::atomic<bool> down_{false};
};

// Blocking token bucket; `acquire` waits until a token is available.
class TokenBucket {
public:
    TokenBucket(double rate_per_second, double burst);
    void acquire();

private:
    std::mutex mutex_;
    double rate_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

enum class OutcomeStatus { Resolved, NotFound, Failed };

struct Outcome {
    OutcomeStatus status = OutcomeStatus::Failed;
    std::shared_ptr<const parser::ParsedPost> post;  // set when Resolved
};

struct CacheEntry {
    std::string target_uri;
    Outcome outcome;
    Timestamp fetched_at{};
};

struct ResolverOptions {
    std::size_t batch_limit = 25;
    double rate_per_second = 10.0;
    std::size_t cache_capacity = 500'000;
    std::chrono::seconds not_found_ttl = std::chrono::hours(24);
};

struct ResolverStats {
    std::uint64_t upstream_calls = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t shared_waits = 0;
    std::uint64_t resolved = 0;
    std::uint64_t not_found = 0;
    std::uint64_t failed = 0;
};

/// Converts one getPosts entry to a parsed post.
parser::ParsedPost parse_post_view(const PostView& view);

// Thread-safe strong-reference resolver with an LRU cache and a single-flight
// map: concurrent misses for one URI share a single upstream fetch. Failed
// outcomes are never cached; NotFound entries expire after not_found_ttl.
class RefResolver {
public:
    using Clock = std::function<Timestamp()>;

    explicit RefResolver(std::shared_ptr<PostFetcher> fetcher, ResolverOptions options = {},
                         Clock clock = now_utc);

    /// Outcome for every distinct target URI in `batch`. Misses are fetched in
    /// chunks of at most batch_limit URIs per upstream call.
    std::map<std::string, Outcome> resolve(std::span<const ingest::StrongRef> batch);

    /// Seeds the cache with a post seen directly on the stream.
    void prime(parser::ParsedPost post);

    /// Cacheable entries, most recently used first.
    std::vector<CacheEntry> cache_entries() const;
    void load_cache(const std::vector<CacheEntry>& entries);

    ResolverStats stats() const;
    std::size_t cache_size() const;

private:
    std::optional<Outcome> cached(const std::string& uri);
    void fetch_chunk(std::span<const std::string> uris,
                     std::unordered_map<std::string, std::promise<Outcome>>& promises,
                     std::map<std::string, Outcome>& results);

    std::shared_ptr<PostFetcher> fetcher_;
    ResolverOptions options_;
    Clock clock_;
    TokenBucket bucket_;

    mutable std::mutex mutex_;
    LruCache<std::string, CacheEntry> cache_;
    std::unordered_map<std::string, std::shared_future<Outcome>> inflight_;
    ResolverStats stats_;
};

std::string_view to_string(OutcomeStatus status);

}  // namespace newsky::resolver
