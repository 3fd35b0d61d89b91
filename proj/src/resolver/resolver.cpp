#include "newsky/resolver/resolver.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <thread>

#include "newsky/ingest/frame_decoder.hpp"

namespace newsky::resolver {

using nlohmann::json;

std::string_view to_string(OutcomeStatus status) {
    switch (status) {
        case OutcomeStatus::Resolved: return "resolved";
        case OutcomeStatus::NotFound: return "not_found";
        case OutcomeStatus::Failed: return "failed";
    }
    return "failed";
}

std::vector<PostView> parse_get_posts_body(const json& body) {
    const auto posts = body.find("posts");
    if (!body.is_object() || posts == body.end() || !posts->is_array()) {
        throw EndpointDown("getPosts response without a posts array");
    }
    std::vector<PostView> views;
    for (const auto& post : *posts) {
        if (!post.is_object() || !post.contains("uri") || !post["uri"].is_string()) continue;
        PostView view;
        view.uri = post["uri"].get<std::string>();
        if (const auto author = post.find("author"); author != post.end() && author->is_object()) {
            view.author_did = author->value("did", "");
        }
        if (view.author_did.empty()) {
            if (const auto uri = ingest::AtUri::parse(view.uri)) view.author_did = uri->authority;
        }
        view.record = post.value("record", json::object());
        view.indexed_at = post.value("indexedAt", "");
        views.push_back(std::move(view));
    }
    return views;
}

parser::ParsedPost parse_post_view(const PostView& view) {
    Timestamp created = now_utc();
    if (auto t = parse_rfc3339(view.record.value("createdAt", ""))) {
        created = *t;
    } else if (auto indexed = parse_rfc3339(view.indexed_at)) {
        created = *indexed;
    }
    return parser::parse_post_record(view.uri, view.author_did, created,
                                     ingest::post_record_from_lexicon(view.record));
}

FixturePostFetcher::FixturePostFetcher(const json& body) {
    for (auto& view : parse_get_posts_body(body)) {
        auto uri = view.uri;
        posts_.emplace(std::move(uri), std::move(view));
    }
}

std::shared_ptr<FixturePostFetcher> FixturePostFetcher::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open resolver fixture: " + path);
    return std::make_shared<FixturePostFetcher>(json::parse(in));
}

std::vector<PostView> FixturePostFetcher::get_posts(std::span<const std::string> uris) {
    ++calls_;
    if (down_) throw EndpointDown("fixture endpoint marked down");
    std::vector<PostView> out;
    for (const auto& uri : uris) {
        if (const auto it = posts_.find(uri); it != posts_.end()) out.push_back(it->second);
    }
    return out;
}

TokenBucket::TokenBucket(double rate_per_second, double burst)
    : rate_(rate_per_second), burst_(std::max(1.0, burst)), tokens_(burst_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
    if (rate_ <= 0) return;
    std::unique_lock lock(mutex_);
    while (true) {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
        lock.unlock();
        std::this_thread::sleep_for(wait);
        lock.lock();
    }
}

RefResolver::RefResolver(std::shared_ptr<PostFetcher> fetcher, ResolverOptions options, Clock clock)
    : fetcher_(std::move(fetcher)), options_(options), clock_(std::move(clock)),
      bucket_(options.rate_per_second, options.rate_per_second),
      cache_(options.cache_capacity) {
    if (options_.batch_limit == 0) options_.batch_limit = 1;
}

std::optional<Outcome> RefResolver::cached(const std::string& uri) {
    CacheEntry* entry = cache_.get(uri);
    if (!entry) return std::nullopt;
    if (entry->outcome.status == OutcomeStatus::NotFound &&
        clock_() - entry->fetched_at >= options_.not_found_ttl) {
        cache_.erase(uri);
        return std::nullopt;
    }
    if (entry->outcome.status == OutcomeStatus::Failed) {
        cache_.erase(uri);
        return std::nullopt;
    }
    return entry->outcome;
}

std::map<std::string, Outcome> RefResolver::resolve(std::span<const ingest::StrongRef> batch) {
    std::map<std::string, Outcome> results;
    std::vector<std::string> to_fetch;
    std::unordered_map<std::string, std::promise<Outcome>> promises;
    std::vector<std::pair<std::string, std::shared_future<Outcome>>> waits;

    {
        std::lock_guard lock(mutex_);
        std::set<std::string> seen;
        for (const auto& ref : batch) {
            const auto& uri = ref.target_uri;
            if (!seen.insert(uri).second) continue;
            if (auto hit = cached(uri)) {
                ++stats_.cache_hits;
                results.emplace(uri, *hit);
            } else if (const auto it = inflight_.find(uri); it != inflight_.end()) {
                ++stats_.shared_waits;
                waits.emplace_back(uri, it->second);
            } else {
                auto& promise = promises[uri];
                inflight_.emplace(uri, promise.get_future().share());
                to_fetch.push_back(uri);
            }
        }
    }

    for (std::size_t i = 0; i < to_fetch.size(); i += options_.batch_limit) {
        const auto n = std::min(options_.batch_limit, to_fetch.size() - i);
        fetch_chunk(std::span(to_fetch).subspan(i, n), promises, results);
    }
    for (auto& [uri, future] : waits) results.emplace(uri, future.get());
    return results;
}

void RefResolver::fetch_chunk(std::span<const std::string> uris,
                              std::unordered_map<std::string, std::promise<Outcome>>& promises,
                              std::map<std::string, Outcome>& results) {
    std::map<std::string, Outcome> chunk;
    bucket_.acquire();
    try {
        {
            std::lock_guard lock(mutex_);
            ++stats_.upstream_calls;
        }
        std::unordered_map<std::string, const PostView*> by_uri;
        const auto views = fetcher_->get_posts(uris);
        for (const auto& view : views) by_uri.emplace(view.uri, &view);
        for (const auto& uri : uris) {
            const auto it = by_uri.find(uri);
            if (it == by_uri.end()) {
                chunk[uri] = Outcome{OutcomeStatus::NotFound, nullptr};
            } else {
                chunk[uri] = Outcome{OutcomeStatus::Resolved,
                                     std::make_shared<const parser::ParsedPost>(
                                         parse_post_view(*it->second))};
            }
        }
    } catch (const std::exception&) {
        // EndpointDown or a malformed body: every miss in the chunk is retryable.
        for (const auto& uri : uris) chunk[uri] = Outcome{OutcomeStatus::Failed, nullptr};
    }

    const Timestamp now = clock_();
    std::lock_guard lock(mutex_);
    for (auto& [uri, outcome] : chunk) {
        switch (outcome.status) {
            case OutcomeStatus::Resolved: ++stats_.resolved; break;
            case OutcomeStatus::NotFound: ++stats_.not_found; break;
            case OutcomeStatus::Failed: ++stats_.failed; break;
        }
        if (outcome.status != OutcomeStatus::Failed) cache_.put(uri, CacheEntry{uri, outcome, now});
        inflight_.erase(uri);
        promises[uri].set_value(outcome);
        results.emplace(uri, outcome);
    }
}

void RefResolver::prime(parser::ParsedPost post) {
    auto uri = post.post_uri;
    Outcome outcome{OutcomeStatus::Resolved, std::make_shared<const parser::ParsedPost>(std::move(post))};
    std::lock_guard lock(mutex_);
    cache_.put(uri, CacheEntry{uri, std::move(outcome), clock_()});
}

std::vector<CacheEntry> RefResolver::cache_entries() const {
    std::vector<CacheEntry> out;
    std::lock_guard lock(mutex_);
    cache_.for_each([&](const std::string&, const CacheEntry& entry) { out.push_back(entry); });
    return out;
}

void RefResolver::load_cache(const std::vector<CacheEntry>& entries) {
    std::lock_guard lock(mutex_);
    // Oldest first so the most recent entries end up at the front.
    for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
        if (it->outcome.status == OutcomeStatus::Failed) continue;
        cache_.put(it->target_uri, *it);
    }
}

ResolverStats RefResolver::stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

std::size_t RefResolver::cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

}  // namespace newsky::resolver
