#include "newsky/app/pipeline.hpp"

#include <thread>

#include "newsky/app/log.hpp"
#include "newsky/parser/post_parser.hpp"

namespace newsky::app {

namespace {

using ingest::EventKind;
using ingest::FirehoseEvent;
using resolver::OutcomeStatus;

struct Pending {
    FirehoseEvent event;
    std::optional<parser::ParsedPost> post;  // parsed at arrival for Post events
};

std::optional<std::int64_t> meta_int(const store::Store& store, const char* key) {
    const auto text = store.meta(key);
    if (!text) return std::nullopt;
    try {
        return std::stoll(*text);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

class Runner {
public:
    Runner(store::Store& store, PipelineOptions options)
        : store_(store), options_(std::move(options)), resolver_(options_.fetcher, options_.resolver) {}

    PipelineStats run() {
        const auto stored = meta_int(store_, kMetaLastCursor);
        stored_cursor_ = stored;
        decode_base_ = meta_int(store_, kMetaDecodeErrors).value_or(0);
        if (!options_.source.resume_cursor) options_.source.resume_cursor = stored;
        resolver_.load_cache(store_.load_resolver_cache(options_.resolver.cache_capacity));

        stream_ = ingest::connect(options_.source, options_.stream);
        log_info("ingest started", {{"source", options_.source.location},
                                    {"resume_cursor", options_.source.resume_cursor
                                                          ? nlohmann::json(*options_.source.resume_cursor)
                                                          : nlohmann::json(nullptr)}});
        try {
            loop();
        } catch (...) {
            finish();
            throw;
        }
        finish();
        return stats_;
    }

private:
    void loop() {
        while (true) {
            if (options_.stop && options_.stop->load()) {
                stats_.interrupted = true;
                return;
            }
            bool finished = false;
            auto event = stream_->next_for(std::chrono::milliseconds(100), finished);
            if (event) {
                accept(std::move(*event));
            } else if (finished) {
                return;
            }
            if (engagements_pending_ > 0 &&
                (engagements_pending_ >= options_.resolver.batch_limit ||
                 std::chrono::steady_clock::now() - pending_since_ >= options_.resolve_linger)) {
                flush();
            }
            store_.maybe_commit();
        }
    }

    void finish() {
        stream_->stop();
        flush();
        stats_.stream = stream_->stats();
        stats_.resolver = resolver_.stats();
        checkpoint();
        store_.save_resolver_cache(resolver_.cache_entries());
        store_.commit();
        log_info("ingest stopped", {{"events", stats_.events},
                                    {"observations", stats_.observations},
                                    {"decode_errors", stats_.stream.decode_errors},
                                    {"last_cursor", stats_.last_cursor ? nlohmann::json(*stats_.last_cursor)
                                                                       : nlohmann::json(nullptr)}});
    }

    void accept(FirehoseEvent event) {
        if (stored_cursor_ && event.cursor <= *stored_cursor_) {
            ++stats_.already_stored;
            return;
        }
        ++stats_.events;
        Pending item{std::move(event), std::nullopt};
        if (item.event.kind == EventKind::Post) {
            item.post = parser::parse_post(item.event);
            resolver_.prime(*item.post);
        }
        if (pending_.empty() && item.event.kind == EventKind::Post) {
            write(item, std::nullopt);
            processed_ = item.event.cursor;
            checkpoint();
            return;
        }
        if (item.event.kind != EventKind::Post) {
            if (engagements_pending_ == 0) pending_since_ = std::chrono::steady_clock::now();
            ++engagements_pending_;
        }
        pending_.push_back(std::move(item));
    }

    // Resolves every pending engagement, then writes the pending events in order.
    void flush() {
        if (pending_.empty()) return;
        std::vector<ingest::StrongRef> refs;
        for (const auto& p : pending_) {
            if (p.event.subject_ref) refs.push_back(*p.event.subject_ref);
        }
        auto outcomes = resolve_with_retries(refs);
        for (const auto& p : pending_) {
            std::optional<resolver::Outcome> outcome;
            if (p.event.subject_ref) {
                const auto it = outcomes.find(p.event.subject_ref->target_uri);
                outcome = it == outcomes.end() ? resolver::Outcome{} : it->second;
            }
            write(p, outcome);
            processed_ = p.event.cursor;
        }
        pending_.clear();
        engagements_pending_ = 0;
        checkpoint();
    }

    std::map<std::string, resolver::Outcome> resolve_with_retries(const std::vector<ingest::StrongRef>& refs) {
        auto outcomes = resolver_.resolve(refs);
        for (int attempt = 1; attempt < options_.max_resolve_attempts; ++attempt) {
            std::vector<ingest::StrongRef> failed;
            for (const auto& ref : refs) {
                if (outcomes[ref.target_uri].status == OutcomeStatus::Failed) failed.push_back(ref);
            }
            if (failed.empty() || (options_.stop && options_.stop->load())) break;
            std::this_thread::sleep_for(options_.retry_base * (1 << (attempt - 1)));
            for (auto& [uri, outcome] : resolver_.resolve(failed)) outcomes[uri] = outcome;
        }
        return outcomes;
    }

    void write(const Pending& item, const std::optional<resolver::Outcome>& outcome) {
        const auto& e = item.event;
        switch (e.kind) {
            case EventKind::Post:
                ++stats_.posts;
                record_links(e, *item.post, e.record_uri());
                store_.record_timeline({e.actor_id, EventKind::Post, e.created_at, e.record_uri(), item.post->text,
                                        item.post->lang});
                return;
            case EventKind::Repost:
                ++stats_.reposts;
                break;
            case EventKind::Like:
                ++stats_.likes;
                break;
            case EventKind::Other:
                return;
        }
        const auto& target = e.subject_ref->target_uri;
        const auto status = outcome ? outcome->status : OutcomeStatus::Failed;
        if (status == OutcomeStatus::Failed) {
            ++stats_.dropped_unresolved;
            return;
        }
        store::EngagementRecord engagement{e.cursor, e.kind, e.actor_id, "", target, e.created_at, false};
        if (const auto uri = ingest::AtUri::parse(target)) engagement.subject_author = uri->authority;
        if (status == OutcomeStatus::NotFound) {
            ++stats_.not_found;
        } else {
            const auto& post = *outcome->post;
            if (!post.actor_id.empty()) engagement.subject_author = post.actor_id;
            engagement.news_linking = !post.urls.empty();
            record_links(e, post, target);
            if (e.kind == EventKind::Repost) {
                store_.record_timeline({e.actor_id, EventKind::Repost, e.created_at, target, post.text, post.lang});
            }
        }
        store_.record_engagement(engagement);
        ++stats_.engagements;
    }

    void record_links(const FirehoseEvent& e, const parser::ParsedPost& post, const std::string& post_uri) {
        for (const auto& link : post.urls) {
            store_.record({e.kind, e.actor_id, e.created_at, link.raw_url, link.domain, post_uri, post.hashtags,
                           e.cursor});
            ++stats_.observations;
        }
    }

    void checkpoint() {
        const auto s = stream_->stats();
        if (processed_) {
            stats_.last_cursor = processed_;
            store_.set_meta(kMetaLastCursor, std::to_string(*processed_));
        } else if (stored_cursor_) {
            stats_.last_cursor = stored_cursor_;
        }
        if (s.last_cursor) store_.set_meta(kMetaHeadCursor, std::to_string(*s.last_cursor));
        store_.set_meta(kMetaDecodeErrors, std::to_string(decode_base_ + static_cast<std::int64_t>(s.decode_errors)));
    }

    store::Store& store_;
    PipelineOptions options_;
    resolver::RefResolver resolver_;
    std::unique_ptr<ingest::EventStream> stream_;
    PipelineStats stats_;

    std::optional<std::int64_t> stored_cursor_;
    std::optional<std::int64_t> processed_;
    std::int64_t decode_base_ = 0;
    std::vector<Pending> pending_;
    std::size_t engagements_pending_ = 0;
    std::chrono::steady_clock::time_point pending_since_;
};

}  // namespace

PipelineStats run_pipeline(store::Store& store, PipelineOptions options) {
    if (!options.fetcher) throw std::invalid_argument("pipeline needs a post fetcher");
    return Runner(store, std::move(options)).run();
}

}  // namespace newsky::app
