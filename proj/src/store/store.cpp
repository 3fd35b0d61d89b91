#include "newsky/store/store.hpp"

#include <fcntl.h>
#include <sqlite3.h>
#include <sys/file.h>
#include <unistd.h>

#include <limits>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "newsky/parser/post_parser.hpp"

namespace newsky::store {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta(
  key TEXT PRIMARY KEY,
  value TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS observations(
  id INTEGER PRIMARY KEY,
  cursor INTEGER NOT NULL,
  kind INTEGER NOT NULL,
  actor TEXT NOT NULL,
  observed_at INTEGER NOT NULL,
  raw_url TEXT NOT NULL,
  domain TEXT NOT NULL,
  post_uri TEXT NOT NULL,
  hashtags TEXT NOT NULL);
CREATE INDEX IF NOT EXISTS observations_time ON observations(observed_at);
CREATE TABLE IF NOT EXISTS link_counts(
  hour INTEGER NOT NULL,
  domain TEXT NOT NULL,
  kind INTEGER NOT NULL,
  links INTEGER NOT NULL,
  posts INTEGER NOT NULL,
  PRIMARY KEY(hour, domain, kind)) WITHOUT ROWID;
CREATE TABLE IF NOT EXISTS post_domains(
  kind INTEGER NOT NULL,
  actor TEXT NOT NULL,
  post_uri TEXT NOT NULL,
  domain TEXT NOT NULL,
  PRIMARY KEY(kind, actor, post_uri, domain)) WITHOUT ROWID;
CREATE TABLE IF NOT EXISTS engagements(
  id INTEGER PRIMARY KEY,
  cursor INTEGER NOT NULL,
  kind INTEGER NOT NULL,
  actor TEXT NOT NULL,
  subject_author TEXT NOT NULL,
  post_uri TEXT NOT NULL,
  observed_at INTEGER NOT NULL,
  news INTEGER NOT NULL);
CREATE INDEX IF NOT EXISTS engagements_time ON engagements(observed_at);
CREATE TABLE IF NOT EXISTS timelines(
  id INTEGER PRIMARY KEY,
  actor TEXT NOT NULL,
  kind INTEGER NOT NULL,
  observed_at INTEGER NOT NULL,
  post_uri TEXT NOT NULL,
  text TEXT NOT NULL,
  lang TEXT);
CREATE INDEX IF NOT EXISTS timelines_time ON timelines(observed_at);
CREATE TABLE IF NOT EXISTS resolver_cache(
  seq INTEGER PRIMARY KEY,
  uri TEXT NOT NULL UNIQUE,
  status INTEGER NOT NULL,
  post TEXT,
  fetched_at INTEGER NOT NULL);
)sql";

int kind_code(EventKind kind) { return static_cast<int>(kind); }
EventKind kind_from(int code) { return static_cast<EventKind>(code); }

[[noreturn]] void fail(sqlite3* db, int rc, std::string_view what) {
    std::string msg = std::string(what) + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc));
    if (rc == SQLITE_FULL) throw StorageFull(msg);
    throw StoreError(msg);
}

class Statement {
public:
    Statement(sqlite3* db, const char* sql) : db_(db) {
        const int rc = sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr);
        if (rc != SQLITE_OK) fail(db, rc, "prepare");
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int idx, std::int64_t v) {
        sqlite3_bind_int64(stmt_, idx, v);
        return *this;
    }
    Statement& bind(int idx, std::string_view v) {
        sqlite3_bind_text(stmt_, idx, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
        return *this;
    }
    Statement& bind_null(int idx) {
        sqlite3_bind_null(stmt_, idx);
        return *this;
    }

    /// True while a row is available.
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        fail(db_, rc, "step");
    }
    void run() {
        while (step()) {
        }
    }

    std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }
    std::string text(int col) const {
        const auto* p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p),
                               static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string();
    }
    bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

std::string kind_filter(KindSet kinds) {
    std::string sql = "kind IN (";
    bool first = true;
    for (const auto kind : kinds.kinds()) {
        if (!first) sql += ',';
        sql += std::to_string(kind_code(kind));
        first = false;
    }
    if (first) sql += "-1";
    return sql + ")";
}

// [lo, hi) bounds on a unix-seconds column, or an unbounded range.
std::pair<std::int64_t, std::int64_t> bounds(const std::optional<Window>& window) {
    if (!window) return {std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::max()};
    return {to_unix(window->from), to_unix(window->to)};
}

}  // namespace

std::optional<Dedup> parse_dedup(std::string_view text) {
    if (text == "per_link") return Dedup::PerLink;
    if (text == "per_post") return Dedup::PerPost;
    return std::nullopt;
}

std::optional<KindSet> KindSet::parse(std::string_view text) {
    KindSet set = none();
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto name = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
        const auto kind = ingest::parse_event_kind(name);
        if (!kind || *kind == EventKind::Other) return std::nullopt;
        set.add(*kind);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return set;
}

KindSet& KindSet::add(EventKind kind) {
    if (kind != EventKind::Other) bits_ |= 1u << static_cast<unsigned>(kind);
    return *this;
}

bool KindSet::contains(EventKind kind) const {
    return kind != EventKind::Other && (bits_ & (1u << static_cast<unsigned>(kind))) != 0;
}

std::vector<EventKind> KindSet::kinds() const {
    std::vector<EventKind> out;
    for (const auto kind : {EventKind::Post, EventKind::Repost, EventKind::Like}) {
        if (contains(kind)) out.push_back(kind);
    }
    return out;
}

Store::Store(std::filesystem::path path, StoreOptions options)
    : path_(std::move(path)), options_(options), last_commit_(std::chrono::steady_clock::now()) {}

std::unique_ptr<Store> Store::open(const std::filesystem::path& path, StoreOptions options) {
    std::unique_ptr<Store> store(new Store(path, options));
    if (!options.read_only) {
        const auto lock_path = path.string() + ".lock";
        store->lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (store->lock_fd_ < 0) throw StoreError("cannot create lock file " + lock_path);
        if (::flock(store->lock_fd_, LOCK_EX | LOCK_NB) != 0) {
            throw StoreLocked("store " + path.string() + " is locked by another writer");
        }
    }
    const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX;
    const int rc = sqlite3_open_v2(path.c_str(), &store->db_, flags, nullptr);
    if (rc != SQLITE_OK) fail(store->db_, rc, "open " + path.string());
    sqlite3_busy_timeout(store->db_, 5000);
    store->exec("PRAGMA journal_mode=WAL");
    store->exec("PRAGMA synchronous=NORMAL");
    if (!options.read_only) store->exec(kSchema);
    return store;
}

Store::~Store() {
    try {
        commit();
    } catch (...) {
    }
    if (db_) sqlite3_close_v2(db_);
    if (lock_fd_ >= 0) ::close(lock_fd_);
}

void Store::exec(const char* sql) const {
    char* err = nullptr;
    const int rc = sqlite3_exec(db_, sql, nullptr, nullptr, &err);
    if (rc != SQLITE_OK) {
        std::string msg = err ? err : sqlite3_errstr(rc);
        sqlite3_free(err);
        if (rc == SQLITE_FULL) throw StorageFull(msg);
        throw StoreError(msg);
    }
}

void Store::ensure_transaction() {
    if (options_.read_only) throw StoreError("store opened read-only");
    if (!in_transaction_) {
        exec("BEGIN IMMEDIATE");
        in_transaction_ = true;
    }
}

void Store::bump_pending() {
    ++pending_;
    if (pending_ >= options_.commit_batch) commit();
}

void Store::commit() {
    std::lock_guard lock(mutex_);
    if (!in_transaction_) return;
    exec("COMMIT");
    in_transaction_ = false;
    pending_ = 0;
    last_commit_ = std::chrono::steady_clock::now();
}

void Store::maybe_commit() {
    std::lock_guard lock(mutex_);
    if (in_transaction_ && std::chrono::steady_clock::now() - last_commit_ >= options_.commit_interval) {
        commit();
    }
}

void Store::record(const NewsLinkObservation& obs) {
    std::lock_guard lock(mutex_);
    ensure_transaction();
    const std::int64_t at = to_unix(obs.observed_at);
    Statement(db_,
              "INSERT INTO observations(cursor, kind, actor, observed_at, raw_url, domain, post_uri, "
              "hashtags) VALUES (?,?,?,?,?,?,?,?)")
        .bind(1, obs.cursor)
        .bind(2, kind_code(obs.event_kind))
        .bind(3, obs.actor_id)
        .bind(4, at)
        .bind(5, obs.raw_url)
        .bind(6, obs.domain)
        .bind(7, obs.post_uri)
        .bind(8, nlohmann::json(obs.hashtags).dump())
        .run();

    Statement first(db_,
                    "INSERT OR IGNORE INTO post_domains(kind, actor, post_uri, domain) VALUES (?,?,?,?)");
    first.bind(1, kind_code(obs.event_kind)).bind(2, obs.actor_id).bind(3, obs.post_uri).bind(4, obs.domain).run();
    const std::int64_t new_post = sqlite3_changes(db_) > 0 ? 1 : 0;

    Statement(db_,
              "INSERT INTO link_counts(hour, domain, kind, links, posts) VALUES (?,?,?,1,?) "
              "ON CONFLICT(hour, domain, kind) DO UPDATE SET links = links + 1, posts = posts + "
              "excluded.posts")
        .bind(1, to_unix(align_down(obs.observed_at, Granularity::Hour)))
        .bind(2, obs.domain)
        .bind(3, kind_code(obs.event_kind))
        .bind(4, new_post)
        .run();
    bump_pending();
}

void Store::record_engagement(const EngagementRecord& e) {
    std::lock_guard lock(mutex_);
    ensure_transaction();
    Statement(db_,
              "INSERT INTO engagements(cursor, kind, actor, subject_author, post_uri, observed_at, news) "
              "VALUES (?,?,?,?,?,?,?)")
        .bind(1, e.cursor)
        .bind(2, kind_code(e.kind))
        .bind(3, e.actor_id)
        .bind(4, e.subject_author)
        .bind(5, e.post_uri)
        .bind(6, to_unix(e.observed_at))
        .bind(7, e.news_linking ? 1 : 0)
        .run();
    bump_pending();
}

void Store::record_timeline(const TimelineEntry& t) {
    std::lock_guard lock(mutex_);
    ensure_transaction();
    Statement stmt(db_,
                   "INSERT INTO timelines(actor, kind, observed_at, post_uri, text, lang) VALUES "
                   "(?,?,?,?,?,?)");
    stmt.bind(1, t.actor_id).bind(2, kind_code(t.kind)).bind(3, to_unix(t.observed_at)).bind(4, t.post_uri).bind(5, t.text);
    if (t.lang) {
        stmt.bind(6, *t.lang);
    } else {
        stmt.bind_null(6);
    }
    stmt.run();
    bump_pending();
}

void Store::set_meta(std::string_view key, std::string_view value) {
    std::lock_guard lock(mutex_);
    ensure_transaction();
    Statement(db_, "INSERT INTO meta(key, value) VALUES (?,?) ON CONFLICT(key) DO UPDATE SET value = excluded.value")
        .bind(1, key)
        .bind(2, value)
        .run();
}

std::optional<std::string> Store::meta(std::string_view key) const {
    std::lock_guard lock(mutex_);
    try {
        Statement stmt(db_, "SELECT value FROM meta WHERE key = ?");
        stmt.bind(1, key);
        if (stmt.step()) return stmt.text(0);
    } catch (const StoreError&) {
        // Schema not created yet (fresh read-only store).
    }
    return std::nullopt;
}

void Store::save_resolver_cache(const std::vector<resolver::CacheEntry>& entries) {
    std::lock_guard lock(mutex_);
    ensure_transaction();
    exec("DELETE FROM resolver_cache");
    std::int64_t seq = 0;
    for (const auto& entry : entries) {
        if (entry.outcome.status == resolver::OutcomeStatus::Failed) continue;
        Statement stmt(db_, "INSERT OR REPLACE INTO resolver_cache(seq, uri, status, post, fetched_at) VALUES (?,?,?,?,?)");
        stmt.bind(1, seq++).bind(2, entry.target_uri).bind(3, static_cast<std::int64_t>(entry.outcome.status));
        if (entry.outcome.post) {
            stmt.bind(4, parser::to_json(*entry.outcome.post).dump());
        } else {
            stmt.bind_null(4);
        }
        stmt.bind(5, to_unix(entry.fetched_at)).run();
    }
}

std::vector<resolver::CacheEntry> Store::load_resolver_cache(std::size_t limit) const {
    std::lock_guard lock(mutex_);
    std::vector<resolver::CacheEntry> out;
    try {
        Statement stmt(db_, "SELECT uri, status, post, fetched_at FROM resolver_cache ORDER BY seq LIMIT ?");
        stmt.bind(1, static_cast<std::int64_t>(limit));
        while (stmt.step()) {
            resolver::CacheEntry entry;
            entry.target_uri = stmt.text(0);
            entry.outcome.status = static_cast<resolver::OutcomeStatus>(stmt.int64(1));
            if (!stmt.is_null(2)) {
                entry.outcome.post = std::make_shared<const parser::ParsedPost>(
                    parser::parsed_post_from_json(nlohmann::json::parse(stmt.text(2))));
            }
            entry.fetched_at = from_unix(stmt.int64(3));
            out.push_back(std::move(entry));
        }
    } catch (const StoreError&) {
    }
    return out;
}

std::size_t Store::bucket_count(const Window& window, Granularity granularity) {
    if (window.empty()) return 0;
    const auto start = align_down(window.from, granularity);
    const std::int64_t step = seconds_per(granularity);
    const std::int64_t span = to_unix(window.to) - to_unix(start);
    return static_cast<std::size_t>((span + step - 1) / step);
}

std::vector<PrevalenceBucket> Store::query_absolute(const PrevalenceQuery& query,
                                                    const ratings::RatingTable& table) const {
    std::vector<PrevalenceBucket> buckets = zero_buckets(query, options_.max_buckets);
    const std::size_t n = buckets.size();
    if (n == 0) return buckets;
    const std::int64_t step = seconds_per(query.granularity);
    const std::int64_t start = to_unix(buckets.front().bucket_start);

    // Hour rows are the storage unit: hourly windows start at the hour
    // containing `from`, daily windows cover whole days.
    const std::int64_t lo = start;
    const std::int64_t hi = query.granularity == Granularity::Day
                                ? start + static_cast<std::int64_t>(n) * step
                                : to_unix(query.window.to);
    const std::string column = query.dedup == Dedup::PerPost ? "posts" : "links";
    const std::string sql = "SELECT hour, domain, SUM(" + column +
                            ") FROM link_counts WHERE hour >= ? AND hour < ? AND " +
                            kind_filter(query.kinds) + " GROUP BY hour, domain";

    std::unordered_map<std::string, ratings::Reliability> classes;
    std::lock_guard lock(mutex_);
    try {
        Statement stmt(db_, sql.c_str());
        stmt.bind(1, lo).bind(2, hi);
        while (stmt.step()) {
            const std::int64_t hour = stmt.int64(0);
            const std::string domain = stmt.text(1);
            const std::int64_t count = stmt.int64(2);
            auto it = classes.find(domain);
            if (it == classes.end()) it = classes.emplace(domain, table.classify(domain).reliability).first;
            auto& bucket = buckets[static_cast<std::size_t>((hour - start) / step)];
            bucket.total_links += count;
            if (it->second == ratings::Reliability::Reliable) {
                bucket.reliable += count;
                bucket.total_rated += count;
            } else if (it->second == ratings::Reliability::Unreliable) {
                bucket.unreliable += count;
                bucket.total_rated += count;
            }
        }
    } catch (const StoreError&) {
        if (!options_.read_only) throw;
    }
    return buckets;
}

std::vector<PrevalenceBucket> zero_buckets(const PrevalenceQuery& query, std::size_t max_buckets) {
    const std::size_t n = Store::bucket_count(query.window, query.granularity);
    if (n > max_buckets) {
        throw RangeTooLarge("window spans " + std::to_string(n) + " buckets, limit is " + std::to_string(max_buckets));
    }
    std::vector<PrevalenceBucket> buckets(n);
    const std::int64_t step = seconds_per(query.granularity);
    const std::int64_t start = to_unix(align_down(query.window.from, query.granularity));
    for (std::size_t i = 0; i < n; ++i) buckets[i].bucket_start = from_unix(start + static_cast<std::int64_t>(i) * step);
    return buckets;
}

std::vector<RelativePoint> to_relative(const std::vector<PrevalenceBucket>& buckets) {
    std::vector<RelativePoint> out;
    out.reserve(buckets.size());
    for (const auto& b : buckets) {
        RelativePoint point{b.bucket_start, std::nullopt};
        if (b.total_rated > 0) {
            point.ratio = static_cast<double>(b.unreliable) / static_cast<double>(b.total_rated);
        }
        out.push_back(point);
    }
    return out;
}

std::vector<RelativePoint> Store::query_relative(const PrevalenceQuery& query,
                                                 const ratings::RatingTable& table) const {
    return to_relative(query_absolute(query, table));
}

std::map<std::string, std::int64_t> Store::domain_counts(const std::optional<Window>& window,
                                                         KindSet kinds, Dedup dedup) const {
    std::map<std::string, std::int64_t> out;
    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    std::int64_t hi = std::numeric_limits<std::int64_t>::max();
    if (window) {
        lo = to_unix(align_down(window->from, Granularity::Hour));
        hi = to_unix(window->to);
    }
    const std::string column = dedup == Dedup::PerPost ? "posts" : "links";
    const std::string sql = "SELECT domain, SUM(" + column +
                            ") FROM link_counts WHERE hour >= ? AND hour < ? AND " + kind_filter(kinds) +
                            " GROUP BY domain";
    std::lock_guard lock(mutex_);
    try {
        Statement stmt(db_, sql.c_str());
        stmt.bind(1, lo).bind(2, hi);
        while (stmt.step()) out[stmt.text(0)] = stmt.int64(1);
    } catch (const StoreError&) {
        if (!options_.read_only) throw;
    }
    return out;
}

std::vector<NewsLinkObservation> Store::observations(const std::optional<Window>& window,
                                                     KindSet kinds) const {
    const auto [lo, hi] = bounds(window);
    const std::string sql =
        "SELECT cursor, kind, actor, observed_at, raw_url, domain, post_uri, hashtags FROM observations "
        "WHERE observed_at >= ? AND observed_at < ? AND " +
        kind_filter(kinds) + " ORDER BY id";
    std::vector<NewsLinkObservation> out;
    std::lock_guard lock(mutex_);
    try {
        Statement stmt(db_, sql.c_str());
        stmt.bind(1, lo).bind(2, hi);
        while (stmt.step()) {
            NewsLinkObservation obs;
            obs.cursor = stmt.int64(0);
            obs.event_kind = kind_from(static_cast<int>(stmt.int64(1)));
            obs.actor_id = stmt.text(2);
            obs.observed_at = from_unix(stmt.int64(3));
            obs.raw_url = stmt.text(4);
            obs.domain = stmt.text(5);
            obs.post_uri = stmt.text(6);
            obs.hashtags = nlohmann::json::parse(stmt.text(7)).get<std::vector<std::string>>();
            out.push_back(std::move(obs));
        }
    } catch (const StoreError&) {
        if (!options_.read_only) throw;
    }
    return out;
}

std::vector<EngagementRecord> Store::engagements(const std::optional<Window>& window) const {
    const auto [lo, hi] = bounds(window);
    std::vector<EngagementRecord> out;
    std::lock_guard lock(mutex_);
    try {
        Statement stmt(db_,
                       "SELECT cursor, kind, actor, subject_author, post_uri, observed_at, news FROM "
                       "engagements WHERE observed_at >= ? AND observed_at < ? ORDER BY id");
        stmt.bind(1, lo).bind(2, hi);
        while (stmt.step()) {
            EngagementRecord e;
            e.cursor = stmt.int64(0);
            e.kind = kind_from(static_cast<int>(stmt.int64(1)));
            e.actor_id = stmt.text(2);
            e.subject_author = stmt.text(3);
            e.post_uri = stmt.text(4);
            e.observed_at = from_unix(stmt.int64(5));
            e.news_linking = stmt.int64(6) != 0;
            out.push_back(std::move(e));
        }
    } catch (const StoreError&) {
        if (!options_.read_only) throw;
    }
    return out;
}

std::vector<TimelineEntry> Store::timelines(const std::optional<Window>& window) const {
    const auto [lo, hi] = bounds(window);
    std::vector<TimelineEntry> out;
    std::lock_guard lock(mutex_);
    try {
        Statement stmt(db_,
                       "SELECT actor, kind, observed_at, post_uri, text, lang FROM timelines WHERE "
                       "observed_at >= ? AND observed_at < ? ORDER BY id");
        stmt.bind(1, lo).bind(2, hi);
        while (stmt.step()) {
            TimelineEntry t;
            t.actor_id = stmt.text(0);
            t.kind = kind_from(static_cast<int>(stmt.int64(1)));
            t.observed_at = from_unix(stmt.int64(2));
            t.post_uri = stmt.text(3);
            t.text = stmt.text(4);
            if (!stmt.is_null(5)) t.lang = stmt.text(5);
            out.push_back(std::move(t));
        }
    } catch (const StoreError&) {
        if (!options_.read_only) throw;
    }
    return out;
}

std::uint64_t Store::observation_count() const {
    std::lock_guard lock(mutex_);
    try {
        Statement stmt(db_, "SELECT COUNT(*) FROM observations");
        if (stmt.step()) return static_cast<std::uint64_t>(stmt.int64(0));
    } catch (const StoreError&) {
    }
    return 0;
}

std::uint64_t Store::size_bytes() const {
    std::uint64_t total = 0;
    for (const auto* suffix : {"", "-wal"}) {
        std::error_code ec;
        const auto size = std::filesystem::file_size(path_.string() + suffix, ec);
        if (!ec) total += size;
    }
    return total;
}

std::string prevalence_csv(const std::vector<PrevalenceBucket>& buckets) {
    std::ostringstream out;
    out << "bucket_start,total_links,total_rated,reliable,unreliable\n";
    for (const auto& b : buckets) {
        out << format_rfc3339(b.bucket_start) << ',' << b.total_links << ',' << b.total_rated << ','
            << b.reliable << ',' << b.unreliable << '\n';
    }
    return out.str();
}

}  // namespace newsky::store
