#include <doctest.h>

#include <random>

#include "newsky/store/store.hpp"
#include "support.hpp"

using namespace newsky;
using namespace newsky::store;

namespace {

const ratings::RatingTable& table() {
    static const auto t = testing::ratings_from_csv("domain,score\ngood.example,90\nbad.example,20\nedge.example,60\n");
    return t;
}

Timestamp at(const char* text) { return *parse_rfc3339(text); }

NewsLinkObservation obs(EventKind kind, const std::string& actor, const char* when, const std::string& domain,
                        const std::string& post = "at://p/app.bsky.feed.post/1") {
    return {kind, actor, at(when), "https://" + domain + "/x", domain, post, {}, 1};
}

PrevalenceQuery query(const char* from, const char* to, Granularity g = Granularity::Hour, Dedup d = Dedup::PerLink) {
    return {{at(from), at(to)}, g, d, KindSet::all()};
}

}  // namespace

TEST_CASE("counter semantics") {
    testing::TempDir dir;
    auto s = Store::open(dir / "s.db");
    s->record(obs(EventKind::Post, "a", "2024-06-14T10:15:00Z", "good.example"));
    s->record(obs(EventKind::Post, "a", "2024-06-14T10:20:00Z", "unrated.example"));
    s->record(obs(EventKind::Like, "b", "2024-06-14T11:59:59Z", "bad.example"));
    s->commit();
    const auto b = s->query_absolute(query("2024-06-14T10:00:00Z", "2024-06-14T13:00:00Z"), table());
    REQUIRE(b.size() == 3);
    CHECK(b[0] == PrevalenceBucket{at("2024-06-14T10:00:00Z"), 2, 1, 1, 0});
    CHECK(b[1] == PrevalenceBucket{at("2024-06-14T11:00:00Z"), 1, 1, 0, 1});
    CHECK(b[2] == PrevalenceBucket{at("2024-06-14T12:00:00Z"), 0, 0, 0, 0});
    const auto rel = to_relative(b);
    CHECK(rel[0].ratio == 0.0);
    CHECK(rel[1].ratio == 1.0);
    CHECK_FALSE(rel[2].ratio);
    CHECK(s->observation_count() == 3);
}

TEST_CASE("empty store and empty window") {
    testing::TempDir dir;
    auto s = Store::open(dir / "s.db");
    const auto b = s->query_absolute(query("2024-06-14T00:00:00Z", "2024-06-15T00:00:00Z"), table());
    CHECK(b.size() == 24);
    for (const auto& x : b) CHECK(x.total_links == 0);
    CHECK(s->query_absolute(query("2024-06-14T00:00:00Z", "2024-06-14T00:00:00Z"), table()).empty());
}

TEST_CASE("kind filter and per-post dedup") {
    testing::TempDir dir;
    auto s = Store::open(dir / "s.db");
    // Two links to one domain in one post, then a like of it by two actors,
    // one of whom likes twice.
    s->record(obs(EventKind::Post, "a", "2024-06-14T10:00:00Z", "good.example"));
    s->record(obs(EventKind::Post, "a", "2024-06-14T10:00:00Z", "good.example"));
    for (const char* actor : {"b", "c", "c"}) {
        s->record(obs(EventKind::Like, actor, "2024-06-14T10:30:00Z", "good.example"));
        s->record(obs(EventKind::Like, actor, "2024-06-14T10:30:00Z", "good.example"));
    }
    s->commit();
    auto q = query("2024-06-14T10:00:00Z", "2024-06-14T11:00:00Z");
    CHECK(s->query_absolute(q, table())[0].total_links == 8);
    q.dedup = Dedup::PerPost;
    CHECK(s->query_absolute(q, table())[0].total_links == 3);
    q.kinds = *KindSet::parse("post");
    CHECK(s->query_absolute(q, table())[0].total_links == 1);
    q.dedup = Dedup::PerLink;
    CHECK(s->query_absolute(q, table())[0].total_links == 2);
    CHECK(s->domain_counts(std::nullopt, *KindSet::parse("like"), Dedup::PerLink).at("good.example") == 6);
}

TEST_CASE("hourly buckets sum to the daily bucket") {
    testing::TempDir dir;
    auto s = Store::open(dir / "s.db");
    std::mt19937_64 rng(7);
    const std::vector<std::string> domains = {"good.example", "bad.example", "edge.example", "unrated.example"};
    const auto base = at("2024-06-14T00:00:00Z");
    for (int i = 0; i < 2000; ++i) {
        const auto t = base + std::chrono::seconds(rng() % (3 * 86400));
        s->record({static_cast<EventKind>(rng() % 3), "actor" + std::to_string(rng() % 20), t, "u",
                   domains[rng() % domains.size()], "post" + std::to_string(rng() % 50), {}, i});
    }
    s->commit();
    for (const auto dedup : {Dedup::PerLink, Dedup::PerPost}) {
        const auto hourly = s->query_absolute(
            query("2024-06-14T00:00:00Z", "2024-06-17T00:00:00Z", Granularity::Hour, dedup), table());
        const auto daily = s->query_absolute(
            query("2024-06-14T00:00:00Z", "2024-06-17T00:00:00Z", Granularity::Day, dedup), table());
        REQUIRE(hourly.size() == 72);
        REQUIRE(daily.size() == 3);
        for (std::size_t d = 0; d < 3; ++d) {
            PrevalenceBucket sum{daily[d].bucket_start};
            for (std::size_t h = d * 24; h < d * 24 + 24; ++h) {
                sum.total_links += hourly[h].total_links;
                sum.total_rated += hourly[h].total_rated;
                sum.reliable += hourly[h].reliable;
                sum.unreliable += hourly[h].unreliable;
            }
            CHECK(sum == daily[d]);
            CHECK(sum.reliable + sum.unreliable == sum.total_rated);
        }
    }
}

TEST_CASE("classification follows the table passed at query time") {
    testing::TempDir dir;
    auto s = Store::open(dir / "s.db");
    s->record(obs(EventKind::Post, "a", "2024-06-14T10:00:00Z", "good.example"));
    s->record(obs(EventKind::Post, "a", "2024-06-14T10:00:00Z", "bad.example"));
    s->commit();
    const auto q = query("2024-06-14T10:00:00Z", "2024-06-14T11:00:00Z");
    const auto swapped = testing::ratings_from_csv("domain,score\ngood.example,20\nbad.example,90\n");
    const auto before = s->query_absolute(q, table())[0];
    const auto after = s->query_absolute(q, swapped)[0];
    CHECK(before.reliable == after.unreliable);
    CHECK(before.unreliable == after.reliable);
    CHECK(before.total_links == after.total_links);
}

TEST_CASE("range limits") {
    testing::TempDir dir;
    StoreOptions opts;
    opts.max_buckets = 48;
    auto s = Store::open(dir / "s.db", opts);
    CHECK_NOTHROW(s->query_absolute(query("2024-06-14T00:00:00Z", "2024-06-16T00:00:00Z"), table()));
    CHECK_THROWS_AS(s->query_absolute(query("2024-06-14T00:00:00Z", "2024-06-16T00:00:01Z"), table()), RangeTooLarge);
    CHECK_NOTHROW(s->query_absolute(query("2024-01-01T00:00:00Z", "2024-02-01T00:00:00Z", Granularity::Day), table()));
    CHECK(Store::bucket_count({at("2024-06-14T00:30:00Z"), at("2024-06-14T02:00:00Z")}, Granularity::Hour) == 2);
}

TEST_CASE("one writer at a time; readers see committed data") {
    testing::TempDir dir;
    auto writer = Store::open(dir / "s.db");
    CHECK_THROWS_AS(Store::open(dir / "s.db"), StoreLocked);
    writer->record(obs(EventKind::Post, "a", "2024-06-14T10:00:00Z", "good.example"));
    writer->set_meta("last_cursor", "42");
    writer->commit();
    StoreOptions ro;
    ro.read_only = true;
    auto reader = Store::open(dir / "s.db", ro);
    CHECK(reader->meta("last_cursor") == "42");
    CHECK(reader->observation_count() == 1);
    CHECK(reader->size_bytes() > 0);
    writer.reset();
    CHECK_NOTHROW(Store::open(dir / "s.db"));
}

TEST_CASE("engagements, timelines and the resolver cache persist") {
    testing::TempDir dir;
    {
        auto s = Store::open(dir / "s.db");
        s->record_engagement({5, EventKind::Repost, "did:b", "did:a", "at://did:a/app.bsky.feed.post/1",
                              at("2024-06-14T10:00:00Z"), true});
        s->record_timeline({"did:b", EventKind::Repost, at("2024-06-14T10:00:00Z"), "at://did:a/app.bsky.feed.post/1",
                            "climate news", std::string("en")});
        parser::ParsedPost p;
        p.post_uri = "at://did:a/app.bsky.feed.post/1";
        p.urls = {{"https://bbc.com/x", "bbc.com"}};
        s->save_resolver_cache({{p.post_uri,
                                 {resolver::OutcomeStatus::Resolved, std::make_shared<const parser::ParsedPost>(p)},
                                 at("2024-06-14T10:00:00Z")},
                                {"at://gone", {resolver::OutcomeStatus::NotFound, nullptr}, at("2024-06-14T10:00:00Z")},
                                {"at://failed", {resolver::OutcomeStatus::Failed, nullptr}, at("2024-06-14T10:00:00Z")}});
        s->commit();
    }
    auto s = Store::open(dir / "s.db");
    const auto e = s->engagements(std::nullopt);
    REQUIRE(e.size() == 1);
    CHECK(e[0].subject_author == "did:a");
    CHECK(e[0].news_linking);
    const auto t = s->timelines(Window{at("2024-06-14T00:00:00Z"), at("2024-06-15T00:00:00Z")});
    REQUIRE(t.size() == 1);
    CHECK(t[0].lang == "en");
    CHECK(s->timelines(Window{at("2024-06-15T00:00:00Z"), at("2024-06-16T00:00:00Z")}).empty());
    const auto cache = s->load_resolver_cache(10);
    REQUIRE(cache.size() == 2);
    const auto resolved = std::find_if(cache.begin(), cache.end(), [](const auto& c) {
        return c.outcome.status == resolver::OutcomeStatus::Resolved;
    });
    REQUIRE(resolved != cache.end());
    CHECK(resolved->outcome.post->urls.at(0).domain == "bbc.com");
}

TEST_CASE("read-only open of a missing schema reads as empty") {
    testing::TempDir dir;
    { std::ofstream(dir / "empty.db"); }
    StoreOptions ro;
    ro.read_only = true;
    auto s = Store::open(dir / "empty.db", ro);
    CHECK(s->query_absolute(query("2024-06-14T00:00:00Z", "2024-06-14T02:00:00Z"), table()).size() == 2);
    CHECK(s->domain_counts(std::nullopt, KindSet::all(), Dedup::PerLink).empty());
    CHECK_FALSE(s->meta("last_cursor"));
}

TEST_CASE("csv export and enum parsing") {
    const std::vector<PrevalenceBucket> b = {{at("2024-06-14T00:00:00Z"), 100, 100, 98, 2}};
    CHECK(prevalence_csv(b) ==
          "bucket_start,total_links,total_rated,reliable,unreliable\n2024-06-14T00:00:00Z,100,100,98,2\n");
    CHECK(to_relative(b)[0].ratio == 0.02);
    CHECK(parse_dedup("per_post") == Dedup::PerPost);
    CHECK_FALSE(parse_dedup("per_hour"));
    CHECK_FALSE(KindSet::parse("post,follow"));
    CHECK(KindSet::parse("like,post")->kinds() == std::vector<EventKind>{EventKind::Post, EventKind::Like});
}
