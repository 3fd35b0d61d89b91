#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "newsky/resolver/resolver.hpp"
#include "support.hpp"

using namespace newsky;
using namespace newsky::resolver;
using nlohmann::json;

namespace {

std::string uri(int i) { return "at://did:plc:author" + std::to_string(i % 7) + "/app.bsky.feed.post/p" + std::to_string(i); }

json view(const std::string& u, const std::string& link = "https://www.nytimes.com/x") {
    return {{"uri", u},
            {"cid", "bafy"},
            {"author", {{"did", "did:plc:someone"}}},
            {"record",
             {{"$type", "app.bsky.feed.post"},
              {"text", "t #Tag"},
              {"createdAt", "2024-06-14T00:00:00Z"},
              {"embed", {{"$type", "app.bsky.embed.external"}, {"external", {{"uri", link}}}}}}},
            {"indexedAt", "2024-06-14T00:00:01Z"}};
}

json body_with(int n) {
    json posts = json::array();
    for (int i = 0; i < n; ++i) posts.push_back(view(uri(i)));
    return {{"posts", posts}};
}

std::vector<ingest::StrongRef> refs(int from, int to) {
    std::vector<ingest::StrongRef> out;
    for (int i = from; i < to; ++i) out.push_back({uri(i), "bafy"});
    return out;
}

// Counts calls and holds each one open for a while.
class SlowFetcher final : public PostFetcher {
public:
    explicit SlowFetcher(json body) : inner_(body) {}
    std::vector<PostView> get_posts(std::span<const std::string> uris) override {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(150));
        return inner_.get_posts(uris);
    }
    std::atomic<int> calls{0};

private:
    FixturePostFetcher inner_;
};

ResolverOptions fast_options() {
    ResolverOptions o;
    o.rate_per_second = 1e6;
    return o;
}

}  // namespace

TEST_CASE("30 refs with a batch limit of 25 take two upstream calls") {
    auto fetcher = std::make_shared<FixturePostFetcher>(body_with(30));
    RefResolver resolver(fetcher, fast_options());
    const auto r = refs(0, 30);
    const auto out = resolver.resolve(r);
    CHECK(out.size() == 30);
    CHECK(fetcher->calls() == (30 + 25 - 1) / 25);
    for (const auto& [u, outcome] : out) CHECK(outcome.status == OutcomeStatus::Resolved);
}

TEST_CASE("cached refs need no upstream call") {
    auto fetcher = std::make_shared<FixturePostFetcher>(body_with(3));
    RefResolver resolver(fetcher, fast_options());
    resolver.resolve(refs(0, 3));
    const auto calls = fetcher->calls();
    const auto out = resolver.resolve(refs(0, 3));
    CHECK(fetcher->calls() == calls);
    CHECK(out.size() == 3);
    CHECK(resolver.stats().cache_hits == 3);
}

TEST_CASE("unknown uri is NotFound and duplicates in a batch collapse") {
    auto fetcher = std::make_shared<FixturePostFetcher>(body_with(2));
    RefResolver resolver(fetcher, fast_options());
    std::vector<ingest::StrongRef> batch = {{uri(0), "c"}, {uri(0), "c"}, {"at://did:plc:x/app.bsky.feed.post/gone", "c"}};
    const auto out = resolver.resolve(batch);
    CHECK(out.size() == 2);
    CHECK(out.at(uri(0)).status == OutcomeStatus::Resolved);
    CHECK(out.at(uri(0)).post->urls.at(0).domain == "nytimes.com");
    CHECK(out.at(uri(0)).post->hashtags == std::vector<std::string>{"tag"});
    CHECK(out.at("at://did:plc:x/app.bsky.feed.post/gone").status == OutcomeStatus::NotFound);
    CHECK(fetcher->calls() == 1);
}

TEST_CASE("concurrent lookups of one uri share a single fetch") {
    auto fetcher = std::make_shared<SlowFetcher>(body_with(1));
    RefResolver resolver(fetcher, fast_options());
    std::vector<std::thread> threads;
    std::atomic<int> resolved{0};
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&] {
            const std::vector<ingest::StrongRef> one = {{uri(0), "c"}};
            if (resolver.resolve(one).at(uri(0)).status == OutcomeStatus::Resolved) ++resolved;
        });
    }
    for (auto& t : threads) t.join();
    CHECK(fetcher->calls == 1);
    CHECK(resolved == 8);
}

TEST_CASE("endpoint down gives Failed, which is never cached") {
    auto fetcher = std::make_shared<FixturePostFetcher>(body_with(2));
    RefResolver resolver(fetcher, fast_options());
    fetcher->set_down(true);
    CHECK(resolver.resolve(refs(0, 2)).at(uri(1)).status == OutcomeStatus::Failed);
    CHECK(resolver.cache_entries().empty());
    fetcher->set_down(false);
    CHECK(resolver.resolve(refs(0, 2)).at(uri(1)).status == OutcomeStatus::Resolved);
}

TEST_CASE("NotFound expires after its ttl") {
    auto fetcher = std::make_shared<FixturePostFetcher>(body_with(0));
    Timestamp now = from_unix(1'700'000'000);
    auto opts = fast_options();
    opts.not_found_ttl = std::chrono::hours(24);
    RefResolver resolver(fetcher, opts, [&] { return now; });
    resolver.resolve(refs(0, 1));
    resolver.resolve(refs(0, 1));
    CHECK(fetcher->calls() == 1);
    now += std::chrono::hours(25);
    resolver.resolve(refs(0, 1));
    CHECK(fetcher->calls() == 2);
}

TEST_CASE("primed posts and the LRU bound") {
    auto fetcher = std::make_shared<FixturePostFetcher>(body_with(0));
    auto opts = fast_options();
    opts.cache_capacity = 2;
    RefResolver resolver(fetcher, opts);
    for (int i = 0; i < 3; ++i) {
        parser::ParsedPost p;
        p.post_uri = uri(i);
        resolver.prime(p);
    }
    CHECK(resolver.cache_size() == 2);
    const auto out = resolver.resolve(refs(1, 3));
    CHECK(fetcher->calls() == 0);
    CHECK(out.at(uri(2)).status == OutcomeStatus::Resolved);
    const auto entries = resolver.cache_entries();
    REQUIRE(entries.size() == 2);

    RefResolver reloaded(fetcher, opts);
    reloaded.load_cache(entries);
    reloaded.resolve(refs(1, 3));
    CHECK(fetcher->calls() == 0);
}

TEST_CASE("getPosts request target repeats the uris parameter") {
    const std::vector<std::string> uris = {"at://did:plc:a/app.bsky.feed.post/1", "at://did:plc:b/app.bsky.feed.post/2"};
    CHECK(get_posts_target(uris) ==
          "/xrpc/app.bsky.feed.getPosts?uris=at%3A%2F%2Fdid%3Aplc%3Aa%2Fapp.bsky.feed.post%2F1"
          "&uris=at%3A%2F%2Fdid%3Aplc%3Ab%2Fapp.bsky.feed.post%2F2");
}

TEST_CASE("http fetcher against a local mock endpoint") {
    const json all = body_with(30);
    std::atomic<int> calls{0};
    std::atomic<std::size_t> largest{0};
    httplib::Server server;
    server.Get("/xrpc/app.bsky.feed.getPosts", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        const auto n = req.get_param_value_count("uris");
        largest = std::max<std::size_t>(largest, n);
        json posts = json::array();
        for (std::size_t i = 0; i < n; ++i) {
            const auto u = req.get_param_value("uris", i);
            for (const auto& p : all["posts"]) {
                if (p["uri"] == u) posts.push_back(p);
            }
        }
        res.set_content(json{{"posts", posts}}.dump(), "application/json");
    });
    server.Get("/broken/xrpc/app.bsky.feed.getPosts",
               [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto fetcher = std::make_shared<HttpPostFetcher>("http://127.0.0.1:" + std::to_string(port));
    RefResolver resolver(fetcher, fast_options());
    auto batch = refs(0, 30);
    batch.push_back({"at://did:plc:x/app.bsky.feed.post/none", "c"});
    const auto out = resolver.resolve(batch);
    CHECK(calls == 2);
    CHECK(largest == 25);
    CHECK(out.size() == 31);
    CHECK(out.at(uri(29)).status == OutcomeStatus::Resolved);
    CHECK(out.at("at://did:plc:x/app.bsky.feed.post/none").status == OutcomeStatus::NotFound);

    HttpPostFetcher broken("http://127.0.0.1:" + std::to_string(port) + "/broken");
    const std::vector<std::string> one = {uri(0)};
    CHECK_THROWS_AS(broken.get_posts(one), EndpointDown);

    server.stop();
    t.join();
}

TEST_CASE("malformed getPosts bodies") {
    CHECK_THROWS_AS(parse_get_posts_body(json::object()), EndpointDown);
    CHECK_THROWS_AS(parse_get_posts_body(json{{"posts", 3}}), EndpointDown);
    CHECK(parse_get_posts_body(json{{"posts", json::array()}}).empty());
}
