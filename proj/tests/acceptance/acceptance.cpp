// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.

#include <httplib.h>

#include <array>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "newsky/analytics/distribution.hpp"
#include "newsky/analytics/hashtag_graph.hpp"
#include "newsky/analytics/kcore.hpp"
#include "newsky/analytics/lexicon.hpp"
#include "newsky/analytics/louvain.hpp"
#include "newsky/api/server.hpp"
#include "newsky/app/pipeline.hpp"
#include "newsky/app/log.hpp"
#include "support.hpp"
#include "unit/graph_oracles.hpp"

using namespace newsky;
using nlohmann::json;

namespace {

// Collects the reasons a criterion failed.
struct Verdict {
    std::vector<std::string> failures;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

std::string str(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

api::Service service_for(const std::filesystem::path& db, const std::filesystem::path& jobs) {
    api::ServiceOptions o;
    o.store_path = db;
    o.jobs_dir = jobs;
    return api::Service(std::make_shared<ratings::RatingService>(testing::fixture_ratings()), o);
}

// Tolerance: bodies equal byte for byte; each run under 60 s.
void determinism(Verdict& v) {
    testing::TempDir dir;
    const auto oracle = testing::oracle("replay_10k");
    const auto& hours = oracle["hour"]["per_link"];
    const auto end = *parse_rfc3339(hours.back()["bucket_start"].get<std::string>()) + std::chrono::hours(1);
    const api::QueryParams params = {{"from", hours.front()["bucket_start"]}, {"to", format_rfc3339(end)}};
    std::vector<std::string> bodies;
    double slowest = 0;
    for (int run = 0; run < 2; ++run) {
        const auto db = dir / ("run" + std::to_string(run) + ".db");
        const auto t0 = std::chrono::steady_clock::now();
        testing::ingest_fixture(db, "replay_10k.jsonl");
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        const auto svc = service_for(db, dir / "jobs");
        const auto r = svc.handle("/v1/prevalence", params);
        v.expect(r.status == 200, "prevalence status " + std::to_string(r.status));
        bodies.push_back(r.body);
        for (const auto& [mode, dedup] : {std::pair{"relative", "per_link"}, std::pair{"absolute", "per_post"}}) {
            auto p = params;
            p.emplace("mode", mode);
            p.emplace("dedup", dedup);
            bodies.push_back(svc.handle("/v1/prevalence", p).body);
        }
    }
    for (std::size_t i = 0; i < 3; ++i) v.expect(bodies[i] == bodies[i + 3], "bodies differ between runs");
    json hourly = json::parse(bodies[0]);
    v.expect(hourly == hours, "hourly buckets differ from the oracle");
    v.expect(slowest < 60.0, "ingest took " + str(slowest) + " s");
    v.detail = "slowest ingest " + str(std::round(slowest * 100) / 100) + " s, " + std::to_string(bodies[0].size()) +
               " byte body";
}

// Tolerance: exact equality with 0.02.
void ratio_98_2(Verdict& v) {
    testing::TempDir dir;
    testing::ingest_fixture(dir / "s.db", "prevalence_98_2.jsonl");
    const auto svc = service_for(dir / "s.db", dir / "jobs");
    const auto r = svc.handle("/v1/prevalence", {{"from", "2024-07-01T00:00:00Z"},
                                                {"to", "2024-07-04T00:00:00Z"},
                                                {"granularity", "day"},
                                                {"mode", "relative"}});
    const auto points = json::parse(r.body);
    v.expect(points.size() == 3, "expected 3 daily points");
    for (const auto& p : points) {
        v.expect(p["ratio"].is_number() && p["ratio"].get<double>() == 0.02,
                 "ratio " + p["ratio"].dump() + " on " + p["bucket"].get<std::string>());
    }
    v.detail = "daily ratios " + r.body;
}

// Tolerance: exact classification.
void threshold(Verdict& v) {
    const auto table = testing::ratings_from_csv("domain,score\nlow.example,59.999\nat.example,60.0\nhigh.example,60.001\n");
    using ratings::Reliability;
    const std::array<std::pair<const char*, Reliability>, 3> cases = {
        {{"low.example", Reliability::Unreliable}, {"at.example", Reliability::Reliable},
         {"high.example", Reliability::Reliable}}};
    for (const auto& [domain, expected] : cases) {
        v.expect(table.classify(domain).reliability == expected, std::string(domain) + " misclassified");
    }
    v.expect(ratings::reliability_for(59.999) == Reliability::Unreliable, "59.999 via reliability_for");
    v.expect(ratings::reliability_for(60.0) == Reliability::Reliable, "60.0 via reliability_for");
    v.expect(ratings::reliability_for(60.001) == Reliability::Reliable, "60.001 via reliability_for");
    v.detail = "59.999 unreliable, 60.0 reliable, 60.001 reliable";
}

// Tolerance: analytic cases within 1e-15, negation exact.
void eq1(Verdict& v) {
    using analytics::edge_weight;
    v.expect(std::abs(edge_weight(4, 4)) < 1e-15, "equal counts");
    v.expect(std::abs(edge_weight(7, 0) - 1.0) < 1e-15, "all unreliable");
    v.expect(std::abs(edge_weight(1, 3) + 0.5) < 1e-15, "one to three");
    std::mt19937_64 rng(77);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto a = static_cast<std::int64_t>(rng() % 500);
        auto b = static_cast<std::int64_t>(rng() % 500);
        if (a + b == 0) b = 1;
        const double w = edge_weight(a, b);
        const double oracle = static_cast<double>(a - b) / static_cast<double>(a + b);
        worst = std::max(worst, std::abs(w - oracle));
        v.expect(w >= -1.0 && w <= 1.0, "weight out of range");
        v.expect(edge_weight(b, a) == -w, "class swap is not an exact negation");
    }
    v.expect(worst < 1e-15, "random pair deviates from direct ratio by " + str(worst));
    v.detail = "1000 pairs, max deviation from direct ratio " + str(worst);
}

// Tolerance: symmetry |delta| < 1e-12; worked example within 1e-9.
void eq2(Verdict& v) {
    using analytics::CommunityLexicon;
    const double got = analytics::log_odds_delta(3, 10, 1, 10, 4, 20);
    const double oracle = std::log(7.0 / 31.0) - std::log(5.0 / 33.0);
    v.expect(std::abs(got - oracle) < 1e-9, "worked example " + str(got) + " vs " + str(oracle));

    std::mt19937_64 rng(99);
    double worst_sym = 0;
    double worst_anti = 0;
    for (int trial = 0; trial < 100; ++trial) {
        CommunityLexicon a, b;
        a.community_id = 0;
        b.community_id = 1;
        for (int i = 0; i < 40; ++i) {
            a.add("w" + std::to_string(rng() % 30), 1 + static_cast<std::int64_t>(rng() % 5));
            b.add("w" + std::to_string(rng() % 30), 1 + static_cast<std::int64_t>(rng() % 5));
        }
        const auto prior = analytics::pooled_counts({a, b});
        const auto ab = analytics::log_odds(a, b, prior);
        const auto ba = analytics::log_odds(b, a, prior);
        for (const auto& [w, d] : ab) worst_anti = std::max(worst_anti, std::abs(d + ba.at(w)));
        const auto same = analytics::log_odds(a, a, analytics::pooled_counts({a, a}));
        for (const auto& [w, d] : same) worst_sym = std::max(worst_sym, std::abs(d));
    }
    v.expect(worst_sym < 1e-12, "identical corpora give " + str(worst_sym));
    v.expect(worst_anti < 1e-12, "anti-symmetry off by " + str(worst_anti));
    v.detail = "example " + str(got) + ", max |delta| identical " + str(worst_sym) + ", max anti-symmetry gap " +
               str(worst_anti);
}

// Tolerance: exact node sets.
void kcore(Verdict& v) {
    std::mt19937_64 rng(2025);
    std::size_t compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        const double p = 0.005 + 0.1 * static_cast<double>(rng() % 1000) / 1000.0;
        const auto g = testing::erdos_renyi(n, p, rng);
        std::vector<analytics::NodeId> previous;
        std::size_t oracle_max = 0;
        for (std::size_t k = 0;; ++k) {
            const auto expected = testing::peel_oracle(n, g.edges, k);
            const auto got = analytics::k_core_nodes(g.graph, k);
            ++compared;
            if (std::vector<analytics::NodeId>(expected.begin(), expected.end()) != got) {
                v.expect(false, "trial " + std::to_string(trial) + " k " + std::to_string(k));
            }
            if (k > 0 && !std::includes(previous.begin(), previous.end(), got.begin(), got.end())) {
                v.expect(false, "cores do not nest in trial " + std::to_string(trial));
            }
            if (expected.empty()) break;
            oracle_max = k;
            previous = got;
        }
        const auto mc = analytics::max_k_core(g.graph);
        v.expect(mc.k == oracle_max, "max_k_core k in trial " + std::to_string(trial));
        v.expect(mc.core.node_count() == testing::peel_oracle(n, g.edges, oracle_max).size(),
                 "max_k_core size in trial " + std::to_string(trial));
    }
    v.detail = "100 graphs, " + std::to_string(compared) + " (graph, k) pairs";
}

// Tolerance: agreement >= 0.9; bridge split exact.
void communities(Verdict& v) {
    const auto g = testing::planted_blocks(4, 25, 0.5, 0.02, 1234);
    std::vector<std::size_t> truth(100);
    for (std::size_t i = 0; i < 100; ++i) truth[i] = i / 25;
    const auto p = analytics::louvain(g);
    const double agreement = testing::label_agreement(truth, p.community, 4);
    v.expect(agreement >= 0.9, "agreement " + str(agreement));

    analytics::Graph cliques;
    for (int i = 0; i < 10; ++i) cliques.add_node("c" + std::to_string(i));
    for (analytics::NodeId base : {0, 5}) {
        for (analytics::NodeId a = base; a < base + 5; ++a) {
            for (analytics::NodeId b = a + 1; b < base + 5; ++b) cliques.add_edge(a, b);
        }
    }
    cliques.add_edge(4, 5);
    const auto split = analytics::louvain(cliques);
    bool exact = split.count == 2 && split.community[0] != split.community[5];
    for (analytics::NodeId i = 0; i < 10; ++i) exact = exact && split.community[i] == split.community[i < 5 ? 0 : 5];
    v.expect(exact, "two cliques not split at the bridge");
    v.detail = "SBM agreement " + str(agreement) + ", " + std::to_string(p.count) + " communities; bridge split exact";
}

// Tolerance: exact order.
void rank_frequency(Verdict& v) {
    const std::vector<std::string> top_reliable = {"theguardian.com", "nytimes.com", "bbc.com",     "washingtonpost.com",
                                             "spiegel.de",      "cnn.com",     "reuters.com", "nbcnews.com",
                                             "npr.org",         "rawstory.com"};
    testing::TempDir dir;
    testing::ingest_fixture(dir / "s.db", "top_domains.jsonl");
    const auto svc = service_for(dir / "s.db", dir / "jobs");
    const auto body = json::parse(svc.handle("/v1/domains/top", {{"class", "reliable"}, {"limit", "10"}}).body);
    std::vector<std::string> got;
    for (const auto& e : body) got.push_back(e["domain"]);
    v.expect(got == top_reliable, "reliable order " + body.dump());

    // Ties: frequency descending, then domain ascending.
    std::mt19937_64 rng(5);
    std::string scores = "domain,score\n";
    for (int i = 0; i < 40; ++i) scores += "t" + std::to_string(i) + ".example,80\n";
    const auto table = testing::ratings_from_csv(scores);
    for (int trial = 0; trial < 50; ++trial) {
        analytics::DomainCounts counts;
        for (int i = 0; i < 40; ++i) counts["t" + std::to_string(rng() % 40) + ".example"] += 1 + rng() % 3;
        std::vector<std::pair<std::int64_t, std::string>> oracle;
        for (const auto& [d, n] : counts) oracle.emplace_back(-n, d);
        std::sort(oracle.begin(), oracle.end());
        const auto ranked = analytics::rank_frequency(counts, table, analytics::RankClass::Reliable);
        bool same = ranked.size() == oracle.size();
        for (std::size_t i = 0; same && i < ranked.size(); ++i) {
            same = ranked[i].domain == oracle[i].second && ranked[i].rank == i + 1;
        }
        v.expect(same, "tie order differs from sorting oracle in trial " + std::to_string(trial));
    }
    v.detail = "top 10 reliable in published order; 50 tie trials agree with sorting oracle";
}

// Tolerance: exact label and source.
void merge_hierarchy(Verdict& v) {
    using ratings::OrientationSource;
    const std::array<std::pair<OrientationSource, std::string>, 3> files = {{
        {OrientationSource::MBFC, testing::read_file(testing::fixture("ratings/mbfc.csv"))},
        {OrientationSource::AllSides, testing::read_file(testing::fixture("ratings/allsides.csv"))},
        {OrientationSource::NewsGuardTier, testing::read_file(testing::fixture("ratings/newsguard_orientation.csv"))},
    }};
    const std::string scores = testing::read_file(testing::fixture("ratings/scores.csv"));
    std::array<int, 3> order = {0, 1, 2};
    int orderings = 0;
    std::set<std::string> labels;
    do {
        auto table = testing::ratings_from_csv(scores);
        std::vector<std::istringstream> streams;
        streams.reserve(3);
        std::vector<ratings::OrientationInput> inputs;
        for (const int i : order) {
            streams.emplace_back(files[static_cast<std::size_t>(i)].second);
            inputs.push_back({files[static_cast<std::size_t>(i)].first, &streams.back()});
        }
        table.merge_orientations(inputs);
        const auto nyt = table.classify("nytimes.com");
        labels.insert(std::string(ratings::to_string(nyt.orientation)));
        v.expect(nyt.orientation_source == OrientationSource::MBFC, "source not MBFC");
        v.expect(nyt.orientation == ratings::Orientation::LeanLeft, "label not the MBFC one");
        ++orderings;
    } while (std::next_permutation(order.begin(), order.end()));
    v.expect(orderings == 6, "orderings");
    v.detail = "nytimes.com in all three files; " + std::to_string(orderings) + " orderings give " + *labels.begin();
}

// Tolerance: exact call counts.
void resolver_flow(Verdict& v) {
    json all = json::array();
    const auto uri = [](int i) { return "at://did:plc:mock" + std::to_string(i) + "/app.bsky.feed.post/r" + std::to_string(i); };
    for (int i = 0; i < 30; ++i) {
        all.push_back({{"uri", uri(i)},
                       {"cid", "bafy"},
                       {"author", {{"did", "did:plc:mock" + std::to_string(i)}}},
                       {"record", {{"$type", "app.bsky.feed.post"}, {"text", "x"}, {"createdAt", "2024-06-14T00:00:00Z"}}},
                       {"indexedAt", "2024-06-14T00:00:00Z"}});
    }
    std::atomic<int> calls{0};
    std::atomic<bool> slow{false};
    httplib::Server server;
    server.Get("/xrpc/app.bsky.feed.getPosts", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        if (slow) std::this_thread::sleep_for(std::chrono::milliseconds(200));
        json posts = json::array();
        for (std::size_t i = 0; i < req.get_param_value_count("uris"); ++i) {
            const auto u = req.get_param_value("uris", i);
            for (const auto& p : all) {
                if (p["uri"] == u) posts.push_back(p);
            }
        }
        res.set_content(json{{"posts", posts}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    resolver::ResolverOptions opts;
    opts.rate_per_second = 1e6;
    {
        resolver::RefResolver r(std::make_shared<resolver::HttpPostFetcher>(base), opts);
        std::vector<ingest::StrongRef> refs;
        for (int i = 0; i < 30; ++i) refs.push_back({uri(i), "bafy"});
        const auto out = r.resolve(refs);
        v.expect(out.size() == 30, "outcomes");
    }
    const int batch_calls = calls.exchange(0);
    v.expect(batch_calls == 2, "30 refs took " + std::to_string(batch_calls) + " calls");

    slow = true;
    {
        resolver::RefResolver r(std::make_shared<resolver::HttpPostFetcher>(base), opts);
        std::vector<std::thread> threads;
        for (int i = 0; i < 8; ++i) {
            threads.emplace_back([&] {
                const std::vector<ingest::StrongRef> one = {{uri(3), "bafy"}};
                r.resolve(one);
            });
        }
        for (auto& th : threads) th.join();
    }
    const int concurrent_calls = calls.load();
    v.expect(concurrent_calls == 1, "8 concurrent lookups took " + std::to_string(concurrent_calls) + " calls");
    server.stop();
    t.join();
    v.detail = "30 refs: " + std::to_string(batch_calls) + " calls; 8 concurrent lookups: " +
               std::to_string(concurrent_calls) + " call";
}

// Tolerance: exact counts.
void robust_ingest(Verdict& v) {
    testing::TempDir dir;
    const auto clean = testing::ingest_fixture(dir / "clean.db", "replay_10k.jsonl");
    const auto corrupt = testing::ingest_fixture(dir / "corrupt.db", "replay_10k_corrupt3.jsonl");
    v.expect(corrupt.stream.delivered + 3 == clean.stream.delivered,
             "delivered " + std::to_string(corrupt.stream.delivered) + " vs " + std::to_string(clean.stream.delivered));
    const auto health = json::parse(service_for(dir / "corrupt.db", dir / "jobs").handle("/v1/health", {}).body);
    v.expect(health["decode_error_count"] == 3, "decode_error_count " + health["decode_error_count"].dump());

    // Clean totals minus the links of the three corrupted posts.
    const auto cursors = json::parse(testing::read_file(testing::fixture("replay_10k_corrupt3.cursors.json")));
    store::StoreOptions ro;
    ro.read_only = true;
    const auto clean_store = store::Store::open(dir / "clean.db", ro);
    const auto corrupt_store = store::Store::open(dir / "corrupt.db", ro);
    std::set<std::string> lost_posts;
    for (const auto& o : clean_store->observations(std::nullopt, store::KindSet::all())) {
        for (const auto& c : cursors) {
            if (o.event_kind == ingest::EventKind::Post && o.cursor == c.get<std::int64_t>()) lost_posts.insert(o.post_uri);
        }
    }
    std::int64_t removed = 0;
    analytics::DomainCounts expected;
    for (const auto& o : clean_store->observations(std::nullopt, store::KindSet::all())) {
        if (o.event_kind == ingest::EventKind::Post && lost_posts.count(o.post_uri)) {
            ++removed;
            continue;
        }
        ++expected[o.domain];
    }
    const auto got = corrupt_store->domain_counts(std::nullopt, store::KindSet::all(), store::Dedup::PerLink);
    v.expect(got == expected, "per-domain totals differ from clean minus corrupted posts");
    const auto oracle = testing::oracle("replay_10k_corrupt3");
    v.expect(corrupt.observations == oracle["observations"].get<std::uint64_t>(), "observation count vs oracle");
    v.detail = std::to_string(corrupt.stream.delivered) + " of " + std::to_string(clean.stream.delivered) +
               " events, decode_error_count 3, " + std::to_string(removed) + " links removed";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
        {"pipeline-determinism", determinism},
        {"prevalence-ratio-98-2", ratio_98_2},
        {"threshold-boundary", threshold},
        {"edge-weight-suite", eq1},
        {"log-odds-suite", eq2},
        {"k-core-oracle", kcore},
        {"community-recovery", communities},
        {"rank-frequency", rank_frequency},
        {"merge-hierarchy", merge_hierarchy},
        {"resolver-flow-control", resolver_flow},
        {"robust-ingest", robust_ingest},
    };
    app::set_log_level(app::LogLevel::Warn);
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            run(v);
        } catch (const std::exception& e) {
            v.failures.push_back(std::string("exception: ") + e.what());
        }
        if (v.failures.empty()) {
            std::cout << "PASS " << name << ": " << v.detail << '\n';
        } else {
            ++failed;
            std::cout << "FAIL " << name << ": " << v.failures.front();
            if (v.failures.size() > 1) std::cout << " (+" << v.failures.size() - 1 << " more)";
            std::cout << '\n';
        }
    }
    return failed;
}
