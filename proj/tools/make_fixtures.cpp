// Writes the deterministic test corpora into an output directory:
//   ratings/{scores,mbfc,allsides,newsguard_orientation}.csv
//   replay_10k.jsonl, replay_10k_corrupt3.jsonl, posts_fixture.json
//   prevalence_98_2.jsonl, top_domains.jsonl, orientation_mix.jsonl
//   live_frames.bin, live_frames.manifest.json
//
// Expected aggregates are not written here; tests derive them with an
// independent script.

#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "newsky/ingest/dagcbor.hpp"
#include "newsky/time.hpp"

namespace {

using nlohmann::json;
using newsky::Timestamp;
namespace dagcbor = newsky::ingest::dagcbor;

// Draws are plain modulo reductions of mt19937_64 output so the corpus does
// not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    std::uint64_t below(std::uint64_t n) { return g_() % n; }
    bool chance(unsigned percent) { return below(100) < percent; }
    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 g_;
};

struct Rated {
    std::string domain;
    double score;
    std::string lang;
};

const std::vector<std::string> kTopReliable = {
    "theguardian.com", "nytimes.com", "bbc.com",      "washingtonpost.com", "spiegel.de",
    "cnn.com",         "reuters.com", "nbcnews.com",  "npr.org",            "rawstory.com"};
const std::vector<std::string> kTopUnreliable = {
    "dailykos.com",        "msnbc.com",         "thegatewaypundit.com",  "wsws.org",
    "democracydocket.com", "ohiocapitaljournal.com", "middleeastmonitor.com", "trtworld.com",
    "newsfromthestates.com", "globaltimes.cn"};
const std::vector<std::string> kUnrated = {"youtube.com", "wikipedia.org", "substack.com",
                                           "github.com",  "bsky.app",      "medium.com"};

std::vector<Rated> rated_sources() {
    std::vector<Rated> out;
    for (std::size_t i = 0; i < kTopReliable.size(); ++i) {
        out.push_back({kTopReliable[i], 95.0 - 2.5 * static_cast<double>(i),
                       kTopReliable[i] == "spiegel.de" ? "de" : "en"});
    }
    for (std::size_t i = 0; i < kTopUnreliable.size(); ++i) {
        out.push_back({kTopUnreliable[i], 45.0 - 3.0 * static_cast<double>(i), "en"});
    }
    out.push_back({"apnews.com", 100.0, "en"});
    out.push_back({"example.co.uk", 80.0, "en"});
    out.push_back({"rightpost.example", 75.0, "en"});
    out.push_back({"censor.net", 30.0, "en"});
    out.push_back({"edge60.example", 60.0, "en"});
    out.push_back({"edge5999.example", 59.999, "en"});
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string fmt_score(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

void write_ratings(const std::filesystem::path& dir) {
    std::string scores = "domain,score,lang\n";
    for (const auto& r : rated_sources()) scores += r.domain + "," + fmt_score(r.score) + "," + r.lang + "\n";
    write_text(dir / "scores.csv", scores);

    // Several domains appear in more than one file with conflicting labels.
    write_text(dir / "mbfc.csv",
               "domain,orientation\n"
               "nytimes.com,Left-Center\n"
               "theguardian.com,left-center\n"
               "washingtonpost.com,Lean Left\n"
               "cnn.com,Left\n"
               "reuters.com,Least Biased\n"
               "msnbc.com,Left\n"
               "thegatewaypundit.com,Right\n"
               "globaltimes.cn,Center\n");
    write_text(dir / "allsides.csv",
               "domain,orientation\n"
               "nytimes.com,Left\n"
               "bbc.com,Center\n"
               "npr.org,Lean Left\n"
               "rawstory.com,Left\n"
               "dailykos.com,Left\n"
               "wsws.org,Left\n"
               "rightpost.example,Right\n"
               "cnn.com,Lean Left\n");
    write_text(dir / "newsguard_orientation.csv",
               "domain,orientation\n"
               "nytimes.com,Right\n"
               "spiegel.de,Slightly Left\n"
               "nbcnews.com,Slightly Left\n"
               "democracydocket.com,Far Left\n"
               "trtworld.com,Slightly Right\n"
               "reuters.com,Left\n");
}

// ---------------------------------------------------------------------------
// Replay corpus with four engagement communities.

struct Group {
    std::vector<std::string> words;
    std::vector<std::string> tags;
};

const std::vector<Group> kGroups = {
    {{"election", "ballot", "senate", "campaign", "voters", "debate", "primary", "governor", "polling", "delegates"},
     {"Election2024", "vote", "politics", "senate", "democracy", "debate"}},
    {{"wildfires", "climate", "drought", "emissions", "heatwave", "glacier", "renewable", "carbon", "flooding",
      "ecosystem"},
     {"ClimateChange", "climate", "extremeheat", "wildfires", "energy", "science"}},
    {{"ceasefire", "embassy", "sanctions", "refugees", "diplomat", "border", "treaty", "humanitarian", "airstrike",
      "summit"},
     {"Gaza", "Ukraine", "worldnews", "diplomacy", "sanctions", "peace"}},
    {{"inflation", "markets", "tariffs", "earnings", "mortgage", "layoffs", "startup", "interest", "housing",
      "wages"},
     {"economy", "markets", "inflation", "jobs", "housing", "finance"}},
};
const std::vector<std::string> kCommonWords = {"today", "report", "people", "news",  "story", "read",
                                               "breaking", "update", "thread", "new", "week", "latest"};
const std::vector<std::string> kFiller = {"the", "and", "this", "is", "of", "to", "in", "for", "on", "with"};

struct PostInfo {
    std::string uri;
    std::string cid;
    std::string author;
    std::size_t group;
    json lexicon;  // record in lexicon shape, for the getPosts fixture
};

std::string did_for(std::size_t actor) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "did:plc:user%03zu", actor);
    return buf;
}

std::string fake_cid(Rng& rng) {
    static const char* alphabet = "abcdefghijklmnopqrstuvwxyz234567";
    std::string cid = "bafyrei";
    for (int i = 0; i < 52; ++i) cid += alphabet[rng.below(32)];
    return cid;
}

std::string make_url(Rng& rng, std::uint64_t n) {
    const unsigned roll = static_cast<unsigned>(rng.below(100));
    std::string domain;
    if (roll < 45) {
        // Reliable sources, skewed toward the top of the list.
        const std::size_t i = std::min(rng.below(kTopReliable.size()), rng.below(kTopReliable.size()));
        domain = rng.chance(8) ? "apnews.com" : kTopReliable[i];
    } else if (roll < 55) {
        const std::size_t i = std::min(rng.below(kTopUnreliable.size()), rng.below(kTopUnreliable.size()));
        domain = rng.chance(10) ? "censor.net" : kTopUnreliable[i];
    } else if (roll < 58) {
        return "https://news.example.co.uk/story/" + std::to_string(n);
    } else if (roll < 61) {
        return "https://" + std::string(rng.chance(50) ? "cooking" : "travel") + ".blogspot.com/p/" + std::to_string(n);
    } else if (roll < 62) {
        return "http://192.0.2." + std::to_string(1 + rng.below(20)) + "/item" + std::to_string(n);
    } else {
        domain = rng.pick(kUnrated);
    }
    switch (rng.below(4)) {
        case 0:
            return "https://www." + domain + "/2024/06/article-" + std::to_string(n);
        case 1:
            return "https://" + domain + "/news/" + std::to_string(n) + "?utm_source=bsky";
        case 2: {
            std::string upper = domain;
            for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return "http://" + upper + "/a/" + std::to_string(n);
        }
        default:
            return "https://" + domain + ":443/story/" + std::to_string(n) + "#top";
    }
}

// Builds a post in both the replay and the lexicon shapes.
std::pair<json, json> make_post(Rng& rng, std::size_t group, std::uint64_t n, const std::string& created_at) {
    const Group& g = kGroups[group];
    std::vector<std::string> words;
    const std::size_t length = 6 + rng.below(10);
    for (std::size_t i = 0; i < length; ++i) {
        const unsigned r = static_cast<unsigned>(rng.below(100));
        if (r < 45) {
            words.push_back(rng.pick(g.words));
        } else if (r < 60) {
            words.push_back(rng.pick(kGroups[rng.below(kGroups.size())].words));
        } else if (r < 80) {
            words.push_back(rng.pick(kCommonWords));
        } else {
            words.push_back(rng.pick(kFiller));
        }
    }
    std::vector<std::string> facet_tags;
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    const std::size_t tag_count = rng.below(4);
    for (std::size_t i = 0; i < tag_count; ++i) {
        const std::string tag = rng.chance(85) ? rng.pick(g.tags) : rng.pick(kGroups[rng.below(4)].tags);
        if (rng.chance(50)) {
            facet_tags.push_back(tag);
        }
        text += " #" + tag;
    }

    std::vector<std::string> links;
    std::string embed;
    const unsigned link_roll = static_cast<unsigned>(rng.below(100));
    const std::size_t link_count = link_roll < 30 ? 0 : link_roll < 85 ? 1 : link_roll < 97 ? 2 : 3;
    for (std::size_t i = 0; i < link_count; ++i) links.push_back(make_url(rng, n * 10 + i));
    if (!links.empty() && rng.chance(35)) {
        embed = rng.chance(50) ? links.front() : make_url(rng, n * 10 + 7);
    }
    if (rng.chance(2)) links.push_back("not a url");

    std::string lang = "en";
    if (rng.chance(6)) lang = "es";
    if (rng.chance(4)) lang = "pt-BR";

    json replay = {{"text", text}, {"langs", {lang}}, {"facets", json::array()}, {"embed_uris", json::array()}};
    json lexicon = {{"$type", "app.bsky.feed.post"}, {"text", text}, {"langs", {lang}}, {"createdAt", created_at}};
    json lex_facets = json::array();
    for (const auto& url : links) {
        replay["facets"].push_back({{"type", "link"}, {"value", url}});
        lex_facets.push_back({{"index", {{"byteStart", 0}, {"byteEnd", 1}}},
                              {"features", {{{"$type", "app.bsky.richtext.facet#link"}, {"uri", url}}}}});
    }
    for (const auto& tag : facet_tags) {
        replay["facets"].push_back({{"type", "tag"}, {"value", tag}});
        lex_facets.push_back({{"index", {{"byteStart", 0}, {"byteEnd", 1}}},
                              {"features", {{{"$type", "app.bsky.richtext.facet#tag"}, {"tag", tag}}}}});
    }
    if (!lex_facets.empty()) lexicon["facets"] = lex_facets;
    if (!embed.empty()) {
        replay["embed_uris"].push_back(embed);
        lexicon["embed"] = {{"$type", "app.bsky.embed.external"},
                            {"external", {{"uri", embed}, {"title", "t"}, {"description", ""}}}};
    }
    return {replay, lexicon};
}

struct Corpus {
    std::vector<std::string> lines;
    json posts_fixture;
};

Corpus make_replay_corpus() {
    Rng rng(20240614);
    constexpr std::size_t kActors = 300;
    constexpr std::size_t kEvents = 10'000;
    const auto group_of = [](std::size_t actor) { return actor % kGroups.size(); };

    std::vector<std::vector<PostInfo>> by_group(kGroups.size());
    json fixture_posts = json::array();

    // Posts that exist upstream but never appear on the stream.
    const Timestamp before = *newsky::parse_rfc3339("2024-06-13T08:00:00Z");
    for (std::size_t i = 0; i < 200; ++i) {
        const std::size_t actor = rng.below(kActors);
        const std::string created = newsky::format_rfc3339(before + std::chrono::seconds(i * 97));
        auto [replay, lexicon] = make_post(rng, group_of(actor), 900'000 + i, created);
        PostInfo info{"at://" + did_for(actor) + "/app.bsky.feed.post/3ext" + std::to_string(1000 + i), fake_cid(rng),
                      did_for(actor), group_of(actor), lexicon};
        fixture_posts.push_back({{"uri", info.uri},
                                 {"cid", info.cid},
                                 {"author", {{"did", info.author}, {"handle", "u.example"}}},
                                 {"record", info.lexicon},
                                 {"indexedAt", created}});
        by_group[info.group].push_back(std::move(info));
    }

    Corpus corpus;
    std::int64_t cursor = 1000;
    Timestamp t = *newsky::parse_rfc3339("2024-06-14T00:00:00Z");
    for (std::size_t i = 0; i < kEvents; ++i) {
        cursor += 1 + static_cast<std::int64_t>(rng.below(3));
        t += std::chrono::seconds(rng.below(52));
        const std::size_t actor = rng.below(kActors);
        const std::size_t group = group_of(actor);
        const std::string created = newsky::format_rfc3339(t);
        json line = {{"cursor", cursor}, {"actor", did_for(actor)}, {"created_at", created}};
        const unsigned roll = static_cast<unsigned>(rng.below(100));

        if (roll < 40 || by_group[group].empty()) {
            auto [replay, lexicon] = make_post(rng, group, static_cast<std::uint64_t>(cursor), created);
            line["kind"] = "post";
            line["record"] = replay;
            PostInfo info{"at://" + did_for(actor) + "/app.bsky.feed.post/" + std::to_string(cursor), fake_cid(rng),
                          did_for(actor), group, lexicon};
            fixture_posts.push_back({{"uri", info.uri},
                                     {"cid", info.cid},
                                     {"author", {{"did", info.author}, {"handle", "u.example"}}},
                                     {"record", info.lexicon},
                                     {"indexedAt", created}});
            by_group[group].push_back(std::move(info));
        } else if (roll < 95) {
            line["kind"] = roll < 60 ? "repost" : "like";
            std::string uri;
            std::string cid;
            if (rng.chance(2)) {
                uri = "at://did:plc:gone" + std::to_string(rng.below(50)) + "/app.bsky.feed.post/3gone" +
                      std::to_string(i);
                cid = fake_cid(rng);
            } else {
                const std::size_t target_group = rng.chance(88) ? group : rng.below(kGroups.size());
                const auto& pool = by_group[target_group].empty() ? by_group[group] : by_group[target_group];
                // Recent posts are more likely to be engaged with.
                const std::size_t span = std::min<std::size_t>(pool.size(), 400);
                const PostInfo& target = pool[pool.size() - 1 - rng.below(span)];
                uri = target.uri;
                cid = target.cid;
            }
            line["subject"] = {{"uri", uri}, {"cid", cid}};
        } else {
            line["kind"] = roll < 98 ? "other" : "follow";
            line["subject"] = did_for(rng.below(kActors));
        }
        if (rng.chance(1)) line["client"] = "fixture";
        corpus.lines.push_back(line.dump());
    }
    corpus.posts_fixture = {{"posts", fixture_posts}};
    return corpus;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

// Truncates three post lines; the corrupted cursors go into a side file.
std::pair<std::vector<std::string>, json> corrupt_three(const std::vector<std::string>& lines) {
    std::vector<std::string> out = lines;
    json cursors = json::array();
    for (const std::size_t idx : {1234u, 5678u, 9012u}) {
        std::size_t i = idx;
        while (json::parse(out[i]).value("kind", "") != "post") ++i;
        cursors.push_back(json::parse(out[i])["cursor"]);
        out[i] = out[i].substr(0, out[i].size() / 2);
    }
    return {out, cursors};
}

// ---------------------------------------------------------------------------
// Small structured corpora.

json post_line(std::int64_t cursor, const std::string& actor, Timestamp t, const std::vector<std::string>& urls,
               const std::vector<std::string>& tags = {}) {
    json facets = json::array();
    for (const auto& u : urls) facets.push_back({{"type", "link"}, {"value", u}});
    std::string text = "fixture post";
    for (const auto& tag : tags) text += " #" + tag;
    return {{"cursor", cursor},
            {"kind", "post"},
            {"actor", actor},
            {"created_at", newsky::format_rfc3339(t)},
            {"record", {{"text", text}, {"langs", {"en"}}, {"facets", facets}, {"embed_uris", json::array()}}}};
}

// Three days; each day carries 98 reliable and 2 unreliable links. Four
// posts per day hold two links to the same reliable domain.
std::vector<std::string> make_98_2() {
    Rng rng(982);
    std::vector<std::string> lines;
    std::int64_t cursor = 1;
    const Timestamp day0 = *newsky::parse_rfc3339("2024-07-01T00:00:00Z");
    for (int day = 0; day < 3; ++day) {
        std::vector<std::vector<std::string>> posts;
        for (int i = 0; i < 90; ++i) {
            const auto& d = kTopReliable[static_cast<std::size_t>(i) % kTopReliable.size()];
            posts.push_back({"https://www." + d + "/d" + std::to_string(day) + "/s" + std::to_string(i)});
        }
        for (int i = 0; i < 4; ++i) {
            const auto& d = kTopReliable[static_cast<std::size_t>(i)];
            posts.push_back({"https://" + d + "/pair/" + std::to_string(day) + "-" + std::to_string(i) + "a",
                             "https://" + d + "/pair/" + std::to_string(day) + "-" + std::to_string(i) + "b"});
        }
        posts.push_back({"https://dailykos.com/story/" + std::to_string(day)});
        posts.push_back({"https://www.msnbc.com/news/" + std::to_string(day)});
        for (int i = 0; i < 5; ++i) posts.push_back({"https://youtube.com/watch?v=" + std::to_string(day * 10 + i)});
        for (int i = 0; i < 3; ++i) posts.push_back({});
        // Deterministic shuffle of posting order within the day.
        for (std::size_t i = posts.size(); i > 1; --i) std::swap(posts[i - 1], posts[rng.below(i)]);
        for (std::size_t i = 0; i < posts.size(); ++i) {
            const auto t = day0 + std::chrono::hours(24 * day) + std::chrono::seconds(i * 800 + rng.below(700));
            lines.push_back(post_line(cursor++, did_for(i % 37), t, posts[i]).dump());
        }
    }
    return lines;
}

// Frequencies descend in the published top-10 order; unrated noise sits in between.
std::vector<std::string> make_top_domains() {
    std::vector<std::string> lines;
    std::int64_t cursor = 1;
    const Timestamp t0 = *newsky::parse_rfc3339("2024-08-01T00:00:00Z");
    std::vector<std::pair<std::string, int>> counts;
    for (std::size_t i = 0; i < kTopReliable.size(); ++i) counts.emplace_back(kTopReliable[i], 120 - 9 * static_cast<int>(i));
    for (std::size_t i = 0; i < kTopUnreliable.size(); ++i) counts.emplace_back(kTopUnreliable[i], 64 - 5 * static_cast<int>(i));
    counts.emplace_back("apnews.com", 5);
    counts.emplace_back("youtube.com", 150);
    counts.emplace_back("wikipedia.org", 40);
    std::size_t k = 0;
    for (const auto& [domain, n] : counts) {
        for (int i = 0; i < n; ++i, ++k) {
            lines.push_back(post_line(cursor++, did_for(k % 50), t0 + std::chrono::seconds(k * 20),
                                      {"https://www." + domain + "/item/" + std::to_string(i)})
                                .dump());
        }
    }
    return lines;
}

// Reliable links: 59 lean-left, 24 left, 17 right. Unreliable links carry a
// smaller mix including one source without any orientation.
std::vector<std::string> make_orientation_mix() {
    std::vector<std::string> lines;
    std::int64_t cursor = 1;
    const Timestamp t0 = *newsky::parse_rfc3339("2024-08-05T00:00:00Z");
    const std::vector<std::pair<std::string, int>> counts = {
        {"nytimes.com", 30}, {"npr.org", 29}, {"cnn.com", 24}, {"rightpost.example", 17},
        {"msnbc.com", 6},    {"thegatewaypundit.com", 3},      {"censor.net", 1}};
    std::size_t k = 0;
    for (const auto& [domain, n] : counts) {
        for (int i = 0; i < n; ++i, ++k) {
            lines.push_back(post_line(cursor++, did_for(k % 20), t0 + std::chrono::seconds(k * 60),
                                      {"https://" + domain + "/o/" + std::to_string(i)})
                                .dump());
        }
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Live binary frames: [u32 big-endian length][header CBOR][body CBOR].

std::array<std::uint8_t, 32> sha256(const dagcbor::Bytes& data) {
    std::array<std::uint8_t, 32> digest{};
    SHA256(data.data(), data.size(), digest.data());
    return digest;
}

struct LiveOp {
    std::string action;
    std::string collection;
    std::string rkey;
    json record;  // empty for deletes
};

dagcbor::Bytes frame_bytes(const json& header, const json& body) {
    dagcbor::Bytes out = dagcbor::encode(header);
    const auto b = dagcbor::encode(body);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

dagcbor::Bytes commit_frame(std::int64_t seq, const std::string& repo, const std::vector<LiveOp>& ops,
                            const std::string& time) {
    dagcbor::CarFile car;
    json op_list = json::array();
    const auto commit_block = dagcbor::encode(json{{"did", repo}, {"rev", "3kx" + std::to_string(seq)}});
    const auto commit_cid = dagcbor::make_cid(sha256(commit_block));
    car.roots.emplace_back(commit_cid.begin(), commit_cid.end());
    car.blocks[std::string(commit_cid.begin(), commit_cid.end())] = commit_block;
    for (const auto& op : ops) {
        json entry = {{"action", op.action}, {"path", op.collection + "/" + op.rkey}};
        if (op.action == "delete") {
            entry["cid"] = nullptr;
        } else {
            const auto block = dagcbor::encode(op.record);
            const auto cid = dagcbor::make_cid(sha256(block));
            car.blocks[std::string(cid.begin(), cid.end())] = block;
            entry["cid"] = dagcbor::make_link(cid);
        }
        op_list.push_back(entry);
    }
    json body = {{"seq", seq},
                 {"rebase", false},
                 {"tooBig", false},
                 {"repo", repo},
                 {"commit", dagcbor::make_link(commit_cid)},
                 {"rev", "3kx" + std::to_string(seq)},
                 {"since", nullptr},
                 {"blocks", json::binary(dagcbor::write_car(car))},
                 {"ops", op_list},
                 {"blobs", json::array()},
                 {"time", time}};
    return frame_bytes({{"op", 1}, {"t", "#commit"}}, body);
}

void write_live_frames(const std::filesystem::path& dir) {
    std::vector<dagcbor::Bytes> frames;
    json expected = json::array();
    json signals = json::array();
    const std::string alice = "did:plc:alicelive";
    const std::string bob = "did:plc:boblive";
    const std::string post_uri = "at://" + alice + "/app.bsky.feed.post/3kpost1";
    const std::string post_cid = "bafyreihq4gfj5cxuwy2s4nbdlqcfzeyy6ejbnsh4ix2lp5sijt6i6hgq4a";

    json post = {{"$type", "app.bsky.feed.post"},
                 {"text", "Senate vote tonight #Election2024 https://nytimes.com/x"},
                 {"langs", {"en"}},
                 {"createdAt", "2024-06-14T12:00:00.123Z"},
                 {"facets",
                  {{{"index", {{"byteStart", 0}, {"byteEnd", 5}}},
                    {"features", {{{"$type", "app.bsky.richtext.facet#link"}, {"uri", "https://www.nytimes.com/2024/06/14/us/vote.html"}}}}},
                   {{"index", {{"byteStart", 20}, {"byteEnd", 33}}},
                    {"features", {{{"$type", "app.bsky.richtext.facet#tag"}, {"tag", "Election2024"}}}}}}},
                 {"embed",
                  {{"$type", "app.bsky.embed.external"},
                   {"external", {{"uri", "https://www.theguardian.com/us-news/x"}, {"title", "t"}, {"description", "d"}}}}}};
    frames.push_back(commit_frame(5001, alice, {{"create", "app.bsky.feed.post", "3kpost1", post}},
                                  "2024-06-14T12:00:01.000Z"));
    expected.push_back({{"cursor", 5001}, {"kind", "post"}, {"actor", alice}, {"rkey", "3kpost1"},
                        {"created_at", "2024-06-14T12:00:00Z"},
                        {"text", post["text"]},
                        {"langs", {"en"}},
                        {"links", {"https://www.nytimes.com/2024/06/14/us/vote.html"}},
                        {"tags", {"Election2024"}},
                        {"embed_uris", {"https://www.theguardian.com/us-news/x"}}});

    json like = {{"$type", "app.bsky.feed.like"},
                 {"subject", {{"uri", post_uri}, {"cid", post_cid}}},
                 {"createdAt", "2024-06-14T12:00:05Z"}};
    frames.push_back(commit_frame(5002, bob, {{"create", "app.bsky.feed.like", "3klike1", like}},
                                  "2024-06-14T12:00:06Z"));
    expected.push_back({{"cursor", 5002}, {"kind", "like"}, {"actor", bob}, {"rkey", "3klike1"},
                        {"created_at", "2024-06-14T12:00:05Z"},
                        {"subject_uri", post_uri}, {"subject_cid", post_cid}});

    json repost = {{"$type", "app.bsky.feed.repost"},
                   {"subject", {{"uri", post_uri}, {"cid", post_cid}}},
                   {"createdAt", "2024-06-14T12:01:00Z"}};
    frames.push_back(commit_frame(5003, bob, {{"create", "app.bsky.feed.repost", "3krepost1", repost}},
                                  "2024-06-14T12:01:01Z"));
    expected.push_back({{"cursor", 5003}, {"kind", "repost"}, {"actor", bob}, {"rkey", "3krepost1"},
                        {"created_at", "2024-06-14T12:01:00Z"},
                        {"subject_uri", post_uri}, {"subject_cid", post_cid}});

    json follow = {{"$type", "app.bsky.graph.follow"}, {"subject", alice}, {"createdAt", "2024-06-14T12:02:00Z"}};
    frames.push_back(commit_frame(5004, bob, {{"create", "app.bsky.graph.follow", "3kfollow1", follow}},
                                  "2024-06-14T12:02:01Z"));

    json post2 = {{"$type", "app.bsky.feed.post"}, {"text", "no links here #quiet"}, {"createdAt", "2024-06-14T12:03:00Z"}};
    json like2 = {{"$type", "app.bsky.feed.like"},
                  {"subject", {{"uri", post_uri}, {"cid", post_cid}}},
                  {"createdAt", "2024-06-14T12:03:01Z"}};
    frames.push_back(commit_frame(5005, alice,
                                  {{"create", "app.bsky.feed.post", "3kpost2", post2},
                                   {"create", "app.bsky.feed.like", "3klike2", like2},
                                   {"delete", "app.bsky.feed.post", "3kold", json()}},
                                  "2024-06-14T12:03:02Z"));
    expected.push_back({{"cursor", 5005}, {"kind", "post"}, {"actor", alice}, {"rkey", "3kpost2"},
                        {"created_at", "2024-06-14T12:03:00Z"}, {"text", post2["text"]}, {"langs", json::array()},
                        {"links", json::array()}, {"tags", json::array()}, {"embed_uris", json::array()}});
    expected.push_back({{"cursor", 5005}, {"kind", "like"}, {"actor", alice}, {"rkey", "3klike2"},
                        {"created_at", "2024-06-14T12:03:01Z"},
                        {"subject_uri", post_uri}, {"subject_cid", post_cid}});

    frames.push_back(frame_bytes({{"op", 1}, {"t", "#identity"}},
                                 {{"seq", 5006}, {"did", alice}, {"time", "2024-06-14T12:04:00Z"}}));

    // No createdAt: the commit time stands in.
    json post3 = {{"$type", "app.bsky.feed.post"}, {"text", "undated https://bbc.com/news/1"},
                  {"facets", {{{"index", {{"byteStart", 8}, {"byteEnd", 30}}},
                               {"features", {{{"$type", "app.bsky.richtext.facet#link"}, {"uri", "https://bbc.com/news/1"}}}}}}}};
    frames.push_back(commit_frame(5007, bob, {{"create", "app.bsky.feed.post", "3kpost3", post3}},
                                  "2024-06-14T12:05:00Z"));
    expected.push_back({{"cursor", 5007}, {"kind", "post"}, {"actor", bob}, {"rkey", "3kpost3"},
                        {"created_at", "2024-06-14T12:05:00Z"}, {"text", post3["text"]}, {"langs", json::array()},
                        {"links", {"https://bbc.com/news/1"}}, {"tags", json::array()}, {"embed_uris", json::array()}});

    frames.push_back(frame_bytes({{"op", 1}, {"t", "#info"}}, {{"name", "OutdatedCursor"}, {"message", "gap"}}));
    signals.push_back({{"after_cursor", 5007}, {"signal", "cursor_gap"}});

    json like3 = {{"$type", "app.bsky.feed.like"},
                  {"subject", {{"uri", post_uri}, {"cid", post_cid}}},
                  {"createdAt", "2024-06-14T12:06:00Z"}};
    frames.push_back(commit_frame(5008, alice, {{"create", "app.bsky.feed.like", "3klike3", like3}},
                                  "2024-06-14T12:06:01Z"));
    expected.push_back({{"cursor", 5008}, {"kind", "like"}, {"actor", alice}, {"rkey", "3klike3"},
                        {"created_at", "2024-06-14T12:06:00Z"},
                        {"subject_uri", post_uri}, {"subject_cid", post_cid}});

    frames.push_back(frame_bytes({{"op", -1}}, {{"error", "ConsumerTooSlow"}, {"message", "slow down"}}));
    signals.push_back({{"after_cursor", 5008}, {"signal", "server_error"}});

    std::string bin;
    for (const auto& f : frames) {
        const auto n = static_cast<std::uint32_t>(f.size());
        bin.push_back(static_cast<char>(n >> 24));
        bin.push_back(static_cast<char>((n >> 16) & 0xff));
        bin.push_back(static_cast<char>((n >> 8) & 0xff));
        bin.push_back(static_cast<char>(n & 0xff));
        bin.append(f.begin(), f.end());
    }
    write_text(dir / "live_frames.bin", bin);
    json manifest = {{"frames", frames.size()}, {"events", expected}, {"signals", signals},
                     {"skipped_cursors", {5004, 5006}}};
    write_text(dir / "live_frames.manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <output-dir>\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    try {
        write_ratings(dir / "ratings");
        const Corpus corpus = make_replay_corpus();
        write_text(dir / "replay_10k.jsonl", join_lines(corpus.lines));
        write_text(dir / "posts_fixture.json", corpus.posts_fixture.dump(1) + "\n");
        const auto [corrupt, cursors] = corrupt_three(corpus.lines);
        write_text(dir / "replay_10k_corrupt3.jsonl", join_lines(corrupt));
        write_text(dir / "replay_10k_corrupt3.cursors.json", cursors.dump() + "\n");
        write_text(dir / "prevalence_98_2.jsonl", join_lines(make_98_2()));
        write_text(dir / "top_domains.jsonl", join_lines(make_top_domains()));
        write_text(dir / "orientation_mix.jsonl", join_lines(make_orientation_mix()));
        write_live_frames(dir);
    } catch (const std::exception& e) {
        std::cerr << "make_fixtures: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
