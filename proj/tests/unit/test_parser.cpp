#include <doctest.h>

#include <regex>

#include "newsky/parser/post_parser.hpp"
#include "newsky/parser/public_suffix.hpp"
#include "support.hpp"

using namespace newsky;
using namespace newsky::parser;

namespace {

ingest::FirehoseEvent post_event(ingest::PostRecord record) {
    ingest::FirehoseEvent e;
    e.cursor = 1;
    e.kind = ingest::EventKind::Post;
    e.actor_id = "did:plc:a";
    e.rkey = "3k";
    e.created_at = from_unix(1718366400);
    e.record = std::move(record);
    return e;
}

std::string ascii_lower(std::string s) {
    for (auto& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

}  // namespace

TEST_CASE("public suffix test vectors") {
    const std::string text = testing::read_file(testing::test_data("test_psl.txt"));
    const std::regex check(R"((?:^|\n)checkPublicSuffix\((null|'[^']*'), (null|'[^']*')\);)");
    int checked = 0;
    for (std::sregex_iterator it(text.begin(), text.end(), check), end; it != end; ++it) {
        const std::string input = (*it)[1];
        const std::string expected = (*it)[2];
        if (input == "null") continue;
        const std::string host = ascii_lower(input.substr(1, input.size() - 2));
        // Non-ASCII vectors have punycode twins in the same file; hosts are
        // matched in the form the list itself uses.
        if (std::any_of(host.begin(), host.end(), [](char c) { return static_cast<unsigned char>(c) >= 0x80; })) {
            continue;
        }
        std::optional<std::string> got;
        if (!host.empty() && host.front() != '.') got = PublicSuffixList::bundled().registrable_domain(host);
        CAPTURE(host);
        if (expected == "null") {
            CHECK_FALSE(got);
        } else {
            CHECK(got == expected.substr(1, expected.size() - 2));
        }
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("public suffix rules from text") {
    const auto psl = PublicSuffixList::parse("// comment\ncom\n*.ck\n!www.ck\nco.uk\nuk\n");
    CHECK(psl.public_suffix("example.com") == "com");
    CHECK(psl.registrable_domain("a.b.example.co.uk") == "example.co.uk");
    CHECK(psl.registrable_domain("x.y.ck") == "x.y.ck");
    CHECK(psl.registrable_domain("www.ck") == "www.ck");
    CHECK_FALSE(psl.registrable_domain("co.uk"));
    CHECK(psl.registrable_domain("foo.unlisted") == "foo.unlisted");
}

TEST_CASE("normalize_domain examples") {
    CHECK(normalize_domain("http://NYTimes.com/2024/a?b=c") == "nytimes.com");
    CHECK(normalize_domain("https://www.bbc.com") == "bbc.com");
    CHECK(normalize_domain("https://news.example.co.uk/story") == "example.co.uk");
    CHECK(normalize_domain("https://www.theguardian.com/us-news/x") == "theguardian.com");
    CHECK(normalize_domain("https://edition.cnn.com:443/x#frag") == "cnn.com");
    CHECK(normalize_domain("https://user:pw@www.reuters.com/world") == "reuters.com");
    CHECK(normalize_domain("https://cooking.blogspot.com/p/1") == "cooking.blogspot.com");
    CHECK(normalize_domain("http://192.0.2.10/item") == "192.0.2.10");
    CHECK(normalize_domain("http://[2001:DB8::1]:8080/") == "[2001:db8::1]");
    CHECK(normalize_domain("//spiegel.de/politik") == "spiegel.de");
    CHECK(normalize_domain("https://nytimes.com./x") == "nytimes.com");
    CHECK_FALSE(normalize_domain("not a url"));
    CHECK_FALSE(normalize_domain("mailto:someone@example.com"));
    CHECK_FALSE(normalize_domain("https://"));
    CHECK_FALSE(normalize_domain("https://bad host/"));
    CHECK_FALSE(normalize_domain("https://x.com:port/"));
    CHECK_FALSE(normalize_domain(""));
}

TEST_CASE("normalize_domain is idempotent") {
    const std::vector<std::string> urls = {
        "https://WWW.NYTimes.com/a",        "http://www.www.example.com/",   "https://a.b.c.example.co.uk/x",
        "https://travel.blogspot.com/",     "https://192.0.2.1/",            "https://news.bbc.co.uk/1",
        "https://sub.domain.spiegel.de/q?", "https://www.msnbc.com:8443/",   "https://x.y.z.github.io/",
        "http://localhost:8080/",           "https://xn--85x722f.com.cn/p", "https://a.example/"};
    for (const auto& url : urls) {
        CAPTURE(url);
        const auto once = normalize_domain(url);
        REQUIRE(once);
        CHECK(normalize_domain("https://" + *once + "/path") == once);
    }
}

TEST_CASE("parse_post extracts links and hashtags") {
    SUBCASE("embed only") {
        const auto p = parse_post(post_event({"t", {}, {}, {"https://www.theguardian.com/us-news/x"}}));
        REQUIRE(p.urls.size() == 1);
        CHECK(p.urls[0].domain == "theguardian.com");
        CHECK(p.post_uri == "at://did:plc:a/app.bsky.feed.post/3k");
    }
    SUBCASE("text hashtags are case-folded") {
        const auto p = parse_post(post_event({"hello #Covid world", {}, {}, {}}));
        CHECK(p.urls.empty());
        CHECK(p.hashtags == std::vector<std::string>{"covid"});
    }
    SUBCASE("facet link and identical embed count once") {
        const std::string url = "https://www.nytimes.com/2024/x";
        const auto p = parse_post(post_event({"t", {}, {{ingest::Facet::Type::Link, url}}, {url}}));
        CHECK(p.urls.size() == 1);
    }
    SUBCASE("tags from facets and text merge without duplicates") {
        const auto p = parse_post(post_event(
            {"#Gaza now #Peace! #2024", {"pt-BR"}, {{ingest::Facet::Type::Tag, "gaza"}, {ingest::Facet::Type::Tag, "#Ukraine"}}, {}}));
        CHECK(p.hashtags == std::vector<std::string>{"gaza", "ukraine", "peace"});
        CHECK(p.lang == "pt");
    }
    SUBCASE("unparseable links are dropped, distinct urls of one domain kept") {
        const auto p = parse_post(post_event({"t",
                                              {},
                                              {{ingest::Facet::Type::Link, "not a url"},
                                               {ingest::Facet::Type::Link, "https://bbc.com/a"},
                                               {ingest::Facet::Type::Link, "https://bbc.com/b"}},
                                              {}}));
        REQUIRE(p.urls.size() == 2);
        CHECK(p.urls[0].domain == "bbc.com");
        CHECK(p.urls[1].raw_url == "https://bbc.com/b");
    }
}

TEST_CASE("hashtag extraction edge cases") {
    CHECK(extract_hashtags("a#notatag #ok") == std::vector<std::string>{"ok"});
    CHECK(extract_hashtags("#123 #a1") == std::vector<std::string>{"a1"});
    CHECK(extract_hashtags("#Straße #STRASSE") == std::vector<std::string>{"strasse"});
    CHECK(extract_hashtags("#news, #news.") == std::vector<std::string>{"news"});
    CHECK(extract_hashtags("").empty());
}

TEST_CASE("parsed posts survive json") {
    const auto p = parse_post(post_event({"x #y", {"en"}, {{ingest::Facet::Type::Link, "https://bbc.com/a"}}, {}}));
    const auto back = parsed_post_from_json(to_json(p));
    CHECK(back.urls == p.urls);
    CHECK(back.hashtags == p.hashtags);
    CHECK(back.lang == p.lang);
    CHECK(back.created_at == p.created_at);
}
