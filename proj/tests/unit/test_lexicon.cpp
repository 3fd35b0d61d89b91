#include <doctest.h>

#include <cmath>
#include <random>

#include "newsky/analytics/lexicon.hpp"

using namespace newsky::analytics;

namespace {

// The log-odds expression written out term by term.
double delta_oracle(double yi, double ni, double yj, double nj, double aw, double a0) {
    const double lhs = std::log((yi + aw) / (ni + a0 - yi + aw));
    const double rhs = std::log((yj + aw) / (nj + a0 - yj + aw));
    return lhs - rhs;
}

CommunityLexicon random_lexicon(std::mt19937_64& rng, std::size_t id) {
    CommunityLexicon lex;
    lex.community_id = id;
    for (int w = 0; w < 30; ++w) {
        const auto c = static_cast<std::int64_t>(rng() % 6);
        if (c > 0) lex.add("w" + std::to_string(w), c);
    }
    return lex;
}

}  // namespace

TEST_CASE("worked example") {
    const double expected = std::log(7.0 / 31.0) - std::log(5.0 / 33.0);
    CHECK(std::abs(log_odds_delta(3, 10, 1, 10, 4, 20) - expected) < 1e-9);
    CHECK(std::abs(log_odds_delta(3, 10, 1, 10, 4, 20) - delta_oracle(3, 10, 1, 10, 4, 20)) < 1e-12);
    CHECK(expected == doctest::Approx(0.399).epsilon(1e-3));
    // The conventional form subtracts the prior in the denominators.
    const double conventional = std::log(7.0 / 23.0) - std::log(5.0 / 25.0);
    CHECK(std::abs(log_odds_delta(3, 10, 1, 10, 4, 20, DenominatorForm::Conventional) - conventional) < 1e-12);
}

TEST_CASE("identical corpora give zero") {
    std::mt19937_64 rng(1);
    const auto a = random_lexicon(rng, 0);
    CommunityLexicon b = a;
    b.community_id = 1;
    const std::vector<CommunityLexicon> both = {a, b};
    const auto prior = pooled_counts(both);
    for (const auto& [w, d] : log_odds(a, b, prior)) CHECK(std::abs(d) < 1e-12);
}

TEST_CASE("swapping target and rest negates delta") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<CommunityLexicon> lex = {random_lexicon(rng, 0), random_lexicon(rng, 1),
                                                   random_lexicon(rng, 2)};
        const auto prior = pooled_counts(lex);
        const auto rest = complement(lex, 0);
        const auto forward = log_odds(lex[0], rest, prior);
        const auto backward = log_odds(rest, lex[0], prior);
        REQUIRE(forward.size() == backward.size());
        for (const auto& [w, d] : forward) CHECK(d == doctest::Approx(-backward.at(w)).epsilon(1e-12));
        for (const auto& [w, d] : forward) {
            const double yi = lex[0].counts.count(w) ? static_cast<double>(lex[0].counts.at(w)) : 0.0;
            const double yj = rest.counts.count(w) ? static_cast<double>(rest.counts.at(w)) : 0.0;
            CHECK(d == doctest::Approx(delta_oracle(yi, static_cast<double>(lex[0].total), yj,
                                                    static_cast<double>(rest.total),
                                                    static_cast<double>(prior.at(w)),
                                                    static_cast<double>([&] {
                                                        std::int64_t t = 0;
                                                        for (const auto& [k, v] : prior) t += v;
                                                        return t;
                                                    }())))
                           .epsilon(1e-12));
        }
    }
}

TEST_CASE("a word used only by the target scores positive") {
    CommunityLexicon a, b;
    a.add("shared", 5);
    a.add("mine", 3);
    b.add("shared", 5);
    const auto prior = pooled_counts({a, b});
    const auto d = log_odds(a, b, prior);
    CHECK(d.at("mine") > 0);
    CHECK(d.at("mine") > d.at("shared"));
}

TEST_CASE("pooled counts and complement") {
    CommunityLexicon a, b, c;
    a.add("x", 2);
    b.add("x", 1);
    b.add("y", 4);
    c.add("z");
    const auto pooled = pooled_counts({a, b, c});
    CHECK(pooled.at("x") == 3);
    CHECK(pooled.at("y") == 4);
    const auto rest = complement({a, b, c}, 0);
    CHECK(rest.total == 6);
    CHECK(rest.counts.at("y") == 4);
    CHECK(rest.counts.count("x") == 1);
}

TEST_CASE("top words ordering") {
    CommunityLexicon t;
    t.add("b", 1);
    t.add("a", 1);
    t.add("c", 2);
    const std::map<std::string, double> delta = {{"a", 0.5}, {"b", 0.5}, {"c", 0.9}, {"unused", 3.0}};
    const auto top = top_words(t, delta, 10);
    REQUIRE(top.size() == 3);
    CHECK(top[0].word == "c");
    CHECK(top[1].word == "a");
    CHECK(top[2].word == "b");
    CHECK(top_words(t, delta, 1).size() == 1);
}

TEST_CASE("tokenizer") {
    CHECK(tokenize("The Senate VOTED on the ballot today!") ==
          std::vector<std::string>{"senate", "voted", "ballot", "today"});
    CHECK(tokenize("a 2024 x1 ok", "en") == std::vector<std::string>{"x1", "ok"});
    CHECK(tokenize("https://www.example.com rt @user", "en") == std::vector<std::string>{"example", "user"});
    CHECK(tokenize("Die Wahl und der Bundestag", "de") == std::vector<std::string>{"wahl", "bundestag"});
    CHECK(tokenize("Élection présidentielle", "fr") == std::vector<std::string>{"élection", "présidentielle"});
    CHECK(is_stopword("the", std::nullopt));
    CHECK(is_stopword("und", std::string_view("de")));
    CHECK_FALSE(is_stopword("und", std::string_view("en")));
}
