#include "newsky/analytics/lexicon.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>

#include "newsky/parser/post_parser.hpp"

namespace newsky::analytics {

namespace {

void flush(std::string& token, std::size_t code_points, bool has_letter, std::optional<std::string_view> lang,
           std::vector<std::string>& out) {
    if (code_points >= 2 && has_letter) {
        std::string word = parser::fold_case(token);
        if (!is_stopword(word, lang)) out.push_back(std::move(word));
    }
    token.clear();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, std::optional<std::string_view> lang) {
    std::vector<std::string> out;
    std::string token;
    std::size_t code_points = 0;
    bool has_letter = false;
    const auto* data = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < length) {
        const std::int32_t start = i;
        UChar32 c = 0;
        U8_NEXT(data, i, length, c);
        if (c >= 0 && u_isalnum(c)) {
            token.append(text.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
            ++code_points;
            has_letter = has_letter || u_isalpha(c);
            continue;
        }
        flush(token, code_points, has_letter, lang, out);
        code_points = 0;
        has_letter = false;
    }
    flush(token, code_points, has_letter, lang, out);
    return out;
}

void CommunityLexicon::add(const std::string& word, std::int64_t count) {
    counts[word] += count;
    total += count;
}

WordCounts pooled_counts(const std::vector<CommunityLexicon>& lexicons) {
    WordCounts pooled;
    for (const auto& lex : lexicons) {
        for (const auto& [word, count] : lex.counts) pooled[word] += count;
    }
    return pooled;
}

CommunityLexicon complement(const std::vector<CommunityLexicon>& lexicons, std::size_t target) {
    CommunityLexicon rest;
    rest.community_id = target;
    for (std::size_t i = 0; i < lexicons.size(); ++i) {
        if (i == target) continue;
        for (const auto& [word, count] : lexicons[i].counts) rest.add(word, count);
    }
    return rest;
}

double log_odds_delta(double y_iw, double n_i, double y_jw, double n_j, double a_w, double a_0,
                      DenominatorForm form) {
    const double sign = form == DenominatorForm::AsPrinted ? 1.0 : -1.0;
    const double target = std::log((y_iw + a_w) / (n_i + a_0 - y_iw + sign * a_w));
    const double rest = std::log((y_jw + a_w) / (n_j + a_0 - y_jw + sign * a_w));
    return target - rest;
}

std::map<std::string, double> log_odds(const CommunityLexicon& target, const CommunityLexicon& rest,
                                       const WordCounts& prior, DenominatorForm form) {
    double a_0 = 0.0;
    for (const auto& [word, count] : prior) a_0 += static_cast<double>(count);
    const auto count_of = [](const CommunityLexicon& lex, const std::string& word) {
        const auto it = lex.counts.find(word);
        return it == lex.counts.end() ? 0.0 : static_cast<double>(it->second);
    };
    std::map<std::string, double> out;
    for (const auto& [word, a_w] : prior) {
        out[word] = log_odds_delta(count_of(target, word), static_cast<double>(target.total), count_of(rest, word),
                                   static_cast<double>(rest.total), static_cast<double>(a_w), a_0, form);
    }
    return out;
}

std::vector<ScoredWord> top_words(const CommunityLexicon& target, const std::map<std::string, double>& delta,
                                  std::size_t limit) {
    std::vector<ScoredWord> words;
    for (const auto& [word, count] : target.counts) {
        const auto it = delta.find(word);
        if (it == delta.end() || count == 0) continue;
        words.push_back({word, it->second, count});
    }
    std::sort(words.begin(), words.end(), [](const ScoredWord& a, const ScoredWord& b) {
        if (a.delta != b.delta) return a.delta > b.delta;
        return a.word < b.word;
    });
    if (words.size() > limit) words.resize(limit);
    return words;
}

}  // namespace newsky::analytics
