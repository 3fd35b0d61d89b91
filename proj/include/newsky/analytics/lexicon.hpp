#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace newsky::analytics {

/// Lowercased runs of Unicode letters and digits, at least two code points
/// long, containing a letter, with stopwords for `lang` removed. Posts with
/// no declared language use the English list.
std::vector<std::string> tokenize(std::string_view text, std::optional<std::string_view> lang = std::nullopt);

bool is_stopword(std::string_view word, std::optional<std::string_view> lang);

using WordCounts = std::map<std::string, std::int64_t>;

struct CommunityLexicon {
    std::size_t community_id = 0;
    WordCounts counts;  // y_iw
    std::int64_t total = 0;  // n_i

    void add(const std::string& word, std::int64_t count = 1);
};

/// Sum of per-community counts; the informative prior a_w, with a_0 its total.
WordCounts pooled_counts(const std::vector<CommunityLexicon>& lexicons);

/// All lexicons except `target`, merged.
CommunityLexicon complement(const std::vector<CommunityLexicon>& lexicons, std::size_t target);

// AsPrinted uses n + a_0 - y + a_w in both denominators; Conventional uses
// n + a_0 - y - a_w.
enum class DenominatorForm { AsPrinted, Conventional };

double log_odds_delta(double y_iw, double n_i, double y_jw, double n_j, double a_w, double a_0,
                      DenominatorForm form = DenominatorForm::AsPrinted);

/// delta per word present in `prior`, target versus rest.
std::map<std::string, double> log_odds(const CommunityLexicon& target, const CommunityLexicon& rest,
                                       const WordCounts& prior,
                                       DenominatorForm form = DenominatorForm::AsPrinted);

struct ScoredWord {
    std::string word;
    double delta = 0.0;
    std::int64_t count = 0;  // in the target community
};

/// Words used by the target, by delta descending then word ascending.
std::vector<ScoredWord> top_words(const CommunityLexicon& target, const std::map<std::string, double>& delta,
                                  std::size_t limit);

}  // namespace newsky::analytics
