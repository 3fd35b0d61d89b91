#include <string>
#include <unordered_map>
#include <unordered_set>

#include "newsky/analytics/lexicon.hpp"

namespace newsky::analytics {

struct StopwordList {
    const char* lang;
    const char* words;
};
extern const StopwordList kStopwordLists[];
extern const int kStopwordListCount;

namespace {

using Lists = std::unordered_map<std::string, std::unordered_set<std::string>>;

const Lists& lists() {
    static const Lists built = [] {
        Lists out;
        for (int i = 0; i < kStopwordListCount; ++i) {
            auto& set = out[kStopwordLists[i].lang];
            std::string_view words = kStopwordLists[i].words;
            while (!words.empty()) {
                const auto nl = words.find('\n');
                const auto word = words.substr(0, nl);
                if (!word.empty()) set.emplace(word);
                if (nl == std::string_view::npos) break;
                words.remove_prefix(nl + 1);
            }
        }
        return out;
    }();
    return built;
}

}  // namespace

bool is_stopword(std::string_view word, std::optional<std::string_view> lang) {
    const auto& all = lists();
    const auto it = all.find(std::string(lang.value_or("en")));
    return it != all.end() && it->second.count(std::string(word)) > 0;
}

}  // namespace newsky::analytics
