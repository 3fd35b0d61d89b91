#include "newsky/analytics/distribution.hpp"

#include <algorithm>
#include <array>

namespace newsky::analytics {

using ratings::Orientation;
using ratings::Reliability;

OrientationDistribution orientation_distribution(const DomainCounts& counts, const ratings::RatingTable& table,
                                                 std::optional<std::string_view> lang) {
    constexpr std::array<Orientation, 5> kKnown = {Orientation::Left, Orientation::LeanLeft, Orientation::Center,
                                                   Orientation::LeanRight, Orientation::Right};
    std::array<std::array<std::int64_t, 5>, 2> tally{};
    std::array<std::int64_t, 2> unknown{};
    for (const auto& [domain, links] : counts) {
        const auto rating = table.classify(domain);
        if (rating.reliability == Reliability::Unrated) continue;
        if (lang && rating.lang != std::optional<std::string>(std::string(*lang))) continue;
        const std::size_t row = rating.reliability == Reliability::Reliable ? 0 : 1;
        if (rating.orientation == Orientation::Unknown) {
            unknown[row] += links;
        } else {
            tally[row][static_cast<std::size_t>(rating.orientation)] += links;
        }
    }

    OrientationDistribution out;
    for (std::size_t row = 0; row < 2; ++row) {
        OrientationRow r;
        r.reliability = row == 0 ? Reliability::Reliable : Reliability::Unreliable;
        r.unknown = unknown[row];
        for (const auto n : tally[row]) r.links += n;
        for (std::size_t i = 0; i < kKnown.size(); ++i) {
            if (tally[row][i] == 0) continue;
            r.shares.push_back({kKnown[i], tally[row][i],
                                100.0 * static_cast<double>(tally[row][i]) / static_cast<double>(r.links)});
        }
        out.rows.push_back(std::move(r));
    }
    return out;
}

std::optional<RankClass> parse_rank_class(std::string_view text) {
    if (text == "reliable") return RankClass::Reliable;
    if (text == "unreliable") return RankClass::Unreliable;
    if (text == "all") return RankClass::All;
    return std::nullopt;
}

std::string_view to_string(RankClass c) {
    switch (c) {
        case RankClass::Reliable:
            return "reliable";
        case RankClass::Unreliable:
            return "unreliable";
        case RankClass::All:
            return "all";
    }
    return "all";
}

std::vector<RankFrequencyEntry> rank_domains(const DomainCounts& counts, std::optional<std::size_t> limit) {
    std::vector<RankFrequencyEntry> out;
    for (const auto& [domain, n] : counts) {
        if (n > 0) out.push_back({domain, n, 0});
    }
    std::sort(out.begin(), out.end(), [](const RankFrequencyEntry& a, const RankFrequencyEntry& b) {
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        return a.domain < b.domain;
    });
    if (limit && out.size() > *limit) out.resize(*limit);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
    return out;
}

std::vector<RankFrequencyEntry> rank_frequency(const DomainCounts& counts, const ratings::RatingTable& table,
                                               RankClass cls, std::optional<std::size_t> limit) {
    DomainCounts selected;
    for (const auto& [domain, n] : counts) {
        const auto r = table.classify(domain).reliability;
        const bool keep = r != Reliability::Unrated &&
                          (cls == RankClass::All || (cls == RankClass::Reliable) == (r == Reliability::Reliable));
        if (keep) selected[domain] += n;
    }
    return rank_domains(selected, limit);
}

}  // namespace newsky::analytics
