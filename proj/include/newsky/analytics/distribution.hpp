#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsky/ratings/ratings.hpp"

namespace newsky::analytics {

using DomainCounts = std::map<std::string, std::int64_t>;

struct OrientationShare {
    ratings::Orientation orientation = ratings::Orientation::Unknown;
    std::int64_t links = 0;
    double percent = 0.0;
};

struct OrientationRow {
    ratings::Reliability reliability = ratings::Reliability::Reliable;
    std::int64_t links = 0;    // links with a known orientation; the percentage base
    std::int64_t unknown = 0;  // links whose source has no orientation
    std::vector<OrientationShare> shares;  // known orientations with links > 0, in enum order
};

// One row per rated class (reliable, then unreliable).
struct OrientationDistribution {
    std::vector<OrientationRow> rows;
};

/// `lang` keeps only sources whose rating declares that language.
OrientationDistribution orientation_distribution(const DomainCounts& counts, const ratings::RatingTable& table,
                                                 std::optional<std::string_view> lang = std::nullopt);

enum class RankClass { Reliable, Unreliable, All };
std::optional<RankClass> parse_rank_class(std::string_view text);
std::string_view to_string(RankClass c);

struct RankFrequencyEntry {
    std::string domain;
    std::int64_t frequency = 0;
    std::size_t rank = 0;  // 1-based

    bool operator==(const RankFrequencyEntry&) const = default;
};

/// Rated domains of the class by descending frequency, ties by domain.
/// RankClass::All covers reliable and unreliable sources.
std::vector<RankFrequencyEntry> rank_frequency(const DomainCounts& counts, const ratings::RatingTable& table,
                                               RankClass cls, std::optional<std::size_t> limit = std::nullopt);

/// Ranking without a class filter.
std::vector<RankFrequencyEntry> rank_domains(const DomainCounts& counts,
                                             std::optional<std::size_t> limit = std::nullopt);

}  // namespace newsky::analytics
