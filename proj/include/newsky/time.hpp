#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace newsky {

// All timestamps are UTC with seconds precision.
using Timestamp = std::chrono::sys_seconds;

enum class Granularity { Hour, Day };

inline constexpr std::int64_t seconds_per(Granularity g) {
    return g == Granularity::Hour ? 3600 : 86400;
}

inline std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_unix(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

/// Floor `t` to the start of its UTC hour or day.
Timestamp align_down(Timestamp t, Granularity g);

/// Parses RFC 3339 date-times ("2024-06-14T12:00:00Z", "...+02:00",
/// fractional seconds truncated). Returns nullopt on malformed input.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Timestamp t);

std::optional<Granularity> parse_granularity(std::string_view text);
std::string_view to_string(Granularity g);

Timestamp now_utc();

}  // namespace newsky
