#include <doctest.h>

#include "newsky/time.hpp"

using namespace newsky;

TEST_CASE("rfc3339 parsing") {
    CHECK(to_unix(*parse_rfc3339("1970-01-01T00:00:00Z")) == 0);
    CHECK(to_unix(*parse_rfc3339("2024-06-14T12:00:00Z")) == 1718366400);
    CHECK(to_unix(*parse_rfc3339("2024-06-14T12:00:00.999Z")) == 1718366400);
    CHECK(to_unix(*parse_rfc3339("2024-06-14T14:00:00+02:00")) == 1718366400);
    CHECK(to_unix(*parse_rfc3339("2024-06-14T07:30:00-04:30")) == 1718366400);
    CHECK_FALSE(parse_rfc3339("2024-06-14"));
    CHECK_FALSE(parse_rfc3339("2024-13-01T00:00:00Z"));
    CHECK_FALSE(parse_rfc3339("2024-06-14T12:00:00"));
    CHECK_FALSE(parse_rfc3339("yesterday"));
}

TEST_CASE("format and parse round trip") {
    for (std::int64_t s : {0LL, 951782400LL, 1718366399LL, 1718409600LL, 4102444800LL}) {
        const auto t = from_unix(s);
        CHECK(*parse_rfc3339(format_rfc3339(t)) == t);
    }
    CHECK(format_rfc3339(from_unix(1718366400)) == "2024-06-14T12:00:00Z");
}

TEST_CASE("align_down") {
    const auto t = *parse_rfc3339("2024-06-14T12:34:56Z");
    CHECK(format_rfc3339(align_down(t, Granularity::Hour)) == "2024-06-14T12:00:00Z");
    CHECK(format_rfc3339(align_down(t, Granularity::Day)) == "2024-06-14T00:00:00Z");
    CHECK(align_down(align_down(t, Granularity::Hour), Granularity::Hour) == align_down(t, Granularity::Hour));
    CHECK(to_unix(align_down(from_unix(-1), Granularity::Day)) == -86400);
}

TEST_CASE("granularity names") {
    CHECK(parse_granularity("hour") == Granularity::Hour);
    CHECK(parse_granularity("day") == Granularity::Day);
    CHECK_FALSE(parse_granularity("week"));
    CHECK(to_string(Granularity::Day) == "day");
}
