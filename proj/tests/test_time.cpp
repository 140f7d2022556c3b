#include <doctest.h>

#include "lifelog/errors.hpp"
#include "lifelog/time.hpp"

using namespace lifelog;

TEST_SUITE("time") {
    TEST_CASE("timestamps order lexicographically by (day, ms)") {
        CHECK(Timestamp{1, 0} < Timestamp{1, 1});
        CHECK(Timestamp{1, 86'399'999} < Timestamp{2, 0});
        CHECK(Timestamp{3, 500} == Timestamp{3, 500});
    }

    TEST_CASE("difference is a signed duration in milliseconds") {
        const Timestamp a{1, 0};
        const Timestamp b{2, 1500};
        CHECK(b - a == kMsPerDay + 1500);
        CHECK(a - b == -(kMsPerDay + 1500));
        // a year of days stays well inside int64
        const Timestamp far{365, 86'399'999};
        CHECK(far - a == 364LL * kMsPerDay + 86'399'999);
    }

    TEST_CASE("plus_ms normalizes across day boundaries") {
        const Timestamp t{1, 86'399'000};
        const Timestamp u = t.plus_ms(2'000);
        CHECK(u.day == 2);
        CHECK(u.msec_of_day == 1'000);
        const Timestamp back = u.plus_ms(-2'000);
        CHECK(back == t);
    }

    TEST_CASE("validity bounds") {
        CHECK(Timestamp{1, 0}.valid());
        CHECK_FALSE(Timestamp{0, 0}.valid());
        CHECK_FALSE(Timestamp{1, -1}.valid());
        CHECK_FALSE(Timestamp{1, static_cast<int32_t>(kMsPerDay)}.valid());
    }

    TEST_CASE("range overlap is half-open") {
        const TimeRange a{{1, 0}, {1, 30'000}};
        const TimeRange b{{1, 30'000}, {1, 60'000}};
        const TimeRange c{{1, 15'000}, {1, 45'000}};
        CHECK_FALSE(a.overlaps(b));  // touching ranges do not overlap
        CHECK(a.overlaps(c));
        CHECK(c.overlaps(b));
        CHECK(a.contains(Timestamp{1, 0}));
        CHECK_FALSE(a.contains(Timestamp{1, 30'000}));
    }

    TEST_CASE("CLI timestamp parsing") {
        const Timestamp t = Timestamp::parse("3:14:05:09");
        CHECK(t.day == 3);
        CHECK(t.msec_of_day == 14 * kMsPerHour + 5 * kMsPerMinute + 9 * kMsPerSecond);
        const Timestamp u = Timestamp::parse("1:00:00:00.250");
        CHECK(u.msec_of_day == 250);
        CHECK_THROWS_AS(Timestamp::parse("14:05:09"), ConfigError);
        CHECK_THROWS_AS(Timestamp::parse("0:00:00:00"), ConfigError);
        CHECK_THROWS_AS(Timestamp::parse("1:24:00:00"), ConfigError);
        CHECK_THROWS_AS(Timestamp::parse("1:10:00:00 trailing"), ConfigError);
    }

    TEST_CASE("SRT timecodes round-trip exactly") {
        CHECK(format_srt_timecode(466) == "00:00:00,466");
        CHECK(parse_srt_timecode("00:00:00,466", 1) == 466);
        CHECK(parse_srt_timecode("23:59:59,999", 1) == kMsPerDay - 1);
        for (int64_t ms : {0LL, 1LL, 999LL, 1000LL, 3'599'999LL, 43'200'123LL}) {
            CHECK(parse_srt_timecode(format_srt_timecode(ms), 1) == ms);
        }
        CHECK_THROWS_AS(parse_srt_timecode("00:00:00.466", 7), FormatError);
        CHECK_THROWS_AS(parse_srt_timecode("0:00:00,466", 7), FormatError);
        CHECK_THROWS_AS(parse_srt_timecode("24:00:00,000", 7), FormatError);
        try {
            parse_srt_timecode("bad", 42);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.line == 42);
        }
    }
}
