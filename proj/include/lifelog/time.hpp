#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace lifelog {

inline constexpr int64_t kMsPerSecond = 1000;
inline constexpr int64_t kMsPerMinute = 60 * kMsPerSecond;
inline constexpr int64_t kMsPerHour = 60 * kMsPerMinute;
inline constexpr int64_t kMsPerDay = 24 * kMsPerHour;

/// A point on the recording timeline: 1-based day index plus milliseconds
/// since that day's midnight. Ordered lexicographically by (day, ms).
struct Timestamp {
    int32_t day = 1;
    int32_t msec_of_day = 0;

    auto operator<=>(const Timestamp&) const = default;

    bool valid() const {
        return day >= 1 && msec_of_day >= 0 && msec_of_day < kMsPerDay;
    }

    /// Milliseconds since day 1, 00:00. Safe for > 10^5 days in int64.
    int64_t to_ms() const {
        return static_cast<int64_t>(day - 1) * kMsPerDay + msec_of_day;
    }

    static Timestamp from_ms(int64_t abs_ms) {
        Timestamp t;
        t.day = static_cast<int32_t>(abs_ms / kMsPerDay) + 1;
        t.msec_of_day = static_cast<int32_t>(abs_ms % kMsPerDay);
        if (t.msec_of_day < 0) {  // abs_ms < 0 is out of domain; keep it ordered anyway
            t.msec_of_day += kMsPerDay;
            t.day -= 1;
        }
        return t;
    }

    Timestamp plus_ms(int64_t delta) const { return from_ms(to_ms() + delta); }

    int hour_of_day() const { return static_cast<int>(msec_of_day / kMsPerHour); }

    /// "d3 14:05:00.250"
    std::string to_string() const;

    /// Parses the CLI form "DAY:HH:MM:SS" or "DAY:HH:MM:SS.mmm".
    static Timestamp parse(const std::string& text);
};

/// Signed duration between two timestamps, in milliseconds.
inline int64_t operator-(const Timestamp& a, const Timestamp& b) {
    return a.to_ms() - b.to_ms();
}

/// Half-open interval [start, end) on the timeline.
struct TimeRange {
    Timestamp start;
    Timestamp end;

    auto operator<=>(const TimeRange&) const = default;

    bool valid() const { return start.valid() && end.valid() && start < end; }
    int64_t duration_ms() const { return end - start; }
    bool contains(const Timestamp& t) const { return start <= t && t < end; }
    bool overlaps(const TimeRange& o) const { return start < o.end && o.start < end; }

    /// Smallest range covering both. Either side may be empty-initialized.
    static TimeRange hull(const TimeRange& a, const TimeRange& b) {
        return {a.start < b.start ? a.start : b.start, a.end > b.end ? a.end : b.end};
    }

    std::string to_string() const;
};

/// "HH:MM:SS,mmm" (SRT timecode, comma decimal separator).
std::string format_srt_timecode(int64_t msec_of_day);

/// Strict parse of "HH:MM:SS,mmm". Throws FormatError on any deviation.
int64_t parse_srt_timecode(const std::string& text, size_t line_no);

}  // namespace lifelog
