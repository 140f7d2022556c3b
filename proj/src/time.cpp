#include "lifelog/time.hpp"

#include <cctype>
#include <cstdio>

#include "lifelog/errors.hpp"

namespace lifelog {

std::string Timestamp::to_string() const {
    const int32_t ms = msec_of_day;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "d%d %02d:%02d:%02d.%03d", day,
                  static_cast<int>(ms / kMsPerHour),
                  static_cast<int>(ms % kMsPerHour / kMsPerMinute),
                  static_cast<int>(ms % kMsPerMinute / kMsPerSecond),
                  static_cast<int>(ms % kMsPerSecond));
    return buf;
}

Timestamp Timestamp::parse(const std::string& text) {
    int day = 0, h = 0, m = 0, s = 0, ms = 0;
    int consumed = 0;
    int n = std::sscanf(text.c_str(), "%d:%d:%d:%d.%d%n", &day, &h, &m, &s, &ms, &consumed);
    if (n < 4) {
        throw ConfigError("bad timestamp '" + text + "', expected DAY:HH:MM:SS[.mmm]");
    }
    if (n == 4) {
        std::sscanf(text.c_str(), "%d:%d:%d:%d%n", &day, &h, &m, &s, &consumed);
    }
    if (consumed != static_cast<int>(text.size()) || day < 1 || h < 0 || h > 23 ||
        m < 0 || m > 59 || s < 0 || s > 59 || ms < 0 || ms > 999) {
        throw ConfigError("bad timestamp '" + text + "', expected DAY:HH:MM:SS[.mmm]");
    }
    Timestamp t;
    t.day = day;
    t.msec_of_day = static_cast<int32_t>(h * kMsPerHour + m * kMsPerMinute +
                                         s * kMsPerSecond + ms);
    return t;
}

std::string TimeRange::to_string() const {
    return start.to_string() + " -> " + end.to_string();
}

std::string format_srt_timecode(int64_t ms) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d,%03d",
                  static_cast<int>(ms / kMsPerHour),
                  static_cast<int>(ms % kMsPerHour / kMsPerMinute),
                  static_cast<int>(ms % kMsPerMinute / kMsPerSecond),
                  static_cast<int>(ms % kMsPerSecond));
    return buf;
}

int64_t parse_srt_timecode(const std::string& text, size_t line_no) {
    // HH:MM:SS,mmm with fixed widths.
    if (text.size() != 12 || text[2] != ':' || text[5] != ':' || text[8] != ',') {
        throw FormatError("bad timecode '" + text + "'", line_no);
    }
    for (size_t i : {0u, 1u, 3u, 4u, 6u, 7u, 9u, 10u, 11u}) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            throw FormatError("bad timecode '" + text + "'", line_no);
        }
    }
    auto num = [&](size_t pos, size_t len) {
        int v = 0;
        for (size_t i = pos; i < pos + len; ++i) v = v * 10 + (text[i] - '0');
        return v;
    };
    const int h = num(0, 2), m = num(3, 2), s = num(6, 2), ms = num(9, 3);
    if (h > 23 || m > 59 || s > 59) {
        throw FormatError("timecode out of range '" + text + "'", line_no);
    }
    return h * kMsPerHour + m * kMsPerMinute + s * kMsPerSecond + ms;
}

}  // namespace lifelog
