#include "lifelog/srt.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>

#include "lifelog/errors.hpp"

namespace lifelog {
namespace {

constexpr std::string_view kActionLabel = "Action: ";
constexpr std::string_view kInstanceLabel = "Interactive instance: ";
constexpr std::string_view kMergedLabel = "Merged caption: ";
constexpr std::string_view kVisualAudioLabel = "Visual-audio caption: ";

struct Line {
    std::string text;
    size_t number;  // 1-based
};

std::vector<Line> split_lines(const std::string& text) {
    std::vector<Line> lines;
    size_t start = 0, number = 1;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            if (start < text.size()) lines.push_back({text.substr(start), number});
            break;
        }
        std::string line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back({std::move(line), number});
        start = nl + 1;
        ++number;
    }
    return lines;
}

bool starts_with(const std::string& line, std::string_view label) {
    return line.size() >= label.size() && line.compare(0, label.size(), label) == 0;
}

}  // namespace

std::vector<SrtBlock> parse_srt(const std::string& text) {
    const std::vector<Line> lines = split_lines(text);
    std::vector<SrtBlock> blocks;
    size_t i = 0;

    while (i < lines.size()) {
        if (lines[i].text.empty()) {
            ++i;
            continue;
        }

        // Index line.
        const Line& index_line = lines[i];
        int index = 0;
        auto [ptr, ec] = std::from_chars(index_line.text.data(),
                                         index_line.text.data() + index_line.text.size(), index);
        if (ec != std::errc() || ptr != index_line.text.data() + index_line.text.size() ||
            index <= 0) {
            throw FormatError("expected block index, got '" + index_line.text + "'",
                              index_line.number);
        }
        if (!blocks.empty() && index <= blocks.back().index) {
            throw FormatError("block index " + std::to_string(index) +
                                  " does not increase past " + std::to_string(blocks.back().index),
                              index_line.number);
        }
        ++i;

        // Timecode line.
        if (i >= lines.size()) {
            throw FormatError("block " + std::to_string(index) + " truncated before timecode",
                              index_line.number);
        }
        const Line& tc_line = lines[i];
        const std::string& tc = tc_line.text;
        const std::string arrow = " --> ";
        const size_t arrow_pos = tc.find(arrow);
        if (arrow_pos == std::string::npos) {
            throw FormatError("block " + std::to_string(index) + ": expected timecode, got '" +
                                  tc + "'",
                              tc_line.number);
        }
        SrtBlock block;
        block.index = index;
        const int64_t start_ms = parse_srt_timecode(tc.substr(0, arrow_pos), tc_line.number);
        const int64_t end_ms = parse_srt_timecode(tc.substr(arrow_pos + arrow.size()),
                                                  tc_line.number);
        if (end_ms <= start_ms) {
            throw FormatError("block " + std::to_string(index) + ": end not after start",
                              tc_line.number);
        }
        block.range = {Timestamp{1, static_cast<int32_t>(start_ms)},
                       Timestamp{1, static_cast<int32_t>(end_ms)}};
        if (!blocks.empty() && blocks.back().range.end > block.range.start) {
            throw OverlapError("block " + std::to_string(index) + " overlaps block " +
                               std::to_string(blocks.back().index) + " in time");
        }
        ++i;

        // Field lines until the blank separator.
        bool have_action = false, have_instance = false, have_merged = false;
        for (; i < lines.size() && !lines[i].text.empty(); ++i) {
            const std::string& line = lines[i].text;
            if (starts_with(line, kActionLabel) && !have_action) {
                block.action = line.substr(kActionLabel.size());
                have_action = true;
            } else if (starts_with(line, kInstanceLabel) && !have_instance) {
                block.interactive_instance = line.substr(kInstanceLabel.size());
                have_instance = true;
            } else if (starts_with(line, kMergedLabel) && !have_merged) {
                block.merged_caption = line.substr(kMergedLabel.size());
                have_merged = true;
            } else if (starts_with(line, kVisualAudioLabel) && !block.visual_audio_caption) {
                block.visual_audio_caption = line.substr(kVisualAudioLabel.size());
            } else {
                block.extras.push_back(line);
            }
        }
        if (!have_action || !have_instance || !have_merged) {
            throw FormatError("block " + std::to_string(index) + " missing required label(s)",
                              index_line.number);
        }
        blocks.push_back(std::move(block));
    }
    return blocks;
}

std::string serialize_srt(std::span<const SrtBlock> blocks) {
    std::string out;
    for (size_t b = 0; b < blocks.size(); ++b) {
        const SrtBlock& block = blocks[b];
        if (b) out += '\n';
        out += std::to_string(block.index);
        out += '\n';
        out += format_srt_timecode(block.range.start.msec_of_day);
        out += " --> ";
        out += format_srt_timecode(block.range.end.msec_of_day);
        out += '\n';
        out += std::string(kActionLabel) + block.action + "\n";
        out += std::string(kInstanceLabel) + block.interactive_instance + "\n";
        out += std::string(kMergedLabel) + block.merged_caption + "\n";
        if (block.visual_audio_caption) {
            out += std::string(kVisualAudioLabel) + *block.visual_audio_caption + "\n";
        }
        for (const std::string& extra : block.extras) {
            out += extra;
            out += '\n';
        }
    }
    return out;
}

std::vector<ClipEntry> srt_to_clips(std::span<const SrtBlock> blocks,
                                    const std::string& participant, int32_t day,
                                    int clip_seconds) {
    if (clip_seconds < 1) throw Error("srt_to_clips: clip_seconds must be positive");
    const int64_t clip_ms = static_cast<int64_t>(clip_seconds) * kMsPerSecond;

    // window index -> captions in block order (blocks are chronological)
    std::map<int64_t, std::vector<const SrtBlock*>> windows;
    for (const SrtBlock& block : blocks) {
        const int64_t first = block.range.start.to_ms() / clip_ms;
        const int64_t last = (block.range.end.to_ms() - 1) / clip_ms;
        for (int64_t w = first; w <= last; ++w) windows[w].push_back(&block);
    }

    std::vector<ClipEntry> clips;
    clips.reserve(windows.size());
    for (const auto& [w, block_ptrs] : windows) {
        ClipEntry clip;
        char suffix[24];
        std::snprintf(suffix, sizeof(suffix), "-d%d-s%05lld", day, static_cast<long long>(w));
        clip.clip_id = participant + suffix;
        clip.participant = participant;
        const int64_t start = w * clip_ms;
        const int64_t end = std::min((w + 1) * clip_ms, kMsPerDay);
        clip.range.start = Timestamp{day, static_cast<int32_t>(start)};
        clip.range.end = end == kMsPerDay ? Timestamp{day + 1, 0}
                                          : Timestamp{day, static_cast<int32_t>(end)};
        std::string caption;
        for (const SrtBlock* block : block_ptrs) {
            if (!caption.empty()) caption += ' ';
            caption += block->visual_audio_caption ? *block->visual_audio_caption
                                                   : block->merged_caption;
        }
        clip.caption_text = std::move(caption);
        clip.source = ClipSource::human_annotation;
        clips.push_back(std::move(clip));
    }
    return clips;
}

}  // namespace lifelog
