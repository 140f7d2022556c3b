#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lifelog/memory_bank.hpp"
#include "lifelog/time.hpp"

namespace lifelog {

/// One annotation block. The timecodes are file-relative (stored on day 1);
/// the recording day is applied when blocks are converted to clips.
struct SrtBlock {
    int index = 0;  // positive, strictly increasing across the file
    TimeRange range;
    std::string action;
    std::string interactive_instance;
    std::string merged_caption;
    std::optional<std::string> visual_audio_caption;
    std::vector<std::string> extras;  // unrecognized in-block lines, verbatim

    bool operator==(const SrtBlock&) const = default;
};

/// Parses the annotation SRT layout:
///
///   1
///   00:00:00,466 --> 00:00:08,800
///   Action: ...
///   Interactive instance: ...
///   Merged caption: ...
///   Visual-audio caption: ...     (optional)
///
/// CRLF and LF both accepted. Blocks must be strictly increasing by index
/// and chronologically non-overlapping. Throws FormatError (with line
/// number) on structural problems and OverlapError on overlapping blocks.
std::vector<SrtBlock> parse_srt(const std::string& text);

/// Canonical serialization: LF line ends, fields in the order above,
/// extras after the known fields, one blank line between blocks.
/// serialize_srt(parse_srt(x)) == x for well-formed (canonical) input.
std::string serialize_srt(std::span<const SrtBlock> blocks);

/// Re-chunks annotation blocks onto the fixed clip grid for `day`. Each
/// clip's caption concatenates the visual-audio caption (falling back to
/// the merged caption) of every block overlapping the window, in time
/// order; windows without blocks are skipped. A block straddling a window
/// boundary contributes its caption to both windows.
std::vector<ClipEntry> srt_to_clips(std::span<const SrtBlock> blocks,
                                    const std::string& participant, int32_t day,
                                    int clip_seconds = 30);

}  // namespace lifelog
