#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lifelog/time.hpp"

namespace lifelog {

enum class ClipSource { model_caption, human_annotation, synthetic };

std::string to_string(ClipSource source);
ClipSource clip_source_from_string(const std::string& text);

/// One captioned clip: the unit of storage and retrieval.
struct ClipEntry {
    std::string clip_id;
    std::string participant;
    TimeRange range;
    std::string caption_text;
    std::optional<std::vector<double>> feature_vector;
    ClipSource source = ClipSource::model_caption;

    bool operator==(const ClipEntry&) const = default;
};

enum class SummaryLevel { hour, day };

std::string to_string(SummaryLevel level);

/// Hour- or day-level summary. An hour node's children are clip ids; a day
/// node's children are hour-node ids. `range` is the hull of the children's
/// ranges. `stale` means the window's clip set changed after the summary
/// was built (or a rebuild failed) and the text can no longer be trusted.
struct SummaryNode {
    SummaryLevel level = SummaryLevel::hour;
    std::string node_id;
    std::string participant;
    TimeRange range;
    std::string summary_text;
    std::vector<std::string> child_ids;
    bool stale = false;

    bool operator==(const SummaryNode&) const = default;
};

struct BankConfig {
    int clip_seconds = 30;
    std::optional<size_t> feature_dim;
    int hour_window_minutes = 60;

    bool operator==(const BankConfig&) const = default;

    void validate() const;
    int64_t window_ms() const { return static_cast<int64_t>(hour_window_minutes) * kMsPerMinute; }
};

/// Identifies one summary window: an hour slot of a participant-day, or the
/// whole participant-day when slot < 0.
struct WindowKey {
    std::string participant;
    int32_t day = 1;
    int32_t slot = -1;

    auto operator<=>(const WindowKey&) const = default;

    bool is_day() const { return slot < 0; }
    std::string node_id() const;
    /// Wall-clock extent of the window (full slot / full day, not the hull).
    TimeRange wall_range(const BankConfig& cfg) const;
};

/// Produces a summary of `texts` (captions for hour level, hour summaries
/// for day level), in chronological order.
using Summarizer =
    std::function<std::string(const std::vector<std::string>& texts, SummaryLevel level)>;

/// Append-ordered clip store plus the two-level summary index.
///
/// Concurrency contract: single writer, any number of readers. Mutating
/// members require exclusive access; a copy is an independent snapshot.
class MemoryBank {
public:
    MemoryBank() : MemoryBank(BankConfig{}) {}
    explicit MemoryBank(BankConfig cfg);

    // -- ingestion ---------------------------------------------------------

    /// Inserts the clip in sorted position and marks the covering summary
    /// windows stale. Throws OverlapError when the range overlaps an
    /// existing clip of the same participant, DimensionError when the
    /// feature vector does not match the bank dimension, Error on other
    /// invariant violations (empty caption, invalid range, duplicate id).
    void add_clip(ClipEntry entry);

    /// Rebuilds every stale hour window with `summarize`, then every
    /// affected day node. Successful windows are kept even when others
    /// fail; after a partial failure a GeneratorError naming the failed
    /// windows is thrown and those windows stay stale.
    void rebuild_summaries(const Summarizer& summarize);

    // -- persistence -------------------------------------------------------

    /// Line-delimited JSON records: config first, then clips, hour nodes,
    /// day nodes. UTF-8, LF-terminated.
    void persist(const std::string& path) const;
    std::string serialize() const;

    static MemoryBank load(const std::string& path);
    static MemoryBank parse(const std::string& text);

    // -- queries -----------------------------------------------------------

    size_t size() const { return clips_.size(); }
    bool empty() const { return clips_.empty(); }
    std::span<const ClipEntry> clips() const { return clips_; }
    const BankConfig& config() const { return config_; }
    const std::vector<std::string>& participants() const { return participants_; }

    const ClipEntry* find_clip(const std::string& clip_id) const;

    /// Clips of any participant whose range overlaps `range`, in bank order.
    std::vector<const ClipEntry*> clips_overlapping(const TimeRange& range) const;

    const std::map<std::string, SummaryNode>& hour_nodes() const { return hour_index_; }
    const std::map<std::string, SummaryNode>& day_nodes() const { return day_index_; }
    const SummaryNode* find_node(const std::string& node_id) const;

    /// Hour windows awaiting (re)summarization, in deterministic order.
    std::vector<WindowKey> stale_windows() const;
    bool has_stale() const;
    /// True when some stale hour window starts before `t` (those windows
    /// would silently drop evidence from a causal search).
    bool has_stale_before(const Timestamp& t) const;

    /// Monotone token that changes on every mutation; used as a cache key.
    uint64_t revision() const { return revision_; }

    /// Structural equality: clips, indices, config. Ignores revision.
    bool operator==(const MemoryBank& other) const;

private:
    void mark_covering_windows_stale(const ClipEntry& entry);
    std::vector<WindowKey> hour_windows_of(const TimeRange& range) const;
    std::vector<const ClipEntry*> clips_in_window(const WindowKey& key) const;
    void note_participant(const std::string& participant);
    void bump_revision();

    BankConfig config_;
    std::vector<ClipEntry> clips_;  // sorted by (participant, range.start)
    std::map<std::string, SummaryNode> hour_index_;
    std::map<std::string, SummaryNode> day_index_;
    // Stale window keys by node id; kept in sync with the nodes' stale
    // flags, plus clip-bearing windows that have no node yet.
    std::map<std::string, WindowKey> stale_hours_;
    std::map<std::string, WindowKey> stale_days_;
    std::vector<std::string> participants_;  // sorted unique
    int64_t max_clip_ms_ = 0;

    mutable std::unordered_map<std::string, size_t> id_index_;
    mutable bool id_index_dirty_ = true;

    uint64_t revision_ = 0;
};

}  // namespace lifelog
