#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lifelog/time.hpp"

namespace lifelog {

/// Evidence must precede the question by at least this much.
inline constexpr int64_t kMinLookbackMs = 5 * kMsPerMinute;

enum class QaType { EntityLog, EventRecall, HabitInsight, RelationMap, TaskMaster };

inline constexpr QaType kAllQaTypes[] = {QaType::EntityLog, QaType::EventRecall,
                                         QaType::HabitInsight, QaType::RelationMap,
                                         QaType::TaskMaster};

std::string to_string(QaType type);
QaType qa_type_from_string(const std::string& text);

struct QaItem {
    std::string qa_id;
    std::string participant;
    std::string question;
    std::array<std::string, 4> choices;
    int answer_index = 0;  // 0..3
    QaType qa_type = QaType::EntityLog;
    Timestamp asked_at;
    std::vector<Timestamp> evidence_at;  // each >= 5 min before asked_at
    int64_t certificate_ms = 0;          // asked_at - min(evidence_at)
    bool needs_audio = false;

    bool operator==(const QaItem&) const = default;
};

/// Why an item fails validation; doubles as the filter-drop reason.
enum class QaDefect { none, schema, malformed_evidence, lookback_too_short, certificate_mismatch };

std::string to_string(QaDefect defect);

/// Full invariant check (structure first, then evidence timing).
QaDefect validate_qa_item(const QaItem& item);

struct QaLoadIssue {
    std::string pointer;  // JSON pointer to the offending field or item
    std::string message;
};

struct QaLoadResult {
    std::vector<QaItem> items;       // the valid items, file order
    std::vector<QaLoadIssue> issues; // one per rejected item/field
};

/// Loads the QA JSON array. Items violating any invariant are skipped and
/// reported in `issues` with a JSON pointer; a file that is not a JSON
/// array at all raises SchemaError.
QaLoadResult load_qa(const std::string& path);
QaLoadResult parse_qa(const std::string& text);

/// Canonical serialization of a QA set (one JSON array, 2-space indent).
std::string serialize_qa(std::span<const QaItem> items);

struct FilterReport {
    size_t kept = 0;
    size_t dropped_lookback = 0;
    size_t dropped_certificate = 0;
    size_t dropped_evidence = 0;
};

/// Drops items violating the five-minute look-back rule or carrying
/// malformed/mistimed evidence. Structural defects cannot occur on items
/// built through load_qa.
std::vector<QaItem> filter_candidates(std::span<const QaItem> items,
                                      FilterReport* report = nullptr);

}  // namespace lifelog
