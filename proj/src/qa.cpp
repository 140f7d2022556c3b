#include "lifelog/qa.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lifelog/errors.hpp"

namespace lifelog {

using nlohmann::json;

std::string to_string(QaType type) {
    switch (type) {
        case QaType::EntityLog: return "EntityLog";
        case QaType::EventRecall: return "EventRecall";
        case QaType::HabitInsight: return "HabitInsight";
        case QaType::RelationMap: return "RelationMap";
        case QaType::TaskMaster: return "TaskMaster";
    }
    return "EntityLog";
}

QaType qa_type_from_string(const std::string& text) {
    for (QaType t : kAllQaTypes) {
        if (to_string(t) == text) return t;
    }
    throw Error("unknown qa_type '" + text + "'");
}

std::string to_string(QaDefect defect) {
    switch (defect) {
        case QaDefect::none: return "none";
        case QaDefect::schema: return "schema";
        case QaDefect::malformed_evidence: return "malformed_evidence";
        case QaDefect::lookback_too_short: return "lookback_too_short";
        case QaDefect::certificate_mismatch: return "certificate_mismatch";
    }
    return "schema";
}

QaDefect validate_qa_item(const QaItem& item) {
    if (item.qa_id.empty() || item.participant.empty() || item.question.empty()) {
        return QaDefect::schema;
    }
    if (item.answer_index < 0 || item.answer_index > 3) return QaDefect::schema;
    for (const std::string& choice : item.choices) {
        if (choice.empty()) return QaDefect::schema;
    }
    // Exactly one correct choice: no distractor may repeat the answer text.
    for (int i = 0; i < 4; ++i) {
        if (i != item.answer_index && item.choices[i] == item.choices[item.answer_index]) {
            return QaDefect::schema;
        }
    }
    if (!item.asked_at.valid()) return QaDefect::schema;

    if (item.evidence_at.empty()) return QaDefect::malformed_evidence;
    for (const Timestamp& t : item.evidence_at) {
        if (!t.valid() || t > item.asked_at) return QaDefect::malformed_evidence;
    }
    const Timestamp latest = *std::max_element(item.evidence_at.begin(), item.evidence_at.end());
    if (item.asked_at - latest < kMinLookbackMs) return QaDefect::lookback_too_short;
    const Timestamp earliest = *std::min_element(item.evidence_at.begin(), item.evidence_at.end());
    if (item.certificate_ms != item.asked_at - earliest) return QaDefect::certificate_mismatch;
    return QaDefect::none;
}

namespace {

std::string item_pointer(size_t index, const std::string& field = {}) {
    std::string ptr = "/" + std::to_string(index);
    if (!field.empty()) ptr += "/" + field;
    return ptr;
}

QaItem item_from_json(const json& obj, size_t index, std::string* bad_field) {
    auto fail = [&](const std::string& field, const std::string& why) -> QaItem {
        *bad_field = field;
        throw Error(why);
    };
    auto need = [&](const char* field) -> const json& {
        if (!obj.contains(field)) fail(field, "missing field");
        return obj[field];
    };
    auto need_string = [&](const char* field) -> std::string {
        const json& v = need(field);
        if (!v.is_string()) fail(field, "expected string");
        return v.get<std::string>();
    };
    auto need_int = [&](const char* field) -> int64_t {
        const json& v = need(field);
        if (!v.is_number_integer()) fail(field, "expected integer");
        return v.get<int64_t>();
    };

    QaItem item;
    item.qa_id = need_string("qa_id");
    item.participant = need_string("participant");
    item.question = need_string("question");

    const json& choices = need("choices");
    if (!choices.is_array() || choices.size() != 4) fail("choices", "expected array of 4 strings");
    for (size_t i = 0; i < 4; ++i) {
        if (!choices[i].is_string()) fail("choices", "expected array of 4 strings");
        item.choices[i] = choices[i].get<std::string>();
    }

    item.answer_index = static_cast<int>(need_int("answer_index"));
    try {
        item.qa_type = qa_type_from_string(need_string("qa_type"));
    } catch (const Error&) {
        fail("qa_type", "unknown qa_type");
    }
    item.asked_at = Timestamp{static_cast<int32_t>(need_int("asked_day")),
                              static_cast<int32_t>(need_int("asked_ms"))};

    const json& evidence = need("evidence");
    if (!evidence.is_array()) fail("evidence", "expected array of {day, ms}");
    for (const json& e : evidence) {
        if (!e.is_object() || !e.contains("day") || !e.contains("ms") ||
            !e["day"].is_number_integer() || !e["ms"].is_number_integer()) {
            fail("evidence", "expected array of {day, ms}");
        }
        item.evidence_at.push_back(Timestamp{e["day"].get<int32_t>(), e["ms"].get<int32_t>()});
    }

    item.certificate_ms = need_int("certificate_ms");
    const json& audio = need("needs_audio");
    if (!audio.is_boolean()) fail("needs_audio", "expected boolean");
    item.needs_audio = audio.get<bool>();

    if (obj.contains("schema_version") && !obj["schema_version"].is_number_integer()) {
        fail("schema_version", "expected integer");
    }
    (void)index;
    return item;
}

}  // namespace

QaLoadResult parse_qa(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("QA file is not valid JSON: ") + e.what(), "");
    }
    if (!doc.is_array()) throw SchemaError("QA file must be a JSON array", "");

    QaLoadResult result;
    for (size_t i = 0; i < doc.size(); ++i) {
        if (!doc[i].is_object()) {
            result.issues.push_back({item_pointer(i), "item is not a JSON object"});
            continue;
        }
        QaItem item;
        std::string bad_field;
        try {
            item = item_from_json(doc[i], i, &bad_field);
        } catch (const Error& e) {
            result.issues.push_back({item_pointer(i, bad_field), e.what()});
            continue;
        }
        const QaDefect defect = validate_qa_item(item);
        if (defect != QaDefect::none) {
            result.issues.push_back({item_pointer(i), "invariant violation: " + to_string(defect)});
            continue;
        }
        result.items.push_back(std::move(item));
    }
    return result;
}

QaLoadResult load_qa(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_qa(buf.str());
}

std::string serialize_qa(std::span<const QaItem> items) {
    json doc = json::array();
    for (const QaItem& item : items) {
        json evidence = json::array();
        for (const Timestamp& t : item.evidence_at) {
            evidence.push_back({{"day", t.day}, {"ms", t.msec_of_day}});
        }
        doc.push_back({{"schema_version", 1},
                       {"qa_id", item.qa_id},
                       {"participant", item.participant},
                       {"question", item.question},
                       {"choices", item.choices},
                       {"answer_index", item.answer_index},
                       {"qa_type", to_string(item.qa_type)},
                       {"asked_day", item.asked_at.day},
                       {"asked_ms", item.asked_at.msec_of_day},
                       {"evidence", std::move(evidence)},
                       {"certificate_ms", item.certificate_ms},
                       {"needs_audio", item.needs_audio}});
    }
    return doc.dump(2) + "\n";
}

std::vector<QaItem> filter_candidates(std::span<const QaItem> items, FilterReport* report) {
    FilterReport local;
    std::vector<QaItem> kept;
    kept.reserve(items.size());
    for (const QaItem& item : items) {
        switch (validate_qa_item(item)) {
            case QaDefect::none:
                kept.push_back(item);
                ++local.kept;
                break;
            case QaDefect::lookback_too_short:
                ++local.dropped_lookback;
                break;
            case QaDefect::certificate_mismatch:
                ++local.dropped_certificate;
                break;
            case QaDefect::schema:
            case QaDefect::malformed_evidence:
                ++local.dropped_evidence;
                break;
        }
    }
    if (report) *report = local;
    return kept;
}

}  // namespace lifelog
