#include "lifelog/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <future>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "lifelog/errors.hpp"

namespace lifelog {

using nlohmann::json;

std::string to_string(EvalMode mode) {
    return mode == EvalMode::rag ? "rag" : "segment_baseline";
}

namespace {

uint64_t fnv1a(const std::string& text) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

/// Deterministic, order-independent fallback guess for one item.
int seeded_guess(uint64_t seed, const std::string& qa_id) {
    return static_cast<int>(mix64(seed ^ fnv1a(qa_id)) % 4);
}

RetrievalResult segment_evidence(const MemoryBank& bank, const QaItem& item, int64_t segment_ms) {
    const Timestamp window_start = item.asked_at.plus_ms(-segment_ms);
    RetrievalResult result;
    result.mode = RetrievalMode::hierarchical;  // no search happened; trace says "segment"
    if (!(window_start < item.asked_at)) return result;
    const TimeRange window{window_start, item.asked_at};
    result.searched_windows.push_back({SummaryLevel::hour, window});
    for (const ClipEntry* clip : bank.clips_overlapping(window)) {
        if (clip->participant != item.participant) continue;
        // Trailing-window contract: the clip must end inside (start, asked_at].
        if (!(clip->range.end <= item.asked_at)) continue;
        if (clip->range.end - window_start < 0) continue;
        ScoredClip sc;
        sc.clip_id = clip->clip_id;
        sc.start = clip->range.start;
        result.evidence.push_back(std::move(sc));
    }
    std::sort(result.evidence.begin(), result.evidence.end(),
              [](const ScoredClip& a, const ScoredClip& b) {
                  if (a.start != b.start) return a.start < b.start;
                  return a.clip_id < b.clip_id;
              });
    return result;
}

EvalTrace evaluate_item(const MemoryBank& bank, const QaItem& item, const EvalOptions& options,
                        const SimilarityBackend& backend, GeneratorClient& client) {
    EvalTrace trace;
    trace.qa_id = item.qa_id;
    trace.qa_type = item.qa_type;
    trace.bucket = bucketize(item.certificate_ms);
    trace.correct_index = item.answer_index;

    try {
        Query query = Query::make(item.question, item.asked_at);
        RetrievalResult evidence;
        if (options.mode == EvalMode::rag) {
            auto extraction = extract_keywords(item.question, options.keyword_generator);
            query.keywords = extraction.keywords;
            evidence = retrieve(bank, query, options.retrieval, backend);
            evidence.keyword_fallback = extraction.generator_failed;
            trace.retrieval_mode = to_string(evidence.mode);
        } else {
            evidence = segment_evidence(bank, item, options.segment_ms);
            trace.retrieval_mode = "segment";
        }
        for (const ScoredClip& sc : evidence.evidence) trace.evidence_ids.push_back(sc.clip_id);

        McqAnswer answer = answer_mcq(query, item.choices, evidence, bank, client);
        trace.chosen = answer.choice_index;
    } catch (const ParseError& e) {
        trace.chosen = seeded_guess(options.guess_seed, item.qa_id);
        trace.guessed = true;
        trace.error = e.what();
    } catch (const Error& e) {
        trace.chosen = seeded_guess(options.guess_seed, item.qa_id);
        trace.guessed = true;
        trace.error = e.what();
    }
    trace.correct = trace.chosen == item.answer_index;
    return trace;
}

double percent(size_t correct, size_t total) {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

EvalReport run_eval(const MemoryBank& bank, std::span<const QaItem> items,
                    const EvalOptions& options, const SimilarityBackend& backend,
                    GeneratorClient& client) {
    options.retrieval.validate();
    EvalReport report;
    report.n_items = items.size();
    report.traces.resize(items.size());

    const int threads = std::max(1, options.threads);
    if (threads == 1 || items.size() < 2) {
        for (size_t i = 0; i < items.size(); ++i) {
            report.traces[i] = evaluate_item(bank, items[i], options, backend, client);
        }
    } else {
        // Fixed slot per item: the fold is independent of completion order.
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= items.size()) return;
                report.traces[i] = evaluate_item(bank, items[i], options, backend, client);
            }
        };
        std::vector<std::future<void>> futures;
        for (int t = 0; t < threads; ++t) futures.push_back(std::async(std::launch::async, worker));
        for (auto& f : futures) f.get();
    }

    std::map<std::string, size_t> type_correct, bucket_correct;
    for (const EvalTrace& trace : report.traces) {
        const std::string type_name = to_string(trace.qa_type);
        const std::string bucket_label = to_string(trace.bucket);
        report.per_type_counts[type_name] += 1;
        report.per_bucket_counts[bucket_label] += 1;
        if (trace.correct) {
            ++report.n_correct;
            type_correct[type_name] += 1;
            bucket_correct[bucket_label] += 1;
        }
        if (trace.guessed) ++report.n_guessed;
    }
    for (const auto& [name, count] : report.per_type_counts) {
        report.per_type_accuracy[name] = percent(type_correct[name], count);
    }
    for (const auto& [label, count] : report.per_bucket_counts) {
        report.per_bucket_accuracy[label] = percent(bucket_correct[label], count);
    }
    report.average = percent(report.n_correct, report.n_items);
    return report;
}

std::string EvalReport::to_json() const {
    json doc;
    doc["average"] = average;
    doc["n_items"] = n_items;
    doc["n_correct"] = n_correct;
    doc["n_guessed"] = n_guessed;
    doc["per_type"] = json::object();
    for (const auto& [name, acc] : per_type_accuracy) {
        doc["per_type"][name] = {{"accuracy", acc}, {"count", per_type_counts.at(name)}};
    }
    doc["per_bucket"] = json::object();
    for (const auto& [label, acc] : per_bucket_accuracy) {
        doc["per_bucket"][label] = {{"accuracy", acc}, {"count", per_bucket_counts.at(label)}};
    }
    doc["traces"] = json::array();
    for (const EvalTrace& t : traces) {
        doc["traces"].push_back({{"qa_id", t.qa_id},
                                 {"qa_type", to_string(t.qa_type)},
                                 {"bucket", to_string(t.bucket)},
                                 {"chosen", t.chosen},
                                 {"correct_index", t.correct_index},
                                 {"correct", t.correct},
                                 {"guessed", t.guessed},
                                 {"retrieval_mode", t.retrieval_mode},
                                 {"evidence", t.evidence_ids},
                                 {"error", t.error}});
    }
    return doc.dump(2) + "\n";
}

namespace {

void table_row(std::ostringstream& out, const std::string& label,
               const std::map<std::string, double>& acc,
               const std::map<std::string, size_t>& counts,
               const std::vector<std::string>& columns) {
    out << label;
    for (const std::string& col : columns) {
        char cell[32];
        auto it = acc.find(col);
        if (it == acc.end()) {
            std::snprintf(cell, sizeof(cell), "%12s", "-");
        } else {
            char text[24];
            std::snprintf(text, sizeof(text), "%.1f (%zu)", it->second, counts.at(col));
            std::snprintf(cell, sizeof(cell), "%12s", text);
        }
        out << cell;
    }
    out << '\n';
}

}  // namespace

std::string EvalReport::to_table() const {
    std::ostringstream out;
    std::vector<std::string> type_columns;
    for (QaType t : kAllQaTypes) type_columns.push_back(to_string(t));
    out << "Accuracy by question type (percent, count):\n          ";
    for (const std::string& c : type_columns) {
        char cell[32];
        std::snprintf(cell, sizeof(cell), "%12s", c.c_str());
        out << cell;
    }
    out << '\n';
    table_row(out, "          ", per_type_accuracy, per_type_counts, type_columns);

    std::vector<std::string> bucket_columns;
    for (CertBucket b : kAllBuckets) bucket_columns.push_back(to_string(b));
    out << "\nAccuracy by certificate length (percent, count):\n          ";
    for (const std::string& c : bucket_columns) {
        char cell[32];
        std::snprintf(cell, sizeof(cell), "%12s", c.c_str());
        out << cell;
    }
    out << '\n';
    table_row(out, "          ", per_bucket_accuracy, per_bucket_counts, bucket_columns);

    char avg[64];
    std::snprintf(avg, sizeof(avg), "\nAverage: %.1f  (items: %zu, guessed: %zu)\n", average,
                  n_items, n_guessed);
    out << avg;
    return out.str();
}

DeltaReport compare_reports(const EvalReport& a, const EvalReport& b) {
    std::set<std::string> ids_a, ids_b;
    for (const EvalTrace& t : a.traces) ids_a.insert(t.qa_id);
    for (const EvalTrace& t : b.traces) ids_b.insert(t.qa_id);
    if (ids_a != ids_b) {
        throw MismatchError("compare_reports: reports cover different QA sets (" +
                            std::to_string(ids_a.size()) + " vs " + std::to_string(ids_b.size()) +
                            " distinct ids)");
    }
    DeltaReport delta;
    auto diff = [](const std::map<std::string, double>& ma,
                   const std::map<std::string, double>& mb) {
        std::map<std::string, double> out;
        for (const auto& [k, v] : ma) {
            auto it = mb.find(k);
            out[k] = v - (it == mb.end() ? 0.0 : it->second);
        }
        for (const auto& [k, v] : mb) {
            if (!ma.count(k)) out[k] = -v;
        }
        return out;
    };
    delta.per_type_delta = diff(a.per_type_accuracy, b.per_type_accuracy);
    delta.per_bucket_delta = diff(a.per_bucket_accuracy, b.per_bucket_accuracy);
    delta.average_delta = a.average - b.average;
    return delta;
}

std::string DeltaReport::to_table() const {
    std::ostringstream out;
    out << "Delta (a - b, percentage points):\n";
    for (const auto& [k, v] : per_type_delta) {
        char row[64];
        std::snprintf(row, sizeof(row), "  %-12s %+.1f\n", k.c_str(), v);
        out << row;
    }
    for (const auto& [k, v] : per_bucket_delta) {
        char row[64];
        std::snprintf(row, sizeof(row), "  %-12s %+.1f\n", k.c_str(), v);
        out << row;
    }
    char avg[48];
    std::snprintf(avg, sizeof(avg), "  %-12s %+.1f\n", "Average", average_delta);
    out << avg;
    return out.str();
}

ScriptedEvidenceClient::ScriptedEvidenceClient(std::span<const PlantedFact> facts,
                                               std::span<const QaItem> items, uint64_t guess_seed)
    : guess_seed_(guess_seed) {
    // Facts and items pair up by position when generated together; fall back
    // to token containment when the caller passes reordered sets.
    for (size_t i = 0; i < facts.size(); ++i) {
        const std::string& token = facts[i].unique_token;
        int answer = -1;
        if (i < items.size() && items[i].question.find(token) != std::string::npos) {
            answer = items[i].answer_index;
        } else {
            for (const QaItem& item : items) {
                if (item.question.find(token) != std::string::npos) {
                    answer = item.answer_index;
                    break;
                }
            }
        }
        if (answer >= 0) entries_.push_back({token, answer});
    }
}

std::string ScriptedEvidenceClient::complete(const Prompt& prompt) {
    if (prompt.kind != PromptKind::answer_mcq) {
        throw GeneratorError("scripted evidence client only answers MCQ prompts");
    }
    for (const Entry& entry : entries_) {
        if (prompt.question_text.find(entry.token) == std::string::npos) continue;
        bool in_evidence = false;
        for (const std::string& caption : prompt.payload) {
            if (caption.find(entry.token) != std::string::npos) {
                in_evidence = true;
                break;
            }
        }
        if (in_evidence) {
            return std::string(1, static_cast<char>('A' + entry.answer_index));
        }
        break;  // the question's fact is known but unsupported: guess
    }
    const int guess = static_cast<int>(mix64(guess_seed_ ^ fnv1a(prompt.question_text)) % 4);
    return std::string(1, static_cast<char>('A' + guess));
}

}  // namespace lifelog
