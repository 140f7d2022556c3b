#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "lifelog/generation.hpp"
#include "lifelog/memory_bank.hpp"
#include "lifelog/qa.hpp"
#include "lifelog/retrieval.hpp"
#include "lifelog/similarity.hpp"
#include "lifelog/synthlog.hpp"

namespace lifelog {

enum class EvalMode { rag, segment_baseline };

std::string to_string(EvalMode mode);

struct EvalOptions {
    EvalMode mode = EvalMode::rag;
    RetrievalConfig retrieval;
    int64_t segment_ms = 30 * kMsPerMinute;  // trailing window of the baseline
    uint64_t guess_seed = 20250; // seeds the fallback guess on failed generations
    int threads = 1;             // bounded parallelism; result independent of it
    GeneratorClient* keyword_generator = nullptr;  // optional, rag mode
};

struct EvalTrace {
    std::string qa_id;
    QaType qa_type = QaType::EntityLog;
    CertBucket bucket = CertBucket::lt_2h;
    int chosen = -1;
    int correct_index = 0;
    bool correct = false;
    bool guessed = false;  // answer came from the seeded fallback
    std::string retrieval_mode;
    std::vector<std::string> evidence_ids;
    std::string error;  // empty unless the item failed

    bool operator==(const EvalTrace&) const = default;
};

struct EvalReport {
    std::map<std::string, double> per_type_accuracy;    // percent, key = type name
    std::map<std::string, size_t> per_type_counts;
    std::map<std::string, double> per_bucket_accuracy;  // percent, key = bucket label
    std::map<std::string, size_t> per_bucket_counts;
    double average = 0.0;  // percent over all items
    size_t n_items = 0;
    size_t n_correct = 0;
    size_t n_guessed = 0;
    std::vector<EvalTrace> traces;  // input order

    bool operator==(const EvalReport&) const = default;

    std::string to_json() const;
    /// Aligned-column tables: accuracy by question type and by
    /// certificate-length bucket.
    std::string to_table() const;
};

/// Runs the QA set through the pipeline. rag mode retrieves evidence
/// hierarchically; segment_baseline answers from the clips of the item's
/// participant in the trailing `segment_ms` window, with no retrieval.
/// Per-item failures become seeded guesses (flagged and counted), never
/// aborts. Deterministic for deterministic clients, regardless of
/// `threads`.
EvalReport run_eval(const MemoryBank& bank, std::span<const QaItem> items,
                    const EvalOptions& options, const SimilarityBackend& backend,
                    GeneratorClient& client);

struct DeltaReport {
    std::map<std::string, double> per_type_delta;    // a - b, percentage points
    std::map<std::string, double> per_bucket_delta;
    double average_delta = 0.0;

    std::string to_table() const;
};

/// Signed differences a - b. Throws MismatchError unless both reports
/// cover the same QA ids.
DeltaReport compare_reports(const EvalReport& a, const EvalReport& b);

/// Offline client that answers correctly iff the planted clip's token is
/// visible in the prompt evidence, and otherwise guesses with a seed.
/// The trend-reproduction harness runs on this.
class ScriptedEvidenceClient final : public GeneratorClient {
public:
    ScriptedEvidenceClient(std::span<const PlantedFact> facts, std::span<const QaItem> items,
                           uint64_t guess_seed = 7);

    std::string complete(const Prompt& prompt) override;
    std::string name() const override { return "scripted-evidence"; }

private:
    struct Entry {
        std::string token;
        int answer_index;
    };
    std::vector<Entry> entries_;  // searched in order; tokens are unique
    uint64_t guess_seed_;
};

}  // namespace lifelog
