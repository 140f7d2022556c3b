#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lifelog/generator.hpp"
#include "lifelog/memory_bank.hpp"
#include "lifelog/similarity.hpp"
#include "lifelog/time.hpp"

namespace lifelog {

struct Query {
    std::string question_text;
    Timestamp asked_at;
    std::optional<std::vector<std::string>> keywords;
    std::optional<std::vector<double>> q_vec;

    /// Validates the invariants (non-empty question, valid timestamp).
    static Query make(std::string question_text, Timestamp asked_at);

    /// Text used for lexical scoring: the keywords joined by spaces when
    /// present, otherwise the raw question.
    std::string effective_text() const;
};

struct RetrievalConfig {
    double lambda = 0.0;          // weight of the textual channel in s_i
    int top_k = 3;
    int days_to_expand = 1;
    int hours_to_expand = 2;
    double fallback_threshold = 0.05;  // best day score below this => global scan
    bool causal = true;

    void validate() const;
    /// Stable key fragment for the re-query cache.
    std::string cache_key() const;
};

struct ChannelScores {
    double feature = 0.0;
    double text = 0.0;

    bool operator==(const ChannelScores&) const = default;
};

struct ScoredClip {
    std::string clip_id;
    double score = 0.0;  // feature + lambda * text
    ChannelScores channel_scores;
    Timestamp start;  // for tie-breaking and chronological display

    bool operator==(const ScoredClip&) const = default;
};

enum class RetrievalMode { hierarchical, global_fallback, oracle };

std::string to_string(RetrievalMode mode);

struct SearchedWindow {
    SummaryLevel level;
    TimeRange range;

    bool operator==(const SearchedWindow&) const = default;
};

struct RetrievalResult {
    std::vector<ScoredClip> evidence;  // score-descending, ties by earlier start
    std::vector<SearchedWindow> searched_windows;
    RetrievalMode mode = RetrievalMode::hierarchical;
    bool keyword_fallback = false;  // generator keyword extraction failed

    bool operator==(const RetrievalResult&) const = default;

    /// JSON trace of the search path and scores, for inspection.
    std::string to_json() const;
};

struct KeywordExtraction {
    std::vector<std::string> keywords;
    bool used_generator = false;
    bool generator_failed = false;  // fell back to the lexical path
};

/// Keywords for a question. Without a generator: tokenization with
/// stopwords removed. With one: the generator proposes keywords, which are
/// then tokenized; on generator failure the lexical path is used and the
/// fallback recorded.
KeywordExtraction extract_keywords(const std::string& question_text,
                                   GeneratorClient* generator = nullptr);

/// Day -> hour refinement over the summary index. Returns the hour-node
/// extents to search, best first. With cfg.causal only windows starting
/// before query.asked_at are eligible; when the best day score falls below
/// cfg.fallback_threshold every eligible hour window is returned
/// (mode = global_fallback). Throws StaleIndexError when a stale window
/// overlaps the eligible region.
struct LocatedWindows {
    std::vector<TimeRange> hours;
    std::vector<SearchedWindow> searched;
    RetrievalMode mode = RetrievalMode::hierarchical;
};
LocatedWindows locate_windows(const MemoryBank& bank, const Query& query,
                              const RetrievalConfig& cfg, const SimilarityBackend& backend);

/// Scores every clip overlapping the windows: s_i = feature + lambda*text.
/// The feature channel is vector similarity when both the query and clip
/// carry vectors, caption-text similarity otherwise; the text channel is
/// always caption-text similarity. Causality drops clips ending after
/// asked_at.
std::vector<ScoredClip> score_clips(const MemoryBank& bank, std::span<const TimeRange> windows,
                                    const Query& query, const RetrievalConfig& cfg,
                                    const SimilarityBackend& backend);

/// The k best by (score desc, earlier start, clip_id).
RetrievalResult top_k(std::vector<ScoredClip> scored, int k);

/// Re-query cache keyed by (bank revision, query text, config). Reads and
/// writes are atomic; safe for concurrent retrieval.
class QueryCache {
public:
    std::optional<RetrievalResult> lookup(const std::string& key) const;
    void insert(const std::string& key, const RetrievalResult& result);
    size_t size() const;
    static std::string key_for(const MemoryBank& bank, const Query& query,
                               const RetrievalConfig& cfg);

private:
    mutable std::mutex mutex_;
    std::unordered_map<std::string, RetrievalResult> entries_;
};

/// Coarse-to-fine retrieval: locate_windows, score_clips, top_k.
RetrievalResult retrieve(const MemoryBank& bank, const Query& query, const RetrievalConfig& cfg,
                         const SimilarityBackend& backend, QueryCache* cache = nullptr);

/// Exhaustive scan of every (causal) clip; no hierarchy. The testing
/// oracle for `retrieve`.
RetrievalResult retrieve_oracle(const MemoryBank& bank, const Query& query,
                                const RetrievalConfig& cfg, const SimilarityBackend& backend);

}  // namespace lifelog
