#include "lifelog/retrieval.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "lifelog/errors.hpp"

namespace lifelog {

using nlohmann::json;

std::string to_string(RetrievalMode mode) {
    switch (mode) {
        case RetrievalMode::hierarchical: return "hierarchical";
        case RetrievalMode::global_fallback: return "global_fallback";
        case RetrievalMode::oracle: return "oracle";
    }
    return "hierarchical";
}

Query Query::make(std::string question_text, Timestamp asked_at) {
    if (question_text.empty()) throw Error("Query: empty question_text");
    if (!asked_at.valid()) throw Error("Query: invalid asked_at");
    Query q;
    q.question_text = std::move(question_text);
    q.asked_at = asked_at;
    return q;
}

std::string Query::effective_text() const {
    if (!keywords) return question_text;
    std::string out;
    for (size_t i = 0; i < keywords->size(); ++i) {
        if (i) out += ' ';
        out += (*keywords)[i];
    }
    return out;
}

void RetrievalConfig::validate() const {
    if (top_k < 1) throw Error("RetrievalConfig: top_k must be >= 1");
    if (lambda < 0.0) throw Error("RetrievalConfig: lambda must be >= 0");
    if (days_to_expand < 1) throw Error("RetrievalConfig: days_to_expand must be >= 1");
    if (hours_to_expand < 1) throw Error("RetrievalConfig: hours_to_expand must be >= 1");
    if (fallback_threshold < 0.0 || fallback_threshold > 1.0) {
        throw Error("RetrievalConfig: fallback_threshold must be in [0,1]");
    }
}

std::string RetrievalConfig::cache_key() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "l=%.17g,k=%d,d=%d,h=%d,f=%.17g,c=%d", lambda, top_k,
                  days_to_expand, hours_to_expand, fallback_threshold, causal ? 1 : 0);
    return buf;
}

KeywordExtraction extract_keywords(const std::string& question_text, GeneratorClient* generator) {
    if (question_text.empty()) throw Error("extract_keywords: empty question");
    KeywordExtraction out;
    if (generator) {
        Prompt prompt;
        prompt.kind = PromptKind::keywords;
        prompt.system_text =
            "Extract the key content words from the question for searching a "
            "life-log. Reply with the keywords only, separated by semicolons.";
        prompt.user_text = question_text;
        prompt.payload = {question_text};
        prompt.max_answer_tokens = 64;
        try {
            out.keywords = tokenize(generator->complete(prompt), StopwordList::english_v1());
            out.used_generator = true;
            if (!out.keywords.empty()) return out;
            // An empty proposal is useless; fall through to the lexical path.
        } catch (const GeneratorError&) {
            out.generator_failed = true;
        }
    }
    out.used_generator = false;
    out.keywords = tokenize(question_text, StopwordList::english_v1());
    return out;
}

namespace {

struct RankedNode {
    const SummaryNode* node;
    double score;
};

// score desc, earlier start, node id.
bool ranked_less(const RankedNode& a, const RankedNode& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.node->range.start != b.node->range.start) {
        return a.node->range.start < b.node->range.start;
    }
    return a.node->node_id < b.node->node_id;
}

}  // namespace

LocatedWindows locate_windows(const MemoryBank& bank, const Query& query,
                              const RetrievalConfig& cfg, const SimilarityBackend& backend) {
    cfg.validate();
    if (cfg.causal ? bank.has_stale_before(query.asked_at) : bank.has_stale()) {
        throw StaleIndexError("locate_windows: stale summary windows cover the search region");
    }

    LocatedWindows out;
    const std::string qtext = query.effective_text();
    auto causal_ok = [&](const SummaryNode& node) {
        return !cfg.causal || node.range.start < query.asked_at;
    };

    std::vector<RankedNode> days;
    for (const auto& [id, node] : bank.day_nodes()) {
        if (!causal_ok(node)) continue;
        days.push_back({&node, backend.score_text(qtext, node.summary_text)});
    }
    if (days.empty()) return out;  // nothing searchable: empty hierarchical result
    std::sort(days.begin(), days.end(), ranked_less);

    if (days.front().score < cfg.fallback_threshold) {
        // Summaries do not match the query at all; scan every eligible hour.
        out.mode = RetrievalMode::global_fallback;
        for (const auto& d : days) {
            out.searched.push_back({SummaryLevel::day, d.node->range});
        }
        std::vector<const SummaryNode*> hours;
        for (const auto& [id, node] : bank.hour_nodes()) {
            if (causal_ok(node)) hours.push_back(&node);
        }
        std::sort(hours.begin(), hours.end(), [](const SummaryNode* a, const SummaryNode* b) {
            if (a->range.start != b->range.start) return a->range.start < b->range.start;
            return a->node_id < b->node_id;
        });
        for (const SummaryNode* h : hours) {
            out.searched.push_back({SummaryLevel::hour, h->range});
            out.hours.push_back(h->range);
        }
        return out;
    }

    const size_t n_days = std::min<size_t>(cfg.days_to_expand, days.size());
    std::vector<RankedNode> hour_candidates;
    for (size_t i = 0; i < n_days; ++i) {
        out.searched.push_back({SummaryLevel::day, days[i].node->range});
        for (const std::string& hour_id : days[i].node->child_ids) {
            const SummaryNode* hour = bank.find_node(hour_id);
            if (!hour || !causal_ok(*hour)) continue;
            hour_candidates.push_back({hour, backend.score_text(qtext, hour->summary_text)});
        }
    }
    std::sort(hour_candidates.begin(), hour_candidates.end(), ranked_less);
    const size_t n_hours = std::min<size_t>(cfg.hours_to_expand, hour_candidates.size());
    for (size_t i = 0; i < n_hours; ++i) {
        out.searched.push_back({SummaryLevel::hour, hour_candidates[i].node->range});
        out.hours.push_back(hour_candidates[i].node->range);
    }
    return out;
}

std::vector<ScoredClip> score_clips(const MemoryBank& bank, std::span<const TimeRange> windows,
                                    const Query& query, const RetrievalConfig& cfg,
                                    const SimilarityBackend& backend) {
    cfg.validate();
    const std::string qtext = query.effective_text();

    std::vector<const ClipEntry*> candidates;
    std::unordered_set<const ClipEntry*> seen;
    for (const TimeRange& window : windows) {
        for (const ClipEntry* clip : bank.clips_overlapping(window)) {
            if (cfg.causal && !(clip->range.end <= query.asked_at)) continue;
            if (seen.insert(clip).second) candidates.push_back(clip);
        }
    }

    std::vector<ScoredClip> scored;
    scored.reserve(candidates.size());
    for (const ClipEntry* clip : candidates) {
        const double text = backend.score_text(qtext, clip->caption_text);
        double feature = text;  // no vectors on either side: degrade to caption text
        if (query.q_vec && clip->feature_vector &&
            query.q_vec->size() == clip->feature_vector->size()) {
            feature = score_feature(*query.q_vec, *clip->feature_vector);
        }
        ScoredClip sc;
        sc.clip_id = clip->clip_id;
        sc.channel_scores = {feature, text};
        sc.score = feature + cfg.lambda * text;
        sc.start = clip->range.start;
        scored.push_back(std::move(sc));
    }
    return scored;
}

RetrievalResult top_k(std::vector<ScoredClip> scored, int k) {
    if (k < 1) throw Error("top_k: k must be >= 1");
    std::sort(scored.begin(), scored.end(), [](const ScoredClip& a, const ScoredClip& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.start != b.start) return a.start < b.start;
        return a.clip_id < b.clip_id;
    });
    if (scored.size() > static_cast<size_t>(k)) scored.resize(k);
    RetrievalResult result;
    result.evidence = std::move(scored);
    return result;
}

std::string QueryCache::key_for(const MemoryBank& bank, const Query& query,
                                const RetrievalConfig& cfg) {
    std::string key = std::to_string(bank.revision());
    key += '\x1f';
    key += std::to_string(query.asked_at.day) + ":" + std::to_string(query.asked_at.msec_of_day);
    key += '\x1f';
    key += query.effective_text();
    key += '\x1f';
    if (query.q_vec) {
        key.append(reinterpret_cast<const char*>(query.q_vec->data()),
                   query.q_vec->size() * sizeof(double));
    }
    key += '\x1f';
    key += cfg.cache_key();
    return key;
}

std::optional<RetrievalResult> QueryCache::lookup(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void QueryCache::insert(const std::string& key, const RetrievalResult& result) {
    std::lock_guard lock(mutex_);
    entries_[key] = result;
}

size_t QueryCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

RetrievalResult retrieve(const MemoryBank& bank, const Query& query, const RetrievalConfig& cfg,
                         const SimilarityBackend& backend, QueryCache* cache) {
    std::string key;
    if (cache) {
        key = QueryCache::key_for(bank, query, cfg);
        if (auto hit = cache->lookup(key)) return *hit;
    }
    LocatedWindows located = locate_windows(bank, query, cfg, backend);
    RetrievalResult result = top_k(score_clips(bank, located.hours, query, cfg, backend),
                                   cfg.top_k);
    result.searched_windows = std::move(located.searched);
    result.mode = located.mode;
    if (cache) cache->insert(key, result);
    return result;
}

RetrievalResult retrieve_oracle(const MemoryBank& bank, const Query& query,
                                const RetrievalConfig& cfg, const SimilarityBackend& backend) {
    cfg.validate();
    std::vector<TimeRange> everything;
    if (!bank.empty()) {
        Timestamp lo{1, 0};
        Timestamp hi{1, 0};
        for (const ClipEntry& clip : bank.clips()) {
            if (clip.range.start < lo) lo = clip.range.start;
            if (clip.range.end > hi) hi = clip.range.end;
        }
        everything.push_back({lo, hi});
    }
    RetrievalResult result = top_k(score_clips(bank, everything, query, cfg, backend),
                                   cfg.top_k);
    result.mode = RetrievalMode::oracle;
    return result;
}

std::string RetrievalResult::to_json() const {
    json doc;
    doc["mode"] = to_string(mode);
    doc["keyword_fallback"] = keyword_fallback;
    doc["searched_windows"] = json::array();
    for (const SearchedWindow& w : searched_windows) {
        doc["searched_windows"].push_back({{"level", to_string(w.level)},
                                           {"start_day", w.range.start.day},
                                           {"start_ms", w.range.start.msec_of_day},
                                           {"end_day", w.range.end.day},
                                           {"end_ms", w.range.end.msec_of_day}});
    }
    doc["evidence"] = json::array();
    for (const ScoredClip& clip : evidence) {
        doc["evidence"].push_back({{"clip_id", clip.clip_id},
                                   {"score", clip.score},
                                   {"feature", clip.channel_scores.feature},
                                   {"text", clip.channel_scores.text},
                                   {"start_day", clip.start.day},
                                   {"start_ms", clip.start.msec_of_day}});
    }
    return doc.dump(2);
}

}  // namespace lifelog
