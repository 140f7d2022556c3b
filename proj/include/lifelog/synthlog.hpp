#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lifelog/memory_bank.hpp"
#include "lifelog/qa.hpp"

namespace lifelog {

enum class CertBucket { lt_2h, h2_to_6h, h6_to_24h, gt_24h };

inline constexpr CertBucket kAllBuckets[] = {CertBucket::lt_2h, CertBucket::h2_to_6h,
                                             CertBucket::h6_to_24h, CertBucket::gt_24h};

/// The four labels, verbatim as they appear in reports.
std::string to_string(CertBucket bucket);
CertBucket cert_bucket_from_string(const std::string& label);

/// Half-open, lower-inclusive mapping: [0,2h) [2h,6h) [6h,24h) [24h,inf).
/// Requires certificate_ms > 0.
CertBucket bucketize(int64_t certificate_ms);

struct SynthSpec {
    uint64_t seed = 1;
    int days = 7;
    int participants = 6;
    int clips_per_hour = 120;
    int active_hours_per_day = 8;
    int planted_facts = 0;
    std::map<CertBucket, double> certificate_mix = {{CertBucket::lt_2h, 0.25},
                                                    {CertBucket::h2_to_6h, 0.25},
                                                    {CertBucket::h6_to_24h, 0.25},
                                                    {CertBucket::gt_24h, 0.25}};
    int clip_seconds = 30;
    size_t feature_dim = 0;  // 0 = no feature vectors, else random unit vectors

    /// Throws InfeasibleSpecError when the spec cannot be realized.
    void validate() const;
};

struct PlantedFact {
    std::string fact_id;
    std::string unique_token;  // occurs in exactly one clip caption
    Timestamp planted_at;
    std::string fact_text;
    // Bookkeeping for tests and the scripted evaluation client:
    std::string clip_id;
    std::string participant;
    std::string place;  // the correct answer
};

struct SynthResult {
    MemoryBank bank;
    std::vector<QaItem> qa_items;   // one per fact, same order
    std::vector<PlantedFact> facts;
};

/// Deterministic synthetic lifelog: background captions from a seeded
/// template grammar, one uniquely-tokenized fact per QA item, certificates
/// drawn from the configured bucket mix. Identical spec => identical output.
SynthResult generate(const SynthSpec& spec);

struct UniquenessReport {
    size_t facts_checked = 0;
    size_t captions_scanned = 0;
};

/// Scans every caption and asserts each fact token occurs exactly once.
/// Throws UniquenessError listing the offending tokens.
UniquenessReport verify_uniqueness(const MemoryBank& bank, std::span<const PlantedFact> facts);

/// Facts serialization (used by the CLI so the scripted evaluation client
/// can be reconstructed from files).
std::string serialize_facts(std::span<const PlantedFact> facts);
std::vector<PlantedFact> parse_facts(const std::string& text);
std::vector<PlantedFact> load_facts(const std::string& path);

/// Grammar introspection for tests: every token a background caption or
/// fact sentence can produce, and the five question templates rendered
/// with `token`.
std::vector<std::string> synth_caption_tokens();
std::vector<std::string> synth_question_templates(const std::string& token);

}  // namespace lifelog
