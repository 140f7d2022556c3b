#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lifelog/generator.hpp"
#include "lifelog/memory_bank.hpp"
#include "lifelog/retrieval.hpp"

namespace lifelog {

struct McqAnswer {
    int choice_index = -1;          // 0..3 == A..D
    std::string raw_text;
    std::vector<std::string> used_evidence;  // clip ids, prompt order
};

/// Evidence line as it appears in a prompt.
struct EvidenceLine {
    std::string clip_id;
    TimeRange range;
    std::string caption;
};

/// Resolves evidence ids against the bank and orders them chronologically.
/// Ids that no longer resolve are skipped.
std::vector<EvidenceLine> evidence_lines(const MemoryBank& bank, const RetrievalResult& evidence);

/// The versioned prompt fixtures. Evidence is embedded chronologically with
/// explicit timestamps regardless of retrieval score order.
Prompt make_summary_prompt(const std::vector<std::string>& texts, SummaryLevel level);
Prompt make_merge_prompt(const std::vector<std::string>& narrations, const TimeRange& window);
Prompt make_mcq_prompt(const Query& query, const std::array<std::string, 4>& choices,
                       const std::vector<EvidenceLine>& evidence);
Prompt make_freeform_prompt(const Query& query, const std::vector<EvidenceLine>& evidence);

/// First standalone letter A-D in the reply, or nullopt.
std::optional<int> extract_choice_letter(const std::string& reply);

/// Asks the client to pick one of four choices given the retrieved
/// evidence. Throws GeneratorError on transport failure and ParseError
/// when no choice letter can be extracted from the reply (callers may then
/// fall back to a seeded guess and flag it).
McqAnswer answer_mcq(const Query& query, const std::array<std::string, 4>& choices,
                     const RetrievalResult& evidence, const MemoryBank& bank,
                     GeneratorClient& client);

/// Free-form response over the retrieved evidence.
std::string answer_freeform(const Query& query, const RetrievalResult& evidence,
                            const MemoryBank& bank, GeneratorClient& client);

/// Summary of a window's captions (chronological order expected).
std::string summarize_window(const std::vector<std::string>& captions, SummaryLevel level,
                             GeneratorClient& client);

/// Merges timestamped narration phrases into one caption.
std::string merge_narrations(const std::vector<std::string>& narrations, const TimeRange& window,
                             GeneratorClient& client);

/// rebuild_summaries with a GeneratorClient driving summarize_window.
void rebuild_summaries(MemoryBank& bank, GeneratorClient& client);

}  // namespace lifelog
