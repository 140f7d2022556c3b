#include "lifelog/generation.hpp"

#include <algorithm>
#include <regex>

#include "lifelog/errors.hpp"

namespace lifelog {

std::vector<EvidenceLine> evidence_lines(const MemoryBank& bank, const RetrievalResult& evidence) {
    std::vector<EvidenceLine> lines;
    lines.reserve(evidence.evidence.size());
    for (const ScoredClip& sc : evidence.evidence) {
        if (const ClipEntry* clip = bank.find_clip(sc.clip_id)) {
            lines.push_back({clip->clip_id, clip->range, clip->caption_text});
        }
    }
    std::sort(lines.begin(), lines.end(), [](const EvidenceLine& a, const EvidenceLine& b) {
        if (a.range.start != b.range.start) return a.range.start < b.range.start;
        return a.clip_id < b.clip_id;
    });
    return lines;
}

Prompt make_summary_prompt(const std::vector<std::string>& texts, SummaryLevel level) {
    Prompt prompt;
    prompt.kind = level == SummaryLevel::hour ? PromptKind::summarize_hour
                                              : PromptKind::summarize_day;
    prompt.system_text =
        level == SummaryLevel::hour
            ? "You summarize one hour of first-person life-log captions into a "
              "short paragraph. Keep every concrete object, person and action."
            : "You summarize a day of hourly life-log summaries into a short "
              "paragraph. Keep every concrete object, person and action.";
    std::string user = level == SummaryLevel::hour ? "Captions:\n" : "Hourly summaries:\n";
    for (size_t i = 0; i < texts.size(); ++i) {
        user += std::to_string(i + 1) + ". " + texts[i] + "\n";
    }
    prompt.user_text = std::move(user);
    prompt.payload = texts;
    prompt.max_answer_tokens = 512;
    return prompt;
}

Prompt make_merge_prompt(const std::vector<std::string>& narrations, const TimeRange& window) {
    Prompt prompt;
    prompt.kind = PromptKind::merge;
    prompt.system_text =
        "You merge brief first-person narration phrases from one time window "
        "into a single coherent caption sentence.";
    std::string user = "Window " + window.to_string() + "\nNarrations:\n";
    for (size_t i = 0; i < narrations.size(); ++i) {
        user += std::to_string(i + 1) + ". " + narrations[i] + "\n";
    }
    prompt.user_text = std::move(user);
    prompt.payload = narrations;
    prompt.max_answer_tokens = 256;
    return prompt;
}

namespace {

std::string evidence_block(const std::vector<EvidenceLine>& evidence) {
    std::string block = "Evidence:\n";
    if (evidence.empty()) block += "(none)\n";
    for (const EvidenceLine& line : evidence) {
        block += "[" + line.range.start.to_string() + " - " + line.range.end.to_string() + "] " +
                 line.caption + "\n";
    }
    return block;
}

}  // namespace

Prompt make_mcq_prompt(const Query& query, const std::array<std::string, 4>& choices,
                       const std::vector<EvidenceLine>& evidence) {
    Prompt prompt;
    prompt.kind = PromptKind::answer_mcq;
    prompt.system_text =
        "You answer a multiple-choice question about the wearer's past using "
        "the timestamped evidence. Reply with the letter of the best choice.";
    std::string user = evidence_block(evidence);
    user += "Question (asked at " + query.asked_at.to_string() + "): " + query.question_text + "\n";
    user += "Choices:\n";
    const char letters[4] = {'A', 'B', 'C', 'D'};
    for (size_t i = 0; i < choices.size(); ++i) {
        user += std::string(1, letters[i]) + ". " + choices[i] + "\n";
    }
    prompt.user_text = std::move(user);
    for (const EvidenceLine& line : evidence) prompt.payload.push_back(line.caption);
    prompt.question_text = query.question_text;
    prompt.max_answer_tokens = 32;
    return prompt;
}

Prompt make_freeform_prompt(const Query& query, const std::vector<EvidenceLine>& evidence) {
    Prompt prompt;
    prompt.kind = PromptKind::answer_freeform;
    prompt.system_text =
        "You answer a question about the wearer's past using the timestamped "
        "evidence. Answer concisely and cite the relevant times.";
    std::string user = evidence_block(evidence);
    user += "Question (asked at " + query.asked_at.to_string() + "): " + query.question_text + "\n";
    prompt.user_text = std::move(user);
    for (const EvidenceLine& line : evidence) prompt.payload.push_back(line.caption);
    prompt.question_text = query.question_text;
    prompt.max_answer_tokens = 256;
    return prompt;
}

std::optional<int> extract_choice_letter(const std::string& reply) {
    static const std::regex pattern(R"(\b([A-D])\b)");
    std::smatch match;
    if (std::regex_search(reply, match, pattern)) {
        return match[1].str()[0] - 'A';
    }
    return std::nullopt;
}

McqAnswer answer_mcq(const Query& query, const std::array<std::string, 4>& choices,
                     const RetrievalResult& evidence, const MemoryBank& bank,
                     GeneratorClient& client) {
    const auto lines = evidence_lines(bank, evidence);
    const Prompt prompt = make_mcq_prompt(query, choices, lines);
    McqAnswer answer;
    for (const EvidenceLine& line : lines) answer.used_evidence.push_back(line.clip_id);
    answer.raw_text = client.complete(prompt);
    const auto choice = extract_choice_letter(answer.raw_text);
    if (!choice) {
        throw ParseError("answer_mcq: no standalone choice letter in reply \"" +
                         truncate_utf8(answer.raw_text, 120) + "\"");
    }
    answer.choice_index = *choice;
    return answer;
}

std::string answer_freeform(const Query& query, const RetrievalResult& evidence,
                            const MemoryBank& bank, GeneratorClient& client) {
    return client.complete(make_freeform_prompt(query, evidence_lines(bank, evidence)));
}

std::string summarize_window(const std::vector<std::string>& captions, SummaryLevel level,
                             GeneratorClient& client) {
    if (captions.empty()) throw Error("summarize_window: no captions");
    std::string summary = client.complete(make_summary_prompt(captions, level));
    if (summary.empty()) throw GeneratorError("summarize_window: empty summary from generator");
    return summary;
}

std::string merge_narrations(const std::vector<std::string>& narrations, const TimeRange& window,
                             GeneratorClient& client) {
    if (narrations.empty()) throw Error("merge_narrations: no narrations");
    if (!window.valid()) throw Error("merge_narrations: invalid window");
    return client.complete(make_merge_prompt(narrations, window));
}

void rebuild_summaries(MemoryBank& bank, GeneratorClient& client) {
    bank.rebuild_summaries([&client](const std::vector<std::string>& texts, SummaryLevel level) {
        return summarize_window(texts, level, client);
    });
}

}  // namespace lifelog
