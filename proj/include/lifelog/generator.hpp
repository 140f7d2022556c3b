#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lifelog {

enum class PromptKind { summarize_hour, summarize_day, merge, answer_mcq, answer_freeform, keywords };

/// A single generation request. `system_text`/`user_text` is what a live
/// model sees; `kind`, `payload` and `question_text` carry the same content
/// in structured form so offline clients can act on it without parsing
/// prose.
struct Prompt {
    PromptKind kind = PromptKind::answer_freeform;
    std::string system_text;
    std::string user_text;
    std::vector<std::string> payload;   // captions / summaries / evidence, in order
    std::string question_text;          // answer prompts only
    int max_answer_tokens = 256;
};

/// Pluggable text-generation client. Implementations must be reentrant;
/// calls may run concurrently under a bounded in-flight limit.
class GeneratorClient {
public:
    virtual ~GeneratorClient() = default;
    /// Returns the model reply. Throws GeneratorError on failure.
    virtual std::string complete(const Prompt& prompt) = 0;
    virtual std::string name() const = 0;
};

/// Deterministic offline client. Summaries and merges are the chronological
/// concatenation of the payload, truncated to `char_limit` at a UTF-8
/// boundary; answers are the fixed `default_answer`.
class MockGenerator final : public GeneratorClient {
public:
    struct Options {
        size_t char_limit = 8192;
        std::string joiner = " ";
        std::string merge_joiner = "; ";
        std::string default_answer = "A";
    };

    MockGenerator() = default;
    explicit MockGenerator(Options opts) : opts_(std::move(opts)) {}

    std::string complete(const Prompt& prompt) override;
    std::string name() const override { return "mock"; }

private:
    Options opts_;
};

/// Replays a fixed reply sequence; fails when scripted to. Test double.
class ScriptedClient final : public GeneratorClient {
public:
    /// Each entry is either a reply or the literal "<fail>" to raise a
    /// GeneratorError. The sequence repeats its last entry when exhausted.
    explicit ScriptedClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    std::string complete(const Prompt& prompt) override;
    std::string name() const override { return "scripted"; }
    size_t calls() const { return calls_; }

private:
    std::vector<std::string> replies_;
    size_t calls_ = 0;
};

/// Callback-backed client for custom test behavior.
class CallbackClient final : public GeneratorClient {
public:
    using Fn = std::function<std::string(const Prompt&)>;
    explicit CallbackClient(Fn fn, std::string label = "callback")
        : fn_(std::move(fn)), label_(std::move(label)) {}

    std::string complete(const Prompt& prompt) override { return fn_(prompt); }
    std::string name() const override { return label_; }

private:
    Fn fn_;
    std::string label_;
};

/// HTTP chat-completion client.
///
/// Wire protocol: POST `path` with JSON
///   {"model": ..., "messages": [{"role": "system"|"user", "content": ...}],
///    "max_tokens": ...}
/// The reply text is read from `response_text_path`, a '/'-separated JSON
/// path (array indices as numbers), default "choices/0/message/content".
///
/// Transport failures and 5xx responses are retried with exponential
/// backoff up to `max_retries`; 4xx responses are never retried.
class HttpGeneratorClient final : public GeneratorClient {
public:
    struct Config {
        std::string base_url;  // e.g. "http://localhost:8123"
        std::string path = "/v1/chat/completions";
        std::string model_name = "gpt-4o";
        std::string api_key;   // sent as "Authorization: Bearer <key>" when set
        std::string response_text_path = "choices/0/message/content";
        int timeout_ms = 30000;
        int max_retries = 2;
        int backoff_base_ms = 200;
    };

    explicit HttpGeneratorClient(Config cfg) : cfg_(std::move(cfg)) {}

    std::string complete(const Prompt& prompt) override;
    std::string name() const override { return "http:" + cfg_.model_name; }
    const Config& config() const { return cfg_; }

private:
    Config cfg_;
};

/// Truncates UTF-8 text to at most `limit` bytes without splitting a
/// code point.
std::string truncate_utf8(const std::string& text, size_t limit);

}  // namespace lifelog
