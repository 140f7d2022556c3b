#include "lifelog/generator.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lifelog/errors.hpp"

namespace lifelog {

using nlohmann::json;

std::string truncate_utf8(const std::string& text, size_t limit) {
    if (text.size() <= limit) return text;
    size_t cut = limit;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    return text.substr(0, cut);
}

std::string MockGenerator::complete(const Prompt& prompt) {
    switch (prompt.kind) {
        case PromptKind::summarize_hour:
        case PromptKind::summarize_day: {
            std::string out;
            for (size_t i = 0; i < prompt.payload.size(); ++i) {
                if (i) out += opts_.joiner;
                out += prompt.payload[i];
            }
            return truncate_utf8(out, opts_.char_limit);
        }
        case PromptKind::merge: {
            std::string out;
            for (size_t i = 0; i < prompt.payload.size(); ++i) {
                if (i) out += opts_.merge_joiner;
                out += prompt.payload[i];
            }
            return truncate_utf8(out, opts_.char_limit);
        }
        case PromptKind::keywords: {
            // Echo the question; the caller tokenizes.
            return prompt.payload.empty() ? std::string() : prompt.payload.front();
        }
        case PromptKind::answer_mcq:
            return opts_.default_answer;
        case PromptKind::answer_freeform: {
            std::string out = "Based on " + std::to_string(prompt.payload.size()) +
                              " evidence clip(s).";
            if (!prompt.payload.empty()) out += " Earliest: " + prompt.payload.front();
            return truncate_utf8(out, opts_.char_limit);
        }
    }
    return {};
}

std::string ScriptedClient::complete(const Prompt&) {
    if (replies_.empty()) throw GeneratorError("scripted client has no replies");
    const size_t idx = std::min(calls_, replies_.size() - 1);
    ++calls_;
    const std::string& reply = replies_[idx];
    if (reply == "<fail>") throw GeneratorError("scripted failure");
    return reply;
}

std::string HttpGeneratorClient::complete(const Prompt& prompt) {
    json request{{"model", cfg_.model_name},
                 {"messages",
                  json::array({json{{"role", "system"}, {"content", prompt.system_text}},
                               json{{"role", "user"}, {"content", prompt.user_text}}})},
                 {"max_tokens", prompt.max_answer_tokens}};
    const std::string body = request.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(cfg_.backoff_base_ms * (1LL << (attempt - 1))));
        }
        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(0, cfg_.timeout_ms * 1000LL);
        client.set_read_timeout(0, cfg_.timeout_ms * 1000LL);
        httplib::Headers headers;
        if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

        auto res = client.Post(cfg_.path, headers, body, "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 400 && res->status < 500) {
            throw GeneratorError("generator returned HTTP " + std::to_string(res->status) +
                                 " (not retried): " + res->body);
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }

        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::exception& e) {
            throw GeneratorError(std::string("generator reply is not JSON: ") + e.what());
        }
        const json* node = &reply;
        std::istringstream path(cfg_.response_text_path);
        std::string step;
        while (std::getline(path, step, '/')) {
            if (node->is_array()) {
                size_t idx = 0;
                try {
                    idx = std::stoul(step);
                } catch (...) {
                    throw GeneratorError("bad response_text_path step '" + step + "'");
                }
                if (idx >= node->size()) {
                    throw GeneratorError("response_text_path index out of range: " + step);
                }
                node = &(*node)[idx];
            } else if (node->is_object() && node->contains(step)) {
                node = &(*node)[step];
            } else {
                throw GeneratorError("generator reply missing field '" + step + "'");
            }
        }
        if (!node->is_string()) throw GeneratorError("generator reply text is not a string");
        return node->get<std::string>();
    }
    throw GeneratorError("generator request failed after " +
                         std::to_string(cfg_.max_retries + 1) + " attempt(s): " + last_error);
}

}  // namespace lifelog
