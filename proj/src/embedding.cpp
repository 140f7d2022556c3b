#include <httplib.h>

#include <nlohmann/json.hpp>

#include "lifelog/errors.hpp"
#include "lifelog/similarity.hpp"

namespace lifelog {

std::vector<std::vector<double>> EmbeddingBackend::embed(std::span<const std::string> texts) const {
    nlohmann::json request;
    request["input"] = std::vector<std::string>(texts.begin(), texts.end());

    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(0, cfg_.timeout_ms * 1000LL);
    client.set_read_timeout(0, cfg_.timeout_ms * 1000LL);
    httplib::Headers headers;
    if (!cfg_.auth_token.empty()) {
        headers.emplace("Authorization", "Bearer " + cfg_.auth_token);
    }

    auto res = client.Post(cfg_.path, headers, request.dump(), "application/json");
    if (!res) {
        throw BackendError("embedding request to " + cfg_.base_url +
                           " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw BackendError("embedding service returned HTTP " + std::to_string(res->status));
    }

    nlohmann::json body;
    try {
        body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("embedding response is not JSON: ") + e.what());
    }
    if (!body.contains("vectors") || !body["vectors"].is_array()) {
        throw BackendError("embedding response missing 'vectors' array");
    }

    std::vector<std::vector<double>> vectors;
    for (const auto& row : body["vectors"]) {
        if (!row.is_array()) throw BackendError("embedding vector is not an array");
        std::vector<double> v;
        v.reserve(row.size());
        for (const auto& x : row) {
            if (!x.is_number()) throw BackendError("embedding vector entry is not a number");
            v.push_back(x.get<double>());
        }
        if (cfg_.dim != 0 && v.size() != cfg_.dim) {
            throw BackendError("embedding dimension " + std::to_string(v.size()) +
                               " does not match configured " + std::to_string(cfg_.dim));
        }
        vectors.push_back(std::move(v));
    }
    if (vectors.size() != texts.size()) {
        throw BackendError("embedding count mismatch: sent " + std::to_string(texts.size()) +
                           ", got " + std::to_string(vectors.size()));
    }
    return vectors;
}

double EmbeddingBackend::score_text(const std::string& a, const std::string& b) const {
    const std::string pair[] = {a, b};
    auto vectors = embed(pair);
    if (vectors[0].size() != vectors[1].size()) {
        throw BackendError("embedding service returned mismatched dimensions");
    }
    return score_feature(vectors[0], vectors[1]);
}

}  // namespace lifelog
