#include "lifelog/similarity.hpp"

#include <cmath>
#include <mutex>

#include "lifelog/errors.hpp"

namespace lifelog {
namespace {

// Sorted-merge dot product over the common keys. The iteration order is
// canonical (map key order), so the result is bit-identical regardless of
// argument order.
double sparse_dot(const TermVector& a, const TermVector& b) {
    double dot = 0.0;
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    return dot;
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

double LexicalBackend::idf(const std::string& token) const {
    auto it = doc_freq_.find(token);
    const size_t df = it == doc_freq_.end() ? 1 : it->second;
    return std::log(1.0 + static_cast<double>(corpus_size_) / static_cast<double>(df));
}

size_t LexicalBackend::document_frequency(const std::string& token) const {
    auto it = doc_freq_.find(token);
    return it == doc_freq_.end() ? 0 : it->second;
}

std::shared_ptr<const TermVector> LexicalBackend::vector_for(const std::string& text) const {
    {
        std::shared_lock lock(cache_->mutex);
        auto it = cache_->entries.find(text);
        if (it != cache_->entries.end()) return it->second;
    }
    auto vec = std::make_shared<TermVector>();
    for (const std::string& token : tokenize(text, stopwords_)) {
        vec->entries[token] += 1.0;
    }
    double sq = 0.0;
    for (auto& [token, weight] : vec->entries) {
        weight *= idf(token);
        sq += weight * weight;
    }
    vec->norm = std::sqrt(sq);

    std::unique_lock lock(cache_->mutex);
    auto [it, _] = cache_->entries.emplace(text, std::move(vec));
    return it->second;
}

double LexicalBackend::score_text(const std::string& a, const std::string& b) const {
    const auto va = vector_for(a);
    const auto vb = vector_for(b);
    if (va->empty() || vb->empty()) return 0.0;
    if (va == vb) return 1.0;  // identical texts share a cache entry
    return clamp01(sparse_dot(*va, *vb) / (va->norm * vb->norm));
}

LexicalBackend fit_corpus(std::span<const std::string> captions, const StopwordList& stopwords) {
    if (captions.empty()) throw EmptyCorpusError("fit_corpus: empty caption corpus");
    LexicalBackend backend;
    backend.stopwords_ = stopwords;
    backend.corpus_size_ = captions.size();
    std::unordered_set<std::string> seen;
    for (const std::string& caption : captions) {
        seen.clear();
        for (std::string& token : tokenize(caption, stopwords)) {
            if (seen.insert(token).second) backend.doc_freq_[token] += 1;
        }
    }
    return backend;
}

double score_feature(std::span<const double> q_vec, std::span<const double> c_vec) {
    if (q_vec.size() != c_vec.size()) {
        throw DimensionError("score_feature: dimension mismatch (" +
                             std::to_string(q_vec.size()) + " vs " +
                             std::to_string(c_vec.size()) + ")");
    }
    double dot = 0.0, qq = 0.0, cc = 0.0;
    for (size_t i = 0; i < q_vec.size(); ++i) {
        if (!std::isfinite(q_vec[i]) || !std::isfinite(c_vec[i])) {
            throw DimensionError("score_feature: non-finite vector entry");
        }
        dot += q_vec[i] * c_vec[i];
        qq += q_vec[i] * q_vec[i];
        cc += c_vec[i] * c_vec[i];
    }
    if (qq == 0.0 || cc == 0.0) return 0.5;  // zero vector carries no signal
    const double cosine = dot / (std::sqrt(qq) * std::sqrt(cc));
    return clamp01(0.5 * (1.0 + cosine));
}

}  // namespace lifelog
