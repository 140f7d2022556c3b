#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lifelog {

/// Shipped stopword list. Tokenization changes retrieval ranking, so the
/// list is versioned and pinned; callers may load their own.
struct StopwordList {
    std::string version;
    std::unordered_set<std::string> words;

    bool contains(const std::string& token) const { return words.count(token) > 0; }

    /// The built-in English list ("en-v1").
    static const StopwordList& english_v1();
    /// Empty list (keeps every token).
    static StopwordList none();
    /// One token per line, '#' comments allowed.
    static StopwordList from_file(const std::string& path, std::string version_tag);
};

/// Lowercased word tokens in input order. UTF-8 in, UTF-8 out. Non-ASCII
/// text goes through a self-contained canonical-composition pass (Latin
/// diacritics and Hangul jamo) so equal-looking inputs tokenize equally;
/// the pass is a fixed subset of NFC, frozen by a golden-file test.
std::vector<std::string> tokenize(const std::string& text);

/// As above, with stopwords removed.
std::vector<std::string> tokenize(const std::string& text, const StopwordList& stopwords);

/// Sparse tf-idf vector with its Euclidean norm precomputed.
struct TermVector {
    std::map<std::string, double> entries;  // token -> weight, canonical order
    double norm = 0.0;

    bool empty() const { return entries.empty(); }
};

enum class BackendKind { lexical_tfidf, embedding_client };

/// Text-similarity scorer used by retrieval. Immutable once constructed;
/// safe for unlimited concurrent scoring.
class SimilarityBackend {
public:
    virtual ~SimilarityBackend() = default;
    virtual BackendKind kind() const = 0;
    /// Similarity of two texts in [0, 1]; symmetric; 1 for identical
    /// non-empty token sets.
    virtual double score_text(const std::string& a, const std::string& b) const = 0;
};

/// Deterministic tf-idf cosine backend. idf(t) = ln(1 + D/df(t)); tokens
/// unseen at fit time are weighted as df = 1.
class LexicalBackend final : public SimilarityBackend {
public:
    BackendKind kind() const override { return BackendKind::lexical_tfidf; }
    double score_text(const std::string& a, const std::string& b) const override;

    double idf(const std::string& token) const;
    size_t corpus_size() const { return corpus_size_; }
    size_t document_frequency(const std::string& token) const;
    const StopwordList& stopwords() const { return stopwords_; }

    /// tf-idf vector of `text`. Results are memoized by text content, so
    /// repeated scoring of a fixed corpus costs one tokenization per text.
    std::shared_ptr<const TermVector> vector_for(const std::string& text) const;

private:
    friend LexicalBackend fit_corpus(std::span<const std::string>, const StopwordList&);

    std::unordered_map<std::string, size_t> doc_freq_;
    size_t corpus_size_ = 0;
    StopwordList stopwords_;

    // Memo cache; copies of a backend share it (entries depend only on the
    // immutable df table).
    struct Cache {
        std::shared_mutex mutex;
        std::unordered_map<std::string, std::shared_ptr<const TermVector>> entries;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Builds the document-frequency table over tokenized captions.
/// Throws EmptyCorpusError when `captions` is empty.
LexicalBackend fit_corpus(std::span<const std::string> captions,
                          const StopwordList& stopwords = StopwordList::english_v1());

/// Cosine of two equal-length vectors mapped to [0, 1] via (1 + cos)/2.
/// A zero vector on either side yields the neutral value 0.5.
/// Throws DimensionError on length mismatch or non-finite entries.
double score_feature(std::span<const double> q_vec, std::span<const double> c_vec);

/// HTTP embedding service backend. Protocol: POST `path` with body
/// {"input": [texts]}, response {"vectors": [[floats]]}.
class EmbeddingBackend final : public SimilarityBackend {
public:
    struct Config {
        std::string base_url;       // e.g. "http://localhost:8080"
        std::string path = "/embed";
        std::string auth_token;     // sent as "Authorization: Bearer <token>" when set
        size_t dim = 0;             // expected vector length, 0 = accept any
        int timeout_ms = 10000;
    };

    explicit EmbeddingBackend(Config cfg) : cfg_(std::move(cfg)) {}

    BackendKind kind() const override { return BackendKind::embedding_client; }
    /// (1 + cosine of the two embeddings)/2. Throws BackendError on
    /// transport or protocol failure.
    double score_text(const std::string& a, const std::string& b) const override;

    /// One embedding per input text, in order.
    std::vector<std::vector<double>> embed(std::span<const std::string> texts) const;

    const Config& config() const { return cfg_; }

private:
    Config cfg_;
};

}  // namespace lifelog
