#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lifelog {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A clip range collides with an existing clip of the same participant,
/// or SRT blocks overlap in time.
struct OverlapError : Error {
    using Error::Error;
};

/// A feature vector's length does not match the configured dimension.
struct DimensionError : Error {
    using Error::Error;
};

/// The language-model client failed. `windows` names the summary windows
/// that stayed stale when raised from rebuild_summaries.
struct GeneratorError : Error {
    std::vector<std::string> windows;
    explicit GeneratorError(const std::string& msg, std::vector<std::string> failed = {})
        : Error(msg), windows(std::move(failed)) {}
};

struct IoError : Error {
    using Error::Error;
};

/// Corrupt serialized input. `line` is 1-based, 0 when unknown.
struct FormatError : Error {
    size_t line = 0;
    FormatError(const std::string& msg, size_t line_no)
        : Error(line_no ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
};

struct EmptyCorpusError : Error {
    using Error::Error;
};

/// Embedding-client transport or protocol failure.
struct BackendError : Error {
    using Error::Error;
};

/// Retrieval touched a summary window that has not been rebuilt.
struct StaleIndexError : Error {
    using Error::Error;
};

/// No answer letter could be extracted from a generator reply.
struct ParseError : Error {
    using Error::Error;
};

/// QA file violates the schema. `pointer` is a JSON pointer to the field.
struct SchemaError : Error {
    std::string pointer;
    SchemaError(const std::string& msg, std::string ptr)
        : Error(msg + (ptr.empty() ? "" : " at " + ptr)), pointer(std::move(ptr)) {}
};

/// compare_reports was given reports over different QA sets.
struct MismatchError : Error {
    using Error::Error;
};

/// A SynthSpec cannot be realized (e.g. certificates longer than the timeline).
struct InfeasibleSpecError : Error {
    using Error::Error;
};

/// Planted tokens are not unique in the generated bank.
struct UniquenessError : Error {
    std::vector<std::string> tokens;
    explicit UniquenessError(const std::string& msg, std::vector<std::string> offending = {})
        : Error(msg), tokens(std::move(offending)) {}
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace lifelog
