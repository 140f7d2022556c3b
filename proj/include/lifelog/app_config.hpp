#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "lifelog/retrieval.hpp"

namespace lifelog {

/// One configuration source: string values by key.
using ConfigLayer = std::map<std::string, std::string>;

/// `key = value` lines, '#' comments, blank lines ignored.
/// Throws ConfigError on malformed lines (with line number).
ConfigLayer parse_config_file(const std::string& path);
ConfigLayer parse_config_text(const std::string& text);

/// Resolved application settings. Precedence: flags > environment >
/// config file > defaults.
struct AppSettings {
    std::string bank_path;
    std::string gen_url;
    std::string gen_key;
    std::string gen_model = "gpt-4o";
    RetrievalConfig retrieval;
    std::string log_level = "info";
    size_t mock_char_limit = 8192;

    /// `env` maps LIFELOG_* variable names to values (injectable in tests).
    using EnvGetter = std::function<std::optional<std::string>(const std::string&)>;

    static AppSettings resolve(const ConfigLayer& flags, const EnvGetter& env,
                               const ConfigLayer& file);
    /// resolve() with the process environment.
    static AppSettings resolve_with_process_env(const ConfigLayer& flags, const ConfigLayer& file);
};

}  // namespace lifelog
