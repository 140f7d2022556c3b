#include "lifelog/app_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lifelog/errors.hpp"

namespace lifelog {
namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigLayer parse_config_text(const std::string& text) {
    ConfigLayer layer;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const size_t eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + trimmed + "'");
        }
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        layer[key] = value;
    }
    return layer;
}

ConfigLayer parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

std::optional<std::string> pick(const std::string& key, const ConfigLayer& flags,
                                const AppSettings::EnvGetter& env, const std::string& env_name,
                                const ConfigLayer& file) {
    if (auto it = flags.find(key); it != flags.end()) return it->second;
    if (env && !env_name.empty()) {
        if (auto v = env(env_name)) return v;
    }
    if (auto it = file.find(key); it != file.end()) return it->second;
    return std::nullopt;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config '" + key + "': expected a number, got '" + value + "'");
    }
}

int to_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        int i = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config '" + key + "': expected an integer, got '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config '" + key + "': expected a boolean, got '" + value + "'");
}

}  // namespace

AppSettings AppSettings::resolve(const ConfigLayer& flags, const EnvGetter& env,
                                 const ConfigLayer& file) {
    AppSettings s;
    auto get = [&](const std::string& key, const std::string& env_name) {
        return pick(key, flags, env, env_name, file);
    };

    if (auto v = get("bank", "LIFELOG_BANK")) s.bank_path = *v;
    if (auto v = get("gen_url", "LIFELOG_GEN_URL")) s.gen_url = *v;
    if (auto v = get("gen_key", "LIFELOG_GEN_KEY")) s.gen_key = *v;
    if (auto v = get("gen_model", "")) s.gen_model = *v;
    if (auto v = get("lambda", "")) s.retrieval.lambda = to_double("lambda", *v);
    if (auto v = get("top_k", "")) s.retrieval.top_k = to_int("top_k", *v);
    if (auto v = get("days_to_expand", "")) s.retrieval.days_to_expand = to_int("days_to_expand", *v);
    if (auto v = get("hours_to_expand", "")) {
        s.retrieval.hours_to_expand = to_int("hours_to_expand", *v);
    }
    if (auto v = get("fallback_threshold", "")) {
        s.retrieval.fallback_threshold = to_double("fallback_threshold", *v);
    }
    if (auto v = get("causal", "")) s.retrieval.causal = to_bool("causal", *v);
    if (auto v = get("log_level", "")) s.log_level = *v;
    if (auto v = get("mock_char_limit", "")) {
        const int limit = to_int("mock_char_limit", *v);
        if (limit < 1) throw ConfigError("config 'mock_char_limit': must be positive");
        s.mock_char_limit = static_cast<size_t>(limit);
    }
    try {
        s.retrieval.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid retrieval settings: ") + e.what());
    }
    return s;
}

AppSettings AppSettings::resolve_with_process_env(const ConfigLayer& flags,
                                                  const ConfigLayer& file) {
    return resolve(
        flags,
        [](const std::string& name) -> std::optional<std::string> {
            const char* v = std::getenv(name.c_str());
            if (!v) return std::nullopt;
            return std::string(v);
        },
        file);
}

}  // namespace lifelog
