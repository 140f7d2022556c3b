#include <doctest.h>

#include "lifelog/app_config.hpp"
#include "lifelog/errors.hpp"

using namespace lifelog;

namespace {

AppSettings::EnvGetter env_from(ConfigLayer values) {
    return [values = std::move(values)](const std::string& name) -> std::optional<std::string> {
        auto it = values.find(name);
        if (it == values.end()) return std::nullopt;
        return it->second;
    };
}

}  // namespace

TEST_SUITE("app_config") {
    TEST_CASE("config text parsing") {
        const ConfigLayer layer = parse_config_text(
            "# lifelog settings\n"
            "bank = /tmp/bank.jsonl\n"
            "lambda=0.5   # inline comment\n"
            "\n"
            "top_k = 5\n");
        CHECK(layer.at("bank") == "/tmp/bank.jsonl");
        CHECK(layer.at("lambda") == "0.5");
        CHECK(layer.at("top_k") == "5");
        CHECK_THROWS_AS(parse_config_text("no equals sign here\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("= value without key\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_file("/nonexistent/config"), IoError);
    }

    TEST_CASE("defaults hold when no source provides a value") {
        const AppSettings s = AppSettings::resolve({}, env_from({}), {});
        CHECK(s.bank_path.empty());
        CHECK(s.gen_model == "gpt-4o");
        CHECK(s.retrieval.lambda == 0.0);
        CHECK(s.retrieval.top_k == 3);
        CHECK(s.retrieval.days_to_expand == 1);
        CHECK(s.retrieval.hours_to_expand == 2);
        CHECK(s.retrieval.fallback_threshold == 0.05);
        CHECK(s.retrieval.causal);
        CHECK(s.log_level == "info");
    }

    TEST_CASE("precedence: flags > environment > config file > defaults") {
        const ConfigLayer file{{"bank", "file-bank"},
                               {"top_k", "7"},
                               {"lambda", "0.9"},
                               {"gen_model", "file-model"}};
        const auto env = env_from({{"LIFELOG_BANK", "env-bank"},
                                   {"LIFELOG_GEN_URL", "http://env"},
                                   {"LIFELOG_GEN_KEY", "env-key"}});
        const ConfigLayer flags{{"bank", "flag-bank"}, {"top_k", "9"}};

        const AppSettings s = AppSettings::resolve(flags, env, file);
        CHECK(s.bank_path == "flag-bank");        // flag beats env and file
        CHECK(s.retrieval.top_k == 9);            // flag beats file
        CHECK(s.gen_url == "http://env");         // env beats absent flag
        CHECK(s.gen_key == "env-key");
        CHECK(s.retrieval.lambda == 0.9);         // file beats default
        CHECK(s.gen_model == "file-model");
        CHECK(s.retrieval.hours_to_expand == 2);  // default survives

        // without the flag layer the env wins, then the file
        const AppSettings t = AppSettings::resolve({}, env, file);
        CHECK(t.bank_path == "env-bank");
        CHECK(t.retrieval.top_k == 7);
    }

    TEST_CASE("typed values are validated") {
        CHECK_THROWS_AS(AppSettings::resolve({{"lambda", "abc"}}, env_from({}), {}), ConfigError);
        CHECK_THROWS_AS(AppSettings::resolve({{"top_k", "2.5"}}, env_from({}), {}), ConfigError);
        CHECK_THROWS_AS(AppSettings::resolve({{"causal", "maybe"}}, env_from({}), {}), ConfigError);
        CHECK_THROWS_AS(AppSettings::resolve({{"top_k", "0"}}, env_from({}), {}), ConfigError);
        CHECK_THROWS_AS(AppSettings::resolve({{"mock_char_limit", "-3"}}, env_from({}), {}),
                        ConfigError);
        const AppSettings ok =
            AppSettings::resolve({{"causal", "off"}, {"lambda", "1.5"}}, env_from({}), {});
        CHECK_FALSE(ok.retrieval.causal);
        CHECK(ok.retrieval.lambda == 1.5);
    }
}
