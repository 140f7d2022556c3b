#include <doctest.h>

#include <fstream>
#include <sstream>

#include "lifelog/similarity.hpp"

using namespace lifelog;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE("tokenize") {
    TEST_CASE("stopword removal per the shipped list") {
        const auto tokens = tokenize("I walked to my room", StopwordList::english_v1());
        CHECK(tokens == std::vector<std::string>{"walked", "room"});
    }

    TEST_CASE("question keywords keep content words") {
        const auto tokens =
            tokenize("When did we last eat pizza together?", StopwordList::english_v1());
        CHECK(tokens == std::vector<std::string>{"last", "eat", "pizza", "together"});
    }

    TEST_CASE("empty input") {
        CHECK(tokenize("").empty());
        CHECK(tokenize("", StopwordList::english_v1()).empty());
        CHECK(tokenize("   \t\n ").empty());
    }

    TEST_CASE("lowercasing and punctuation splits") {
        CHECK(tokenize("Hello, WORLD!") == std::vector<std::string>{"hello", "world"});
        CHECK(tokenize("don't") == std::vector<std::string>{"don", "t"});
        CHECK(tokenize("x2 alpha-beta") == std::vector<std::string>{"x2", "alpha", "beta"});
    }

    TEST_CASE("combining marks compose to precomposed letters") {
        // "cafe" + U+0301 on the e (decomposed) matches the precomposed form
        const std::string decomposed = "cafe\xCC\x81";
        const std::string precomposed = "caf\xC3\xA9";
        CHECK(tokenize(decomposed) == tokenize(precomposed));
        // Uppercase pre-composed also folds to the same token
        CHECK(tokenize("CAF\xC3\x89") == tokenize(precomposed));
    }

    TEST_CASE("mixed-script tokens are stable (frozen golden file)") {
        const std::string dir = LIFELOG_TEST_DATA_DIR;
        const std::string input = slurp(dir + "/mixed_script_input.txt");
        const std::string expected = slurp(dir + "/mixed_script_tokens.txt");
        std::string got;
        for (const std::string& token : tokenize(input)) {
            got += token;
            got += '\n';
        }
        CHECK(got == expected);
    }

    TEST_CASE("stopword file loading") {
        const std::string dir = LIFELOG_TEST_DATA_DIR;
        const StopwordList list = StopwordList::from_file(dir + "/stopwords_tiny.txt", "tiny");
        CHECK(list.version == "tiny");
        CHECK(list.contains("foo"));
        CHECK(list.contains("bar"));
        CHECK_FALSE(list.contains("baz"));
        CHECK(tokenize("foo baz bar", list) == std::vector<std::string>{"baz"});
    }

    TEST_CASE("shipped list is versioned") {
        CHECK(StopwordList::english_v1().version == "en-v1");
        CHECK(StopwordList::none().words.empty());
    }
}
