#include <doctest.h>

#include <atomic>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <thread>

#include "lifelog/errors.hpp"
#include "lifelog/generator.hpp"
#include "lifelog/similarity.hpp"

using namespace lifelog;

namespace {

/// Local HTTP server fixture bound to an ephemeral port.
struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit LocalServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }

    ~LocalServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

Prompt summary_prompt(std::vector<std::string> payload) {
    Prompt p;
    p.kind = PromptKind::summarize_hour;
    p.system_text = "sys";
    p.user_text = "user";
    p.payload = std::move(payload);
    return p;
}

}  // namespace

TEST_SUITE("generator") {
    TEST_CASE("mock summaries concatenate chronologically and deterministically") {
        MockGenerator mock;
        const Prompt p = summary_prompt({"first", "second", "third"});
        CHECK(mock.complete(p) == "first second third");
        CHECK(mock.complete(p) == mock.complete(p));
    }

    TEST_CASE("mock truncation respects the configured limit and UTF-8") {
        MockGenerator::Options opts;
        opts.char_limit = 9;
        MockGenerator mock(opts);
        CHECK(mock.complete(summary_prompt({"123456", "789abc"})) == "123456 78");
        // multibyte boundary: the two-byte é is never split
        MockGenerator::Options tight;
        tight.char_limit = 5;
        MockGenerator tight_mock(tight);
        CHECK(tight_mock.complete(summary_prompt({"ab\xC3\xA9zzz"})) == "ab\xC3\xA9");
        CHECK(truncate_utf8("abc", 10) == "abc");
    }

    TEST_CASE("mock merge uses the merge joiner") {
        MockGenerator mock;
        Prompt p = summary_prompt({"picks up cup", "drinks water"});
        p.kind = PromptKind::merge;
        CHECK(mock.complete(p) == "picks up cup; drinks water");
    }

    TEST_CASE("mock answers with the fixed letter") {
        MockGenerator mock;
        Prompt p;
        p.kind = PromptKind::answer_mcq;
        CHECK(mock.complete(p) == "A");
    }

    TEST_CASE("scripted client replays and fails on demand") {
        ScriptedClient client({"one", "<fail>", "two"});
        Prompt p;
        CHECK(client.complete(p) == "one");
        CHECK_THROWS_AS(client.complete(p), GeneratorError);
        CHECK(client.complete(p) == "two");
        CHECK(client.complete(p) == "two");  // repeats the last entry
        CHECK(client.calls() == 4);
    }

    TEST_CASE("http client round-trip against a local endpoint") {
        LocalServer fixture;
        nlohmann::json captured;
        fixture.server.Post("/v1/chat/completions",
                            [&](const httplib::Request& req, httplib::Response& res) {
                                captured = nlohmann::json::parse(req.body);
                                nlohmann::json reply{
                                    {"choices",
                                     {{{"message", {{"content", "B is my answer"}}}}}}};
                                res.set_content(reply.dump(), "application/json");
                            });
        fixture.start();

        HttpGeneratorClient::Config cfg;
        cfg.base_url = fixture.url();
        cfg.model_name = "test-model";
        cfg.api_key = "sekrit";
        HttpGeneratorClient client(cfg);

        Prompt p;
        p.system_text = "be brief";
        p.user_text = "pick a letter";
        p.max_answer_tokens = 7;
        CHECK(client.complete(p) == "B is my answer");
        CHECK(captured["model"] == "test-model");
        CHECK(captured["max_tokens"] == 7);
        REQUIRE(captured["messages"].size() == 2);
        CHECK(captured["messages"][0]["role"] == "system");
        CHECK(captured["messages"][0]["content"] == "be brief");
        CHECK(captured["messages"][1]["role"] == "user");
    }

    TEST_CASE("http client retries 5xx with backoff, then succeeds") {
        LocalServer fixture;
        std::atomic<int> hits{0};
        fixture.server.Post("/v1/chat/completions",
                            [&](const httplib::Request&, httplib::Response& res) {
                                if (hits.fetch_add(1) < 2) {
                                    res.status = 503;
                                    return;
                                }
                                nlohmann::json reply{
                                    {"choices", {{{"message", {{"content", "ok"}}}}}}};
                                res.set_content(reply.dump(), "application/json");
                            });
        fixture.start();

        HttpGeneratorClient::Config cfg;
        cfg.base_url = fixture.url();
        cfg.max_retries = 2;
        cfg.backoff_base_ms = 1;
        HttpGeneratorClient client(cfg);
        CHECK(client.complete(Prompt{}) == "ok");
        CHECK(hits.load() == 3);
    }

    TEST_CASE("http client never retries a 4xx") {
        LocalServer fixture;
        std::atomic<int> hits{0};
        fixture.server.Post("/v1/chat/completions",
                            [&](const httplib::Request&, httplib::Response& res) {
                                hits.fetch_add(1);
                                res.status = 400;
                                res.set_content("bad request", "text/plain");
                            });
        fixture.start();

        HttpGeneratorClient::Config cfg;
        cfg.base_url = fixture.url();
        cfg.max_retries = 5;
        cfg.backoff_base_ms = 1;
        HttpGeneratorClient client(cfg);
        CHECK_THROWS_AS(client.complete(Prompt{}), GeneratorError);
        CHECK(hits.load() == 1);
    }

    TEST_CASE("http client exhausts retries on persistent failure") {
        HttpGeneratorClient::Config cfg;
        cfg.base_url = "http://127.0.0.1:1";  // nothing listens here
        cfg.max_retries = 1;
        cfg.backoff_base_ms = 1;
        cfg.timeout_ms = 200;
        HttpGeneratorClient client(cfg);
        CHECK_THROWS_AS(client.complete(Prompt{}), GeneratorError);
    }

    TEST_CASE("configurable response text path") {
        LocalServer fixture;
        fixture.server.Post("/generate", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"output": {"text": "nested reply"}})", "application/json");
        });
        fixture.start();

        HttpGeneratorClient::Config cfg;
        cfg.base_url = fixture.url();
        cfg.path = "/generate";
        cfg.response_text_path = "output/text";
        HttpGeneratorClient client(cfg);
        CHECK(client.complete(Prompt{}) == "nested reply");

        cfg.response_text_path = "output/missing";
        HttpGeneratorClient wrong(cfg);
        CHECK_THROWS_AS(wrong.complete(Prompt{}), GeneratorError);
    }

    TEST_CASE("embedding backend speaks the wire protocol") {
        LocalServer fixture;
        nlohmann::json captured;
        std::string auth_header;
        fixture.server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
            captured = nlohmann::json::parse(req.body);
            auth_header = req.get_header_value("Authorization");
            nlohmann::json reply{{"vectors", {{1.0, 0.0}, {0.0, 1.0}}}};
            res.set_content(reply.dump(), "application/json");
        });
        fixture.start();

        EmbeddingBackend::Config cfg;
        cfg.base_url = fixture.url();
        cfg.auth_token = "tok";
        cfg.dim = 2;
        EmbeddingBackend backend(cfg);
        CHECK(backend.kind() == BackendKind::embedding_client);

        const double score = backend.score_text("alpha", "beta");
        CHECK(score == doctest::Approx(0.5));  // orthogonal embeddings
        CHECK(captured["input"][0] == "alpha");
        CHECK(captured["input"][1] == "beta");
        CHECK(auth_header == "Bearer tok");
    }

    TEST_CASE("embedding backend surfaces protocol violations") {
        LocalServer fixture;
        fixture.server.Post("/embed", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"vectors": [[1.0, 0.0]]})", "application/json");  // one, not two
        });
        fixture.start();

        EmbeddingBackend::Config cfg;
        cfg.base_url = fixture.url();
        EmbeddingBackend backend(cfg);
        CHECK_THROWS_AS(backend.score_text("a", "b"), BackendError);

        EmbeddingBackend::Config dead;
        dead.base_url = "http://127.0.0.1:1";
        dead.timeout_ms = 200;
        EmbeddingBackend unreachable(dead);
        CHECK_THROWS_AS(unreachable.score_text("a", "b"), BackendError);
    }
}
