#include <doctest.h>

#include <atomic>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "scope/errors.hpp"
#include "scope/llm/gateway.hpp"
#include "scope/llm/prompts.hpp"
#include "support/testing.hpp"

using namespace scope;
namespace ts = testing_support;
using namespace std::chrono_literals;

namespace {

GatewayOptions no_sleep(int attempts = 3, std::size_t in_flight = 4) {
    GatewayOptions o;
    o.retry.attempts = attempts;
    o.max_in_flight = in_flight;
    o.sleep = [](std::chrono::milliseconds) {};
    return o;
}

class FlakyProvider : public Provider {
public:
    explicit FlakyProvider(int failures) : failures_(failures) {}
    std::string complete(const LlmRequest& r) override {
        ++calls;
        if (calls <= failures_) throw TransportError("timeout");
        return "ok:" + r.template_id;
    }
    std::string describe() const override { return "flaky"; }
    int calls = 0;

private:
    int failures_;
};

}  // namespace

TEST_CASE("template rendering") {
    const auto t = PromptTemplate::make("t", "Hello {name}");
    CHECK(render(t, {{"name", "A"}}) == "Hello A");
    CHECK_THROWS_AS(render(t, {}), ConfigError);
    CHECK(render(t, {{"name", "{name} {other}"}}) == "Hello {name} {other}");
}

TEST_CASE("every shipped template renders with its own placeholders") {
    for (const auto& t : prompts::all()) {
        Bindings b;
        for (const auto& p : t.required_placeholders) b[p] = "x";
        CHECK_NOTHROW(render(t, b));
    }
    CHECK_THROWS_AS(prompts::get("nope"), ConfigError);
}

TEST_CASE("fingerprint depends on template and bindings only") {
    const auto t = PromptTemplate::make("t", "Hi {a}");
    GenerationConfig hot;
    hot.temperature = 1.0;
    const auto r1 = make_request(t, {{"a", "1"}}, GenerationConfig{});
    const auto r2 = make_request(t, {{"a", "1"}}, hot);
    const auto r3 = make_request(t, {{"a", "2"}}, GenerationConfig{});
    CHECK(r1.fingerprint() == r2.fingerprint());
    CHECK(r1.fingerprint() != r3.fingerprint());
    CHECK(r1.fingerprint().rfind("t:", 0) == 0);
}

TEST_CASE("scripted mock") {
    const auto t = PromptTemplate::make("t", "Prompt {a}");
    const auto req = make_request(t, {{"a", "1"}}, GenerationConfig{});
    ScriptedMock mock;
    mock.add(req.fingerprint(), "canned");
    CHECK(mock.complete(req) == "canned");
    const auto miss = make_request(t, {{"a", "2"}}, GenerationConfig{});
    CHECK_THROWS_AS(mock.complete(miss), MockMiss);
    ScriptedMock echo(MissPolicy::Echo);
    CHECK(echo.complete(miss) == "Prompt 2");

    ts::TempDir dir;
    mock.save(dir / "m.json");
    const auto back = ScriptedMock::load(dir / "m.json");
    CHECK(back.script() == mock.script());
    CHECK(back.policy() == MissPolicy::Error);
    CHECK(back.serialize() == mock.serialize());
}

TEST_CASE("config validation") {
    GenerationConfig c;
    CHECK_NOTHROW(c.validate());
    c.temperature = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.top_p = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.max_tokens = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("stage defaults") {
    const auto s = StageConfigs::defaults("m");
    CHECK(s.at(Stage::ConversationGeneration).temperature == 1.0);
    CHECK(s.at(Stage::ConversationGeneration).top_p == doctest::Approx(0.99));
    CHECK(s.at(Stage::LabelEstimation).temperature == 0.0);
    CHECK(s.at(Stage::JudgeFilter).temperature == 0.0);
    CHECK(s.at(Stage::AreaDiscovery).model_id == "m");
}

TEST_CASE("transport failures are retried then exhausted") {
    SUBCASE("recovers") {
        auto p = std::make_shared<FlakyProvider>(2);
        std::vector<long long> waits;
        auto o = no_sleep(3);
        o.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d.count()); };
        Gateway gw(p, o);
        CHECK(gw.complete("hi", GenerationConfig{}) == "ok:raw");
        CHECK(p->calls == 3);
        CHECK(waits == std::vector<long long>{1000, 2000});
    }
    SUBCASE("exhausted") {
        auto p = std::make_shared<FlakyProvider>(10);
        Gateway gw(p, no_sleep(3));
        CHECK_THROWS_AS(gw.complete("hi", GenerationConfig{}), TransportExhausted);
        CHECK(p->calls == 3);
        const auto log = gw.log();
        REQUIRE(log.size() == 1);
        CHECK_FALSE(log[0].ok);
    }
}

TEST_CASE("provider rejection is not retried") {
    int calls = 0;
    auto p = std::make_shared<ts::CannedProvider>([&](const LlmRequest&) -> std::string {
        ++calls;
        throw ProviderRejected("400");
    });
    Gateway gw(p, no_sleep(3));
    CHECK_THROWS_AS(gw.complete("hi", GenerationConfig{}), ProviderRejected);
    CHECK(calls == 1);
}

TEST_CASE("in-flight bound and result order") {
    std::atomic<int> now{0}, peak{0};
    auto p = std::make_shared<ts::CannedProvider>([&](const LlmRequest& r) {
        const int n = ++now;
        int prev = peak.load();
        while (n > prev && !peak.compare_exchange_weak(prev, n)) {
        }
        std::this_thread::sleep_for(2ms);
        --now;
        return r.bindings.at("prompt");
    });
    Gateway gw(p, no_sleep(1, 3));
    std::vector<LlmRequest> reqs;
    for (int i = 0; i < 24; ++i) {
        const std::string s = std::to_string(i);
        reqs.push_back(LlmRequest{"raw", {{"prompt", s}}, s, GenerationConfig{}});
    }
    const auto out = gw.complete_many(reqs);
    for (int i = 0; i < 24; ++i) CHECK(out[i] == std::to_string(i));
    CHECK(peak.load() <= 3);
    const auto log = gw.log();
    CHECK(log.size() == 24);
    for (std::size_t i = 0; i < log.size(); ++i) CHECK(log[i].seq == i);
}

TEST_CASE("recorded script replays the same completions") {
    auto p = std::make_shared<ts::CannedProvider>([](const LlmRequest& r) { return "answer to " + r.prompt; });
    Gateway live(p, no_sleep());
    const auto t = PromptTemplate::make("t", "Q {a}");
    const std::string a = live.complete(t, {{"a", "1"}}, GenerationConfig{});
    const std::string b = live.complete(t, {{"a", "2"}}, GenerationConfig{});
    Gateway replay(std::make_shared<ScriptedMock>(live.recorded_script()), no_sleep());
    CHECK(replay.complete(t, {{"a", "1"}}, GenerationConfig{}) == a);
    CHECK(replay.complete(t, {{"a", "2"}}, GenerationConfig{}) == b);
    CHECK_THROWS_AS(replay.complete(t, {{"a", "3"}}, GenerationConfig{}), MockMiss);
}

TEST_CASE("remote provider wire format") {
    GenerationConfig c;
    c.temperature = 0.7;
    c.max_tokens = 12;
    const LlmRequest r{"raw", {{"prompt", "hi"}}, "hi", c};
    const json body = RemoteProvider::request_body(r, "m1");
    CHECK(body.at("model") == "m1");
    CHECK(body.at("messages").at(0).at("content") == "hi");
    CHECK(body.at("max_tokens") == 12);
    CHECK(RemoteProvider::parse_response(R"({"choices":[{"message":{"role":"assistant","content":"yo"}}]})") == "yo");
    CHECK_THROWS_AS(RemoteProvider::parse_response("{}"), ProviderRejected);
    CHECK_THROWS_AS(RemoteProvider(RemoteSettings{}), ConfigError);
}

TEST_CASE("remote provider against a local server") {
    httplib::Server server;
    std::atomic<int> flaky_hits{0};
    std::string seen_auth;
    server.Post("/ok/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        const auto body = json::parse(req.body);
        const std::string content = "echo: " + body.at("messages").at(0).at("content").get<std::string>();
        res.set_content(json{{"choices", {{{"message", {{"content", content}}}}}}}.dump(), "application/json");
    });
    server.Post("/busy/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++flaky_hits;
        res.status = 503;
    });
    server.Post("/bad/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.status = 401;
        res.set_content("no key", "text/plain");
    });
    server.Post("/slow/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(1500ms);
        res.set_content("{}", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto provider = [&](const std::string& prefix) {
        RemoteSettings s;
        s.url = "http://127.0.0.1:" + std::to_string(port) + prefix + "/v1/chat/completions";
        s.api_key = "k";
        s.model_id = "m";
        s.timeout = 1s;
        return std::make_shared<RemoteProvider>(s);
    };
    const LlmRequest r{"raw", {{"prompt", "ping"}}, "ping", GenerationConfig{}};

    CHECK(provider("/ok")->complete(r) == "echo: ping");
    CHECK(seen_auth == "Bearer k");
    CHECK_THROWS_AS(provider("/bad")->complete(r), ProviderRejected);
    CHECK_THROWS_AS(provider("/slow")->complete(r), TransportError);

    Gateway gw(provider("/busy"), no_sleep(3));
    CHECK_THROWS_AS(gw.complete(r), TransportExhausted);
    CHECK(flaky_hits.load() == 3);

    server.stop();
    th.join();
}
