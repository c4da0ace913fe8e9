#include <doctest.h>

#include "scope/core/situations.hpp"
#include "scope/core/tools.hpp"
#include "scope/core/transcript.hpp"
#include "scope/judge/judge.hpp"
#include "scope/llm/prompts.hpp"
#include "scope/sim/sim.hpp"

using namespace scope;

namespace {

sim::Cues cues(const std::string& transcript) { return sim::detect(parse_transcript(transcript)); }

const char* kAsk = "USER: What's the weather in Oslo?\nTOOL_CALL CurrentWeather {\"location\":\"Oslo\"}:\n";

}  // namespace

TEST_CASE("cue detection") {
    SUBCASE("clean run") {
        const auto c = cues(std::string(kAsk) +
                            "TOOL_RESULT CurrentWeather: {\"temperature\":12}\n"
                            "AGENT: It's 12 degrees in Oslo.\nUSER: Thanks!\n");
        CHECK(c.tool_called);
        CHECK_FALSE(c.tool_error);
        CHECK(c.user_thanks);
        CHECK_FALSE(c.agent_fault());
    }
    SUBCASE("misreported number") {
        const auto c = cues(std::string(kAsk) +
                            "TOOL_RESULT CurrentWeather: {\"temperature\":12}\nAGENT: It's 19 degrees in Oslo.\n");
        CHECK(c.misreport);
        CHECK(c.agent_fault());
    }
    SUBCASE("gave up after an error") {
        const auto c = cues(std::string(kAsk) +
                            "TOOL_RESULT CurrentWeather: {\"error\":\"service unavailable\"}\n"
                            "AGENT: Sorry, I'm unable to get the weather.\n");
        CHECK(c.tool_error);
        CHECK(c.error_ack);
        CHECK(c.gave_up);
    }
    SUBCASE("error handled with an alternative") {
        const auto c = cues(std::string(kAsk) +
                            "TOOL_RESULT CurrentWeather: {\"error\":\"timeout\"}\n"
                            "AGENT: Sorry, the service is unavailable. You could try again later.\n");
        CHECK(c.alternative);
        CHECK_FALSE(c.gave_up);
        CHECK_FALSE(c.agent_fault());
    }
    SUBCASE("answer without a call") {
        const auto c = cues("USER: What's the weather in Oslo?\nAGENT: It's sunny.\nUSER: That's not what I asked.\n");
        CHECK(c.claims_without_call);
        CHECK(c.user_frustrated);
    }
    SUBCASE("repeated identical calls") {
        const auto c = cues(std::string(kAsk) + "TOOL_CALL CurrentWeather {\"location\":\"Oslo\"}:\n" +
                            "TOOL_RESULT CurrentWeather: {\"temperature\":12}\nAGENT: It's 12 degrees.\n");
        CHECK(c.redundant);
    }
}

TEST_CASE("simulated conversations parse and pass the simulated judge") {
    Gateway gw(std::make_shared<sim::SimulatedProvider>());
    const auto catalog = ToolCatalog::builtin();
    const auto cfg = StageConfigs::defaults("sim-1").at(Stage::JudgeFilter);
    int checked = 0;
    for (const auto& group : tool_groups()) {
        std::vector<std::string> tools;
        for (const auto& t : catalog.group(group)) tools.push_back(t.name);
        for (const auto& s : situation_catalog()) {
            for (std::uint64_t variant = 0; variant < 2; ++variant) {
                Conversation c;
                c.id = group + "-" + situation_slug(s.id) + "-" + std::to_string(variant);
                c.turns = sim::generate_conversation(s.id, tools, {"Ada", "Noor"}, variant);
                c.labels = s.expected_labels;
                c.situation_id = s.id;
                c.tool_group = group;
                REQUIRE_FALSE(c.turns.empty());
                CHECK(parse_transcript(render_transcript(c.turns)) == c.turns);
                for (const auto& t : c.turns)
                    if (t.tool_name) CHECK(std::find(tools.begin(), tools.end(), *t.tool_name) != tools.end());
                const auto v = judge::judge(gw, cfg, c, s);
                CHECK_MESSAGE(v.valid, c.id << ": " << v.rationale);
                ++checked;
            }
        }
    }
    CHECK(checked == static_cast<int>(tool_groups().size() * situation_catalog().size() * 2));
}

TEST_CASE("simulated provider rejects what it cannot answer") {
    sim::SimulatedProvider p;
    LlmRequest r;
    r.template_id = "no.such.template";
    CHECK_THROWS_AS(p.complete(r), ProviderRejected);
    CHECK_THROWS_AS(sim::generate_conversation("No Such Situation", {"CurrentWeather"}, {"A", "B"}, 0), Error);
    CHECK_THROWS_AS(sim::generate_conversation("Correct", {}, {"A", "B"}, 0), ConfigError);
}

TEST_CASE("simulated provider is a pure function of the request") {
    Gateway a(std::make_shared<sim::SimulatedProvider>());
    Gateway b(std::make_shared<sim::SimulatedProvider>());
    const auto t = prompts::get(prompts::kNames);
    const auto cfg = StageConfigs::defaults("sim-1").at(Stage::NameGeneration);
    const Bindings bind{{"count", "5"}, {"variation", "k"}};
    CHECK(a.complete(t, bind, cfg) == b.complete(t, bind, cfg));
}
