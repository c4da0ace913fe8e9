#include <doctest.h>

#include <cmath>

#include "scope/judge/judge.hpp"
#include "support/testing.hpp"

using namespace scope;
using namespace scope::judge;
namespace ts = testing_support;

namespace {

JudgeVerdict verdict(const std::string& id, bool valid) { return JudgeVerdict{id, valid, "", "m"}; }

Dataset fixture() { return load_dataset((ts::data_dir() / "trace" / "trace_fixture.jsonl").string(), true); }

}  // namespace

TEST_CASE("verdict grammar") {
    CHECK(parse_verdict("VALID \xE2\x80\x94 matches case exactly") == std::pair<bool, std::string>{true, "matches case exactly"});
    CHECK(parse_verdict("INVALID - agent never errs").first == false);
    CHECK(parse_verdict("\n\n  VALID: fine").first == true);
    CHECK_THROWS_AS(parse_verdict("I think this conversation is fine."), UnparseableVerdict);
    CHECK_THROWS_AS(parse_verdict("VALIDATED"), UnparseableVerdict);
    CHECK_THROWS_AS(parse_verdict(""), UnparseableVerdict);
}

TEST_CASE("judge through the gateway") {
    const auto d = fixture();
    const auto& c = d.conversations.front();
    Gateway gw(std::make_shared<ts::CannedProvider>([](const LlmRequest&) { return std::string("INVALID - nope"); }));
    const auto v = judge::judge(gw, GenerationConfig{}, c, find_situation(c.situation_id));
    CHECK(v.conversation_id == c.id);
    CHECK_FALSE(v.valid);
    CHECK(v.rationale == "nope");
}

TEST_CASE("tier assembly") {
    const auto d = fixture();
    std::vector<std::pair<Conversation, bool>> human;
    std::vector<std::pair<Conversation, JudgeVerdict>> judged;
    for (const auto& c : d.conversations) {
        if (c.tier == Tier::Gold) human.emplace_back(c, true);
        else judged.emplace_back(c, verdict(c.id, true));
    }
    SUBCASE("gold plus silver") {
        const auto out = assemble_tiers(human, judged);
        const auto n = count(out);
        CHECK(n.total == 516);
        CHECK(n.by_tier.at(Tier::Gold) == 141);
        CHECK(n.by_tier.at(Tier::Silver) == 375);
    }
    SUBCASE("all judged invalid") {
        for (auto& [c, v] : judged) v.valid = false;
        human.back().second = false;
        const auto out = assemble_tiers(human, judged);
        CHECK(out.size() == 140);
        for (const auto& c : out.conversations) CHECK(c.tier == Tier::Gold);
    }
    SUBCASE("overlap") {
        judged.emplace_back(human.front().first, verdict(human.front().first.id, true));
        CHECK_THROWS_AS(assemble_tiers(human, judged), ValidationError);
    }
}

TEST_CASE("judge precision and recall") {
    std::vector<JudgeVerdict> vs;
    std::map<std::string, bool> truth;
    for (int i = 0; i < 12; ++i) {
        const std::string id = "c" + std::to_string(i);
        vs.push_back(verdict(id, i < 10));
        truth[id] = i < 9 || i == 11;
    }
    CHECK(judge_precision(vs, truth) == doctest::Approx(0.9));
    CHECK(*judge_recall(vs, truth) == doctest::Approx(0.9));

    for (auto& v : vs) v.valid = false;
    CHECK_THROWS_AS(judge_precision(vs, truth), NoAcceptedItems);
    truth.erase("c0");
    vs[0].valid = true;
    CHECK_THROWS_AS(judge_precision(vs, truth), ConfigError);
    std::map<std::string, bool> none{{"a", false}};
    CHECK_FALSE(judge_recall({verdict("a", true)}, none).has_value());
}

TEST_CASE("judge fixture replays its recorded precision") {
    const auto dir = ts::data_dir() / "fixtures" / "judge";
    const auto items = load_dataset((dir / "conversations.jsonl").string()).conversations;
    std::map<std::string, bool> truth;
    for (const auto& l : load_human_labels((dir / "human_labels.jsonl").string())) truth[l.conversation_id] = l.valid;
    Gateway gw(std::make_shared<ScriptedMock>(ScriptedMock::load((dir / "mock_script.json").string())));
    const auto verdicts = judge_all(gw, StageConfigs::defaults("sim-1").at(Stage::JudgeFilter), items);
    const double p = judge_precision(verdicts, truth);
    const json expected = json::parse(read_text_file((dir / "expected.json").string()));
    CHECK(p == doctest::Approx(expected.at("precision").get<double>()).epsilon(1e-12));
    // Reported judge precision is about 0.91; the simulated judge lands within 0.05 of it.
    CHECK(std::abs(p - 0.91) <= 0.05);
}

TEST_CASE("verdict and label files round trip") {
    ts::TempDir dir;
    std::vector<JudgeVerdict> vs{verdict("a", true), verdict("b", false)};
    save_verdicts(dir / "v.jsonl", vs);
    CHECK(load_verdicts(dir / "v.jsonl") == vs);
}
