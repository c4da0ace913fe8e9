#include <doctest.h>

#include <cstdlib>

#include "scope/cli/cli.hpp"
#include "scope/core/dataset.hpp"
#include "scope/harness/harness.hpp"
#include "scope/pipeline/pipeline.hpp"
#include "support/testing.hpp"

using namespace scope;
namespace ts = testing_support;
namespace fs = std::filesystem;

namespace {

fs::path fixture() { return ts::data_dir() / "fixtures" / "e2e"; }

// One replayed pipeline shared by the success cases.
const fs::path& workspace() {
    static ts::TempDir dir("cli");
    static const ts::ReplayRun run = ts::replay_e2e(dir.path());
    REQUIRE_MESSAGE(run.ok, run.failure);
    return dir.path();
}

std::string at(const std::string& rel) { return (workspace() / rel).string(); }

// Replay flags the recorded script was made with.
std::vector<std::string> replay(std::vector<std::string> rest) {
    std::vector<std::string> args{"--mode", "replay", "--quiet", "--log-level", "off", "--seed", "7", "--mock-script",
                                  (fixture() / "mock_script.json").string()};
    args.insert(args.end(), rest.begin(), rest.end());
    return args;
}

std::vector<std::string> sim(std::vector<std::string> rest) {
    std::vector<std::string> args{"--provider", "sim", "--quiet", "--log-level", "off", "--seed", "7"};
    args.insert(args.end(), rest.begin(), rest.end());
    return args;
}

struct Scratch {
    ts::TempDir dir{"cli-scratch"};
    std::string file(const std::string& name, const std::string& content) const {
        const std::string p = dir / name;
        write_text_file(p, content);
        return p;
    }
};

}  // namespace

TEST_CASE("help matches the snapshot") {
    const auto r = ts::run_cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out == cli::full_help());
    const fs::path snap = ts::snapshot_dir() / "cli_help.txt";
    if (std::getenv("SCOPE_UPDATE_SNAPSHOTS")) write_text_file(snap.string(), r.out);
    CHECK(r.out == read_text_file(snap.string()));
}

TEST_CASE("global flag errors") {
    CHECK(ts::run_cli({}).code == cli::kConfig);
    CHECK(ts::run_cli({"frobnicate"}).code == cli::kConfig);
    CHECK(ts::run_cli({"--mode", "sideways", "report", "--manifest", "m.json"}).code == cli::kConfig);
    CHECK(ts::run_cli({"--max-in-flight", "0", "--provider", "sim", "report", "--manifest", "m.json"}).code ==
          cli::kConfig);
    Scratch s;
    const auto r = ts::run_cli({"--quiet", "synthesize", "--spec", (fixture() / "batch.json").string(), "--out",
                                s.dir / "x.jsonl"});
    CHECK(r.code == cli::kConfig);
    CHECK(r.err.find("SCOPE_PROVIDER_URL") != std::string::npos);
}

TEST_CASE("effective configuration goes to stderr unless quiet") {
    Scratch s;
    const auto spec = s.file("spec.json", "{\"Nope\": 1}");
    const auto loud = ts::run_cli({"--provider", "sim", "--log-level", "off", "synthesize", "--spec", spec, "--out",
                                   s.dir / "x.jsonl"});
    CHECK(loud.err.find("effective config:") != std::string::npos);
    CHECK(loud.err.find("seed = ") != std::string::npos);
    const auto quiet = ts::run_cli(sim({"synthesize", "--spec", spec, "--out", s.dir / "x.jsonl"}));
    CHECK(quiet.err.find("effective config:") == std::string::npos);
}

TEST_CASE("synthesize") {
    SUBCASE("replay") {
        const auto d = load_dataset(at("unfiltered.jsonl"));
        CHECK(d.size() == 52);
        for (const auto& c : d.conversations) CHECK(c.tier == Tier::Unfiltered);
        CHECK(fs::exists(at("unfiltered.jsonl.log.jsonl")));
    }
    Scratch s;
    SUBCASE("unknown situation is named") {
        const auto r = ts::run_cli(sim({"synthesize", "--spec", s.file("spec.json", "{\"Correct\": 1, \"Nope\": 2}"),
                                        "--out", s.dir / "x.jsonl"}));
        CHECK(r.code == cli::kConfig);
        CHECK(r.err.find("'Nope'") != std::string::npos);
        CHECK_FALSE(fs::exists(s.dir / "x.jsonl"));
    }
    SUBCASE("empty spec") {
        const auto r = ts::run_cli(sim({"synthesize", "--spec", s.file("spec.json", "{}"), "--out", s.dir / "x.jsonl"}));
        CHECK(r.code == cli::kConfig);
    }
    SUBCASE("negative count") {
        const auto r = ts::run_cli(
            sim({"synthesize", "--spec", s.file("spec.json", "{\"Correct\": -1}"), "--out", s.dir / "x.jsonl"}));
        CHECK(r.code == cli::kConfig);
        CHECK(r.err.find("'Correct'") != std::string::npos);
    }
    SUBCASE("malformed spec") {
        const auto r =
            ts::run_cli(sim({"synthesize", "--spec", s.file("spec.json", "{oops"), "--out", s.dir / "x.jsonl"}));
        CHECK(r.code == cli::kParse);
    }
    SUBCASE("one-shot without exemplars") {
        const auto r = ts::run_cli(sim({"synthesize", "--spec", s.file("spec.json", "{\"WrongTool/Silent\": 1}"),
                                        "--policy", "one_shot", "--out", s.dir / "x.jsonl"}));
        CHECK(r.code == cli::kConfig);
        CHECK(r.err.find("WrongTool/Silent") != std::string::npos);
    }
    SUBCASE("replay miss") {
        const auto r = ts::run_cli({"--mode", "replay", "--quiet", "--log-level", "off", "--seed", "8",
                                    "--mock-script", (fixture() / "mock_script.json").string(), "synthesize", "--spec",
                                    (fixture() / "batch.json").string(), "--exemplars",
                                    (ts::data_dir() / "exemplars").string(), "--out", s.dir / "x.jsonl"});
        CHECK(r.code == cli::kGateway);
    }
}

TEST_CASE("filter") {
    SUBCASE("replay") {
        const auto d = load_dataset(at("dataset.jsonl"), true);
        CHECK(d.size() == 52);
        const auto gold = std::count_if(d.conversations.begin(), d.conversations.end(),
                                        [](const Conversation& c) { return c.tier == Tier::Gold; });
        CHECK(gold == 26);
        CHECK(read_jsonl(at("verdicts.jsonl")).size() == 26);
    }
    Scratch s;
    SUBCASE("empty input") {
        CHECK(ts::run_cli(sim({"filter", "--in", s.file("in.jsonl", ""), "--out", s.dir / "d.jsonl"})).code ==
              cli::kConfig);
    }
    SUBCASE("missing input") {
        CHECK(ts::run_cli(sim({"filter", "--in", s.dir / "none.jsonl", "--out", s.dir / "d.jsonl"})).code ==
              cli::kConfig);
    }
    SUBCASE("malformed input") {
        CHECK(ts::run_cli(sim({"filter", "--in", s.file("in.jsonl", "{oops\n"), "--out", s.dir / "d.jsonl"})).code ==
              cli::kParse);
    }
    SUBCASE("human label for an unknown conversation") {
        const auto labels = s.file("h.jsonl", "{\"conversation_id\":\"ghost\",\"valid\":true,\"annotator\":\"a\"}\n");
        const auto r = ts::run_cli(sim({"filter", "--in", at("unfiltered.jsonl"), "--human", labels, "--out",
                                        s.dir / "d.jsonl"}));
        CHECK(r.code == cli::kConfig);
        CHECK(r.err.find("'ghost'") != std::string::npos);
    }
}

TEST_CASE("learn") {
    SUBCASE("replay") {
        const auto rs = pipeline::load_rubric_store(at("store.jsonl"));
        CHECK(rs.count(Label::Pos) > 0);
        CHECK(rs.count(Label::Neg) > 0);
        CHECK_NOTHROW(rs.validate_for_estimation());
    }
    Scratch s;
    SUBCASE("empty dataset") {
        CHECK(ts::run_cli(sim({"learn", "--data", s.file("d.jsonl", ""), "--out", s.dir / "r.jsonl"})).code ==
              cli::kConfig);
    }
    SUBCASE("unknown training id") {
        const auto r = ts::run_cli(sim({"learn", "--data", at("dataset.jsonl"), "--train-ids",
                                        s.file("ids.txt", "ghost-1\n"), "--out", s.dir / "r.jsonl"}));
        CHECK(r.code == cli::kConfig);
        CHECK(r.err.find("ghost-1") != std::string::npos);
    }
    SUBCASE("spur ablation") {
        CHECK(ts::run_cli(sim({"learn", "--data", at("dataset.jsonl"), "--system", "spur", "--exclude-mb", "--out",
                               s.dir / "r.jsonl"}))
                  .code == cli::kConfig);
    }
    SUBCASE("sim learns spur") {
        const auto r = ts::run_cli(sim({"learn", "--data", at("dataset.jsonl"), "--system", "spur", "--out",
                                        s.dir / "r.jsonl", "--artifacts", s.dir / "a.json"}));
        CHECK(r.code == cli::kOk);
        CHECK(spur::load_rubric_store(s.dir / "r.jsonl").count(spur::Polarity::Dsat) > 0);
        CHECK(fs::exists(s.dir / "a.json"));
    }
}

TEST_CASE("evaluate") {
    SUBCASE("replay with a store") {
        const json j = json::parse(read_text_file(at("scored.json")));
        CHECK(j.at("verdicts").size() == 52);
        CHECK(j.at("rubric_store") == "store.jsonl");
        CHECK_FALSE(j.at("metrics").empty());
    }
    SUBCASE("replay protocol") {
        const auto m = json::parse(read_text_file(at("scope/manifest.json"))).get<harness::RunManifest>();
        CHECK(m.repeats.size() == 2);
        for (const auto& r : m.repeats) {
            CHECK(r.ok);
            CHECK(fs::exists(workspace() / "scope" / r.rubric_store));
        }
        const std::string text = read_text_file(at("scope/manifest.json"));
        CHECK(text.find(workspace().string()) == std::string::npos);
    }
    Scratch s;
    SUBCASE("rubrics and protocol are exclusive") {
        CHECK(ts::run_cli(sim({"evaluate", "--data", at("dataset.jsonl"), "--rubrics", at("store.jsonl"),
                               "--protocol", "paper"}))
                  .code == cli::kConfig);
    }
    SUBCASE("neither rubrics nor protocol") {
        CHECK(ts::run_cli(sim({"evaluate", "--data", at("dataset.jsonl")})).code == cli::kConfig);
    }
    SUBCASE("empty dataset") {
        CHECK(ts::run_cli(sim({"evaluate", "--data", s.file("d.jsonl", ""), "--protocol", "paper"})).code ==
              cli::kConfig);
    }
    SUBCASE("malformed store") {
        CHECK(ts::run_cli(sim({"evaluate", "--data", at("dataset.jsonl"), "--rubrics", s.file("r.jsonl", "{oops\n")}))
                  .code == cli::kParse);
    }
    SUBCASE("train fraction out of range") {
        CHECK(ts::run_cli(sim({"evaluate", "--data", at("dataset.jsonl"), "--protocol", "paper", "--train-fraction",
                               "1.5", "--run-dir", s.dir / "run"}))
                  .code == cli::kConfig);
    }
}

TEST_CASE("report") {
    SUBCASE("replay") {
        const auto md = read_text_file(at("scope/report.md"));
        CHECK(md.find("| Overall |") != std::string::npos);
        const auto csv = read_text_file(at("spur/report.csv"));
        CHECK(csv.rfind("repeat,subset,tier", 0) == 0);
    }
    SUBCASE("to stdout") {
        const auto r = ts::run_cli(sim({"report", "--manifest", at("scope-rw/manifest.json"), "--format", "text",
                                        "--out", "-"}));
        CHECK(r.code == cli::kOk);
        CHECK(r.out.find("exclude_RW=1") != std::string::npos);
    }
    Scratch s;
    SUBCASE("missing manifest") {
        CHECK(ts::run_cli(sim({"report", "--manifest", s.dir / "m.json"})).code == cli::kConfig);
    }
    SUBCASE("incomplete manifest") {
        const auto r = ts::run_cli(sim({"report", "--manifest", s.file("m.json", "{}")}));
        CHECK(r.code == cli::kParse);
        CHECK(r.err.find("run_id") != std::string::npos);
    }
    SUBCASE("bad format") {
        CHECK(ts::run_cli(sim({"report", "--manifest", at("scope/manifest.json"), "--format", "pdf"})).code ==
              cli::kConfig);
    }
}
