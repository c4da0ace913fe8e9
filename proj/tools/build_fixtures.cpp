// Regenerates everything under data/ from the built-in catalogs and the
// simulated provider. Usage: build_fixtures <data-dir>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string_view>

#include "scope/cli/cli.hpp"
#include "scope/core/dataset.hpp"
#include "scope/core/situations.hpp"
#include "scope/core/tools.hpp"
#include "scope/core/util.hpp"
#include "scope/judge/judge.hpp"
#include "scope/llm/prompts.hpp"
#include "scope/sim/sim.hpp"
#include "scope/synthesis/synthesis.hpp"

namespace fs = std::filesystem;
using namespace scope;

namespace {

constexpr std::uint64_t kTraceSeed = 20250516;
constexpr const char* kExemplarGroup = "weather";

// 182 POS / 334 NEG and 141 gold / 375 silver overall.
struct Quota {
    int total;
    int gold;
};

std::map<std::string, Quota> trace_quotas() {
    std::map<std::string, Quota> q;
    int pos_seen = 0, neg_seen = 0;
    for (const auto& s : situation_catalog()) {
        if (s.expected_labels.overall == Label::Pos) {
            q[s.id] = {pos_seen < 2 ? 61 : 60, 13};
            ++pos_seen;
        } else {
            q[s.id] = {neg_seen < 12 ? 15 : 14, neg_seen < 10 ? 5 : 4};
            ++neg_seen;
        }
    }
    return q;
}

void write_exemplars(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<std::string> tools;
    for (const auto& t : ToolCatalog::builtin().group(kExemplarGroup)) tools.push_back(t.name);
    for (const auto& s : situation_catalog()) {
        if (s.expected_labels.overall != Label::Neg) continue;
        Conversation c;
        c.id = "exemplar-" + situation_slug(s.id);
        c.turns = sim::generate_conversation(s.id, tools, {"Rafael", "Noor"}, 3);
        c.labels = s.expected_labels;
        c.situation_id = s.id;
        c.generator = "curated";
        c.tool_group = kExemplarGroup;
        save_dataset((dir / (situation_slug(s.id) + ".jsonl")).string(), Dataset{"exemplars", {c}});
    }
}

void write_trace(const fs::path& data, Gateway& gw, const StageConfigs& stages, const synthesis::ExemplarStore& ex) {
    const auto quotas = trace_quotas();
    std::map<std::string, int> spec;
    for (const auto& [id, q] : quotas) spec[id] = q.total * 3 / 2;  // headroom for judge rejections
    const auto catalog = ToolCatalog::builtin();
    auto jobs = synthesis::build_batch(spec, synthesis::ModePolicy::Paper, ex, catalog, kTraceSeed);
    const auto outcomes = synthesis::run_batch(gw, stages, jobs, catalog);

    std::map<std::string, std::vector<Conversation>> by_situation;
    for (const auto& o : outcomes)
        if (o.conversation) by_situation[o.conversation->situation_id].push_back(*o.conversation);

    std::vector<std::pair<Conversation, bool>> gold;
    std::vector<std::pair<Conversation, judge::JudgeVerdict>> silver;
    for (const auto& s : situation_catalog()) {
        const auto& pool = by_situation[s.id];
        const Quota q = quotas.at(s.id);
        // The simulated judge stands in for the human check of the gold tier.
        int gold_taken = 0, taken = 0;
        for (std::size_t i = 0; i < pool.size() && taken < q.total - q.gold; ++i) {
            auto v = judge::judge(gw, stages.at(Stage::JudgeFilter), pool[i], s);
            if (!v.valid) continue;
            if (gold_taken < q.gold) {
                gold.emplace_back(pool[i], true);
                ++gold_taken;
            } else {
                silver.emplace_back(pool[i], v);
                ++taken;
            }
        }
        if (gold_taken < q.gold) throw Error("not enough gold conversations for " + s.id);
        if (taken < q.total - q.gold) throw Error("not enough judge-accepted conversations for " + s.id);
    }
    Dataset d = judge::assemble_tiers(gold, silver, "trace_fixture");
    fs::create_directories(data / "trace");
    save_dataset((data / "trace" / "trace_fixture.jsonl").string(), d);

    // Judge fixture: the gold pool plus relabeled copies the judge should reject.
    const auto& catalog_list = situation_catalog();
    std::vector<Conversation> items;
    std::vector<judge::HumanLabel> labels;
    for (const auto& [c, ok] : gold) {
        Conversation u = c;
        u.tier = Tier::Unfiltered;
        items.push_back(u);
        labels.push_back({u.id, true, std::string("annotator-") + std::to_string(items.size() % 3 + 1)});
    }
    for (std::size_t k = 0; k < 52; ++k) {
        Conversation u = gold[(k * 11) % gold.size()].first;
        std::size_t at = 0;
        while (catalog_list[at].id != u.situation_id) ++at;
        const auto& target = catalog_list[(at + 1 + k % 5) % catalog_list.size()];
        u.id += "-relabeled";
        u.situation_id = target.id;
        u.labels = target.expected_labels;
        u.tier = Tier::Unfiltered;
        if (std::any_of(items.begin(), items.end(), [&](const Conversation& x) { return x.id == u.id; }))
            u.id += "-" + std::to_string(k);
        items.push_back(u);
        labels.push_back({u.id, false, std::string("annotator-") + std::to_string(k % 3 + 1)});
    }
    const fs::path jdir = data / "fixtures" / "judge";
    fs::create_directories(jdir);
    save_dataset((jdir / "conversations.jsonl").string(), Dataset{"judge_fixture", items});
    std::vector<json> lj;
    for (const auto& l : labels) lj.emplace_back(l);
    write_jsonl((jdir / "human_labels.jsonl").string(), lj);

    Gateway judge_gw(std::make_shared<sim::SimulatedProvider>());
    const auto verdicts = judge::judge_all(judge_gw, stages.at(Stage::JudgeFilter), items);
    judge_gw.recorded_script().save((jdir / "mock_script.json").string());
    std::map<std::string, bool> truth;
    for (const auto& l : labels) truth[l.conversation_id] = l.valid;
    const double precision = judge::judge_precision(verdicts, truth);
    const auto recall = judge::judge_recall(verdicts, truth);
    write_text_file((jdir / "expected.json").string(),
                    json{{"items", items.size()}, {"precision", precision}, {"recall", recall ? json(*recall) : json()}}
                            .dump(2) +
                        "\n");
    std::cout << "trace fixture: " << d.size() << " conversations; judge precision " << precision << "\n";
}

std::vector<std::string> substitute(const std::string& line, const std::map<std::string, std::string>& vars) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        for (const auto& [k, v] : vars)
            for (auto p = tok.find(k); p != std::string::npos; p = tok.find(k, p + v.size())) tok.replace(p, k.size(), v);
        out.push_back(tok);
    }
    return out;
}

int run_step(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    std::cout << out.str();
    if (rc != 0) std::cerr << err.str();
    return rc;
}

// Records the end-to-end mock script by running the pipeline steps with the
// simulated provider. Human labels are drawn after the synthesis step.
void record_e2e(const fs::path& data) {
    const fs::path fixture = data / "fixtures" / "e2e";
    const fs::path work = fs::temp_directory_path() / "scope-e2e-record";
    fs::remove_all(work);
    fs::create_directories(work);
    fs::remove(fixture / "mock_script.json");
    json batch = json::object();
    for (const auto& s : situation_catalog()) batch[s.id] = 2;
    write_text_file((fixture / "batch.json").string(), batch.dump(2) + "\n");
    const std::map<std::string, std::string> vars{
        {"{work}", work.string()}, {"{fixture}", fixture.string()}, {"{data}", data.string()}};
    const std::vector<std::string> global{"--mode", "record", "--provider", "sim", "--quiet", "--mock-script",
                                          (fixture / "mock_script.json").string()};
    bool labels_written = false;
    for (const auto& line : split_lines(read_text_file((fixture / "pipeline.txt").string()))) {
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        auto args = substitute(line, vars);
        if (!labels_written && std::find(args.begin(), args.end(), "filter") != args.end()) {
            std::vector<json> labels;
            std::set<std::string> seen;
            for (const auto& j : read_jsonl((work / "unfiltered.jsonl").string())) {
                const auto c = j.get<Conversation>();
                if (seen.insert(c.situation_id).second) labels.push_back(judge::HumanLabel{c.id, true, "annotator-1"});
            }
            write_jsonl((fixture / "human_labels.jsonl").string(), labels);
            labels_written = true;
        }
        args.insert(args.begin(), global.begin(), global.end());
        if (run_step(args) != 0) throw Error("recording step failed: " + line);
    }
    fs::remove_all(work);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2 || argv[1][0] == '-') {
        std::cerr << "usage: build_fixtures <data-dir>\n";
        return argc == 2 && std::string_view(argv[1]) == "--help" ? 0 : 2;
    }
    try {
        const fs::path data = argv[1];
        fs::create_directories(data);
        save_situations((data / "situations.jsonl").string(), situation_catalog());
        ToolCatalog::builtin().save((data / "tools.jsonl").string());
        write_exemplars(data / "exemplars");

        const auto ex = synthesis::ExemplarStore::load((data / "exemplars").string());
        Gateway gw(std::make_shared<sim::SimulatedProvider>());
        const auto stages = StageConfigs::defaults("sim-1");
        write_trace(data, gw, stages, ex);
        record_e2e(data);
    } catch (const std::exception& e) {
        std::cerr << "build_fixtures: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
