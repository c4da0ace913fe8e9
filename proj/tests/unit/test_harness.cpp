#include <doctest.h>

#include <set>

#include "scope/harness/harness.hpp"
#include "scope/sim/sim.hpp"
#include "support/oracles.hpp"
#include "support/testing.hpp"

using namespace scope;
using namespace scope::harness;
namespace ts = testing_support;

namespace {

Dataset trace() { return load_dataset((ts::data_dir() / "trace" / "trace_fixture.jsonl").string(), true); }

// Every k-th conversation of the fixture, both polarities and tiers represented.
Dataset small(std::size_t k = 12) {
    const auto d = trace();
    Dataset out{"small", {}};
    for (std::size_t i = 0; i < d.size(); i += k) out.conversations.push_back(d.conversations[i]);
    return out;
}

ExperimentSettings settings(SystemKind system, int repeats = 2) {
    ExperimentSettings s;
    s.system = system;
    s.plan.repeats = repeats;
    s.plan.seed = 11;
    return s;
}

}  // namespace

TEST_CASE("train size") {
    CHECK(train_size(10, 0.5) == 5);
    CHECK(train_size(516, 0.4) == 206);
    CHECK(train_size(5, 0.5) == 3);
    CHECK(train_size(3, 0.4) == 1);
    CHECK(train_size(0, 0.4) == 0);
}

TEST_CASE("splits") {
    Dataset d{"d", {}};
    for (int i = 0; i < 10; ++i) {
        Conversation c;
        c.id = "c" + std::to_string(i);
        c.labels.overall = i < 4 ? Label::Pos : Label::Neg;
        d.conversations.push_back(c);
    }
    SplitPlan plan;
    plan.repeats = 4;
    plan.train_fraction = 0.5;
    plan.seed = 9;
    const auto a = make_splits(d, plan);
    const auto b = make_splits(d, plan);
    REQUIRE(a.size() == 4);
    std::set<std::vector<std::string>> distinct;
    for (std::size_t r = 0; r < a.size(); ++r) {
        CHECK(a[r].train == b[r].train);
        CHECK(a[r].test == b[r].test);
        CHECK(a[r].train.size() == 5);
        CHECK(a[r].test.size() == 5);
        const auto pos = std::count_if(a[r].train.begin(), a[r].train.end(),
                                       [](const std::string& id) { return id < "c4"; });
        CHECK(pos == 2);
        std::set<std::string> all(a[r].train.begin(), a[r].train.end());
        all.insert(a[r].test.begin(), a[r].test.end());
        CHECK(all.size() == 10);
        distinct.insert(a[r].train);
    }
    CHECK(distinct.size() > 1);
    plan.seed = 10;
    CHECK(make_splits(d, plan)[0].train != a[0].train);

    plan.train_fraction = 1.5;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan.train_fraction = 0.4;
    plan.repeats = 0;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
}

TEST_CASE("metrics hand example") {
    const std::map<std::string, Label> pred{{"a", Label::Pos}, {"b", Label::Pos}, {"c", Label::Pos}, {"d", Label::Neg}};
    const std::map<std::string, Label> truth{{"a", Label::Pos}, {"b", Label::Pos}, {"c", Label::Neg}, {"d", Label::Neg}};
    const auto m = compute_metrics(pred, truth);
    CHECK(m.confusion == Confusion{2, 1, 0, 1});
    CHECK(*m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(*m.recall == 1.0);
    CHECK(*m.f1 == doctest::Approx(0.8));
    CHECK(m.accuracy == 0.75);
    CHECK_THROWS_AS(compute_metrics({}, truth), ConfigError);
    CHECK_THROWS_AS(compute_metrics({{"zz", Label::Pos}}, truth), MissingTruth);
}

TEST_CASE("metrics agree with the oracle") {
    Rng rng(77);
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 1 + rng.index(30);
        std::map<std::string, Label> pm, tm;
        for (std::size_t i = 0; i < n; ++i) {
            pm["c" + std::to_string(i)] = rng.index(3) ? Label::Neg : Label::Pos;
            tm["c" + std::to_string(i)] = rng.index(3) ? Label::Neg : Label::Pos;
        }
        const auto got = compute_metrics(pm, tm);
        const auto want = oracle::metrics(pm, tm);
        CHECK(oracle::close(got.accuracy, want.accuracy));
        CHECK(oracle::close(got.f1, want.f1));
        CHECK(oracle::close(got.precision, want.precision));
        CHECK(oracle::close(got.recall, want.recall));
    }
}

TEST_CASE("summary statistics") {
    const auto s = summarize({0.5, std::nullopt, 0.7});
    CHECK(s.n == 2);
    CHECK(*s.mean == doctest::Approx(0.6));
    CHECK(*s.sd == doctest::Approx(0.1));
    CHECK_FALSE(summarize({std::nullopt}).mean);
    CHECK(format_value(0.755) == "0.76");
    CHECK(format_value(std::nullopt) == "N/A");
}

TEST_CASE("breakdown leaves empty cells out") {
    auto d = trace();
    std::vector<Conversation> test;
    for (const auto& c : d.conversations)
        if (c.tier == Tier::Gold && classify_subset(c) == Subset::Easy) test.push_back(c);
    std::map<std::string, Label> v;
    for (const auto& c : test) v[c.id] = Label::Pos;
    const auto rows = breakdown(test, v);
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& r : rows) cells.emplace(r.subset, r.tier);
    CHECK(cells == std::set<std::pair<std::string, std::string>>{
                       {"all", "all"}, {"all", "gold"}, {"easy", "all"}, {"easy", "gold"}});
}

TEST_CASE("experiment with the simulated provider") {
    const auto d = small();
    Gateway gw(std::make_shared<sim::SimulatedProvider>());
    const auto configs = StageConfigs::defaults("sim-1");

    auto s = settings(SystemKind::Scope);
    s.ablations.exclude_rw = true;
    const auto m = run_experiment(d, gw, configs, s);
    REQUIRE(m.repeats.size() == 2);
    for (const auto& r : m.repeats) {
        REQUIRE(r.ok);
        CHECK(r.train_ids.size() == train_size(d.size(), 0.4));
        CHECK(r.verdicts.size() == r.test_ids.size());
        const auto rs = pipeline::parse_rubric_store(r.rubric_store_text);
        for (const auto& rb : rs.rubrics) {
            CHECK(rb.weight == 1);
            CHECK_FALSE(rb.make_or_break);
        }
    }
    CHECK_FALSE(m.summary.empty());

    // Same inputs, same manifest.
    Gateway gw2(std::make_shared<sim::SimulatedProvider>());
    CHECK(json(run_experiment(d, gw2, configs, s)).dump() == json(m).dump());

    const auto md = render_report(m, ReportFormat::Markdown);
    const auto easy = md.find("| Easy |");
    const auto hard = md.find("| Hard Neg. |");
    const auto overall = md.find("| Overall |");
    CHECK(easy != std::string::npos);
    CHECK(easy < hard);
    CHECK(hard < overall);
    CHECK(md.find("## Ablations") != std::string::npos);
    CHECK(md.find("exclude_RW: on") != std::string::npos);

    const auto csv = split_lines(render_report(m, ReportFormat::Csv));
    std::size_t rows = 0;
    for (const auto& r : m.repeats) rows += r.metrics.size();
    CHECK(csv.size() == rows + 2);
    CHECK(csv.back().empty());
    CHECK(csv[0] == "repeat,subset,tier,n,tp,fp,fn,tn,accuracy,f1,precision,recall");

    // Manifest survives a round trip.
    RunManifest back = json(m).get<RunManifest>();
    CHECK(json(back).dump() == json(m).dump());
    CHECK_THROWS_AS(json::object().get<RunManifest>(), IncompleteManifest);
}

TEST_CASE("no ablation section without ablations") {
    const auto d = small(24);
    Gateway gw(std::make_shared<sim::SimulatedProvider>());
    const auto m = run_experiment(d, gw, StageConfigs::defaults("sim-1"), settings(SystemKind::Scope, 1));
    const auto md = render_report(m, ReportFormat::Markdown);
    CHECK(md.find("## Ablations") == std::string::npos);
    CHECK(render_report(m, ReportFormat::Text).find("ablations") == std::string::npos);
}

TEST_CASE("spur rejects ablations and records aborted repeats") {
    Gateway gw(std::make_shared<sim::SimulatedProvider>());
    const auto configs = StageConfigs::defaults("sim-1");
    auto bad = settings(SystemKind::Spur);
    bad.ablations.exclude_mb = true;
    CHECK_THROWS_AS(run_experiment(small(), gw, configs, bad), ConfigError);

    Dataset pos_only{"pos", {}};
    for (const auto& c : trace().conversations)
        if (c.labels.overall == Label::Pos && pos_only.size() < 10) pos_only.conversations.push_back(c);
    const auto m = run_experiment(pos_only, gw, configs, settings(SystemKind::Spur));
    REQUIRE(m.repeats.size() == 2);
    for (const auto& r : m.repeats) {
        CHECK_FALSE(r.ok);
        CHECK(r.error.find("DSAT") != std::string::npos);
    }
    const auto md = render_report(m, ReportFormat::Markdown);
    CHECK(md.find("Aborted repeats") != std::string::npos);
    CHECK(md.find("Completed repeats: 0/2") != std::string::npos);
}

TEST_CASE("empty dataset is a config error") {
    Gateway gw(std::make_shared<sim::SimulatedProvider>());
    CHECK_THROWS_AS(run_experiment(Dataset{"e", {}}, gw, StageConfigs::defaults(), settings(SystemKind::Scope)),
                    ConfigError);
}
