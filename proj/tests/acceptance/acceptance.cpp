// Acceptance checks. One line per criterion, exit status 1 if any fails.
//
// Tolerances: averages within 1e-12 relative of the exact rational value;
// aggregation under 5 s for 1000 configurations; each replay run under 60 s.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "scope/core/dataset.hpp"
#include "scope/core/situations.hpp"
#include "scope/core/tools.hpp"
#include "scope/harness/harness.hpp"
#include "scope/pipeline/pipeline.hpp"
#include "scope/spur/spur.hpp"
#include "support/oracles.hpp"
#include "support/testing.hpp"

using namespace scope;
namespace ts = testing_support;

namespace {

constexpr int kConfigs = 1000;
constexpr std::uint64_t kSeed = 0x5C0BE;
constexpr double kAggregateBudgetSeconds = 5.0;
constexpr double kReplayBudgetSeconds = 60.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

Label label_of(const oracle::Config& c) { return pipeline::aggregate(c.scores, c.rubrics).label; }

// ---- 1 ----------------------------------------------------------------------

Outcome aggregation_oracle() {
    Rng rng(kSeed);
    std::vector<oracle::Config> configs;
    for (int i = 0; i < kConfigs; ++i) configs.push_back(oracle::random_config(rng));
    int mismatches = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& c : configs) {
        const auto got = pipeline::aggregate(c.scores, c.rubrics);
        const auto want = oracle::aggregate(c.rubrics, c.scores);
        if (got.label != want.label || !oracle::close(got.avg_pos, want.avg_pos.value()) ||
            !oracle::close(got.avg_neg, want.avg_neg.value()))
            ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < kAggregateBudgetSeconds,
            std::to_string(kConfigs) + " configurations, " + std::to_string(mismatches) + " mismatches, " + fmt(secs) +
                "s (limit 5s)"};
}

// ---- 2 ----------------------------------------------------------------------

Outcome dominance() {
    Rng rng(kSeed + 2);
    int checked = 0, counterexamples = 0, above_x_max = 0, loose_vs_stated = 0, tight = 0, not_tight = 0;
    for (int i = 0; i < kConfigs; ++i) {
        auto c = oracle::random_config(rng);
        auto& rs = c.rubrics.rubrics;
        std::vector<std::size_t> mb, neg;
        int max_pos_weight = 0;
        for (std::size_t k = 0; k < rs.size(); ++k) {
            if (rs[k].polarity == Label::Pos) max_pos_weight = std::max(max_pos_weight, rs[k].weight);
            if (rs[k].polarity == Label::Neg) neg.push_back(k);
            if (rs[k].make_or_break) mb.push_back(k);
        }
        if (mb.empty()) {
            const std::size_t k = neg[rng.index(neg.size())];
            rs[k].weight = 100;
            rs[k].make_or_break = true;
            mb.push_back(k);
        }
        const int x_max = c.rubrics.x_max;
        const auto n_neg = neg.size();
        const int bound = pipeline::make_or_break_dominance_bound(x_max, n_neg, max_pos_weight);
        // The stated sufficient condition ceil(0.1 * x_max * n_NEG * (1 + w/100)) must imply ours.
        const long long stated = (static_cast<long long>(x_max) * static_cast<long long>(n_neg) * (100 + max_pos_weight) + 999) / 1000;
        if (bound > stated) ++loose_vs_stated;
        if (bound > x_max) {
            ++above_x_max;
            continue;
        }
        const std::size_t hit = mb[rng.index(mb.size())];
        c.scores[hit].applicable = true;
        c.scores[hit].score = bound + static_cast<int>(rng.index(static_cast<std::size_t>(x_max - bound) + 1));
        ++checked;
        if (label_of(c) != Label::Neg || oracle::aggregate(c.rubrics, c.scores).label != Label::Neg) ++counterexamples;

        // One below the bound, with every POS rubric at the maximum weight and
        // score and every other NEG rubric at zero, the label must flip.
        if (bound >= 1) {
            auto t = c;
            for (std::size_t k = 0; k < rs.size(); ++k) {
                auto& s = t.scores[k];
                if (rs[k].polarity == Label::Pos) {
                    t.rubrics.rubrics[k].weight = max_pos_weight;
                    s.applicable = true;
                    s.score = x_max;
                } else {
                    s.applicable = k == hit;
                    s.score = k == hit ? bound - 1 : 0;
                }
            }
            (label_of(t) == Label::Pos ? tight : not_tight) += 1;
        }
    }
    return {counterexamples == 0 && loose_vs_stated == 0 && not_tight == 0,
            std::to_string(checked) + " hits at or above the derived bound, " + std::to_string(counterexamples) +
                " counterexamples; bound tight in " + std::to_string(tight) + "/" + std::to_string(tight + not_tight) +
                "; " + std::to_string(above_x_max) + " configurations with bound > x_max; stated bound implies derived in all"};
}

// ---- 3 ----------------------------------------------------------------------

Outcome monotonicity() {
    Rng rng(kSeed + 3);
    int checks = 0, flips = 0;
    for (int i = 0; i < kConfigs; ++i) {
        const auto base = oracle::random_config(rng);
        const Label before = label_of(base);
        for (Label pol : {Label::Pos, Label::Neg}) {
            std::vector<std::size_t> idx;
            for (std::size_t k = 0; k < base.rubrics.rubrics.size(); ++k)
                if (base.rubrics.rubrics[k].polarity == pol) idx.push_back(k);
            const std::size_t k = idx[rng.index(idx.size())];
            auto c = base;
            auto& s = c.scores[k];
            const int current = s.applicable ? s.score : 0;
            if (current >= c.rubrics.x_max) continue;
            s.applicable = true;
            s.score = current + 1 + static_cast<int>(rng.index(static_cast<std::size_t>(c.rubrics.x_max - current)));
            const Label after = label_of(c);
            ++checks;
            if (pol == Label::Pos && before == Label::Pos && after == Label::Neg) ++flips;
            if (pol == Label::Neg && before == Label::Neg && after == Label::Pos) ++flips;
        }
    }
    return {flips == 0 && checks >= kConfigs,
            std::to_string(checks) + " single-score increases, " + std::to_string(flips) + " wrong-direction flips"};
}

// ---- 4 ----------------------------------------------------------------------

Outcome spur_oracle() {
    Rng rng(kSeed + 4);
    int mismatches = 0;
    const GenerationConfig cfg;
    Conversation conv;
    conv.id = "c";
    conv.turns = {Turn{Role::User, "hi", {}, {}}, Turn{Role::Agent, "hello", {}, {}}};

    auto run = [&](const spur::SpurRubricSet& rs, const std::string& completion) {
        Gateway gw(std::make_shared<ts::CannedProvider>([&](const LlmRequest&) { return completion; }));
        return spur::spur_estimate(gw, cfg, conv, rs);
    };

    for (int i = 0; i < kConfigs; ++i) {
        spur::SpurRubricSet rs;
        const std::size_t n_sat = 1 + rng.index(10), n_dsat = 1 + rng.index(10);
        std::string completion;
        int sat = 0, dsat = 0;
        for (std::size_t k = 0; k < n_sat + n_dsat; ++k) {
            const bool is_sat = k < n_sat;
            const std::string id = (is_sat ? "S" : "D") + std::to_string(is_sat ? k + 1 : k - n_sat + 1);
            rs.rubrics.push_back({id, is_sat ? spur::Polarity::Sat : spur::Polarity::Dsat, "rubric " + id});
            if (rng.index(3) == 0) {
                completion += id + ": N/A\n";
                continue;
            }
            const int impact = 1 + static_cast<int>(rng.index(10));
            completion += id + ": " + std::to_string(impact) + "\n";
            (is_sat ? sat : dsat) += impact;
        }
        const auto v = run(rs, completion);
        const auto want = sat > dsat ? spur::Polarity::Sat : spur::Polarity::Dsat;
        if (v.sat_total != sat || v.dsat_total != dsat || v.label != want) ++mismatches;
    }

    // Boundary: equal totals are DSAT, one more SAT point is SAT, nothing applicable is DSAT.
    spur::SpurRubricSet rs;
    rs.rubrics = {{"S1", spur::Polarity::Sat, "a"}, {"S2", spur::Polarity::Sat, "b"}, {"D1", spur::Polarity::Dsat, "c"}};
    const auto tie = run(rs, "S1: 3\nS2: 4\nD1: 7\n");
    const auto above = run(rs, "S1: 4\nS2: 4\nD1: 7\n");
    const auto none = run(rs, "S1: N/A\nS2: N/A\nD1: N/A\n");
    const bool boundary = tie.label == spur::Polarity::Dsat && tie.sat_total == 7 && tie.dsat_total == 7 &&
                          above.label == spur::Polarity::Sat && none.label == spur::Polarity::Dsat;
    return {mismatches == 0 && boundary, std::to_string(kConfigs) + " impact assignments, " + std::to_string(mismatches) +
                                             " mismatches; tie 7-7 -> " + std::string(spur::to_string(tie.label)) +
                                             ", 8-7 -> " + std::string(spur::to_string(above.label))};
}

// ---- 5 ----------------------------------------------------------------------

Outcome metrics_oracle() {
    Rng rng(kSeed + 5);
    int mismatches = 0, one_class = 0;
    for (int i = 0; i < kConfigs; ++i) {
        const std::size_t n = 1 + rng.index(40);
        const std::size_t truth_mode = rng.index(8);  // 0: all NEG, 1: all POS, else mixed
        const std::size_t pred_mode = rng.index(8);
        std::map<std::string, Label> truth, pred;
        for (std::size_t k = 0; k < n; ++k) {
            const std::string id = "c" + std::to_string(k);
            truth[id] = truth_mode == 0 ? Label::Neg : truth_mode == 1 ? Label::Pos : rng.index(2) ? Label::Pos : Label::Neg;
            pred[id] = pred_mode == 0 ? Label::Neg : pred_mode == 1 ? Label::Pos : rng.index(2) ? Label::Pos : Label::Neg;
        }
        if (truth_mode < 2) ++one_class;
        const auto got = harness::compute_metrics(pred, truth);
        const auto want = oracle::metrics(pred, truth);
        const bool same = got.confusion.tp == want.c.tp && got.confusion.fp == want.c.fp &&
                          got.confusion.fn == want.c.fn && got.confusion.tn == want.c.tn &&
                          oracle::close(got.accuracy, want.accuracy) && oracle::close(got.precision, want.precision) &&
                          oracle::close(got.recall, want.recall) && oracle::close(got.f1, want.f1);
        if (!same) ++mismatches;
    }
    // All-NEG truth with all-NEG verdicts: accuracy 1, the rest N/A.
    std::map<std::string, Label> negs{{"a", Label::Neg}, {"b", Label::Neg}};
    const auto m = harness::compute_metrics(negs, negs);
    const bool convention = m.accuracy == 1.0 && !m.f1 && !m.precision && !m.recall &&
                            harness::format_value(m.f1) == "N/A";
    return {mismatches == 0 && convention, std::to_string(kConfigs) + " verdict/truth maps (" +
                                               std::to_string(one_class) + " with one-class truth), " +
                                               std::to_string(mismatches) + " mismatches; all-NEG subset renders N/A"};
}

// ---- 6 ----------------------------------------------------------------------

Outcome fixture_counts() {
    const auto d = load_dataset((ts::data_dir() / "trace" / "trace_fixture.jsonl").string(), true);
    const auto c = count(d);
    std::size_t easy = 0, hard = 0;
    for (const auto& conv : d.conversations) (classify_subset(conv) == Subset::Easy ? easy : hard) += 1;
    const std::size_t gold = c.by_tier.count(Tier::Gold) ? c.by_tier.at(Tier::Gold) : 0;
    const std::size_t silver = c.by_tier.count(Tier::Silver) ? c.by_tier.at(Tier::Silver) : 0;
    const bool ok = gold == 141 && silver == 375 && c.total == 516 && c.pos == 182 && c.neg == 334 &&
                    easy + hard == 516 && c.easy == easy && c.hard_negative == hard;
    return {ok, "gold " + std::to_string(gold) + ", silver " + std::to_string(silver) + ", total " +
                    std::to_string(c.total) + ", POS " + std::to_string(c.pos) + ", NEG " + std::to_string(c.neg) +
                    ", easy " + std::to_string(easy) + " + hard_negative " + std::to_string(hard)};
}

// ---- 7 ----------------------------------------------------------------------

Outcome catalog() {
    const auto& cat = situation_catalog();
    const std::string paper = read_text_file(SCOPE_TEST_PAPER);
    const auto rows = split_lines(read_text_file((ts::snapshot_dir() / "situations_appendix.tsv").string()));
    std::size_t row_count = 0, field_mismatch = 0, not_in_paper = 0;
    for (const auto& row : rows) {
        if (trim(row).empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (std::size_t p; (p = row.find('\t', start)) != std::string::npos; start = p + 1) cols.push_back(row.substr(start, p - start));
        cols.push_back(row.substr(start));
        if (row_count >= cat.size() || cols.size() != 5) {
            ++field_mismatch;
            ++row_count;
            continue;
        }
        const auto& s = cat[row_count++];
        // Ids collapse the printed " / " separator to "/".
        std::string printed_id = cols[0];
        ts::replace_all(printed_id, " / ", "/");
        cols[0] = printed_id;
        const std::vector<std::string> fields{s.id, s.overall_description, s.user_details, s.tool_details, s.agent_details};
        for (std::size_t k = 0; k < 5; ++k) {
            if (fields[k] != cols[k]) ++field_mismatch;
            if (k > 0 && paper.find(fields[k]) == std::string::npos) ++not_in_paper;
        }
    }
    const auto tools = ToolCatalog::load((ts::data_dir() / "tools.jsonl").string());
    const bool tools_ok = tools.tools().size() == 30 && tools.groups().size() == 9 &&
                          tools.tools() == ToolCatalog::builtin().tools();
    return {cat.size() == 26 && row_count == 26 && field_mismatch == 0 && not_in_paper == 0 && tools_ok,
            std::to_string(cat.size()) + " situations, " + std::to_string(field_mismatch) + " snapshot mismatches, " +
                std::to_string(not_in_paper) + " fields absent from the appendix; " +
                std::to_string(tools.tools().size()) + " tools in " + std::to_string(tools.groups().size()) + " groups"};
}

// ---- 8 and 10 -----------------------------------------------------------------

std::vector<ts::ReplayRun> g_runs;

void ensure_replays() {
    if (!g_runs.empty()) return;
    for (int i = 0; i < 3; ++i) {
        ts::TempDir dir("accept");
        g_runs.push_back(ts::replay_e2e(dir.path()));
    }
}

Outcome replay_determinism() {
    ensure_replays();
    double worst = 0;
    for (const auto& r : g_runs) {
        if (!r.ok) return {false, "replay failed: " + r.failure};
        worst = std::max(worst, r.seconds);
    }
    const auto& first = g_runs.front().artifacts;
    std::size_t manifests = 0, reports = 0;
    for (const auto& [k, v] : first) (k.find("manifest") != std::string::npos ? manifests : reports) += 1;
    const bool same = g_runs[1].artifacts == first && g_runs[2].artifacts == first;
    return {same && manifests >= 5 && reports >= 2 && worst < kReplayBudgetSeconds,
            "3 runs, " + std::to_string(manifests) + " manifests and " + std::to_string(reports) + " reports " +
                (same ? "byte-identical" : "DIFFER") + ", slowest run " + fmt(worst) + "s (limit 60s)"};
}

Outcome ablation_contracts() {
    ensure_replays();
    if (!g_runs.front().ok) return {false, "replay failed: " + g_runs.front().failure};
    const auto& a = g_runs.front().artifacts;
    auto manifest = [&](const std::string& dir) { return json::parse(a.at(dir + "/manifest.json")); };
    const json rw_run = manifest("scope-rw"), mb_run = manifest("scope-mb"), ad_run = manifest("scope-ad");
    std::size_t rw = 0, mb = 0, ad = 0, violations = 0;
    for (const auto& rep : rw_run.at("repeats"))
        for (const auto& r : rep.at("learned").at("rubrics")) {
            ++rw;
            if (r.at("weight") != 1) ++violations;
        }
    for (const auto& rep : mb_run.at("repeats"))
        for (const auto& r : rep.at("learned").at("rubrics")) {
            ++mb;
            if (r.at("weight") == pipeline::kMakeOrBreakWeight || r.at("make_or_break") == true) ++violations;
        }
    for (const auto& rep : ad_run.at("repeats"))
        for (const auto& r : rep.at("learned").at("reasons")) {
            ++ad;
            if (r.at("area") != pipeline::kUnassigned) ++violations;
        }
    const bool flags = rw_run.at("ablations").at("exclude_RW") == true &&
                       mb_run.at("ablations").at("exclude_MB") == true && ad_run.at("ablations").at("exclude_AD") == true;
    return {violations == 0 && flags && rw > 0 && mb > 0 && ad > 0,
            "RW " + std::to_string(rw) + " rubrics, MB " + std::to_string(mb) + " rubrics, AD " + std::to_string(ad) +
                " reasons checked, " + std::to_string(violations) + " violations"};
}

// ---- 9 ----------------------------------------------------------------------

Outcome splits() {
    const auto d = load_dataset((ts::data_dir() / "trace" / "trace_fixture.jsonl").string(), true);
    harness::SplitPlan plan;
    plan.repeats = 5;
    plan.train_fraction = 0.4;
    plan.seed = 2025;
    const auto a = harness::make_splits(d, plan);
    const auto b = harness::make_splits(d, plan);
    plan.seed = 2026;
    const auto other = harness::make_splits(d, plan);
    std::set<std::string> all;
    for (const auto& c : d.conversations) all.insert(c.id);
    bool sizes = a.size() == 5, partition = true;
    for (const auto& s : a) {
        sizes = sizes && s.train.size() == 206 && s.test.size() == 310;
        std::set<std::string> tr(s.train.begin(), s.train.end()), te(s.test.begin(), s.test.end());
        std::set<std::string> both;
        std::set_intersection(tr.begin(), tr.end(), te.begin(), te.end(), std::inserter(both, both.end()));
        std::set<std::string> uni = tr;
        uni.insert(te.begin(), te.end());
        partition = partition && both.empty() && uni == all && tr.size() == s.train.size();
    }
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].train == b[i].train && a[i].test == b[i].test;
        differs = differs || a[i].train != other[i].train;
    }
    return {sizes && partition && same && differs,
            "5 repeats of 206/310; disjoint and exhaustive: " + std::string(partition ? "yes" : "no") +
                "; same seed reproduces: " + (same ? "yes" : "no") + "; other seed differs: " + (differs ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"aggregation oracle", aggregation_oracle},
        {"make-or-break dominance", dominance},
        {"monotonicity", monotonicity},
        {"SPUR estimation oracle", spur_oracle},
        {"metrics oracle", metrics_oracle},
        {"fixture statistics", fixture_counts},
        {"catalog completeness", catalog},
        {"replay determinism", replay_determinism},
        {"split protocol", splits},
        {"ablation contracts", ablation_contracts},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
                  << "\n";
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
