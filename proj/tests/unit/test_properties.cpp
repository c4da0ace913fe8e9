#include <doctest.h>

#include "scope/harness/harness.hpp"
#include "scope/pipeline/pipeline.hpp"
#include "scope/spur/spur.hpp"
#include "support/oracles.hpp"

using namespace scope;
using namespace scope::pipeline;

namespace {

constexpr int kTrials = 500;

// Swaps polarity of every rubric; make-or-break ones become ordinary weight-10 rubrics.
oracle::Config flipped(const oracle::Config& c) {
    oracle::Config out = c;
    for (auto& r : out.rubrics.rubrics) {
        r.polarity = r.polarity == Label::Pos ? Label::Neg : Label::Pos;
        if (r.make_or_break) {
            r.make_or_break = false;
            r.weight = 10;
        }
    }
    return out;
}

oracle::Config without_make_or_break(oracle::Config c) {
    for (auto& r : c.rubrics.rubrics)
        if (r.make_or_break) {
            r.make_or_break = false;
            r.weight = 10;
        }
    return c;
}

}  // namespace

TEST_CASE("aggregate ignores rubric and score order") {
    Rng rng(101);
    for (int t = 0; t < kTrials; ++t) {
        auto c = oracle::random_config(rng);
        const auto before = aggregate(c.scores, c.rubrics);
        rng.shuffle(c.rubrics.rubrics);
        rng.shuffle(c.scores);
        CHECK(aggregate(c.scores, c.rubrics) == before);
    }
}

TEST_CASE("flipping every polarity flips the label except on ties") {
    Rng rng(102);
    int ties = 0;
    for (int t = 0; t < kTrials; ++t) {
        const auto c = without_make_or_break(oracle::random_config(rng));
        const auto a = aggregate(c.scores, c.rubrics);
        const auto f = flipped(c);
        const auto b = aggregate(f.scores, f.rubrics);
        CHECK(b.avg_pos == a.avg_neg);
        CHECK(b.avg_neg == a.avg_pos);
        if (a.avg_pos == a.avg_neg) {
            ++ties;
            CHECK(a.label == Label::Neg);
            CHECK(b.label == Label::Neg);
        } else {
            CHECK(a.label != b.label);
        }
    }
    CHECK(ties > 0);
}

TEST_CASE("scaling x_max and every score by k keeps the verdict") {
    Rng rng(103);
    for (int t = 0; t < kTrials; ++t) {
        auto c = oracle::random_config(rng);
        const auto a = aggregate(c.scores, c.rubrics);
        const int k = 1 + static_cast<int>(rng.index(5));
        c.rubrics.x_max *= k;
        for (auto& s : c.scores) s.score *= k;
        const auto b = aggregate(c.scores, c.rubrics);
        CHECK(b.label == a.label);
        CHECK(oracle::close(b.avg_pos, a.avg_pos));
        CHECK(oracle::close(b.avg_neg, a.avg_neg));
    }
}

TEST_CASE("an extra inapplicable POS rubric never turns NEG into POS") {
    Rng rng(104);
    for (int t = 0; t < kTrials; ++t) {
        auto c = oracle::random_config(rng);
        const auto a = aggregate(c.scores, c.rubrics);
        c.rubrics.rubrics.push_back(Rubric{"P99", Label::Pos, "A", "extra", 1 + static_cast<int>(rng.index(10)), false});
        c.scores.push_back(RubricScore{"P99", false, 0, ""});
        const auto b = aggregate(c.scores, c.rubrics);
        CHECK(b.avg_pos <= a.avg_pos);
        CHECK(b.avg_neg == a.avg_neg);
        if (a.label == Label::Neg) CHECK(b.label == Label::Neg);
    }
}

TEST_CASE("setting a make-or-break hit to x_max past the bound forces NEG") {
    Rng rng(105);
    int forced = 0;
    for (int t = 0; t < kTrials; ++t) {
        auto c = oracle::random_config(rng);
        std::size_t n_neg = 0;
        int max_pos = 0;
        RubricScore* mb = nullptr;
        for (std::size_t i = 0; i < c.rubrics.rubrics.size(); ++i) {
            const auto& r = c.rubrics.rubrics[i];
            if (r.polarity == Label::Neg) ++n_neg;
            if (r.polarity == Label::Pos) max_pos = std::max(max_pos, r.weight);
            if (r.make_or_break && !mb) mb = &c.scores[i];
        }
        if (!mb) continue;
        const int bound = make_or_break_dominance_bound(c.rubrics.x_max, n_neg, max_pos);
        if (bound > c.rubrics.x_max) continue;
        // Best case for POS: every POS rubric at x_max.
        for (std::size_t i = 0; i < c.rubrics.rubrics.size(); ++i)
            if (c.rubrics.rubrics[i].polarity == Label::Pos) c.scores[i] = {c.scores[i].rubric_id, true, c.rubrics.x_max, ""};
        *mb = {mb->rubric_id, true, std::max(bound, 1), ""};
        CHECK(aggregate(c.scores, c.rubrics).label == Label::Neg);
        ++forced;
    }
    CHECK(forced > 50);
}

TEST_CASE("SPUR decision swaps with the rubric roles") {
    Rng rng(106);
    for (int t = 0; t < kTrials; ++t) {
        spur::SpurRubricSet rs, swapped;
        std::vector<RubricScore> impacts;
        const std::size_t n = 2 + rng.index(12);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = i % 2 ? spur::Polarity::Sat : spur::Polarity::Dsat;
            const std::string id = std::string(p == spur::Polarity::Sat ? "S" : "D") + std::to_string(i);
            rs.rubrics.push_back({id, p, "t"});
            swapped.rubrics.push_back({id, p == spur::Polarity::Sat ? spur::Polarity::Dsat : spur::Polarity::Sat, "t"});
            const bool applies = rng.index(3) != 0;
            impacts.push_back({id, applies, applies ? 1 + static_cast<int>(rng.index(10)) : 0, ""});
        }
        const auto a = spur::spur_decide("c", impacts, rs);
        const auto b = spur::spur_decide("c", impacts, swapped);
        CHECK(a.sat_total == b.dsat_total);
        if (a.sat_total == a.dsat_total)
            CHECK(b.label == spur::Polarity::Dsat);
        else
            CHECK(a.label != b.label);
    }
}

TEST_CASE("metrics: relabeling every verdict POS gives recall 1 whenever defined") {
    Rng rng(107);
    for (int t = 0; t < kTrials; ++t) {
        std::map<std::string, Label> truth, all_pos;
        const std::size_t n = 1 + rng.index(20);
        for (std::size_t i = 0; i < n; ++i) {
            truth["c" + std::to_string(i)] = rng.index(2) ? Label::Pos : Label::Neg;
            all_pos["c" + std::to_string(i)] = Label::Pos;
        }
        const auto m = harness::compute_metrics(all_pos, truth);
        if (m.recall) {
            CHECK(*m.recall == 1.0);
            CHECK(*m.precision == doctest::Approx(m.accuracy));
        } else {
            CHECK(m.accuracy == 0.0);
        }
    }
}
