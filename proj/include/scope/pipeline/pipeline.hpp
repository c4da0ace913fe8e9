#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scope/core/model.hpp"
#include "scope/errors.hpp"
#include "scope/llm/gateway.hpp"

namespace scope::pipeline {

/// Area name used by every reason and rubric when area discovery is skipped.
inline constexpr std::string_view kUnassigned = "unassigned";
inline constexpr int kMakeOrBreakWeight = 100;

class EmptyPolarity : public Error {
public:
    explicit EmptyPolarity(Label polarity)
        : Error("no " + std::string(to_string(polarity)) + " rubrics were produced"), polarity_(polarity) {}
    Label polarity() const noexcept { return polarity_; }

private:
    Label polarity_;
};

class MissingScore : public Error {
public:
    using Error::Error;
};

struct Area {
    std::string name;
    std::string description;
    bool operator==(const Area&) const = default;
};

struct Reason {
    std::string conversation_id;
    Label polarity = Label::Pos;
    std::string area;
    std::string text;
    bool operator==(const Reason&) const = default;
};

struct Rubric {
    std::string id;
    Label polarity = Label::Pos;
    std::string area;
    std::string text;
    int weight = 1;
    bool make_or_break = false;

    /// weight in [1,10], or exactly 100 for a make-or-break NEG rubric.
    void validate() const;
    bool operator==(const Rubric&) const = default;
};

struct RubricScore {
    std::string rubric_id;
    bool applicable = false;
    int score = 0;
    std::string evidence;
    bool operator==(const RubricScore&) const = default;
};

struct RubricSet {
    std::vector<Rubric> rubrics;
    int x_max = 10;
    std::string provenance;

    /// Unique ids, valid rubrics, positive x_max.
    void validate() const;
    /// validate() plus at least one rubric of each polarity.
    void validate_for_estimation() const;
    std::size_t count(Label polarity) const;
    const Rubric* find(std::string_view id) const;
    bool operator==(const RubricSet&) const = default;
};

void to_json(json& j, const Area& a);
void from_json(const json& j, Area& a);
void to_json(json& j, const Reason& r);
void from_json(const json& j, Reason& r);
void to_json(json& j, const Rubric& r);
void from_json(const json& j, Rubric& r);
void to_json(json& j, const RubricScore& s);
void from_json(const json& j, RubricScore& s);

/// Stage 1. Samples min(sample_size, |train|) conversations with the seed and
/// keeps at most max_areas distinct areas from the completion.
std::vector<Area> discover_areas(Gateway& gateway, const GenerationConfig& config,
                                 const std::vector<Conversation>& train, std::size_t sample_size = 10,
                                 std::size_t max_areas = 5, std::uint64_t seed = 0);

/// "N. Name: description" lines. Exposed for tests.
std::vector<Area> parse_areas(const std::string& completion, std::size_t max_areas);

/// Stage 2. Empty `areas` selects the sentinel-area path. Reasons naming an
/// unknown area are dropped; unparseable completions are logged and skipped.
std::vector<Reason> extract_reasons(Gateway& gateway, const GenerationConfig& config,
                                    const std::vector<Conversation>& train, const std::vector<Area>& areas);

enum class DedupMode { Pooled, PerPolarity };
DedupMode parse_dedup_mode(std::string_view s);
std::string_view to_string(DedupMode m);

/// max(total/2, 12).
std::size_t dedup_target(std::size_t total);

/// Splits a pooled target across polarities proportionally to their sizes
/// (largest remainder), keeping at least one slot for every nonempty polarity.
/// Returns {pos, neg}.
std::pair<std::size_t, std::size_t> allocate_dedup(std::size_t n_pos, std::size_t n_neg, std::size_t target);

struct RubricOptions {
    std::size_t per_area_cap = 5;
    std::size_t batch_size = 20;
    DedupMode dedup = DedupMode::Pooled;
    bool exclude_rw = false;  // every weight 1, no make-or-break
    bool exclude_mb = false;  // weights elicited without the make-or-break flag
    int x_max = 10;
    std::string provenance;
};

struct RubricStageConfigs {
    GenerationConfig summarize;
    GenerationConfig dedup;
    GenerationConfig weight;
    static RubricStageConfigs from(const StageConfigs& configs);
};

/// Stage 3: grouped summarization, dedup, weighting. Area names in `areas`
/// (plus the sentinel) are the only ones accepted from model output.
RubricSet generate_rubrics(Gateway& gateway, const RubricStageConfigs& configs, const std::vector<Reason>& reasons,
                           const std::vector<Area>& areas, const RubricOptions& options = {});

/// Stage 4a. One score per rubric; missing ones become not-applicable.
std::vector<RubricScore> score_conversation(Gateway& gateway, const GenerationConfig& config, const Conversation& c,
                                            const RubricSet& rs);

struct Aggregate {
    Label label = Label::Neg;
    double avg_pos = 0.0;
    double avg_neg = 0.0;
    bool operator==(const Aggregate&) const = default;
};

/// avg_L = sum(w_i * s_i / x_max) / n_L; POS iff avg_pos > avg_neg.
/// The comparison is done on integers, the averages are reported as doubles.
Aggregate aggregate(const std::vector<RubricScore>& scores, const RubricSet& rs);

/// Smallest score of one make-or-break hit that forces NEG whatever the other
/// scores are, given non-make-or-break POS weights <= max_pos_weight.
/// May exceed x_max, in which case no single hit is guaranteed to dominate.
int make_or_break_dominance_bound(int x_max, std::size_t n_neg, int max_pos_weight);

struct Verdict {
    std::string conversation_id;
    Label label = Label::Neg;
    double avg_pos = 0.0;
    double avg_neg = 0.0;
    std::vector<RubricScore> scores;
    bool operator==(const Verdict&) const = default;
};

void to_json(json& j, const Verdict& v);
void from_json(const json& j, Verdict& v);

Verdict evaluate(Gateway& gateway, const GenerationConfig& config, const Conversation& c, const RubricSet& rs);

/// Concurrent per-conversation evaluation, results in input order.
std::vector<Verdict> evaluate_all(Gateway& gateway, const GenerationConfig& config,
                                  const std::vector<Conversation>& conversations, const RubricSet& rs);

struct LearnOptions {
    std::size_t sample_size = 10;
    std::size_t max_areas = 5;
    bool exclude_ad = false;
    RubricOptions rubrics;
    std::uint64_t seed = 0;
};

struct LearnResult {
    std::vector<Area> areas;
    std::vector<Reason> reasons;
    RubricSet rubrics;
};

/// Stages 1-3 in sequence.
LearnResult learn(Gateway& gateway, const StageConfigs& configs, const std::vector<Conversation>& train,
                  const LearnOptions& options = {});

// Rubric store: a header record (x_max, provenance) then one record per rubric.
std::string serialize_rubric_store(const RubricSet& rs);
RubricSet parse_rubric_store(const std::string& text);
void save_rubric_store(const std::string& path, const RubricSet& rs);
RubricSet load_rubric_store(const std::string& path);

void save_verdicts(const std::string& path, const std::vector<Verdict>& verdicts);
std::vector<Verdict> load_verdicts(const std::string& path);

}  // namespace scope::pipeline
