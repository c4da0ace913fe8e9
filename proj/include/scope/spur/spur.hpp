#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scope/core/model.hpp"
#include "scope/errors.hpp"
#include "scope/llm/gateway.hpp"
#include "scope/pipeline/pipeline.hpp"

namespace scope::spur {

enum class Polarity { Sat, Dsat };
std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

/// SAT stands for overall POS, DSAT for NEG.
inline Label to_label(Polarity p) { return p == Polarity::Sat ? Label::Pos : Label::Neg; }
inline Polarity from_label(Label l) { return l == Label::Pos ? Polarity::Sat : Polarity::Dsat; }

inline constexpr std::size_t kReasonsPerConversation = 3;
inline constexpr std::size_t kMaxRubricsPerPolarity = 10;

struct SpurRubric {
    std::string id;
    Polarity polarity = Polarity::Sat;
    std::string text;
    bool operator==(const SpurRubric&) const = default;
};

void to_json(json& j, const SpurRubric& r);
void from_json(const json& j, SpurRubric& r);

struct SpurRubricSet {
    std::vector<SpurRubric> rubrics;
    std::string provenance;

    /// Unique ids, at most 10 per polarity.
    void validate() const;
    std::size_t count(Polarity p) const;
    const SpurRubric* find(std::string_view id) const;
    bool operator==(const SpurRubricSet&) const = default;
};

class EmptyPolarity : public Error {
public:
    explicit EmptyPolarity(Polarity p)
        : Error("no " + std::string(to_string(p)) + " rubrics were produced"), polarity_(p) {}
    Polarity polarity() const noexcept { return polarity_; }

private:
    Polarity polarity_;
};

/// Three reasons per conversation, POS conversations as SAT and NEG as DSAT.
/// Reasons reuse the SCOPE record with the sentinel area.
std::vector<pipeline::Reason> spur_extract(Gateway& gateway, const GenerationConfig& config,
                                           const std::vector<Conversation>& train);

struct SummarizeOptions {
    std::size_t batch_size = 20;
    std::size_t max_per_polarity = kMaxRubricsPerPolarity;
    /// Without it a polarity with no reasons is an error.
    bool allow_empty_polarity = false;
    std::string provenance;
};

SpurRubricSet spur_summarize(Gateway& gateway, const GenerationConfig& config,
                             const std::vector<pipeline::Reason>& reasons, const SummarizeOptions& options = {});

struct SpurVerdict {
    std::string conversation_id;
    Polarity label = Polarity::Dsat;
    int sat_total = 0;
    int dsat_total = 0;
    /// score holds the impact (1-10) of applicable rubrics.
    std::vector<pipeline::RubricScore> impacts;
    bool operator==(const SpurVerdict&) const = default;
};

void to_json(json& j, const SpurVerdict& v);
void from_json(const json& j, SpurVerdict& v);

/// Pure part of estimation: unweighted sums; SAT iff sat_total > dsat_total.
SpurVerdict spur_decide(const std::string& conversation_id, std::vector<pipeline::RubricScore> impacts,
                        const SpurRubricSet& rubrics);

SpurVerdict spur_estimate(Gateway& gateway, const GenerationConfig& config, const Conversation& c,
                          const SpurRubricSet& rubrics);

std::vector<SpurVerdict> spur_estimate_all(Gateway& gateway, const GenerationConfig& config,
                                           const std::vector<Conversation>& conversations,
                                           const SpurRubricSet& rubrics);

struct LearnResult {
    std::vector<pipeline::Reason> reasons;
    SpurRubricSet rubrics;
};

LearnResult learn(Gateway& gateway, const StageConfigs& configs, const std::vector<Conversation>& train,
                  const SummarizeOptions& options = {});

std::string serialize_rubric_store(const SpurRubricSet& rs);
SpurRubricSet parse_rubric_store(const std::string& text);
void save_rubric_store(const std::string& path, const SpurRubricSet& rs);
SpurRubricSet load_rubric_store(const std::string& path);

}  // namespace scope::spur
