#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scope/core/model.hpp"
#include "scope/core/tools.hpp"
#include "scope/errors.hpp"
#include "scope/llm/gateway.hpp"

namespace scope::synthesis {

enum class ShotMode { ZeroShot, OneShot };
std::string_view to_string(ShotMode m);

struct SynthesisJob {
    std::string situation_id;
    std::string tool_group;
    ShotMode shot_mode = ShotMode::ZeroShot;
    std::optional<Conversation> exemplar;
    std::vector<std::string> names;
    std::uint64_t seed = 0;

    /// Exemplar present exactly for one-shot jobs; situation and tool group resolve.
    void validate(const ToolCatalog& catalog) const;
};

/// Transcript grammar violation in a model completion; keeps the raw text for triage.
class SynthesisParseFailure : public ParseError {
public:
    SynthesisParseFailure(const std::string& what, std::string raw) : ParseError(what), raw_(std::move(raw)) {}
    const std::string& raw_text() const noexcept { return raw_; }

private:
    std::string raw_;
};

class InsufficientNames : public Error {
public:
    using Error::Error;
};

/// Uniform draw among the catalog's groups, reproducible from the seed.
std::string sample_tool_group(std::uint64_t seed, const ToolCatalog& catalog);

/// Asks the model for names until `count` distinct ones are collected or
/// `max_attempts` prompts were spent.
std::vector<std::string> generate_names(Gateway& gateway, const GenerationConfig& config, std::size_t count,
                                        std::uint64_t seed, int max_attempts = 3);

/// Deterministic conversation id for a job.
std::string conversation_id(const SynthesisJob& job);

/// Parses a generated transcript into an unfiltered Conversation carrying the
/// situation's expected labels. Tools must belong to the job's group.
Conversation parse_generated(const std::string& completion, const SynthesisJob& job, const ToolCatalog& catalog,
                             const std::string& generator);

Bindings generation_bindings(const SynthesisJob& job, const ToolCatalog& catalog);

Conversation synthesize(Gateway& gateway, const GenerationConfig& config, const SynthesisJob& job,
                        const ToolCatalog& catalog);

/// Curated one-shot exemplars keyed by situation id.
class ExemplarStore {
public:
    ExemplarStore() = default;
    /// Reads every *.jsonl file in `dir`; each file holds conversations of one or more situations.
    static ExemplarStore load(const std::string& dir);

    void add(Conversation c);
    const std::vector<Conversation>* find(const std::string& situation_id) const;
    std::size_t size() const;

private:
    std::map<std::string, std::vector<Conversation>> by_situation_;
};

enum class ModePolicy { Paper, AllZeroShot, AllOneShot };
ModePolicy parse_mode_policy(std::string_view s);

/// Jobs in catalog order, `count` per situation. Under ModePolicy::Paper
/// NEG situations are one-shot with a curated exemplar and POS ones zero-shot.
/// Throws ConfigError for unknown situations or a missing exemplar.
std::vector<SynthesisJob> build_batch(const std::map<std::string, int>& spec, ModePolicy policy,
                                      const ExemplarStore& exemplars, const ToolCatalog& catalog, std::uint64_t seed);

std::map<std::string, int> parse_batch_spec(const std::string& text);

struct SynthesisOutcome {
    std::optional<Conversation> conversation;
    std::string error;
    std::string raw_text;
};

void to_json(json& j, const SynthesisOutcome& o);

struct BatchSettings {
    std::size_t names_per_job = 3;
    bool warn_ambiguous = true;
};

/// Names + synthesis for every job, concurrently up to the gateway bound.
/// Parse failures are captured per job; gateway errors propagate.
std::vector<SynthesisOutcome> run_batch(Gateway& gateway, const StageConfigs& configs,
                                        std::vector<SynthesisJob> jobs, const ToolCatalog& catalog,
                                        const BatchSettings& settings = {});

}  // namespace scope::synthesis
