#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scope/core/dataset.hpp"
#include "scope/core/situations.hpp"
#include "scope/errors.hpp"
#include "scope/llm/gateway.hpp"

namespace scope::judge {

struct JudgeVerdict {
    std::string conversation_id;
    bool valid = false;
    std::string rationale;
    std::string judge_model;

    bool operator==(const JudgeVerdict&) const = default;
};

void to_json(json& j, const JudgeVerdict& v);
void from_json(const json& j, JudgeVerdict& v);

struct HumanLabel {
    std::string conversation_id;
    bool valid = false;
    std::optional<std::string> annotator;
};

void to_json(json& j, const HumanLabel& h);
void from_json(const json& j, HumanLabel& h);

class UnparseableVerdict : public ParseError {
public:
    using ParseError::ParseError;
};

class NoAcceptedItems : public Error {
public:
    using Error::Error;
};

/// First non-blank line must start with the token VALID or INVALID.
/// The remainder (minus leading punctuation) becomes the rationale.
std::pair<bool, std::string> parse_verdict(const std::string& completion);

Bindings judge_bindings(const Conversation& c, const SituationSpec& spec);

JudgeVerdict judge(Gateway& gateway, const GenerationConfig& config, const Conversation& c, const SituationSpec& spec);

/// Concurrent judging in input order.
std::vector<JudgeVerdict> judge_all(Gateway& gateway, const GenerationConfig& config,
                                    const std::vector<Conversation>& conversations);

/// Gold = human-valid, silver = judge-valid; invalid ones are dropped.
/// Throws ValidationError naming ids present in both inputs.
Dataset assemble_tiers(const std::vector<std::pair<Conversation, bool>>& human_labeled,
                       const std::vector<std::pair<Conversation, JudgeVerdict>>& judged,
                       const std::string& name = "trace");

/// |accepted and truly valid| / |accepted|. Throws ConfigError on a verdict
/// without truth and NoAcceptedItems when nothing was accepted.
double judge_precision(const std::vector<JudgeVerdict>& verdicts, const std::map<std::string, bool>& truth);

/// |accepted and truly valid| / |truly valid|; nullopt when nothing is truly valid.
std::optional<double> judge_recall(const std::vector<JudgeVerdict>& verdicts, const std::map<std::string, bool>& truth);

std::vector<HumanLabel> load_human_labels(const std::string& path);
std::vector<JudgeVerdict> load_verdicts(const std::string& path);
void save_verdicts(const std::string& path, const std::vector<JudgeVerdict>& verdicts);

}  // namespace scope::judge
