#pragma once

#include <string_view>
#include <vector>

#include "scope/llm/gateway.hpp"

namespace scope::prompts {

// Template ids. The id is part of every request fingerprint, so renaming one
// invalidates recorded mock scripts.
inline constexpr std::string_view kNames = "names.generate";
inline constexpr std::string_view kGenerateZeroShot = "synthesis.generate.zero_shot";
inline constexpr std::string_view kGenerateOneShot = "synthesis.generate.one_shot";
inline constexpr std::string_view kJudge = "judge.filter";
inline constexpr std::string_view kAreaDiscovery = "scope.area_discovery";
inline constexpr std::string_view kExtractPos = "scope.extract.pos";
inline constexpr std::string_view kExtractNeg = "scope.extract.neg";
inline constexpr std::string_view kExtractPosNoAreas = "scope.extract.pos.no_areas";
inline constexpr std::string_view kExtractNegNoAreas = "scope.extract.neg.no_areas";
inline constexpr std::string_view kSummarizePos = "scope.summarize.pos";
inline constexpr std::string_view kSummarizeNeg = "scope.summarize.neg";
inline constexpr std::string_view kWeightPos = "scope.weight.pos";
inline constexpr std::string_view kWeightNeg = "scope.weight.neg";
inline constexpr std::string_view kWeightNegNoMakeOrBreak = "scope.weight.neg.no_mb";
inline constexpr std::string_view kLabelEstimation = "scope.label_estimation";
inline constexpr std::string_view kSpurExtractSat = "spur.extract.sat";
inline constexpr std::string_view kSpurExtractDsat = "spur.extract.dsat";
inline constexpr std::string_view kSpurSummarizeSat = "spur.summarize.sat";
inline constexpr std::string_view kSpurSummarizeDsat = "spur.summarize.dsat";
inline constexpr std::string_view kSpurEstimate = "spur.estimate";

/// Throws ConfigError for unknown ids.
const PromptTemplate& get(std::string_view id);
const std::vector<PromptTemplate>& all();

}  // namespace scope::prompts
