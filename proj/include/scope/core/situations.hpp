#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scope/core/model.hpp"

namespace scope {

struct SituationSpec {
    std::string id;
    std::string overall_description;
    std::string user_details;
    std::string tool_details;
    std::string agent_details;
    DimensionLabels expected_labels;

    bool operator==(const SituationSpec&) const = default;
};

void to_json(json& j, const SituationSpec& s);
void from_json(const json& j, SituationSpec& s);

/// The 26 generation situations in stable catalog order.
const std::vector<SituationSpec>& situation_catalog();

/// Throws ConfigError when the id is unknown.
const SituationSpec& find_situation(std::string_view id);
const SituationSpec* try_find_situation(std::string_view id);

/// Distinct expected-label tuples across the catalog.
std::set<DimensionLabels> plausible_combinations();

/// Situations that even human annotators found ambiguous.
bool is_ambiguous_situation(std::string_view id);

/// Lowercase, dash-separated form of a situation id, used for file names.
std::string situation_slug(std::string_view id);

std::vector<SituationSpec> load_situations(const std::string& path);
void save_situations(const std::string& path, const std::vector<SituationSpec>& specs);

}  // namespace scope
