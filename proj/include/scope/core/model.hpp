#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace scope {

using json = nlohmann::json;

enum class Role { User, Agent, ToolCall, ToolResult };
enum class ToolExecution { Correct, IncorrectDueToAgent, IncorrectDueToToolError };
enum class AgentPerformance { Appropriate, NotAppropriate };
enum class UserSatisfaction { Satisfied, Dissatisfied };
enum class Label { Pos, Neg };
enum class Tier { Gold, Silver, Unfiltered };
enum class Subset { Easy, HardNegative };

std::string_view to_string(Role v);
std::string_view to_string(ToolExecution v);
std::string_view to_string(AgentPerformance v);
std::string_view to_string(UserSatisfaction v);
std::string_view to_string(Label v);
std::string_view to_string(Tier v);
std::string_view to_string(Subset v);

// Parsers throw ParseError on unknown spellings.
Role parse_role(std::string_view s);
ToolExecution parse_tool_execution(std::string_view s);
AgentPerformance parse_agent_performance(std::string_view s);
UserSatisfaction parse_user_satisfaction(std::string_view s);
Label parse_label(std::string_view s);
Tier parse_tier(std::string_view s);

struct Turn {
    Role role = Role::User;
    std::string content;
    std::optional<std::string> tool_name;
    std::optional<std::map<std::string, std::string>> arguments;

    bool operator==(const Turn&) const = default;
};

struct DimensionLabels {
    ToolExecution tool_execution = ToolExecution::Correct;
    AgentPerformance agent_performance = AgentPerformance::Appropriate;
    UserSatisfaction user_satisfaction = UserSatisfaction::Satisfied;
    Label overall = Label::Pos;

    auto operator<=>(const DimensionLabels&) const = default;
};

std::string describe(const DimensionLabels& labels);

struct Conversation {
    std::string id;
    std::vector<Turn> turns;
    DimensionLabels labels;
    std::string situation_id;
    std::string generator;
    Tier tier = Tier::Unfiltered;
    std::string tool_group;

    bool operator==(const Conversation&) const = default;
};

void to_json(json& j, const Turn& t);
void from_json(const json& j, Turn& t);
void to_json(json& j, const DimensionLabels& l);
void from_json(const json& j, DimensionLabels& l);
void to_json(json& j, const Conversation& c);
void from_json(const json& j, Conversation& c);

/// Checks the per-turn invariants and the user/agent presence rule.
/// Throws ValidationError naming the conversation id.
void validate_turns(const Conversation& c);

/// hard_negative iff the user is satisfied and the overall label is NEG.
Subset classify_subset(const Conversation& c);

}  // namespace scope
