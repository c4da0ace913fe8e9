#include "scope/core/model.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "scope/errors.hpp"

namespace scope {

namespace {

template <class E, std::size_t N>
using Names = std::array<std::pair<E, std::string_view>, N>;

constexpr Names<Role, 4> kRoles{{{Role::User, "user"},
                                 {Role::Agent, "agent"},
                                 {Role::ToolCall, "tool_call"},
                                 {Role::ToolResult, "tool_result"}}};
constexpr Names<ToolExecution, 3> kToolExecution{{{ToolExecution::Correct, "correct"},
                                                  {ToolExecution::IncorrectDueToAgent, "incorrect_due_to_agent"},
                                                  {ToolExecution::IncorrectDueToToolError,
                                                   "incorrect_due_to_tool_error"}}};
constexpr Names<AgentPerformance, 2> kAgent{{{AgentPerformance::Appropriate, "appropriate"},
                                             {AgentPerformance::NotAppropriate, "not_appropriate"}}};
constexpr Names<UserSatisfaction, 2> kUser{{{UserSatisfaction::Satisfied, "satisfied"},
                                            {UserSatisfaction::Dissatisfied, "dissatisfied"}}};
constexpr Names<Label, 2> kLabels{{{Label::Pos, "POS"}, {Label::Neg, "NEG"}}};
constexpr Names<Tier, 3> kTiers{{{Tier::Gold, "gold"}, {Tier::Silver, "silver"}, {Tier::Unfiltered, "unfiltered"}}};
constexpr Names<Subset, 2> kSubsets{{{Subset::Easy, "easy"}, {Subset::HardNegative, "hard_negative"}}};

template <class E, std::size_t N>
std::string_view name_of(const Names<E, N>& names, E v) {
    for (const auto& [e, s] : names)
        if (e == v) return s;
    return "?";
}

template <class E, std::size_t N>
E value_of(const Names<E, N>& names, std::string_view s, std::string_view what) {
    for (const auto& [e, n] : names)
        if (n == s) return e;
    throw ParseError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

std::string require_string(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ParseError(std::string("missing or non-string field '") + key + "'");
    return j.at(key).get<std::string>();
}

}  // namespace

std::string_view to_string(Role v) { return name_of(kRoles, v); }
std::string_view to_string(ToolExecution v) { return name_of(kToolExecution, v); }
std::string_view to_string(AgentPerformance v) { return name_of(kAgent, v); }
std::string_view to_string(UserSatisfaction v) { return name_of(kUser, v); }
std::string_view to_string(Label v) { return name_of(kLabels, v); }
std::string_view to_string(Tier v) { return name_of(kTiers, v); }
std::string_view to_string(Subset v) { return name_of(kSubsets, v); }

Role parse_role(std::string_view s) { return value_of(kRoles, s, "role"); }
ToolExecution parse_tool_execution(std::string_view s) { return value_of(kToolExecution, s, "tool_execution"); }
AgentPerformance parse_agent_performance(std::string_view s) { return value_of(kAgent, s, "agent_performance"); }
UserSatisfaction parse_user_satisfaction(std::string_view s) { return value_of(kUser, s, "user_satisfaction"); }
Label parse_label(std::string_view s) { return value_of(kLabels, s, "label"); }
Tier parse_tier(std::string_view s) { return value_of(kTiers, s, "tier"); }

std::string describe(const DimensionLabels& l) {
    std::string out = "(";
    out += to_string(l.tool_execution);
    out += ", ";
    out += to_string(l.agent_performance);
    out += ", ";
    out += to_string(l.user_satisfaction);
    out += ", ";
    out += to_string(l.overall);
    out += ")";
    return out;
}

void to_json(json& j, const Turn& t) {
    j = json{{"role", to_string(t.role)}, {"content", t.content}};
    if (t.tool_name) j["tool_name"] = *t.tool_name;
    if (t.arguments) j["arguments"] = *t.arguments;
}

void from_json(const json& j, Turn& t) {
    if (!j.is_object()) throw ParseError("turn is not an object");
    t.role = parse_role(require_string(j, "role"));
    t.content = require_string(j, "content");
    t.tool_name.reset();
    t.arguments.reset();
    if (j.contains("tool_name")) t.tool_name = require_string(j, "tool_name");
    if (j.contains("arguments")) {
        const auto& a = j.at("arguments");
        if (!a.is_object()) throw ParseError("'arguments' must be an object");
        std::map<std::string, std::string> args;
        for (const auto& [k, v] : a.items()) args[k] = v.is_string() ? v.get<std::string>() : v.dump();
        t.arguments = std::move(args);
    }
}

void to_json(json& j, const DimensionLabels& l) {
    j = json{{"tool_execution", to_string(l.tool_execution)},
             {"agent_performance", to_string(l.agent_performance)},
             {"user_satisfaction", to_string(l.user_satisfaction)},
             {"overall", to_string(l.overall)}};
}

void from_json(const json& j, DimensionLabels& l) {
    if (!j.is_object()) throw ParseError("labels is not an object");
    l.tool_execution = parse_tool_execution(require_string(j, "tool_execution"));
    l.agent_performance = parse_agent_performance(require_string(j, "agent_performance"));
    l.user_satisfaction = parse_user_satisfaction(require_string(j, "user_satisfaction"));
    l.overall = parse_label(require_string(j, "overall"));
}

void to_json(json& j, const Conversation& c) {
    j = json{{"id", c.id},
             {"turns", c.turns},
             {"labels", c.labels},
             {"situation_id", c.situation_id},
             {"generator", c.generator},
             {"tier", to_string(c.tier)},
             {"tool_group", c.tool_group}};
}

void from_json(const json& j, Conversation& c) {
    if (!j.is_object()) throw ParseError("record is not an object");
    c.id = require_string(j, "id");
    if (!j.contains("turns") || !j.at("turns").is_array()) throw ParseError("missing 'turns' array");
    c.turns = j.at("turns").get<std::vector<Turn>>();
    if (!j.contains("labels")) throw ParseError("missing 'labels'");
    c.labels = j.at("labels").get<DimensionLabels>();
    c.situation_id = require_string(j, "situation_id");
    c.generator = require_string(j, "generator");
    c.tier = parse_tier(require_string(j, "tier"));
    c.tool_group = require_string(j, "tool_group");
}

void validate_turns(const Conversation& c) {
    bool has_user = false;
    bool has_agent = false;
    std::vector<std::string> called;
    for (std::size_t i = 0; i < c.turns.size(); ++i) {
        const Turn& t = c.turns[i];
        const std::string where = c.id + " turn " + std::to_string(i);
        switch (t.role) {
            case Role::User:
            case Role::Agent:
                if (t.tool_name || t.arguments)
                    throw ValidationError("user/agent turns carry no tool_name or arguments", where);
                (t.role == Role::User ? has_user : has_agent) = true;
                break;
            case Role::ToolCall:
                if (!t.tool_name || t.tool_name->empty() || !t.arguments)
                    throw ValidationError("tool_call turns carry tool_name and arguments", where);
                called.push_back(*t.tool_name);
                break;
            case Role::ToolResult:
                if (!t.tool_name || t.tool_name->empty())
                    throw ValidationError("tool_result turns carry tool_name", where);
                if (t.arguments) throw ValidationError("only tool_call turns carry arguments", where);
                if (std::find(called.begin(), called.end(), *t.tool_name) == called.end())
                    throw ValidationError("tool_result preceded by a tool_call of the same tool", where);
                break;
        }
    }
    if (!has_user || !has_agent)
        throw ValidationError("conversation needs at least one user and one agent turn", c.id);
}

Subset classify_subset(const Conversation& c) {
    return c.labels.user_satisfaction == UserSatisfaction::Satisfied && c.labels.overall == Label::Neg
               ? Subset::HardNegative
               : Subset::Easy;
}

}  // namespace scope
