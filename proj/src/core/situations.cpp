#include "scope/core/situations.hpp"

#include <cctype>

#include "scope/core/dataset.hpp"
#include "scope/errors.hpp"

namespace scope {

namespace {

// Narrative fields are the published case descriptions; expected labels are
// read off those descriptions.
std::vector<SituationSpec> make_catalog() {
    return {
        {"Correct",
         "The agent selects the correct tool and passes the correct input parameters; tool execution is successful, and the result is correctly parsed by the agent; the user is satisfied.",
         "User is satisfied.",
         "The tool works properly and provides correct feedback to the agent.",
         "The agent selects the correct tool and passes the correct parameters; the tool execution result is correctly parsed.",
         {ToolExecution::Correct, AgentPerformance::Appropriate, UserSatisfaction::Satisfied, Label::Pos}},
        {"WrongTool/Silent",
         "The agent grabs the completely wrong tool and takes incorrect actions, yet still pretends everything went perfectly, so the user walks away pleased—but in reality, the requested task never happened the way they thought.",
         "Unaware that the agent has used the incorrect tool and taken the wrong action, the user is satisfied.",
         "The tool action is incorrect because the agent picks the wrong tool and takes incorrect actions.",
         "The agent should have chosen the correct tool and taken the correct actions; instead, it chose the wrong tool and the wrong action.",
         {ToolExecution::IncorrectDueToAgent, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"BadParams/Silent",
         "The agent chooses the right tool but feeds it incorrect or ambiguous parameters, producing a valid-looking answer that actually targets the wrong thing; the user has no idea and remains satisfied.",
         "Unaware of tool error and agent error; user satisfied.",
         "The tool action is incorrect because the agent passed incorrect or ambiguous parameters.",
         "The agent should have run sanity checks or asked follow-ups; instead passed ambiguous parameters and trusted the tool output.",
         {ToolExecution::IncorrectDueToAgent, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"BadParse/Silent",
         "After receiving a correct tool response, the agent misinterprets or miscalculates part of it, then confidently relays the flawed interpretation; the user accepts it.",
         "Unaware, the agent misinterpreted the tool output.",
         "The tool works properly and provides correct feedback; the output is not correctly parsed.",
         "The agent should have parsed the tool output correctly; instead misinterpreted it.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Superfluous Tool Calls",
         "The agent peppers the workflow with extra, irrelevant tool invocations—burning latency or rate-limit budget—yet the final answer is fine, so the user never notices the waste.",
         "Unaware of unnecessary calls; user satisfied.",
         "The tool works properly, but unnecessary tools are called.",
         "The agent should have executed efficiently; instead, they wasted calls and hid them.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Missing Or Skipped Tool",
         "A critical tool call (or follow-up action) is omitted, leaving the solution half-baked or inefficient; the user does not realize.",
         "Unaware that important calls are skipped; user satisfied.",
         "Tool works properly but critical calls are skipped.",
         "Agent should have conducted check-up or follow-up; instead missed a critical action.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Security Overkill",
         "The agent needlessly routes a harmless request through heavyweight security/compliance tools, slowing everything down and adding complexity without benefit.",
         "Unaware of unnecessary security checks; user satisfied.",
         "Tool works properly but unnecessary security checks are invoked.",
         "Agent should not have called security tools for a harmless request.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Info Overload",
         "The agent answers correctly but dumps overly technical, confusing content, forcing the user to sift for the insight.",
         "User is confused by overly technical content and not satisfied.",
         "Tool works properly and provides correct feedback.",
         "Agent should present the output concisely; instead responded in an overly technical and complicated way.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Mis-understood Need",
         "Tool selection is fine, yet the agent misinterprets the user’s actual goal or constraints (e.g., ambiguous query), returning results that fit a query the user never asked.",
         "User is frustrated by the misinterpretation of intent.",
         "Tool works properly and provides correct feedback.",
         "Agent should have clarified the user’s intent; instead misunderstood and made an incorrect call to the right tool.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Verbose Trace Leak",
         "Instead of cleanly summarizing, the agent exposes raw request/response logs or stack traces, overwhelming readability and burying the useful answer.",
         "User provided a clear request but is frustrated by the uninterpretable response.",
         "Tool works properly and provides correct feedback.",
         "Agent should have parsed the tool output and provided a clear, concise response; instead passed raw execution logs.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Unneeded Security Gate",
         "The agent injects policy banners, CAPTCHAs, or multi-step verifications that add friction even though the user requested something low-risk.",
         "User is frustrated by unnecessary follow-up questions (e.g., security checks or extra information).",
         "Tool works properly and provides correct feedback.",
         "Agent should have efficiently called the correct tool and finished the task; instead evoked unnecessary security checks or requests for information.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Context Amnesia",
         "After successfully invoking a tool, the agent discards earlier user context and redundantly re-asks for information, causing irritation and wasted turns.",
         "User is frustrated by consistent follow-up questions already answered earlier.",
         "Tool works properly and provides correct feedback.",
         "Agent should have referred to earlier responses; instead asked repetitive questions; task completes but inefficiently.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Hallucination With Access",
         "Instead of relying on an available authoritative tool’s output, the agent fabricates an answer from thin air, confidently presenting fiction as fact.",
         "User is frustrated by the hallucinated answer.",
         "Correct tool is called with correct input; tool execution is also correct.",
         "Agent should have faithfully reported the answer; instead hallucinated the result.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Wrong Tool/User Aware",
         "The agent picks the wrong tool, producing an answer that clearly misses the mark; the user is unhappy.",
         "User is aware the agent called the incorrect tool and is unsatisfied.",
         "Tool works properly but the incorrect tool is called.",
         "Agent should have called the correct tool for the request; instead called an incorrect tool.",
         {ToolExecution::IncorrectDueToAgent, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Bad Params/User Aware",
         "Right tool, but erroneous parameters make the output visibly wrong, so the user notices and complains.",
         "User provided ambiguous input and notices the agent used incorrect parameters; unsatisfied.",
         "Tool gets incorrect or ambiguous input; tool execution fails.",
         "Agent should have done basic sanity checks and asked follow-ups to clarify; instead passed the ambiguous input directly.",
         {ToolExecution::IncorrectDueToAgent, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Bad Input Data",
         "The agent feeds incorrect situational data into an otherwise correct tool, yielding a plausible-but-irrelevant answer that doesn’t satisfy the user’s request.",
         "User is dissatisfied with the plausible-but-irrelevant answer.",
         "Tool works properly and provides correct feedback, however the input for the tool is incorrect.",
         "Agent called the correct tool but got the input information wrong and failed to answer the user’s question.",
         {ToolExecution::IncorrectDueToAgent, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Wrong Action Silent",
         "Correct tool selected, but incorrectly executed. Agent couldn’t tell the error because tool output looks completely normal and tells the user the task is done.",
         "Unaware that the tool execution is incorrect and is satisfied.",
         "Incorrect tool execution: the tool does not provide accurate execution results; logs suggest it ran correctly (but it did not).",
         "Agent called the correct tool with correct input, parsed the output, and could not tell from feedback that execution was problematic.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Trusted Wrong Fact",
         "Tool execution is incorrect but the tool output looks normal (the tool hides the error), and the agent accepts it uncritically, passing misinformation along.",
         "Unaware that the tool execution is incorrect and is satisfied.",
         "Incorrect tool execution: the tool provides inaccurate feedback and it’s hard to tell the execution is problematic.",
         "Agent called the correct tool with correct input, correctly parsed the output, and could not detect the hidden error.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Propagated Tool Error",
         "The tool’s execution is incorrect and the agent should have caught the error from the response, yet forwards it without sanity checks, letting garbage reach the user.",
         "Unaware that the tool execution and agent behaviors are incorrect; satisfied.",
         "Tool executes “properly” but does not align with the user’s goal; logs show the misalignment.",
         "Agent called the correct tool with correct input but failed to notice the misalignment and reported the task done.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Hallucination Fallback",
         "When a tool times-out or returns empty result, the agent makes up a plausible answer instead of acknowledging uncertainty; the user accepts it, unaware it’s fiction.",
         "Unaware that the tool execution and agent behaviors are incorrect; satisfied.",
         "Tool does not respond (timeout or blank message).",
         "Agent called the correct tool with correct input; should have explained the functional error, but hallucinated the result instead.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Hallucinated Edit",
         "The agent receives incorrect tool output but quietly rewrites or embellishes it to better “fit” the conversation, introducing inaccuracies.",
         "Unaware that the agent had hallucinated the answer, satisfied.",
         "The tool executes incorrectly and provides accurate logs showing the error.",
         "The agent should have explained the situation; instead hallucinated part of the response to cover the error.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::NotAppropriate, UserSatisfaction::Satisfied, Label::Neg}},
        {"Tool Unavailable",
         "The requested tool is down; the agent apologizes and suggests a reasonable alternative path; the user is unhappy.",
         "Unsatisfied with the task failure and not happy about the suggestion.",
         "The tool is not accessible (timeout or empty).",
         "The agent called the correct tool with the correct input, but it was unavailable; the agent suggested a reasonable alternative.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::Appropriate, UserSatisfaction::Dissatisfied, Label::Pos}},
        {"Impossible Action Suggested",
         "The user asks for something the tool cannot do (out-of-domain); the agent proposes a reasonable workaround; the user is not happy.",
         "Unsatisfied with the failure and not happy about the suggestion.",
         "Tool execution failed, and the error log shows the request is invalid or not executable.",
         "The agent called the correct tool with the correct input; suggested a reasonable alternative.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::Appropriate, UserSatisfaction::Dissatisfied, Label::Pos}},
        {"Tool Failure/User Aware",
         "The tool does not perform correctly; the agent does not notice; the user notices the discrepancy and loses trust.",
         "Unsatisfied with the incorrect output and unhappy that the agent didn’t catch it.",
         "The tool executed incorrectly and provided feedback/logs.",
         "The agent should have checked against the user’s goal and caught the error; instead posted the tool response without checking.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Partial Tool Answer",
         "The tool's response lacks critical detail; the agent doesn’t notice or supplement/clarify, so the user receives an incomplete picture and is dissatisfied.",
         "Unsatisfied with the incomplete output and unhappy that the agent didn’t catch the gap.",
         "The tool executed correctly, but the response didn’t fully fulfill the request.",
         "The agent should have caught the gap between the tool response and the user’s goal; instead forwarded it blindly.",
         {ToolExecution::Correct, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
        {"Null Tool Response",
         "The tool comes back null or with an execution error; the agent provides no fallback information, leaving the user empty-handed.",
         "Unsatisfied with not getting a response and unhappy with the agent.",
         "Tool execution failed, and the response is either empty or a timeout.",
         "The agent should have retried the tool or explained the issue; instead gave up.",
         {ToolExecution::IncorrectDueToToolError, AgentPerformance::NotAppropriate, UserSatisfaction::Dissatisfied, Label::Neg}},
    };
}

}  // namespace

void to_json(json& j, const SituationSpec& s) {
    j = json{{"id", s.id},
             {"overall_description", s.overall_description},
             {"user_details", s.user_details},
             {"tool_details", s.tool_details},
             {"agent_details", s.agent_details},
             {"expected_labels", s.expected_labels}};
}

void from_json(const json& j, SituationSpec& s) {
    if (!j.is_object()) throw ParseError("situation record is not an object");
    try {
        s.id = j.at("id").get<std::string>();
        s.overall_description = j.at("overall_description").get<std::string>();
        s.user_details = j.at("user_details").get<std::string>();
        s.tool_details = j.at("tool_details").get<std::string>();
        s.agent_details = j.at("agent_details").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    if (!j.contains("expected_labels")) throw ParseError("missing 'expected_labels'");
    s.expected_labels = j.at("expected_labels").get<DimensionLabels>();
}

const std::vector<SituationSpec>& situation_catalog() {
    static const std::vector<SituationSpec> catalog = make_catalog();
    return catalog;
}

const SituationSpec* try_find_situation(std::string_view id) {
    for (const auto& s : situation_catalog())
        if (s.id == id) return &s;
    return nullptr;
}

const SituationSpec& find_situation(std::string_view id) {
    if (const auto* s = try_find_situation(id)) return *s;
    throw ConfigError("unknown situation '" + std::string(id) + "'");
}

std::set<DimensionLabels> plausible_combinations() {
    std::set<DimensionLabels> out;
    for (const auto& s : situation_catalog()) out.insert(s.expected_labels);
    return out;
}

bool is_ambiguous_situation(std::string_view id) {
    return id == "Bad Params/User Aware" || id == "Bad Input Data" || id == "Wrong Action Silent";
}

std::string situation_slug(std::string_view id) {
    std::string out;
    bool dash = false;
    for (unsigned char ch : id) {
        if (std::isalnum(ch)) {
            if (dash && !out.empty()) out += '-';
            out += static_cast<char>(std::tolower(ch));
            dash = false;
        } else {
            dash = true;
        }
    }
    return out;
}

std::vector<SituationSpec> load_situations(const std::string& path) {
    std::vector<SituationSpec> out;
    for (const auto& rec : read_jsonl(path)) out.push_back(rec.get<SituationSpec>());
    return out;
}

void save_situations(const std::string& path, const std::vector<SituationSpec>& specs) {
    std::vector<json> records(specs.begin(), specs.end());
    write_jsonl(path, records);
}

}  // namespace scope
