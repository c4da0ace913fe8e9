#include "scope/llm/prompts.hpp"

#include "scope/errors.hpp"

namespace scope::prompts {

namespace {

constexpr const char* kTranscriptFormat = R"(Write every turn on its own line using exactly these markers:
USER: <what the user says>
AGENT: <what the agent says>
TOOL_CALL <ToolName> <JSON object of arguments>:
TOOL_RESULT <ToolName>: <raw output returned by the tool>
Do not write anything before the first marker or after the last turn.)";

std::vector<PromptTemplate> build() {
    std::vector<PromptTemplate> out;
    auto add = [&](std::string_view id, std::string body) { out.push_back(PromptTemplate::make(std::string(id), std::move(body))); };

    add(kNames, R"(Generate {count} distinct, realistic first names of people from a variety of cultures.
Variation key: {variation}
Answer with the names only, separated by commas, on a single line.)");

    const std::string case_block = R"(Case: {case_id}
Overall description: {overall_description}
User details: {user_details}
Tool details: {tool_details}
Agent details: {agent_details})";

    add(kGenerateZeroShot, "You are writing a realistic multi-turn conversation between a user and an AI agent that can call tools.\n"
                           "The conversation must follow the case below exactly; every detail of the case has to be visible in the transcript.\n\n" +
                               case_block +
                               "\n\nAvailable tools (JSON schemas):\n{tools}\n\n"
                               "Use only the tools listed above and simulate their outputs yourself. "
                               "Use these names for people mentioned in the conversation: {names}.\n\n" +
                               kTranscriptFormat);

    add(kGenerateOneShot, "You are writing a realistic multi-turn conversation between a user and an AI agent that can call tools.\n"
                          "The conversation must follow the case below exactly; every detail of the case has to be visible in the transcript.\n\n" +
                              case_block +
                              "\n\nAvailable tools (JSON schemas):\n{tools}\n\n"
                              "Use only the tools listed above and simulate their outputs yourself. "
                              "Use these names for people mentioned in the conversation: {names}.\n\n"
                              "Here is an example conversation for the same case, written with different tools:\n{exemplar}\n\n" +
                              kTranscriptFormat);

    add(kJudge, "You check whether a synthetic conversation matches the case it was generated for.\n\n" + case_block +
                    R"(

Conversation:
{conversation}

Compare the conversation with every part of the case description: the overall description, the user, the tool and the agent.
If any single point does not match, the conversation is invalid.
Start your answer with the word VALID or INVALID on the first line, then explain your decision.)");

    add(kAreaDiscovery, R"(Below are conversations between users and an AI agent that can call external tools.

{conversations}

Identify at most {max_areas} distinct areas that matter when judging the quality of such conversations. Consider the user's experience, how the agent uses tools, how it reacts to tool output and errors, and how the interaction flows.
List one area per line as:
<number>. <Area name>: <one sentence describing what the area covers>)");

    const std::string extract_tail = R"(

Evaluation areas:
{areas}

Conversation:
{conversation}

For each area that applies to this conversation, give one short reason. Write one reason per line as:
[<Area name>] <reason>
Use the area names exactly as listed. Skip areas that do not apply.)";

    add(kExtractPos, "The following conversation was judged GOOD overall. Explain what made it good." + extract_tail);
    add(kExtractNeg, "The following conversation was judged BAD overall. Explain what went wrong, paying attention to the "
                     "user, the agent and the tools." +
                         extract_tail);

    const std::string extract_free_tail = R"(

Conversation:
{conversation}

Write one short reason per line, each starting with "- ".)";
    add(kExtractPosNoAreas, "The following conversation was judged GOOD overall. Explain what made it good." + extract_free_tail);
    add(kExtractNegNoAreas, "The following conversation was judged BAD overall. Explain what went wrong." + extract_free_tail);

    const std::string summarize_body = R"(

Current rubrics:
{existing_rubrics}

New reasons:
{reasons}

Merge the new reasons into the current rubrics. Combine rubrics that say the same thing and keep the list general enough to apply to unseen conversations. Return at most {max_rubrics} rubrics, one per line, as:
<number>. [<Area name>] <Rubric title>: <what the rubric checks>
The bracketed area is the area the rubric mostly comes from.)";
    add(kSummarizePos, "You summarize reasons why conversations between users and a tool-using AI agent went WELL into "
                       "evaluation rubrics." +
                           summarize_body);
    add(kSummarizeNeg, "You summarize reasons why conversations between users and a tool-using AI agent went BADLY into "
                       "evaluation rubrics." +
                           summarize_body);

    add(kWeightPos, R"(Below are rubrics describing good behaviour in conversations between users and a tool-using AI agent.

{rubrics}

Rate how important each rubric is for the overall quality of a conversation on an integer scale from 1 (minor) to 10 (essential).
Answer one line per rubric as:
<rubric id>: <weight>)");

    add(kWeightNeg, R"(Below are rubrics describing problems in conversations between users and a tool-using AI agent.

{rubrics}

Rate how severe each problem is on an integer scale from 1 (minor) to 10 (severe).
Also decide whether the problem is make-or-break: a single occurrence means the conversation failed, however well everything else went (for example, reporting a result the tool never returned).
Answer one line per rubric as:
<rubric id>: <weight> | make-or-break: <yes or no>)");

    add(kWeightNegNoMakeOrBreak, R"(Below are rubrics describing problems in conversations between users and a tool-using AI agent.

{rubrics}

Rate how severe each problem is on an integer scale from 1 (minor) to 10 (severe).
Answer one line per rubric as:
<rubric id>: <weight>)");

    add(kLabelEstimation, R"(You evaluate a conversation between a user and an AI agent that can call tools.

Positive rubrics:
{pos_rubrics}

Negative rubrics:
{neg_rubrics}

Conversation:
{conversation}

For every rubric decide whether it applies to the conversation. If it applies, score how strongly on an integer scale from 0 to {x_max} and quote the evidence. Answer one line per rubric as:
<rubric id>: <score> | <evidence>
or, when the rubric does not apply:
<rubric id>: N/A)");

    const std::string spur_extract_tail = R"(

Conversation:
{conversation}

Give exactly 3 reasons, one per line, as:
<number>. <reason>)";
    add(kSpurExtractSat, "The user in the following conversation with an AI assistant was SATISFIED. Explain why the user "
                         "was satisfied." +
                             spur_extract_tail);
    add(kSpurExtractDsat, "The user in the following conversation with an AI assistant was DISSATISFIED. Explain why the "
                          "user was dissatisfied." +
                              spur_extract_tail);

    const std::string spur_summarize_body = R"(

Current rubrics:
{existing_rubrics}

New reasons:
{reasons}

Merge the new reasons into the current rubrics so that the list stays general. Return at most {max_rubrics} rubrics, one per line, as:
<number>. <Rubric title>: <description>)";
    add(kSpurSummarizeSat, "You summarize reasons for user SATISFACTION with an AI assistant into rubrics." + spur_summarize_body);
    add(kSpurSummarizeDsat, "You summarize reasons for user DISSATISFACTION with an AI assistant into rubrics." + spur_summarize_body);

    add(kSpurEstimate, R"(You estimate whether the user is satisfied with a conversation with an AI assistant.

Satisfaction rubrics:
{sat_rubrics}

Dissatisfaction rubrics:
{dsat_rubrics}

Conversation:
{conversation}

For every rubric decide whether it applies. If it does, rate its impact on the user's satisfaction from 1 to 10. Answer one line per rubric as:
<rubric id>: <impact>
or, when the rubric does not apply:
<rubric id>: N/A)");

    return out;
}

}  // namespace

const std::vector<PromptTemplate>& all() {
    static const std::vector<PromptTemplate> templates = build();
    return templates;
}

const PromptTemplate& get(std::string_view id) {
    for (const auto& t : all())
        if (t.id == id) return t;
    throw ConfigError("unknown prompt template '" + std::string(id) + "'");
}

}  // namespace scope::prompts
