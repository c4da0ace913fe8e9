#include "scope/sim/sim.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "scope/core/situations.hpp"
#include "scope/core/transcript.hpp"
#include "scope/core/util.hpp"
#include "scope/errors.hpp"
#include "scope/llm/prompts.hpp"

namespace scope::sim {

namespace {

struct Scenario {
    std::string tool, key, request, args, result, report;
    std::string bad_args, bad_result, bad_report;
    std::string misreport, wrong_result, wrong_report;
};

const std::vector<Scenario>& scenarios() {
    static const std::vector<Scenario> table = {
#include "scenarios.inc"
    };
    return table;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::set<std::string> digit_runs(std::string_view s) {
    std::set<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            cur += c;
        } else if (!cur.empty()) {
            out.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.insert(cur);
    return out;
}

bool any_of_ci(std::string_view text, std::initializer_list<std::string_view> needles) {
    for (auto n : needles)
        if (contains_ci(text, n)) return true;
    return false;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        const bool space = std::isspace(c);
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string args_text(const Turn& t) {
    std::string out;
    if (t.arguments)
        for (const auto& [k, v] : *t.arguments) out += k + "=" + v + " ";
    return out;
}

// A call serves a scenario when it uses the scenario's tool and, for tools
// shared by several scenarios, mentions the scenario key in its arguments.
bool serves(const Turn& call, const Scenario& s) {
    if (call.tool_name != s.tool) return false;
    const auto shared = std::count_if(scenarios().begin(), scenarios().end(),
                                      [&](const Scenario& o) { return o.tool == s.tool; });
    return shared < 2 || contains_ci(args_text(call), s.key);
}

}  // namespace

bool Cues::agent_fault() const {
    return misreport || wrong_tool || bad_params || claims_without_call || redundant || security || verbose ||
           raw_trace || repeated_question || success_after_error || gave_up || incomplete;
}

Cues detect(const std::vector<Turn>& turns) {
    Cues c;
    std::vector<const Turn*> users, calls;
    std::set<std::string> grounded;  // digit runs the agent may legitimately repeat
    std::set<std::string> arg_digits;
    std::set<std::pair<std::string, std::string>> seen_calls;
    std::size_t error_at = turns.size();
    for (std::size_t i = 0; i < turns.size(); ++i) {
        const Turn& t = turns[i];
        switch (t.role) {
            case Role::User:
                users.push_back(&t);
                for (auto& d : digit_runs(t.content)) grounded.insert(d);
                break;
            case Role::ToolCall: {
                calls.push_back(&t);
                const std::string a = args_text(t);
                for (auto& d : digit_runs(a)) {
                    grounded.insert(d);
                    arg_digits.insert(d);
                }
                if (!seen_calls.insert({t.tool_name.value_or(""), a}).second) c.redundant = true;
                if (t.tool_name == "SendVerificationCode") c.security = true;
                break;
            }
            case Role::ToolResult: {
                for (auto& d : digit_runs(t.content)) grounded.insert(d);
                const std::string body = trim(t.content);
                const bool failed = body.empty() || body == "null" || body == "{}" ||
                                    any_of_ci(body, {"error", "unavailable", "timeout", "warning", "failed", "failure"});
                if (failed && error_at == turns.size()) error_at = i;
                break;
            }
            case Role::Agent: break;
        }
    }
    c.tool_called = !calls.empty();
    c.tool_error = error_at < turns.size();
    c.claims_without_call = !c.tool_called;
    if (calls.size() > 2) c.redundant = true;

    bool retried = false;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        const Turn& t = turns[i];
        if (t.role == Role::ToolCall && i > error_at) retried = true;
        if (t.role != Role::Agent) continue;
        if (i > error_at) {
            if (any_of_ci(t.content, {"sorry", "unfortunately", "unable", "couldn't", "could not", "didn't get",
                                      "isn't available", "not supported", "isn't supported"}))
                c.error_ack = true;
            if (any_of_ci(t.content, {"instead", "alternative", "you could", "manually", "try again later", "workaround"}))
                c.alternative = true;
        }
        if (c.tool_called)
            for (auto& d : digit_runs(t.content))
                if (!grounded.count(d)) c.misreport = true;
        if (any_of_ci(t.content, {"security", "verification code", "verify your identity", "compliance"})) c.security = true;
        if (word_count(t.content) > 60) c.verbose = true;
        if (any_of_ci(t.content, {"[debug]", "{\"", "traceback", "request_id"})) c.raw_trace = true;
        if (contains_ci(t.content, "again?")) c.repeated_question = true;
    }
    if (c.tool_error) {
        c.success_after_error = !c.error_ack;
        c.gave_up = c.error_ack && !c.alternative && !retried;
    }

    if (!users.empty()) {
        const std::string& first = users.front()->content;
        if (c.tool_called) {
            for (auto& d : digit_runs(first))
                if (!arg_digits.count(d)) c.bad_params = true;
            // "Porto" asked, "Porto Alegre" sent.
            for (const Turn* t : calls)
                for (const auto& [k, v] : t->arguments.value_or(std::map<std::string, std::string>{})) {
                    const auto sp = v.find(' ');
                    if (sp == std::string::npos || !digit_runs(v).empty()) continue;
                    if (!contains_ci(first, v.substr(0, sp))) continue;
                    std::istringstream words(v.substr(sp + 1));
                    for (std::string w; words >> w;)
                        if (!contains_ci(first, w)) c.bad_params = true;
                }
            for (const auto& s : scenarios()) {
                if (!contains_ci(first, s.key)) continue;
                c.wrong_tool = std::none_of(calls.begin(), calls.end(), [&](const Turn* t) { return serves(*t, s); });
                break;
            }
        }
        for (std::size_t i = 1; i < users.size(); ++i) {
            const std::string& u = users[i]->content;
            if (contains_ci(u, "already told")) c.repeated_question = true;
            if (any_of_ci(u, {"what about", "only answered", "half"})) c.incomplete = true;
            if (any_of_ci(u, {"not what i", "that's not", "wrong", "confus", "can't read", "already told", "annoying",
                              "disappoint", "seriously", "clearly", "only answered", "not even", "hassle",
                              "doesn't match", "frustrat", "not relevant"}))
                c.user_frustrated = true;
        }
        if (users.size() > 1 && any_of_ci(users.back()->content, {"thanks", "thank", "perfect", "great"}))
            c.user_thanks = true;
    }
    return c;
}

// ---- conversation generation -------------------------------------------------

namespace {

const std::vector<std::string>& name_pool() {
    static const std::vector<std::string> pool = {
        "Amara", "Bruno", "Chen", "Dalia", "Emeka", "Freya", "Goran", "Hana", "Ines", "Jonas",
        "Kavya", "Liam", "Mei", "Nadia", "Oskar", "Priya", "Quentin", "Rosa", "Sven", "Tariq",
        "Uma", "Viktor", "Wen", "Ximena", "Yusuf", "Zara", "Aiko", "Bilal", "Carmen", "Diego",
        "Elif", "Farid", "Greta", "Hiro", "Isla", "Jamal", "Kofi", "Lucia", "Mateo", "Nia"};
    return pool;
}

std::string handle(const std::string& name) {
    std::string out;
    for (unsigned char c : name)
        if (std::isalpha(c)) out += static_cast<char>(std::tolower(c));
    return out.empty() ? "user" : out;
}

class Builder {
public:
    Builder(const std::vector<std::string>& names, std::uint64_t variant) : variant_(variant) {
        name_ = names.size() > 0 ? names[0] : "Alex";
        name2_ = names.size() > 1 ? names[1] : "Sam";
    }

    std::string fill(std::string s) const {
        const std::pair<std::string, std::string> subs[] = {
            {"{lname2}", handle(name2_)}, {"{name2}", name2_}, {"{lname}", handle(name_)}, {"{name}", name_}};
        for (const auto& [from, to] : subs)
            for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
                s.replace(p, from.size(), to);
        return s;
    }

    void user(const std::string& text) { turns.push_back(Turn{Role::User, fill(text), {}, {}}); }
    void agent(const std::string& text) { turns.push_back(Turn{Role::Agent, fill(text), {}, {}}); }
    void call(const std::string& tool, const std::string& args_json) {
        std::map<std::string, std::string> args;
        const json obj = json::parse(fill(args_json));
        for (const auto& [k, v] : obj.items()) args[k] = v.is_string() ? v.get<std::string>() : v.dump();
        turns.push_back(Turn{Role::ToolCall, "", tool, std::move(args)});
    }
    void result(const std::string& tool, const std::string& text) {
        turns.push_back(Turn{Role::ToolResult, fill(text), tool, {}});
    }

    std::string pick(std::initializer_list<const char*> options) const {
        std::vector<const char*> v(options);
        return v[(variant_ >> 8) % v.size()];
    }
    void open(const std::string& request) {
        user(pick({"", "Hi! ", "Hello, "}) + request);
    }
    void thanks() { user(pick({"Thanks, that's perfect.", "Great, thank you!", "Perfect, thanks for the help."})); }

    std::vector<Turn> turns;

private:
    std::uint64_t variant_;
    std::string name_, name2_;
};

Scenario generic_scenario(const std::string& tool) {
    return Scenario{tool,
                    "",
                    "Can you use " + tool + " for record 2024?",
                    R"({"record":"2024"})",
                    R"({"status":"ok"})",
                    "That's done.",
                    R"({"record":"2042"})",
                    R"({"status":"ok","record":"2042"})",
                    "That's done for record 2042.",
                    "That's done, reference 4417.",
                    R"({"status":"ok"})",
                    "That's done."};
}

std::string with_field(const std::string& json_text, const std::string& key, const std::string& value) {
    json j = json::parse(json_text);
    if (!j.is_object()) j = json{{"result", j}};
    j[key] = value;
    return j.dump();
}

const char* kJargon =
    "For context, the request was serialized, routed through the primary handler, validated against the schema, "
    "normalized for locale and encoding, committed through the write-ahead layer, replicated to secondary storage, "
    "and finally acknowledged by the orchestration service after the idempotency key was reconciled with the cache "
    "and the eventual consistency window closed without conflicting writes or retries from the upstream scheduler.";

}  // namespace

std::vector<Turn> generate_conversation(const std::string& situation_id, const std::vector<std::string>& tool_names,
                                        const std::vector<std::string>& names, std::uint64_t variant) {
    find_situation(situation_id);  // throws for unknown ids
    if (tool_names.empty()) throw ConfigError("simulated conversation needs at least one tool");

    std::vector<const Scenario*> usable;
    for (const auto& s : scenarios())
        if (std::find(tool_names.begin(), tool_names.end(), s.tool) != tool_names.end()) usable.push_back(&s);
    const bool needs_bad = situation_id == "BadParams/Silent" || situation_id == "Mis-understood Need" ||
                           situation_id == "Bad Params/User Aware" || situation_id == "Bad Input Data";
    if (needs_bad) std::erase_if(usable, [](const Scenario* s) { return s->bad_args.empty(); });

    Scenario s = usable.empty() ? generic_scenario(tool_names[variant % tool_names.size()])
                                : *usable[variant % usable.size()];
    // Another scenario, preferably with a different tool, for wrong-tool cases.
    std::optional<Scenario> other;
    for (const auto* o : usable)
        if (o->tool != s.tool) { other = *o; break; }
    if (!other)
        for (const auto& t : tool_names)
            if (t != s.tool) { other = generic_scenario(t); break; }
    if (!other)
        for (const auto* o : usable)
            if (o->key != s.key) { other = *o; break; }

    Builder b(names, variant);
    const std::string& id = situation_id;

    auto correct_call = [&] {
        b.call(s.tool, s.args);
        b.result(s.tool, s.result);
    };

    if (id == "Correct") {
        b.open(s.request);
        correct_call();
        b.agent(s.report);
        b.thanks();
    } else if (id == "WrongTool/Silent" || id == "Wrong Tool/User Aware") {
        b.open(s.request);
        if (other) {
            b.call(other->tool, other->args);
            b.result(other->tool, other->result);
        } else {
            b.call(s.tool, s.bad_args.empty() ? "{}" : s.bad_args);
            b.result(s.tool, s.bad_result.empty() ? s.result : s.bad_result);
        }
        if (id == "WrongTool/Silent") {
            b.agent("All done, that's taken care of for you.");
            b.thanks();
        } else {
            b.agent(other ? other->report : "All done.");
            b.user("That's not what I asked for. You used the wrong tool for this.");
        }
    } else if (id == "BadParams/Silent") {
        b.open(s.request);
        b.call(s.tool, s.bad_args);
        b.result(s.tool, s.bad_result);
        b.agent(s.bad_report);
        b.thanks();
    } else if (id == "BadParse/Silent") {
        b.open(s.request);
        correct_call();
        b.agent(s.misreport);
        b.thanks();
    } else if (id == "Superfluous Tool Calls") {
        b.open(s.request);
        correct_call();
        correct_call();
        if (other) {
            b.call(other->tool, other->args);
            b.result(other->tool, other->result);
        }
        b.agent(s.report);
        b.thanks();
    } else if (id == "Missing Or Skipped Tool") {
        b.open(s.request);
        b.agent(b.pick({"All done, I've taken care of that for you.", "Done! That's all set now."}));
        b.thanks();
    } else if (id == "Security Overkill") {
        b.open(s.request);
        b.agent("Before I do that, I'll run a quick security compliance check on your account.");
        if (std::find(tool_names.begin(), tool_names.end(), "SendVerificationCode") != tool_names.end()) {
            b.call("SendVerificationCode", R"({"username":"{lname}","email":"{lname}@example.com"})");
            b.result("SendVerificationCode", R"({"status":"success"})");
        }
        correct_call();
        b.agent("The security check passed. " + s.report);
        b.thanks();
    } else if (id == "Info Overload") {
        b.open(s.request);
        correct_call();
        b.agent(s.report + " " + kJargon);
        b.user("I'm confused. I just wanted a simple answer.");
    } else if (id == "Mis-understood Need") {
        b.open(s.request);
        b.call(s.tool, s.bad_args);
        b.result(s.tool, s.bad_result);
        b.agent(s.bad_report);
        b.user("That's not what I asked for.");
    } else if (id == "Verbose Trace Leak") {
        b.open(s.request);
        correct_call();
        b.agent("[debug] dispatch " + s.tool + " payload=" + b.fill(s.args) + " response=" + b.fill(s.result) +
                " status=ok");
        b.user("I can't read any of this. What does it mean?");
    } else if (id == "Unneeded Security Gate") {
        b.open(s.request);
        b.agent("Before I can do that, please verify your identity with the verification code we just sent you.");
        b.user("Seriously? This is a simple request, I shouldn't need a code for it.");
        correct_call();
        b.agent(s.report);
        b.user("Fine, but that extra step was a hassle.");
    } else if (id == "Context Amnesia") {
        b.open(s.request);
        b.agent("Sure. Could you give me the details again?");
        b.user("I already told you: " + s.request);
        correct_call();
        b.agent(s.report);
        b.user("Finally. Having to repeat myself was annoying.");
    } else if (id == "Hallucination With Access") {
        b.open(s.request);
        correct_call();
        b.agent(s.misreport);
        b.user("That doesn't match what the app shows me.");
    } else if (id == "Bad Params/User Aware") {
        b.open(s.request);
        b.call(s.tool, s.bad_args);
        b.result(s.tool, R"({"error":"invalid parameter"})");
        b.agent("Sorry, something went wrong with that request.");
        b.user("That's wrong, you used the wrong details from my message.");
    } else if (id == "Bad Input Data") {
        b.open(s.request);
        b.call(s.tool, s.bad_args);
        b.result(s.tool, s.bad_result);
        b.agent(s.bad_report);
        b.user("That's not relevant to what I asked.");
    } else if (id == "Wrong Action Silent" || id == "Trusted Wrong Fact") {
        b.open(s.request);
        b.call(s.tool, s.args);
        b.result(s.tool, s.wrong_result);
        b.agent(s.wrong_report);
        b.thanks();
    } else if (id == "Propagated Tool Error") {
        b.open(s.request);
        b.call(s.tool, s.args);
        b.result(s.tool, with_field(b.fill(s.result), "warning", "target mismatch: resolved to a different record"));
        b.agent(s.report + " All set.");
        b.thanks();
    } else if (id == "Hallucination Fallback") {
        b.open(s.request);
        b.call(s.tool, s.args);
        b.result(s.tool, b.pick({R"({"error":"timeout"})", R"({"error":"timeout after waiting for the service"})"}));
        b.agent(s.report);
        b.thanks();
    } else if (id == "Hallucinated Edit") {
        b.open(s.request);
        b.call(s.tool, s.args);
        b.result(s.tool, R"({"error":"partial failure: only some fields were written"})");
        b.agent(s.report);
        b.thanks();
    } else if (id == "Tool Unavailable") {
        b.open(s.request);
        b.call(s.tool, s.args);
        b.result(s.tool, R"({"error":"service unavailable"})");
        b.agent("Sorry, that service is unavailable right now. You could try again later, or do it manually in the app instead.");
        b.user("That's disappointing. I hoped it would just work.");
    } else if (id == "Impossible Action Suggested") {
        b.open(s.request + " Then sync it to my smartwatch.");
        b.call(s.tool, s.args);
        b.result(s.tool, R"({"error":"unsupported operation: sync_to_device"})");
        b.agent("Sorry, syncing to a smartwatch isn't supported by this tool. As a workaround you could add it "
                "manually in the watch's companion app.");
        b.user("That's disappointing, I wanted it done in one go.");
    } else if (id == "Tool Failure/User Aware") {
        b.open(s.request);
        b.call(s.tool, s.args);
        b.result(s.tool, with_field(b.fill(s.wrong_result), "log", "execution warning: stale cache entry used"));
        b.agent(s.wrong_report);
        b.user("That's clearly wrong. Didn't you check it?");
    } else if (id == "Partial Tool Answer") {
        b.open(s.request + " And what else should I know about it?");
        correct_call();
        b.agent(s.report);
        b.user("That only answered half of my question. What about the rest?");
    } else if (id == "Null Tool Response") {
        b.open(s.request);
        b.call(s.tool, s.args);
        b.result(s.tool, "null");
        b.agent("Sorry, I didn't get anything back from the tool, so I can't help with that.");
        b.user("Not even a retry? That's frustrating.");
    } else {
        throw ConfigError("no simulated recipe for situation '" + id + "'");
    }
    return b.turns;
}

// ---- SCOPE heuristics ------------------------------------------------------------

namespace {

struct Area {
    const char* name;
    const char* description;
};

const std::vector<Area>& sim_areas() {
    static const std::vector<Area> areas = {
        {"Task Completion", "Whether the user's request actually gets done and reported faithfully"},
        {"Error Handling", "How the agent reacts when a tool fails or returns something odd"},
        {"Tool Usage", "Choice of tools, parameters passed and number of calls"},
        {"Communication Quality", "Clarity and length of the agent's replies"},
        {"User Experience", "How the user feels about the exchange by the end"},
    };
    return areas;
}

struct Category {
    Label polarity;
    const char* area;
    const char* title;
    const char* description;
    const char* reason;
    int weight;
    bool make_or_break;
    bool (*applies)(const Cues&);
};

// Priority order; summarization keeps the head of this list.
const std::vector<Category>& categories() {
    static const std::vector<Category> table = {
        {Label::Pos, "Task Completion", "Completed the request", "the right tool ran cleanly and the answer was relayed faithfully",
         "the agent used the right tool and reported its output faithfully", 9,
         false, [](const Cues& c) { return c.tool_called && !c.tool_error && !c.agent_fault() && !c.user_frustrated; }},
        {Label::Pos, "Error Handling", "Acknowledged the tool failure", "the agent was open about a failed tool call",
         "the agent told the user plainly that the tool failed", 8, false, [](const Cues& c) { return c.error_ack; }},
        {Label::Pos, "Error Handling", "Offered a workable alternative", "after a failure the agent proposed another way forward",
         "the agent suggested another way to get it done", 7, false, [](const Cues& c) { return c.alternative; }},
        {Label::Pos, "Communication Quality", "Kept the answer concise", "short, readable replies without internal detail",
         "the reply was short and readable", 5, false,
         [](const Cues& c) { return c.tool_called && !c.verbose && !c.raw_trace; }},
        {Label::Pos, "User Experience", "Left the user pleased", "the user closes on a positive note",
         "the user thanked the agent at the end", 2, false, [](const Cues& c) { return c.user_thanks; }},

        {Label::Neg, "Error Handling", "Ignored a tool error", "a failed or suspicious tool result was passed off as success",
         "the tool reported a problem but the agent carried on as if it worked", 10, true,
         [](const Cues& c) { return c.success_after_error; }},
        {Label::Neg, "Task Completion", "Reported facts the tool never returned", "details in the answer that no tool output supports",
         "the agent's answer contains details that are not in the tool output", 9, true,
         [](const Cues& c) { return c.misreport; }},
        {Label::Neg, "Tool Usage", "Used the wrong tool", "the call made does not serve the user's request",
         "the agent called a tool that does not fit the request", 8, true, [](const Cues& c) { return c.wrong_tool; }},
        {Label::Neg, "Task Completion", "Claimed an action without calling a tool", "success is announced although no tool ran",
         "the agent said it was done without calling any tool", 9, true,
         [](const Cues& c) { return c.claims_without_call; }},
        {Label::Neg, "Error Handling", "Gave up after a failure", "no retry, explanation of next steps or fallback",
         "after the failure the agent neither retried nor offered anything else", 8, true,
         [](const Cues& c) { return c.gave_up; }},
        {Label::Neg, "Tool Usage", "Passed parameters that do not match the request", "arguments differ from what the user asked for",
         "the arguments in the call differ from what the user asked for", 8, true,
         [](const Cues& c) { return c.bad_params; }},
        {Label::Neg, "Tool Usage", "Added needless security steps", "verification or compliance checks on a harmless request",
         "the agent put a harmless request through security checks", 5, true, [](const Cues& c) { return c.security; }},
        {Label::Neg, "Tool Usage", "Made redundant tool calls", "repeated or unnecessary calls",
         "the agent repeated calls it did not need", 4, true, [](const Cues& c) { return c.redundant; }},
        {Label::Neg, "User Experience", "User ended frustrated", "the user complains or pushes back",
         "the user complained at the end", 6, false, [](const Cues& c) { return c.user_frustrated; }},
        {Label::Neg, "Task Completion", "Left part of the request unanswered", "the user has to ask for the missing part",
         "part of what the user asked for was never answered", 6, false, [](const Cues& c) { return c.incomplete; }},
        {Label::Neg, "Communication Quality", "Exposed raw logs", "internal traces or payloads shown to the user",
         "the agent pasted raw logs into the reply", 6, false, [](const Cues& c) { return c.raw_trace; }},
        {Label::Neg, "Communication Quality", "Buried the answer in jargon", "long technical replies that hide the point",
         "the reply was long and technical", 5, false, [](const Cues& c) { return c.verbose; }},
        {Label::Neg, "User Experience", "Asked for information already given", "the user has to repeat themselves",
         "the agent asked for details the user had already given", 5, false,
         [](const Cues& c) { return c.repeated_question; }},
        {Label::Neg, "Task Completion", "Outcome did not match the request", "the result is not what the user needed",
         "the final outcome was not what the user needed", 5, false, [](const Cues&) { return false; }},
    };
    return table;
}

const Category* find_category(std::string_view text, Label polarity) {
    for (const auto& c : categories())
        if (c.polarity == polarity && contains_ci(text, c.title)) return &c;
    return nullptr;
}

Cues cues_of(const Bindings& b) {
    auto it = b.find("conversation");
    if (it == b.end()) return {};
    try {
        return detect(parse_transcript(it->second));
    } catch (const ParseError&) {
        return {};
    }
}

const std::string& binding(const Bindings& b, const std::string& key) {
    auto it = b.find(key);
    if (it == b.end()) throw ProviderRejected("simulated provider: missing binding '" + key + "'");
    return it->second;
}

int int_binding(const Bindings& b, const std::string& key, int fallback) {
    auto it = b.find(key);
    if (it == b.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        return fallback;
    }
}

// "ID: text" lines.
std::vector<std::pair<std::string, std::string>> id_lines(const std::string& block) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& line : split_lines(block)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        out.emplace_back(trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
    }
    return out;
}

int jitter(const std::string& a, const std::string& b) {
    return static_cast<int>(fnv1a(a + "\x1f" + b) % 3) - 1;
}

std::string names_reply(const Bindings& b) {
    const int count = std::max(1, int_binding(b, "count", 3));
    const auto& pool = name_pool();
    const std::size_t start = fnv1a(binding(b, "variation")) % pool.size();
    std::string out;
    for (int i = 0; i < count && i < static_cast<int>(pool.size()); ++i) {
        if (i) out += ", ";
        out += pool[(start + 7 * static_cast<std::size_t>(i)) % pool.size()];
    }
    return out;
}

std::string generate_reply(const Bindings& b) {
    std::vector<std::string> tools;
    for (const auto& t : json::parse(binding(b, "tools"))) tools.push_back(t.at("name").get<std::string>());
    std::vector<std::string> names;
    const std::string& raw = binding(b, "names");
    if (raw != "(any)")
        for (std::size_t start = 0; start <= raw.size();) {
            std::size_t comma = raw.find(',', start);
            if (comma == std::string::npos) comma = raw.size();
            std::string n = trim(raw.substr(start, comma - start));
            if (!n.empty()) names.push_back(n);
            start = comma + 1;
        }
    const std::string& case_id = binding(b, "case_id");
    const std::uint64_t variant = fnv1a(case_id + "|" + raw + "|" + binding(b, "tools"));
    return render_transcript(generate_conversation(case_id, tools, names, variant));
}

std::string judge_reply(const Bindings& b) {
    const SituationSpec& spec = find_situation(binding(b, "case_id"));
    const Cues c = cues_of(b);
    const DimensionLabels& want = spec.expected_labels;
    const bool hidden = contains_ci(spec.tool_details, "hard to tell") || contains_ci(spec.tool_details, "ran correctly");
    const bool satisfied = c.user_thanks && !c.user_frustrated;

    if (satisfied != (want.user_satisfaction == UserSatisfaction::Satisfied))
        return satisfied ? "INVALID - the user is satisfied, but the case describes a dissatisfied user."
                         : "INVALID - the user is not satisfied, but the case describes a satisfied user.";
    switch (want.tool_execution) {
        case ToolExecution::Correct:
            if (c.tool_error) return "INVALID - a tool call fails, but the case says the tool works properly.";
            break;
        case ToolExecution::IncorrectDueToToolError:
            if (!c.tool_error && !hidden) return "INVALID - no tool error is visible, but the case requires one.";
            break;
        case ToolExecution::IncorrectDueToAgent:
            if (!c.agent_fault()) return "INVALID - the tool is used correctly, but the case requires an agent mistake.";
            break;
    }
    if (want.agent_performance == AgentPerformance::Appropriate && c.agent_fault())
        return "INVALID - the agent makes a mistake, but the case describes appropriate behaviour.";
    if (want.agent_performance == AgentPerformance::NotAppropriate && !c.agent_fault() && !hidden)
        return "INVALID - the agent behaves well, but the case requires a specific failure.";
    return "VALID - the user, tool and agent behaviour all match the case.";
}

std::string areas_reply(const Bindings& b) {
    const int max = std::clamp(int_binding(b, "max_areas", 5), 1, static_cast<int>(sim_areas().size()));
    std::string out;
    for (int i = 0; i < max; ++i)
        out += std::to_string(i + 1) + ". " + sim_areas()[static_cast<std::size_t>(i)].name + ": " +
               sim_areas()[static_cast<std::size_t>(i)].description + "\n";
    return out;
}

std::string extract_reply(const Bindings& b, Label polarity, bool free_form) {
    const Cues c = cues_of(b);
    std::vector<std::string> allowed;
    if (!free_form)
        for (const auto& [name, desc] : id_lines(binding(b, "areas"))) {
            std::string n = name;
            if (n.rfind("- ", 0) == 0) n = n.substr(2);
            allowed.push_back(n);
        }
    auto allowed_area = [&](const char* area) {
        return free_form || std::find(allowed.begin(), allowed.end(), area) != allowed.end();
    };
    std::string out;
    for (const auto& cat : categories()) {
        if (cat.polarity != polarity || !cat.applies(c) || !allowed_area(cat.area)) continue;
        const std::string body = std::string(cat.title) + ": " + cat.reason;
        out += free_form ? "- " + body + "\n" : "[" + std::string(cat.area) + "] " + body + "\n";
    }
    if (out.empty() && polarity == Label::Neg) {
        const Category& fallback = categories().back();
        if (allowed_area(fallback.area)) {
            const std::string body = std::string(fallback.title) + ": " + fallback.reason;
            out = free_form ? "- " + body + "\n" : "[" + std::string(fallback.area) + "] " + body + "\n";
        }
    }
    return out;
}

std::string summarize_reply(const Bindings& b, Label polarity) {
    const int cap = std::max(1, int_binding(b, "max_rubrics", 5));
    std::vector<std::string> lines = split_lines(binding(b, "existing_rubrics"));
    for (auto& l : split_lines(binding(b, "reasons"))) lines.push_back(l);

    std::map<const Category*, std::string> found;  // category -> area bracket seen
    std::vector<std::pair<std::string, std::string>> unknown;
    for (const auto& line : lines) {
        const std::string t = trim(line);
        if (t.empty() || t == "(none)") continue;
        std::string area;
        const auto open = t.find('['), close = t.find(']');
        if (open != std::string::npos && close != std::string::npos && close > open)
            area = t.substr(open + 1, close - open - 1);
        if (const Category* cat = find_category(t, polarity)) {
            if (!found.count(cat)) found[cat] = area.empty() ? cat->area : area;
            continue;
        }
        std::string text = close != std::string::npos ? trim(t.substr(close + 1)) : t;
        while (!text.empty() && (text[0] == '-' || text[0] == '*' || std::isdigit(static_cast<unsigned char>(text[0])) ||
                                 text[0] == '.' || text[0] == ' '))
            text.erase(0, 1);
        if (!text.empty()) unknown.emplace_back(area, text);
    }
    std::string out;
    int n = 0;
    for (const auto& cat : categories()) {
        if (n >= cap) break;
        auto it = found.find(&cat);
        if (it == found.end()) continue;
        out += std::to_string(++n) + ". [" + it->second + "] " + cat.title + ": " + cat.description + "\n";
    }
    for (const auto& [area, text] : unknown) {
        if (n >= cap) break;
        out += std::to_string(++n) + ". " + (area.empty() ? "" : "[" + area + "] ") + text + "\n";
    }
    return out;
}

std::string weight_reply(const Bindings& b, Label polarity, bool make_or_break) {
    std::string out;
    for (const auto& [id, text] : id_lines(binding(b, "rubrics"))) {
        const Category* cat = find_category(text, polarity);
        out += id + ": " + std::to_string(cat ? cat->weight : 5);
        if (make_or_break) out += std::string(" | make-or-break: ") + (cat && cat->make_or_break ? "yes" : "no");
        out += "\n";
    }
    return out;
}

std::string estimate_reply(const Bindings& b) {
    const Cues c = cues_of(b);
    const int x_max = std::max(1, int_binding(b, "x_max", 10));
    const std::string& conv = binding(b, "conversation");
    std::string out;
    for (Label pol : {Label::Pos, Label::Neg}) {
        for (const auto& [id, text] : id_lines(binding(b, pol == Label::Pos ? "pos_rubrics" : "neg_rubrics"))) {
            const Category* cat = find_category(text, pol);
            if (!cat || !cat->applies(c)) {
                out += id + ": N/A\n";
                continue;
            }
            const int score = std::clamp((8 * x_max + 5) / 10 + jitter(conv, id), 0, x_max);
            out += id + ": " + std::to_string(score) + " | " + cat->reason + "\n";
        }
    }
    return out;
}

// ---- SPUR heuristics -------------------------------------------------------------

struct SpurCategory {
    bool sat;
    const char* title;
    const char* description;
    int impact;
    bool (*applies)(const Cues&);
};

const std::vector<SpurCategory>& spur_categories() {
    static const std::vector<SpurCategory> table = {
        {true, "Thanked the assistant", "the user expresses thanks or approval", 8, [](const Cues& c) { return c.user_thanks; }},
        {true, "Task reported complete", "the assistant says the request is done", 6,
         [](const Cues& c) { return c.tool_called && !c.error_ack; }},
        {true, "Honest about problems", "the assistant is upfront when something fails", 4, [](const Cues& c) { return c.error_ack; }},
        {true, "Quick resolution", "the exchange is short", 3, [](const Cues&) { return true; }},
        {false, "Expressed frustration", "the user complains or pushes back", 8, [](const Cues& c) { return c.user_frustrated; }},
        {false, "Request not fulfilled", "the user does not get what was asked for", 7,
         [](const Cues& c) { return c.error_ack || c.incomplete; }},
        {false, "Confusing response", "the reply is hard to read", 6, [](const Cues& c) { return c.verbose || c.raw_trace; }},
        {false, "Had to repeat information", "the user must say things twice", 5,
         [](const Cues& c) { return c.repeated_question; }},
        {false, "Incomplete answer", "part of the question is left out", 6, [](const Cues& c) { return c.incomplete; }},
        {false, "Unhelpful outcome", "the exchange leaves the user no better off", 5,
         [](const Cues& c) { return c.user_frustrated || c.error_ack; }},
    };
    return table;
}

const SpurCategory* find_spur(std::string_view text, bool sat) {
    for (const auto& c : spur_categories())
        if (c.sat == sat && contains_ci(text, c.title)) return &c;
    return nullptr;
}

std::string spur_extract_reply(const Bindings& b, bool sat) {
    const Cues c = cues_of(b);
    std::vector<std::string> reasons;
    for (const auto& cat : spur_categories())
        if (cat.sat == sat && cat.applies(c) && reasons.size() < 3)
            reasons.push_back(std::string(cat.title) + ": " + cat.description);
    for (const auto& cat : spur_categories())
        if (cat.sat == sat && reasons.size() < 3 &&
            std::none_of(reasons.begin(), reasons.end(), [&](const std::string& r) { return contains_ci(r, cat.title); }))
            reasons.push_back(std::string(cat.title) + ": " + cat.description);
    std::string out;
    for (std::size_t i = 0; i < reasons.size(); ++i) out += std::to_string(i + 1) + ". " + reasons[i] + "\n";
    return out;
}

std::string spur_summarize_reply(const Bindings& b, bool sat) {
    const int cap = std::max(1, int_binding(b, "max_rubrics", 10));
    const std::string text = binding(b, "existing_rubrics") + "\n" + binding(b, "reasons");
    std::string out;
    int n = 0;
    for (const auto& cat : spur_categories())
        if (cat.sat == sat && n < cap && contains_ci(text, cat.title))
            out += std::to_string(++n) + ". " + cat.title + ": " + cat.description + "\n";
    if (n == 0)
        for (const auto& line : split_lines(binding(b, "reasons"))) {
            std::string t = trim(line);
            if (t.rfind("- ", 0) == 0) t = t.substr(2);
            if (!t.empty() && n < cap) out += std::to_string(++n) + ". " + t + "\n";
        }
    return out;
}

std::string spur_estimate_reply(const Bindings& b) {
    const Cues c = cues_of(b);
    const std::string& conv = binding(b, "conversation");
    std::string out;
    for (bool sat : {true, false})
        for (const auto& [id, text] : id_lines(binding(b, sat ? "sat_rubrics" : "dsat_rubrics"))) {
            if (text.empty() || id == "(none)") continue;
            const SpurCategory* cat = find_spur(text, sat);
            if (!cat || !cat->applies(c)) {
                out += id + ": N/A\n";
                continue;
            }
            out += id + ": " + std::to_string(std::clamp(cat->impact + jitter(conv, id), 1, 10)) + "\n";
        }
    return out;
}

}  // namespace

std::string SimulatedProvider::complete(const LlmRequest& request) {
    namespace p = prompts;
    const std::string& id = request.template_id;
    const Bindings& b = request.bindings;
    if (id == "raw") return "";
    if (id == p::kNames) return names_reply(b);
    if (id == p::kGenerateZeroShot || id == p::kGenerateOneShot) return generate_reply(b);
    if (id == p::kJudge) return judge_reply(b);
    if (id == p::kAreaDiscovery) return areas_reply(b);
    if (id == p::kExtractPos) return extract_reply(b, Label::Pos, false);
    if (id == p::kExtractNeg) return extract_reply(b, Label::Neg, false);
    if (id == p::kExtractPosNoAreas) return extract_reply(b, Label::Pos, true);
    if (id == p::kExtractNegNoAreas) return extract_reply(b, Label::Neg, true);
    if (id == p::kSummarizePos) return summarize_reply(b, Label::Pos);
    if (id == p::kSummarizeNeg) return summarize_reply(b, Label::Neg);
    if (id == p::kWeightPos) return weight_reply(b, Label::Pos, false);
    if (id == p::kWeightNeg) return weight_reply(b, Label::Neg, true);
    if (id == p::kWeightNegNoMakeOrBreak) return weight_reply(b, Label::Neg, false);
    if (id == p::kLabelEstimation) return estimate_reply(b);
    if (id == p::kSpurExtractSat) return spur_extract_reply(b, true);
    if (id == p::kSpurExtractDsat) return spur_extract_reply(b, false);
    if (id == p::kSpurSummarizeSat) return spur_summarize_reply(b, true);
    if (id == p::kSpurSummarizeDsat) return spur_summarize_reply(b, false);
    if (id == p::kSpurEstimate) return spur_estimate_reply(b);
    throw ProviderRejected("simulated provider has no responder for template '" + id + "'");
}

}  // namespace scope::sim
