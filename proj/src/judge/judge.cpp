#include "scope/judge/judge.hpp"

#include <cctype>
#include <set>

#include "scope/core/transcript.hpp"
#include "scope/core/util.hpp"
#include "scope/llm/prompts.hpp"

namespace scope::judge {

void to_json(json& j, const JudgeVerdict& v) {
    j = json{{"conversation_id", v.conversation_id},
             {"valid", v.valid},
             {"rationale", v.rationale},
             {"judge_model", v.judge_model}};
}

void from_json(const json& j, JudgeVerdict& v) {
    try {
        v.conversation_id = j.at("conversation_id").get<std::string>();
        v.valid = j.at("valid").get<bool>();
        v.rationale = j.value("rationale", std::string{});
        v.judge_model = j.value("judge_model", std::string{});
    } catch (const json::exception& e) {
        throw ParseError(std::string("verdict record: ") + e.what());
    }
}

void to_json(json& j, const HumanLabel& h) {
    j = json{{"conversation_id", h.conversation_id}, {"valid", h.valid}};
    if (h.annotator) j["annotator"] = *h.annotator;
}

void from_json(const json& j, HumanLabel& h) {
    try {
        h.conversation_id = j.at("conversation_id").get<std::string>();
        h.valid = j.at("valid").get<bool>();
        h.annotator.reset();
        if (j.contains("annotator")) h.annotator = j.at("annotator").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("human label record: ") + e.what());
    }
}

std::pair<bool, std::string> parse_verdict(const std::string& completion) {
    for (const auto& raw : split_lines(completion)) {
        const std::string line = trim(raw);
        if (line.empty()) continue;
        bool valid;
        std::size_t len;
        if (line.rfind("INVALID", 0) == 0) {
            valid = false;
            len = 7;
        } else if (line.rfind("VALID", 0) == 0) {
            valid = true;
            len = 5;
        } else {
            break;
        }
        if (line.size() > len && (std::isalnum(static_cast<unsigned char>(line[len])) || line[len] == '_')) break;
        std::string rest = completion.substr(completion.find(line) + len);
        // Strip separators such as ":", "-" or an em dash between token and rationale.
        std::size_t i = 0;
        while (i < rest.size()) {
            const unsigned char c = rest[i];
            if (std::isspace(c) || c == ':' || c == '-' || c == '.' || c == ',') {
                ++i;
            } else if (rest.compare(i, 3, "\xE2\x80\x94") == 0 || rest.compare(i, 3, "\xE2\x80\x93") == 0) {
                i += 3;
            } else {
                break;
            }
        }
        return {valid, trim(rest.substr(i))};
    }
    throw UnparseableVerdict("judge completion lacks a leading VALID/INVALID marker");
}

Bindings judge_bindings(const Conversation& c, const SituationSpec& spec) {
    return {{"case_id", spec.id},
            {"overall_description", spec.overall_description},
            {"user_details", spec.user_details},
            {"tool_details", spec.tool_details},
            {"agent_details", spec.agent_details},
            {"conversation", render_transcript(c.turns)}};
}

JudgeVerdict judge(Gateway& gateway, const GenerationConfig& config, const Conversation& c, const SituationSpec& spec) {
    const std::string text = gateway.complete(prompts::get(prompts::kJudge), judge_bindings(c, spec), config);
    auto [valid, rationale] = parse_verdict(text);
    return JudgeVerdict{c.id, valid, std::move(rationale), config.model_id};
}

std::vector<JudgeVerdict> judge_all(Gateway& gateway, const GenerationConfig& config,
                                    const std::vector<Conversation>& conversations) {
    return parallel_map<JudgeVerdict>(conversations.size(), gateway.max_in_flight(), [&](std::size_t i) {
        const auto& c = conversations[i];
        return judge(gateway, config, c, find_situation(c.situation_id));
    });
}

Dataset assemble_tiers(const std::vector<std::pair<Conversation, bool>>& human_labeled,
                       const std::vector<std::pair<Conversation, JudgeVerdict>>& judged, const std::string& name) {
    std::set<std::string> human_ids;
    for (const auto& [c, ok] : human_labeled) human_ids.insert(c.id);
    std::string overlap;
    for (const auto& [c, v] : judged)
        if (human_ids.contains(c.id)) overlap += (overlap.empty() ? "" : ", ") + c.id;
    if (!overlap.empty()) throw ValidationError("human-labeled and judged sets are disjoint", overlap);

    Dataset d;
    d.name = name;
    for (const auto& [c, ok] : human_labeled) {
        if (!ok) continue;
        Conversation g = c;
        g.tier = Tier::Gold;
        d.conversations.push_back(std::move(g));
    }
    for (const auto& [c, v] : judged) {
        if (v.conversation_id != c.id)
            throw ValidationError("verdict belongs to its conversation", c.id + " vs " + v.conversation_id);
        if (!v.valid) continue;
        Conversation s = c;
        s.tier = Tier::Silver;
        d.conversations.push_back(std::move(s));
    }
    validate_dataset(d, true);
    return d;
}

double judge_precision(const std::vector<JudgeVerdict>& verdicts, const std::map<std::string, bool>& truth) {
    std::size_t accepted = 0;
    std::size_t confirmed = 0;
    for (const auto& v : verdicts) {
        auto it = truth.find(v.conversation_id);
        if (it == truth.end()) throw ConfigError("no human label for '" + v.conversation_id + "'");
        if (!v.valid) continue;
        ++accepted;
        if (it->second) ++confirmed;
    }
    if (accepted == 0) throw NoAcceptedItems("judge accepted no conversations; precision undefined");
    return static_cast<double>(confirmed) / static_cast<double>(accepted);
}

std::optional<double> judge_recall(const std::vector<JudgeVerdict>& verdicts, const std::map<std::string, bool>& truth) {
    std::size_t positives = 0;
    std::size_t found = 0;
    for (const auto& v : verdicts) {
        auto it = truth.find(v.conversation_id);
        if (it == truth.end()) throw ConfigError("no human label for '" + v.conversation_id + "'");
        if (!it->second) continue;
        ++positives;
        if (v.valid) ++found;
    }
    if (positives == 0) return std::nullopt;
    return static_cast<double>(found) / static_cast<double>(positives);
}

std::vector<HumanLabel> load_human_labels(const std::string& path) {
    std::vector<HumanLabel> out;
    for (const auto& rec : read_jsonl(path)) out.push_back(rec.get<HumanLabel>());
    return out;
}

std::vector<JudgeVerdict> load_verdicts(const std::string& path) {
    std::vector<JudgeVerdict> out;
    for (const auto& rec : read_jsonl(path)) out.push_back(rec.get<JudgeVerdict>());
    return out;
}

void save_verdicts(const std::string& path, const std::vector<JudgeVerdict>& verdicts) {
    std::vector<json> records(verdicts.begin(), verdicts.end());
    write_jsonl(path, records);
}

}  // namespace scope::judge
