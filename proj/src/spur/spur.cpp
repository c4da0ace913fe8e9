#include "scope/spur/spur.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "scope/core/dataset.hpp"
#include "scope/core/transcript.hpp"
#include "scope/core/util.hpp"
#include "scope/llm/prompts.hpp"

namespace scope::spur {

std::string_view to_string(Polarity p) { return p == Polarity::Sat ? "SAT" : "DSAT"; }

Polarity parse_polarity(std::string_view s) {
    if (s == "SAT") return Polarity::Sat;
    if (s == "DSAT") return Polarity::Dsat;
    throw ParseError("unknown SPUR polarity '" + std::string(s) + "'");
}

void to_json(json& j, const SpurRubric& r) {
    j = json{{"id", r.id}, {"polarity", to_string(r.polarity)}, {"text", r.text}};
}

void from_json(const json& j, SpurRubric& r) {
    r.id = j.at("id").get<std::string>();
    r.polarity = parse_polarity(j.at("polarity").get<std::string>());
    r.text = j.at("text").get<std::string>();
}

void SpurRubricSet::validate() const {
    std::set<std::string> ids;
    for (const auto& r : rubrics) {
        if (r.id.empty()) throw ValidationError("rubric id nonempty", r.text);
        if (!ids.insert(r.id).second) throw ValidationError("rubric ids unique", r.id);
    }
    for (Polarity p : {Polarity::Sat, Polarity::Dsat})
        if (count(p) > kMaxRubricsPerPolarity)
            throw ValidationError("at most 10 rubrics per polarity", std::string(to_string(p)));
}

std::size_t SpurRubricSet::count(Polarity p) const {
    return static_cast<std::size_t>(
        std::count_if(rubrics.begin(), rubrics.end(), [&](const SpurRubric& r) { return r.polarity == p; }));
}

const SpurRubric* SpurRubricSet::find(std::string_view id) const {
    for (const auto& r : rubrics)
        if (r.id == id) return &r;
    return nullptr;
}

namespace {

std::string strip_markup(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), '*'), s.end());
    return trim(s);
}

std::vector<std::string> numbered_lines(const std::string& text) {
    static const std::regex re(R"(^\s*(?:\d+[.)]|[-*])\s*(.+?)\s*$)");
    std::vector<std::string> out;
    for (const auto& line : split_lines(text)) {
        std::smatch m;
        if (std::regex_match(line, m, re)) {
            std::string s = strip_markup(m[1].str());
            if (!s.empty()) out.push_back(std::move(s));
        }
    }
    return out;
}

std::string render_list(const SpurRubricSet& rs, Polarity p) {
    std::string out;
    for (const auto& r : rs.rubrics) {
        if (r.polarity != p) continue;
        if (!out.empty()) out += '\n';
        out += r.id + ": " + r.text;
    }
    return out.empty() ? "(none)" : out;
}

std::string rubric_id(Polarity p, std::size_t i) {
    std::string n = std::to_string(i + 1);
    if (n.size() < 2) n = "0" + n;
    return (p == Polarity::Sat ? "S" : "D") + n;
}

}  // namespace

std::vector<pipeline::Reason> spur_extract(Gateway& gateway, const GenerationConfig& config,
                                           const std::vector<Conversation>& train) {
    auto per_conversation = [&](std::size_t i) -> std::vector<pipeline::Reason> {
        const Conversation& c = train[i];
        const Label pol = c.labels.overall;
        const auto tmpl = pol == Label::Pos ? prompts::kSpurExtractSat : prompts::kSpurExtractDsat;
        const std::string text =
            gateway.complete(prompts::get(tmpl), {{"conversation", render_transcript(c.turns)}}, config);
        auto lines = numbered_lines(text);
        if (lines.empty()) {
            logger()->warn("conversation {}: no parseable SPUR reasons, skipped", c.id);
            return {};
        }
        if (lines.size() > kReasonsPerConversation) {
            logger()->warn("conversation {}: {} SPUR reasons, keeping the first 3", c.id, lines.size());
            lines.resize(kReasonsPerConversation);
        } else if (lines.size() < kReasonsPerConversation) {
            logger()->warn("conversation {}: only {} SPUR reasons", c.id, lines.size());
        }
        std::vector<pipeline::Reason> out;
        for (auto& l : lines) out.push_back(pipeline::Reason{c.id, pol, std::string(pipeline::kUnassigned), std::move(l)});
        return out;
    };
    auto nested = parallel_map<std::vector<pipeline::Reason>>(train.size(), gateway.max_in_flight(), per_conversation);
    std::vector<pipeline::Reason> out;
    for (auto& v : nested)
        for (auto& r : v) out.push_back(std::move(r));
    return out;
}

SpurRubricSet spur_summarize(Gateway& gateway, const GenerationConfig& config,
                             const std::vector<pipeline::Reason>& reasons, const SummarizeOptions& options) {
    if (reasons.empty()) throw ConfigError("SPUR summarization needs at least one reason");
    if (options.batch_size == 0 || options.max_per_polarity == 0)
        throw ConfigError("batch_size and max_per_polarity must be positive");
    SpurRubricSet rs;
    rs.provenance = options.provenance;
    for (Polarity p : {Polarity::Sat, Polarity::Dsat}) {
        std::vector<std::string> lines;
        for (const auto& r : reasons)
            if (from_label(r.polarity) == p) lines.push_back("- " + r.text);
        if (lines.empty()) {
            if (!options.allow_empty_polarity) throw EmptyPolarity(p);
            logger()->warn("no {} reasons; estimation will use the other polarity only", to_string(p));
            continue;
        }
        const auto tmpl = p == Polarity::Sat ? prompts::kSpurSummarizeSat : prompts::kSpurSummarizeDsat;
        std::vector<std::string> current;
        for (std::size_t start = 0; start < lines.size(); start += options.batch_size) {
            std::string existing;
            for (std::size_t i = 0; i < current.size(); ++i)
                existing += (i ? "\n" : "") + std::to_string(i + 1) + ". " + current[i];
            std::string batch;
            for (std::size_t i = start; i < std::min(lines.size(), start + options.batch_size); ++i)
                batch += (batch.empty() ? "" : "\n") + lines[i];
            const std::string text = gateway.complete(prompts::get(tmpl),
                                                      {{"existing_rubrics", existing.empty() ? "(none)" : existing},
                                                       {"reasons", batch},
                                                       {"max_rubrics", std::to_string(options.max_per_polarity)}},
                                                      config);
            auto parsed = numbered_lines(text);
            if (parsed.empty()) throw ParseError("SPUR summarization returned no rubric lines");
            std::set<std::string> seen;
            current.clear();
            for (auto& t : parsed)
                if (seen.insert(to_lower(t)).second) current.push_back(std::move(t));
            if (current.size() > options.max_per_polarity) {
                logger()->warn("SPUR summarization returned {} rubrics, keeping {}", current.size(),
                               options.max_per_polarity);
                current.resize(options.max_per_polarity);
            }
        }
        for (std::size_t i = 0; i < current.size(); ++i) rs.rubrics.push_back(SpurRubric{rubric_id(p, i), p, current[i]});
    }
    rs.validate();
    return rs;
}

void to_json(json& j, const SpurVerdict& v) {
    j = json{{"conversation_id", v.conversation_id},
             {"label", to_string(v.label)},
             {"sat_total", v.sat_total},
             {"dsat_total", v.dsat_total},
             {"impacts", v.impacts}};
}

void from_json(const json& j, SpurVerdict& v) {
    v.conversation_id = j.at("conversation_id").get<std::string>();
    v.label = parse_polarity(j.at("label").get<std::string>());
    v.sat_total = j.at("sat_total").get<int>();
    v.dsat_total = j.at("dsat_total").get<int>();
    v.impacts = j.at("impacts").get<std::vector<pipeline::RubricScore>>();
}

SpurVerdict spur_decide(const std::string& conversation_id, std::vector<pipeline::RubricScore> impacts,
                        const SpurRubricSet& rubrics) {
    SpurVerdict v;
    v.conversation_id = conversation_id;
    std::set<std::string> seen;
    for (auto& s : impacts) {
        const SpurRubric* r = rubrics.find(s.rubric_id);
        if (!r) throw pipeline::MissingScore("impact for unknown rubric '" + s.rubric_id + "'");
        if (!seen.insert(s.rubric_id).second) throw pipeline::MissingScore("duplicate impact for '" + s.rubric_id + "'");
        if (!s.applicable) {
            s.score = 0;
            continue;
        }
        s.score = std::clamp(s.score, 1, 10);
        (r->polarity == Polarity::Sat ? v.sat_total : v.dsat_total) += s.score;
    }
    v.impacts = std::move(impacts);
    v.label = v.sat_total > v.dsat_total ? Polarity::Sat : Polarity::Dsat;
    return v;
}

SpurVerdict spur_estimate(Gateway& gateway, const GenerationConfig& config, const Conversation& c,
                          const SpurRubricSet& rubrics) {
    rubrics.validate();
    if (rubrics.rubrics.empty()) throw ConfigError("SPUR rubric set is empty");
    const std::string text = gateway.complete(prompts::get(prompts::kSpurEstimate),
                                              {{"sat_rubrics", render_list(rubrics, Polarity::Sat)},
                                               {"dsat_rubrics", render_list(rubrics, Polarity::Dsat)},
                                               {"conversation", render_transcript(c.turns)}},
                                              config);
    static const std::regex re(R"(^\s*[-*]?\s*\**([A-Za-z]+\d+)\**\s*:\s*(N/?A|-?\d+)\b.*$)", std::regex::icase);
    std::map<std::string, pipeline::RubricScore> parsed;
    for (const auto& line : split_lines(text)) {
        std::smatch m;
        if (!std::regex_match(line, m, re)) continue;
        const std::string id = m[1].str();
        if (!rubrics.find(id) || parsed.contains(id)) continue;
        pipeline::RubricScore s{id, false, 0, ""};
        const std::string value = m[2].str();
        if (std::isdigit(static_cast<unsigned char>(value.back()))) {
            const int raw = std::stoi(value);
            s.applicable = true;
            s.score = std::clamp(raw, 1, 10);
            if (s.score != raw) logger()->warn("conversation {}: impact {} for {} clamped to {}", c.id, raw, id, s.score);
        }
        parsed.emplace(id, s);
    }
    if (parsed.empty()) throw ParseError("SPUR estimation for " + c.id + " has no impact lines");
    std::vector<pipeline::RubricScore> impacts;
    for (const auto& r : rubrics.rubrics) {
        auto it = parsed.find(r.id);
        if (it == parsed.end()) {
            logger()->warn("conversation {}: no impact for {}, treated as not applicable", c.id, r.id);
            impacts.push_back(pipeline::RubricScore{r.id, false, 0, ""});
        } else {
            impacts.push_back(it->second);
        }
    }
    return spur_decide(c.id, std::move(impacts), rubrics);
}

std::vector<SpurVerdict> spur_estimate_all(Gateway& gateway, const GenerationConfig& config,
                                           const std::vector<Conversation>& conversations,
                                           const SpurRubricSet& rubrics) {
    rubrics.validate();
    return parallel_map<SpurVerdict>(conversations.size(), gateway.max_in_flight(), [&](std::size_t i) {
        return spur_estimate(gateway, config, conversations[i], rubrics);
    });
}

LearnResult learn(Gateway& gateway, const StageConfigs& configs, const std::vector<Conversation>& train,
                  const SummarizeOptions& options) {
    if (train.empty()) throw ConfigError("learning needs a nonempty training set");
    LearnResult out;
    out.reasons = spur_extract(gateway, configs.at(Stage::SpurExtraction), train);
    out.rubrics = spur_summarize(gateway, configs.at(Stage::SpurSummarization), out.reasons, options);
    return out;
}

std::string serialize_rubric_store(const SpurRubricSet& rs) {
    rs.validate();
    std::string out = json{{"record", "header"}, {"system", "spur"}, {"provenance", rs.provenance}}.dump() + "\n";
    for (const auto& r : rs.rubrics) {
        json j = r;
        j["record"] = "rubric";
        out += j.dump() + "\n";
    }
    return out;
}

SpurRubricSet parse_rubric_store(const std::string& text) {
    SpurRubricSet rs;
    bool header = false;
    std::size_t lineno = 0;
    for (const auto& rec : parse_jsonl(text)) {
        ++lineno;
        try {
            const std::string kind = rec.at("record").get<std::string>();
            if (kind == "header") {
                if (header) throw ParseError("second header record", lineno);
                if (rec.value("system", std::string{}) != "spur") throw ParseError("not a SPUR rubric store", lineno);
                header = true;
                rs.provenance = rec.value("provenance", std::string{});
            } else if (kind == "rubric") {
                rs.rubrics.push_back(rec.get<SpurRubric>());
            } else {
                throw ParseError("unknown record kind '" + kind + "'", lineno);
            }
        } catch (const json::exception& e) {
            throw ParseError(std::string("SPUR rubric store: ") + e.what(), lineno);
        }
    }
    if (!header) throw ParseError("SPUR rubric store lacks a header record");
    rs.validate();
    return rs;
}

void save_rubric_store(const std::string& path, const SpurRubricSet& rs) { write_text_file(path, serialize_rubric_store(rs)); }

SpurRubricSet load_rubric_store(const std::string& path) { return parse_rubric_store(read_text_file(path)); }

}  // namespace scope::spur
