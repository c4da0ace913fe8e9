#include "scope/pipeline/pipeline.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <regex>
#include <set>

#include "scope/core/dataset.hpp"
#include "scope/core/transcript.hpp"
#include "scope/core/util.hpp"
#include "scope/llm/prompts.hpp"

namespace scope::pipeline {

// ---- types -----------------------------------------------------------------

void Rubric::validate() const {
    if (id.empty()) throw ValidationError("rubric id nonempty", text);
    if (make_or_break) {
        if (polarity != Label::Neg) throw ValidationError("make-or-break only for NEG rubrics", id);
        if (weight != kMakeOrBreakWeight) throw ValidationError("make-or-break weight is 100", id);
    } else if (weight < 1 || weight > 10) {
        throw ValidationError("weight in [1,10]", id + ": " + std::to_string(weight));
    }
}

void RubricSet::validate() const {
    if (x_max <= 0) throw ValidationError("x_max positive", std::to_string(x_max));
    std::set<std::string> ids;
    for (const auto& r : rubrics) {
        r.validate();
        if (!ids.insert(r.id).second) throw ValidationError("rubric ids unique", r.id);
    }
}

void RubricSet::validate_for_estimation() const {
    validate();
    if (count(Label::Pos) == 0) throw ConfigError("rubric set has no POS rubrics; label estimation needs both polarities");
    if (count(Label::Neg) == 0) throw ConfigError("rubric set has no NEG rubrics; label estimation needs both polarities");
}

std::size_t RubricSet::count(Label polarity) const {
    return static_cast<std::size_t>(
        std::count_if(rubrics.begin(), rubrics.end(), [&](const Rubric& r) { return r.polarity == polarity; }));
}

const Rubric* RubricSet::find(std::string_view id) const {
    for (const auto& r : rubrics)
        if (r.id == id) return &r;
    return nullptr;
}

void to_json(json& j, const Area& a) { j = json{{"name", a.name}, {"description", a.description}}; }

void from_json(const json& j, Area& a) {
    a.name = j.at("name").get<std::string>();
    a.description = j.value("description", std::string{});
}

void to_json(json& j, const Reason& r) {
    j = json{{"conversation_id", r.conversation_id},
             {"polarity", to_string(r.polarity)},
             {"area", r.area},
             {"text", r.text}};
}

void from_json(const json& j, Reason& r) {
    r.conversation_id = j.at("conversation_id").get<std::string>();
    r.polarity = parse_label(j.at("polarity").get<std::string>());
    r.area = j.at("area").get<std::string>();
    r.text = j.at("text").get<std::string>();
}

void to_json(json& j, const Rubric& r) {
    j = json{{"id", r.id},
             {"polarity", to_string(r.polarity)},
             {"area", r.area},
             {"text", r.text},
             {"weight", r.weight},
             {"make_or_break", r.make_or_break}};
}

void from_json(const json& j, Rubric& r) {
    r.id = j.at("id").get<std::string>();
    r.polarity = parse_label(j.at("polarity").get<std::string>());
    r.area = j.at("area").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.weight = j.at("weight").get<int>();
    r.make_or_break = j.value("make_or_break", false);
}

void to_json(json& j, const RubricScore& s) {
    j = json{{"rubric_id", s.rubric_id}, {"applicable", s.applicable}, {"score", s.score}, {"evidence", s.evidence}};
}

void from_json(const json& j, RubricScore& s) {
    s.rubric_id = j.at("rubric_id").get<std::string>();
    s.applicable = j.at("applicable").get<bool>();
    s.score = j.at("score").get<int>();
    s.evidence = j.value("evidence", std::string{});
}

// ---- helpers -----------------------------------------------------------------

namespace {

std::string strip_markup(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), '*'), s.end());
    return trim(s);
}

std::string render_numbered(const std::vector<Conversation>& convs) {
    std::string out;
    for (std::size_t i = 0; i < convs.size(); ++i) {
        if (i) out += "\n\n";
        out += "Conversation " + std::to_string(i + 1) + ":\n" + render_transcript(convs[i].turns);
    }
    return out;
}

/// Maps a model-written area name onto a known one (case-insensitive).
std::optional<std::string> resolve_area(const std::string& raw, const std::vector<std::string>& known) {
    const std::string key = to_lower(strip_markup(raw));
    for (const auto& k : known)
        if (to_lower(k) == key) return k;
    return std::nullopt;
}

std::vector<std::string> area_names(const std::vector<Area>& areas) {
    std::vector<std::string> out;
    for (const auto& a : areas) out.push_back(a.name);
    out.emplace_back(kUnassigned);
    return out;
}

struct Draft {
    std::string area;
    std::string text;
};

// "N. [Area] Title: description"; the bracket is optional.
std::vector<std::pair<std::optional<std::string>, std::string>> parse_rubric_lines(const std::string& completion) {
    static const std::regex re(R"(^\s*\d+[.)]\s*(?:\[([^\]]+)\])?\s*(.+?)\s*$)");
    std::vector<std::pair<std::optional<std::string>, std::string>> out;
    for (const auto& line : split_lines(completion)) {
        std::smatch m;
        if (!std::regex_match(line, m, re)) continue;
        std::optional<std::string> area;
        if (m[1].matched) area = trim(m[1].str());
        std::string text = strip_markup(m[2].str());
        if (!text.empty()) out.emplace_back(area, text);
    }
    return out;
}

std::string render_drafts(const std::vector<Draft>& drafts) {
    if (drafts.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ". [" + drafts[i].area + "] " + drafts[i].text;
    }
    return out;
}

std::string_view summarize_template(Label polarity) {
    return polarity == Label::Pos ? prompts::kSummarizePos : prompts::kSummarizeNeg;
}

std::string render_rubric_list(const std::vector<Rubric>& rubrics, Label polarity) {
    std::string out;
    for (const auto& r : rubrics) {
        if (r.polarity != polarity) continue;
        if (!out.empty()) out += '\n';
        out += r.id + ": " + r.text;
    }
    return out;
}

// One summarization call folding `reasons` into `existing`.
std::vector<Draft> summarize_step(Gateway& gateway, const GenerationConfig& config, Label polarity,
                                  const std::vector<Draft>& existing, const std::vector<std::string>& reason_lines,
                                  std::size_t cap, const std::optional<std::string>& forced_area,
                                  const std::vector<std::string>& known_areas) {
    std::string reasons;
    for (const auto& r : reason_lines) reasons += (reasons.empty() ? "" : "\n") + r;
    const std::string text =
        gateway.complete(prompts::get(summarize_template(polarity)),
                         {{"existing_rubrics", render_drafts(existing)},
                          {"reasons", reasons},
                          {"max_rubrics", std::to_string(cap)}},
                         config);
    std::vector<Draft> out;
    std::set<std::string> seen;
    for (auto& [area, body] : parse_rubric_lines(text)) {
        Draft d;
        d.text = body;
        if (forced_area) {
            d.area = *forced_area;
        } else {
            auto resolved = area ? resolve_area(*area, known_areas) : std::nullopt;
            if (!resolved) {
                logger()->warn("dropping {} rubric with unknown area '{}': {}", to_string(polarity),
                               area.value_or(""), body);
                continue;
            }
            d.area = *resolved;
        }
        if (!seen.insert(to_lower(d.text)).second) continue;
        out.push_back(std::move(d));
    }
    if (out.empty()) throw ParseError("summarization returned no rubric lines for " + std::string(to_string(polarity)));
    if (out.size() > cap) {
        logger()->warn("summarization returned {} rubrics, keeping the first {}", out.size(), cap);
        out.resize(cap);
    }
    return out;
}

std::string rubric_id(Label polarity, std::size_t index) {
    std::string n = std::to_string(index + 1);
    if (n.size() < 2) n = "0" + n;
    return (polarity == Label::Pos ? "P" : "N") + n;
}

void apply_weights(Gateway& gateway, const GenerationConfig& config, std::vector<Rubric>& rubrics, Label polarity,
                   bool elicit_make_or_break) {
    const std::string list = render_rubric_list(rubrics, polarity);
    if (list.empty()) return;
    const std::string_view tmpl = polarity == Label::Pos
                                      ? prompts::kWeightPos
                                      : (elicit_make_or_break ? prompts::kWeightNeg : prompts::kWeightNegNoMakeOrBreak);
    const std::string text = gateway.complete(prompts::get(tmpl), {{"rubrics", list}}, config);

    static const std::regex re(R"(^\s*[-*]?\s*\**([A-Za-z]+\d+)\**\s*:\s*(-?\d+)\s*(?:\|\s*make-or-break\s*:\s*(\w+))?.*$)",
                               std::regex::icase);
    std::map<std::string, std::pair<int, bool>> parsed;
    for (const auto& line : split_lines(text)) {
        std::smatch m;
        if (!std::regex_match(line, m, re)) continue;
        const bool mb = m[3].matched && to_lower(m[3].str()) == "yes";
        parsed.emplace(m[1].str(), std::make_pair(std::stoi(m[2].str()), mb));
    }
    if (parsed.empty()) throw ParseError("weight completion for " + std::string(to_string(polarity)) + " has no weight lines");
    for (auto& r : rubrics) {
        if (r.polarity != polarity) continue;
        auto it = parsed.find(r.id);
        if (it == parsed.end()) {
            logger()->warn("no weight for rubric {}; using 1", r.id);
            r.weight = 1;
            continue;
        }
        const int w = std::clamp(it->second.first, 1, 10);
        if (w != it->second.first) logger()->warn("weight {} for rubric {} clamped to {}", it->second.first, r.id, w);
        r.weight = w;
        r.make_or_break = polarity == Label::Neg && elicit_make_or_break && it->second.second;
        if (r.make_or_break) r.weight = kMakeOrBreakWeight;
    }
}

}  // namespace

// ---- stage 1 -------------------------------------------------------------------

std::vector<Area> parse_areas(const std::string& completion, std::size_t max_areas) {
    static const std::regex re(R"(^\s*(?:\d+[.)]|[-*])\s*([^:]+?)\s*:\s*(.*?)\s*$)");
    std::vector<Area> out;
    std::set<std::string> seen;
    for (const auto& line : split_lines(completion)) {
        std::smatch m;
        if (!std::regex_match(line, m, re)) continue;
        Area a{strip_markup(m[1].str()), strip_markup(m[2].str())};
        if (a.name.empty() || a.name == kUnassigned) continue;
        if (!seen.insert(to_lower(a.name)).second) continue;
        out.push_back(std::move(a));
        if (out.size() == max_areas) break;
    }
    if (out.empty()) throw ParseError("area discovery completion lists no areas");
    return out;
}

std::vector<Area> discover_areas(Gateway& gateway, const GenerationConfig& config,
                                 const std::vector<Conversation>& train, std::size_t sample_size,
                                 std::size_t max_areas, std::uint64_t seed) {
    if (train.empty()) throw ConfigError("area discovery needs a nonempty training set");
    if (max_areas == 0) throw ConfigError("max_areas must be positive");
    if (sample_size == 0) throw ConfigError("sample_size must be positive");
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(mix_seed(seed, 0xAD));
    rng.shuffle(idx);
    idx.resize(std::min(sample_size, train.size()));
    std::sort(idx.begin(), idx.end());
    std::vector<Conversation> sample;
    for (auto i : idx) sample.push_back(train[i]);

    const std::string text =
        gateway.complete(prompts::get(prompts::kAreaDiscovery),
                         {{"conversations", render_numbered(sample)}, {"max_areas", std::to_string(max_areas)}}, config);
    return parse_areas(text, max_areas);
}

// ---- stage 2 -------------------------------------------------------------------

std::vector<Reason> extract_reasons(Gateway& gateway, const GenerationConfig& config,
                                    const std::vector<Conversation>& train, const std::vector<Area>& areas) {
    const bool free_form = areas.empty();
    std::string area_block;
    for (const auto& a : areas) area_block += (area_block.empty() ? "- " : "\n- ") + a.name + ": " + a.description;
    const auto known = area_names(areas);

    auto per_conversation = [&](std::size_t i) -> std::vector<Reason> {
        const Conversation& c = train[i];
        const Label pol = c.labels.overall;
        std::string_view tmpl;
        Bindings b{{"conversation", render_transcript(c.turns)}};
        if (free_form) {
            tmpl = pol == Label::Pos ? prompts::kExtractPosNoAreas : prompts::kExtractNegNoAreas;
        } else {
            tmpl = pol == Label::Pos ? prompts::kExtractPos : prompts::kExtractNeg;
            b["areas"] = area_block;
        }
        const std::string text = gateway.complete(prompts::get(tmpl), std::move(b), config);

        static const std::regex tagged(R"(^\s*(?:[-*]|\d+[.)])?\s*\[([^\]]+)\]\s*:?\s*(.+?)\s*$)");
        static const std::regex bullet(R"(^\s*(?:[-*]|\d+[.)])\s*(.+?)\s*$)");
        std::vector<Reason> out;
        for (const auto& line : split_lines(text)) {
            std::smatch m;
            if (free_form) {
                if (!std::regex_match(line, m, bullet)) continue;
                out.push_back(Reason{c.id, pol, std::string(kUnassigned), strip_markup(m[1].str())});
                continue;
            }
            if (!std::regex_match(line, m, tagged)) continue;
            auto area = resolve_area(m[1].str(), known);
            if (!area || *area == kUnassigned) {
                logger()->warn("conversation {}: reason names unknown area '{}', dropped", c.id, m[1].str());
                continue;
            }
            out.push_back(Reason{c.id, pol, *area, strip_markup(m[2].str())});
        }
        if (out.empty() && !trim(text).empty())
            logger()->warn("conversation {}: no parseable reasons in extraction output, skipped", c.id);
        return out;
    };

    auto nested = parallel_map<std::vector<Reason>>(train.size(), gateway.max_in_flight(), per_conversation);
    std::vector<Reason> out;
    for (auto& v : nested)
        for (auto& r : v) out.push_back(std::move(r));
    return out;
}

// ---- stage 3 -------------------------------------------------------------------

DedupMode parse_dedup_mode(std::string_view s) {
    if (s == "pooled") return DedupMode::Pooled;
    if (s == "per_polarity") return DedupMode::PerPolarity;
    throw ConfigError("unknown dedup mode '" + std::string(s) + "'");
}

std::string_view to_string(DedupMode m) { return m == DedupMode::Pooled ? "pooled" : "per_polarity"; }

std::size_t dedup_target(std::size_t total) { return std::max<std::size_t>(total / 2, 12); }

std::pair<std::size_t, std::size_t> allocate_dedup(std::size_t n_pos, std::size_t n_neg, std::size_t target) {
    const std::size_t total = n_pos + n_neg;
    if (total <= target) return {n_pos, n_neg};
    std::size_t pos = target * n_pos / total;
    std::size_t neg = target * n_neg / total;
    if (pos + neg < target) {
        // Largest remainder, POS first on ties.
        const std::size_t rp = target * n_pos % total;
        const std::size_t rn = target * n_neg % total;
        (rp >= rn ? pos : neg) += 1;
    }
    if (n_pos > 0 && pos == 0) ++pos, --neg;
    if (n_neg > 0 && neg == 0) ++neg, --pos;
    return {pos, neg};
}

RubricStageConfigs RubricStageConfigs::from(const StageConfigs& configs) {
    return {configs.at(Stage::RubricSummarization), configs.at(Stage::RubricDedup), configs.at(Stage::RubricWeighting)};
}

RubricSet generate_rubrics(Gateway& gateway, const RubricStageConfigs& configs, const std::vector<Reason>& reasons,
                           const std::vector<Area>& areas, const RubricOptions& options) {
    if (reasons.empty()) throw ConfigError("rubric generation needs at least one reason");
    if (options.per_area_cap == 0 || options.batch_size == 0)
        throw ConfigError("per_area_cap and batch_size must be positive");
    const auto known = area_names(areas);

    // (1) grouped summarization per polarity x area, in batches.
    std::map<Label, std::map<std::string, std::vector<std::string>>> groups;
    for (const auto& r : reasons) {
        auto area = resolve_area(r.area, known);
        if (!area) throw ValidationError("reason area resolves", r.conversation_id + ": " + r.area);
        groups[r.polarity][*area].push_back("- " + r.text);
    }
    std::map<Label, std::vector<Draft>> drafts;
    for (const auto& [pol, by_area] : groups) {
        for (const auto& [area, lines] : by_area) {
            std::vector<Draft> current;
            for (std::size_t start = 0; start < lines.size(); start += options.batch_size) {
                std::vector<std::string> batch(lines.begin() + static_cast<std::ptrdiff_t>(start),
                                               lines.begin() + static_cast<std::ptrdiff_t>(
                                                                   std::min(lines.size(), start + options.batch_size)));
                current = summarize_step(gateway, configs.summarize, pol, current, batch, options.per_area_cap, area,
                                         known);
            }
            for (auto& d : current) drafts[pol].push_back(std::move(d));
        }
    }

    // (2) dedup.
    const std::size_t n_pos = drafts[Label::Pos].size();
    const std::size_t n_neg = drafts[Label::Neg].size();
    std::map<Label, std::size_t> target;
    if (options.dedup == DedupMode::Pooled) {
        auto [tp, tn] = allocate_dedup(n_pos, n_neg, dedup_target(n_pos + n_neg));
        target[Label::Pos] = tp;
        target[Label::Neg] = tn;
    } else {
        target[Label::Pos] = std::min(n_pos, dedup_target(n_pos));
        target[Label::Neg] = std::min(n_neg, dedup_target(n_neg));
    }
    for (Label pol : {Label::Pos, Label::Neg}) {
        auto& list = drafts[pol];
        if (list.size() <= target[pol]) continue;
        std::vector<std::string> lines;
        for (const auto& d : list) lines.push_back("- [" + d.area + "] " + d.text);
        list = summarize_step(gateway, configs.dedup, pol, {}, lines, target[pol], std::nullopt, known);
    }

    RubricSet rs;
    rs.x_max = options.x_max;
    rs.provenance = options.provenance;
    for (Label pol : {Label::Pos, Label::Neg}) {
        const auto& list = drafts[pol];
        if (list.empty()) throw EmptyPolarity(pol);
        for (std::size_t i = 0; i < list.size(); ++i)
            rs.rubrics.push_back(Rubric{rubric_id(pol, i), pol, list[i].area, list[i].text, 1, false});
    }

    // (3) weights.
    if (!options.exclude_rw) {
        apply_weights(gateway, configs.weight, rs.rubrics, Label::Pos, false);
        apply_weights(gateway, configs.weight, rs.rubrics, Label::Neg, !options.exclude_mb);
    }
    rs.validate();
    return rs;
}

// ---- stage 4 -------------------------------------------------------------------

std::vector<RubricScore> score_conversation(Gateway& gateway, const GenerationConfig& config, const Conversation& c,
                                            const RubricSet& rs) {
    rs.validate_for_estimation();
    const std::string text = gateway.complete(prompts::get(prompts::kLabelEstimation),
                                              {{"pos_rubrics", render_rubric_list(rs.rubrics, Label::Pos)},
                                               {"neg_rubrics", render_rubric_list(rs.rubrics, Label::Neg)},
                                               {"conversation", render_transcript(c.turns)},
                                               {"x_max", std::to_string(rs.x_max)}},
                                              config);

    static const std::regex re(R"(^\s*[-*]?\s*\**([A-Za-z]+\d+)\**\s*:\s*(N/?A|-?\d+)\s*(?:\|\s*(.*?))?\s*$)",
                               std::regex::icase);
    std::map<std::string, RubricScore> parsed;
    for (const auto& line : split_lines(text)) {
        std::smatch m;
        if (!std::regex_match(line, m, re)) continue;
        const std::string id = m[1].str();
        if (!rs.find(id) || parsed.contains(id)) continue;
        RubricScore s{id, false, 0, m[3].matched ? m[3].str() : std::string{}};
        const std::string value = m[2].str();
        if (std::isdigit(static_cast<unsigned char>(value.back()))) {
            const int raw = std::stoi(value);
            s.applicable = true;
            s.score = std::clamp(raw, 0, rs.x_max);
            if (s.score != raw)
                logger()->warn("conversation {}: score {} for {} clamped to {}", c.id, raw, id, s.score);
        }
        parsed.emplace(id, std::move(s));
    }
    if (parsed.empty()) throw ParseError("label estimation for " + c.id + " has no rubric score lines");

    std::vector<RubricScore> out;
    for (const auto& r : rs.rubrics) {
        auto it = parsed.find(r.id);
        if (it == parsed.end()) {
            logger()->warn("conversation {}: no score for {}, treated as not applicable", c.id, r.id);
            out.push_back(RubricScore{r.id, false, 0, ""});
        } else {
            out.push_back(it->second);
        }
    }
    return out;
}

Aggregate aggregate(const std::vector<RubricScore>& scores, const RubricSet& rs) {
    rs.validate_for_estimation();
    std::map<std::string, const RubricScore*> by_id;
    for (const auto& s : scores) {
        if (!rs.find(s.rubric_id)) throw MissingScore("score for unknown rubric '" + s.rubric_id + "'");
        if (!by_id.emplace(s.rubric_id, &s).second) throw MissingScore("duplicate score for rubric '" + s.rubric_id + "'");
    }
    // Sums of w*s stay far below 2^63 for any realistic set.
    long long sum_pos = 0, sum_neg = 0, n_pos = 0, n_neg = 0;
    for (const auto& r : rs.rubrics) {
        auto it = by_id.find(r.id);
        if (it == by_id.end()) throw MissingScore("no score for rubric '" + r.id + "'");
        const RubricScore& s = *it->second;
        const long long v = s.applicable ? static_cast<long long>(r.weight) * std::clamp(s.score, 0, rs.x_max) : 0;
        if (r.polarity == Label::Pos) {
            sum_pos += v;
            ++n_pos;
        } else {
            sum_neg += v;
            ++n_neg;
        }
    }
    Aggregate a;
    a.avg_pos = static_cast<double>(sum_pos) / static_cast<double>(rs.x_max * n_pos);
    a.avg_neg = static_cast<double>(sum_neg) / static_cast<double>(rs.x_max * n_neg);
    // sum_pos/(x n_pos) > sum_neg/(x n_neg)  <=>  sum_pos n_neg > sum_neg n_pos
    a.label = sum_pos * n_neg > sum_neg * n_pos ? Label::Pos : Label::Neg;
    return a;
}

int make_or_break_dominance_bound(int x_max, std::size_t n_neg, int max_pos_weight) {
    if (x_max <= 0 || n_neg == 0 || max_pos_weight < 0) throw ConfigError("invalid dominance bound arguments");
    // NEG iff sum_pos/n_pos <= sum_neg/n_neg. sum_pos/n_pos <= max_w*x_max and
    // sum_neg >= 100*s, so 100*s >= n_neg*max_w*x_max suffices.
    const long long need = static_cast<long long>(x_max) * static_cast<long long>(n_neg) * max_pos_weight;
    return static_cast<int>((need + kMakeOrBreakWeight - 1) / kMakeOrBreakWeight);
}

void to_json(json& j, const Verdict& v) {
    j = json{{"conversation_id", v.conversation_id},
             {"label", to_string(v.label)},
             {"avg_pos", v.avg_pos},
             {"avg_neg", v.avg_neg},
             {"scores", v.scores}};
}

void from_json(const json& j, Verdict& v) {
    v.conversation_id = j.at("conversation_id").get<std::string>();
    v.label = parse_label(j.at("label").get<std::string>());
    v.avg_pos = j.at("avg_pos").get<double>();
    v.avg_neg = j.at("avg_neg").get<double>();
    v.scores = j.at("scores").get<std::vector<RubricScore>>();
}

Verdict evaluate(Gateway& gateway, const GenerationConfig& config, const Conversation& c, const RubricSet& rs) {
    rs.validate_for_estimation();
    Verdict v;
    v.conversation_id = c.id;
    v.scores = score_conversation(gateway, config, c, rs);
    const Aggregate a = aggregate(v.scores, rs);
    v.label = a.label;
    v.avg_pos = a.avg_pos;
    v.avg_neg = a.avg_neg;
    return v;
}

std::vector<Verdict> evaluate_all(Gateway& gateway, const GenerationConfig& config,
                                  const std::vector<Conversation>& conversations, const RubricSet& rs) {
    rs.validate_for_estimation();
    return parallel_map<Verdict>(conversations.size(), gateway.max_in_flight(),
                                 [&](std::size_t i) { return evaluate(gateway, config, conversations[i], rs); });
}

LearnResult learn(Gateway& gateway, const StageConfigs& configs, const std::vector<Conversation>& train,
                  const LearnOptions& options) {
    if (train.empty()) throw ConfigError("learning needs a nonempty training set");
    LearnResult out;
    if (!options.exclude_ad)
        out.areas = discover_areas(gateway, configs.at(Stage::AreaDiscovery), train, options.sample_size,
                                   options.max_areas, options.seed);
    out.reasons = extract_reasons(gateway, configs.at(Stage::ReasonExtraction), train, out.areas);
    out.rubrics = generate_rubrics(gateway, RubricStageConfigs::from(configs), out.reasons, out.areas, options.rubrics);
    return out;
}

// ---- persistence ---------------------------------------------------------------

std::string serialize_rubric_store(const RubricSet& rs) {
    rs.validate();
    std::string out = json{{"record", "header"}, {"system", "scope"}, {"x_max", rs.x_max}, {"provenance", rs.provenance}}.dump() + "\n";
    for (const auto& r : rs.rubrics) {
        json j = r;
        j["record"] = "rubric";
        out += j.dump() + "\n";
    }
    return out;
}

RubricSet parse_rubric_store(const std::string& text) {
    RubricSet rs;
    bool header = false;
    std::size_t lineno = 0;
    for (const auto& rec : parse_jsonl(text)) {
        ++lineno;
        try {
            const std::string kind = rec.at("record").get<std::string>();
            if (kind == "header") {
                if (header) throw ParseError("second header record", lineno);
                header = true;
                if (rec.value("system", std::string("scope")) != "scope")
                    throw ParseError("not a SCOPE rubric store", lineno);
                rs.x_max = rec.at("x_max").get<int>();
                rs.provenance = rec.value("provenance", std::string{});
            } else if (kind == "rubric") {
                rs.rubrics.push_back(rec.get<Rubric>());
            } else {
                throw ParseError("unknown record kind '" + kind + "'", lineno);
            }
        } catch (const json::exception& e) {
            throw ParseError(std::string("rubric store: ") + e.what(), lineno);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(std::string("rubric store: ") + e.what(), lineno);
        }
    }
    if (!header) throw ParseError("rubric store lacks a header record");
    rs.validate();
    return rs;
}

void save_rubric_store(const std::string& path, const RubricSet& rs) { write_text_file(path, serialize_rubric_store(rs)); }

RubricSet load_rubric_store(const std::string& path) { return parse_rubric_store(read_text_file(path)); }

void save_verdicts(const std::string& path, const std::vector<Verdict>& verdicts) {
    std::vector<json> records(verdicts.begin(), verdicts.end());
    write_jsonl(path, records);
}

std::vector<Verdict> load_verdicts(const std::string& path) {
    std::vector<Verdict> out;
    for (const auto& rec : read_jsonl(path)) out.push_back(rec.get<Verdict>());
    return out;
}

}  // namespace scope::pipeline
