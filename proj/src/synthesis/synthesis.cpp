#include "scope/synthesis/synthesis.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "scope/core/dataset.hpp"
#include "scope/core/situations.hpp"
#include "scope/core/transcript.hpp"
#include "scope/core/util.hpp"
#include "scope/llm/prompts.hpp"

namespace scope::synthesis {

std::string_view to_string(ShotMode m) { return m == ShotMode::OneShot ? "one_shot" : "zero_shot"; }

void SynthesisJob::validate(const ToolCatalog& catalog) const {
    if (shot_mode == ShotMode::OneShot && !exemplar)
        throw ConfigError("one-shot job for '" + situation_id + "' has no exemplar");
    if (shot_mode == ShotMode::ZeroShot && exemplar)
        throw ConfigError("zero-shot job for '" + situation_id + "' carries an exemplar");
    find_situation(situation_id);
    if (catalog.group(tool_group).empty()) throw ConfigError("unknown tool group '" + tool_group + "'");
}

std::string sample_tool_group(std::uint64_t seed, const ToolCatalog& catalog) {
    const auto groups = catalog.groups();
    if (groups.empty()) throw ConfigError("tool catalog is empty");
    Rng rng(mix_seed(seed, 0x70));
    return groups[rng.index(groups.size())];
}

namespace {

std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        std::string name = trim(cur);
        // Drop list decorations such as "1." or "-".
        while (!name.empty() && (std::isdigit(static_cast<unsigned char>(name.front())) || name.front() == '.' ||
                                 name.front() == '-' || name.front() == '*' || name.front() == ' '))
            name.erase(0, 1);
        if (!name.empty()) out.push_back(name);
        cur.clear();
    };
    for (char c : text) {
        if (c == ',' || c == '\n' || c == ';') flush();
        else cur += c;
    }
    flush();
    return out;
}

}  // namespace

std::vector<std::string> generate_names(Gateway& gateway, const GenerationConfig& config, std::size_t count,
                                        std::uint64_t seed, int max_attempts) {
    std::vector<std::string> names;
    if (count == 0) return names;
    std::set<std::string> seen;
    const auto& tmpl = prompts::get(prompts::kNames);
    for (int attempt = 0; attempt < max_attempts && names.size() < count; ++attempt) {
        std::string variation = std::to_string(seed);
        if (attempt > 0) variation += "/" + std::to_string(attempt);
        const std::string text =
            gateway.complete(tmpl, {{"count", std::to_string(count)}, {"variation", variation}}, config);
        for (auto& n : split_names(text))
            if (seen.insert(to_lower(n)).second && names.size() < count) names.push_back(n);
    }
    if (names.size() < count)
        throw InsufficientNames("needed " + std::to_string(count) + " distinct names, got " +
                                std::to_string(names.size()));
    return names;
}

std::string conversation_id(const SynthesisJob& job) {
    return "syn-" + situation_slug(job.situation_id) + "-" + sha256_hex(std::to_string(job.seed)).substr(0, 10);
}

Conversation parse_generated(const std::string& completion, const SynthesisJob& job, const ToolCatalog& catalog,
                             const std::string& generator) {
    Conversation c;
    c.id = conversation_id(job);
    try {
        c.turns = parse_transcript(completion);
    } catch (const ParseError& e) {
        throw SynthesisParseFailure(e.what(), completion);
    }
    const auto group = catalog.group(job.tool_group);
    for (const auto& t : c.turns) {
        if (!t.tool_name) continue;
        const bool known = std::any_of(group.begin(), group.end(), [&](const ToolSpec& s) { return s.name == *t.tool_name; });
        if (!known)
            throw SynthesisParseFailure("tool '" + *t.tool_name + "' is not in group '" + job.tool_group + "'",
                                        completion);
    }
    const SituationSpec& spec = find_situation(job.situation_id);
    c.labels = spec.expected_labels;
    c.situation_id = spec.id;
    c.generator = generator;
    c.tier = Tier::Unfiltered;
    c.tool_group = job.tool_group;
    try {
        validate_turns(c);
    } catch (const ValidationError& e) {
        throw SynthesisParseFailure(e.what(), completion);
    }
    return c;
}

Bindings generation_bindings(const SynthesisJob& job, const ToolCatalog& catalog) {
    const SituationSpec& spec = find_situation(job.situation_id);
    json tools = json::array();
    for (const auto& t : catalog.group(job.tool_group)) tools.push_back(t);
    std::string names;
    for (const auto& n : job.names) names += (names.empty() ? "" : ", ") + n;
    Bindings b{{"case_id", spec.id},
               {"overall_description", spec.overall_description},
               {"user_details", spec.user_details},
               {"tool_details", spec.tool_details},
               {"agent_details", spec.agent_details},
               {"tools", tools.dump(2)},
               {"names", names.empty() ? "(any)" : names}};
    if (job.shot_mode == ShotMode::OneShot) b["exemplar"] = render_transcript(job.exemplar->turns);
    return b;
}

Conversation synthesize(Gateway& gateway, const GenerationConfig& config, const SynthesisJob& job,
                        const ToolCatalog& catalog) {
    job.validate(catalog);
    const auto& tmpl =
        prompts::get(job.shot_mode == ShotMode::OneShot ? prompts::kGenerateOneShot : prompts::kGenerateZeroShot);
    const std::string text = gateway.complete(tmpl, generation_bindings(job, catalog), config);
    return parse_generated(text, job, catalog, config.model_id);
}

ExemplarStore ExemplarStore::load(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("exemplar directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    ExemplarStore store;
    for (const auto& f : files)
        for (auto& c : load_dataset(f.string()).conversations) store.add(std::move(c));
    return store;
}

void ExemplarStore::add(Conversation c) { by_situation_[c.situation_id].push_back(std::move(c)); }

const std::vector<Conversation>* ExemplarStore::find(const std::string& situation_id) const {
    auto it = by_situation_.find(situation_id);
    return it == by_situation_.end() || it->second.empty() ? nullptr : &it->second;
}

std::size_t ExemplarStore::size() const {
    std::size_t n = 0;
    for (const auto& [k, v] : by_situation_) n += v.size();
    return n;
}

ModePolicy parse_mode_policy(std::string_view s) {
    if (s == "paper") return ModePolicy::Paper;
    if (s == "zero_shot") return ModePolicy::AllZeroShot;
    if (s == "one_shot") return ModePolicy::AllOneShot;
    throw ConfigError("unknown mode policy '" + std::string(s) + "'");
}

std::vector<SynthesisJob> build_batch(const std::map<std::string, int>& spec, ModePolicy policy,
                                      const ExemplarStore& exemplars, const ToolCatalog& catalog, std::uint64_t seed) {
    for (const auto& [id, n] : spec) {
        if (!try_find_situation(id)) throw ConfigError("unknown situation '" + id + "' in batch spec");
        if (n < 0) throw ConfigError("negative count for situation '" + id + "'");
    }
    std::vector<SynthesisJob> jobs;
    std::uint64_t index = 0;
    for (const auto& situation : situation_catalog()) {
        auto it = spec.find(situation.id);
        if (it == spec.end()) continue;
        const bool one_shot = policy == ModePolicy::AllOneShot ||
                              (policy == ModePolicy::Paper && situation.expected_labels.overall == Label::Neg);
        const auto* pool = exemplars.find(situation.id);
        if (one_shot && it->second > 0 && !pool)
            throw ConfigError("missing exemplar for situation '" + situation.id + "'");
        for (int k = 0; k < it->second; ++k, ++index) {
            SynthesisJob job;
            job.situation_id = situation.id;
            job.seed = mix_seed(seed, index);
            job.tool_group = sample_tool_group(job.seed, catalog);
            job.shot_mode = one_shot ? ShotMode::OneShot : ShotMode::ZeroShot;
            if (one_shot) job.exemplar = (*pool)[Rng(job.seed).index(pool->size())];
            jobs.push_back(std::move(job));
        }
    }
    return jobs;
}

std::map<std::string, int> parse_batch_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("batch spec: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("batch spec must be an object of situation id -> count");
    std::map<std::string, int> out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number_integer()) throw ParseError("batch spec count for '" + k + "' is not an integer");
        out[k] = v.get<int>();
    }
    return out;
}

void to_json(json& j, const SynthesisOutcome& o) {
    j = json{{"ok", o.conversation.has_value()}};
    if (o.conversation) j["conversation_id"] = o.conversation->id;
    if (!o.error.empty()) j["error"] = o.error;
    if (!o.raw_text.empty()) j["raw_text"] = o.raw_text;
}

std::vector<SynthesisOutcome> run_batch(Gateway& gateway, const StageConfigs& configs, std::vector<SynthesisJob> jobs,
                                        const ToolCatalog& catalog, const BatchSettings& settings) {
    for (const auto& job : jobs) {
        job.validate(catalog);
        if (settings.warn_ambiguous && is_ambiguous_situation(job.situation_id))
            logger()->warn("situation '{}' is hard to validate automatically", job.situation_id);
    }
    return parallel_map<SynthesisOutcome>(jobs.size(), gateway.max_in_flight(), [&](std::size_t i) {
        SynthesisJob job = jobs[i];
        if (job.names.empty())
            job.names = generate_names(gateway, configs.at(Stage::NameGeneration), settings.names_per_job, job.seed);
        SynthesisOutcome out;
        try {
            out.conversation = synthesize(gateway, configs.at(Stage::ConversationGeneration), job, catalog);
        } catch (const SynthesisParseFailure& e) {
            logger()->warn("synthesis job {} ({}) failed to parse: {}", i, job.situation_id, e.what());
            out.error = e.what();
            out.raw_text = e.raw_text();
        }
        return out;
    });
}

}  // namespace scope::synthesis
