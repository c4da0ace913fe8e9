#include "scope/cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "scope/core/dataset.hpp"
#include "scope/core/tools.hpp"
#include "scope/core/util.hpp"
#include "scope/errors.hpp"
#include "scope/harness/harness.hpp"
#include "scope/judge/judge.hpp"
#include "scope/llm/gateway.hpp"
#include "scope/pipeline/pipeline.hpp"
#include "scope/sim/sim.hpp"
#include "scope/spur/spur.hpp"
#include "scope/synthesis/synthesis.hpp"

namespace scope::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kExitTable = R"(Exit codes:
  0  success
  1  unexpected failure
  2  configuration error (bad flags, missing files, unknown ids, empty input)
  3  parse or validation error (malformed input, unparseable model output)
  4  gateway error (provider rejected, transport exhausted, mock-script miss)

Settings are resolved as flags > environment > config file > defaults.
Environment: SCOPE_CONFIG, SCOPE_MODE, SCOPE_PROVIDER, SCOPE_MOCK_SCRIPT, SCOPE_SEED,
SCOPE_MODEL_ID, SCOPE_MAX_IN_FLIGHT; remote provider: SCOPE_PROVIDER_URL, SCOPE_PROVIDER_KEY.)";

struct GlobalFlags {
    std::string config, mode, provider, mock_script, model, request_log, seed, log_level = "warn";
    std::size_t max_in_flight = 0;
    std::vector<std::string> stage_overrides;
    bool quiet = false;
};

struct Setting {
    std::string value;
    std::string source;
};

struct Settings {
    Setting mode, provider, mock_script, model, request_log, seed, max_in_flight;
    std::uint64_t seed_value = 0;
    StageConfigs stages;
    json stage_overrides = json::object();
};

// ---- option surface --------------------------------------------------------------

struct SynthesizeArgs {
    std::string spec, out, log, catalog, exemplars, policy = "paper";
    std::size_t names_per_job = 3;
};
struct FilterArgs {
    std::string in, human, out, verdicts, judge_report, name = "trace";
};
struct LearnArgs {
    std::string data, out, train_ids, artifacts, system = "scope", dedup = "pooled";
    bool exclude_ad = false, exclude_rw = false, exclude_mb = false;
    std::size_t sample_size = 10, max_areas = 5, per_area_cap = 5, batch_size = 20;
};
struct EvaluateArgs {
    std::string data, rubrics, out, protocol, run_dir, run_id, ids, system = "scope", stratify = "overall";
    std::string dedup = "pooled";
    bool exclude_ad = false, exclude_rw = false, exclude_mb = false;
    int repeats = 5;
    double train_fraction = 0.4;
    std::size_t sample_size = 10, max_areas = 5, per_area_cap = 5, batch_size = 20;
};
struct ReportArgs {
    std::string manifest, format = "markdown", out;
};

struct Surface {
    CLI::App app{"Rubric-based evaluation of tool-using conversational agents", "scope"};
    GlobalFlags g;
    SynthesizeArgs syn;
    FilterArgs fil;
    LearnArgs lrn;
    EvaluateArgs ev;
    ReportArgs rep;
    CLI::App *synthesize = nullptr, *filter = nullptr, *learn = nullptr, *evaluate = nullptr, *report = nullptr;
    std::map<std::string, CLI::Option*> global_opts;

    Surface() {
        app.require_subcommand(1);
        app.fallthrough();
        app.footer(kExitTable);
        app.get_formatter()->column_width(34);

        global_opts["config"] = app.add_option("--config", g.config, "JSON config file");
        global_opts["mode"] = app.add_option("--mode", g.mode, "live | record | replay (default live)")
                                  ->check(CLI::IsMember({"live", "record", "replay"}));
        global_opts["provider"] = app.add_option("--provider", g.provider, "remote | sim (default remote)")
                                      ->check(CLI::IsMember({"remote", "sim"}));
        global_opts["mock_script"] =
            app.add_option("--mock-script", g.mock_script, "Mock script read in replay mode, extended in record mode");
        global_opts["seed"] = app.add_option("--seed", g.seed, "Master seed; generated and reported when absent");
        global_opts["model"] = app.add_option("--model", g.model, "Model id sent with every request");
        global_opts["max_in_flight"] =
            app.add_option("--max-in-flight", g.max_in_flight, "Concurrent provider requests (default 4)");
        global_opts["request_log"] = app.add_option("--request-log", g.request_log, "Write the request log (JSONL)");
        app.add_option("--stage", g.stage_overrides, "Stage override STAGE.FIELD=VALUE (repeatable)");
        app.add_option("--log-level", g.log_level, "trace | debug | info | warn | error | off")
            ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
        app.add_flag("--quiet", g.quiet, "Do not print the effective configuration");

        synthesize = app.add_subcommand("synthesize", "Generate unfiltered conversations from a batch spec");
        synthesize->add_option("--spec", syn.spec, "Batch spec: JSON object situation id -> count")->required();
        synthesize->add_option("--out", syn.out, "Output conversations (JSONL)")->required();
        synthesize->add_option("--log", syn.log, "Per-job synthesis log (default <out>.log.jsonl)");
        synthesize->add_option("--catalog", syn.catalog, "Tool catalog (JSONL, default built-in)");
        synthesize->add_option("--exemplars", syn.exemplars, "Directory of one-shot exemplars");
        synthesize->add_option("--policy", syn.policy, "paper | zero_shot | one_shot")
            ->check(CLI::IsMember({"paper", "zero_shot", "one_shot"}))
            ->capture_default_str();
        synthesize->add_option("--names-per-job", syn.names_per_job, "Person names per conversation")
            ->capture_default_str();

        filter = app.add_subcommand("filter", "Judge conversations and assemble gold/silver tiers");
        filter->add_option("--in", fil.in, "Unfiltered conversations (JSONL)")->required();
        filter->add_option("--human", fil.human, "Human validity labels (JSONL)");
        filter->add_option("--out", fil.out, "Output dataset (JSONL)")->required();
        filter->add_option("--verdicts", fil.verdicts, "Write judge verdicts (JSONL)");
        filter->add_option("--judge-report", fil.judge_report,
                           "Also judge human-labeled items and write precision/recall (JSON)");
        filter->add_option("--name", fil.name, "Dataset name")->capture_default_str();

        learn = app.add_subcommand("learn", "Learn a rubric store from a training set");
        learn->add_option("--data", lrn.data, "Dataset (JSONL)")->required();
        learn->add_option("--out", lrn.out, "Rubric store to write")->required();
        learn->add_option("--train-ids", lrn.train_ids, "File with one conversation id per line (default all)");
        learn->add_option("--artifacts", lrn.artifacts, "Write areas, reasons and rubrics (JSON)");
        learn->add_option("--system", lrn.system, "scope | spur")
            ->check(CLI::IsMember({"scope", "spur"}))
            ->capture_default_str();
        add_scope_options(learn, lrn.exclude_ad, lrn.exclude_rw, lrn.exclude_mb, lrn.sample_size, lrn.max_areas,
                          lrn.per_area_cap, lrn.batch_size, lrn.dedup);

        evaluate = app.add_subcommand("evaluate", "Score a dataset with a rubric store, or run the experiment protocol");
        evaluate->add_option("--data", ev.data, "Dataset (JSONL)")->required();
        evaluate->add_option("--system", ev.system, "scope | spur")
            ->check(CLI::IsMember({"scope", "spur"}))
            ->capture_default_str();
        auto* rubrics = evaluate->add_option("--rubrics", ev.rubrics, "Rubric store to score with");
        auto* protocol = evaluate->add_option("--protocol", ev.protocol, "Run the repeated-split protocol (paper)")
                             ->check(CLI::IsMember({"paper"}));
        rubrics->excludes(protocol);
        evaluate->add_option("--ids", ev.ids, "With --rubrics: only score these ids (one per line)");
        evaluate->add_option("--out", ev.out, "With --rubrics: verdicts and metrics (JSON)");
        evaluate->add_option("--run-dir", ev.run_dir, "With --protocol: directory for manifest and rubric stores");
        evaluate->add_option("--run-id", ev.run_id, "With --protocol: run id (default run-<seed>)");
        evaluate->add_option("--repeats", ev.repeats, "Resamples")->capture_default_str();
        evaluate->add_option("--train-fraction", ev.train_fraction, "Training share per resample")->capture_default_str();
        evaluate->add_option("--stratify", ev.stratify, "overall | none")
            ->check(CLI::IsMember({"overall", "none"}))
            ->capture_default_str();
        add_scope_options(evaluate, ev.exclude_ad, ev.exclude_rw, ev.exclude_mb, ev.sample_size, ev.max_areas,
                          ev.per_area_cap, ev.batch_size, ev.dedup);

        report = app.add_subcommand("report", "Render a run manifest");
        report->add_option("--manifest", rep.manifest, "Run manifest (JSON)")->required();
        report->add_option("--format", rep.format, "text | csv | markdown")
            ->check(CLI::IsMember({"text", "csv", "markdown"}))
            ->capture_default_str();
        report->add_option("--out", rep.out, "Output file (default report.<ext> next to the manifest)");
    }

    static void add_scope_options(CLI::App* sub, bool& ad, bool& rw, bool& mb, std::size_t& sample,
                                  std::size_t& areas, std::size_t& cap, std::size_t& batch, std::string& dedup) {
        sub->add_flag("--exclude-ad", ad, "Ablation: skip area discovery");
        sub->add_flag("--exclude-rw", rw, "Ablation: all rubric weights 1");
        sub->add_flag("--exclude-mb", mb, "Ablation: no make-or-break rubrics");
        sub->add_option("--sample-size", sample, "Conversations shown to area discovery")->capture_default_str();
        sub->add_option("--max-areas", areas, "Upper bound on discovered areas")->capture_default_str();
        sub->add_option("--per-area-cap", cap, "Rubrics kept per polarity and area")->capture_default_str();
        sub->add_option("--batch-size", batch, "Reasons per summarization call")->capture_default_str();
        sub->add_option("--dedup", dedup, "pooled | per_polarity")
            ->check(CLI::IsMember({"pooled", "per_polarity"}))
            ->capture_default_str();
    }
};

// ---- settings resolution -----------------------------------------------------------

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    if (!fs::exists(path)) throw ConfigError("config file '" + path + "' does not exist");
    try {
        json j = json::parse(read_text_file(path));
        if (!j.is_object()) throw ConfigError("config file '" + path + "' must hold a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

std::string json_scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

Setting resolve(const CLI::Option* flag, const std::string& flag_value, const char* env, const json& file,
                const char* key, const std::string& fallback) {
    if (flag && flag->count() > 0) return {flag_value, "flag"};
    if (env)
        if (const char* v = std::getenv(env); v && *v) return {v, "env " + std::string(env)};
    if (file.contains(key)) return {json_scalar(file.at(key)), "config file"};
    return {fallback, "default"};
}

void apply_stage_override(StageConfigs& stages, const std::string& stage_name, const std::string& field,
                          const std::string& value) {
    GenerationConfig& c = stages.at(parse_stage(stage_name));
    try {
        if (field == "temperature") c.temperature = std::stod(value);
        else if (field == "top_p") c.top_p = std::stod(value);
        else if (field == "max_tokens") c.max_tokens = std::stoi(value);
        else if (field == "model_id") c.model_id = value;
        else throw ConfigError("unknown stage field '" + field + "'");
    } catch (const std::logic_error&) {
        throw ConfigError("bad value '" + value + "' for " + stage_name + "." + field);
    }
    c.validate();
}

Settings resolve_settings(Surface& s) {
    std::string config_path = s.g.config;
    if (config_path.empty())
        if (const char* v = std::getenv("SCOPE_CONFIG")) config_path = v;
    const json file = load_config_file(config_path);

    Settings out;
    auto& o = s.global_opts;
    out.mode = resolve(o["mode"], s.g.mode, "SCOPE_MODE", file, "mode", "live");
    out.provider = resolve(o["provider"], s.g.provider, "SCOPE_PROVIDER", file, "provider", "remote");
    out.mock_script = resolve(o["mock_script"], s.g.mock_script, "SCOPE_MOCK_SCRIPT", file, "mock_script", "");
    out.model = resolve(o["model"], s.g.model, "SCOPE_MODEL_ID", file, "model", "default");
    out.request_log = resolve(o["request_log"], s.g.request_log, nullptr, file, "request_log", "");
    out.max_in_flight = resolve(o["max_in_flight"], std::to_string(s.g.max_in_flight), "SCOPE_MAX_IN_FLIGHT", file,
                                "max_in_flight", "4");
    out.seed = resolve(o["seed"], s.g.seed, "SCOPE_SEED", file, "seed", "");

    const std::string& mode = out.mode.value;
    if (mode != "live" && mode != "record" && mode != "replay") throw ConfigError("invalid mode '" + mode + "'");
    if (out.provider.value != "remote" && out.provider.value != "sim")
        throw ConfigError("invalid provider '" + out.provider.value + "'");
    try {
        if (std::stoll(out.max_in_flight.value) < 1) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
        throw ConfigError("max_in_flight must be a positive integer, got '" + out.max_in_flight.value + "'");
    }
    if (out.seed.value.empty()) {
        std::random_device rd;
        out.seed_value = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        out.seed = {std::to_string(out.seed_value), "generated"};
    } else {
        try {
            std::size_t used = 0;
            out.seed_value = std::stoull(out.seed.value, &used);
            if (used != out.seed.value.size()) throw std::invalid_argument("");
        } catch (const std::logic_error&) {
            throw ConfigError("seed must be an unsigned integer, got '" + out.seed.value + "'");
        }
    }

    out.stages = StageConfigs::defaults(out.model.value);
    if (file.contains("stages")) {
        const json& st = file.at("stages");
        if (!st.is_object()) throw ConfigError("config file: 'stages' must be an object");
        for (const auto& [stage, fields] : st.items()) {
            if (!fields.is_object()) throw ConfigError("config file: stages." + stage + " must be an object");
            for (const auto& [field, value] : fields.items()) {
                apply_stage_override(out.stages, stage, field, json_scalar(value));
                out.stage_overrides[stage + "." + field] = {{"value", json_scalar(value)}, {"source", "config file"}};
            }
        }
    }
    for (const auto& spec : s.g.stage_overrides) {
        const auto eq = spec.find('=');
        const auto dot = spec.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("stage override must look like STAGE.FIELD=VALUE, got '" + spec + "'");
        const std::string stage = spec.substr(0, dot), field = spec.substr(dot + 1, eq - dot - 1);
        apply_stage_override(out.stages, stage, field, spec.substr(eq + 1));
        out.stage_overrides[stage + "." + field] = {{"value", spec.substr(eq + 1)}, {"source", "flag"}};
    }
    return out;
}

void print_settings(const Settings& s, std::ostream& err) {
    err << "effective config:\n";
    auto line = [&](const char* name, const Setting& v) {
        err << "  " << name << " = " << (v.value.empty() ? "(none)" : v.value) << "  [" << v.source << "]\n";
    };
    line("mode", s.mode);
    line("provider", s.provider);
    line("mock_script", s.mock_script);
    line("model", s.model);
    line("seed", s.seed);
    line("max_in_flight", s.max_in_flight);
    line("request_log", s.request_log);
    for (const auto& [k, v] : s.stage_overrides.items())
        err << "  stage " << k << " = " << v.at("value").get<std::string>() << "  [" << v.at("source").get<std::string>()
            << "]\n";
}

// ---- session -------------------------------------------------------------------------

class Session {
public:
    explicit Session(Settings settings) : s_(std::move(settings)) {
        const std::string& mode = s_.mode.value;
        std::shared_ptr<Provider> provider;
        if (mode == "replay") {
            if (s_.mock_script.value.empty()) throw ConfigError("replay mode needs --mock-script");
            if (!fs::exists(s_.mock_script.value))
                throw ConfigError("mock script '" + s_.mock_script.value + "' does not exist");
            provider = std::make_shared<ScriptedMock>(ScriptedMock::load(s_.mock_script.value));
        } else {
            if (mode == "record" && s_.mock_script.value.empty()) throw ConfigError("record mode needs --mock-script");
            if (s_.provider.value == "sim") {
                provider = std::make_shared<sim::SimulatedProvider>();
            } else {
                RemoteSettings rs = RemoteSettings::from_env();
                if (rs.url.empty() || rs.api_key.empty())
                    throw ConfigError(mode + " mode with the remote provider needs SCOPE_PROVIDER_URL and SCOPE_PROVIDER_KEY");
                if (s_.model.source != "default" || rs.model_id.empty()) rs.model_id = s_.model.value;
                provider = std::make_shared<RemoteProvider>(rs);
            }
        }
        GatewayOptions opts;
        opts.max_in_flight = static_cast<std::size_t>(std::stoull(s_.max_in_flight.value));
        gateway_ = std::make_unique<Gateway>(std::move(provider), opts);
    }

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    ~Session() {
        try {
            flush();
        } catch (const std::exception& e) {
            logger()->error("could not write recorded completions: {}", e.what());
        }
    }

    Gateway& gateway() { return *gateway_; }
    const StageConfigs& stages() const { return s_.stages; }
    std::uint64_t seed() const { return s_.seed_value; }

    /// Record mode: merges the new completions into the mock script.
    void flush() {
        if (flushed_) return;
        flushed_ = true;
        if (!s_.request_log.value.empty()) gateway_->write_log(s_.request_log.value);
        if (s_.mode.value != "record") return;
        const std::string& path = s_.mock_script.value;
        ScriptedMock merged = fs::exists(path) ? ScriptedMock::load(path) : ScriptedMock(MissPolicy::Error);
        const ScriptedMock recorded = gateway_->recorded_script();
        for (const auto& [fp, completion] : recorded.script()) merged.add(fp, completion);
        merged.save(path);
    }

private:
    Settings s_;
    std::unique_ptr<Gateway> gateway_;
    bool flushed_ = false;
};

// ---- helpers -----------------------------------------------------------------------------

void require_file(const std::string& path, const std::string& what) {
    if (!fs::is_regular_file(path)) throw ConfigError(what + " '" + path + "' does not exist");
}

std::vector<Conversation> read_conversations(const std::string& path) {
    require_file(path, "conversation file");
    std::vector<Conversation> out;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        try {
            out.push_back(j.get<Conversation>());
        } catch (const json::exception& e) {
            throw ParseError(path + ": " + e.what(), line);
        }
    }
    return out;
}

void write_conversations(const std::string& path, const std::vector<Conversation>& convs) {
    std::vector<json> records;
    for (const auto& c : convs) records.emplace_back(c);
    write_jsonl(path, records);
}

std::vector<std::string> read_id_list(const std::string& path) {
    require_file(path, "id list");
    std::vector<std::string> ids;
    for (const auto& l : split_lines(read_text_file(path))) {
        std::string id = trim(l);
        if (!id.empty()) ids.push_back(std::move(id));
    }
    return ids;
}

Dataset load_input_dataset(const std::string& path) {
    require_file(path, "dataset");
    Dataset d = load_dataset(path);
    if (d.conversations.empty()) throw ConfigError("dataset '" + path + "' is empty");
    return d;
}

std::vector<Conversation> select(const Dataset& d, const std::vector<std::string>& ids) {
    std::vector<Conversation> out;
    for (const auto& id : ids) {
        const Conversation* c = d.find(id);
        if (!c) throw ConfigError("id '" + id + "' is not in dataset '" + d.name + "'");
        out.push_back(*c);
    }
    return out;
}

harness::SystemSettings system_settings(std::size_t sample, std::size_t areas, std::size_t cap, std::size_t batch,
                                        const std::string& dedup) {
    harness::SystemSettings ss;
    ss.scope.sample_size = sample;
    ss.scope.max_areas = areas;
    ss.scope.rubrics.per_area_cap = cap;
    ss.scope.rubrics.batch_size = batch;
    ss.scope.rubrics.dedup = pipeline::parse_dedup_mode(dedup);
    ss.spur.batch_size = batch;
    return ss;
}

json metrics_rows_json(const std::vector<harness::MetricsRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json x = r.metrics;
        x["subset"] = r.subset;
        x["tier"] = r.tier;
        out.push_back(std::move(x));
    }
    return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- commands -------------------------------------------------------------------------------

int cmd_synthesize(const SynthesizeArgs& a, Session& session, std::ostream& out) {
    require_file(a.spec, "batch spec");
    const auto spec = synthesis::parse_batch_spec(read_text_file(a.spec));
    int total = 0;
    for (const auto& [id, n] : spec) total += n;
    const ToolCatalog catalog = a.catalog.empty() ? ToolCatalog::builtin() : ToolCatalog::load(a.catalog);
    const synthesis::ExemplarStore exemplars =
        a.exemplars.empty() ? synthesis::ExemplarStore{} : synthesis::ExemplarStore::load(a.exemplars);
    auto jobs = synthesis::build_batch(spec, synthesis::parse_mode_policy(a.policy), exemplars, catalog, session.seed());
    if (total == 0 || jobs.empty()) throw ConfigError("batch spec '" + a.spec + "' requests no conversations");

    synthesis::BatchSettings bs;
    bs.names_per_job = a.names_per_job;
    const auto outcomes = synthesis::run_batch(session.gateway(), session.stages(), jobs, catalog, bs);
    std::vector<Conversation> convs;
    std::vector<json> log;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        json j = outcomes[i];
        j["situation_id"] = jobs[i].situation_id;
        j["tool_group"] = jobs[i].tool_group;
        j["shot_mode"] = synthesis::to_string(jobs[i].shot_mode);
        j["seed"] = jobs[i].seed;
        log.push_back(std::move(j));
        if (outcomes[i].conversation) convs.push_back(*outcomes[i].conversation);
    }
    write_conversations(a.out, convs);
    write_jsonl(a.log.empty() ? a.out + ".log.jsonl" : a.log, log);
    out << "synthesized " << convs.size() << "/" << jobs.size() << " conversations -> " << a.out << "\n";
    return kOk;
}

int cmd_filter(const FilterArgs& a, Session& session, std::ostream& out) {
    auto convs = read_conversations(a.in);
    if (convs.empty()) throw ConfigError("no conversations in '" + a.in + "'");
    std::map<std::string, bool> human;
    if (!a.human.empty()) {
        require_file(a.human, "human label file");
        for (const auto& h : judge::load_human_labels(a.human)) human[h.conversation_id] = h.valid;
    }
    for (const auto& [id, valid] : human)
        if (std::none_of(convs.begin(), convs.end(),
                         [&](const Conversation& c) { return c.id == id; }))
            throw ConfigError("human label for unknown conversation '" + id + "'");
    std::vector<std::pair<Conversation, bool>> labeled;
    std::vector<Conversation> to_judge;
    for (auto& c : convs) {
        if (auto it = human.find(c.id); it != human.end()) labeled.emplace_back(c, it->second);
        else to_judge.push_back(c);
    }
    const auto& cfg = session.stages().at(Stage::JudgeFilter);
    const auto verdicts = judge::judge_all(session.gateway(), cfg, to_judge);
    std::vector<std::pair<Conversation, judge::JudgeVerdict>> judged;
    for (std::size_t i = 0; i < to_judge.size(); ++i) judged.emplace_back(to_judge[i], verdicts[i]);
    Dataset d = judge::assemble_tiers(labeled, judged, a.name);
    save_dataset(a.out, d);
    if (!a.verdicts.empty()) judge::save_verdicts(a.verdicts, verdicts);

    auto counts = count(d);
    out << "gold " << counts.by_tier[Tier::Gold] << ", silver " << counts.by_tier[Tier::Silver] << " of "
        << convs.size() << " conversations -> " << a.out << "\n";

    if (!a.judge_report.empty()) {
        std::vector<Conversation> gold_pool;
        for (const auto& [c, valid] : labeled) gold_pool.push_back(c);
        const auto checked = judge::judge_all(session.gateway(), cfg, gold_pool);
        json report{{"items", checked.size()}};
        try {
            const double p = judge::judge_precision(checked, human);
            report["precision"] = p;
            out << "judge precision " << harness::format_value(p, 4);
        } catch (const judge::NoAcceptedItems&) {
            report["precision"] = nullptr;
            out << "judge precision N/A";
        }
        const auto r = judge::judge_recall(checked, human);
        report["recall"] = r ? json(*r) : json(nullptr);
        out << ", recall " << harness::format_value(r, 4) << " on " << checked.size() << " human-labeled items\n";
        write_text_file(a.judge_report, dump(report));
    }
    return kOk;
}

int cmd_learn(const LearnArgs& a, Session& session, std::ostream& out) {
    const Dataset d = load_input_dataset(a.data);
    const auto train = a.train_ids.empty() ? d.conversations : select(d, read_id_list(a.train_ids));
    if (train.empty()) throw ConfigError("training set is empty");
    const auto kind = harness::parse_system(a.system);
    const harness::Ablations abl{a.exclude_ad, a.exclude_rw, a.exclude_mb};
    auto system = harness::make_system(kind, session.gateway(), session.stages(),
                                       system_settings(a.sample_size, a.max_areas, a.per_area_cap, a.batch_size, a.dedup),
                                       abl);
    const json learned = system->learn(train, session.seed());
    write_text_file(a.out, system->rubric_store());
    if (!a.artifacts.empty()) write_text_file(a.artifacts, dump(learned));
    out << "learned " << learned.at("rubrics").size() << " rubrics from " << train.size() << " conversations -> "
        << a.out << "\n";
    return kOk;
}

int cmd_evaluate(const EvaluateArgs& a, Session& session, std::ostream& out) {
    const Dataset d = load_input_dataset(a.data);
    const auto kind = harness::parse_system(a.system);
    const harness::Ablations abl{a.exclude_ad, a.exclude_rw, a.exclude_mb};
    const auto ss = system_settings(a.sample_size, a.max_areas, a.per_area_cap, a.batch_size, a.dedup);

    if (!a.protocol.empty()) {
        if (a.run_dir.empty()) throw ConfigError("--protocol needs --run-dir");
        harness::ExperimentSettings es;
        es.run_id = a.run_id.empty() ? "run-" + std::to_string(session.seed()) : a.run_id;
        es.system = kind;
        es.ablations = abl;
        es.system_settings = ss;
        es.plan.repeats = a.repeats;
        es.plan.train_fraction = a.train_fraction;
        es.plan.seed = session.seed();
        es.plan.stratify_by = harness::parse_stratify(a.stratify);
        auto m = harness::run_experiment(d, session.gateway(), session.stages(), es);
        fs::create_directories(a.run_dir);
        for (auto& r : m.repeats) {
            if (!r.ok || r.rubric_store_text.empty()) continue;
            r.rubric_store = "repeat-" + std::to_string(r.repeat) + ".rubrics.jsonl";
            write_text_file((fs::path(a.run_dir) / r.rubric_store).string(), r.rubric_store_text);
        }
        const std::string manifest = (fs::path(a.run_dir) / "manifest.json").string();
        write_text_file(manifest, dump(json(m)));
        std::size_t ok = 0;
        for (const auto& r : m.repeats) ok += r.ok;
        out << "run " << m.run_id << ": " << ok << "/" << m.repeats.size() << " repeats completed -> " << manifest
            << "\n";
        if (ok == 0 && !m.repeats.empty()) {
            const std::string& kind_of = m.repeats.front().error_kind;
            if (kind_of == "config") return kConfig;
            if (kind_of == "parse") return kParse;
            if (kind_of == "gateway") return kGateway;
            return kOther;
        }
        return kOk;
    }

    if (a.rubrics.empty()) throw ConfigError("evaluate needs --rubrics or --protocol");
    require_file(a.rubrics, "rubric store");
    const auto test = a.ids.empty() ? d.conversations : select(d, read_id_list(a.ids));
    if (test.empty()) throw ConfigError("nothing to evaluate");
    std::map<std::string, Label> labels;
    json verdicts = json::array();
    if (kind == harness::SystemKind::Scope) {
        const auto rs = pipeline::load_rubric_store(a.rubrics);
        for (const auto& v : pipeline::evaluate_all(session.gateway(), session.stages().at(Stage::LabelEstimation),
                                                    test, rs)) {
            labels[v.conversation_id] = v.label;
            verdicts.push_back(v);
        }
    } else {
        const auto rs = spur::load_rubric_store(a.rubrics);
        for (const auto& v :
             spur::spur_estimate_all(session.gateway(), session.stages().at(Stage::SpurEstimation), test, rs)) {
            labels[v.conversation_id] = spur::to_label(v.label);
            verdicts.push_back(v);
        }
    }
    const auto rows = harness::breakdown(test, labels);
    for (const auto& r : rows)
        out << r.subset << "/" << r.tier << ": n=" << r.metrics.confusion.total()
            << " acc=" << harness::format_value(r.metrics.accuracy) << " f1=" << harness::format_value(r.metrics.f1)
            << " pre=" << harness::format_value(r.metrics.precision)
            << " rec=" << harness::format_value(r.metrics.recall) << "\n";
    if (!a.out.empty())
        write_text_file(a.out, dump(json{{"system", a.system},
                                         {"rubric_store", fs::path(a.rubrics).filename().string()},
                                         {"verdicts", verdicts},
                                         {"metrics", metrics_rows_json(rows)}}));
    return kOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
    require_file(a.manifest, "manifest");
    json j;
    try {
        j = json::parse(read_text_file(a.manifest));
    } catch (const json::exception& e) {
        throw ParseError("manifest '" + a.manifest + "': " + e.what());
    }
    const harness::RunManifest m = j.get<harness::RunManifest>();
    const auto format = harness::parse_report_format(a.format);
    const std::string text = harness::render_report(m, format);
    const char* ext = format == harness::ReportFormat::Csv ? "csv" : format == harness::ReportFormat::Markdown ? "md" : "txt";
    const std::string path =
        a.out.empty() ? (fs::path(a.manifest).parent_path() / (std::string("report.") + ext)).string() : a.out;
    if (path == "-") {
        out << text;
    } else {
        write_text_file(path, text);
        out << "report -> " << path << "\n";
    }
    return kOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kConfig;
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const harness::IncompleteManifest*>(&e))
        return kParse;
    if (dynamic_cast<const GatewayError*>(&e)) return kGateway;
    return kOther;
}

}  // namespace

std::string full_help() {
    Surface s;
    return s.app.help("", CLI::AppFormatMode::All);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Surface s;
    std::vector<std::string> argv_store{"scope"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        s.app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        // The help of the innermost parsed subcommand, or everything at top level.
        for (auto* sub : {s.synthesize, s.filter, s.learn, s.evaluate, s.report})
            if (sub->parsed()) {
                out << sub->help();
                return kOk;
            }
        out << s.app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run 'scope --help' for usage\n";
        return kConfig;
    }

    spdlog::level::level_enum level = spdlog::level::from_str(s.g.log_level);
    logger()->set_level(level);

    try {
        if (s.report->parsed()) return cmd_report(s.rep, out);
        Settings settings = resolve_settings(s);
        if (!s.g.quiet) print_settings(settings, err);
        Session session(std::move(settings));
        int rc = kOk;
        if (s.synthesize->parsed()) rc = cmd_synthesize(s.syn, session, out);
        else if (s.filter->parsed()) rc = cmd_filter(s.fil, session, out);
        else if (s.learn->parsed()) rc = cmd_learn(s.lrn, session, out);
        else if (s.evaluate->parsed()) rc = cmd_evaluate(s.ev, session, out);
        session.flush();
        return rc;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace scope::cli
