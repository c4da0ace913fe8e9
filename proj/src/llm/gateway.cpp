#include "scope/llm/gateway.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <thread>

#include "scope/core/dataset.hpp"
#include "scope/core/util.hpp"
#include "scope/errors.hpp"

namespace scope {

void GenerationConfig::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw ConfigError("temperature must lie in [0, 2], got " + std::to_string(temperature));
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must lie in (0, 1], got " + std::to_string(top_p));
    if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
    if (model_id.empty()) throw ConfigError("model_id must be nonempty");
}

void to_json(json& j, const GenerationConfig& c) {
    j = json{{"temperature", c.temperature}, {"top_p", c.top_p}, {"max_tokens", c.max_tokens}, {"model_id", c.model_id}};
}

void from_json(const json& j, GenerationConfig& c) {
    c.temperature = j.value("temperature", c.temperature);
    c.top_p = j.value("top_p", c.top_p);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.model_id = j.value("model_id", c.model_id);
}

namespace {

constexpr std::array<std::pair<Stage, std::string_view>, 12> kStages{{
    {Stage::NameGeneration, "name_generation"},
    {Stage::ConversationGeneration, "conversation_generation"},
    {Stage::JudgeFilter, "judge_filter"},
    {Stage::AreaDiscovery, "area_discovery"},
    {Stage::ReasonExtraction, "reason_extraction"},
    {Stage::RubricSummarization, "rubric_summarization"},
    {Stage::RubricDedup, "rubric_dedup"},
    {Stage::RubricWeighting, "rubric_weighting"},
    {Stage::LabelEstimation, "label_estimation"},
    {Stage::SpurExtraction, "spur_extraction"},
    {Stage::SpurSummarization, "spur_summarization"},
    {Stage::SpurEstimation, "spur_estimation"},
}};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of the `{name}` token at pos, or 0.
std::size_t placeholder_at(std::string_view body, std::size_t pos) {
    if (body[pos] != '{' || pos + 1 >= body.size() || !ident_start(body[pos + 1])) return 0;
    std::size_t end = pos + 2;
    while (end < body.size() && ident_char(body[end])) ++end;
    if (end >= body.size() || body[end] != '}') return 0;
    return end + 1 - pos;
}

}  // namespace

std::string_view to_string(Stage s) {
    for (const auto& [st, name] : kStages)
        if (st == s) return name;
    return "?";
}

Stage parse_stage(std::string_view s) {
    for (const auto& [st, name] : kStages)
        if (name == s) return st;
    throw ConfigError("unknown stage '" + std::string(s) + "'");
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages = [] {
        std::vector<Stage> v;
        for (const auto& [st, name] : kStages) v.push_back(st);
        return v;
    }();
    return stages;
}

StageConfigs StageConfigs::defaults(const std::string& model_id) {
    StageConfigs out;
    for (Stage s : all_stages()) out.configs_[s] = GenerationConfig{0.0, 0.99, 2048, model_id};
    for (Stage s : {Stage::AreaDiscovery, Stage::ReasonExtraction, Stage::SpurExtraction, Stage::NameGeneration})
        out.configs_[s].temperature = 0.7;
    out.configs_[Stage::ConversationGeneration] = GenerationConfig{1.0, 0.99, 4096, model_id};
    out.configs_[Stage::JudgeFilter].max_tokens = 4096;
    out.configs_[Stage::NameGeneration].max_tokens = 256;
    out.configs_[Stage::RubricWeighting].max_tokens = 1024;
    out.configs_[Stage::LabelEstimation].max_tokens = 1024;
    out.configs_[Stage::SpurEstimation].max_tokens = 1024;
    return out;
}

const GenerationConfig& StageConfigs::at(Stage s) const { return configs_.at(s); }
GenerationConfig& StageConfigs::at(Stage s) { return configs_.at(s); }

void StageConfigs::set_model(const std::string& model_id) {
    for (auto& [s, c] : configs_) c.model_id = model_id;
}

void to_json(json& j, const StageConfigs& c) {
    j = json::object();
    for (Stage s : all_stages()) j[std::string(to_string(s))] = c.at(s);
}

PromptTemplate PromptTemplate::make(std::string id, std::string body) {
    auto names = placeholders_in(body);
    return PromptTemplate{std::move(id), std::move(body), std::move(names)};
}

std::set<std::string> placeholders_in(std::string_view body) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (std::size_t len = placeholder_at(body, i)) {
            out.emplace(body.substr(i + 1, len - 2));
            i += len - 1;
        }
    }
    return out;
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
    for (const auto& name : tmpl.required_placeholders)
        if (!bindings.contains(name))
            throw ConfigError("missing placeholder '" + name + "' for template '" + tmpl.id + "'");
    std::string out;
    out.reserve(tmpl.body.size());
    const std::string_view body = tmpl.body;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (std::size_t len = placeholder_at(body, i)) {
            const std::string name(body.substr(i + 1, len - 2));
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw ConfigError("missing placeholder '" + name + "' for template '" + tmpl.id + "'");
            out += it->second;
            i += len - 1;
        } else {
            out += body[i];
        }
    }
    return out;
}

std::string LlmRequest::binding_digest() const { return sha256_hex(json(bindings).dump()).substr(0, 32); }

std::string LlmRequest::fingerprint() const { return template_id + ":" + binding_digest(); }

LlmRequest make_request(const PromptTemplate& tmpl, Bindings bindings, const GenerationConfig& config) {
    std::string prompt = render(tmpl, bindings);
    return LlmRequest{tmpl.id, std::move(bindings), std::move(prompt), config};
}

void ScriptedMock::add(const std::string& fingerprint, std::string completion) {
    script_[fingerprint] = std::move(completion);
}

std::string ScriptedMock::complete(const LlmRequest& request) {
    const std::string fp = request.fingerprint();
    if (auto it = script_.find(fp); it != script_.end()) return it->second;
    if (policy_ == MissPolicy::Echo) return request.prompt;
    throw MockMiss(fp);
}

std::string ScriptedMock::describe() const {
    return "scripted-mock:" + sha256_hex(serialize()).substr(0, 16);
}

std::string ScriptedMock::serialize() const {
    json j{{"default_policy", policy_ == MissPolicy::Echo ? "echo" : "error"}, {"entries", script_}};
    return j.dump(1) + "\n";
}

ScriptedMock ScriptedMock::load(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError("mock script '" + path + "': " + e.what());
    }
    const std::string policy = j.value("default_policy", "error");
    if (policy != "error" && policy != "echo") throw ParseError("mock script: bad default_policy '" + policy + "'");
    std::map<std::string, std::string> script;
    if (j.contains("entries")) script = j.at("entries").get<std::map<std::string, std::string>>();
    return ScriptedMock(std::move(script), policy == "echo" ? MissPolicy::Echo : MissPolicy::Error);
}

void ScriptedMock::save(const std::string& path) const { write_text_file(path, serialize()); }

RemoteSettings RemoteSettings::from_env() {
    RemoteSettings s;
    if (const char* v = std::getenv("SCOPE_PROVIDER_URL")) s.url = v;
    if (const char* v = std::getenv("SCOPE_PROVIDER_KEY")) s.api_key = v;
    if (const char* v = std::getenv("SCOPE_MODEL_ID")) s.model_id = v;
    return s;
}

void to_json(json& j, const RequestLogEntry& e) {
    j = json{{"seq", e.seq},
             {"template_id", e.template_id},
             {"binding_digest", e.binding_digest},
             {"fingerprint", e.fingerprint},
             {"config", e.config},
             {"ok", e.ok}};
    if (e.ok) j["completion"] = e.completion;
    else j["error"] = e.error;
}

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayOptions options)
    : provider_(std::move(provider)),
      options_(std::move(options)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_in_flight, 1, 1024))) {
    if (!provider_) throw ConfigError("gateway needs a provider");
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
    if (options_.retry.attempts < 1) throw ConfigError("retry attempts must be >= 1");
    if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string Gateway::complete(const LlmRequest& request) {
    request.config.validate();
    std::size_t slot;
    {
        std::lock_guard lock(mu_);
        slot = log_.size();
        log_.push_back(RequestLogEntry{slot, request.template_id, request.binding_digest(), request.fingerprint(),
                                       request.config, false, {}, "pending"});
    }
    auto finish = [&](bool ok, std::string text) {
        std::lock_guard lock(mu_);
        auto& e = log_[slot];
        e.ok = ok;
        (ok ? e.completion : e.error) = std::move(text);
        if (ok) e.error.clear();
    };

    slots_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{slots_};

    auto backoff = options_.retry.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= options_.retry.attempts; ++attempt) {
        try {
            std::string out = provider_->complete(request);
            finish(true, out);
            return out;
        } catch (const TransportError& e) {
            last_error = e.what();
            logger()->warn("transport failure on {} (attempt {}/{}): {}", request.template_id, attempt,
                           options_.retry.attempts, e.what());
            if (attempt < options_.retry.attempts) {
                options_.sleep(backoff);
                backoff = std::chrono::milliseconds(
                    static_cast<long long>(std::llround(backoff.count() * options_.retry.multiplier)));
            }
        } catch (const std::exception& e) {
            finish(false, e.what());
            throw;
        }
    }
    const std::string msg = "transport failed after " + std::to_string(options_.retry.attempts) +
                            " attempts: " + last_error;
    finish(false, msg);
    throw TransportExhausted(msg);
}

std::string Gateway::complete(const PromptTemplate& tmpl, Bindings bindings, const GenerationConfig& config) {
    return complete(make_request(tmpl, std::move(bindings), config));
}

std::string Gateway::complete(const std::string& prompt, const GenerationConfig& config) {
    return complete(LlmRequest{"raw", Bindings{{"prompt", prompt}}, prompt, config});
}

std::vector<std::string> Gateway::complete_many(const std::vector<LlmRequest>& requests) {
    return parallel_map<std::string>(requests.size(), options_.max_in_flight,
                                     [&](std::size_t i) { return complete(requests[i]); });
}

std::vector<RequestLogEntry> Gateway::log() const {
    std::lock_guard lock(mu_);
    return log_;
}

void Gateway::write_log(const std::string& path) const {
    std::vector<json> records;
    for (const auto& e : log()) records.emplace_back(e);
    write_jsonl(path, records);
}

ScriptedMock Gateway::recorded_script(MissPolicy policy) const {
    ScriptedMock mock(policy);
    for (const auto& e : log())
        if (e.ok) mock.add(e.fingerprint, e.completion);
    return mock;
}

}  // namespace scope
