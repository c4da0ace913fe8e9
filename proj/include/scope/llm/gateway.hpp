#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scope/core/model.hpp"

namespace scope {

using Bindings = std::map<std::string, std::string>;

struct GenerationConfig {
    double temperature = 0.0;
    double top_p = 0.99;
    int max_tokens = 1024;
    std::string model_id = "mock";

    /// Throws ConfigError when a field is out of range.
    void validate() const;

    bool operator==(const GenerationConfig&) const = default;
};

void to_json(json& j, const GenerationConfig& c);
void from_json(const json& j, GenerationConfig& c);

/// Every model-backed step of the toolchain. Each gets its own config.
enum class Stage {
    NameGeneration,
    ConversationGeneration,
    JudgeFilter,
    AreaDiscovery,
    ReasonExtraction,
    RubricSummarization,
    RubricDedup,
    RubricWeighting,
    LabelEstimation,
    SpurExtraction,
    SpurSummarization,
    SpurEstimation,
};

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);
const std::vector<Stage>& all_stages();

/// Per-stage generation settings. Creative stages sample at 0.7 (conversation
/// generation at 1.0 with top_p 0.99); decision stages run at 0.0.
class StageConfigs {
public:
    static StageConfigs defaults(const std::string& model_id = "mock");

    const GenerationConfig& at(Stage s) const;
    GenerationConfig& at(Stage s);
    void set_model(const std::string& model_id);

    bool operator==(const StageConfigs&) const = default;

private:
    std::map<Stage, GenerationConfig> configs_;
};

void to_json(json& j, const StageConfigs& c);

struct PromptTemplate {
    std::string id;
    std::string body;
    std::set<std::string> required_placeholders;

    /// Derives the placeholder set from the body.
    static PromptTemplate make(std::string id, std::string body);
};

/// `{name}` tokens (name = [A-Za-z_][A-Za-z0-9_]*) found in a template body.
/// Any other brace is literal text.
std::set<std::string> placeholders_in(std::string_view body);

/// Single-pass substitution: bound values are inserted verbatim, never
/// re-expanded. Throws ConfigError naming the first missing placeholder.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

struct LlmRequest {
    std::string template_id;
    Bindings bindings;
    std::string prompt;
    GenerationConfig config;

    std::string binding_digest() const;
    /// template id + binding digest; the key of scripted completions.
    std::string fingerprint() const;
};

LlmRequest make_request(const PromptTemplate& tmpl, Bindings bindings, const GenerationConfig& config);

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string complete(const LlmRequest& request) = 0;
    virtual std::string describe() const = 0;
};

enum class MissPolicy { Error, Echo };

/// Fingerprint -> canned completion. Deterministic by construction.
class ScriptedMock : public Provider {
public:
    explicit ScriptedMock(MissPolicy policy = MissPolicy::Error) : policy_(policy) {}
    ScriptedMock(std::map<std::string, std::string> script, MissPolicy policy)
        : script_(std::move(script)), policy_(policy) {}

    void add(const std::string& fingerprint, std::string completion);
    std::string complete(const LlmRequest& request) override;
    std::string describe() const override;

    const std::map<std::string, std::string>& script() const noexcept { return script_; }
    MissPolicy policy() const noexcept { return policy_; }

    static ScriptedMock load(const std::string& path);
    void save(const std::string& path) const;
    std::string serialize() const;

private:
    std::map<std::string, std::string> script_;
    MissPolicy policy_;
};

struct RemoteSettings {
    std::string url;
    std::string api_key;
    std::string model_id;
    std::chrono::seconds timeout{120};

    /// Reads SCOPE_PROVIDER_URL, SCOPE_PROVIDER_KEY and SCOPE_MODEL_ID.
    static RemoteSettings from_env();
};

/// Chat-completion style HTTP endpoint (OpenAI wire format).
/// Connection failures, timeouts, 408/429/5xx raise TransportError;
/// other non-2xx statuses raise ProviderRejected.
class RemoteProvider : public Provider {
public:
    explicit RemoteProvider(RemoteSettings settings);
    std::string complete(const LlmRequest& request) override;
    std::string describe() const override;

    static json request_body(const LlmRequest& request, const std::string& model_id);
    static std::string parse_response(const std::string& body);

private:
    RemoteSettings settings_;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
};

struct RequestLogEntry {
    std::size_t seq = 0;
    std::string template_id;
    std::string binding_digest;
    std::string fingerprint;
    GenerationConfig config;
    bool ok = false;
    std::string completion;
    std::string error;
};

void to_json(json& j, const RequestLogEntry& e);

struct GatewayOptions {
    RetryPolicy retry;
    std::size_t max_in_flight = 4;
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

/// Bounded, logged, retrying front for a Provider. Thread-safe.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<Provider> provider, GatewayOptions options = {});

    std::string complete(const LlmRequest& request);
    std::string complete(const PromptTemplate& tmpl, Bindings bindings, const GenerationConfig& config);
    /// Raw prompt without a template ("raw" template id).
    std::string complete(const std::string& prompt, const GenerationConfig& config);

    /// Results in request order regardless of completion order.
    std::vector<std::string> complete_many(const std::vector<LlmRequest>& requests);

    std::size_t max_in_flight() const noexcept { return options_.max_in_flight; }
    const Provider& provider() const noexcept { return *provider_; }

    std::vector<RequestLogEntry> log() const;
    void write_log(const std::string& path) const;
    /// Successful completions keyed by fingerprint, for record/replay.
    ScriptedMock recorded_script(MissPolicy policy = MissPolicy::Error) const;

private:
    std::shared_ptr<Provider> provider_;
    GatewayOptions options_;
    std::counting_semaphore<1024> slots_;
    mutable std::mutex mu_;
    std::vector<RequestLogEntry> log_;
};

}  // namespace scope
