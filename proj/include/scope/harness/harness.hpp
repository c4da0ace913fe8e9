#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scope/core/dataset.hpp"
#include "scope/errors.hpp"
#include "scope/llm/gateway.hpp"
#include "scope/pipeline/pipeline.hpp"
#include "scope/spur/spur.hpp"

namespace scope::harness {

enum class Stratify { Overall, None };
std::string_view to_string(Stratify s);
Stratify parse_stratify(std::string_view s);

struct SplitPlan {
    int repeats = 5;
    double train_fraction = 0.4;
    std::uint64_t seed = 0;
    Stratify stratify_by = Stratify::Overall;

    void validate() const;
    bool operator==(const SplitPlan&) const = default;
};

void to_json(json& j, const SplitPlan& p);
void from_json(const json& j, SplitPlan& p);

struct Split {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

/// floor(n * fraction + 0.5).
std::size_t train_size(std::size_t n, double fraction);

/// `repeats` independent resamples; ids keep dataset order inside each side.
std::vector<Split> make_splits(const Dataset& d, const SplitPlan& plan);

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    bool operator==(const Confusion&) const = default;
};

/// Undefined values are nullopt and render as "N/A".
struct Metrics {
    Confusion confusion;
    double accuracy = 0.0;
    std::optional<double> f1;
    std::optional<double> precision;
    std::optional<double> recall;
    bool operator==(const Metrics&) const = default;
};

void to_json(json& j, const Metrics& m);
void from_json(const json& j, Metrics& m);

/// POS is the positive class. With no POS ground truth, f1/precision/recall
/// are undefined. Precision is also undefined when nothing is predicted POS.
/// Throws ConfigError for an empty population.
Metrics metrics_from_confusion(const Confusion& c);

/// Throws MissingTruth when a verdict id has no ground truth.
Metrics compute_metrics(const std::map<std::string, Label>& verdicts, const std::map<std::string, Label>& truth);

class MissingTruth : public Error {
public:
    using Error::Error;
};

struct Ablations {
    bool exclude_ad = false;
    bool exclude_rw = false;
    bool exclude_mb = false;
    bool any() const noexcept { return exclude_ad || exclude_rw || exclude_mb; }
    bool operator==(const Ablations&) const = default;
};

void to_json(json& j, const Ablations& a);
void from_json(const json& j, Ablations& a);

enum class SystemKind { Scope, Spur };
std::string_view to_string(SystemKind s);
SystemKind parse_system(std::string_view s);

/// Verdict in the shape the harness compares against ground truth.
struct SystemVerdict {
    std::string conversation_id;
    Label label = Label::Neg;
    json detail;
};

/// Shared learn/evaluate surface of SCOPE and SPUR.
class EvaluationSystem {
public:
    virtual ~EvaluationSystem() = default;
    virtual SystemKind kind() const = 0;
    /// Returns the learned artifacts (areas, reasons, rubrics) as a document.
    virtual json learn(const std::vector<Conversation>& train, std::uint64_t seed) = 0;
    virtual std::vector<SystemVerdict> evaluate(const std::vector<Conversation>& test) = 0;
    /// Rubric store of the last learn() call.
    virtual std::string rubric_store() const = 0;
};

struct SystemSettings {
    pipeline::LearnOptions scope;
    spur::SummarizeOptions spur;
};

std::unique_ptr<EvaluationSystem> make_system(SystemKind kind, Gateway& gateway, const StageConfigs& configs,
                                              const SystemSettings& settings, const Ablations& ablations);

struct MetricsRow {
    std::string subset;  // all | easy | hard_negative
    std::string tier;    // all | gold | silver
    Metrics metrics;
};

struct RepeatRecord {
    int repeat = 0;
    bool ok = false;
    std::string error;
    std::string error_kind;  // config | parse | gateway | other
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    json learned = json::object();
    std::string rubric_store;  // path relative to the run directory, when written
    std::string rubric_store_text;  // serialized store of this repeat; not part of the manifest
    std::vector<json> verdicts;
    std::vector<MetricsRow> metrics;
};

struct Stat {
    std::optional<double> mean;
    std::optional<double> sd;  // population SD
    std::size_t n = 0;         // repeats where the value was defined
};

struct SummaryRow {
    std::string subset;
    std::string tier;
    Stat accuracy, f1, precision, recall;
};

struct RunManifest {
    std::string run_id;
    SystemKind system = SystemKind::Scope;
    SplitPlan plan;
    Ablations ablations;
    std::string dataset_name;
    std::size_t dataset_size = 0;
    std::map<std::string, std::string> config_digests;
    json stage_configs = json::object();
    std::vector<RepeatRecord> repeats;
    std::vector<SummaryRow> summary;
};

void to_json(json& j, const RunManifest& m);
/// Throws IncompleteManifest when required fields are missing.
void from_json(const json& j, RunManifest& m);

class IncompleteManifest : public Error {
public:
    using Error::Error;
};

/// Population mean/SD over defined values.
Stat summarize(const std::vector<std::optional<double>>& values);

/// Rows for subset {all, easy, hard_negative} x tier {all, gold, silver};
/// empty cells are left out.
std::vector<MetricsRow> breakdown(const std::vector<Conversation>& test, const std::map<std::string, Label>& verdicts);

struct ExperimentSettings {
    std::string run_id = "run";
    SystemKind system = SystemKind::Scope;
    SplitPlan plan;
    Ablations ablations;
    SystemSettings system_settings;
};

/// Sequential repeats; a stage error aborts only its repeat and is recorded.
RunManifest run_experiment(const Dataset& d, Gateway& gateway, const StageConfigs& configs,
                           const ExperimentSettings& settings);

enum class ReportFormat { Text, Csv, Markdown };
std::string_view to_string(ReportFormat f);
ReportFormat parse_report_format(std::string_view s);

/// Throws IncompleteManifest when there is nothing to report.
std::string render_report(const RunManifest& m, ReportFormat format);

/// Fixed two-decimal form used by reports; "N/A" for undefined.
std::string format_value(const std::optional<double>& v, int decimals = 2);

}  // namespace scope::harness
