#include "scope/harness/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "scope/core/util.hpp"

namespace scope::harness {

std::string_view to_string(Stratify s) { return s == Stratify::Overall ? "overall" : "none"; }

Stratify parse_stratify(std::string_view s) {
    if (s == "overall") return Stratify::Overall;
    if (s == "none") return Stratify::None;
    throw ConfigError("unknown stratification '" + std::string(s) + "'");
}

void SplitPlan::validate() const {
    if (repeats <= 0) throw ConfigError("split repeats must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0,1)");
}

void to_json(json& j, const SplitPlan& p) {
    j = json{{"repeats", p.repeats},
             {"train_fraction", p.train_fraction},
             {"seed", p.seed},
             {"stratify_by", to_string(p.stratify_by)}};
}

void from_json(const json& j, SplitPlan& p) {
    p.repeats = j.at("repeats").get<int>();
    p.train_fraction = j.at("train_fraction").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.stratify_by = parse_stratify(j.at("stratify_by").get<std::string>());
}

std::size_t train_size(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 0.5));
}

std::vector<Split> make_splits(const Dataset& d, const SplitPlan& plan) {
    plan.validate();
    const std::size_t n = d.size();
    const std::size_t n_train = train_size(n, plan.train_fraction);

    // Strata hold dataset indices; one stratum when not stratifying.
    std::vector<std::vector<std::size_t>> strata;
    if (plan.stratify_by == Stratify::Overall) {
        strata.resize(2);
        for (std::size_t i = 0; i < n; ++i)
            strata[d.conversations[i].labels.overall == Label::Pos ? 0 : 1].push_back(i);
    } else {
        strata.emplace_back(n);
        std::iota(strata[0].begin(), strata[0].end(), 0);
    }

    // Largest-remainder quotas; ties go to the earlier stratum.
    std::vector<std::size_t> quota(strata.size());
    std::vector<std::pair<std::size_t, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < strata.size(); ++s) {
        if (n == 0) break;
        quota[s] = n_train * strata[s].size() / n;
        rema.emplace_back(n_train * strata[s].size() % n, s);
        assigned += quota[s];
    }
    std::stable_sort(rema.begin(), rema.end(), [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n_train && k < rema.size(); ++k, ++assigned) ++quota[rema[k].second];

    std::vector<Split> out;
    for (int r = 0; r < plan.repeats; ++r) {
        const std::uint64_t repeat_seed = mix_seed(plan.seed, static_cast<std::uint64_t>(r));
        std::vector<char> in_train(n, 0);
        for (std::size_t s = 0; s < strata.size(); ++s) {
            auto idx = strata[s];
            Rng rng(mix_seed(repeat_seed, s));
            rng.shuffle(idx);
            for (std::size_t k = 0; k < quota[s]; ++k) in_train[idx[k]] = 1;
        }
        Split sp;
        for (std::size_t i = 0; i < n; ++i) (in_train[i] ? sp.train : sp.test).push_back(d.conversations[i].id);
        out.push_back(std::move(sp));
    }
    return out;
}

void to_json(json& j, const Metrics& m) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j = json{{"tp", m.confusion.tp},
             {"fp", m.confusion.fp},
             {"fn", m.confusion.fn},
             {"tn", m.confusion.tn},
             {"accuracy", m.accuracy},
             {"f1", opt(m.f1)},
             {"precision", opt(m.precision)},
             {"recall", opt(m.recall)}};
}

void from_json(const json& j, Metrics& m) {
    auto opt = [&](const char* k) -> std::optional<double> {
        if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
        return j.at(k).get<double>();
    };
    m.confusion = Confusion{j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
                            j.at("fn").get<std::size_t>(), j.at("tn").get<std::size_t>()};
    m.accuracy = j.at("accuracy").get<double>();
    m.f1 = opt("f1");
    m.precision = opt("precision");
    m.recall = opt("recall");
}

Metrics metrics_from_confusion(const Confusion& c) {
    if (c.total() == 0) throw ConfigError("metrics need at least one verdict");
    Metrics m;
    m.confusion = c;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fn > 0) {
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
        m.f1 = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
        if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    return m;
}

Metrics compute_metrics(const std::map<std::string, Label>& verdicts, const std::map<std::string, Label>& truth) {
    if (verdicts.empty()) throw ConfigError("metrics need at least one verdict");
    Confusion c;
    for (const auto& [id, predicted] : verdicts) {
        auto it = truth.find(id);
        if (it == truth.end()) throw MissingTruth("no ground truth for '" + id + "'");
        const bool p = predicted == Label::Pos;
        const bool t = it->second == Label::Pos;
        ++(p ? (t ? c.tp : c.fp) : (t ? c.fn : c.tn));
    }
    return metrics_from_confusion(c);
}

void to_json(json& j, const Ablations& a) {
    j = json{{"exclude_AD", a.exclude_ad}, {"exclude_RW", a.exclude_rw}, {"exclude_MB", a.exclude_mb}};
}

void from_json(const json& j, Ablations& a) {
    a.exclude_ad = j.at("exclude_AD").get<bool>();
    a.exclude_rw = j.at("exclude_RW").get<bool>();
    a.exclude_mb = j.at("exclude_MB").get<bool>();
}

std::string_view to_string(SystemKind s) { return s == SystemKind::Scope ? "scope" : "spur"; }

SystemKind parse_system(std::string_view s) {
    if (s == "scope") return SystemKind::Scope;
    if (s == "spur") return SystemKind::Spur;
    throw ConfigError("unknown system '" + std::string(s) + "'");
}

// ---- systems -----------------------------------------------------------------

namespace {

class ScopeSystem : public EvaluationSystem {
public:
    ScopeSystem(Gateway& gw, StageConfigs configs, pipeline::LearnOptions options)
        : gw_(gw), configs_(std::move(configs)), options_(std::move(options)) {}

    SystemKind kind() const override { return SystemKind::Scope; }

    json learn(const std::vector<Conversation>& train, std::uint64_t seed) override {
        auto opts = options_;
        opts.seed = seed;
        auto res = pipeline::learn(gw_, configs_, train, opts);
        rubrics_ = res.rubrics;
        return json{{"areas", res.areas}, {"reasons", res.reasons}, {"rubrics", res.rubrics.rubrics},
                    {"x_max", res.rubrics.x_max}};
    }

    std::vector<SystemVerdict> evaluate(const std::vector<Conversation>& test) override {
        auto verdicts = pipeline::evaluate_all(gw_, configs_.at(Stage::LabelEstimation), test, rubrics_);
        std::vector<SystemVerdict> out;
        for (auto& v : verdicts) out.push_back(SystemVerdict{v.conversation_id, v.label, json(v)});
        return out;
    }

    std::string rubric_store() const override { return pipeline::serialize_rubric_store(rubrics_); }

    void set_provenance(const std::string& p) { options_.rubrics.provenance = p; }

private:
    Gateway& gw_;
    StageConfigs configs_;
    pipeline::LearnOptions options_;
    pipeline::RubricSet rubrics_;
};

class SpurSystem : public EvaluationSystem {
public:
    SpurSystem(Gateway& gw, StageConfigs configs, spur::SummarizeOptions options)
        : gw_(gw), configs_(std::move(configs)), options_(std::move(options)) {}

    SystemKind kind() const override { return SystemKind::Spur; }

    json learn(const std::vector<Conversation>& train, std::uint64_t) override {
        auto res = spur::learn(gw_, configs_, train, options_);
        rubrics_ = res.rubrics;
        return json{{"reasons", res.reasons}, {"rubrics", res.rubrics.rubrics}};
    }

    std::vector<SystemVerdict> evaluate(const std::vector<Conversation>& test) override {
        auto verdicts = spur::spur_estimate_all(gw_, configs_.at(Stage::SpurEstimation), test, rubrics_);
        std::vector<SystemVerdict> out;
        for (auto& v : verdicts) out.push_back(SystemVerdict{v.conversation_id, spur::to_label(v.label), json(v)});
        return out;
    }

    std::string rubric_store() const override { return spur::serialize_rubric_store(rubrics_); }

private:
    Gateway& gw_;
    StageConfigs configs_;
    spur::SummarizeOptions options_;
    spur::SpurRubricSet rubrics_;
};

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const ParseError*>(&e)) return "parse";
    if (dynamic_cast<const GatewayError*>(&e)) return "gateway";
    return "other";
}

const std::vector<std::string> kSubsets = {"all", "easy", "hard_negative"};
const std::vector<std::string> kTiers = {"all", "gold", "silver"};

}  // namespace

std::unique_ptr<EvaluationSystem> make_system(SystemKind kind, Gateway& gateway, const StageConfigs& configs,
                                              const SystemSettings& settings, const Ablations& ablations) {
    if (kind == SystemKind::Spur) {
        if (ablations.any()) throw ConfigError("ablations apply to the scope system only");
        return std::make_unique<SpurSystem>(gateway, configs, settings.spur);
    }
    auto opts = settings.scope;
    opts.exclude_ad = ablations.exclude_ad;
    opts.rubrics.exclude_rw = ablations.exclude_rw;
    opts.rubrics.exclude_mb = ablations.exclude_mb;
    return std::make_unique<ScopeSystem>(gateway, configs, opts);
}

// ---- experiment ----------------------------------------------------------------

Stat summarize(const std::vector<std::optional<double>>& values) {
    Stat s;
    double sum = 0.0;
    for (const auto& v : values)
        if (v) {
            sum += *v;
            ++s.n;
        }
    if (s.n == 0) return s;
    const double mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (const auto& v : values)
        if (v) ss += (*v - mean) * (*v - mean);
    s.mean = mean;
    s.sd = std::sqrt(ss / static_cast<double>(s.n));
    return s;
}

std::vector<MetricsRow> breakdown(const std::vector<Conversation>& test, const std::map<std::string, Label>& verdicts) {
    std::vector<MetricsRow> rows;
    for (const auto& subset : kSubsets) {
        for (const auto& tier : kTiers) {
            Confusion c;
            for (const auto& conv : test) {
                if (subset == "easy" && classify_subset(conv) != Subset::Easy) continue;
                if (subset == "hard_negative" && classify_subset(conv) != Subset::HardNegative) continue;
                if (tier != "all" && to_string(conv.tier) != tier) continue;
                auto it = verdicts.find(conv.id);
                if (it == verdicts.end()) throw MissingTruth("no verdict for '" + conv.id + "'");
                const bool p = it->second == Label::Pos;
                const bool t = conv.labels.overall == Label::Pos;
                ++(p ? (t ? c.tp : c.fp) : (t ? c.fn : c.tn));
            }
            if (c.total() == 0) continue;
            rows.push_back(MetricsRow{subset, tier, metrics_from_confusion(c)});
        }
    }
    return rows;
}

RunManifest run_experiment(const Dataset& d, Gateway& gateway, const StageConfigs& configs,
                           const ExperimentSettings& settings) {
    settings.plan.validate();
    if (d.conversations.empty()) throw ConfigError("dataset '" + d.name + "' is empty");

    RunManifest m;
    m.run_id = settings.run_id;
    m.system = settings.system;
    m.plan = settings.plan;
    m.ablations = settings.ablations;
    m.dataset_name = d.name;
    m.dataset_size = d.size();
    m.stage_configs = configs;
    m.config_digests["stages"] = sha256_hex(m.stage_configs.dump());
    m.config_digests["dataset"] = sha256_hex(serialize_dataset(d));
    m.config_digests["provider"] = sha256_hex(gateway.provider().describe());

    auto system = make_system(settings.system, gateway, configs, settings.system_settings, settings.ablations);
    std::map<std::string, const Conversation*> by_id;
    for (const auto& c : d.conversations) by_id[c.id] = &c;

    const auto splits = make_splits(d, settings.plan);
    for (int r = 0; r < settings.plan.repeats; ++r) {
        RepeatRecord rec;
        rec.repeat = r;
        rec.train_ids = splits[r].train;
        rec.test_ids = splits[r].test;
        std::vector<Conversation> train, test;
        for (const auto& id : rec.train_ids) train.push_back(*by_id.at(id));
        for (const auto& id : rec.test_ids) test.push_back(*by_id.at(id));
        try {
            if (auto* s = dynamic_cast<ScopeSystem*>(system.get()))
                s->set_provenance(settings.run_id + "/repeat-" + std::to_string(r));
            rec.learned = system->learn(train, mix_seed(settings.plan.seed, 1000 + static_cast<std::uint64_t>(r)));
            rec.rubric_store_text = system->rubric_store();
            const auto verdicts = system->evaluate(test);
            std::map<std::string, Label> labels;
            for (const auto& v : verdicts) {
                labels[v.conversation_id] = v.label;
                json j = v.detail;
                j["conversation_id"] = v.conversation_id;
                j["predicted"] = to_string(v.label);
                j["truth"] = to_string(by_id.at(v.conversation_id)->labels.overall);
                rec.verdicts.push_back(std::move(j));
            }
            rec.metrics = breakdown(test, labels);
            rec.ok = true;
        } catch (const Error& e) {
            logger()->error("repeat {} aborted: {}", r, e.what());
            rec.ok = false;
            rec.error = e.what();
            rec.error_kind = error_kind(e);
            rec.verdicts.clear();
            rec.metrics.clear();
        }
        m.repeats.push_back(std::move(rec));
    }

    for (const auto& subset : kSubsets) {
        for (const auto& tier : kTiers) {
            std::vector<std::optional<double>> acc, f1, pre, rec;
            for (const auto& rr : m.repeats) {
                for (const auto& row : rr.metrics) {
                    if (row.subset != subset || row.tier != tier) continue;
                    acc.emplace_back(row.metrics.accuracy);
                    f1.push_back(row.metrics.f1);
                    pre.push_back(row.metrics.precision);
                    rec.push_back(row.metrics.recall);
                }
            }
            if (acc.empty()) continue;
            m.summary.push_back(SummaryRow{subset, tier, summarize(acc), summarize(f1), summarize(pre), summarize(rec)});
        }
    }
    return m;
}

// ---- manifest json -------------------------------------------------------------

namespace {

json stat_json(const Stat& s) {
    return json{{"mean", s.mean ? json(*s.mean) : json(nullptr)}, {"sd", s.sd ? json(*s.sd) : json(nullptr)}, {"n", s.n}};
}

Stat stat_from(const json& j) {
    Stat s;
    if (!j.at("mean").is_null()) s.mean = j.at("mean").get<double>();
    if (!j.at("sd").is_null()) s.sd = j.at("sd").get<double>();
    s.n = j.at("n").get<std::size_t>();
    return s;
}

}  // namespace

void to_json(json& j, const RunManifest& m) {
    json repeats = json::array();
    for (const auto& r : m.repeats) {
        json rows = json::array();
        for (const auto& row : r.metrics) {
            json x = row.metrics;
            x["subset"] = row.subset;
            x["tier"] = row.tier;
            x["n"] = row.metrics.confusion.total();
            rows.push_back(std::move(x));
        }
        json rj{{"repeat", r.repeat},
                {"status", r.ok ? "ok" : "aborted"},
                {"train_ids", r.train_ids},
                {"test_ids", r.test_ids},
                {"learned", r.learned},
                {"verdicts", r.verdicts},
                {"metrics", rows}};
        if (!r.ok) {
            rj["error"] = r.error;
            rj["error_kind"] = r.error_kind;
        }
        if (!r.rubric_store.empty()) rj["rubric_store"] = r.rubric_store;
        repeats.push_back(std::move(rj));
    }
    json summary = json::array();
    for (const auto& s : m.summary)
        summary.push_back(json{{"subset", s.subset},
                               {"tier", s.tier},
                               {"accuracy", stat_json(s.accuracy)},
                               {"f1", stat_json(s.f1)},
                               {"precision", stat_json(s.precision)},
                               {"recall", stat_json(s.recall)}});
    j = json{{"run_id", m.run_id},
             {"system", to_string(m.system)},
             {"split_plan", m.plan},
             {"ablations", m.ablations},
             {"dataset", {{"name", m.dataset_name}, {"size", m.dataset_size}}},
             {"config_digests", m.config_digests},
             {"stage_configs", m.stage_configs},
             {"repeats", repeats},
             {"summary", summary}};
}

void from_json(const json& j, RunManifest& m) {
    try {
        m.run_id = j.at("run_id").get<std::string>();
        m.system = parse_system(j.at("system").get<std::string>());
        m.plan = j.at("split_plan").get<SplitPlan>();
        m.ablations = j.at("ablations").get<Ablations>();
        m.dataset_name = j.at("dataset").at("name").get<std::string>();
        m.dataset_size = j.at("dataset").at("size").get<std::size_t>();
        m.config_digests = j.at("config_digests").get<std::map<std::string, std::string>>();
        m.stage_configs = j.value("stage_configs", json::object());
        m.repeats.clear();
        for (const auto& rj : j.at("repeats")) {
            RepeatRecord r;
            r.repeat = rj.at("repeat").get<int>();
            r.ok = rj.at("status").get<std::string>() == "ok";
            r.error = rj.value("error", std::string{});
            r.error_kind = rj.value("error_kind", std::string{});
            r.train_ids = rj.at("train_ids").get<std::vector<std::string>>();
            r.test_ids = rj.at("test_ids").get<std::vector<std::string>>();
            r.learned = rj.at("learned");
            r.rubric_store = rj.value("rubric_store", std::string{});
            r.verdicts = rj.at("verdicts").get<std::vector<json>>();
            for (const auto& x : rj.at("metrics"))
                r.metrics.push_back(MetricsRow{x.at("subset").get<std::string>(), x.at("tier").get<std::string>(),
                                               x.get<Metrics>()});
            m.repeats.push_back(std::move(r));
        }
        m.summary.clear();
        for (const auto& s : j.at("summary"))
            m.summary.push_back(SummaryRow{s.at("subset").get<std::string>(), s.at("tier").get<std::string>(),
                                           stat_from(s.at("accuracy")), stat_from(s.at("f1")),
                                           stat_from(s.at("precision")), stat_from(s.at("recall"))});
    } catch (const json::exception& e) {
        throw IncompleteManifest(std::string("manifest: ") + e.what());
    } catch (const ParseError& e) {
        throw IncompleteManifest(std::string("manifest: ") + e.what());
    } catch (const ConfigError& e) {
        throw IncompleteManifest(std::string("manifest: ") + e.what());
    }
}

// ---- reports -------------------------------------------------------------------

std::string_view to_string(ReportFormat f) {
    switch (f) {
        case ReportFormat::Text: return "text";
        case ReportFormat::Csv: return "csv";
        case ReportFormat::Markdown: return "markdown";
    }
    return "text";
}

ReportFormat parse_report_format(std::string_view s) {
    if (s == "text") return ReportFormat::Text;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    throw ConfigError("unknown report format '" + std::string(s) + "'");
}

std::string format_value(const std::optional<double>& v, int decimals) {
    if (!v) return "N/A";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
    return buf;
}

namespace {

std::string cell(const Stat& s) {
    if (!s.mean) return "N/A";
    return format_value(s.mean) + " (" + format_value(s.sd) + ")";
}

std::string subset_title(const std::string& s) {
    if (s == "easy") return "Easy";
    if (s == "hard_negative") return "Hard Neg.";
    return "Overall";
}

std::string tier_title(const std::string& t) {
    if (t == "gold") return "Gold";
    if (t == "silver") return "Silver";
    return "All tiers";
}

std::string system_title(SystemKind s) { return s == SystemKind::Scope ? "SCOPE" : "SPUR"; }

std::size_t completed(const RunManifest& m) {
    return static_cast<std::size_t>(std::count_if(m.repeats.begin(), m.repeats.end(), [](const auto& r) { return r.ok; }));
}

std::vector<const SummaryRow*> rows_for(const RunManifest& m, const std::string& tier) {
    // Table order: Easy, Hard Neg., Overall.
    std::vector<const SummaryRow*> out;
    for (const char* subset : {"easy", "hard_negative", "all"})
        for (const auto& s : m.summary)
            if (s.tier == tier && s.subset == subset) out.push_back(&s);
    return out;
}

std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

std::string render_markdown(const RunManifest& m) {
    std::ostringstream o;
    o << "# Run " << m.run_id << "\n\n";
    o << "- System: " << system_title(m.system) << "\n";
    o << "- Dataset: " << m.dataset_name << " (" << m.dataset_size << " conversations)\n";
    o << "- Split: " << m.plan.repeats << " repeats, train fraction " << format_value(m.plan.train_fraction)
      << ", stratified by " << to_string(m.plan.stratify_by) << ", seed " << m.plan.seed << "\n";
    o << "- Completed repeats: " << completed(m) << "/" << m.repeats.size() << "\n";
    for (const char* tier : {"all", "gold", "silver"}) {
        auto rows = rows_for(m, tier);
        if (rows.empty()) continue;
        o << "\n## " << tier_title(tier) << "\n\n";
        o << "| Subset | Acc. | F1 | Pre. | Rec. |\n|---|---|---|---|---|\n";
        for (const auto* r : rows)
            o << "| " << subset_title(r->subset) << " | " << cell(r->accuracy) << " | " << cell(r->f1) << " | "
              << cell(r->precision) << " | " << cell(r->recall) << " |\n";
    }
    if (m.ablations.any()) {
        o << "\n## Ablations\n\n";
        o << "- exclude_AD: " << (m.ablations.exclude_ad ? "on" : "off") << "\n";
        o << "- exclude_RW: " << (m.ablations.exclude_rw ? "on" : "off") << "\n";
        o << "- exclude_MB: " << (m.ablations.exclude_mb ? "on" : "off") << "\n";
    }
    bool header = false;
    for (const auto& r : m.repeats) {
        if (r.ok) continue;
        if (!header) o << "\n## Aborted repeats\n\n";
        header = true;
        o << "- repeat " << r.repeat << " (" << r.error_kind << "): " << r.error << "\n";
    }
    return o.str();
}

std::string render_text(const RunManifest& m) {
    std::ostringstream o;
    o << "run " << m.run_id << ": " << system_title(m.system) << " on " << m.dataset_name << " (" << m.dataset_size
      << " conversations), " << completed(m) << "/" << m.repeats.size() << " repeats completed\n";
    for (const char* tier : {"all", "gold", "silver"}) {
        auto rows = rows_for(m, tier);
        if (rows.empty()) continue;
        o << "\n" << tier_title(tier) << "\n";
        o << pad("subset", 11) << pad("acc", 14) << pad("f1", 14) << pad("precision", 14) << "recall\n";
        for (const auto* r : rows)
            o << pad(subset_title(r->subset), 11) << pad(cell(r->accuracy), 14) << pad(cell(r->f1), 14)
              << pad(cell(r->precision), 14) << cell(r->recall) << "\n";
    }
    if (m.ablations.any())
        o << "\nablations: exclude_AD=" << m.ablations.exclude_ad << " exclude_RW=" << m.ablations.exclude_rw
          << " exclude_MB=" << m.ablations.exclude_mb << "\n";
    for (const auto& r : m.repeats)
        if (!r.ok) o << "repeat " << r.repeat << " aborted (" << r.error_kind << "): " << r.error << "\n";
    return o.str();
}

std::string render_csv(const RunManifest& m) {
    std::ostringstream o;
    o << "repeat,subset,tier,n,tp,fp,fn,tn,accuracy,f1,precision,recall\n";
    for (const auto& r : m.repeats) {
        for (const auto& row : r.metrics) {
            const auto& c = row.metrics.confusion;
            o << r.repeat << ',' << row.subset << ',' << row.tier << ',' << c.total() << ',' << c.tp << ',' << c.fp
              << ',' << c.fn << ',' << c.tn << ',' << format_value(row.metrics.accuracy, 6) << ','
              << format_value(row.metrics.f1, 6) << ',' << format_value(row.metrics.precision, 6) << ','
              << format_value(row.metrics.recall, 6) << "\n";
        }
    }
    return o.str();
}

}  // namespace

std::string render_report(const RunManifest& m, ReportFormat format) {
    if (m.repeats.empty()) throw IncompleteManifest("manifest '" + m.run_id + "' has no repeats");
    for (const auto& r : m.repeats)
        if (r.ok && r.metrics.empty()) throw IncompleteManifest("repeat " + std::to_string(r.repeat) + " has no metrics");
    switch (format) {
        case ReportFormat::Text: return render_text(m);
        case ReportFormat::Csv: return render_csv(m);
        case ReportFormat::Markdown: return render_markdown(m);
    }
    return {};
}

}  // namespace scope::harness
