// Python bindings. Records cross the boundary as plain dicts and lists
// (through JSON text), the Gateway as an opaque handle.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "scope/cli/cli.hpp"
#include "scope/core/dataset.hpp"
#include "scope/core/situations.hpp"
#include "scope/core/tools.hpp"
#include "scope/errors.hpp"
#include "scope/harness/harness.hpp"
#include "scope/judge/judge.hpp"
#include "scope/llm/gateway.hpp"
#include "scope/pipeline/pipeline.hpp"
#include "scope/sim/sim.hpp"
#include "scope/spur/spur.hpp"

namespace py = pybind11;
using namespace scope;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& o) {
    return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

template <class T>
T from_py_as(const py::handle& o) {
    return from_py(o).get<T>();
}

struct PyGateway {
    std::shared_ptr<Gateway> gateway;
    StageConfigs stages;
    std::string kind;
};

PyGateway make_gateway(const std::string& provider, const std::optional<std::string>& mock_script,
                       std::size_t max_in_flight, const std::string& model) {
    GatewayOptions opts;
    opts.max_in_flight = max_in_flight;
    std::shared_ptr<Provider> p;
    if (mock_script) {
        p = std::make_shared<ScriptedMock>(ScriptedMock::load(*mock_script));
    } else if (provider == "sim") {
        p = std::make_shared<sim::SimulatedProvider>();
    } else if (provider == "remote") {
        auto s = RemoteSettings::from_env();
        if (!model.empty()) s.model_id = model;
        p = std::make_shared<RemoteProvider>(s);
    } else {
        throw ConfigError("unknown provider '" + provider + "'");
    }
    const std::string id = !model.empty() ? model : provider == "sim" ? "sim-1" : "mock";
    return PyGateway{std::make_shared<Gateway>(p, opts), StageConfigs::defaults(id), p->describe()};
}

std::vector<Conversation> conversations(const py::handle& items) {
    std::vector<Conversation> out;
    for (const auto& item : items) out.push_back(from_py_as<Conversation>(item));
    return out;
}

harness::Ablations ablations(bool ad, bool rw, bool mb) { return harness::Ablations{ad, rw, mb}; }

}  // namespace

PYBIND11_MODULE(_scope, m) {
    m.doc() = "Rubric-based evaluation of tool-using conversational agents";

    static py::exception<Error> base(m, "ScopeError");
    static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
    static py::exception<ParseError> parse_error(m, "ParseError", base.ptr());
    static py::exception<GatewayError> gateway_error(m, "GatewayError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const ParseError& e) {
            parse_error(e.what());
        } catch (const ValidationError& e) {
            parse_error(e.what());
        } catch (const GatewayError& e) {
            gateway_error(e.what());
        } catch (const Error& e) {
            base(e.what());
        }
    });

    py::class_<PyGateway>(m, "Gateway")
        .def(py::init(&make_gateway), py::arg("provider") = "sim", py::arg("mock_script") = std::nullopt,
             py::arg("max_in_flight") = 4, py::arg("model") = "",
             "provider: 'sim' or 'remote' (SCOPE_PROVIDER_URL / SCOPE_PROVIDER_KEY). "
             "A mock_script replays recorded completions instead.")
        .def_property_readonly("provider", [](const PyGateway& g) { return g.kind; })
        .def("save_script", [](const PyGateway& g, const std::string& path) { g.gateway->recorded_script().save(path); },
             "Writes every successful completion so far as a mock script.")
        .def("request_count", [](const PyGateway& g) { return g.gateway->log().size(); });

    m.def("situations", [] { return to_py(json(situation_catalog())); });
    m.def("tools", [] {
        const auto catalog = ToolCatalog::builtin();
        return to_py(json(catalog.tools()));
    });
    m.def("load_dataset", [](const std::string& path, bool released) {
        return to_py(json(load_dataset(path, released).conversations));
    }, py::arg("path"), py::arg("released") = false);
    m.def("classify_subset", [](const py::dict& c) {
        return std::string(to_string(classify_subset(from_py_as<Conversation>(c))));
    });

    m.def("aggregate", [](const py::list& rubrics, const py::list& scores, int x_max) {
        pipeline::RubricSet rs;
        rs.x_max = x_max;
        for (const auto& r : rubrics) rs.rubrics.push_back(from_py_as<pipeline::Rubric>(r));
        std::vector<pipeline::RubricScore> sc;
        for (const auto& s : scores) sc.push_back(from_py_as<pipeline::RubricScore>(s));
        const auto a = pipeline::aggregate(sc, rs);
        return py::dict(py::arg("label") = std::string(to_string(a.label)), py::arg("avg_pos") = a.avg_pos,
                        py::arg("avg_neg") = a.avg_neg);
    }, py::arg("rubrics"), py::arg("scores"), py::arg("x_max") = 10);
    m.def("make_or_break_dominance_bound", &pipeline::make_or_break_dominance_bound, py::arg("x_max"),
          py::arg("n_neg"), py::arg("max_pos_weight"));
    m.def("spur_decide", [](const py::list& rubrics, const py::list& impacts) {
        spur::SpurRubricSet rs;
        for (const auto& r : rubrics) rs.rubrics.push_back(from_py_as<spur::SpurRubric>(r));
        std::vector<pipeline::RubricScore> sc;
        for (const auto& s : impacts) sc.push_back(from_py_as<pipeline::RubricScore>(s));
        return to_py(json(spur::spur_decide("", sc, rs)));
    });
    m.def("compute_metrics", [](const std::map<std::string, std::string>& verdicts,
                                const std::map<std::string, std::string>& truth) {
        std::map<std::string, Label> v, t;
        for (const auto& [k, x] : verdicts) v[k] = parse_label(x);
        for (const auto& [k, x] : truth) t[k] = parse_label(x);
        return to_py(json(harness::compute_metrics(v, t)));
    });
    m.def("make_splits", [](const std::string& dataset, int repeats, double train_fraction, std::uint64_t seed,
                            const std::string& stratify) {
        harness::SplitPlan plan{repeats, train_fraction, seed, harness::parse_stratify(stratify)};
        std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> out;
        for (auto& s : harness::make_splits(load_dataset(dataset), plan)) out.emplace_back(s.train, s.test);
        return out;
    }, py::arg("dataset"), py::arg("repeats") = 5, py::arg("train_fraction") = 0.4, py::arg("seed") = 0,
          py::arg("stratify") = "overall");

    m.def("judge", [](PyGateway& g, const py::dict& conversation) {
        const auto c = from_py_as<Conversation>(conversation);
        return to_py(json(judge::judge(*g.gateway, g.stages.at(Stage::JudgeFilter), c, find_situation(c.situation_id))));
    });
    m.def("learn", [](PyGateway& g, const py::list& train, const std::string& system, std::uint64_t seed,
                      bool exclude_ad, bool exclude_rw, bool exclude_mb) {
        const auto convs = conversations(train);
        json learned;
        {
            py::gil_scoped_release release;
            auto sys = harness::make_system(harness::parse_system(system), *g.gateway, g.stages, {},
                                            ablations(exclude_ad, exclude_rw, exclude_mb));
            learned = sys->learn(convs, seed);
            learned["rubric_store"] = sys->rubric_store();
        }
        return to_py(learned);
    }, py::arg("gateway"), py::arg("train"), py::arg("system") = "scope", py::arg("seed") = 0,
          py::arg("exclude_ad") = false, py::arg("exclude_rw") = false, py::arg("exclude_mb") = false,
          "Learns rubrics; the result carries the serialized store under 'rubric_store'.");
    m.def("evaluate", [](PyGateway& g, const py::list& items, const std::string& rubric_store) {
        const auto convs = conversations(items);
        json out = json::array();
        {
            py::gil_scoped_release release;
            const auto rs = pipeline::parse_rubric_store(rubric_store);
            for (const auto& v : pipeline::evaluate_all(*g.gateway, g.stages.at(Stage::LabelEstimation), convs, rs))
                out.push_back(v);
        }
        return to_py(out);
    }, py::arg("gateway"), py::arg("conversations"), py::arg("rubric_store"));
    m.def("run_experiment", [](PyGateway& g, const std::string& dataset, const std::string& system, int repeats,
                               double train_fraction, std::uint64_t seed, bool exclude_ad, bool exclude_rw,
                               bool exclude_mb, const std::string& run_id) {
        harness::ExperimentSettings s;
        s.run_id = run_id;
        s.system = harness::parse_system(system);
        s.plan.repeats = repeats;
        s.plan.train_fraction = train_fraction;
        s.plan.seed = seed;
        s.ablations = ablations(exclude_ad, exclude_rw, exclude_mb);
        const auto d = load_dataset(dataset);
        json manifest;
        {
            py::gil_scoped_release release;
            manifest = harness::run_experiment(d, *g.gateway, g.stages, s);
        }
        return to_py(manifest);
    }, py::arg("gateway"), py::arg("dataset"), py::arg("system") = "scope", py::arg("repeats") = 5,
          py::arg("train_fraction") = 0.4, py::arg("seed") = 0, py::arg("exclude_ad") = false,
          py::arg("exclude_rw") = false, py::arg("exclude_mb") = false, py::arg("run_id") = "run");
    m.def("render_report", [](const py::dict& manifest, const std::string& format) {
        return harness::render_report(from_py_as<harness::RunManifest>(manifest), harness::parse_report_format(format));
    }, py::arg("manifest"), py::arg("format") = "markdown");

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
