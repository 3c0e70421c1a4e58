#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "streamlabel/errors.hpp"
#include "streamlabel/io.hpp"
#include "streamlabel/metrics.hpp"
#include "streamlabel/pipeline.hpp"
#include "streamlabel/reporting.hpp"
#include "streamlabel/runtime_sim.hpp"
#include "streamlabel/scenario.hpp"

namespace py = pybind11;
using namespace streamlabel;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Instance> to_instances(const Array& x, const std::optional<std::vector<LabelId>>& y,
                                   const std::optional<std::vector<std::int64_t>>& ids, std::int64_t first_id) {
    if (x.ndim() != 2) throw ContractError("features must be a 2-D array");
    const auto n = static_cast<std::size_t>(x.shape(0));
    const auto d = static_cast<std::size_t>(x.shape(1));
    if (y && y->size() != n) throw ContractError("labels and features differ in length");
    if (ids && ids->size() != n) throw ContractError("ids and features differ in length");
    const auto r = x.unchecked<2>();
    std::vector<Instance> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].id = ids ? (*ids)[i] : first_id + static_cast<std::int64_t>(i);
        out[i].arrival_index = static_cast<std::int64_t>(i);
        out[i].features.resize(d);
        for (std::size_t j = 0; j < d; ++j) out[i].features[j] = r(i, j);
        if (y) out[i].true_label = (*y)[i];
    }
    return out;
}

py::dict from_instances(const std::vector<Instance>& rows) {
    const std::size_t d = rows.empty() ? 0 : rows.front().features.size();
    Array x({rows.size(), d});
    auto w = x.mutable_unchecked<2>();
    std::vector<std::int64_t> ids;
    std::vector<LabelId> y;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) w(i, j) = rows[i].features[j];
        ids.push_back(rows[i].id);
        y.push_back(rows[i].true_label.value_or(-1));
    }
    py::dict out;
    out["ids"] = ids;
    out["x"] = x;
    out["y"] = y;
    return out;
}

RunConfig make_config(const std::map<std::string, std::string>& overrides) {
    RunConfig cfg;
    for (const auto& [key, value] : overrides) set_config_value(cfg, key, value);
    cfg.validate();
    return cfg;
}

sim::KernelSpec make_kernel(double t_ser, double p, double t_tm, std::optional<double> t_ser_slow, double t_exe_acc,
                            double t_datacpy_acc, bool serial) {
    sim::KernelSpec k;
    k.name = "kernel";
    k.kind = serial ? sim::KernelKind::Serial : sim::KernelKind::Parallel;
    k.t_ser = t_ser;
    k.t_ser_fast = t_ser;
    k.t_ser_slow = t_ser_slow.value_or(2.0 * t_ser);
    k.t_exe_acc = t_exe_acc;
    k.t_datacpy_acc = t_datacpy_acc;
    k.t_tm = t_tm;
    k.p = p;
    k.validate();
    return k;
}

EvalTally make_tally(std::int64_t n, std::int64_t n_new, std::int64_t n_exist, std::int64_t tp, std::int64_t fp,
                     std::int64_t fn, std::int64_t n_l) {
    EvalTally t;
    t.n = n;
    t.n_new = n_new;
    t.n_exist = n_exist;
    t.tp = tp;
    t.fp = fp;
    t.fn = fn;
    t.n_l = n_l;
    return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Streaming auto-labeling engine and heterogeneous scheduling simulator";
    m.attr("__version__") = kVersion;

    auto base = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<MetricError>(m, "MetricError", PyExc_ArithmeticError);
    (void)base;

    m.def("config_defaults", [] { return config_values(RunConfig{}); },
          "Default value of every run configuration key, as strings.");

    m.def(
        "generate_synthetic",
        [](std::uint64_t seed, int dim, int seed_classes, std::vector<int> novel_arrivals, int stream_size,
           int chunk_size, int labeled_size, double sigma, double min_separation, double box) {
            SyntheticConfig sc;
            sc.seed = seed;
            sc.dim = dim;
            sc.seed_classes = seed_classes;
            sc.novel_arrivals = std::move(novel_arrivals);
            sc.stream_size = stream_size;
            sc.chunk_size = chunk_size;
            sc.labeled_size = labeled_size;
            sc.sigma = sigma;
            sc.min_separation = min_separation;
            sc.box = box;
            const auto data = generate_synthetic(sc);
            py::dict out;
            out["labeled"] = from_instances(data.labeled);
            out["stream"] = from_instances(data.stream);
            out["centers"] = data.centers;
            out["novel_arrivals"] = data.novel_arrivals;
            return out;
        },
        py::arg("seed") = 0, py::arg("dim") = 2, py::arg("seed_classes") = 3,
        py::arg("novel_arrivals") = std::vector<int>{10, 25}, py::arg("stream_size") = 1000,
        py::arg("chunk_size") = 20, py::arg("labeled_size") = 1000, py::arg("sigma") = 0.5,
        py::arg("min_separation") = 5.0, py::arg("box") = 20.0);

    m.def(
        "label",
        [](const Array& labeled_x, const std::vector<LabelId>& labeled_y, const Array& stream_x,
           std::optional<std::vector<LabelId>> stream_y, std::optional<std::vector<std::int64_t>> stream_ids,
           const std::map<std::string, std::string>& config) {
            const auto cfg = make_config(config);
            const auto labeled = to_instances(labeled_x, labeled_y, std::nullopt, 0);
            const auto stream =
                to_instances(stream_x, stream_y, stream_ids, static_cast<std::int64_t>(labeled.size()));
            if (!stream.empty() && !labeled.empty() && stream.front().features.size() != labeled.front().features.size()) {
                throw ContractError("labeled and stream feature dimensions differ");
            }
            RunResult run;
            {
                py::gil_scoped_release release;
                run = run_labeling(labeled, stream, cfg);
            }
            std::optional<Evaluation> ev;
            if (stream_y) ev = evaluate(run.decisions, truth_of(stream), run.state.label_space.seed_labels());
            std::vector<std::string> log;
            log.reserve(run.decisions.size());
            for (const auto& d : run.decisions) log.push_back(decision_to_json(d));
            py::dict out;
            out["decisions"] = log;
            out["summary"] = run_summary_json(run, cfg, ev ? &*ev : nullptr).dump();
            out["n_labels"] = run.n_labels;
            return out;
        },
        py::arg("labeled_x"), py::arg("labeled_y"), py::arg("stream_x"), py::arg("stream_y") = py::none(),
        py::arg("stream_ids") = py::none(), py::arg("config") = std::map<std::string, std::string>{},
        "Runs the streaming labeler; decisions are JSON lines, summary is a JSON document.");

    m.def(
        "evaluate",
        [](const std::vector<std::string>& decision_lines, const std::map<std::int64_t, LabelId>& truth,
           const std::set<LabelId>& seed_labels) {
            std::vector<LabelDecision> decisions;
            decisions.reserve(decision_lines.size());
            for (const auto& line : decision_lines) decisions.push_back(decision_from_json(line));
            return evaluation_json(evaluate(decisions, truth, seed_labels)).dump();
        },
        py::arg("decisions"), py::arg("truth"), py::arg("seed_labels"));

    m.def("accuracy", [](std::int64_t n, std::int64_t n_new, std::int64_t n_exist) {
        return accuracy(make_tally(n, n_new, n_exist, 0, 0, 0, 0));
    }, py::arg("n"), py::arg("n_new"), py::arg("n_exist"));
    m.def("m_new", [](std::int64_t fn, std::int64_t n_l) { return m_new(make_tally(0, 0, 0, 0, 0, fn, n_l)); },
          py::arg("fn"), py::arg("n_l"));
    m.def("f_new", [](std::int64_t fp, std::int64_t n, std::int64_t n_l) {
        return f_new(make_tally(n, 0, 0, 0, fp, 0, n_l));
    }, py::arg("fp"), py::arg("n"), py::arg("n_l"));
    m.def("f_beta", [](std::int64_t tp, std::int64_t fn, std::int64_t fp, double beta) {
        return f_beta(make_tally(0, 0, 0, tp, fp, fn, 0), beta);
    }, py::arg("tp"), py::arg("fn"), py::arg("fp"), py::arg("beta") = 2.0);

    py::class_<sim::KernelSpec>(m, "KernelSpec")
        .def(py::init(&make_kernel), py::arg("t_ser"), py::arg("p"), py::arg("t_tm") = 0.0,
             py::arg("t_ser_slow") = py::none(), py::arg("t_exe_acc") = 0.0, py::arg("t_datacpy_acc") = 0.0,
             py::arg("serial") = false)
        .def_readonly("t_ser", &sim::KernelSpec::t_ser)
        .def_readonly("p", &sim::KernelSpec::p)
        .def_readonly("t_tm", &sim::KernelSpec::t_tm)
        .def_readonly("t_ser_slow", &sim::KernelSpec::t_ser_slow)
        .def_readonly("t_exe_acc", &sim::KernelSpec::t_exe_acc)
        .def_readonly("t_datacpy_acc", &sim::KernelSpec::t_datacpy_acc);

    py::class_<sim::Division>(m, "Division")
        .def(py::init([](int n_fast, int n_slow, double w_fast, double w_slow, double w_acc) {
                 return sim::Division{n_fast, n_slow, w_fast, w_slow, w_acc};
             }),
             py::arg("n_fast"), py::arg("n_slow"), py::arg("w_fast"), py::arg("w_slow"), py::arg("w_acc"))
        .def_readonly("n_fast", &sim::Division::n_fast)
        .def_readonly("n_slow", &sim::Division::n_slow)
        .def_readonly("w_fast", &sim::Division::w_fast)
        .def_readonly("w_slow", &sim::Division::w_slow)
        .def_readonly("w_acc", &sim::Division::w_acc)
        .def("__repr__", [](const sim::Division& d) {
            return "Division(n_fast=" + std::to_string(d.n_fast) + ", n_slow=" + std::to_string(d.n_slow) +
                   ", w_fast=" + std::to_string(d.w_fast) + ", w_slow=" + std::to_string(d.w_slow) +
                   ", w_acc=" + std::to_string(d.w_acc) + ")";
        });

    m.def("serial_time", &sim::serial_time, py::arg("kernel"), py::arg("n_l"));
    m.def("parallel_time", &sim::parallel_time, py::arg("kernel"), py::arg("n_t"), py::arg("n_l"));
    m.def("speedup", py::overload_cast<const sim::KernelSpec&, int, int>(&sim::speedup), py::arg("kernel"),
          py::arg("n_t"), py::arg("n_l"));
    m.def("optimal_threads", &sim::optimal_threads, py::arg("kernel"), py::arg("n_l"), py::arg("max_threads"));
    m.def("division_time", &sim::division_time, py::arg("kernel"), py::arg("division"), py::arg("n_l"));
    m.def(
        "optimal_division",
        [](const sim::KernelSpec& k, int n_l, int fast, int slow, bool gpu, double grid_step) {
            return sim::optimal_division(k, n_l, sim::UnitAvailability{fast, slow, gpu}, grid_step);
        },
        py::arg("kernel"), py::arg("n_l"), py::arg("fast") = 4, py::arg("slow") = 4, py::arg("gpu") = true,
        py::arg("grid_step") = 0.05);

    m.def(
        "simulate",
        [](const std::string& strategy, int steps, int n_l_start, int n_l_end,
           std::optional<std::vector<int>> n_l, std::optional<std::string> scenario_path, bool schedule) {
            sim::Scenario scen = scenario_path ? sim::load_scenario(*scenario_path)
                                               : sim::default_scenario(steps, n_l_start, n_l_end);
            if (n_l) scen.n_l = *n_l;
            const auto work = sim::expand(scen);
            const auto s = sim::parse_strategy(strategy);
            sim::SimReport report;
            {
                py::gil_scoped_release release;
                report = sim::simulate(work, s, scen.hardware);
            }
            return sim_report_json(report, schedule).dump();
        },
        py::arg("strategy") = "ST.6", py::arg("steps") = 100, py::arg("n_l_start") = 1, py::arg("n_l_end") = 10,
        py::arg("n_l") = py::none(), py::arg("scenario") = py::none(), py::arg("schedule") = false,
        "Simulates one strategy on the default (or a loaded) scenario; returns the report as JSON.");
}
