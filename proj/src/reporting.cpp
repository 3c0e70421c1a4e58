#include "streamlabel/reporting.hpp"

#include <fstream>

#include "streamlabel/errors.hpp"

namespace streamlabel {
namespace {

using json = nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const char* unit_class_name(sim::UnitClass c) {
    switch (c) {
        case sim::UnitClass::Fast: return "fast";
        case sim::UnitClass::Slow: return "slow";
        case sim::UnitClass::Gpu: return "gpu";
    }
    return "unknown";
}

}  // namespace

json config_json(const RunConfig& cfg) {
    json j = json::object();
    for (const auto& [key, value] : config_values(cfg)) j[key] = value;
    return j;
}

json evaluation_json(const Evaluation& ev) {
    const auto& t = ev.tally;
    json mapping = json::object();
    for (const auto& [discovered, truth] : ev.label_mapping) mapping[std::to_string(discovered)] = truth;
    return {
        {"n", t.n}, {"n_new", t.n_new}, {"n_exist", t.n_exist}, {"tp", t.tp}, {"fp", t.fp},
        {"fn", t.fn}, {"n_l", t.n_l},
        {"accuracy", optional_number(ev.accuracy)},
        {"m_new", optional_number(ev.m_new)},
        // N_l counts new-label assignments, so FN * 100 / N_l is not bounded by 100.
        {"m_new_exceeds_100", ev.m_new && *ev.m_new > 100.0},
        {"f_new", optional_number(ev.f_new)},
        {"f2", optional_number(ev.f2)},
        {"label_mapping", mapping},
    };
}

json run_summary_json(const RunResult& run, const RunConfig& cfg, const Evaluation* evaluation) {
    std::map<std::int64_t, const LabelDecision*> last;
    for (const auto& d : run.decisions) last[d.instance_id] = &d;
    std::int64_t assigned = 0, deferred = 0, retroactive = 0;
    for (const auto& [id, d] : last) {
        if (d->outcome == Outcome::Assigned) ++assigned;
        else ++deferred;
        if (d->retroactive) ++retroactive;
    }
    json discovered = json::array();
    for (const auto& d : run.state.label_space.discovered_labels()) {
        discovered.push_back({{"label", d.id}, {"founding_chunk", d.founding_chunk}});
    }
    std::size_t max_protos = 0, max_buffer = 0;
    for (const auto& s : run.snapshots) {
        max_protos = std::max(max_protos, s.total_prototypes);
        max_buffer = std::max(max_buffer, s.buffer_size);
    }
    json j = {
        {"instances", last.size()},
        {"chunks", run.snapshots.size()},
        {"assigned", assigned},
        {"deferred", deferred},
        {"retroactive", retroactive},
        {"seed_labels", std::vector<LabelId>(run.state.label_space.seed_labels().begin(),
                                             run.state.label_space.seed_labels().end())},
        {"discovered_labels", discovered},
        {"final_buffer_size", run.state.buffer.size()},
        {"final_prototypes", total_prototypes(run.state.ensemble)},
        {"max_prototypes_seen", max_protos},
        {"max_buffer_seen", max_buffer},
        {"prototype_cap", cfg.engine.adaptation.effective_max_prototypes(cfg.engine.ensemble)},
        {"n_labels", run.n_labels},
    };
    if (evaluation) j["metrics"] = evaluation_json(*evaluation);
    return j;
}

json sim_report_json(const sim::SimReport& report, bool include_schedule) {
    json units = json::array();
    for (const auto& u : report.units) {
        units.push_back({{"class", unit_class_name(u.cls)}, {"index", u.index}, {"busy", u.busy}, {"idle", u.idle}});
    }
    json j = {
        {"strategy", sim::to_string(report.strategy)},
        {"total_time", report.total_time},
        {"speedup_vs_st1", report.speedup_vs_st1},
        {"energy", report.energy},
        {"energy_vs_st1", report.energy_vs_st1},
        {"step_makespans", report.step_makespans},
        {"units", units},
    };
    if (include_schedule) {
        json sched = json::array();
        for (const auto& k : report.schedule) {
            sched.push_back({
                {"step", k.step}, {"name", k.name},
                {"hf_id", k.hf_id ? json(*k.hf_id) : json(nullptr)},
                {"start", k.start}, {"end", k.end}, {"units", k.units},
                {"n_fast", k.division.n_fast}, {"n_slow", k.division.n_slow},
                {"w_fast", k.division.w_fast}, {"w_slow", k.division.w_slow}, {"w_acc", k.division.w_acc},
            });
        }
        j["schedule"] = sched;
    }
    return j;
}

json manifest_json(const std::string& command, const std::vector<std::string>& argv,
                   const json& config, const json& inputs) {
    return {
        {"tool", "streamlabel"},
        {"version", kVersion},
        {"command", command},
        {"argv", argv},
        {"config", config},
        {"inputs", inputs},
    };
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace streamlabel
