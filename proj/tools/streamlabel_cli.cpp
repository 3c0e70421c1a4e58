#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "streamlabel/errors.hpp"
#include "streamlabel/io.hpp"
#include "streamlabel/pipeline.hpp"
#include "streamlabel/reporting.hpp"
#include "streamlabel/scenario.hpp"

namespace fs = std::filesystem;
using namespace streamlabel;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct DataInputs {
    std::string data;
    std::string labeled;
    std::string stream;
    std::string config;
    std::vector<std::string> overrides;
    std::map<std::string, std::string> flag_values;
};

// Adds `--config`, `--set key=value`, one `--<key>` flag per config key, and the
// data inputs shared by `label` and `sweep`.
void add_data_options(CLI::App* app, DataInputs& in) {
    app->add_option("--data", in.data, "Full dataset CSV, split into D_L and D_U by seed");
    app->add_option("--labeled", in.labeled, "Labeled set D_L (CSV)");
    app->add_option("--stream", in.stream, "Stream D_U in arrival order (CSV)");
    app->add_option("--config", in.config, "Key = value config file");
    app->add_option("--set", in.overrides, "Config override key=value (repeatable)");
    for (const auto& key : config_keys()) {
        app->add_option("--" + key, in.flag_values[key], "Config key " + key);
    }
}

RunConfig resolve_config(const DataInputs& in) {
    RunConfig cfg = in.config.empty() ? RunConfig{} : load_run_config(in.config);
    for (const auto& [key, value] : in.flag_values) {
        if (!value.empty()) set_config_value(cfg, key, value);
    }
    for (const auto& kv : in.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

struct LoadedData {
    std::vector<Instance> labeled;
    std::vector<Instance> stream;
    json inputs;
};

LoadedData load_data(const DataInputs& in, const RunConfig& cfg) {
    LoadedData out;
    if (!in.data.empty()) {
        if (!in.labeled.empty() || !in.stream.empty()) {
            throw ConfigError("use either --data or --labeled/--stream, not both");
        }
        auto split = split_dataset(read_dataset(in.data), cfg.known_label_fraction, cfg.dl_du_ratio, cfg.seed);
        out.labeled = std::move(split.labeled);
        out.stream = std::move(split.stream);
        out.inputs = {{"data", in.data}};
    } else {
        if (in.labeled.empty() || in.stream.empty()) {
            throw ConfigError("need --data, or both --labeled and --stream");
        }
        out.labeled = read_dataset(in.labeled);
        out.stream = read_dataset(in.stream);
        out.inputs = {{"labeled", in.labeled}, {"stream", in.stream}};
    }
    if (out.labeled.empty()) throw DataError("labeled set is empty");
    if (!out.stream.empty() && out.stream.front().features.size() != out.labeled.front().features.size()) {
        throw DataError("labeled and stream feature dimensions differ");
    }
    return out;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric value '" + item + "'");
        }
    }
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

int cmd_label(const DataInputs& in, const std::string& out_dir, const std::vector<std::string>& argv) {
    const RunConfig cfg = resolve_config(in);
    const auto data = load_data(in, cfg);
    ensure_dir(out_dir);
    auto run = run_labeling(data.labeled, data.stream, cfg);
    const auto truth = truth_of(data.stream);
    std::optional<Evaluation> ev;
    if (!truth.empty()) ev = evaluate(run.decisions, truth, run.state.label_space.seed_labels());

    write_decisions(run.decisions, join(out_dir, "decisions.jsonl"));
    write_json(run_summary_json(run, cfg, ev ? &*ev : nullptr), join(out_dir, "summary.json"));
    sim::write_nl_trajectory(run.n_labels, join(out_dir, "n_labels.csv"));
    if (!truth.empty()) write_truth(data.stream, join(out_dir, "truth.csv"));
    write_json(manifest_json("label", argv, config_json(cfg), data.inputs), join(out_dir, "manifest.json"));

    std::cerr << "labeled " << data.stream.size() << " instances in " << run.snapshots.size()
              << " chunks; discovered " << run.state.label_space.discovered_labels().size()
              << " labels; " << run.wall_seconds << " s\n";
    if (ev && ev->accuracy) std::cerr << "accuracy% " << *ev->accuracy << "\n";
    return 0;
}

int cmd_score(const std::string& decisions_path, const std::string& truth_path,
              const std::string& summary_path, const std::vector<int>& seed_list,
              const std::string& out_path) {
    const auto decisions = read_decisions(decisions_path);
    const auto truth = read_truth(truth_path);
    std::set<LabelId> seed(seed_list.begin(), seed_list.end());
    if (!summary_path.empty()) {
        const auto summary = read_json(summary_path);
        try {
            for (int l : summary.at("seed_labels")) seed.insert(l);
        } catch (const json::exception& e) {
            throw DataError(summary_path + ": " + e.what());
        }
    }
    if (seed.empty()) throw ConfigError("score needs --seed-labels or --summary");
    const auto ev = evaluate(decisions, truth, seed);
    const auto j = evaluation_json(ev);
    if (out_path.empty()) std::cout << j.dump(2) << "\n";
    else write_json(j, out_path);
    return 0;
}

struct SimulateArgs {
    std::string scenario;
    std::string strategy = "all";
    int steps = 100;
    int n_l_start = 1;
    int n_l_end = 10;
    std::string trajectory;
    std::string out_dir;
    bool schedule = false;
    std::string save_scenario;
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
    sim::Scenario scenario = a.scenario.empty() ? sim::default_scenario(a.steps, a.n_l_start, a.n_l_end)
                                                : sim::load_scenario(a.scenario);
    if (!a.trajectory.empty()) scenario.n_l = sim::read_nl_trajectory(a.trajectory);
    std::vector<sim::Strategy> strategies;
    if (a.strategy == "all") strategies = sim::all_strategies();
    else strategies.push_back(sim::parse_strategy(a.strategy));
    const auto workload = sim::expand(scenario);

    json reports = json::array();
    std::ostringstream table;
    table << "strategy,total_time,speedup_vs_st1,energy,energy_vs_st1\n";
    for (auto s : strategies) {
        const auto r = sim::simulate(workload, s, scenario.hardware);
        reports.push_back(sim_report_json(r, a.schedule));
        char line[160];
        std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g,%.17g\n", sim::to_string(s).c_str(),
                      r.total_time, r.speedup_vs_st1, r.energy, r.energy_vs_st1);
        table << line;
    }
    std::cout << table.str();
    if (!a.out_dir.empty()) {
        ensure_dir(a.out_dir);
        write_json(reports, join(a.out_dir, "sim_report.json"));
        std::ofstream(join(a.out_dir, "strategies.csv")) << table.str();
        json inputs = json::object();
        if (!a.scenario.empty()) inputs["scenario"] = a.scenario;
        if (!a.trajectory.empty()) inputs["n_l_trajectory"] = a.trajectory;
        json cfg = {{"strategy", a.strategy}, {"steps", a.steps}, {"n_l_start", a.n_l_start},
                    {"n_l_end", a.n_l_end}, {"schedule", a.schedule}};
        write_json(manifest_json("simulate", argv, cfg, inputs), join(a.out_dir, "manifest.json"));
    }
    if (!a.save_scenario.empty()) sim::save_scenario(scenario, a.save_scenario);
    return 0;
}

int cmd_sweep(const DataInputs& in, const std::string& axis, const std::string& values, int repeats,
              const std::string& out_dir, const std::vector<std::string>& argv) {
    const RunConfig cfg = resolve_config(in);
    const auto data = load_data(in, cfg);
    const auto points = run_sweep(data.labeled, data.stream, cfg, axis, parse_values(values), repeats);
    std::ostringstream table;
    table << "axis,value,assigned,deferred,discovered,accuracy,wall_seconds\n";
    for (const auto& p : points) {
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%.12g,%zu,%zu,%zu,%s,%.6f\n", p.axis.c_str(), p.value, p.assigned,
                      p.deferred, p.discovered, p.accuracy ? std::to_string(*p.accuracy).c_str() : "",
                      p.wall_seconds);
        table << line;
    }
    std::cout << table.str();
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::ofstream(join(out_dir, "sweep.csv")) << table.str();
        json c = config_json(cfg);
        c["sweep_axis"] = axis;
        c["sweep_values"] = values;
        c["repeats"] = repeats;
        write_json(manifest_json("sweep", argv, c, data.inputs), join(out_dir, "manifest.json"));
    }
    return 0;
}

int cmd_gen_synthetic(SyntheticConfig sc, bool stationary, const std::string& out_dir,
                      const std::vector<std::string>& argv) {
    if (stationary) sc.novel_arrivals.clear();
    const auto data = generate_synthetic(sc);
    ensure_dir(out_dir);
    write_dataset(data.labeled, join(out_dir, "labeled.csv"));
    write_dataset(data.stream, join(out_dir, "stream.csv"));
    write_truth(data.stream, join(out_dir, "truth.csv"));
    json arrivals = json::object();
    for (const auto& [cls, chunk] : data.novel_arrivals) arrivals[std::to_string(cls)] = chunk;
    json cfg = {{"seed", sc.seed}, {"dim", sc.dim}, {"seed_classes", sc.seed_classes},
                {"novel_arrivals", sc.novel_arrivals}, {"stream_size", sc.stream_size},
                {"chunk_size", sc.chunk_size}, {"labeled_size", sc.labeled_size}, {"sigma", sc.sigma},
                {"min_separation", sc.min_separation}, {"box", sc.box}};
    json manifest = manifest_json("gen-synthetic", argv, cfg, json::object());
    manifest["novel_class_arrivals"] = arrivals;
    manifest["centers"] = data.centers;
    write_json(manifest, join(out_dir, "manifest.json"));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Streaming auto-labeling engine and heterogeneous runtime simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    DataInputs label_in;
    std::string label_out = "out";
    auto* label = app.add_subcommand("label", "Label a stream with the heuristic ensemble");
    add_data_options(label, label_in);
    label->add_option("--out", label_out, "Output directory");

    std::string score_decisions, score_truth, score_summary, score_out;
    std::vector<int> score_seed;
    auto* score = app.add_subcommand("score", "Compute metrics from a decision log and ground truth");
    score->add_option("--decisions", score_decisions, "decisions.jsonl")->required();
    score->add_option("--truth", score_truth, "id,label ground-truth CSV")->required();
    score->add_option("--summary", score_summary, "summary.json providing the seed labels");
    score->add_option("--seed-labels", score_seed, "Seed label ids")->delimiter(',');
    score->add_option("--out", score_out, "Write metrics JSON here instead of stdout");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Simulate scheduling strategies on the SoC model");
    simulate->add_option("--scenario", sim_args.scenario, "Scenario file (default: built-in scenario)");
    simulate->add_option("--strategy", sim_args.strategy, "ST.1 .. ST.6 or all");
    simulate->add_option("--steps", sim_args.steps, "Steps of the built-in scenario");
    simulate->add_option("--n-l-start", sim_args.n_l_start, "First N_l of the built-in trajectory");
    simulate->add_option("--n-l-end", sim_args.n_l_end, "Last N_l of the built-in trajectory");
    simulate->add_option("--n-l-trajectory", sim_args.trajectory, "chunk,n_labels CSV from a label run");
    simulate->add_option("--out", sim_args.out_dir, "Output directory");
    simulate->add_flag("--schedule", sim_args.schedule, "Include the kernel schedule in the report");
    simulate->add_option("--save-scenario", sim_args.save_scenario, "Write the effective scenario file");

    DataInputs sweep_in;
    std::string sweep_axis, sweep_values, sweep_out;
    int sweep_repeats = 1;
    auto* sweep = app.add_subcommand("sweep", "Sweep one engine parameter");
    add_data_options(sweep, sweep_in);
    sweep->add_option("--axis", sweep_axis, "num_hf | tau | chunk_size | k_per_hf")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
    sweep->add_option("--repeats", sweep_repeats, "Timing repeats per point (minimum kept)");
    sweep->add_option("--out", sweep_out, "Output directory");

    SyntheticConfig gen_cfg;
    bool gen_stationary = false;
    std::string gen_out = "synthetic";
    auto* gen = app.add_subcommand("gen-synthetic", "Write the Gaussian acceptance streams");
    gen->add_option("--seed", gen_cfg.seed, "Generator seed");
    gen->add_option("--dim", gen_cfg.dim, "Feature dimension");
    gen->add_option("--seed-classes", gen_cfg.seed_classes, "Classes present in D_L");
    gen->add_option("--novel-arrivals", gen_cfg.novel_arrivals, "First chunk of each novel class")->delimiter(',');
    gen->add_flag("--stationary", gen_stationary, "No novel classes");
    gen->add_option("--stream-size", gen_cfg.stream_size, "Stream instances");
    gen->add_option("--chunk-size", gen_cfg.chunk_size, "Chunk size used for arrival chunks");
    gen->add_option("--labeled-size", gen_cfg.labeled_size, "Labeled instances (seed classes only)");
    gen->add_option("--sigma", gen_cfg.sigma, "Per-axis standard deviation");
    gen->add_option("--min-separation", gen_cfg.min_separation, "Minimum centre distance");
    gen->add_option("--box", gen_cfg.box, "Side of the box centres are drawn from");
    gen->add_option("--out", gen_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*label) return cmd_label(label_in, label_out, args);
        if (*score) return cmd_score(score_decisions, score_truth, score_summary, score_seed, score_out);
        if (*simulate) return cmd_simulate(sim_args, args);
        if (*sweep) return cmd_sweep(sweep_in, sweep_axis, sweep_values, sweep_repeats, sweep_out, args);
        if (*gen) return cmd_gen_synthetic(gen_cfg, gen_stationary, gen_out, args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const ContractError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
