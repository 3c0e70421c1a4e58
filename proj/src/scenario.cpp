#include "streamlabel/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "streamlabel/errors.hpp"

namespace streamlabel::sim {
namespace {

namespace pt = boost::property_tree;

constexpr const char* kKernelPrefix = "kernel:";

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

KernelTemplate parallel_kernel(const std::string& name, double t_ser, bool tc, bool per_hf, int count = 1) {
    KernelTemplate t;
    t.spec.name = name;
    t.spec.kind = KernelKind::Parallel;
    t.spec.time_consuming = tc;
    t.spec.t_ser = t_ser;
    t.spec.t_ser_fast = t_ser;
    t.spec.t_ser_slow = 2.0 * t_ser;
    if (tc) {
        t.spec.p = 0.95;
        t.spec.t_tm = 0.002 * t_ser;
        t.spec.t_exe_acc = 0.15 * t_ser;
        t.spec.t_datacpy_acc = 0.03 * t_ser;
    } else {
        // small kernels: thread overhead comparable to the work itself
        t.spec.p = 0.9;
        t.spec.t_tm = 0.25 * t_ser;
        t.spec.t_exe_acc = 0.5 * t_ser;
        t.spec.t_datacpy_acc = 0.5 * t_ser;
    }
    t.per_hf = per_hf;
    t.count = count;
    return t;
}

KernelTemplate serial_kernel(const std::string& name, double t_ser, bool tc, int count = 1) {
    KernelTemplate t;
    t.spec.name = name;
    t.spec.kind = KernelKind::Serial;
    t.spec.time_consuming = tc;
    t.spec.t_ser = t_ser;
    t.spec.t_ser_fast = t_ser;
    t.spec.t_ser_slow = 2.0 * t_ser;
    t.count = count;
    return t;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& where) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        try {
            out.push_back(std::stoi(item, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t\r", used) != std::string::npos) {
            throw DataError(where + ": bad integer '" + item + "'");
        }
    }
    return out;
}

template <typename T>
T get_required(const pt::ptree& tree, const std::string& key, const std::string& where) {
    try {
        return tree.get<T>(key);
    } catch (const pt::ptree_error& e) {
        throw DataError(where + ": missing or invalid key '" + key + "'");
    }
}

// Optional key: absent → fallback; present but unparseable → DataError.
template <typename T>
T get_or(const pt::ptree& tree, const std::string& key, T fallback, const std::string& where) {
    if (!tree.get_child_optional(key)) return fallback;
    return get_required<T>(tree, key, where);
}

}  // namespace

std::vector<int> linear_trajectory(int steps, int start, int end) {
    if (steps <= 0) throw ConfigError("scenario: steps must be positive");
    if (start < 1 || end < 1) throw ConfigError("scenario: n_l must be >= 1");
    std::vector<int> out(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        out[static_cast<std::size_t>(i)] = start + static_cast<int>(std::lround((end - start) * frac));
    }
    return out;
}

Scenario default_scenario(int steps, int n_l_start, int n_l_end) {
    Scenario s;
    s.num_hf = 6;
    const double hf = s.num_hf;
    s.kernels.push_back(serial_kernel("warmup_processing", 0.064, true));
    s.kernels.push_back(parallel_kernel("sample_processing", 0.380 / hf, true, true));
    s.kernels.push_back(parallel_kernel("label_single", 0.177 / hf, true, true));
    s.kernels.push_back(parallel_kernel("test_ensemble", 0.179 / hf, true, true));
    s.kernels.push_back(parallel_kernel("detect_change", 0.180, true, false));
    s.kernels.push_back(parallel_kernel("others_parallel", 0.001, false, false, 10));
    s.kernels.push_back(serial_kernel("others_serial", 0.001, false, 10));
    s.n_l = linear_trajectory(steps, n_l_start, n_l_end);
    return s;
}

std::vector<StepWorkload> expand(const Scenario& scenario) {
    std::vector<KernelSpec> step;
    for (const auto& t : scenario.kernels) {
        for (int c = 0; c < t.count; ++c) {
            KernelSpec k = t.spec;
            if (t.count > 1) {
                char suffix[16];
                std::snprintf(suffix, sizeof(suffix), "_%02d", c);
                k.name += suffix;
            }
            if (t.per_hf) {
                for (int h = 0; h < scenario.num_hf; ++h) {
                    k.hf_id = h;
                    step.push_back(k);
                }
            } else {
                k.hf_id.reset();
                step.push_back(k);
            }
        }
    }
    std::vector<StepWorkload> out;
    out.reserve(scenario.n_l.size());
    for (int n_l : scenario.n_l) out.push_back({step, n_l});
    return out;
}

Scenario load_scenario(const std::string& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw DataError(e.filename() + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    Scenario s;
    s.kernels.clear();
    if (auto hw = tree.get_child_optional("hardware")) {
        const std::string where = path + " [hardware]";
        s.hardware.n_fast = get_or(*hw, "n_fast", s.hardware.n_fast, where);
        s.hardware.n_slow = get_or(*hw, "n_slow", s.hardware.n_slow, where);
        s.hardware.gpu = get_or(*hw, "gpu", s.hardware.gpu, where);
        s.hardware.power_active.fast = get_or(*hw, "power_active_fast", s.hardware.power_active.fast, where);
        s.hardware.power_active.slow = get_or(*hw, "power_active_slow", s.hardware.power_active.slow, where);
        s.hardware.power_active.gpu = get_or(*hw, "power_active_gpu", s.hardware.power_active.gpu, where);
        s.hardware.power_idle.fast = get_or(*hw, "power_idle_fast", s.hardware.power_idle.fast, where);
        s.hardware.power_idle.slow = get_or(*hw, "power_idle_slow", s.hardware.power_idle.slow, where);
        s.hardware.power_idle.gpu = get_or(*hw, "power_idle_gpu", s.hardware.power_idle.gpu, where);
    }
    const auto workload = tree.get_child("workload", pt::ptree{});
    const std::string wl = path + " [workload]";
    s.num_hf = get_or(workload, "num_hf", 6, wl);
    if (auto values = workload.get_optional<std::string>("n_l_values")) {
        s.n_l = parse_int_list(*values, path + " [workload] n_l_values");
    } else if (auto file = workload.get_optional<std::string>("n_l_trajectory")) {
        std::filesystem::path p(*file);
        if (p.is_relative()) p = std::filesystem::path(path).parent_path() / p;
        s.n_l = read_nl_trajectory(p.string());
    } else {
        s.n_l = linear_trajectory(get_or(workload, "steps", 100, wl), get_or(workload, "n_l_start", 1, wl),
                                  get_or(workload, "n_l_end", 10, wl));
    }

    for (const auto& [section, body] : tree) {
        if (section.rfind(kKernelPrefix, 0) != 0) continue;
        const std::string where = path + " [" + section + "]";
        KernelTemplate t;
        t.spec.name = section.substr(std::string(kKernelPrefix).size());
        const auto kind = get_required<std::string>(body, "kind", where);
        if (kind == "parallel") t.spec.kind = KernelKind::Parallel;
        else if (kind == "serial") t.spec.kind = KernelKind::Serial;
        else throw DataError(where + ": kind must be 'parallel' or 'serial'");
        t.spec.time_consuming = get_or(body, "time_consuming", false, where);
        t.per_hf = get_or(body, "per_hf", false, where);
        t.count = get_or(body, "count", 1, where);
        t.spec.t_ser = get_required<double>(body, "t_ser", where);
        t.spec.t_ser_fast = t.spec.t_ser;
        t.spec.t_ser_slow = get_or(body, "t_ser_slow", 2.0 * t.spec.t_ser, where);
        t.spec.t_exe_acc = get_or(body, "t_exe_acc", 0.0, where);
        t.spec.t_datacpy_acc = get_or(body, "t_datacpy_acc", 0.0, where);
        t.spec.t_tm = get_or(body, "t_tm", 0.0, where);
        t.spec.p = get_or(body, "p", t.spec.kind == KernelKind::Serial ? 0.0 : 1.0, where);
        try {
            t.spec.validate();
        } catch (const ContractError& e) {
            throw DataError(where + ": " + e.what());
        }
        if (t.count < 1) throw DataError(where + ": count must be >= 1");
        s.kernels.push_back(std::move(t));
    }
    if (s.kernels.empty()) throw DataError(path + ": no [kernel:NAME] sections");
    if (s.n_l.empty()) throw DataError(path + ": empty n_l trajectory");
    for (int v : s.n_l) {
        if (v < 1) throw DataError(path + ": n_l values must be >= 1");
    }
    try {
        s.hardware.validate();
    } catch (const ConfigError& e) {
        throw DataError(path + ": " + e.what());
    }
    return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write scenario file " + path);
    const auto& hw = s.hardware;
    out << "# Heterogeneous SoC scenario\n\n[hardware]\n"
        << "n_fast = " << hw.n_fast << "\n"
        << "n_slow = " << hw.n_slow << "\n"
        << "gpu = " << (hw.gpu ? "true" : "false") << "\n"
        << "power_active_fast = " << fmt_double(hw.power_active.fast) << "\n"
        << "power_active_slow = " << fmt_double(hw.power_active.slow) << "\n"
        << "power_active_gpu = " << fmt_double(hw.power_active.gpu) << "\n"
        << "power_idle_fast = " << fmt_double(hw.power_idle.fast) << "\n"
        << "power_idle_slow = " << fmt_double(hw.power_idle.slow) << "\n"
        << "power_idle_gpu = " << fmt_double(hw.power_idle.gpu) << "\n\n[workload]\n"
        << "num_hf = " << s.num_hf << "\n"
        << "n_l_values = ";
    for (std::size_t i = 0; i < s.n_l.size(); ++i) out << (i ? "," : "") << s.n_l[i];
    out << "\n";
    for (const auto& t : s.kernels) {
        const auto& k = t.spec;
        out << "\n[" << kKernelPrefix << k.name << "]\n"
            << "kind = " << (k.kind == KernelKind::Parallel ? "parallel" : "serial") << "\n"
            << "time_consuming = " << (k.time_consuming ? "true" : "false") << "\n"
            << "per_hf = " << (t.per_hf ? "true" : "false") << "\n"
            << "count = " << t.count << "\n"
            << "t_ser = " << fmt_double(k.t_ser) << "\n"
            << "t_ser_slow = " << fmt_double(k.t_ser_slow) << "\n"
            << "t_exe_acc = " << fmt_double(k.t_exe_acc) << "\n"
            << "t_datacpy_acc = " << fmt_double(k.t_datacpy_acc) << "\n"
            << "t_tm = " << fmt_double(k.t_tm) << "\n"
            << "p = " << fmt_double(k.p) << "\n";
    }
}

std::vector<int> read_nl_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open n_l trajectory " + path);
    std::vector<int> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "chunk,n_labels") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError(path + ":" + std::to_string(line_no) + ": expected chunk,n_labels");
        try {
            out.push_back(std::stoi(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad n_labels value");
        }
    }
    return out;
}

void write_nl_trajectory(const std::vector<int>& n_l, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "chunk,n_labels\n";
    for (std::size_t i = 0; i < n_l.size(); ++i) out << i << "," << n_l[i] << "\n";
}

}  // namespace streamlabel::sim
