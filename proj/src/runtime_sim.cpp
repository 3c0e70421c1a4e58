#include "streamlabel/runtime_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "streamlabel/errors.hpp"

namespace streamlabel::sim {
namespace {

constexpr double kWeightTolerance = 1e-9;

bool uses_fifo(Strategy s) { return s != Strategy::ST4 && s != Strategy::ST6; }

struct Placement {
    double start = 0.0;
    double duration = 0.0;
    std::vector<int> units;
    Division division;
};

class UnitPool {
public:
    UnitPool(const HardwareModel& hw, std::vector<double>& free_at, double floor)
        : hw_(hw), free_at_(free_at), floor_(floor) {}

    int fast_begin() const { return 0; }
    int slow_begin() const { return hw_.n_fast; }
    int gpu_index() const { return hw_.gpu ? hw_.n_fast + hw_.n_slow : -1; }
    int cpu_count() const { return hw_.n_fast + hw_.n_slow; }

    double ready_time(int u) const { return std::max(floor_, free_at_[static_cast<std::size_t>(u)]); }

    // Earliest time at which every unit in `units` is free.
    double all_free(const std::vector<int>& units) const {
        double t = floor_;
        for (int u : units) t = std::max(t, ready_time(u));
        return t;
    }

    std::vector<int> range(int begin, int count) const {
        std::vector<int> out(static_cast<std::size_t>(count));
        std::iota(out.begin(), out.end(), begin);
        return out;
    }

    std::vector<int> free_in(int begin, int count, double t) const {
        std::vector<int> out;
        for (int u = begin; u < begin + count; ++u) {
            if (ready_time(u) <= t) out.push_back(u);
        }
        return out;
    }

    double earliest_cpu() const {
        double t = std::numeric_limits<double>::infinity();
        for (int u = 0; u < cpu_count(); ++u) t = std::min(t, ready_time(u));
        return t;
    }

    std::vector<double> candidate_starts() const {
        std::vector<double> times;
        const int total = cpu_count() + (hw_.gpu ? 1 : 0);
        for (int u = 0; u < total; ++u) times.push_back(ready_time(u));
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        return times;
    }

    const HardwareModel& hw() const { return hw_; }

private:
    const HardwareModel& hw_;
    std::vector<double>& free_at_;
    double floor_;
};

using DivisionKey = std::tuple<double, double, double, double, double, double, int, int, int, bool>;

Division cached_optimal_division(const KernelSpec& k, int n_l, const UnitAvailability& a) {
    static thread_local std::map<DivisionKey, Division> cache;
    const DivisionKey key{k.t_ser, k.t_ser_slow, k.t_exe_acc, k.t_datacpy_acc, k.t_tm, k.p,
                          n_l, a.fast, a.slow, a.gpu};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() > 100000) cache.clear();
    const Division d = optimal_division(k, n_l, a);
    cache.emplace(key, d);
    return d;
}

Placement threaded(const KernelSpec& k, int n_l, const Division& d, double start,
                   std::vector<int> units) {
    return {start, kernel_time(k, d, n_l), std::move(units), d};
}

// Serial kernel (or single-core run): a fast core if one is free at the
// earliest CPU availability, otherwise a slow core.
Placement place_serial(const KernelSpec& k, int n_l, const UnitPool& pool) {
    const double t = pool.earliest_cpu();
    const auto fast = pool.free_in(pool.fast_begin(), pool.hw().n_fast, t);
    Placement pl;
    pl.start = t;
    if (!fast.empty()) {
        pl.units = {fast.front()};
        pl.duration = serial_time(k, n_l);
        pl.division = {1, 0, 1.0, 0.0, 0.0};
    } else {
        const auto slow = pool.free_in(pool.slow_begin(), pool.hw().n_slow, t);
        pl.units = {slow.front()};
        pl.duration = serial_time(k, n_l) * (k.t_ser_slow / k.t_ser);
        pl.division = {0, 1, 0.0, 1.0, 0.0};
    }
    return pl;
}

// Equal-weight split over every CPU core (and the GPU) with max threads.
Placement place_naive_all(const KernelSpec& k, int n_l, const UnitPool& pool, bool with_gpu) {
    const auto& hw = pool.hw();
    const bool gpu = with_gpu && hw.gpu;
    std::vector<int> units = pool.range(0, pool.cpu_count());
    if (gpu) units.push_back(pool.gpu_index());
    const double share = gpu ? 1.0 / 3.0 : 0.5;
    Division d{hw.n_fast, hw.n_slow, share, share, gpu ? 1.0 - 2.0 * share : 0.0};
    const double start = pool.all_free(units);
    return threaded(k, n_l, d, start, std::move(units));
}

// Small parallel kernel: the cores of one class free at the earliest CPU
// availability, fast preferred. Thread count is either every free core or
// the model optimum.
Placement place_small_parallel(const KernelSpec& k, int n_l, const UnitPool& pool, bool optimize) {
    const double t = pool.earliest_cpu();
    auto cores = pool.free_in(pool.fast_begin(), pool.hw().n_fast, t);
    const bool on_fast = !cores.empty();
    if (!on_fast) cores = pool.free_in(pool.slow_begin(), pool.hw().n_slow, t);
    const int n_free = static_cast<int>(cores.size());
    Division d;
    if (optimize) {
        UnitAvailability a{on_fast ? n_free : 0, on_fast ? 0 : n_free, false};
        d = cached_optimal_division(k, n_l, a);
    } else if (on_fast) {
        d = {n_free, 0, 1.0, 0.0, 0.0};
    } else {
        d = {0, n_free, 0.0, 1.0, 0.0};
    }
    cores.resize(static_cast<std::size_t>(on_fast ? d.n_fast : d.n_slow));
    return threaded(k, n_l, d, t, std::move(cores));
}

// Earliest-finish division: for each time some unit frees up, divide the
// kernel over the units free by then and keep the earliest completion.
Placement place_divided(const KernelSpec& k, int n_l, const UnitPool& pool) {
    const auto& hw = pool.hw();
    Placement best;
    double best_end = std::numeric_limits<double>::infinity();
    for (double s : pool.candidate_starts()) {
        const auto fast = pool.free_in(pool.fast_begin(), hw.n_fast, s);
        const auto slow = pool.free_in(pool.slow_begin(), hw.n_slow, s);
        const bool gpu = hw.gpu && pool.ready_time(pool.gpu_index()) <= s;
        if (fast.empty() && slow.empty() && !gpu) continue;
        UnitAvailability a{static_cast<int>(fast.size()), static_cast<int>(slow.size()), gpu};
        const Division d = cached_optimal_division(k, n_l, a);
        const double end = s + kernel_time(k, d, n_l);
        if (end < best_end) {
            best_end = end;
            std::vector<int> units(fast.begin(), fast.begin() + d.n_fast);
            units.insert(units.end(), slow.begin(), slow.begin() + d.n_slow);
            if (d.w_acc > 0.0) units.push_back(pool.gpu_index());
            best = threaded(k, n_l, d, s, std::move(units));
        }
    }
    return best;
}

Placement choose(const KernelSpec& k, int n_l, Strategy s, const UnitPool& pool) {
    if (s == Strategy::ST1) {
        Placement pl;
        pl.units = {pool.fast_begin()};
        pl.start = pool.all_free(pl.units);
        pl.duration = serial_time(k, n_l);
        pl.division = {1, 0, 1.0, 0.0, 0.0};
        return pl;
    }
    if (k.kind == KernelKind::Serial) return place_serial(k, n_l, pool);
    switch (s) {
        case Strategy::ST2:
            return place_naive_all(k, n_l, pool, false);
        case Strategy::ST3:
            return place_naive_all(k, n_l, pool, true);
        case Strategy::ST4:
            return k.time_consuming ? place_naive_all(k, n_l, pool, true)
                                    : place_small_parallel(k, n_l, pool, false);
        case Strategy::ST5:
            return place_divided(k, n_l, pool);
        case Strategy::ST6:
            return k.time_consuming ? place_divided(k, n_l, pool)
                                    : place_small_parallel(k, n_l, pool, true);
        case Strategy::ST1:
            break;
    }
    throw ContractError("place: unknown strategy");
}

}  // namespace

void KernelSpec::validate() const {
    auto fail = [&](const std::string& what) { throw ContractError("kernel '" + name + "': " + what); };
    if (!(t_ser > 0.0) || !std::isfinite(t_ser)) fail("t_ser must be positive");
    if (!(t_ser_slow > 0.0)) fail("t_ser_slow must be positive");
    if (!(p >= 0.0 && p <= 1.0)) fail("p must lie in [0, 1]");
    if (t_tm < 0.0 || t_exe_acc < 0.0 || t_datacpy_acc < 0.0) fail("times must be non-negative");
    if (kind == KernelKind::Serial && p != 0.0) fail("serial kernels must have p = 0");
}

double PowerTable::of(UnitClass c) const {
    switch (c) {
        case UnitClass::Fast: return fast;
        case UnitClass::Slow: return slow;
        case UnitClass::Gpu: return gpu;
    }
    return 0.0;
}

void HardwareModel::validate() const {
    if (n_fast < 1 || n_slow < 0) throw ConfigError("hardware: need at least one fast core");
    for (auto c : {UnitClass::Fast, UnitClass::Slow, UnitClass::Gpu}) {
        if (power_active.of(c) < 0.0 || power_idle.of(c) < 0.0) {
            throw ConfigError("hardware: powers must be non-negative");
        }
    }
}

double serial_time(const KernelSpec& k, int n_l) {
    return k.t_ser * (1.0 - k.p) + k.t_ser * k.p * n_l;
}

double parallel_time(const KernelSpec& k, int n_t, int n_l) {
    if (n_t < 1 || n_l < 1) throw ContractError("parallel_time: n_t and n_l must be >= 1");
    return k.t_ser * (1.0 - k.p) + k.t_ser / n_t * k.p * n_l;
}

double speedup(const KernelSpec& k, int n_t, int n_l) {
    return serial_time(k, n_l) / (k.t_tm * n_t + parallel_time(k, n_t, n_l));
}

double speedup(const KernelSpec& k, const Division& d, int n_l) {
    return serial_time(k, n_l) / kernel_time(k, d, n_l);
}

int optimal_threads(const KernelSpec& k, int n_l, int max_threads) {
    if (max_threads < 1) throw ContractError("optimal_threads: max_threads must be >= 1");
    int best = 1;
    double best_speedup = speedup(k, 1, n_l);
    for (int n = 2; n <= max_threads; ++n) {
        const double s = speedup(k, n, n_l);
        if (s > best_speedup) {
            best_speedup = s;
            best = n;
        }
    }
    return best;
}

double division_time(const KernelSpec& k, const Division& d, int n_l) {
    if (n_l < 1) throw ContractError("division_time: n_l must be >= 1");
    if (d.w_fast < 0.0 || d.w_slow < 0.0 || d.w_acc < 0.0) {
        throw ContractError("division_time: weights must be non-negative");
    }
    if (std::abs(d.w_fast + d.w_slow + d.w_acc - 1.0) > kWeightTolerance) {
        throw ContractError("division_time: weights must sum to 1");
    }
    if ((d.w_fast > 0.0 && d.n_fast < 1) || (d.w_slow > 0.0 && d.n_slow < 1) || d.n_fast < 0 ||
        d.n_slow < 0) {
        throw ContractError("division_time: a weighted class needs at least one thread");
    }
    double per_label = 0.0;
    if (d.w_fast > 0.0) per_label += k.t_ser_fast * d.w_fast / d.n_fast;
    if (d.w_slow > 0.0) per_label += k.t_ser_slow * d.w_slow / d.n_slow;
    per_label += (k.t_exe_acc + k.t_datacpy_acc) * d.w_acc;
    return k.t_ser * (1.0 - k.p) + k.p * n_l * per_label;
}

double kernel_time(const KernelSpec& k, const Division& d, int n_l) {
    return k.t_tm * (d.n_fast + d.n_slow) + division_time(k, d, n_l);
}

Division optimal_division(const KernelSpec& k, int n_l, const UnitAvailability& avail,
                          double grid_step) {
    if (avail.fast <= 0 && avail.slow <= 0 && !avail.gpu) {
        throw ContractError("optimal_division: no processing unit available");
    }
    const double steps_real = 1.0 / grid_step;
    const int steps = static_cast<int>(std::lround(steps_real));
    if (!(grid_step > 0.0) || steps < 1 || std::abs(steps_real - steps) > 1e-6) {
        throw ContractError("optimal_division: grid_step must divide 1");
    }
    Division best;
    double best_time = std::numeric_limits<double>::infinity();
    for (int nf = 0; nf <= std::max(avail.fast, 0); ++nf) {
        for (int ns = 0; ns <= std::max(avail.slow, 0); ++ns) {
            for (int i = (nf == 0 ? 0 : 1); i <= (nf == 0 ? 0 : steps); ++i) {
                for (int j = (ns == 0 ? 0 : 1); j <= (ns == 0 ? 0 : steps - i); ++j) {
                    const int a = steps - i - j;
                    if (a < 0 || (a > 0 && !avail.gpu)) continue;
                    Division d{nf, ns, static_cast<double>(i) / steps, static_cast<double>(j) / steps,
                               static_cast<double>(a) / steps};
                    const double t = kernel_time(k, d, n_l);
                    if (t < best_time) {
                        best_time = t;
                        best = d;
                    }
                }
            }
        }
    }
    return best;
}

std::string to_string(Strategy s) { return "ST." + std::to_string(static_cast<int>(s)); }

Strategy parse_strategy(const std::string& text) {
    std::string t = text;
    if (t.rfind("ST.", 0) == 0 || t.rfind("st.", 0) == 0) t = t.substr(3);
    else if (t.rfind("ST", 0) == 0 || t.rfind("st", 0) == 0) t = t.substr(2);
    if (t.size() == 1 && t[0] >= '1' && t[0] <= '6') return static_cast<Strategy>(t[0] - '0');
    throw ConfigError("unknown strategy '" + text + "' (expected ST.1 .. ST.6)");
}

std::vector<Strategy> all_strategies() {
    return {Strategy::ST1, Strategy::ST2, Strategy::ST3, Strategy::ST4, Strategy::ST5, Strategy::ST6};
}

std::vector<UnitClass> unit_layout(const HardwareModel& hw) {
    std::vector<UnitClass> units(static_cast<std::size_t>(hw.n_fast), UnitClass::Fast);
    units.insert(units.end(), static_cast<std::size_t>(hw.n_slow), UnitClass::Slow);
    if (hw.gpu) units.push_back(UnitClass::Gpu);
    return units;
}

std::vector<std::size_t> dispatch_order(std::span<const KernelSpec> ready, int n_l, Strategy s) {
    std::vector<std::size_t> order(ready.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (uses_fifo(s)) return order;

    // Round-robin cursor: a kernel's rank within its HF, longest first.
    std::map<int, std::vector<std::size_t>> per_hf;
    for (std::size_t i = 0; i < ready.size(); ++i) {
        if (ready[i].hf_id) per_hf[*ready[i].hf_id].push_back(i);
    }
    std::vector<std::size_t> rank(ready.size(), 0);
    auto longer = [&](std::size_t a, std::size_t b) {
        const double ta = serial_time(ready[a], n_l);
        const double tb = serial_time(ready[b], n_l);
        if (ta != tb) return ta > tb;
        if (ready[a].name != ready[b].name) return ready[a].name < ready[b].name;
        return a < b;
    };
    for (auto& [hf, idx] : per_hf) {
        std::sort(idx.begin(), idx.end(), longer);
        for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = r;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rank[a] != rank[b]) return rank[a] < rank[b];
        if (longer(a, b) != longer(b, a)) return longer(a, b);
        return ready[a].hf_id.value_or(-1) < ready[b].hf_id.value_or(-1);
    });
    return order;
}

std::vector<ScheduledKernel> place(std::span<const KernelSpec> ready, int n_l, Strategy s,
                                   const HardwareModel& hw, std::vector<double>& free_at,
                                   double step_start) {
    const auto layout = unit_layout(hw);
    if (free_at.size() != layout.size()) throw ContractError("place: free_at does not match hardware");
    std::vector<ScheduledKernel> out;
    double floor = step_start;
    for (std::size_t idx : dispatch_order(ready, n_l, s)) {
        const KernelSpec& k = ready[idx];
        UnitPool pool(hw, free_at, floor);
        Placement pl = choose(k, n_l, s, pool);
        ScheduledKernel sk;
        sk.kernel_index = idx;
        sk.name = k.name;
        sk.hf_id = k.hf_id;
        sk.start = pl.start;
        sk.end = pl.start + pl.duration;
        sk.units = pl.units;
        sk.division = pl.division;
        for (int u : pl.units) free_at[static_cast<std::size_t>(u)] = sk.end;
        // FIFO: no kernel starts before the one ahead of it in the queue.
        if (uses_fifo(s)) floor = pl.start;
        out.push_back(std::move(sk));
    }
    return out;
}

double energy(const SimReport& report, const HardwareModel& hw) {
    double joules = 0.0;
    for (const auto& u : report.units) {
        joules += hw.power_active.of(u.cls) * u.busy + hw.power_idle.of(u.cls) * u.idle;
    }
    return joules;
}

SimReport simulate(std::span<const StepWorkload> workload, Strategy s, const HardwareModel& hw) {
    hw.validate();
    const auto layout = unit_layout(hw);
    SimReport report;
    report.strategy = s;
    std::vector<double> busy(layout.size(), 0.0);
    double clock = 0.0;
    for (std::size_t step = 0; step < workload.size(); ++step) {
        const auto& w = workload[step];
        if (w.n_l < 1) throw ContractError("simulate: n_l must be >= 1");
        for (const auto& k : w.kernels) k.validate();
        // Barrier: the step starts once every unit is idle.
        std::vector<double> free_at(layout.size(), clock);
        auto placed = place(w.kernels, w.n_l, s, hw, free_at, clock);
        double end = clock;
        for (auto& sk : placed) {
            sk.step = static_cast<int>(step);
            end = std::max(end, sk.end);
            for (int u : sk.units) busy[static_cast<std::size_t>(u)] += sk.end - sk.start;
        }
        report.step_makespans.push_back(end - clock);
        clock = end;
        report.schedule.insert(report.schedule.end(), placed.begin(), placed.end());
    }
    report.total_time = std::accumulate(report.step_makespans.begin(), report.step_makespans.end(), 0.0);
    std::vector<int> class_index(3, 0);
    for (std::size_t u = 0; u < layout.size(); ++u) {
        UnitReport ur;
        ur.cls = layout[u];
        ur.index = class_index[static_cast<std::size_t>(layout[u])]++;
        ur.busy = busy[u];
        ur.idle = report.total_time - ur.busy;
        report.units.push_back(ur);
    }
    report.energy = energy(report, hw);
    if (s == Strategy::ST1) {
        report.speedup_vs_st1 = 1.0;
        report.energy_vs_st1 = 1.0;
    } else {
        const SimReport base = simulate(workload, Strategy::ST1, hw);
        report.speedup_vs_st1 = report.total_time > 0.0 ? base.total_time / report.total_time : 1.0;
        report.energy_vs_st1 = base.energy > 0.0 ? report.energy / base.energy : 1.0;
    }
    return report;
}

}  // namespace streamlabel::sim
