#ifndef STREAMLABEL_RUNTIME_SIM_HPP
#define STREAMLABEL_RUNTIME_SIM_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace streamlabel::sim {

enum class KernelKind { Parallel, Serial };
enum class UnitClass { Fast, Slow, Gpu };

// Profiled cost parameters of one kernel instance. Times are seconds for one
// chunk with a single existing label.
struct KernelSpec {
    std::string name;
    KernelKind kind = KernelKind::Parallel;
    bool time_consuming = false;
    std::optional<int> hf_id;
    double t_ser = 0.0;          // single fast thread
    double t_ser_fast = 0.0;     // same reference as t_ser
    double t_ser_slow = 0.0;
    double t_exe_acc = 0.0;
    double t_datacpy_acc = 0.0;
    double t_tm = 0.0;           // thread management overhead per thread
    double p = 0.0;              // parallelizable fraction

    void validate() const;
};

struct PowerTable {
    double fast = 2.0;
    double slow = 0.8;
    double gpu = 2.5;

    double of(UnitClass c) const;
};

struct HardwareModel {
    int n_fast = 4;
    int n_slow = 4;
    bool gpu = true;
    PowerTable power_active{};
    PowerTable power_idle{0.2, 0.08, 0.25};

    void validate() const;
};

// Units free for a kernel division.
struct UnitAvailability {
    int fast = 0;
    int slow = 0;
    bool gpu = false;
};

// Thread counts and workload weights across the three unit classes.
struct Division {
    int n_fast = 0;
    int n_slow = 0;
    double w_fast = 0.0;
    double w_slow = 0.0;
    double w_acc = 0.0;
};

// No threading: t_ser * (1 - p) + t_ser * p * n_l.
double serial_time(const KernelSpec& k, int n_l);

// t_ser * (1 - p) + t_ser / n_t * p * n_l
double parallel_time(const KernelSpec& k, int n_t, int n_l);

// serial_time / (t_tm * n_t + parallel_time)
double speedup(const KernelSpec& k, int n_t, int n_l);
double speedup(const KernelSpec& k, const Division& d, int n_l);

// Thread count in [1, max_threads] with the largest speedup; ties to fewer threads.
int optimal_threads(const KernelSpec& k, int n_l, int max_threads);

// t_ser * (1 - p) + p * n_l * (t_fast * w_f / n_f + t_slow * w_s / n_s + (t_acc + t_cpy) * w_a)
double division_time(const KernelSpec& k, const Division& d, int n_l);

// Wall time of a threaded run: thread overhead plus division_time.
double kernel_time(const KernelSpec& k, const Division& d, int n_l);

// Grid search over thread counts and weights (multiples of grid_step) for the
// division with the largest speedup. A class with zero weight gets zero threads.
// Ties resolve to the lexicographically smallest (n_fast, n_slow, w_fast, w_slow, w_acc).
Division optimal_division(const KernelSpec& k, int n_l, const UnitAvailability& avail,
                          double grid_step = 0.05);

enum class Strategy { ST1 = 1, ST2, ST3, ST4, ST5, ST6 };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& text);
std::vector<Strategy> all_strategies();

struct StepWorkload {
    std::vector<KernelSpec> kernels;
    int n_l = 1;
};

struct ScheduledKernel {
    int step = 0;
    std::size_t kernel_index = 0;
    std::string name;
    std::optional<int> hf_id;
    double start = 0.0;
    double end = 0.0;
    std::vector<int> units;
    Division division;
};

struct UnitReport {
    UnitClass cls = UnitClass::Fast;
    int index = 0;
    double busy = 0.0;
    double idle = 0.0;
};

struct SimReport {
    Strategy strategy = Strategy::ST1;
    std::vector<double> step_makespans;
    double total_time = 0.0;
    std::vector<UnitReport> units;
    double energy = 0.0;
    double speedup_vs_st1 = 1.0;
    double energy_vs_st1 = 1.0;
    std::vector<ScheduledKernel> schedule;
};

// Unit layout used by the simulator: fast cores, then slow cores, then the GPU.
std::vector<UnitClass> unit_layout(const HardwareModel& hw);

// Order in which a strategy dispatches a step's ready kernels (indices into `ready`).
std::vector<std::size_t> dispatch_order(std::span<const KernelSpec> ready, int n_l, Strategy s);

// Places one step's kernels. `free_at` holds each unit's next free time and is
// advanced in place. Kernels never start before `step_start`.
std::vector<ScheduledKernel> place(std::span<const KernelSpec> ready, int n_l, Strategy s,
                                   const HardwareModel& hw, std::vector<double>& free_at,
                                   double step_start);

// Active power over busy time plus idle power over idle time, per unit.
double energy(const SimReport& report, const HardwareModel& hw);

SimReport simulate(std::span<const StepWorkload> workload, Strategy s, const HardwareModel& hw);

}  // namespace streamlabel::sim

#endif  // STREAMLABEL_RUNTIME_SIM_HPP
