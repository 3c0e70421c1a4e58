#ifndef STREAMLABEL_SCENARIO_HPP
#define STREAMLABEL_SCENARIO_HPP

#include <string>
#include <vector>

#include "streamlabel/runtime_sim.hpp"

namespace streamlabel::sim {

// One kernel declaration; expands into `count` instances, each replicated per
// heuristic function when `per_hf` is set.
struct KernelTemplate {
    KernelSpec spec;
    bool per_hf = false;
    int count = 1;
};

struct Scenario {
    HardwareModel hardware;
    int num_hf = 6;
    std::vector<KernelTemplate> kernels;
    // Number of existing labels at each step; its length is the step count.
    std::vector<int> n_l;
};

std::vector<int> linear_trajectory(int steps, int start, int end);

// Kernel mix with per-step serial time shares 38.0 / 18.0 / 17.9 / 17.7 / 6.4 / 2.0
// percent (sample processing, detect change, test ensemble, label single,
// warmup, 20 small kernels) on a 4 fast + 4 slow + GPU device.
Scenario default_scenario(int steps = 100, int n_l_start = 1, int n_l_end = 10);

std::vector<StepWorkload> expand(const Scenario& scenario);

// INI-style text format; see README for the keys.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

// `chunk,n_labels` CSV written by the labeling run.
std::vector<int> read_nl_trajectory(const std::string& path);
void write_nl_trajectory(const std::vector<int>& n_l, const std::string& path);

}  // namespace streamlabel::sim

#endif  // STREAMLABEL_SCENARIO_HPP
