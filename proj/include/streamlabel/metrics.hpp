#ifndef STREAMLABEL_METRICS_HPP
#define STREAMLABEL_METRICS_HPP

#include <cstdint>
#include <map>
#include <set>
#include <span>

#include "streamlabel/core.hpp"

namespace streamlabel {

struct EvalTally {
    std::int64_t n = 0;        // instances labeled by the system
    std::int64_t n_new = 0;    // novel-class instances given their matching discovered label
    std::int64_t n_exist = 0;  // seed-class instances given their true label
    std::int64_t tp = 0;
    std::int64_t fp = 0;       // seed-class instance given a discovered label
    std::int64_t fn = 0;       // novel-class instance given a seed label
    std::int64_t n_l = 0;      // instances given a discovered label
};

double accuracy(const EvalTally& t);
double m_new(const EvalTally& t);
double f_new(const EvalTally& t);
double f_beta(const EvalTally& t, double beta = 2.0);

// Maps each discovered label to the majority true label among the instances
// that received it (ties toward the smaller true label).
std::map<LabelId, LabelId> map_discovered_labels(std::span<const LabelDecision> decisions,
                                                 const std::map<std::int64_t, LabelId>& truth,
                                                 const std::set<LabelId>& seed_labels);

// The last decision per instance wins. Deferred-forever instances are not counted.
EvalTally build_tally(std::span<const LabelDecision> decisions,
                      const std::map<std::int64_t, LabelId>& truth,
                      const std::set<LabelId>& seed_labels);

}  // namespace streamlabel

#endif  // STREAMLABEL_METRICS_HPP
