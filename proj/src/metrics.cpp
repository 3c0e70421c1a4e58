#include "streamlabel/metrics.hpp"

#include "streamlabel/errors.hpp"

namespace streamlabel {
namespace {

std::map<std::int64_t, const LabelDecision*> final_decisions(std::span<const LabelDecision> decisions) {
    std::map<std::int64_t, const LabelDecision*> last;
    for (const auto& d : decisions) last[d.instance_id] = &d;
    return last;
}

}  // namespace

double accuracy(const EvalTally& t) {
    if (t.n <= 0) throw MetricError("accuracy: no instances were labeled (N = 0)");
    return 100.0 * static_cast<double>(t.n_new + t.n_exist) / static_cast<double>(t.n);
}

double m_new(const EvalTally& t) {
    if (t.n_l <= 0) throw MetricError("m_new: no instances were given new labels (N_l = 0)");
    return static_cast<double>(t.fn) * 100.0 / static_cast<double>(t.n_l);
}

double f_new(const EvalTally& t) {
    if (t.n - t.n_l <= 0) throw MetricError("f_new: N - N_l = 0");
    return static_cast<double>(t.fp) * 100.0 / static_cast<double>(t.n - t.n_l);
}

double f_beta(const EvalTally& t, double beta) {
    const double b2 = beta * beta;
    const double num = (1.0 + b2) * static_cast<double>(t.tp);
    const double den = num + b2 * static_cast<double>(t.fn) + static_cast<double>(t.fp);
    if (den <= 0.0) throw MetricError("f_beta: zero denominator");
    return num / den;
}

std::map<LabelId, LabelId> map_discovered_labels(std::span<const LabelDecision> decisions,
                                                 const std::map<std::int64_t, LabelId>& truth,
                                                 const std::set<LabelId>& seed_labels) {
    std::map<LabelId, std::map<LabelId, std::int64_t>> votes;
    for (const auto& [id, d] : final_decisions(decisions)) {
        if (d->outcome != Outcome::Assigned || seed_labels.count(d->label) > 0) continue;
        const auto it = truth.find(id);
        if (it != truth.end()) ++votes[d->label][it->second];
    }
    std::map<LabelId, LabelId> mapping;
    for (const auto& [discovered, counts] : votes) {
        std::int64_t best = -1;
        for (const auto& [true_label, c] : counts) {
            if (c > best) {
                best = c;
                mapping[discovered] = true_label;
            }
        }
    }
    return mapping;
}

EvalTally build_tally(std::span<const LabelDecision> decisions,
                      const std::map<std::int64_t, LabelId>& truth,
                      const std::set<LabelId>& seed_labels) {
    const auto mapping = map_discovered_labels(decisions, truth, seed_labels);
    EvalTally t;
    for (const auto& [id, d] : final_decisions(decisions)) {
        if (d->outcome != Outcome::Assigned) continue;
        const auto it = truth.find(id);
        if (it == truth.end()) continue;
        const LabelId truth_label = it->second;
        const bool should_be_new = seed_labels.count(truth_label) == 0;
        const bool assigned_new = seed_labels.count(d->label) == 0;
        ++t.n;
        if (assigned_new) ++t.n_l;
        if (should_be_new && assigned_new) {
            const auto m = mapping.find(d->label);
            if (m != mapping.end() && m->second == truth_label) ++t.n_new;
        } else if (should_be_new) {
            ++t.fn;
        } else if (assigned_new) {
            ++t.fp;
        } else if (d->label == truth_label) {
            ++t.n_exist;
        }
    }
    t.tp = t.n_new;
    return t;
}

}  // namespace streamlabel
