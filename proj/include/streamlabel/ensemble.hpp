#ifndef STREAMLABEL_ENSEMBLE_HPP
#define STREAMLABEL_ENSEMBLE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "streamlabel/core.hpp"

namespace streamlabel {

struct EnsembleConfig {
    int num_hf = 6;
    int k_per_hf = 40;
    double tau = 0.7;
    double lambda = 1.0;
    double slack = 0.10;
    int max_iters = 100;
    std::uint64_t seed = 0;
    // Disabling bootstrap gives every HF the full labeled set (seeds still differ).
    bool bootstrap = true;

    void validate() const;
};

struct HfVote {
    // Empty when the nearest prototype has no labeled members ("no-vote").
    std::optional<LabelId> label;
    double raw_confidence = 0.0;
    std::size_t prototype_index = 0;
    double distance = 0.0;
};

struct AggregateResult {
    LabelId best_label = 0;
    double score = 0.0;
    bool covered = false;
    bool assigned = false;
    std::vector<Vote> votes;
};

// Seed used for the i-th heuristic function derived from the ensemble seed.
std::uint64_t derive_hf_seed(std::uint64_t ensemble_seed, int hf_index);

std::vector<HeuristicFunction> generate_heuristics(std::span<const Instance> labeled,
                                                   const EnsembleConfig& cfg);

// Nearest-prototype majority label with confidence (r - d) * f_max / sum(f).
HfVote hf_label(const HeuristicFunction& hf, std::span<const double> x);

// Clamp at zero, then divide by the largest clamped value.
std::vector<double> normalize_confidences(std::span<const double> raw);

// True when some prototype of some heuristic function covers x.
bool ensemble_covers(std::span<const HeuristicFunction> hfs, std::span<const double> x,
                     double slack);

// Confidence-weighted vote. Deferred (assigned == false) when x is outside the
// coverage boundary or the best label's score falls below tau.
AggregateResult aggregate(std::span<const double> x, std::span<const HeuristicFunction> hfs,
                          const EnsembleConfig& cfg);

// Scoring step alone, on precomputed (label, normalized confidence) votes.
struct LabelScore {
    LabelId label = 0;
    double score = 0.0;
};
LabelScore score_votes(std::span<const Vote> votes);

}  // namespace streamlabel

#endif  // STREAMLABEL_ENSEMBLE_HPP
