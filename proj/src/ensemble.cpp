#include "streamlabel/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "streamlabel/clustering.hpp"
#include "streamlabel/errors.hpp"

namespace streamlabel {

void EnsembleConfig::validate() const {
    if (num_hf <= 0) throw ConfigError("ensemble: num_hf must be positive");
    if (k_per_hf <= 0) throw ConfigError("ensemble: k_per_hf must be positive");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("ensemble: tau must lie in [0, 1]");
    if (!(slack >= 0.0) || !std::isfinite(slack)) throw ConfigError("ensemble: slack must be >= 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("ensemble: lambda must be >= 0");
}

std::uint64_t derive_hf_seed(std::uint64_t ensemble_seed, int hf_index) {
    // splitmix64 step keyed by the HF index
    std::uint64_t z = ensemble_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(hf_index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<HeuristicFunction> generate_heuristics(std::span<const Instance> labeled,
                                                   const EnsembleConfig& cfg) {
    cfg.validate();
    if (labeled.size() < static_cast<std::size_t>(cfg.k_per_hf)) {
        throw ConfigError("generate_heuristics: " + std::to_string(labeled.size()) +
                          " labeled rows, need at least k_per_hf=" + std::to_string(cfg.k_per_hf));
    }
    std::vector<LabeledPoint> base;
    base.reserve(labeled.size());
    for (const auto& inst : labeled) {
        if (!inst.true_label) throw ContractError("generate_heuristics: labeled row without a label");
        base.push_back({inst.features, inst.true_label});
    }

    std::vector<HeuristicFunction> hfs;
    hfs.reserve(static_cast<std::size_t>(cfg.num_hf));
    for (int h = 0; h < cfg.num_hf; ++h) {
        const std::uint64_t seed = derive_hf_seed(cfg.seed, h);
        std::vector<LabeledPoint> sample;
        if (cfg.bootstrap) {
            std::mt19937_64 rng(seed);
            sample.reserve(base.size());
            for (std::size_t i = 0; i < base.size(); ++i) sample.push_back(base[rng() % base.size()]);
        } else {
            sample = base;
        }
        ClusteringConfig cc{cfg.k_per_hf, cfg.lambda, cfg.max_iters, seed};
        HeuristicFunction hf;
        hf.id = h;
        hf.rng_seed = seed;
        hf.prototypes = impurity_kmeans(sample, cc);
        hfs.push_back(std::move(hf));
    }
    return hfs;
}

HfVote hf_label(const HeuristicFunction& hf, std::span<const double> x) {
    const auto nearest = nearest_prototype(hf, x);
    const Prototype& p = hf.prototypes[nearest.index];
    HfVote vote;
    vote.prototype_index = nearest.index;
    vote.distance = nearest.distance;
    vote.label = p.majority_label();
    if (!vote.label) return vote;
    const double purity = static_cast<double>(p.frequencies.at(*vote.label)) /
                          static_cast<double>(p.labeled_count());
    vote.raw_confidence = (p.radius - nearest.distance) * purity;
    return vote;
}

std::vector<double> normalize_confidences(std::span<const double> raw) {
    std::vector<double> out(raw.size(), 0.0);
    double top = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = std::max(raw[i], 0.0);
        top = std::max(top, out[i]);
    }
    if (top <= 0.0) return std::vector<double>(raw.size(), 0.0);
    for (auto& v : out) v /= top;
    return out;
}

bool ensemble_covers(std::span<const HeuristicFunction> hfs, std::span<const double> x,
                     double slack) {
    for (const auto& hf : hfs) {
        for (const auto& p : hf.prototypes) {
            if (covers(p, x, slack)) return true;
        }
    }
    return false;
}

LabelScore score_votes(std::span<const Vote> votes) {
    std::map<LabelId, double> mass;
    double denom = 0.0;
    for (const auto& v : votes) {
        mass[v.label] += v.normalized_confidence;
        denom += v.normalized_confidence;
    }
    LabelScore best;
    bool have = false;
    for (const auto& [label, m] : mass) {
        const double s = denom > 0.0 ? m / denom : 0.0;
        if (!have || s > best.score) {
            best = {label, s};
            have = true;
        }
    }
    return best;
}

AggregateResult aggregate(std::span<const double> x, std::span<const HeuristicFunction> hfs,
                          const EnsembleConfig& cfg) {
    if (hfs.empty()) throw ContractError("aggregate: empty ensemble");
    AggregateResult result;
    result.covered = ensemble_covers(hfs, x, cfg.slack);

    std::vector<double> raw;
    for (const auto& hf : hfs) {
        const HfVote v = hf_label(hf, x);
        if (!v.label) continue;
        result.votes.push_back({hf.id, *v.label, v.raw_confidence, 0.0});
        raw.push_back(v.raw_confidence);
    }
    if (!raw.empty()) {
        const auto norm = normalize_confidences(raw);
        for (std::size_t i = 0; i < norm.size(); ++i) result.votes[i].normalized_confidence = norm[i];
        const LabelScore best = score_votes(result.votes);
        result.best_label = best.label;
        result.score = best.score;
    }
    result.assigned = result.covered && !result.votes.empty() && result.score >= cfg.tau;
    return result;
}

}  // namespace streamlabel
