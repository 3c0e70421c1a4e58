#ifndef STREAMLABEL_CLUSTERING_HPP
#define STREAMLABEL_CLUSTERING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "streamlabel/core.hpp"

namespace streamlabel {

struct LabeledPoint {
    Vector features;
    std::optional<LabelId> label;
};

struct ClusteringConfig {
    int k = 40;
    double lambda = 1.0;
    int max_iters = 100;
    std::uint64_t seed = 0;
};

struct LossBreakdown {
    double kmeans = 0.0;
    double impurity = 0.0;
    double total = 0.0;
};

// Full trace of one impurity_kmeans run.
struct ClusteringResult {
    std::vector<int> assignment;
    std::vector<Vector> centroids;
    std::vector<Prototype> prototypes;
    // Loss after each completed iteration (assignment + update).
    std::vector<LossBreakdown> loss_history;
    int iterations = 0;
    bool converged = false;
};

// Label_diverse * Entropy over the labels of a cluster's labeled members.
// Label_diverse = sum over members of |L| - |L_l|; entropy uses the natural log.
double prototype_impurity(std::span<const LabelId> labels);

LossBreakdown total_loss(std::span<const LabeledPoint> points, std::span<const int> assignment,
                         std::span<const Vector> centroids, double lambda);

Prototype build_prototype(std::span<const LabeledPoint> members);

// Seeding used by impurity_kmeans: first centre drawn uniformly, the rest by
// D^2 sampling. Exposed so reference implementations can share it.
std::vector<Vector> seed_centroids(std::span<const LabeledPoint> points, int k, std::uint64_t seed);

ClusteringResult impurity_kmeans_traced(std::span<const LabeledPoint> points,
                                        const ClusteringConfig& cfg);

std::vector<Prototype> impurity_kmeans(std::span<const LabeledPoint> points,
                                       const ClusteringConfig& cfg);

}  // namespace streamlabel

#endif  // STREAMLABEL_CLUSTERING_HPP
