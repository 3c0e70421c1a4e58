#include "streamlabel/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "streamlabel/errors.hpp"

namespace streamlabel {
namespace {

using LabelCounts = std::map<LabelId, std::int64_t>;

double impurity_from_counts(const LabelCounts& counts) {
    std::int64_t total = 0;
    for (const auto& [label, n] : counts) total += n;
    if (total == 0) return 0.0;
    double diverse = 0.0;
    double entropy = 0.0;
    const double L = static_cast<double>(total);
    for (const auto& [label, n] : counts) {
        if (n == 0) continue;
        const double nl = static_cast<double>(n);
        diverse += nl * (L - nl);
        const double p = nl / L;
        entropy -= p * std::log(p);
    }
    return diverse * entropy;
}

double impurity_with(LabelCounts& counts, LabelId label, std::int64_t delta) {
    counts[label] += delta;
    const double value = impurity_from_counts(counts);
    counts[label] -= delta;
    return value;
}

std::size_t check_dimensions(std::span<const LabeledPoint> points) {
    const std::size_t d = points.empty() ? 0 : points.front().features.size();
    for (const auto& p : points) {
        if (p.features.size() != d) throw ContractError("clustering: non-uniform point dimensions");
    }
    return d;
}

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Vector> update_centroids(std::span<const LabeledPoint> points,
                                     std::span<const int> assignment, std::size_t k,
                                     std::size_t dim, const std::vector<Vector>& previous) {
    std::vector<Vector> sums(k, Vector(dim, 0.0));
    std::vector<std::int64_t> sizes(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = static_cast<std::size_t>(assignment[i]);
        for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i].features[j];
        ++sizes[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) {
            sums[c] = previous[c];
            continue;
        }
        for (auto& v : sums[c]) v /= static_cast<double>(sizes[c]);
    }
    return sums;
}

}  // namespace

double prototype_impurity(std::span<const LabelId> labels) {
    LabelCounts counts;
    for (LabelId l : labels) ++counts[l];
    return impurity_from_counts(counts);
}

LossBreakdown total_loss(std::span<const LabeledPoint> points, std::span<const int> assignment,
                         std::span<const Vector> centroids, double lambda) {
    if (assignment.size() != points.size()) {
        throw ContractError("total_loss: assignment size does not match point count");
    }
    std::vector<LabelCounts> counts(centroids.size());
    LossBreakdown loss;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int c = assignment[i];
        if (c < 0 || static_cast<std::size_t>(c) >= centroids.size()) {
            throw ContractError("total_loss: point " + std::to_string(i) + " is unassigned");
        }
        loss.kmeans += squared_distance(points[i].features, centroids[static_cast<std::size_t>(c)]);
        if (points[i].label) ++counts[static_cast<std::size_t>(c)][*points[i].label];
    }
    for (const auto& cc : counts) loss.impurity += impurity_from_counts(cc);
    loss.total = loss.kmeans + lambda * loss.impurity;
    return loss;
}

Prototype build_prototype(std::span<const LabeledPoint> members) {
    if (members.empty()) throw ContractError("build_prototype: empty member list");
    const std::size_t dim = check_dimensions(members);
    Prototype p;
    p.centroid.assign(dim, 0.0);
    for (const auto& m : members) {
        for (std::size_t j = 0; j < dim; ++j) p.centroid[j] += m.features[j];
        if (m.label) ++p.frequencies[*m.label];
    }
    const double n = static_cast<double>(members.size());
    for (auto& v : p.centroid) v /= n;
    double sum = 0.0;
    for (const auto& m : members) {
        const double d = distance(m.features, p.centroid);
        p.radius = std::max(p.radius, d);
        sum += d;
    }
    // Guard the mean <= max invariant against rounding in the division.
    p.mean_distance = std::min(sum / n, p.radius);
    p.support = static_cast<std::int64_t>(members.size());
    return p;
}

std::vector<Vector> seed_centroids(std::span<const LabeledPoint> points, int k, std::uint64_t seed) {
    if (k <= 0) throw ConfigError("clustering: k must be positive");
    if (points.size() < static_cast<std::size_t>(k)) {
        throw ConfigError("clustering: k=" + std::to_string(k) + " exceeds point count " +
                          std::to_string(points.size()));
    }
    std::mt19937_64 rng(seed);
    const std::size_t n = points.size();
    std::vector<Vector> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    std::vector<bool> chosen(n, false);
    std::size_t first = static_cast<std::size_t>(rng() % n);
    centroids.push_back(points[first].features);
    chosen[first] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i].features, centroids[0]);

    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = unit_uniform(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (d2[i] > 0.0 && acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                for (std::size_t i = n; i-- > 0;) {
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // Every remaining point duplicates a centre; fall back to index order.
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen[pick] = true;
        centroids.push_back(points[pick].features);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points[i].features, centroids.back()));
        }
    }
    return centroids;
}

ClusteringResult impurity_kmeans_traced(std::span<const LabeledPoint> points,
                                        const ClusteringConfig& cfg) {
    if (cfg.max_iters <= 0) throw ConfigError("clustering: max_iters must be positive");
    if (!std::isfinite(cfg.lambda) || cfg.lambda < 0.0) {
        throw ConfigError("clustering: lambda must be finite and non-negative");
    }
    const std::size_t dim = check_dimensions(points);
    ClusteringResult result;
    result.centroids = seed_centroids(points, cfg.k, cfg.seed);
    const auto k = static_cast<std::size_t>(cfg.k);
    const std::size_t n = points.size();
    const double lambda = cfg.lambda;

    std::vector<LabelCounts> counts(k);
    std::vector<std::int64_t> sizes(k, 0);
    auto& assign = result.assignment;
    assign.assign(n, -1);

    // Initial pass: greedy sequential assignment against the seeds.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = points[i];
        double best_cost = std::numeric_limits<double>::infinity();
        std::size_t best = 0;
        for (std::size_t c = 0; c < k; ++c) {
            double cost = squared_distance(x.features, result.centroids[c]);
            if (x.label && lambda > 0.0) {
                cost += lambda * (impurity_with(counts[c], *x.label, 1) - impurity_from_counts(counts[c]));
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = c;
            }
        }
        assign[i] = static_cast<int>(best);
        ++sizes[best];
        if (x.label) ++counts[best][*x.label];
    }

    auto repair_empty = [&]() {
        for (std::size_t e = 0; e < k; ++e) {
            if (sizes[e] > 0) continue;
            double far = -1.0;
            std::size_t donor = n;
            for (std::size_t i = 0; i < n; ++i) {
                const auto c = static_cast<std::size_t>(assign[i]);
                if (sizes[c] < 2) continue;
                const double d = squared_distance(points[i].features, result.centroids[c]);
                if (d > far) {
                    far = d;
                    donor = i;
                }
            }
            if (donor == n) continue;  // unreachable while n >= k
            const auto from = static_cast<std::size_t>(assign[donor]);
            --sizes[from];
            ++sizes[e];
            if (points[donor].label) {
                --counts[from][*points[donor].label];
                ++counts[e][*points[donor].label];
            }
            assign[donor] = static_cast<int>(e);
            result.centroids[e] = points[donor].features;
        }
    };

    // Single moves cannot leave a partition where relabeling a cluster needs two
    // points to trade places, so at lambda > 0 a converged sweep is followed by
    // a pass over pairwise swaps of differently labeled points, evaluated with
    // exact centroid updates. Each accepted swap strictly lowers the total loss.
    auto exchange_pass = [&]() {
        bool swapped = false;
        for (std::size_t a = 0; a < n; ++a) {
            if (!points[a].label) continue;
            const auto ci = static_cast<std::size_t>(assign[a]);
            const double imp_i = impurity_from_counts(counts[ci]);
            if (imp_i <= 0.0) continue;
            const LabelId la = *points[a].label;
            const double si = static_cast<double>(sizes[ci]);
            const double xa_i = squared_distance(points[a].features, result.centroids[ci]);
            double best_delta = -1e-12 * std::max(1.0, result.loss_history.back().total);
            std::size_t best = n;
            for (std::size_t b = 0; b < n; ++b) {
                if (!points[b].label || *points[b].label == la) continue;
                const auto cj = static_cast<std::size_t>(assign[b]);
                if (cj == ci) continue;
                const LabelId lb = *points[b].label;
                const double sj = static_cast<double>(sizes[cj]);
                const double xy = squared_distance(points[a].features, points[b].features);
                double delta = -xa_i + squared_distance(points[b].features, result.centroids[ci]) - xy / si -
                               squared_distance(points[b].features, result.centroids[cj]) +
                               squared_distance(points[a].features, result.centroids[cj]) - xy / sj;
                --counts[ci][la];
                const double new_i = impurity_with(counts[ci], lb, 1);
                ++counts[ci][la];
                --counts[cj][lb];
                const double new_j = impurity_with(counts[cj], la, 1);
                ++counts[cj][lb];
                delta += lambda * (new_i - imp_i + new_j - impurity_from_counts(counts[cj]));
                if (delta < best_delta) {
                    best_delta = delta;
                    best = b;
                }
            }
            if (best == n) continue;
            const auto cj = static_cast<std::size_t>(assign[best]);
            const LabelId lb = *points[best].label;
            for (std::size_t d = 0; d < dim; ++d) {
                const double shift = points[best].features[d] - points[a].features[d];
                result.centroids[ci][d] += shift / si;
                result.centroids[cj][d] -= shift / static_cast<double>(sizes[cj]);
            }
            --counts[ci][la];
            ++counts[ci][lb];
            --counts[cj][lb];
            ++counts[cj][la];
            assign[a] = static_cast<int>(cj);
            assign[best] = static_cast<int>(ci);
            swapped = true;
        }
        return swapped;
    };

    repair_empty();
    result.centroids = update_centroids(points, assign, k, dim, result.centroids);
    result.loss_history.push_back(total_loss(points, assign, result.centroids, lambda));
    result.iterations = 1;

    while (result.iterations < cfg.max_iters) {
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& x = points[i];
            const auto current = static_cast<std::size_t>(assign[i]);
            double stay = squared_distance(x.features, result.centroids[current]);
            if (x.label && lambda > 0.0) {
                stay += lambda * (impurity_from_counts(counts[current]) -
                                  impurity_with(counts[current], *x.label, -1));
            }
            double best_cost = std::numeric_limits<double>::infinity();
            std::size_t best = current;
            for (std::size_t c = 0; c < k; ++c) {
                if (c == current) continue;
                double cost = squared_distance(x.features, result.centroids[c]);
                if (x.label && lambda > 0.0) {
                    cost += lambda * (impurity_with(counts[c], *x.label, 1) -
                                      impurity_from_counts(counts[c]));
                }
                if (cost < best_cost) {
                    best_cost = cost;
                    best = c;
                }
            }
            if (best != current && best_cost < stay) {
                assign[i] = static_cast<int>(best);
                --sizes[current];
                ++sizes[best];
                if (x.label) {
                    --counts[current][*x.label];
                    ++counts[best][*x.label];
                }
                moved = true;
            }
        }
        if (!moved && !(lambda > 0.0 && exchange_pass())) {
            result.converged = true;
            break;
        }
        repair_empty();
        result.centroids = update_centroids(points, assign, k, dim, result.centroids);
        result.loss_history.push_back(total_loss(points, assign, result.centroids, lambda));
        ++result.iterations;
    }

    std::vector<std::vector<LabeledPoint>> members(k);
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(assign[i])].push_back(points[i]);
    result.prototypes.reserve(k);
    for (const auto& m : members) {
        if (!m.empty()) result.prototypes.push_back(build_prototype(m));
    }
    return result;
}

std::vector<Prototype> impurity_kmeans(std::span<const LabeledPoint> points,
                                       const ClusteringConfig& cfg) {
    return impurity_kmeans_traced(points, cfg).prototypes;
}

}  // namespace streamlabel
