#include "streamlabel/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "streamlabel/errors.hpp"

namespace streamlabel {

LabelSpace::LabelSpace(std::set<LabelId> seed) : seed_(std::move(seed)) {}

bool LabelSpace::contains(LabelId label) const {
    return seed_.count(label) > 0 || is_discovered(label);
}

bool LabelSpace::is_discovered(LabelId label) const {
    return std::any_of(discovered_.begin(), discovered_.end(),
                       [label](const DiscoveredLabel& d) { return d.id == label; });
}

LabelId LabelSpace::allocate(std::int64_t chunk) {
    LabelId next = 0;
    if (!seed_.empty()) next = *seed_.rbegin() + 1;
    if (!discovered_.empty()) next = std::max(next, discovered_.back().id + 1);
    discovered_.push_back({next, chunk});
    return next;
}

std::vector<LabelId> LabelSpace::all_labels() const {
    std::vector<LabelId> out(seed_.begin(), seed_.end());
    for (const auto& d : discovered_) out.push_back(d.id);
    return out;
}

std::int64_t Prototype::labeled_count() const {
    std::int64_t total = 0;
    for (const auto& [label, count] : frequencies) total += count;
    return total;
}

std::optional<LabelId> Prototype::majority_label() const {
    std::optional<LabelId> best;
    std::int64_t best_count = 0;
    // std::map iterates in ascending id order, so strict > keeps the smallest id on ties.
    for (const auto& [label, count] : frequencies) {
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    }
    return best;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ContractError("distance: dimension mismatch (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

NearestResult nearest_prototype(std::span<const Prototype> prototypes, std::span<const double> x) {
    if (prototypes.empty()) throw ContractError("nearest_prototype: empty heuristic function");
    NearestResult best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < prototypes.size(); ++i) {
        const double d = distance(prototypes[i].centroid, x);
        if (d < best.distance) best = {i, d};
    }
    return best;
}

NearestResult nearest_prototype(const HeuristicFunction& hf, std::span<const double> x) {
    return nearest_prototype(std::span<const Prototype>(hf.prototypes), x);
}

bool covers(const Prototype& p, std::span<const double> x, double slack) {
    return distance(p.centroid, x) <= p.radius * (1.0 + slack);
}

std::size_t total_prototypes(std::span<const HeuristicFunction> ensemble) {
    std::size_t n = 0;
    for (const auto& hf : ensemble) n += hf.prototypes.size();
    return n;
}

std::string to_string(Outcome outcome) {
    return outcome == Outcome::Assigned ? "assigned" : "deferred";
}

}  // namespace streamlabel
