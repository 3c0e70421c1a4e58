#ifndef STREAMLABEL_CORE_HPP
#define STREAMLABEL_CORE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace streamlabel {

using Vector = std::vector<double>;
using LabelId = int;

struct Instance {
    std::int64_t id = 0;
    Vector features;
    // Ground truth for scoring only; the engine never reads it.
    std::optional<LabelId> true_label;
    std::int64_t arrival_index = 0;
};

struct DiscoveredLabel {
    LabelId id = 0;
    std::int64_t founding_chunk = 0;
};

// Y (seed labels) plus the labels discovered while streaming.
class LabelSpace {
public:
    LabelSpace() = default;
    explicit LabelSpace(std::set<LabelId> seed);

    const std::set<LabelId>& seed_labels() const { return seed_; }
    const std::vector<DiscoveredLabel>& discovered_labels() const { return discovered_; }

    bool contains(LabelId label) const;
    bool is_discovered(LabelId label) const;
    std::size_t size() const { return seed_.size() + discovered_.size(); }

    // Allocates max(Y') + 1 and records it as discovered at `chunk`.
    LabelId allocate(std::int64_t chunk);

    std::vector<LabelId> all_labels() const;

private:
    std::set<LabelId> seed_;
    std::vector<DiscoveredLabel> discovered_;
};

struct Prototype {
    Vector centroid;
    double radius = 0.0;
    double mean_distance = 0.0;
    std::int64_t support = 0;
    // Labeled-member counts; unlabeled members are counted in `support` only.
    std::map<LabelId, std::int64_t> frequencies;
    // Creation sequence number; smaller is older. Used for eviction ties.
    std::int64_t birth = 0;

    std::int64_t labeled_count() const;
    // Majority label, ties toward the smallest id. Empty when no labeled members.
    std::optional<LabelId> majority_label() const;
};

struct HeuristicFunction {
    int id = 0;
    std::vector<Prototype> prototypes;
    std::uint64_t rng_seed = 0;
};

struct Chunk {
    std::int64_t index = 0;
    std::vector<Instance> instances;
};

struct Vote {
    int hf_id = 0;
    LabelId label = 0;
    double raw_confidence = 0.0;
    double normalized_confidence = 0.0;
};

enum class Outcome { Assigned, Deferred };

struct LabelDecision {
    std::int64_t instance_id = 0;
    std::int64_t chunk = 0;
    Outcome outcome = Outcome::Deferred;
    // Meaningful only when Assigned.
    LabelId label = 0;
    double score = 0.0;
    std::vector<Vote> votes;
    // Set for buffer members labeled when their cohort founded a new label.
    bool retroactive = false;
};

struct NearestResult {
    std::size_t index = 0;
    double distance = 0.0;
};

// Euclidean distance. Throws ContractError on dimension mismatch.
double distance(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

// Nearest centroid; ties go to the lowest prototype index.
NearestResult nearest_prototype(const HeuristicFunction& hf, std::span<const double> x);
NearestResult nearest_prototype(std::span<const Prototype> prototypes, std::span<const double> x);

// distance(x, c) <= r * (1 + slack)
bool covers(const Prototype& p, std::span<const double> x, double slack);

std::size_t total_prototypes(std::span<const HeuristicFunction> ensemble);

std::string to_string(Outcome outcome);

}  // namespace streamlabel

#endif  // STREAMLABEL_CORE_HPP
