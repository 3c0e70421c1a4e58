#ifndef STREAMLABEL_PIPELINE_HPP
#define STREAMLABEL_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "streamlabel/adaptation.hpp"
#include "streamlabel/io.hpp"
#include "streamlabel/metrics.hpp"

namespace streamlabel {

struct DatasetSplit {
    std::vector<Instance> labeled;  // D_L
    std::vector<Instance> stream;   // D_U in arrival order
    std::set<LabelId> known_labels;
    std::set<LabelId> all_labels;
};

// Picks ceil(fraction * C) known labels by seed, draws
// |D_L| = round(N / (1 + 1/ratio)) rows of those labels, and shuffles the
// remaining rows into the stream.
DatasetSplit split_dataset(const std::vector<Instance>& rows, double known_label_fraction,
                           double dl_du_ratio, std::uint64_t seed);

struct SyntheticConfig {
    std::uint64_t seed = 0;
    int dim = 2;
    int seed_classes = 3;
    // First chunk in which each novel class appears, in class order.
    std::vector<int> novel_arrivals = {10, 25};
    int stream_size = 1000;
    int chunk_size = 20;
    int labeled_size = 1000;
    double sigma = 0.5;
    double min_separation = 5.0;
    double box = 20.0;
};

struct SyntheticData {
    std::vector<Instance> labeled;
    std::vector<Instance> stream;
    std::vector<Vector> centers;
    // Class id -> first arrival chunk, for novel classes only.
    std::map<LabelId, int> novel_arrivals;
};

// Isotropic Gaussian classes at well separated centres. Seed classes are
// active from chunk 0; a novel class joins the uniform class mix at its
// arrival chunk, whose first instance belongs to it.
SyntheticData generate_synthetic(const SyntheticConfig& cfg);

struct ChunkSnapshot {
    std::int64_t chunk = 0;
    std::size_t buffer_size = 0;
    std::size_t total_prototypes = 0;
    std::size_t min_hf_prototypes = 0;
    std::size_t n_labels = 0;
};

struct RunResult {
    EngineState state;
    std::vector<LabelDecision> decisions;
    std::vector<ChunkSnapshot> snapshots;
    // Labels |Y'| after each chunk.
    std::vector<int> n_labels;
    double wall_seconds = 0.0;
};

using ChunkObserver = std::function<void(const EngineState&, const ChunkSnapshot&)>;

std::vector<Chunk> make_chunks(const std::vector<Instance>& stream, int chunk_size);

RunResult run_labeling(const std::vector<Instance>& labeled, const std::vector<Instance>& stream,
                       const RunConfig& cfg, const ChunkObserver& observer = {});

struct Evaluation {
    EvalTally tally;
    std::optional<double> accuracy;
    std::optional<double> m_new;
    std::optional<double> f_new;
    std::optional<double> f2;
    std::map<LabelId, LabelId> label_mapping;
};

// Metrics that are undefined for the tally (zero denominator) stay empty.
Evaluation evaluate(const std::vector<LabelDecision>& decisions,
                    const std::map<std::int64_t, LabelId>& truth, const std::set<LabelId>& seed_labels);

// Founding chunk of the first discovered label mapped to each novel class
// (empty when never discovered).
std::map<LabelId, std::optional<std::int64_t>> discovery_chunks(
    const EngineState& state, const std::map<LabelId, LabelId>& mapping,
    const std::set<LabelId>& novel_classes);

std::map<std::int64_t, LabelId> truth_of(const std::vector<Instance>& rows);

struct SweepPoint {
    std::string axis;
    double value = 0.0;
    std::size_t assigned = 0;
    std::size_t deferred = 0;
    std::size_t discovered = 0;
    std::optional<double> accuracy;
    double wall_seconds = 0.0;
};

std::vector<std::string> sweep_axes();

// Runs one labeling per value of `axis` (num_hf, tau, chunk_size, k_per_hf);
// wall time is the minimum over `repeats` runs.
std::vector<SweepPoint> run_sweep(const std::vector<Instance>& labeled,
                                  const std::vector<Instance>& stream, const RunConfig& base,
                                  const std::string& axis, const std::vector<double>& values,
                                  int repeats = 1);

}  // namespace streamlabel

#endif  // STREAMLABEL_PIPELINE_HPP
