#ifndef STREAMLABEL_ADAPTATION_HPP
#define STREAMLABEL_ADAPTATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "streamlabel/core.hpp"
#include "streamlabel/ensemble.hpp"

namespace streamlabel {

struct BufferEntry {
    Instance instance;
    std::int64_t chunk = 0;
};

struct NoveltyBuffer {
    std::vector<BufferEntry> entries;
    int ttl_chunks = 50;

    std::size_t size() const { return entries.size(); }
    // Drops entries inserted `ttl_chunks` or more chunks before `current_chunk`.
    void evict_expired(std::int64_t current_chunk);
};

struct AdaptationConfig {
    int q = 5;
    // 0 means "same as q".
    int min_cohort = 0;
    int check_period = 1;
    // 0 means num_hf * k_per_hf * 2.
    int max_prototypes = 0;
    int new_label_k = 3;
    int ttl_chunks = 50;

    int effective_min_cohort() const { return min_cohort > 0 ? min_cohort : q; }
    int effective_max_prototypes(const EnsembleConfig& ens) const {
        return max_prototypes > 0 ? max_prototypes : ens.num_hf * ens.k_per_hf * 2;
    }
};

struct EngineConfig {
    EnsembleConfig ensemble;
    AdaptationConfig adaptation;

    void validate() const;
};

struct EngineState {
    LabelSpace label_space;
    std::vector<HeuristicFunction> ensemble;
    NoveltyBuffer buffer;
    std::int64_t chunk_counter = 0;
    std::size_t dim = 0;
    std::int64_t next_birth = 0;
    std::vector<LabelDecision> decisions;
};

// Builds the ensemble from D_L and the seed label space from D_L's labels.
EngineState initialize_engine(std::span<const Instance> labeled, const EngineConfig& cfg);

// Running-mean update of one prototype with x. Frequencies change only when
// `assigned` is present.
Prototype update_prototype(const Prototype& p, std::span<const double> x,
                           std::optional<LabelId> assigned);

// (d_out - d_in) / max(d_out, d_in), 0 when both are 0.
double qnsc_value(double d_in, double d_out);

// q-NSC of buffer entry `index`. Empty ("not ready") when the buffer holds
// fewer than q other entries.
std::optional<double> qnsc(const NoveltyBuffer& buffer, std::size_t index,
                           std::span<const HeuristicFunction> ensemble, int q);

// Buffer indices of the largest mutually q-NN-connected group of positive
// q-NSC entries, when it reaches the minimum cohort size.
std::optional<std::vector<std::size_t>> scan_buffer(const EngineState& state,
                                                    const EngineConfig& cfg);

// Allocates a new label, seeds prototypes for it in every heuristic function,
// removes the cohort from the buffer and returns retroactive decisions for it.
LabelId found_new_label(std::span<const std::size_t> cohort, EngineState& state,
                        const EngineConfig& cfg, std::vector<LabelDecision>* retro = nullptr);

void enforce_cap(EngineState& state, const EngineConfig& cfg);

std::vector<LabelDecision> process_chunk(const Chunk& chunk, EngineState& state,
                                         const EngineConfig& cfg);

}  // namespace streamlabel

#endif  // STREAMLABEL_ADAPTATION_HPP
