#include "streamlabel/adaptation.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

#include "streamlabel/clustering.hpp"
#include "streamlabel/errors.hpp"

namespace streamlabel {
namespace {

double mean_of_smallest(std::vector<double>& values, std::size_t count) {
    count = std::min(count, values.size());
    if (count == 0) return 0.0;
    std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(count),
                      values.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += values[i];
    return sum / static_cast<double>(count);
}

// Indices of the `q` nearest points to points[i] among `points`, excluding i.
// Ties resolve toward the smaller index.
std::vector<std::size_t> nearest_neighbours(const std::vector<const Vector*>& points, std::size_t i,
                                            std::size_t q) {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (j != i) d.emplace_back(distance(*points[i], *points[j]), j);
    }
    const std::size_t take = std::min(q, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
    std::vector<std::size_t> out;
    out.reserve(take);
    for (std::size_t t = 0; t < take; ++t) out.push_back(d[t].second);
    return out;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

void NoveltyBuffer::evict_expired(std::int64_t current_chunk) {
    std::erase_if(entries, [&](const BufferEntry& e) {
        return current_chunk - e.chunk >= static_cast<std::int64_t>(ttl_chunks);
    });
}

void EngineConfig::validate() const {
    ensemble.validate();
    if (adaptation.q <= 0) throw ConfigError("adaptation: q must be positive");
    if (adaptation.effective_min_cohort() < 2) throw ConfigError("adaptation: min_cohort must be >= 2");
    if (adaptation.check_period <= 0) throw ConfigError("adaptation: check_period must be positive");
    if (adaptation.new_label_k <= 0) throw ConfigError("adaptation: new_label_k must be positive");
    if (adaptation.ttl_chunks <= 0) throw ConfigError("adaptation: ttl_chunks must be positive");
    if (adaptation.effective_max_prototypes(ensemble) < ensemble.num_hf * ensemble.k_per_hf) {
        throw ConfigError("adaptation: max_prototypes is below the initial ensemble size");
    }
}

EngineState initialize_engine(std::span<const Instance> labeled, const EngineConfig& cfg) {
    cfg.validate();
    EngineState state;
    std::set<LabelId> seed;
    for (const auto& inst : labeled) {
        if (inst.true_label) seed.insert(*inst.true_label);
    }
    state.label_space = LabelSpace(std::move(seed));
    state.ensemble = generate_heuristics(labeled, cfg.ensemble);
    state.dim = labeled.empty() ? 0 : labeled.front().features.size();
    for (auto& hf : state.ensemble) {
        for (auto& p : hf.prototypes) p.birth = state.next_birth++;
    }
    state.buffer.ttl_chunks = cfg.adaptation.ttl_chunks;
    return state;
}

Prototype update_prototype(const Prototype& p, std::span<const double> x,
                           std::optional<LabelId> assigned) {
    if (p.centroid.size() != x.size()) throw ContractError("update_prototype: dimension mismatch");
    Prototype out = p;
    const double s = static_cast<double>(p.support);
    for (std::size_t j = 0; j < x.size(); ++j) {
        out.centroid[j] = (s * p.centroid[j] + x[j]) / (s + 1.0);
    }
    out.support = p.support + 1;
    const double d = distance(x, out.centroid);
    out.radius = std::max(p.radius, d);
    out.mean_distance = std::min((p.mean_distance * s + d) / (s + 1.0), out.radius);
    if (assigned) ++out.frequencies[*assigned];
    return out;
}

double qnsc_value(double d_in, double d_out) {
    const double m = std::max(d_in, d_out);
    if (m <= 0.0) return 0.0;
    return (d_out - d_in) / m;
}

std::optional<double> qnsc(const NoveltyBuffer& buffer, std::size_t index,
                           std::span<const HeuristicFunction> ensemble, int q) {
    if (index >= buffer.size()) throw ContractError("qnsc: buffer index out of range");
    if (ensemble.empty() || total_prototypes(ensemble) == 0) throw ContractError("qnsc: empty ensemble");
    const auto qq = static_cast<std::size_t>(q);
    if (buffer.size() < qq + 1) return std::nullopt;
    const Vector& x = buffer.entries[index].instance.features;

    std::vector<double> inner;
    inner.reserve(buffer.size() - 1);
    for (std::size_t j = 0; j < buffer.size(); ++j) {
        if (j != index) inner.push_back(distance(x, buffer.entries[j].instance.features));
    }
    std::vector<double> outer;
    for (const auto& hf : ensemble) {
        for (const auto& p : hf.prototypes) outer.push_back(distance(x, p.centroid));
    }
    const double d_in = mean_of_smallest(inner, qq);
    const double d_out = mean_of_smallest(outer, qq);
    return qnsc_value(d_in, d_out);
}

std::optional<std::vector<std::size_t>> scan_buffer(const EngineState& state,
                                                    const EngineConfig& cfg) {
    const int q = cfg.adaptation.q;
    const auto min_cohort = static_cast<std::size_t>(cfg.adaptation.effective_min_cohort());
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < state.buffer.size(); ++i) {
        const auto score = qnsc(state.buffer, i, state.ensemble, q);
        if (score && *score > 0.0) candidates.push_back(i);
    }
    if (candidates.size() < min_cohort) return std::nullopt;

    std::vector<const Vector*> pts;
    pts.reserve(candidates.size());
    for (auto i : candidates) pts.push_back(&state.buffer.entries[i].instance.features);
    const std::size_t n = pts.size();
    std::vector<std::vector<std::size_t>> knn(n);
    for (std::size_t i = 0; i < n; ++i) {
        knn[i] = nearest_neighbours(pts, i, static_cast<std::size_t>(q));
        std::sort(knn[i].begin(), knn[i].end());
    }
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
        for (auto j : knn[i]) {
            if (j > i && std::binary_search(knn[j].begin(), knn[j].end(), i)) {
                parent[find_root(parent, i)] = find_root(parent, j);
            }
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find_root(parent, i)].push_back(candidates[i]);

    const std::vector<std::size_t>* best = nullptr;
    for (const auto& [root, members] : groups) {
        // members are ascending, so front() is the group's smallest buffer index
        if (best == nullptr || members.size() > best->size() ||
            (members.size() == best->size() && members.front() < best->front())) {
            best = &members;
        }
    }
    if (best == nullptr || best->size() < min_cohort) return std::nullopt;
    return *best;
}

LabelId found_new_label(std::span<const std::size_t> cohort, EngineState& state,
                        const EngineConfig& cfg, std::vector<LabelDecision>* retro) {
    if (cohort.size() < static_cast<std::size_t>(cfg.adaptation.effective_min_cohort())) {
        throw ContractError("found_new_label: cohort smaller than min_cohort");
    }
    const LabelId label = state.label_space.allocate(state.chunk_counter);

    std::vector<LabeledPoint> members;
    members.reserve(cohort.size());
    for (auto idx : cohort) {
        if (idx >= state.buffer.size()) throw ContractError("found_new_label: buffer index out of range");
        members.push_back({state.buffer.entries[idx].instance.features, label});
    }
    ClusteringConfig cc;
    cc.k = std::min<int>(cfg.adaptation.new_label_k, static_cast<int>(members.size()));
    cc.lambda = cfg.ensemble.lambda;
    cc.max_iters = cfg.ensemble.max_iters;
    cc.seed = derive_hf_seed(cfg.ensemble.seed ^ 0xA5A5A5A5ULL, label);
    auto prototypes = impurity_kmeans(members, cc);
    for (auto& hf : state.ensemble) {
        for (const auto& p : prototypes) {
            Prototype copy = p;
            copy.birth = state.next_birth++;
            hf.prototypes.push_back(std::move(copy));
        }
    }

    std::vector<std::size_t> sorted(cohort.begin(), cohort.end());
    std::sort(sorted.begin(), sorted.end());
    if (retro != nullptr) {
        for (auto idx : sorted) {
            LabelDecision d;
            d.instance_id = state.buffer.entries[idx].instance.id;
            d.chunk = state.chunk_counter;
            d.outcome = Outcome::Assigned;
            d.label = label;
            d.score = 1.0;
            d.retroactive = true;
            retro->push_back(std::move(d));
        }
    }
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        state.buffer.entries.erase(state.buffer.entries.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    return label;
}

void enforce_cap(EngineState& state, const EngineConfig& cfg) {
    const auto cap = static_cast<std::size_t>(cfg.adaptation.effective_max_prototypes(cfg.ensemble));
    while (total_prototypes(state.ensemble) > cap) {
        std::map<LabelId, int> carriers;
        for (const auto& hf : state.ensemble) {
            for (const auto& p : hf.prototypes) {
                for (const auto& [label, count] : p.frequencies) {
                    if (count > 0) ++carriers[label];
                }
            }
        }
        using Key = std::tuple<std::int64_t, std::int64_t, int, std::size_t>;
        std::optional<Key> best;
        std::size_t best_hf = 0;
        for (std::size_t h = 0; h < state.ensemble.size(); ++h) {
            const auto& hf = state.ensemble[h];
            if (hf.prototypes.size() <= 1) continue;
            for (std::size_t i = 0; i < hf.prototypes.size(); ++i) {
                const auto& p = hf.prototypes[i];
                const bool sole = std::any_of(p.frequencies.begin(), p.frequencies.end(),
                                              [&](const auto& kv) {
                                                  return kv.second > 0 && carriers[kv.first] == 1;
                                              });
                if (sole) continue;
                Key key{p.support, p.birth, hf.id, i};
                if (!best || key < *best) {
                    best = key;
                    best_hf = h;
                }
            }
        }
        if (!best) {
            throw ConfigError("enforce_cap: cannot reach max_prototypes=" + std::to_string(cap) +
                              " without evicting a label's only prototype");
        }
        auto& protos = state.ensemble[best_hf].prototypes;
        protos.erase(protos.begin() + static_cast<std::ptrdiff_t>(std::get<3>(*best)));
    }
}

std::vector<LabelDecision> process_chunk(const Chunk& chunk, EngineState& state,
                                         const EngineConfig& cfg) {
    if (chunk.index != state.chunk_counter) {
        throw ContractError("process_chunk: expected chunk " + std::to_string(state.chunk_counter) +
                            ", got " + std::to_string(chunk.index));
    }
    for (const auto& inst : chunk.instances) {
        if (inst.features.size() != state.dim) {
            throw ContractError("process_chunk: instance " + std::to_string(inst.id) +
                                " has dimension " + std::to_string(inst.features.size()) +
                                ", expected " + std::to_string(state.dim));
        }
    }
    const double slack = cfg.ensemble.slack;
    std::vector<LabelDecision> out;
    out.reserve(chunk.instances.size());
    // (hf index, prototype index) pairs updated by each instance
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> touched(chunk.instances.size());

    for (std::size_t i = 0; i < chunk.instances.size(); ++i) {
        const auto& inst = chunk.instances[i];
        bool matched = false;
        for (std::size_t h = 0; h < state.ensemble.size(); ++h) {
            auto& hf = state.ensemble[h];
            const auto nearest = nearest_prototype(hf, inst.features);
            auto& p = hf.prototypes[nearest.index];
            if (covers(p, inst.features, slack)) {
                p = update_prototype(p, inst.features, std::nullopt);
                touched[i].emplace_back(h, nearest.index);
                matched = true;
            }
        }
        const auto agg = aggregate(inst.features, state.ensemble, cfg.ensemble);
        LabelDecision d;
        d.instance_id = inst.id;
        d.chunk = chunk.index;
        d.label = agg.best_label;
        d.score = agg.score;
        d.votes = agg.votes;
        if (matched && agg.assigned) {
            d.outcome = Outcome::Assigned;
        } else {
            d.outcome = Outcome::Deferred;
            state.buffer.entries.push_back({inst, chunk.index});
        }
        out.push_back(std::move(d));
    }

    // Barrier: frequency updates only for confirmed labels.
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].outcome != Outcome::Assigned) continue;
        for (const auto& [h, idx] : touched[i]) {
            ++state.ensemble[h].prototypes[idx].frequencies[out[i].label];
        }
    }

    state.buffer.evict_expired(chunk.index);
    if (chunk.index % cfg.adaptation.check_period == 0) {
        while (auto cohort = scan_buffer(state, cfg)) {
            found_new_label(*cohort, state, cfg, &out);
        }
    }
    enforce_cap(state, cfg);
    ++state.chunk_counter;
    state.decisions.insert(state.decisions.end(), out.begin(), out.end());
    return out;
}

}  // namespace streamlabel
