#include "streamlabel/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "streamlabel/errors.hpp"

namespace streamlabel {
namespace {

// Portable draws: libstdc++ distributions are not specified bit-for-bit.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = rng() % i;
        std::swap(v[i - 1], v[j]);
    }
}

Instance sample_point(const Vector& center, double sigma, LabelId label, std::int64_t id,
                      std::mt19937_64& rng) {
    Instance inst;
    inst.id = id;
    inst.features.resize(center.size());
    for (std::size_t j = 0; j < center.size(); ++j) inst.features[j] = center[j] + sigma * standard_normal(rng);
    inst.true_label = label;
    return inst;
}

ChunkSnapshot snapshot(const EngineState& state, std::int64_t chunk) {
    ChunkSnapshot s;
    s.chunk = chunk;
    s.buffer_size = state.buffer.size();
    s.total_prototypes = total_prototypes(state.ensemble);
    s.min_hf_prototypes = std::numeric_limits<std::size_t>::max();
    for (const auto& hf : state.ensemble) s.min_hf_prototypes = std::min(s.min_hf_prototypes, hf.prototypes.size());
    if (state.ensemble.empty()) s.min_hf_prototypes = 0;
    s.n_labels = state.label_space.size();
    return s;
}

template <typename F>
std::optional<double> defined(F&& f) {
    try {
        return f();
    } catch (const MetricError&) {
        return std::nullopt;
    }
}

}  // namespace

DatasetSplit split_dataset(const std::vector<Instance>& rows, double known_label_fraction,
                           double dl_du_ratio, std::uint64_t seed) {
    if (!(known_label_fraction > 0.0 && known_label_fraction <= 1.0)) {
        throw ConfigError("known_label_fraction must lie in (0, 1]");
    }
    if (!(dl_du_ratio > 0.0)) throw ConfigError("dl_du_ratio must be positive");
    DatasetSplit out;
    for (const auto& r : rows) {
        if (r.true_label) out.all_labels.insert(*r.true_label);
    }
    if (out.all_labels.size() < 2) {
        throw ConfigError("split needs at least 2 distinct labels, dataset has " +
                          std::to_string(out.all_labels.size()));
    }

    std::mt19937_64 rng(seed);
    std::vector<LabelId> labels(out.all_labels.begin(), out.all_labels.end());
    shuffle(labels, rng);
    const auto n_known = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(known_label_fraction * static_cast<double>(labels.size()) - 1e-9)));
    out.known_labels.insert(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_known));

    const auto n_dl = static_cast<std::size_t>(
        std::llround(static_cast<double>(rows.size()) / (1.0 + 1.0 / dl_du_ratio)));
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].true_label && out.known_labels.count(*rows[i].true_label)) candidates.push_back(i);
    }
    if (candidates.size() < n_dl) {
        throw ConfigError("split needs " + std::to_string(n_dl) + " rows of known labels for D_L, only " +
                          std::to_string(candidates.size()) + " available");
    }
    shuffle(candidates, rng);
    std::vector<bool> in_dl(rows.size(), false);
    for (std::size_t i = 0; i < n_dl; ++i) in_dl[candidates[i]] = true;
    std::sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n_dl));
    for (std::size_t i = 0; i < n_dl; ++i) out.labeled.push_back(rows[candidates[i]]);

    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!in_dl[i]) out.stream.push_back(rows[i]);
    }
    shuffle(out.stream, rng);
    for (std::size_t i = 0; i < out.stream.size(); ++i) out.stream[i].arrival_index = static_cast<std::int64_t>(i);
    return out;
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.dim < 1 || cfg.seed_classes < 1 || cfg.stream_size < 1 || cfg.chunk_size < 1 ||
        cfg.labeled_size < 1 || !(cfg.sigma > 0.0) || !(cfg.box > 0.0)) {
        throw ConfigError("synthetic generator: sizes, sigma and box must be positive");
    }
    const int n_chunks = (cfg.stream_size + cfg.chunk_size - 1) / cfg.chunk_size;
    for (int a : cfg.novel_arrivals) {
        if (a < 0 || a >= n_chunks) throw ConfigError("synthetic generator: novel arrival outside the stream");
    }
    const int n_classes = cfg.seed_classes + static_cast<int>(cfg.novel_arrivals.size());
    std::mt19937_64 rng(cfg.seed);
    SyntheticData out;

    constexpr int kMaxAttempts = 100000;
    int attempts = 0;
    while (static_cast<int>(out.centers.size()) < n_classes) {
        if (++attempts > kMaxAttempts) {
            throw ConfigError("synthetic generator: cannot place centres with the requested separation");
        }
        Vector c(static_cast<std::size_t>(cfg.dim));
        for (auto& v : c) v = cfg.box * uniform01(rng);
        const bool ok = std::all_of(out.centers.begin(), out.centers.end(),
                                    [&](const Vector& o) { return distance(c, o) >= cfg.min_separation; });
        if (ok) out.centers.push_back(std::move(c));
    }

    std::int64_t next_id = 0;
    for (int i = 0; i < cfg.labeled_size; ++i) {
        const auto cls = static_cast<LabelId>(rng() % static_cast<std::uint64_t>(cfg.seed_classes));
        out.labeled.push_back(sample_point(out.centers[static_cast<std::size_t>(cls)], cfg.sigma, cls, next_id++, rng));
        out.labeled.back().arrival_index = i;
    }

    for (std::size_t k = 0; k < cfg.novel_arrivals.size(); ++k) {
        out.novel_arrivals[static_cast<LabelId>(cfg.seed_classes + static_cast<int>(k))] = cfg.novel_arrivals[k];
    }
    for (int i = 0; i < cfg.stream_size; ++i) {
        const int chunk = i / cfg.chunk_size;
        const bool chunk_start = i % cfg.chunk_size == 0;
        std::vector<LabelId> active;
        std::optional<LabelId> forced;
        for (int c = 0; c < cfg.seed_classes; ++c) active.push_back(c);
        for (const auto& [cls, arrival] : out.novel_arrivals) {
            if (arrival <= chunk) active.push_back(cls);
            if (arrival == chunk && chunk_start && !forced) forced = cls;
        }
        const LabelId cls = forced ? *forced : active[rng() % active.size()];
        out.stream.push_back(sample_point(out.centers[static_cast<std::size_t>(cls)], cfg.sigma, cls, next_id++, rng));
        out.stream.back().arrival_index = i;
    }
    return out;
}

std::vector<Chunk> make_chunks(const std::vector<Instance>& stream, int chunk_size) {
    if (chunk_size <= 0) throw ConfigError("chunk_size must be positive");
    std::vector<Chunk> chunks;
    for (std::size_t i = 0; i < stream.size(); i += static_cast<std::size_t>(chunk_size)) {
        Chunk c;
        c.index = static_cast<std::int64_t>(chunks.size());
        const auto end = std::min(stream.size(), i + static_cast<std::size_t>(chunk_size));
        c.instances.assign(stream.begin() + static_cast<std::ptrdiff_t>(i),
                           stream.begin() + static_cast<std::ptrdiff_t>(end));
        chunks.push_back(std::move(c));
    }
    return chunks;
}

RunResult run_labeling(const std::vector<Instance>& labeled, const std::vector<Instance>& stream,
                       const RunConfig& cfg, const ChunkObserver& observer) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    result.state = initialize_engine(labeled, cfg.engine);
    for (const auto& chunk : make_chunks(stream, cfg.chunk_size)) {
        process_chunk(chunk, result.state, cfg.engine);
        const auto snap = snapshot(result.state, chunk.index);
        result.snapshots.push_back(snap);
        result.n_labels.push_back(static_cast<int>(snap.n_labels));
        if (observer) observer(result.state, snap);
    }
    result.decisions = result.state.decisions;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

Evaluation evaluate(const std::vector<LabelDecision>& decisions,
                    const std::map<std::int64_t, LabelId>& truth, const std::set<LabelId>& seed_labels) {
    Evaluation ev;
    ev.tally = build_tally(decisions, truth, seed_labels);
    ev.label_mapping = map_discovered_labels(decisions, truth, seed_labels);
    ev.accuracy = defined([&] { return accuracy(ev.tally); });
    ev.m_new = defined([&] { return m_new(ev.tally); });
    ev.f_new = defined([&] { return f_new(ev.tally); });
    ev.f2 = defined([&] { return f_beta(ev.tally, 2.0); });
    return ev;
}

std::map<LabelId, std::optional<std::int64_t>> discovery_chunks(
    const EngineState& state, const std::map<LabelId, LabelId>& mapping,
    const std::set<LabelId>& novel_classes) {
    std::map<LabelId, std::optional<std::int64_t>> out;
    for (LabelId c : novel_classes) out[c] = std::nullopt;
    for (const auto& d : state.label_space.discovered_labels()) {
        const auto it = mapping.find(d.id);
        if (it == mapping.end() || !novel_classes.count(it->second)) continue;
        auto& slot = out[it->second];
        if (!slot || d.founding_chunk < *slot) slot = d.founding_chunk;
    }
    return out;
}

std::map<std::int64_t, LabelId> truth_of(const std::vector<Instance>& rows) {
    std::map<std::int64_t, LabelId> out;
    for (const auto& r : rows) {
        if (r.true_label) out[r.id] = *r.true_label;
    }
    return out;
}

std::vector<std::string> sweep_axes() { return {"num_hf", "tau", "chunk_size", "k_per_hf"}; }

std::vector<SweepPoint> run_sweep(const std::vector<Instance>& labeled,
                                  const std::vector<Instance>& stream, const RunConfig& base,
                                  const std::string& axis, const std::vector<double>& values,
                                  int repeats) {
    const auto axes = sweep_axes();
    if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
        throw ConfigError("unknown sweep axis '" + axis + "'");
    }
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (repeats < 1) throw ConfigError("sweep repeats must be >= 1");
    const auto truth = truth_of(stream);
    std::vector<SweepPoint> out;
    for (double v : values) {
        RunConfig cfg = base;
        if (axis == "tau") {
            cfg.engine.ensemble.tau = v;
        } else {
            if (v != std::floor(v)) throw ConfigError("sweep axis " + axis + " takes integer values");
            const int iv = static_cast<int>(v);
            if (axis == "num_hf") cfg.engine.ensemble.num_hf = iv;
            else if (axis == "chunk_size") cfg.chunk_size = iv;
            else cfg.engine.ensemble.k_per_hf = iv;
        }
        SweepPoint p;
        p.axis = axis;
        p.value = v;
        p.wall_seconds = std::numeric_limits<double>::infinity();
        for (int r = 0; r < repeats; ++r) {
            auto run = run_labeling(labeled, stream, cfg);
            p.wall_seconds = std::min(p.wall_seconds, run.wall_seconds);
            if (r > 0) continue;
            std::map<std::int64_t, const LabelDecision*> last;
            for (const auto& d : run.decisions) last[d.instance_id] = &d;
            for (const auto& [id, d] : last) {
                if (d->outcome == Outcome::Assigned) ++p.assigned;
                else ++p.deferred;
            }
            p.discovered = run.state.label_space.discovered_labels().size();
            if (!truth.empty()) {
                p.accuracy = evaluate(run.decisions, truth, run.state.label_space.seed_labels()).accuracy;
            }
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace streamlabel
