#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "streamlabel/adaptation.hpp"
#include "streamlabel/errors.hpp"
#include "streamlabel/pipeline.hpp"

using namespace streamlabel;

namespace {

Prototype make_proto(Vector c, double r, std::map<LabelId, std::int64_t> f, std::int64_t support,
                     std::int64_t birth = 0) {
    Prototype p;
    p.centroid = std::move(c);
    p.radius = r;
    p.mean_distance = r / 2;
    p.frequencies = std::move(f);
    p.support = support;
    p.birth = birth;
    return p;
}

Instance inst(std::int64_t id, Vector x) {
    Instance i;
    i.id = id;
    i.features = std::move(x);
    return i;
}

// A hand-built engine: `num_hf` identical HFs holding the given prototypes.
EngineState manual_state(const std::vector<Prototype>& protos, int num_hf, std::set<LabelId> seed) {
    EngineState s;
    s.label_space = LabelSpace(std::move(seed));
    for (int h = 0; h < num_hf; ++h) {
        HeuristicFunction hf;
        hf.id = h;
        hf.prototypes = protos;
        s.ensemble.push_back(hf);
    }
    s.dim = protos.front().centroid.size();
    s.next_birth = 1000;
    return s;
}

EngineConfig small_config(int num_hf, int k) {
    EngineConfig cfg;
    cfg.ensemble.num_hf = num_hf;
    cfg.ensemble.k_per_hf = k;
    return cfg;
}

}  // namespace

TEST_CASE("update_prototype examples") {
    const auto p = make_proto({0, 0}, 1, {{0, 1}}, 1);
    auto u = update_prototype(p, Vector{0, 0}, 0);
    CHECK(u.centroid == Vector{0, 0});
    CHECK(u.support == 2);
    CHECK(u.radius == 1.0);
    CHECK(u.mean_distance == doctest::Approx(0.25));
    CHECK(u.frequencies.at(0) == 2);

    u = update_prototype(p, Vector{0.5, 0}, std::nullopt);
    CHECK(u.support == 2);
    CHECK(u.frequencies.at(0) == 1);
    CHECK(u.centroid[0] == doctest::Approx(0.25));

    Prototype q = make_proto({1, 1}, 2, {}, 4);
    q.mean_distance = 1.5;
    double last_mu = q.mean_distance;
    for (int i = 0; i < 20; ++i) {
        q = update_prototype(q, q.centroid, std::nullopt);
        CHECK(q.radius == 2.0);
        CHECK(q.mean_distance <= last_mu);
        last_mu = q.mean_distance;
    }
}

TEST_CASE("qnsc_value examples and range") {
    CHECK(qnsc_value(1.0, 4.0) == doctest::Approx(0.75));
    CHECK(qnsc_value(2.0, 1.0) == doctest::Approx(-0.5));
    CHECK(qnsc_value(3.0, 3.0) == 0.0);
    CHECK(qnsc_value(0.0, 0.0) == 0.0);
    for (double a = 0.0; a < 5.0; a += 0.37) {
        for (double b = 0.0; b < 5.0; b += 0.41) {
            const double v = qnsc_value(a, b);
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("qnsc on a buffer: hand example and not-ready signal") {
    // x at origin; two buffer neighbours at distance 1; centroids at distances 3 and 5.
    auto state = manual_state({make_proto({3, 0}, 0.5, {{0, 1}}, 1), make_proto({0, 5}, 0.5, {{0, 1}}, 1)}, 1, {0});
    state.buffer.entries = {{inst(0, {0, 0}), 0}, {inst(1, {1, 0}), 0}, {inst(2, {-1, 0}), 0}};
    const auto v = qnsc(state.buffer, 0, state.ensemble, 2);
    REQUIRE(v.has_value());
    CHECK(*v == doctest::Approx(0.75));
    CHECK_FALSE(qnsc(state.buffer, 0, state.ensemble, 3).has_value());
}

TEST_CASE("scan_buffer examples") {
    const auto protos = std::vector<Prototype>{make_proto({0, 0}, 1, {{0, 5}}, 5)};
    EngineConfig cfg = small_config(1, 1);

    SUBCASE("one tight blob far from every prototype") {
        auto s = manual_state(protos, 1, {0});
        for (int i = 0; i < 10; ++i) s.buffer.entries.push_back({inst(i, {50 + 0.1 * (i % 4), 50 + 0.1 * (i / 4)}), 0});
        const auto cohort = scan_buffer(s, cfg);
        REQUIRE(cohort.has_value());
        CHECK(cohort->size() == 10);
    }
    SUBCASE("scattered singletons near prototypes") {
        auto s = manual_state(protos, 1, {0});
        for (int i = 0; i < 10; ++i) {
            const double a = 0.628 * i;
            s.buffer.entries.push_back({inst(i, {40 * std::cos(a) + 0.2 * std::cos(a), 40 * std::sin(a)}), 0});
        }
        // Each point sits next to its own prototype and far from the other points.
        std::vector<Prototype> near;
        for (const auto& e : s.buffer.entries) near.push_back(make_proto(e.instance.features, 0.1, {{0, 1}}, 1));
        for (int i = 0; i < 10; ++i) {
            near.push_back(make_proto({s.buffer.entries[i].instance.features[0] + 0.05, s.buffer.entries[i].instance.features[1]}, 0.1, {{0, 1}}, 1));
        }
        s.ensemble[0].prototypes = near;
        CHECK_FALSE(scan_buffer(s, cfg).has_value());
    }
    SUBCASE("two blobs of 6 and 3 with min_cohort 5") {
        auto s = manual_state(protos, 1, {0});
        cfg.adaptation.q = 2;
        cfg.adaptation.min_cohort = 5;
        for (int i = 0; i < 6; ++i) s.buffer.entries.push_back({inst(i, {50 + 0.1 * i, 50}), 0});
        for (int i = 0; i < 3; ++i) s.buffer.entries.push_back({inst(10 + i, {-50 + 0.1 * i, 50}), 0});
        const auto cohort = scan_buffer(s, cfg);
        REQUIRE(cohort.has_value());
        CHECK(*cohort == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    }
}

TEST_CASE("found_new_label examples") {
    const auto protos = std::vector<Prototype>{make_proto({0, 0}, 1, {{0, 5}}, 5)};
    const EngineConfig cfg = small_config(3, 1);

    auto s = manual_state(protos, 3, {0});
    for (int i = 0; i < 10; ++i) s.buffer.entries.push_back({inst(i, {20 + 0.2 * (i % 5), 20 + 0.2 * (i / 5)}), 0});
    std::vector<std::size_t> cohort(10);
    for (std::size_t i = 0; i < 10; ++i) cohort[i] = i;
    std::vector<LabelDecision> retro;
    const LabelId l = found_new_label(cohort, s, cfg, &retro);
    CHECK(l == 1);
    CHECK(s.label_space.size() == 2);
    for (const auto& hf : s.ensemble) CHECK(hf.prototypes.size() == 4);
    CHECK(s.buffer.size() == 0);
    CHECK(retro.size() == 10);
    for (const auto& d : retro) {
        CHECK(d.retroactive);
        CHECK(d.label == l);
    }
    // Instances from the cohort's distribution, strictly inside the new pure
    // prototypes: every HF votes for the new label.
    int probes = 0;
    for (std::size_t i = 1; i < s.ensemble[0].prototypes.size(); ++i) {
        const auto& p = s.ensemble[0].prototypes[i];
        if (p.radius <= 0.0) continue;
        for (double f : {0.0, 0.5}) {
            const Vector x{p.centroid[0] + f * p.radius, p.centroid[1]};
            const auto r = aggregate(x, s.ensemble, cfg.ensemble);
            if (nearest_prototype(s.ensemble[0], x).index != i) continue;
            ++probes;
            CHECK(r.assigned);
            CHECK(r.best_label == l);
            CHECK(r.score == doctest::Approx(1.0));
        }
    }
    CHECK(probes > 0);
    // A member on a prototype boundary has zero confidence in every HF; with a
    // zero denominator the score is 0 and the instance is deferred.
    const auto& edge = s.ensemble[0].prototypes.back();
    const Vector on_edge{edge.centroid[0], edge.centroid[1] + edge.radius};
    if (nearest_prototype(s.ensemble[0], on_edge).index == s.ensemble[0].prototypes.size() - 1) {
        const auto r = aggregate(on_edge, s.ensemble, cfg.ensemble);
        CHECK(r.score == 0.0);
        CHECK_FALSE(r.assigned);
    }

    auto s2 = manual_state(protos, 3, {0});
    EngineConfig cfg2 = cfg;
    cfg2.adaptation.min_cohort = 2;
    s2.buffer.entries = {{inst(0, {9, 9}), 0}, {inst(1, {9.5, 9}), 0}};
    found_new_label(std::vector<std::size_t>{0, 1}, s2, cfg2);
    for (const auto& hf : s2.ensemble) CHECK(hf.prototypes.size() == 3);
}

TEST_CASE("enforce_cap examples") {
    EngineConfig cfg = small_config(1, 3);
    SUBCASE("at the cap nothing is evicted") {
        cfg.adaptation.max_prototypes = 3;
        auto s = manual_state({make_proto({0, 0}, 1, {{0, 1}}, 1), make_proto({1, 0}, 1, {{0, 1}}, 2),
                               make_proto({2, 0}, 1, {{0, 1}}, 3)},
                              1, {0});
        enforce_cap(s, cfg);
        CHECK(s.ensemble[0].prototypes.size() == 3);
    }
    SUBCASE("two over the cap drops the two smallest supports") {
        cfg.adaptation.max_prototypes = 3;
        auto s = manual_state({make_proto({0, 0}, 1, {{0, 1}}, 9), make_proto({1, 0}, 1, {{0, 1}}, 2),
                               make_proto({2, 0}, 1, {{0, 1}}, 7), make_proto({3, 0}, 1, {{0, 1}}, 1),
                               make_proto({4, 0}, 1, {{0, 1}}, 5)},
                              1, {0});
        enforce_cap(s, cfg);
        std::vector<std::int64_t> supports;
        for (const auto& p : s.ensemble[0].prototypes) supports.push_back(p.support);
        CHECK(supports == std::vector<std::int64_t>{9, 7, 5});
    }
    SUBCASE("a label's only carrier is skipped") {
        cfg.adaptation.max_prototypes = 3;
        auto s = manual_state({make_proto({0, 0}, 1, {{1, 1}}, 1), make_proto({1, 0}, 1, {{0, 1}}, 2),
                               make_proto({2, 0}, 1, {{0, 1}}, 7), make_proto({3, 0}, 1, {{0, 1}}, 8)},
                              1, {0, 1});
        enforce_cap(s, cfg);
        REQUIRE(s.ensemble[0].prototypes.size() == 3);
        CHECK(s.ensemble[0].prototypes[0].frequencies.count(1) == 1);
        CHECK(s.ensemble[0].prototypes[1].support == 7);
    }
    SUBCASE("support ties evict the oldest first") {
        cfg.adaptation.max_prototypes = 3;
        auto s = manual_state({make_proto({0, 0}, 1, {{0, 1}}, 2, 5), make_proto({1, 0}, 1, {{0, 1}}, 2, 1),
                               make_proto({2, 0}, 1, {{0, 1}}, 2, 3), make_proto({3, 0}, 1, {{0, 1}}, 4, 0)},
                              1, {0});
        enforce_cap(s, cfg);
        for (const auto& p : s.ensemble[0].prototypes) CHECK(p.birth != 1);
    }
    SUBCASE("unsatisfiable cap is a configuration error") {
        cfg.adaptation.max_prototypes = 3;
        auto s = manual_state({make_proto({0, 0}, 1, {{0, 1}}, 1), make_proto({1, 0}, 1, {{1, 1}}, 2),
                               make_proto({2, 0}, 1, {{2, 1}}, 7), make_proto({3, 0}, 1, {{3, 1}}, 8)},
                              1, {0, 1, 2, 3});
        CHECK_THROWS_AS(enforce_cap(s, cfg), ConfigError);
    }
}

TEST_CASE("process_chunk examples") {
    const auto protos = std::vector<Prototype>{make_proto({0, 0}, 1, {{0, 5}}, 5), make_proto({10, 0}, 1, {{1, 5}}, 5)};
    const EngineConfig cfg = small_config(3, 2);

    SUBCASE("instances at pure prototype centroids are assigned") {
        auto s = manual_state(protos, 3, {0, 1});
        Chunk c{0, {inst(0, {0, 0}), inst(1, {10, 0}), inst(2, {0, 0})}};
        const auto out = process_chunk(c, s, cfg);
        REQUIRE(out.size() == 3);
        CHECK(out[0].outcome == Outcome::Assigned);
        CHECK(out[0].label == 0);
        CHECK(out[1].label == 1);
        CHECK(s.buffer.size() == 0);
        CHECK(s.chunk_counter == 1);
        // Frequencies grow only after the barrier, for confirmed labels.
        CHECK(s.ensemble[0].prototypes[0].frequencies.at(0) == 7);
    }
    SUBCASE("far instances are deferred into the buffer") {
        auto s = manual_state(protos, 3, {0, 1});
        Chunk c{0, {inst(0, {100, 100}), inst(1, {-100, 40}), inst(2, {70, -90})}};
        const auto out = process_chunk(c, s, cfg);
        for (const auto& d : out) CHECK(d.outcome == Outcome::Deferred);
        CHECK(s.buffer.size() == 3);
    }
    SUBCASE("contract violations") {
        auto s = manual_state(protos, 3, {0, 1});
        CHECK_THROWS_AS(process_chunk(Chunk{1, {inst(0, {0, 0})}}, s, cfg), ContractError);
        CHECK_THROWS_AS(process_chunk(Chunk{0, {inst(0, {0, 0, 0})}}, s, cfg), ContractError);
    }
}

TEST_CASE("buffer TTL eviction") {
    NoveltyBuffer b;
    b.ttl_chunks = 3;
    b.entries = {{inst(0, {0}), 0}, {inst(1, {0}), 1}, {inst(2, {0}), 2}};
    b.evict_expired(3);
    CHECK(b.size() == 2);
    b.evict_expired(5);
    CHECK(b.size() == 0);
}

TEST_CASE("engine invariants over a planted-novelty stream") {
    SyntheticConfig sc;
    sc.seed = 2;
    sc.stream_size = 600;
    sc.labeled_size = 600;
    sc.novel_arrivals = {5};
    const auto data = generate_synthetic(sc);
    RunConfig rc;
    rc.seed = 2;
    rc.engine.ensemble.seed = 2;
    const auto cap = static_cast<std::size_t>(rc.engine.adaptation.effective_max_prototypes(rc.engine.ensemble));
    std::size_t last_labels = 0;
    const auto run = run_labeling(data.labeled, data.stream, rc, [&](const EngineState& st, const ChunkSnapshot& snap) {
        CHECK(snap.total_prototypes <= cap);
        CHECK(snap.buffer_size <= static_cast<std::size_t>(rc.engine.adaptation.ttl_chunks * rc.chunk_size));
        CHECK(snap.n_labels >= last_labels);
        last_labels = snap.n_labels;
        for (const auto& e : st.buffer.entries) CHECK(snap.chunk - e.chunk < rc.engine.adaptation.ttl_chunks);
    });
    CHECK(run.state.label_space.discovered_labels().size() >= 1);
    const auto& disc = run.state.label_space.discovered_labels();
    for (std::size_t i = 1; i < disc.size(); ++i) CHECK(disc[i].id > disc[i - 1].id);

    const auto again = run_labeling(data.labeled, data.stream, rc);
    REQUIRE(again.decisions.size() == run.decisions.size());
    for (std::size_t i = 0; i < run.decisions.size(); ++i) {
        CHECK(again.decisions[i].instance_id == run.decisions[i].instance_id);
        CHECK(again.decisions[i].label == run.decisions[i].label);
        CHECK(again.decisions[i].score == run.decisions[i].score);
    }
}
