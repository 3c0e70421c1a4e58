#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "streamlabel/errors.hpp"
#include "streamlabel/metrics.hpp"

using namespace streamlabel;

namespace {

LabelDecision assigned(std::int64_t id, LabelId label, std::int64_t chunk = 0) {
    LabelDecision d;
    d.instance_id = id;
    d.chunk = chunk;
    d.outcome = Outcome::Assigned;
    d.label = label;
    d.score = 1.0;
    return d;
}

LabelDecision deferred(std::int64_t id, std::int64_t chunk = 0) {
    LabelDecision d;
    d.instance_id = id;
    d.chunk = chunk;
    return d;
}

}  // namespace

TEST_CASE("accuracy examples") {
    EvalTally t;
    t.n_new = 5;
    t.n_exist = 3;
    t.n = 10;
    CHECK(accuracy(t) == doctest::Approx(80.0));
    t.n_new = 4;
    t.n_exist = 6;
    CHECK(accuracy(t) == doctest::Approx(100.0));
    CHECK_THROWS_AS(accuracy(EvalTally{}), MetricError);
}

TEST_CASE("m_new and f_new examples") {
    EvalTally t;
    t.fn = 2;
    t.n_l = 8;
    CHECK(m_new(t) == doctest::Approx(25.0));
    t.fn = 0;
    CHECK(m_new(t) == 0.0);
    t.fp = 3;
    t.n = 20;
    CHECK(f_new(t) == doctest::Approx(25.0));
    CHECK_THROWS_AS(m_new(EvalTally{}), MetricError);
    EvalTally all_new;
    all_new.n = 4;
    all_new.n_l = 4;
    CHECK_THROWS_AS(f_new(all_new), MetricError);
}

TEST_CASE("f_beta examples and properties") {
    EvalTally t;
    t.tp = 1;
    CHECK(f_beta(t) == doctest::Approx(1.0));
    t.tp = 5;
    t.fn = 4;
    t.fp = 1;
    CHECK(f_beta(t) == doctest::Approx(25.0 / 42.0).epsilon(1e-12));
    t.tp = 0;
    CHECK(f_beta(t) == 0.0);
    CHECK_THROWS_AS(f_beta(EvalTally{}), MetricError);

    EvalTally m;
    m.fn = 3;
    m.fp = 2;
    double last = -1.0;
    for (int tp = 0; tp < 50; ++tp) {
        m.tp = tp;
        const double f = f_beta(m);
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(f >= last);
        last = f;
    }
}

TEST_CASE("build_tally counts each outcome class") {
    // Seed labels {0, 1}; novel class 7 discovered as label 2.
    const std::set<LabelId> seed{0, 1};
    const std::map<std::int64_t, LabelId> truth{{0, 0}, {1, 1}, {2, 7}, {3, 7}, {4, 7}, {5, 0}, {6, 1}, {7, 7}};
    const std::vector<LabelDecision> log{
        assigned(0, 0),   // correct existing
        assigned(1, 0),   // wrong existing
        assigned(2, 2),   // correct new
        assigned(3, 2),   // correct new
        assigned(4, 1),   // FN
        assigned(5, 2),   // FP
        deferred(6),      // never labeled
        deferred(7), assigned(7, 2, 3),  // deferred then labeled retroactively
    };
    const auto mapping = map_discovered_labels(log, truth, seed);
    REQUIRE(mapping.size() == 1);
    CHECK(mapping.at(2) == 7);

    const auto t = build_tally(log, truth, seed);
    CHECK(t.n == 7);
    CHECK(t.n_exist == 1);
    CHECK(t.n_new == 3);
    CHECK(t.tp == 3);
    CHECK(t.fn == 1);
    CHECK(t.fp == 1);
    CHECK(t.n_l == 4);
    // Every labeled instance is correct or mislabeled exactly once.
    CHECK(t.n_new + t.n_exist + 1 /* wrong existing */ + t.fn + t.fp == t.n);
    CHECK(accuracy(t) == doctest::Approx(400.0 / 7.0));
}

TEST_CASE("metrics are invariant under permutation of the decision log") {
    const std::set<LabelId> seed{0};
    std::map<std::int64_t, LabelId> truth;
    std::vector<LabelDecision> log;
    std::mt19937_64 rng(3);
    for (std::int64_t i = 0; i < 200; ++i) {
        truth[i] = static_cast<LabelId>(rng() % 3);
        const auto r = rng() % 4;
        log.push_back(r == 3 ? deferred(i) : assigned(i, static_cast<LabelId>(r)));
    }
    const auto base = build_tally(log, truth, seed);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(log.begin(), log.end(), rng);
        const auto t = build_tally(log, truth, seed);
        CHECK(t.n == base.n);
        CHECK(t.n_new == base.n_new);
        CHECK(t.n_exist == base.n_exist);
        CHECK(t.fp == base.fp);
        CHECK(t.fn == base.fn);
        CHECK(t.n_l == base.n_l);
    }
    CHECK(base.n_new <= base.n_l);
    CHECK(base.fp + base.fn <= base.n);
}
