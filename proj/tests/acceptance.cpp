// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "streamlabel/clustering.hpp"
#include "streamlabel/io.hpp"
#include "streamlabel/metrics.hpp"
#include "streamlabel/pipeline.hpp"
#include "streamlabel/reporting.hpp"
#include "streamlabel/runtime_sim.hpp"
#include "streamlabel/scenario.hpp"
#include "oracles.hpp"

using namespace streamlabel;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;
};

struct Check {
    Verdict& out;
    void operator()(bool cond, const std::string& what) {
        if (!cond && out.ok) {
            out.ok = false;
            out.detail = what;
        }
    }
};

bool rel_close(double got, double want, double tol = 1e-9) {
    return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs >= limit_s && o.ok) {
        o.ok = false;
        o.detail = "exceeded time limit " + fmt("%.0f s", limit_s) + (o.detail.empty() ? "" : "; " + o.detail);
    }
    if (!o.ok) ++failures;
    std::printf("criterion %d: %s  %s  [%.2f s]%s%s\n", id, o.ok ? "PASS" : "FAIL", name.c_str(), secs,
                o.detail.empty() ? "" : "  ", o.detail.c_str());
    std::fflush(stdout);
}

sim::KernelSpec par(double t_ser, double p, double t_tm = 0.0) {
    sim::KernelSpec k;
    k.name = "k";
    k.t_ser = t_ser;
    k.t_ser_fast = t_ser;
    k.t_ser_slow = 2 * t_ser;
    k.p = p;
    k.t_tm = t_tm;
    return k;
}

sim::KernelSpec random_kernel(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    sim::KernelSpec k;
    k.name = "r";
    k.t_ser = 1.0 + 99.0 * u(rng);
    k.t_ser_fast = k.t_ser;
    k.t_ser_slow = k.t_ser * (1.2 + 1.8 * u(rng));
    k.t_exe_acc = k.t_ser * (0.05 + 1.5 * u(rng));
    k.t_datacpy_acc = k.t_ser * 0.3 * u(rng);
    k.t_tm = k.t_ser * 0.2 * u(rng);
    k.p = u(rng);
    return k;
}

Verdict criterion1() {
    Verdict o;
    Check c{o};
    c(rel_close(sim::parallel_time(par(100, 0), 4, 7), 100), "parallel_time p=0");
    c(rel_close(sim::parallel_time(par(100, 1), 1, 1), 100), "parallel_time degenerate");
    c(rel_close(sim::parallel_time(par(100, 1), 4, 10), 250), "parallel_time 250");
    for (int n = 1; n <= 8; ++n) c(rel_close(sim::speedup(par(100, 0), n, 3), 1.0), "speedup p=0");
    c(rel_close(sim::speedup(par(100, 0.9, 5), 4, 4), 370.0 / 120.0), "speedup 370/120");
    c(rel_close(sim::speedup(par(100, 0.9, 5), 1, 4), 370.0 / 375.0), "speedup 370/375");
    c(sim::optimal_threads(par(100, 0.9, 5), 4, 4) == 4, "optimal_threads t_tm=5");
    c(sim::optimal_threads(par(100, 0.9, 100), 4, 4) == 2, "optimal_threads t_tm=100");
    c(sim::optimal_threads(par(100, 0), 4, 4) == 1, "optimal_threads p=0");
    auto k = par(100, 1);
    k.t_ser_slow = 200;
    k.t_exe_acc = 40;
    k.t_datacpy_acc = 10;
    c(rel_close(sim::division_time(k, {4, 0, 0.5, 0, 0.5}, 1), 37.5), "division_time 37.5");
    c(rel_close(sim::division_time(k, {0, 0, 0, 0, 1}, 1), 50), "division_time 50");
    const auto q = par(80, 0.6);
    for (int n_l = 1; n_l <= 5; ++n_l) {
        c(rel_close(sim::division_time(q, {1, 0, 1, 0, 0}, n_l), sim::parallel_time(q, 1, n_l)),
          "division_time single-unit reduction");
    }
    if (o.ok) o.detail = "all hand-derived model values within 1e-9";
    return o;
}

Verdict criterion2() {
    Verdict o;
    Check c{o};
    std::mt19937_64 rng(20240601);
    int thread_matches = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto k = random_kernel(rng);
        const int n_l = 1 + static_cast<int>(rng() % 10);
        const int max_t = 1 + static_cast<int>(rng() % 8);
        int best = 1;
        for (int n = 2; n <= max_t; ++n) {
            if (oracle::speedup(k, n, n_l) > oracle::speedup(k, best, n_l)) best = n;
        }
        if (sim::optimal_threads(k, n_l, max_t) == best) ++thread_matches;
    }
    c(thread_matches == 1000, "optimal_threads mismatches: " + std::to_string(1000 - thread_matches));

    int division_matches = 0;
    double worst_gap = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto k = random_kernel(rng);
        const int n_l = 1 + static_cast<int>(rng() % 10);
        const auto d = sim::optimal_division(k, n_l, sim::UnitAvailability{4, 4, true}, 0.05);
        const auto fine = oracle::brute_division(k, n_l, 4, 4, true, 40);
        const double got = sim::kernel_time(k, d, n_l);
        const bool close = std::abs(d.w_fast - fine.wf) <= 0.05 + 1e-9 && std::abs(d.w_slow - fine.ws) <= 0.05 + 1e-9 &&
                           std::abs(d.w_acc - fine.wa) <= 0.05 + 1e-9;
        const bool same_time = rel_close(got, fine.time);
        worst_gap = std::max(worst_gap, (got - fine.time) / fine.time);
        if (close || same_time) ++division_matches;
    }
    c(division_matches == 100, "optimal_division outside one grid step: " + std::to_string(100 - division_matches));
    std::ostringstream s;
    s << "threads " << thread_matches << "/1000, division " << division_matches
      << "/100 (worst time gap to finer grid " << fmt("%.3g", worst_gap) << ")";
    o.detail = o.ok ? s.str() : o.detail + "; " + s.str();
    return o;
}

Verdict criterion3() {
    Verdict o;
    Check c{o};
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pts = oracle::gaussian_blobs(60, 3 + static_cast<int>(seed % 3), 1.0, 1000 + seed);
        ClusteringConfig cfg;
        cfg.k = 3 + static_cast<int>(seed % 4);
        cfg.lambda = 0.0;
        cfg.seed = seed;
        const auto res = impurity_kmeans_traced(pts, cfg);
        const auto ref = oracle::lloyd(pts, seed_centroids(pts, cfg.k, seed), cfg.max_iters);
        const double got = res.loss_history.back().kmeans;
        worst = std::max(worst, std::abs(got - ref.loss) / std::max(1.0, ref.loss));
        c(rel_close(got, ref.loss), "instance " + std::to_string(seed) + " loss differs");
    }
    o.detail = (o.ok ? "" : o.detail + "; ") + "worst relative loss gap " + fmt("%.3g", worst);
    return o;
}

struct NoveltyRun {
    std::vector<std::string> log;
    bool invariants_ok = true;
    std::string invariant_detail;
};

std::vector<NoveltyRun> novelty_runs;

RunConfig run_config(std::uint64_t seed) {
    RunConfig rc;
    set_config_value(rc, "seed", std::to_string(seed));
    return rc;
}

NoveltyRun labeled_run(const SyntheticData& data, const RunConfig& rc, RunResult* out) {
    NoveltyRun nr;
    const auto cap = static_cast<std::size_t>(rc.engine.adaptation.effective_max_prototypes(rc.engine.ensemble));
    const auto buffer_cap = static_cast<std::size_t>(rc.engine.adaptation.ttl_chunks) * rc.chunk_size;
    auto run = run_labeling(data.labeled, data.stream, rc, [&](const EngineState&, const ChunkSnapshot& s) {
        if (s.total_prototypes > cap || s.buffer_size > buffer_cap) {
            if (nr.invariants_ok) {
                nr.invariant_detail = "chunk " + std::to_string(s.chunk) + ": prototypes " +
                                      std::to_string(s.total_prototypes) + ", buffer " + std::to_string(s.buffer_size);
            }
            nr.invariants_ok = false;
        }
    });
    for (const auto& d : run.decisions) nr.log.push_back(decision_to_json(d));
    if (out) *out = std::move(run);
    return nr;
}

Verdict criterion4() {
    Verdict o;
    int passing = 0;
    std::ostringstream per_seed;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SyntheticConfig sc;
        sc.seed = seed;
        const auto data = generate_synthetic(sc);
        const auto rc = run_config(seed);
        RunResult run;
        novelty_runs.push_back(labeled_run(data, rc, &run));
        const auto ev = evaluate(run.decisions, truth_of(data.stream), run.state.label_space.seed_labels());
        std::set<LabelId> novel;
        for (const auto& [cls, chunk] : data.novel_arrivals) novel.insert(cls);
        const auto found = discovery_chunks(run.state, ev.label_mapping, novel);
        bool timely = true;
        for (const auto& [cls, arrival] : data.novel_arrivals) {
            const auto& f = found.at(cls);
            if (!f || *f - arrival > 10) timely = false;
        }
        const double acc = ev.accuracy.value_or(0.0);
        const double f2 = ev.f2.value_or(0.0);
        const bool ok = acc >= 85.0 && f2 >= 0.80 && timely;
        if (ok) ++passing;
        per_seed << (seed ? " " : "") << seed << ":" << fmt("%.1f", acc) << "/" << fmt("%.2f", f2)
                 << (timely ? "" : "/late") << (ok ? "" : "*");
    }
    o.ok = passing >= 8;
    o.detail = std::to_string(passing) + "/10 seeds pass (acc%/F2: " + per_seed.str() + ")";
    return o;
}

Verdict criterion5() {
    Verdict o;
    std::ostringstream per_seed;
    int clean = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SyntheticConfig sc;
        sc.seed = seed;
        sc.novel_arrivals.clear();
        const auto data = generate_synthetic(sc);
        const auto run = run_labeling(data.labeled, data.stream, run_config(seed));
        const auto n = run.state.label_space.discovered_labels().size();
        if (n == 0) ++clean;
        per_seed << (seed ? " " : "") << n;
        if (run.snapshots.size() != 50) {
            o.ok = false;
            o.detail = "expected 50 chunks; ";
        }
    }
    o.ok = o.ok && clean == 10;
    o.detail += std::to_string(clean) + "/10 seeds with 0 discovered labels (per seed: " + per_seed.str() + ")";
    return o;
}

std::vector<std::string> ladder_dumps;

Verdict criterion6() {
    Verdict o;
    const auto scen = sim::default_scenario(100, 1, 10);
    const auto work = sim::expand(scen);
    std::vector<sim::SimReport> reports;
    for (auto s : sim::all_strategies()) reports.push_back(sim::simulate(work, s, scen.hardware));
    std::ostringstream detail;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        ladder_dumps.push_back(sim_report_json(reports[i], true).dump());
        if (i > 0 && reports[i].total_time > reports[i - 1].total_time) {
            o.ok = false;
            detail << sim::to_string(reports[i].strategy) << " slower than " << sim::to_string(reports[i - 1].strategy)
                   << "; ";
        }
    }
    const double st2 = reports[1].speedup_vs_st1;
    if (st2 > scen.hardware.n_fast + scen.hardware.n_slow) {
        o.ok = false;
        detail << "ST.2 speedup above core count; ";
    }
    if (!(reports[5].energy < reports[0].energy)) {
        o.ok = false;
        detail << "ST.6 energy not below ST.1; ";
    }
    detail << "speedups";
    for (const auto& r : reports) detail << " " << fmt("%.2f", r.speedup_vs_st1);
    detail << ", energy ST.6/ST.1 " << fmt("%.3f", reports[5].energy_vs_st1);
    o.detail = detail.str();
    return o;
}

Verdict criterion7() {
    Verdict o;
    Check c{o};
    EvalTally t;
    t.n_new = 5;
    t.n_exist = 3;
    t.n = 10;
    c(accuracy(t) == 80.0, "accuracy 80");
    t.n_new = 7;
    c(accuracy(t) == 100.0, "accuracy 100");
    EvalTally m;
    m.fn = 2;
    m.n_l = 8;
    c(m_new(m) == 25.0, "M_new 25");
    m.fn = 0;
    c(m_new(m) == 0.0, "M_new 0");
    EvalTally f;
    f.fp = 3;
    f.n = 20;
    f.n_l = 8;
    c(f_new(f) == 25.0, "F_new 25");
    EvalTally b;
    b.tp = 1;
    c(f_beta(b) == 1.0, "F2 perfect");
    b.tp = 5;
    b.fn = 4;
    b.fp = 1;
    c(f_beta(b) == 25.0 / 42.0, "F2 25/42");
    b.tp = 0;
    c(f_beta(b) == 0.0, "F2 zero TP");
    if (o.ok) o.detail = "all metric examples exact";
    return o;
}

Verdict criterion8() {
    Verdict o;
    if (novelty_runs.size() != 10) return {false, "criterion-4 runs missing"};
    for (std::size_t i = 0; i < novelty_runs.size(); ++i) {
        if (!novelty_runs[i].invariants_ok) {
            o.ok = false;
            o.detail = "seed " + std::to_string(i) + " " + novelty_runs[i].invariant_detail;
            return o;
        }
    }
    o.detail = "prototypes <= M and buffer <= ttl x chunk_size at every chunk of 10 runs";
    return o;
}

Verdict criterion9() {
    Verdict o;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SyntheticConfig sc;
        sc.seed = seed;
        const auto again = labeled_run(generate_synthetic(sc), run_config(seed), nullptr);
        if (again.log != novelty_runs.at(seed).log) {
            return {false, "decision log differs on seed " + std::to_string(seed)};
        }
    }
    const auto scen = sim::default_scenario(100, 1, 10);
    const auto work = sim::expand(scen);
    std::size_t i = 0;
    for (auto s : sim::all_strategies()) {
        if (sim_report_json(sim::simulate(work, s, scen.hardware), true).dump() != ladder_dumps.at(i++)) {
            return {false, "simulation report differs for " + sim::to_string(s)};
        }
    }
    o.detail = "10 decision logs and 6 simulation reports identical on rerun";
    return o;
}

}  // namespace

int main() {
    report(1, "analytical model exactness", 1.0, criterion1);
    report(2, "optimizer oracle equivalence", 30.0, criterion2);
    report(3, "lambda=0 clustering equals Lloyd", 5.0, criterion3);
    report(4, "streaming novelty scenario", 60.0, criterion4);
    report(5, "stationary stream founds no labels", 30.0, criterion5);
    report(6, "strategy ladder ordering", 10.0, criterion6);
    report(7, "metric formulas", 1.0, criterion7);
    report(8, "resource invariants", 0.0, criterion8);
    report(9, "determinism", 0.0, criterion9);
    std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
