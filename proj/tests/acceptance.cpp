// End-to-end acceptance run: one PASS/FAIL line per criterion.
// Usage: risec_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "risec/experiment.hpp"
#include "risec/oracle.hpp"

using namespace risec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

CVec unit_phases(const RVec& w) {
    CVec t(w.size());
    for (Eigen::Index m = 0; m < w.size(); ++m) t(m) = std::polar(1.0, w(m));
    return t;
}

// 1
Outcome cascade_identity() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int sc = 0; sc < 100; ++sc) {
        Placement pl;
        pl.seed = 1000 + static_cast<std::uint64_t>(sc);
        Scene s = Scene::defaults(1 + sc % 4, 1 + sc % 2, pl);
        s.ris_jx = 2 + sc % 5;
        s.ris_jz = 1 + sc % 4;
        s.n_bs_antennas = 1 + sc % 6;
        s.n_user_antennas = 1 + sc % 3;
        const ChannelSet ch = build_channels(s, static_cast<std::uint64_t>(sc));
        Rng rng(child_seed(77, static_cast<std::uint64_t>(sc)));
        for (int t = 0; t < 100; ++t) {
            const CVec theta = unit_phases(test::random_phases(ch.ris_elements(), rng));
            const CMat lifted = lifted_phase(theta, ch.bs_antennas());
            auto check = [&](const CMat& g, const CMat& h_r) {
                const CMat direct = h_r.adjoint() * theta.asDiagonal() * ch.h_br;
                worst = std::max(worst, (g * lifted - direct).norm() / direct.norm());
            };
            for (int k = 0; k < ch.num_users(); ++k) check(ch.g_k[k], ch.h_rk[k]);
            for (int e = 0; e < ch.num_eves(); ++e) check(ch.g_e[e], ch.h_re[e]);
        }
    }
    const double dt = seconds_since(t0);
    return {worst < 1e-10 && dt < 10.0, fmt("worst relative error %.3g over 100x100, %.2f s", worst, dt)};
}

// 2
Outcome bernstein_conservative() {
    const auto t0 = Clock::now();
    const double outage = 0.05;
    int scenes = 0, ok = 0;
    double worst_emp = 0.0, worst_lo = 0.0;
    for (int sc = 0; sc < 40 && scenes < 24; ++sc) {
        Placement pl;
        pl.seed = 500 + static_cast<std::uint64_t>(sc);
        // one user in most scenes: with several, inter-user interference can cap the
        // eavesdropper SINR below the threshold at any power and nothing binds
        Scene s = Scene::defaults(1 + (sc % 3 == 0), 1 + sc % 2, pl);
        s.ris_jx = 4;
        s.ris_jz = 2;
        const ChannelSet ch = build_channels(s, 900 + static_cast<std::uint64_t>(sc));
        const UncertaintyModel u = UncertaintyModel::relative(ch, 0.1, 0.1);
        const NoiseLevels noise = NoiseLevels::from(s);
        const HardwareProfile hw{0.01 * (sc % 2)};
        Rng rng(child_seed(31, static_cast<std::uint64_t>(sc)));
        std::vector<CMat> base;
        for (int k = 0; k < ch.num_users(); ++k) {
            // matched filter toward the user's direct path, unit power
            const CVec w = ch.h_bk[k].col(0).normalized();
            base.push_back(w * w.adjoint());
        }
        const CVec theta = unit_phases(test::random_phases(ch.ris_elements(), rng));
        auto certified_at = [&](double scale) {
            std::vector<CMat> cov = base;
            for (auto& c : cov) c *= scale;
            for (int k = 0; k < ch.num_users(); ++k) {
                const auto t = bernstein_terms(ch, cov, theta, hw, u, noise.eve, s.eps_eve, s.pairing[k], k);
                const auto sl = tight_slacks(t, outage);
                if (!certified(bernstein_residuals(t, sl), sl)) return false;
            }
            return true;
        };
        // the boundary is probed past the budget when the budget never binds
        double lo = 0.0, hi = s.power_budget;
        while (certified_at(hi) && hi < 1e9) hi *= 4.0;
        if (hi >= 1e9) continue;
        for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            (certified_at(mid) ? lo : hi) = mid;
        }
        if (lo <= 0.0) continue;
        std::vector<CMat> cov = base;
        for (auto& c : cov) c *= lo;
        const auto rep = mc_violation(ch, cov, theta, hw, u, noise, s.pairing, s.eps_eve, 10000, rng);
        ++scenes;
        worst_emp = std::max(worst_emp, rep.empirical);
        worst_lo = std::max(worst_lo, rep.ci_lo);
        if (rep.ci_lo <= outage) ++ok;
    }
    const double dt = seconds_since(t0);
    return {scenes >= 20 && ok == scenes && dt < 300.0,
            fmt("%d/%d boundary-certified scenes within 0.05 (worst empirical %.4f, worst Wilson low %.4f), %.1f s", ok,
                scenes, worst_emp, worst_lo, dt)};
}

// 3
Outcome oracle_gap() {
    const auto t0 = Clock::now();
    int ok = 0, tried = 0;
    double worst = 0.0;
    std::ostringstream gaps;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Scene s = test::toy_scene(1, 1, 2, 2, 2, seed);
        const ChannelSet ch = build_channels(s, 100 + seed);
        const Problem p = test::problem_for(s, ch);
        const OracleResult o = grid_search(p, OracleConfig{});
        const AoResult a = ao_solve(p);
        ++tried;
        const GapReport g = compare(a.report.sum_secrecy, a.feasible, o.objective, o.found);
        gaps << fmt(" %.3f", g.relative_gap);
        worst = std::max(worst, std::abs(g.relative_gap));
        if (o.found && a.feasible && std::abs(g.relative_gap) <= 0.10) ++ok;
    }
    const double dt = seconds_since(t0);
    return {ok == tried && dt < 600.0,
            fmt("%d/%d toy seeds within 10%% (worst |gap| %.4f; gaps%s), %.1f s", ok, tried, worst, gaps.str().c_str(), dt)};
}

// 4
Outcome core_sharing() {
    const Scene s = Scene::defaults(4, 2);
    const ChannelSet ch = build_channels(s, 44);
    const Problem p = test::problem_for(s, ch, 0.02);
    Rng rng(4);
    int exact = 0;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const AoState st = test::random_state(p, rng);
        const LayerParams params = LayerParams::initial(p.users());
        DualState duals = params.to_duals(p, DualState::initial(p));
        NumericFlags fa, fb;
        const AoState a = ao_iteration(p, st, duals, 1, AoConfig{}, fa);
        const AoState b = layer_forward(p, st, params, AoConfig{}, fb);
        const double diff = evaluate(p, a).objective - evaluate(p, b).objective;
        bool same = (a.phases.array() == b.phases.array()).all();
        for (std::size_t k = 0; k < a.q.size(); ++k) same = same && test::same_bits(a.q[k], b.q[k]);
        worst = std::max(worst, std::abs(diff));
        if (same && diff == 0.0) ++exact;
    }
    return {exact == 20, fmt("%d/20 random states bitwise equal, max objective difference %.3g", exact, worst)};
}

// 5 (also hands the trained net to 6)
Outcome dunet_accuracy(DuNet& trained) {
    Experiment e = Experiment::defaults(ExperimentKind::Train);
    const TrainRun run = run_training(e);
    trained = run.result.net;
    // second check on channels the training never saw, not even for checkpoint selection
    Experiment fresh = Experiment::defaults(ExperimentKind::Validate);
    fresh.seed = 2;
    const ValidationResult v = run_validation(fresh, trained);
    const double minutes = run.result.wall_time / 60.0;
    return {run.ratio >= 0.95 && v.ratio >= 0.95 && minutes < 60.0,
            fmt("validation split: DUNet %.3f vs AO %.3f (ratio %.3f); fresh 64: ratio %.3f; training %.1f min",
                run.du_mean, run.ao_mean, run.ratio, v.ratio, minutes)};
}

// 6
Outcome dunet_speed(const DuNet* trained) {
    Experiment e = Experiment::defaults(ExperimentKind::TimingSweep);
    e.trials = 10;
    const TimingResult r = run_timing(e, trained);
    const TimingRow& last = r.rows.back();
    std::ostringstream rows;
    for (const auto& row : r.rows) rows << fmt(" K=%d:%.1fx", row.users, row.speedup);
    return {last.speedup >= 5.0 && r.slope_ratio >= 3.0,
            fmt("speedup at K=%d %.1fx; slope ratio %.1f;%s", last.users, last.speedup, r.slope_ratio, rows.str().c_str())};
}

// 7
Outcome trend_suite() {
    const auto t0 = Clock::now();
    bool all = true;
    std::ostringstream out;
    for (auto kind : {ExperimentKind::PowerSweep, ExperimentKind::RisSweep, ExperimentKind::ThresholdSweep}) {
        const RunResult r = run_sweep(Experiment::defaults(kind));
        all = all && r.trend_pass && r.experiment.trials == 20;
        out << fmt("%s rho=%+.3f %s; ", to_string(kind).c_str(), r.spearman_rho, r.trend_pass ? "ok" : "FAIL");
    }
    // impairments at a fixed design
    double s0 = 0.0, s1 = 0.0;
    for (int t = 0; t < 20; ++t) {
        Placement pl;
        pl.seed = 300 + static_cast<std::uint64_t>(t);
        const Scene s = Scene::defaults(4, 2, pl);
        const ChannelSet ch = build_channels(s, 600 + static_cast<std::uint64_t>(t));
        const AoResult a = ao_solve(test::problem_for(s, ch));
        const NoiseLevels noise = NoiseLevels::from(s);
        s0 += secrecy_report(ch, a.design, HardwareProfile{0.0}, noise, s.pairing).sum_secrecy;
        s1 += secrecy_report(ch, a.design, HardwareProfile{0.1}, noise, s.pairing).sum_secrecy;
    }
    s0 /= 20.0;
    s1 /= 20.0;
    out << fmt("upsilon 0 -> 0.1 at fixed designs: %.3f -> %.3f; %.0f s", s0, s1, seconds_since(t0));
    return {all && s1 < s0, out.str()};
}

// 8
Outcome feasibility_suite(const DuNet* trained) {
    int designs = 0, bad = 0, flagged = 0;
    std::string first;
    auto check = [&](const char* who, const Problem& p, const Design& d, bool feasible) {
        ++designs;
        std::string why;
        if (d.total_power(p.bs()) > p.power_budget * (1.0 + 1e-9)) why = "power";
        const CVec th = d.theta();
        for (Eigen::Index m = 0; m < th.size(); ++m)
            if (std::abs(std::abs(th(m)) - 1.0) > 1e-15) why = "modulus";
        if (feasible) {
            ++flagged;
            const auto rep = secrecy_report(p.ch(), d, p.hw, p.noise, p.pairing);
            const auto rob = robust_all_users(p.ch(), d.covariances(p.bs()), th, p.hw, p.uncertainty, p.noise,
                                              p.pairing, p.eps_eve, p.outage);
            for (int k = 0; k < p.users(); ++k) {
                if (rep.rate_user(k) < p.eps_user) why = "qos";
                if (rob[static_cast<std::size_t>(k)].residual > 0.0) why = "robust";
            }
        }
        if (!why.empty()) {
            ++bad;
            if (first.empty()) first = fmt(" first: %s %s", who, why.c_str());
        }
    };
    for (int t = 0; t < 24; ++t) {
        Placement pl;
        pl.seed = 40 + static_cast<std::uint64_t>(t);
        const int users = 2 + 2 * (t % 4);
        const Scene s = Scene::defaults(users, 1 + t % 3, pl);
        const ChannelSet ch = build_channels(s, 70 + static_cast<std::uint64_t>(t));
        const Problem p = test::problem_for(s, ch, 0.05 * (t % 3));
        const AoResult a = ao_solve(p);
        check("ao_solve", p, a.design, a.feasible);
        const DimensionBinding b = DimensionBinding::of(ch);
        const DuNet net = trained && trained->binding == b ? *trained : DuNet::initial(b, 6);
        const ForwardResult f = forward(net, p);
        check("forward", p, f.design, f.eval.feasible);
    }
    return {bad == 0, fmt("%d/%d designs pass (%d flagged feasible)%s", designs - bad, designs, flagged, first.c_str())};
}

// 9
Outcome determinism() {
    std::vector<std::string> broken;
    Placement pl;
    pl.seed = 5;
    const Scene s1 = Scene::defaults(4, 2, pl), s2 = Scene::defaults(4, 2, pl);
    if (s1.user_positions != s2.user_positions || s1.eve_positions != s2.eve_positions) broken.push_back("placement");
    const ChannelSet c1 = build_channels(s1, 9), c2 = build_channels(s2, 9);
    if (!test::same_channels(c1, c2)) broken.push_back("channels");
    const Problem p1 = test::problem_for(s1, c1), p2 = test::problem_for(s2, c2);

    const AoResult a1 = ao_solve(p1), a2 = ao_solve(p2);
    bool same = a1.trace == a2.trace && a1.design.phases == a2.design.phases;
    for (std::size_t k = 0; k < a1.design.w.size(); ++k) same = same && test::same_bits(a1.design.w[k], a2.design.w[k]);
    if (!same) broken.push_back("ao_solve");

    Rng r1(3), r2(3);
    const auto cov = a1.design.covariances(p1.bs());
    const auto m1 = mc_violation(c1, cov, a1.design.theta(), p1.hw, p1.uncertainty, p1.noise, p1.pairing, p1.eps_eve, 2000, r1);
    const auto m2 = mc_violation(c2, cov, a1.design.theta(), p2.hw, p2.uncertainty, p2.noise, p2.pairing, p2.eps_eve, 2000, r2);
    if (m1.per_user != m2.per_user) broken.push_back("mc_violation");

    std::vector<Sample> train, val;
    for (int i = 0; i < 4; ++i) train.push_back(make_sample(s1, 20 + static_cast<std::uint64_t>(i), 0.0, 0.05, 0.05));
    for (int i = 0; i < 2; ++i) val.push_back(make_sample(s1, 40 + static_cast<std::uint64_t>(i), 0.0, 0.05, 0.05));
    TrainConfig tc;
    tc.layers = 2;
    tc.epochs_per_stage = 1;
    tc.steps_per_epoch = 1;
    tc.batch = 2;
    tc.scheme = TrainConfig::Scheme::Spsa;
    const TrainResult t1 = train_incremental(train, val, tc), t2 = train_incremental(train, val, tc);
    if (t1.net.flat() != t2.net.flat()) broken.push_back("training");
    const ForwardResult f1 = forward(t1.net, p1), f2 = forward(t2.net, p2);
    if (f1.report.sum_secrecy != f2.report.sum_secrecy) broken.push_back("forward");

    const Scene toy = test::toy_scene(1, 1, 2, 2, 1, 3);
    const ChannelSet tc1 = build_channels(toy, 3);
    const Problem tp = test::problem_for(toy, tc1);
    OracleConfig oc;
    oc.phase_levels = 8;
    const OracleResult o1 = grid_search(tp, oc), o2 = grid_search(tp, oc);
    if (o1.objective != o2.objective || o1.phase_digits != o2.phase_digits) broken.push_back("oracle");

    Experiment e = Experiment::defaults(ExperimentKind::ThresholdSweep);
    e.trials = 3;
    e.grid = {1.5, 2.5, 3.5};
    const RunResult x1 = run_sweep(e);
    e.workers = 2;
    const RunResult x2 = run_sweep(e);
    bool sw = x1.trials.size() == x2.trials.size();
    for (std::size_t i = 0; sw && i < x1.trials.size(); ++i)
        sw = x1.trials[i].ao_secrecy == x2.trials[i].ao_secrecy && x1.trials[i].ao_iters == x2.trials[i].ao_iters;
    if (!sw) broken.push_back("sweep");

    std::string list;
    for (const auto& b : broken) list += " " + b;
    return {broken.empty(), broken.empty() ? "placement, channels, ao_solve, mc_violation, training, forward, oracle and sweep "
                                             "(1 vs 2 workers) repeat bit for bit"
                                           : "not reproducible:" + list};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

    DuNet trained;
    bool have_trained = false;
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, cascade_identity},
        {2, bernstein_conservative},
        {3, oracle_gap},
        {4, core_sharing},
        {5, [&] {
             Outcome o = dunet_accuracy(trained);
             have_trained = true;
             return o;
         }},
        {6, [&] { return dunet_speed(have_trained ? &trained : nullptr); }},
        {7, trend_suite},
        {8, [&] { return feasibility_suite(have_trained ? &trained : nullptr); }},
        {9, determinism},
    };
    const char* names[] = {"",
                           "cascade identity",
                           "robust constraint conservativeness",
                           "AO vs exhaustive oracle",
                           "unfolded layer shares the AO core",
                           "DUNet accuracy",
                           "DUNet speed",
                           "trend suite",
                           "feasibility suite",
                           "determinism"};
    int failed = 0;
    for (const auto& [id, run] : criteria) {
        if (!wanted(id)) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, names[id], o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
