// Tests for good-set queries, regeneration detection, and the renewal-based
// estimators. Deterministic environments (rate zero, degenerate densities)
// pin the combinatorics exactly; seeded runs at small swap rates, where
// regenerations are dense, exercise the full pipeline; synthetic record
// lists check the estimators against hand-computed values.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "sepwalk/env.hpp"
#include "sepwalk/errors.hpp"
#include "sepwalk/renewal.hpp"
#include "sepwalk/rng.hpp"
#include "sepwalk/walker.hpp"

using namespace sepwalk;

namespace {

ModelParams drift_params(double gamma) {
    // Right-leaning on both site types: local drift 0.4 at every density.
    return make_params(0.6, 0.8, 0.5, gamma);
}

// Walker that marches right forever: empty environment, vacant-site right
// bias indistinguishable from 1 at any tested length.
ModelParams all_right() {
    return make_params(0.5, 1.0 - 1e-12, 0.0, 0.0, true);
}

// Walker that marches left forever on a full environment.
ModelParams all_left() {
    return make_params(1e-12, 0.5, 1.0, 0.0, true);
}

std::pair<Trajectory, EnvRecord> run_follow(const ModelParams& p, long long n,
                                            uint64_t se, uint64_t sw) {
    RunOptions opt;
    opt.backend = Backend::reservoir_window;
    opt.follow_walker = true;
    opt.record_max_visited = true;
    return run_annealed(p, n, se, sw, opt);
}

std::vector<RenewalRecord> synthetic(const std::vector<std::pair<long, long>>&
                                         increments) {
    std::vector<RenewalRecord> recs;
    RenewalRecord r;
    recs.push_back(r);  // records are gaps; the first carries none
    for (const auto& [dt, dx] : increments) {
        r.tau += dt;
        r.x_tau += dx;
        r.dt_prev = dt;
        r.dx_prev = dx;
        recs.push_back(r);
    }
    return recs;
}

}  // namespace

TEST_CASE("good-site queries: thresholds, degenerate snapshots, validation") {
    const auto p = drift_params(1.0);
    const auto q = make_good_query(p, 32, 100);
    CHECK(q.L == 32);
    CHECK(q.L_max == 100);
    CHECK(q.threshold ==
          doctest::Approx(0.5 * (1.0 + 1.0 / (1.0 + std::log(33.0))))
              .epsilon(1e-15));
    for (long L : {0L, 7L, 99L}) {
        const auto qq = make_good_query(p, L, 100);
        CHECK(qq.threshold > p.rho);
        CHECK(qq.threshold <= 2.0 * p.rho);
    }
    CHECK_THROWS_AS(make_good_query(p, -1, 10), ParamError);
    CHECK_THROWS_AS(make_good_query(p, 11, 10), ParamError);

    std::vector<uint8_t> zeros(129, 0), ones(129, 1);
    auto env0 = init_profile(p, zeros, Backend::torus, 1);
    auto env1 = init_profile(p, ones, Backend::torus, 2);
    const auto s0 = env0.snapshot();
    const auto s1 = env1.snapshot();
    for (long L : {0L, 3L, 10L}) {
        const auto qq = make_good_query(p, L, 40);
        for (long long dx : {45LL, 64LL, 80LL}) {
            CHECK(good_site(s0, env0.origin_offset + dx, qq));
        }
    }
    // A solid block exceeds (1 + eps_L) * 0.5 at any positive radius, while
    // radius 0 makes the threshold 2 * rho = 1, which a density never
    // strictly exceeds.
    for (long L : {1L, 5L}) {
        CHECK_FALSE(good_site(s1, env1.origin_offset + 64,
                              make_good_query(p, L, 40)));
    }
    CHECK(good_site(s1, env1.origin_offset + 64, make_good_query(p, 0, 0)));

    CHECK_THROWS_AS(good_site(s0, env0.origin_offset + 10,
                              make_good_query(p, 4, 32)),
                    WindowError);
}

TEST_CASE("equilibrium bad-site probability falls as the radius grows") {
    const auto p = drift_params(1.0);
    const long Ls[] = {8, 16, 32, 64};
    long bad[4] = {0, 0, 0, 0};
    const int samples = 10000;
    for (int s = 0; s < samples; ++s) {
        auto env = init_equilibrium(p, 640, Backend::torus,
                                    static_cast<uint64_t>(60000 + s));
        const auto snap = env.snapshot();
        for (int i = 0; i < 4; ++i) {
            if (!good_site(snap, env.origin_offset + 320,
                           make_good_query(p, Ls[i], 319))) {
                ++bad[i];
            }
        }
    }
    // Point values near 0.14 / 0.11 / 0.065 / 0.02; gaps dwarf the
    // Monte Carlo noise at this sample count.
    CHECK(bad[0] > bad[1]);
    CHECK(bad[1] > bad[2]);
    CHECK(bad[2] > bad[3]);
    CHECK(bad[0] < samples / 4);
    CHECK(bad[3] > 0);
}

TEST_CASE("candidate detection on deterministic paths") {
    RunOptions opt;
    opt.backend = Backend::torus;
    opt.record_max_visited = true;

    auto [up, rec_up] = run_annealed(all_right(), 200, 5, 6, opt);
    REQUIRE(up.positions.back() == 200);
    for (double slope : {0.05, 0.3, 0.9}) {
        ConeParams cone{slope, ConeParams::Source::user};
        const auto cands = find_candidates(up, rec_up, cone);
        // A straight right path with a frozen environment renews everywhere.
        CHECK(cands.size() == 201);
    }

    auto [down, rec_down] = run_annealed(all_left(), 200, 7, 8, opt);
    REQUIRE(down.positions.back() == -200);
    for (double slope : {0.05, 0.3, 0.9}) {
        ConeParams cone{slope, ConeParams::Source::user};
        const auto cands = find_candidates(down, rec_down, cone);
        REQUIRE(cands.size() == 1);
        CHECK(cands[0] == 0);
    }

    ConeParams bad_cone{0.0, ConeParams::Source::user};
    CHECK_THROWS_AS(find_candidates(up, rec_up, bad_cone), ParamError);
}

TEST_CASE("candidate sets shrink as the cone steepens and replay matches") {
    const auto p = drift_params(0.2);
    auto [traj, rec] = run_follow(p, 5000, 21, 22);

    ConeParams shallow{0.1, ConeParams::Source::user};
    ConeParams steep{0.3, ConeParams::Source::user};
    const auto wide = find_candidates(traj, rec, shallow);
    const auto narrow = find_candidates(traj, rec, steep);
    CHECK(wide.size() >= narrow.size());
    CHECK(std::includes(wide.begin(), wide.end(), narrow.begin(),
                        narrow.end()));
    // Candidates are plentiful at a small swap rate.
    CHECK(static_cast<double>(wide.size()) / 5000.0 >= 0.01);

    // Dropping the recorded per-step maxima forces the replay path; the
    // two routes must agree exactly.
    EnvRecord stripped = rec;
    stripped.max_visited.clear();
    const auto replayed = find_candidates(traj, stripped, shallow);
    CHECK(replayed == wide);
}

TEST_CASE("label support is required for renewal analysis") {
    const auto p = drift_params(0.2);
    RunOptions opt;
    opt.backend = Backend::reservoir_window;
    opt.extent = 1024;
    opt.follow_walker = false;
    opt.record_max_visited = false;
    auto [traj, rec] = run_annealed(p, 50, 31, 32, opt);
    ConeParams cone{0.1, ConeParams::Source::user};
    CHECK_THROWS_AS(find_candidates(traj, rec, cone), BackendError);
    CHECK_THROWS_AS(check_forward(traj, rec, 0, cone, 10), BackendError);
    CHECK_THROWS_AS(extract_renewals(traj, rec, cone, 10, 10), BackendError);
}

TEST_CASE("forward conditions on deterministic paths") {
    RunOptions opt;
    opt.backend = Backend::torus;
    opt.record_max_visited = true;
    ConeParams cone{0.3, ConeParams::Source::user};

    auto [up, rec_up] = run_annealed(all_right(), 200, 5, 6, opt);
    const auto alive = check_forward(up, rec_up, 5, cone, 50);
    CHECK(alive.alive());
    CHECK(alive.d_alive);
    CHECK(alive.f_alive);
    CHECK(alive.broken_at() == -1);

    auto [down, rec_down] = run_annealed(all_left(), 200, 7, 8, opt);
    const auto broken = check_forward(down, rec_down, 0, cone, 10);
    CHECK_FALSE(broken.d_alive);
    CHECK(broken.d_broken_at == 1);
    // Frozen particles stay behind: only the path condition fails.
    CHECK(broken.f_alive);
    CHECK(broken.broken_at() == 1);

    CHECK_THROWS_AS(check_forward(up, rec_up, 150, cone, 100), HorizonError);
    CHECK_THROWS_AS(check_forward(up, rec_up, -1, cone, 10), ParamError);
}

TEST_CASE("fast labels from behind break the forward particle condition") {
    // Full density and a fast environment: the labels just left of the
    // start overrun the shallow line almost immediately.
    const auto p = make_params(0.5, 0.5, 1.0, 20.0, true);
    RunOptions opt;
    opt.backend = Backend::torus;
    opt.extent = 1024;
    opt.record_max_visited = true;
    ConeParams cone{0.05, ConeParams::Source::user};
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto [traj, rec] = run_annealed(p, 200, seed, seed + 50, opt);
        const auto st = check_forward(traj, rec, 0, cone, 100);
        CHECK(st.f_broken_at >= 1);
    }
}

TEST_CASE("forward survival is positive and stable in the horizon") {
    // At a small swap rate the labels barely move, so a healthy fraction of
    // candidates survives; lengthening the horizon must not change early
    // breaks and can only rarely remove survivors.
    const auto p = drift_params(0.05);
    ConeParams cone{0.1, ConeParams::Source::user};
    long checked = 0, alive_1k = 0, alive_2k = 0, mismatch = 0;
    for (uint64_t r = 0; r < 4; ++r) {
        auto [traj, rec] = run_follow(p, 4200, 800 + r, 900 + r);
        const auto cands = find_candidates(traj, rec, cone);
        for (long long c : cands) {
            if (c > 2200) break;
            if (checked >= 60) break;
            ++checked;
            const auto s1 = check_forward(traj, rec, c, cone, 1000);
            const auto s2 = check_forward(traj, rec, c, cone, 2000);
            alive_1k += s1.alive();
            alive_2k += s2.alive();
            // A scan is a prefix of a longer scan: early breaks agree.
            if (!s1.alive()) {
                if (s2.broken_at() != s1.broken_at()) ++mismatch;
            } else if (!s2.alive() && s2.broken_at() <= 1000) {
                ++mismatch;
            }
        }
    }
    REQUIRE(checked == 60);
    CHECK(mismatch == 0);
    CHECK(alive_1k > 0);
    CHECK(alive_2k > 0);
    // Breaks between steps 1000 and 2000 are rare at this rate.
    CHECK(alive_1k - alive_2k <= 3);
}

TEST_CASE("extraction on a deterministic path: counts, guard, provisional") {
    RunOptions opt;
    opt.backend = Backend::torus;
    opt.record_max_visited = true;
    auto [up, rec] = run_annealed(all_right(), 200, 5, 6, opt);
    ConeParams cone{0.3, ConeParams::Source::user};

    const auto recs = extract_renewals(up, rec, cone, 40, 40);
    REQUIRE(recs.size() == 160);
    CHECK(recs.front().tau == 0);
    long long prev = -1;
    long n_prov = 0;
    for (const auto& r : recs) {
        if (prev >= 0) {
            CHECK(r.tau == prev + 1);
            CHECK(r.dt_prev == 1);
            CHECK(r.dx_prev == 1);
        }
        prev = r.tau;
        // Provisional exactly when the data runs out before the horizon:
        // here past step 120 = 200 - guard - horizon.
        CHECK(r.provisional == (r.tau > 120));
        n_prov += r.provisional;
    }
    CHECK(n_prov == 39);

    const auto est = renewal_estimates(recs);
    CHECK(est.n_records == 121);
    CHECK(est.n_used == 120);
    CHECK(est.v_hat == 1.0);
    CHECK(est.sigma2_hat == 0.0);
    CHECK(est.v_ci.lo == est.v_ci.hi);

    CHECK_THROWS_AS(extract_renewals(up, rec, cone, 0, 40), ParamError);
    CHECK_THROWS_AS(extract_renewals(up, rec, cone, 40, -1), ParamError);

    auto [down, rec_down] = run_annealed(all_left(), 200, 7, 8, opt);
    CHECK_THROWS_AS(extract_renewals(down, rec_down, cone, 40, 40),
                    NoRenewalFound);
}

TEST_CASE("extraction pipeline at a small swap rate") {
    const auto p = drift_params(0.1);
    auto [traj, rec] = run_follow(p, 20000, 1001, 2001);
    ConeParams cone{0.1, ConeParams::Source::user};
    const auto recs = extract_renewals(traj, rec, cone, 300, 300);

    // Regenerations are dense here (hundreds per run).
    long n_nonprov = 0;
    bool seen_prov = false;
    long long prev_tau = -1;
    for (const auto& r : recs) {
        CHECK(r.tau > prev_tau);
        if (prev_tau >= 0) {
            CHECK(r.dt_prev == r.tau - prev_tau);
        }
        CHECK(r.x_tau == traj.positions[static_cast<size_t>(r.tau)]);
        prev_tau = r.tau;
        if (r.provisional) {
            seen_prov = true;
        } else {
            // Provisional records can only form a suffix.
            CHECK_FALSE(seen_prov);
            ++n_nonprov;
        }
    }
    CHECK(n_nonprov >= 250);

    // Between consecutive renewals the path stays inside the forward cone
    // of the earlier and the backward cone of the later point.
    const double s = cone.slope;
    for (size_t k = 1; k < recs.size(); ++k) {
        if (recs[k].provisional) break;
        const auto& a = recs[k - 1];
        const auto& b = recs[k];
        for (long long n = a.tau; n <= b.tau; ++n) {
            const double x = static_cast<double>(
                traj.positions[static_cast<size_t>(n)]);
            if (n - a.tau <= 300) {
                CHECK(x >= a.x_tau + s * static_cast<double>(n - a.tau) -
                              1e-9);
            }
            CHECK(x <= b.x_tau + s * static_cast<double>(n - b.tau) + 1e-9);
        }
    }

    // A fresh forward scan from each recorded time must come back alive;
    // this cross-checks the extractor's rewind-and-resume bookkeeping.
    long verified = 0;
    for (const auto& r : recs) {
        if (r.provisional || verified >= 10) break;
        const auto st = check_forward(traj, rec, r.tau, cone, 300);
        CHECK(st.alive());
        ++verified;
    }
    REQUIRE(verified == 10);

    // Velocity agreement with the direct endpoint estimate.
    const auto est = renewal_estimates(recs);
    const double v_direct =
        static_cast<double>(traj.positions.back()) / 20000.0;
    CHECK(std::abs(est.v_hat - v_direct) <= 0.03);
    CHECK(est.v_ci.lo <= est.v_hat);
    CHECK(est.v_hat <= est.v_ci.hi);
    CHECK(est.sigma2_hat > 0.0);
    CHECK(est.sigma2_ci.lo >= 0.0);
}

TEST_CASE("renewals stay plentiful at a moderate swap rate") {
    const auto p = drift_params(0.2);
    ConeParams cone{0.1, ConeParams::Source::user};
    for (uint64_t r = 0; r < 3; ++r) {
        auto [traj, rec] = run_follow(p, 20000, 1200 + r, 1300 + r);
        const auto recs = extract_renewals(traj, rec, cone, 300, 300);
        long n_nonprov = 0;
        for (const auto& rr : recs) n_nonprov += !rr.provisional;
        CHECK(n_nonprov >= 30);
    }
}

TEST_CASE("torus and following window agree on the velocity") {
    const auto p = drift_params(0.1);
    ConeParams cone{0.1, ConeParams::Source::user};

    RunOptions opt;
    opt.backend = Backend::torus;
    opt.record_max_visited = true;
    auto [t1, r1] = run_annealed(p, 4000, 51, 52, opt);
    const auto e1 = renewal_estimates(extract_renewals(t1, r1, cone, 300,
                                                       300));

    auto [t2, r2] = run_follow(p, 4000, 53, 54);
    const auto e2 = renewal_estimates(extract_renewals(t2, r2, cone, 300,
                                                       300));

    CHECK(e1.v_hat >= 0.3);
    CHECK(e2.v_hat >= 0.3);
    CHECK(std::abs(e1.v_hat - e2.v_hat) <= 0.06);
}

TEST_CASE("estimator arithmetic on synthetic records") {
    {
        std::vector<std::pair<long, long>> incs(11, {4, 2});
        const auto est = renewal_estimates(synthetic(incs));
        CHECK(est.n_records == 12);
        CHECK(est.n_used == 11);
        CHECK(est.v_hat == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(est.sigma2_hat == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(est.v_ci.lo == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(est.v_ci.hi == doctest::Approx(0.5).epsilon(1e-12));
    }
    {
        std::vector<std::pair<long, long>> incs;
        for (int i = 0; i < 20; ++i) {
            incs.push_back({2, 2});
            incs.push_back({4, 2});
        }
        const auto est = renewal_estimates(synthetic(incs));
        CHECK(est.v_hat == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
        CHECK(est.sigma2_hat == doctest::Approx(4.0 / 27.0).epsilon(1e-12));
        CHECK(est.v_ci.lo < est.v_hat);
        CHECK(est.v_ci.hi > est.v_hat);
        CHECK(est.sigma2_ci.lo >= 0.0);
    }
    {
        // Provisional tails are ignored entirely.
        auto recs = synthetic({{4, 2}, {4, 2}, {4, 2}});
        auto tail = recs.back();
        tail.tau += 7;
        tail.dt_prev = 7;
        tail.dx_prev = -3;
        tail.provisional = true;
        recs.push_back(tail);
        const auto est = renewal_estimates(recs);
        CHECK(est.n_records == 4);
        CHECK(est.v_hat == doctest::Approx(0.5).epsilon(1e-15));
    }
    {
        // Two records stand on one increment: estimates without intervals.
        const auto est = renewal_estimates(synthetic({{4, 2}}));
        CHECK(est.n_records == 2);
        CHECK(est.n_used == 1);
        CHECK(est.v_hat == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(est.v_ci.lo == -std::numeric_limits<double>::infinity());
        CHECK(est.v_ci.hi == std::numeric_limits<double>::infinity());
    }
    CHECK_THROWS_AS(renewal_estimates(synthetic({})), InsufficientRecords);
    CHECK_THROWS_AS(renewal_estimates(synthetic({{4, 2}}), 0.0), ParamError);
    CHECK_THROWS_AS(renewal_estimates(synthetic({{4, 2}}), 1.0), ParamError);
}

TEST_CASE("independence diagnostics: null coverage and power") {
    // White-noise null: the lag-1 correlation stays within 2 / sqrt(n) about
    // 95% of the time.
    long in_band = 0, total = 0;
    for (uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(split_seed(7777, seed));
        std::vector<std::pair<long, long>> incs;
        for (int i = 0; i < 1000; ++i) {
            long dt = 1;
            while (rng.next_double() < 0.5 && dt < 40) ++dt;
            incs.push_back({dt, rng.next_double() < 0.5 ? 1 : -1});
        }
        const auto diag = renewal_iid_tests(synthetic(incs), seed);
        const double band = 2.0 / std::sqrt(1000.0);
        in_band += std::abs(diag.dx_lag1.corr) < band;
        in_band += std::abs(diag.dt_lag1.corr) < band;
        total += 2;
    }
    CHECK(in_band >= 70);
    CHECK(in_band <= total);

    // Persistent gaps: a lag-1 correlation near 0.5 must be caught nearly
    // always at a thousand records.
    long rejected = 0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(split_seed(8888, seed));
        std::vector<std::pair<long, long>> incs;
        double prev = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double u = rng.next_double();
            const double g =
                std::sqrt(-2.0 * std::log(std::max(u, 1e-300))) *
                std::cos(6.283185307179586 * rng.next_double());
            prev = 0.58 * prev + g;
            const long dt = 1 + static_cast<long>(std::lround(
                                    std::min(20.0, std::abs(prev) * 3.0)));
            incs.push_back({dt, rng.next_double() < 0.5 ? 1 : -1});
        }
        const auto diag = renewal_iid_tests(synthetic(incs), seed);
        rejected += diag.perm_p_dt < 0.05;
    }
    CHECK(rejected >= 9);
}

TEST_CASE("gap-tail ladder anchors at the median") {
    Rng rng(4242);
    std::vector<std::pair<long, long>> incs;
    for (int i = 0; i < 2000; ++i) {
        // P(dt > n) close to n^-3.
        const double u = std::max(rng.next_double(), 1e-12);
        const long dt = static_cast<long>(std::ceil(std::pow(u, -1.0 / 3.0)));
        incs.push_back({dt, rng.next_double() < 0.5 ? 1 : -1});
    }
    const auto diag = renewal_iid_tests(synthetic(incs), 1);
    REQUIRE(!diag.dt_tail.empty());

    // The ladder starts at the median, where the guide is pinned to the
    // empirical value by construction.
    CHECK(diag.dt_tail[0].empirical ==
          doctest::Approx(diag.dt_tail[0].guide).epsilon(1e-12));
    for (size_t i = 1; i < diag.dt_tail.size(); ++i) {
        CHECK(diag.dt_tail[i].n > diag.dt_tail[i - 1].n);
        CHECK(diag.dt_tail[i].empirical <= diag.dt_tail[i - 1].empirical);
    }
    // Cubic-decay data should track the cubic guide while counts last.
    for (const auto& pt : diag.dt_tail) {
        if (pt.empirical * 2000.0 < 50.0) break;
        CHECK(pt.empirical <= pt.guide * 4.0);
        CHECK(pt.empirical >= pt.guide / 4.0);
    }

    CHECK_THROWS_AS(renewal_iid_tests(synthetic(
                        std::vector<std::pair<long, long>>(29, {2, 1})), 1),
                    InsufficientRecords);
}

TEST_CASE("real runs pass the independence diagnostics") {
    const auto p = drift_params(0.1);
    ConeParams cone{0.1, ConeParams::Source::user};
    long rejections = 0;
    for (uint64_t r = 0; r < 10; ++r) {
        auto [traj, rec] = run_follow(p, 20000, 3000 + r, 3100 + r);
        const auto recs = extract_renewals(traj, rec, cone, 300, 300);
        const auto diag = renewal_iid_tests(recs, 9000 + r);
        if (diag.perm_p_dx <= 0.01 || diag.perm_p_dt <= 0.01) ++rejections;
    }
    CHECK(rejections <= 1);
}

TEST_CASE("default cone slope tracks the pilot velocity with a floor") {
    const auto fast = default_cone(0.4);
    CHECK(fast.slope == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(fast.source == ConeParams::Source::estimated);
    CHECK(default_cone(0.1).slope == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(default_cone(-0.3).slope == doctest::Approx(0.05).epsilon(1e-15));
}
