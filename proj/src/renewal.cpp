#include "sepwalk/renewal.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <string>

#include "sepwalk/errors.hpp"
#include "sepwalk/rng.hpp"

namespace sepwalk {

GoodSetQuery make_good_query(const ModelParams& params, long L, long L_max) {
    if (L < 0 || L > L_max) {
        throw ParamError("make_good_query: need 0 <= L <= L_max, got L=" +
                         std::to_string(L) + " L_max=" + std::to_string(L_max));
    }
    GoodSetQuery q;
    q.L = L;
    q.L_max = L_max;
    q.threshold = (1.0 + ScaleSequences{}.epsilon(L)) * params.rho;
    return q;
}

bool good_site(const EnvSnapshot& snap, long long x, const GoodSetQuery& q) {
    const long long n = static_cast<long long>(snap.occupancy.size());
    const long long idx = x - snap.offset;
    if (idx - q.L_max < 0 || idx + q.L_max >= n) {
        throw WindowError("good_site: box of radius " + std::to_string(q.L_max) +
                          " around site " + std::to_string(x) +
                          " leaves the snapshot");
    }
    long long sum = 0;
    for (long long i = idx - q.L; i <= idx + q.L; ++i) {
        sum += snap.occupancy[static_cast<size_t>(i)];
    }
    for (long long r = q.L;; ++r) {
        if (static_cast<double>(sum) >
            q.threshold * static_cast<double>(2 * r + 1)) {
            return false;
        }
        if (r == q.L_max) break;
        sum += snap.occupancy[static_cast<size_t>(idx - r - 1)] +
               snap.occupancy[static_cast<size_t>(idx + r + 1)];
    }
    return true;
}

long long ForwardStatus::broken_at() const {
    if (alive()) return -1;
    if (d_alive) return f_broken_at;
    if (f_alive) return d_broken_at;
    return std::min(d_broken_at, f_broken_at);
}

namespace {

void require_label_support(const EnvRecord& rec, const char* who) {
    if (rec.backend == Backend::reservoir_window && !rec.follow_walker) {
        throw BackendError(std::string(who) +
                           ": a fixed reservoir window cannot resolve label"
                           " positions; use the torus or a following window");
    }
}

// Re-derives the environment's side of a recorded run, step by step, from
// the stored configuration and seed. The event stream is a deterministic
// function of the seed, so states reached here match the original run
// exactly at every integer time.
class Replay {
  public:
    Replay(const Trajectory& traj, const EnvRecord& rec)
        : traj_(traj),
          env_(init_equilibrium(rec.params, rec.extent, rec.backend,
                                rec.seed_env)),
          follow_(rec.follow_walker) {}

    EnvState& env() { return env_; }
    long long time() const { return m_; }

    void step() {
        env_.advance(1.0);
        ++m_;
        if (follow_) {
            const long long x = traj_.positions[static_cast<size_t>(m_)];
            env_.shift_window(x - (env_.origin_offset + env_.extent / 2));
        }
    }

    void run_to(long long m) {
        while (m_ < m) step();
    }

    // Rolls back to a state copied earlier (used after a successful forward
    // check, whose scan ran the clock ahead of the next candidate).
    void restore(EnvState&& saved, long long m) {
        env_ = std::move(saved);
        m_ = m;
    }

  private:
    const Trajectory& traj_;
    EnvState env_;
    bool follow_;
    long long m_ = 0;
};

long long true_position(const EnvState& env, long long site_idx,
                        uint32_t label) {
    long long pos = env.origin_offset + site_idx;
    if (env.backend == Backend::torus) {
        pos += env.extent * static_cast<long long>(env.winding[label]);
    }
    return pos;
}

// Per-step maxima over the labels the walker had visited, rebuilt by
// replaying the run (used when the record was taken without them).
std::vector<long long> replay_max_visited(const Trajectory& traj,
                                          const EnvRecord& rec) {
    Replay rp(traj, rec);
    const long long n_steps = traj.steps();
    const size_t nlabels = rp.env().nu.size();
    std::vector<uint8_t> vis(nlabels, 0);
    std::vector<uint32_t> vis_gen(nlabels, 0);
    std::vector<long long> out;
    out.reserve(static_cast<size_t>(n_steps) + 1);
    for (long long m = 0; m <= n_steps; ++m) {
        const EnvState& env = rp.env();
        long long best = LLONG_MIN;
        for (size_t i = 0; i < env.mu.size(); ++i) {
            const uint32_t l = env.mu[i];
            if (vis[l] && vis_gen[l] == env.generation[l]) {
                const long long pos =
                    true_position(env, static_cast<long long>(i), l);
                if (pos > best) best = pos;
            }
        }
        out.push_back(best);
        if (m == n_steps) break;
        const uint32_t here =
            env.label_at(traj.positions[static_cast<size_t>(m)]);
        if (!(vis[here] && vis_gen[here] == env.generation[here])) {
            vis[here] = 1;
            vis_gen[here] = env.generation[here];
        }
        rp.step();
    }
    return out;
}

std::vector<long long> resolve_max_visited(const Trajectory& traj,
                                           const EnvRecord& rec) {
    const size_t want = static_cast<size_t>(traj.steps()) + 1;
    if (!rec.max_visited.empty()) {
        if (rec.max_visited.size() != want) {
            throw ParamError("record and trajectory disagree on length");
        }
        return rec.max_visited;
    }
    return replay_max_visited(traj, rec);
}

// Forward D/F scan from a candidate step. The environment must sit exactly
// at the candidate time on entry. Mark arrays are reused across calls; an
// epoch bump invalidates all previous marks at once.
class ForwardScan {
  public:
    ForwardStatus run(Replay& rp, const Trajectory& traj, long long start,
                      double slope, long long steps, bool stop_at_first) {
        const EnvState& env = rp.env();
        marks_.resize(env.nu.size(), 0);
        mark_gen_.resize(env.nu.size(), 0);
        ++epoch_;

        const long long x0 =
            traj.positions[static_cast<size_t>(start)];
        for (size_t i = 0; i < env.mu.size(); ++i) {
            const uint32_t l = env.mu[i];
            if (true_position(env, static_cast<long long>(i), l) < x0) {
                marks_[l] = epoch_;
                mark_gen_[l] = env.generation[l];
            }
        }

        ForwardStatus st;
        for (long long n = 1; n <= steps; ++n) {
            rp.step();
            const double line = static_cast<double>(x0) +
                                slope * static_cast<double>(n);
            if (st.d_alive &&
                static_cast<double>(
                    traj.positions[static_cast<size_t>(start + n)]) < line) {
                st.d_alive = false;
                st.d_broken_at = n;
            }
            if (st.f_alive) {
                long long best = LLONG_MIN;
                const EnvState& e = rp.env();
                for (size_t i = 0; i < e.mu.size(); ++i) {
                    const uint32_t l = e.mu[i];
                    if (marks_[l] == epoch_ &&
                        mark_gen_[l] == e.generation[l]) {
                        const long long pos =
                            true_position(e, static_cast<long long>(i), l);
                        if (pos > best) best = pos;
                    }
                }
                if (best != LLONG_MIN && static_cast<double>(best) >= line) {
                    st.f_alive = false;
                    st.f_broken_at = n;
                }
            }
            if (stop_at_first && !st.alive()) break;
            if (!st.d_alive && !st.f_alive) break;
        }
        return st;
    }

  private:
    std::vector<uint32_t> marks_;
    std::vector<uint32_t> mark_gen_;
    uint32_t epoch_ = 0;
};

}  // namespace

std::vector<long long> find_candidates(const Trajectory& traj,
                                       const EnvRecord& rec,
                                       const ConeParams& cone) {
    require_label_support(rec, "find_candidates");
    if (traj.positions.empty()) {
        throw ParamError("find_candidates: empty trajectory");
    }
    if (!(cone.slope > 0.0 && cone.slope < 1.0)) {
        throw ParamError("find_candidates: cone slope must lie in (0, 1)");
    }
    const std::vector<long long> max_vis = resolve_max_visited(traj, rec);
    const long long n_steps = traj.steps();
    std::vector<long long> out;
    double run_max = -std::numeric_limits<double>::infinity();
    for (long long n = 0; n <= n_steps; ++n) {
        const double y =
            static_cast<double>(traj.positions[static_cast<size_t>(n)]) -
            cone.slope * static_cast<double>(n);
        if (y >= run_max &&
            max_vis[static_cast<size_t>(n)] <
                traj.positions[static_cast<size_t>(n)]) {
            out.push_back(n);
        }
        if (y > run_max) run_max = y;
    }
    return out;
}

ForwardStatus check_forward(const Trajectory& traj, const EnvRecord& rec,
                            long long tau, const ConeParams& cone,
                            long long horizon) {
    require_label_support(rec, "check_forward");
    if (tau < 0 || tau > traj.steps()) {
        throw ParamError("check_forward: tau outside the trajectory");
    }
    if (horizon < 0) throw ParamError("check_forward: negative horizon");
    if (tau + horizon > traj.steps()) {
        throw HorizonError("check_forward: tau + horizon exceeds the"
                           " trajectory length");
    }
    Replay rp(traj, rec);
    rp.run_to(tau);
    ForwardScan scan;
    return scan.run(rp, traj, tau, cone.slope, horizon,
                    /*stop_at_first=*/false);
}

std::vector<RenewalRecord> extract_renewals(const Trajectory& traj,
                                            const EnvRecord& rec,
                                            const ConeParams& cone,
                                            long long horizon,
                                            long long guard) {
    require_label_support(rec, "extract_renewals");
    if (horizon < 1) throw ParamError("extract_renewals: horizon must be >= 1");
    if (guard < 0) throw ParamError("extract_renewals: negative guard");

    const std::vector<long long> cands = find_candidates(traj, rec, cone);
    const long long n_steps = traj.steps();

    std::vector<RenewalRecord> records;
    Replay rp(traj, rec);
    ForwardScan scan;
    long long resume_from = 0;
    long long last_tau = -1;

    for (size_t ci = 0; ci < cands.size(); ++ci) {
        const long long c = cands[ci];
        if (c < resume_from) continue;
        const long long h_eff = std::min(horizon, n_steps - guard - c);
        if (h_eff < 1) break;  // remaining candidates sit in the guard band

        rp.run_to(c);
        EnvState checkpoint = rp.env();
        const ForwardStatus st =
            scan.run(rp, traj, c, cone.slope, h_eff, /*stop_at_first=*/true);
        if (st.alive()) {
            RenewalRecord r;
            r.tau = c;
            r.x_tau = traj.positions[static_cast<size_t>(c)];
            r.provisional = h_eff < horizon;
            if (last_tau >= 0) {
                r.dt_prev = c - last_tau;
                r.dx_prev = r.x_tau -
                            traj.positions[static_cast<size_t>(last_tau)];
            }
            records.push_back(r);
            last_tau = c;
            // The scan ran the clock h_eff steps ahead; later candidates may
            // sit before that, so rewind to the recorded state.
            rp.restore(std::move(checkpoint), c);
            resume_from = c + 1;
        } else {
            // Next attempt starts at the first candidate at or after the
            // break; the clock already sits at the break step.
            resume_from = c + st.broken_at();
        }
    }

    if (records.empty()) {
        throw NoRenewalFound("no candidate survived its forward check"
                             " (diagnostic, not fatal)");
    }
    return records;
}

namespace {

// Increments between consecutive usable records. The first record's gap is
// measured from the run start, not from a renewal, so it is dropped here.
void usable_increments(const std::vector<RenewalRecord>& records,
                       std::vector<double>* dx, std::vector<double>* dt,
                       long long* n_records) {
    *n_records = 0;
    bool first = true;
    for (const auto& r : records) {
        if (r.provisional) continue;
        ++*n_records;
        if (first) {
            first = false;
            continue;
        }
        dx->push_back(static_cast<double>(r.dx_prev));
        dt->push_back(static_cast<double>(r.dt_prev));
    }
}

double sd_of(const std::vector<double>& xs) {
    Moments m;
    for (double x : xs) m.add(x);
    return m.sd();
}

RenewalEstimates estimates_core(const std::vector<double>& dx,
                                const std::vector<double>& dt,
                                long long n_records, double level);

}  // namespace

RenewalEstimates renewal_estimates(const std::vector<RenewalRecord>& records,
                                   double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ParamError("renewal_estimates: level must lie in (0, 1)");
    }
    std::vector<double> dx, dt;
    long long n_records = 0;
    usable_increments(records, &dx, &dt, &n_records);
    return estimates_core(dx, dt, n_records, level);
}

RenewalEstimates renewal_estimates(
    const std::vector<std::vector<RenewalRecord>>& runs, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ParamError("renewal_estimates: level must lie in (0, 1)");
    }
    std::vector<double> dx, dt;
    long long n_records = 0;
    for (const auto& records : runs) {
        // Each run anchors itself: its first record contributes no
        // increment, exactly as in the single-run path.
        std::vector<double> run_dx, run_dt;
        long long run_records = 0;
        usable_increments(records, &run_dx, &run_dt, &run_records);
        dx.insert(dx.end(), run_dx.begin(), run_dx.end());
        dt.insert(dt.end(), run_dt.begin(), run_dt.end());
        n_records += run_records;
    }
    return estimates_core(dx, dt, n_records, level);
}

namespace {

RenewalEstimates estimates_core(const std::vector<double>& dx,
                                const std::vector<double>& dt,
                                long long n_records, double level) {
    RenewalEstimates est;
    est.n_records = n_records;
    if (est.n_records < 2) {
        throw InsufficientRecords(
            "renewal_estimates: need at least 2 non-provisional records, have " +
            std::to_string(est.n_records));
    }
    est.n_used = static_cast<long long>(dx.size());

    double sum_dx = 0.0, sum_dt = 0.0;
    for (size_t i = 0; i < dx.size(); ++i) {
        sum_dx += dx[i];
        sum_dt += dt[i];
    }
    est.v_hat = sum_dx / sum_dt;
    double sum_e2 = 0.0;
    for (size_t i = 0; i < dx.size(); ++i) {
        const double e = dx[i] - est.v_hat * dt[i];
        sum_e2 += e * e;
    }
    est.sigma2_hat = sum_e2 / sum_dt;

    const double inf = std::numeric_limits<double>::infinity();
    if (est.n_used < 2) {
        est.v_ci = {-inf, inf};
        est.sigma2_ci = {-inf, inf};
        return est;
    }

    // First-order (delta method) standard errors via per-increment influence
    // values; both estimators are smooth functions of sample means.
    const double n = static_cast<double>(est.n_used);
    const double mdt = sum_dt / n;
    double m_edt = 0.0;
    for (size_t i = 0; i < dx.size(); ++i) {
        m_edt += (dx[i] - est.v_hat * dt[i]) * dt[i];
    }
    m_edt /= n;
    std::vector<double> if_v(dx.size()), if_s(dx.size());
    for (size_t i = 0; i < dx.size(); ++i) {
        const double e = dx[i] - est.v_hat * dt[i];
        if_v[i] = e / mdt;
        if_s[i] = (e * e - est.sigma2_hat * dt[i] - 2.0 * (m_edt / mdt) * e) /
                  mdt;
    }
    const double q = student_t_quantile(0.5 + level / 2.0, n - 1.0);
    const double se_v = sd_of(if_v) / std::sqrt(n);
    const double se_s = sd_of(if_s) / std::sqrt(n);
    est.v_ci = {est.v_hat - q * se_v, est.v_hat + q * se_v};
    est.sigma2_ci = {std::max(0.0, est.sigma2_hat - q * se_s),
                     est.sigma2_hat + q * se_s};
    return est;
}

}  // namespace

IidDiagnostics renewal_iid_tests(const std::vector<RenewalRecord>& records,
                                 uint64_t seed) {
    std::vector<double> dx, dt;
    long long n_records = 0;
    usable_increments(records, &dx, &dt, &n_records);
    if (static_cast<long long>(dx.size()) < 30) {
        throw InsufficientRecords(
            "renewal_iid_tests: need at least 30 usable increments, have " +
            std::to_string(dx.size()));
    }
    IidDiagnostics diag;
    diag.dx_lag1 = lag1_autocorr(dx);
    diag.dt_lag1 = lag1_autocorr(dt);
    diag.perm_p_dx = permutation_pvalue_lag1(dx, 2000, seed);
    diag.perm_p_dt = permutation_pvalue_lag1(dt, 2000, split_seed(seed, 1));

    // Survival of the gap lengths on a sparse ladder from the median up,
    // with a cubic-decay reference anchored at the median.
    std::vector<double> sorted = dt;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    const double max_dt = sorted.back();
    const double n = static_cast<double>(sorted.size());
    double base_p = 0.0;
    for (double v : sorted) base_p += v > med ? 1.0 : 0.0;
    base_p /= n;
    double level_n = std::max(1.0, med);
    while (level_n <= max_dt) {
        TailPoint pt;
        pt.n = static_cast<long long>(level_n);
        double count = 0.0;
        for (double v : sorted) count += v > level_n ? 1.0 : 0.0;
        pt.empirical = count / n;
        pt.guide = base_p * std::pow(med / level_n, 3.0);
        diag.dt_tail.push_back(pt);
        level_n = std::max(level_n + 1.0, std::ceil(level_n * 1.5));
    }
    return diag;
}

ConeParams default_cone(double pilot_velocity) {
    ConeParams cone;
    cone.slope = std::max(0.05, 0.25 * pilot_velocity);
    cone.source = ConeParams::Source::estimated;
    return cone;
}

}  // namespace sepwalk
