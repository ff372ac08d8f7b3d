#pragma once

#include <cstdint>
#include <vector>

#include "sepwalk/env.hpp"
#include "sepwalk/model.hpp"
#include "sepwalk/stats.hpp"
#include "sepwalk/walker.hpp"

namespace sepwalk {

// A site x is "good" when every centered box average at radius L' between L
// and L_max stays at or below the threshold (1 + epsilon(L)) * rho: no
// visible particle pile-up around x at any probed scale.
struct GoodSetQuery {
    long L = 1;
    long L_max = 1;
    double threshold = 0.0;
};

// Fills the threshold from the model density and the tolerance sequence.
GoodSetQuery make_good_query(const ModelParams& params, long L, long L_max);

bool good_site(const EnvSnapshot& snap, long long x, const GoodSetQuery& q);

// Space-time cone with the given slope, used both backward (no past point of
// the path above the cone) and forward (path keeps climbing at least this
// fast, no marked particle catches up to it).
struct ConeParams {
    double slope = 0.05;
    enum class Source { user, estimated } source = Source::user;
};

// One regeneration event. dt_prev/dx_prev are measured from the previous
// record (zero for the first). provisional marks records whose forward
// conditions could only be checked up to the end of the trajectory minus the
// guard band, not to the full horizon.
struct RenewalRecord {
    long long tau = 0;
    long long x_tau = 0;
    long long dt_prev = 0;
    long long dx_prev = 0;
    bool provisional = false;
};

// Step indices n that satisfy both backward conditions: the whole past path
// lies on or below the line of the given slope through (n, X_n), and every
// label the walker has stood on currently sits strictly left of X_n. Runs in
// O(N) off a running maximum plus the recorded per-step visited maxima
// (recomputed by replay when the record lacks them). BackendError unless the
// record can resolve label positions (torus or following window).
std::vector<long long> find_candidates(const Trajectory& traj,
                                       const EnvRecord& rec,
                                       const ConeParams& cone);

// Outcome of the forward scan started at a step tau. Checked per step n =
// 1..horizon: the walk must stay at or above X_tau + slope*n, and no label
// that was strictly left of X_tau at time tau may reach X_tau + slope*n.
struct ForwardStatus {
    bool d_alive = true;
    long long d_broken_at = -1;  // relative step, -1 when alive
    bool f_alive = true;
    long long f_broken_at = -1;
    bool alive() const { return d_alive && f_alive; }
    // First break of either condition, -1 when alive at the horizon.
    long long broken_at() const;
};

ForwardStatus check_forward(const Trajectory& traj, const EnvRecord& rec,
                            long long tau, const ConeParams& cone,
                            long long horizon);

// Sequential regeneration extraction: walk the candidates in order; when a
// candidate's forward conditions break at absolute step s, resume the
// candidate scan from s; when they survive to the horizon (or to the end of
// data minus the guard band, which flags the record provisional), record the
// renewal and continue after it. Throws NoRenewalFound when nothing
// survives; callers that tolerate empty results catch it.
std::vector<RenewalRecord> extract_renewals(const Trajectory& traj,
                                            const EnvRecord& rec,
                                            const ConeParams& cone,
                                            long long horizon,
                                            long long guard);

struct RenewalEstimates {
    double v_hat = 0.0;
    double sigma2_hat = 0.0;
    long long n_records = 0;  // non-provisional records seen
    long long n_used = 0;     // increments used (first record excluded)
    Interval v_ci{0.0, 0.0};
    Interval sigma2_ci{0.0, 0.0};
};

// Ratio-of-means velocity and variance estimators over inter-renewal
// increments, with delta-method confidence intervals. The first record is
// excluded (its law differs from the later, identically distributed gaps).
// Provisional records are skipped. InsufficientRecords below 2
// non-provisional records; with exactly 2 the point estimates stand on the
// single increment and the intervals are infinite.
RenewalEstimates renewal_estimates(const std::vector<RenewalRecord>& records,
                                   double level = 0.95);

// Pooled variant over several independent runs. Each run anchors itself:
// its first non-provisional record contributes no increment, and the
// remaining increments are pooled into one sample. n_records counts
// non-provisional records across all runs.
RenewalEstimates renewal_estimates(
    const std::vector<std::vector<RenewalRecord>>& runs, double level = 0.95);

struct TailPoint {
    long long n;
    double empirical;  // P(dt > n)
    double guide;      // n^-3 reference curve anchored at the median
};

struct IidDiagnostics {
    Lag1 dx_lag1;
    Lag1 dt_lag1;
    double perm_p_dx = 1.0;
    double perm_p_dt = 1.0;
    std::vector<TailPoint> dt_tail;
};

// Independence and tail diagnostics on the inter-renewal increments.
// InsufficientRecords below 30 usable increments.
IidDiagnostics renewal_iid_tests(const std::vector<RenewalRecord>& records,
                                 uint64_t seed = 1);

// Default forward-cone slope: a floor of 0.05 or a quarter of the measured
// pilot velocity, whichever is larger.
ConeParams default_cone(double pilot_velocity);

}  // namespace sepwalk
