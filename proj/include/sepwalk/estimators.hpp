#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepwalk/model.hpp"
#include "sepwalk/stats.hpp"
#include "sepwalk/walker.hpp"

namespace sepwalk {

// Replica ensemble runner. Replica i draws its environment seed from
// split_seed(master, 2i) and its walker seed from split_seed(master, 2i+1),
// so existing replicas keep their seeds when the count grows. `threads` > 1
// spreads replicas over worker threads; slots are written by index, so the
// result is identical for every thread count.
struct Ensemble {
    std::vector<Trajectory> trajectories;
    std::vector<EnvRecord> records;
};
Ensemble run_replicas(const ModelParams& params, long long replicas,
                      long long horizon, uint64_t master_seed,
                      const RunOptions& opts = {}, int threads = 1);

// Replica mean of X_N / N with a t-interval. All trajectories must share
// one horizon; fewer than two replicas cannot carry an interval.
struct VelocityEstimate {
    double v = 0.0;
    Interval ci;
    long long n_replicas = 0;
};
VelocityEstimate velocity_direct(const std::vector<Trajectory>& trajs,
                                 double level = 0.95);

// Fluctuation diagnostics around a given velocity: how the variance of
// X_n - n v scales with n, and how normal the standardized endpoints look.
struct QqPoint {
    double theoretical = 0.0;
    double empirical = 0.0;
};
struct CltReport {
    std::vector<long long> grid;    // times where the variance was read
    std::vector<double> variances;  // Var(X_n - n v) across replicas
    double scaling_exponent = 0.0;  // slope of log-variance against log-time
    bool degenerate = false;        // variance vanished, exponent is void
    double sigma_hat = 0.0;         // per-step sd used for standardization
    std::string sigma_source;       // "renewal" or "endpoint"
    double ks_stat = 0.0;           // endpoint sample against standard normal
    double ks_pvalue = 0.0;
    std::vector<QqPoint> qq;        // quantile pairs at 5%..95%
};
// Needs at least 100 replicas. The two-argument form standardizes with the
// endpoint sample variance; the three-argument form uses a variance
// estimated from renewal increments instead.
CltReport clt_diagnostics(const std::vector<Trajectory>& trajs, double v);
CltReport clt_diagnostics(const std::vector<Trajectory>& trajs, double v,
                          double renewal_sigma2);

// Mergeable endpoint summary: the part of an ensemble that parallel workers
// can each build locally and combine later. Merging is commutative and
// associative up to rounding.
struct ReplicaSummary {
    long long horizon = 0;  // 0 while empty
    Moments endpoint;       // moments of X_N over replicas
};
ReplicaSummary summarize(const std::vector<Trajectory>& trajs);
ReplicaSummary merge(const ReplicaSummary& a, const ReplicaSummary& b);

// Ensemble-level report: direct velocity always; renewal velocity and
// variance when regenerations could be extracted and pooled; scaling and
// normality diagnostics when the ensemble is large enough.
struct SummaryStats {
    long long n_replicas = 0;
    long long horizon = 0;
    double v_direct = 0.0;
    Interval v_direct_ci;
    bool has_renewal = false;
    double v_renewal = 0.0;
    Interval v_renewal_ci;
    long long n_renewals = 0;  // pooled non-provisional regeneration count
    double sigma2 = 0.0;
    Interval sigma2_ci;
    std::string sigma2_source;  // "renewal" or "endpoint"
    bool has_clt = false;
    double scaling_exponent = 0.0;
    bool scaling_degenerate = false;
    double ks_stat = 0.0;
    double ks_pvalue = 0.0;
};

struct SummaryOptions {
    double level = 0.95;
    // Pool per-replica regenerations into the renewal columns. Needs env
    // records from a label-carrying run (torus, or a following window).
    bool try_renewal = true;
    // Forward-cone slope; 0 derives one from the direct velocity estimate.
    double cone_slope = 0.0;
    long long fwd_horizon = 300;
    long long guard = 300;
};

SummaryStats summarize_replicas(const std::vector<Trajectory>& trajs,
                                const std::vector<EnvRecord>& recs,
                                const SummaryOptions& opt = {});

// One summary per swap rate, rows independent: a row that fails keeps its
// error text and leaves the others standing.
struct ScanOptions {
    long long horizon = 10000;
    long long replicas = 100;
    uint64_t master_seed = 1;
    RunOptions run;
    SummaryOptions summary;
    int threads = 1;
};
struct ScanRow {
    double gamma = 0.0;
    bool ok = false;
    std::string error;
    SummaryStats stats;
};
std::vector<ScanRow> gamma_scan(const ModelParams& base,
                                const std::vector<double>& gamma_grid,
                                const ScanOptions& opt = {});

}  // namespace sepwalk
