// Ensemble-level estimation: replica running, direct velocity, fluctuation
// diagnostics, mergeable summaries, and swap-rate scans.
#include "sepwalk/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "sepwalk/errors.hpp"
#include "sepwalk/renewal.hpp"
#include "sepwalk/rng.hpp"

namespace sepwalk {

namespace {

long long common_horizon(const std::vector<Trajectory>& trajs) {
    if (trajs.empty()) throw InsufficientData("no trajectories supplied");
    const long long n = trajs.front().steps();
    for (const auto& t : trajs) {
        if (t.steps() != n) {
            throw ParamError("trajectories disagree on the horizon: " +
                             std::to_string(t.steps()) + " vs " +
                             std::to_string(n));
        }
    }
    return n;
}

double endpoint_residual(const Trajectory& t, double v) {
    return static_cast<double>(t.positions.back()) -
           v * static_cast<double>(t.steps());
}

// Linear-interpolation sample quantile of a sorted vector.
double sorted_quantile(const std::vector<double>& xs, double p) {
    const double pos = p * static_cast<double>(xs.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    if (lo + 1 >= xs.size()) return xs.back();
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

CltReport clt_core(const std::vector<Trajectory>& trajs, double v,
                   double sigma2, const std::string& sigma_source) {
    const long long n_steps = common_horizon(trajs);
    const size_t n_rep = trajs.size();
    if (n_rep < 100) {
        throw InsufficientData(
            "clt_diagnostics: need at least 100 replicas, have " +
            std::to_string(n_rep));
    }

    CltReport rep;
    rep.sigma_source = sigma_source;

    // Variance of X_n - n v on a geometric time grid, halving down from the
    // horizon while at least 32 steps remain.
    std::vector<long long> grid;
    for (long long n = n_steps; n >= 32 && grid.size() < 9; n /= 2) {
        grid.push_back(n);
    }
    if (grid.empty()) grid.push_back(n_steps);
    std::reverse(grid.begin(), grid.end());
    rep.grid = grid;
    rep.variances.reserve(grid.size());
    for (long long n : grid) {
        Moments m;
        for (const auto& t : trajs) {
            m.add(static_cast<double>(t.positions[static_cast<size_t>(n)]) -
                  v * static_cast<double>(n));
        }
        rep.variances.push_back(m.var());
    }

    std::vector<double> log_n, log_var;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (rep.variances[i] > 1e-9) {
            log_n.push_back(std::log(static_cast<double>(grid[i])));
            log_var.push_back(std::log(rep.variances[i]));
        }
    }
    if (log_n.size() < 2) {
        rep.degenerate = true;
        rep.scaling_exponent = 0.0;
    } else {
        rep.scaling_exponent = fit_line(log_n, log_var).slope;
    }

    rep.sigma_hat = sigma2 > 0.0 ? std::sqrt(sigma2) : 0.0;
    std::vector<double> z(n_rep, 0.0);
    if (rep.sigma_hat > 0.0) {
        const double scale =
            rep.sigma_hat * std::sqrt(static_cast<double>(n_steps));
        for (size_t i = 0; i < n_rep; ++i) {
            z[i] = endpoint_residual(trajs[i], v) / scale;
        }
    }
    // With zero spread every standardized endpoint collapses to 0 and the
    // distance to the normal is exactly one half.
    rep.ks_stat = ks_statistic_normal(z);
    rep.ks_pvalue = ks_pvalue(rep.ks_stat, n_rep);

    std::sort(z.begin(), z.end());
    for (int k = 1; k <= 19; ++k) {
        QqPoint pt;
        const double p = 0.05 * static_cast<double>(k);
        pt.theoretical = normal_quantile(p);
        pt.empirical = sorted_quantile(z, p);
        rep.qq.push_back(pt);
    }
    return rep;
}

double endpoint_sigma2(const std::vector<Trajectory>& trajs) {
    Moments m;
    for (const auto& t : trajs) {
        m.add(static_cast<double>(t.positions.back()));
    }
    return m.var() / static_cast<double>(trajs.front().steps());
}

}  // namespace

Ensemble run_replicas(const ModelParams& params, long long replicas,
                      long long horizon, uint64_t master_seed,
                      const RunOptions& opts, int threads) {
    if (replicas < 1) throw ParamError("run_replicas: replicas must be >= 1");
    if (threads < 1) throw ParamError("run_replicas: threads must be >= 1");
    Ensemble out;
    out.trajectories.resize(static_cast<size_t>(replicas));
    out.records.resize(static_cast<size_t>(replicas));

    auto work = [&](long long r) {
        auto [traj, rec] = run_annealed(
            params, horizon,
            split_seed(master_seed, 2 * static_cast<uint64_t>(r)),
            split_seed(master_seed, 2 * static_cast<uint64_t>(r) + 1), opts);
        out.trajectories[static_cast<size_t>(r)] = std::move(traj);
        out.records[static_cast<size_t>(r)] = std::move(rec);
    };

    if (threads == 1 || replicas == 1) {
        for (long long r = 0; r < replicas; ++r) work(r);
        return out;
    }

    std::atomic<long long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const long long r = next.fetch_add(1);
            if (r >= replicas) return;
            try {
                work(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = static_cast<int>(
        std::min<long long>(threads, replicas));
    pool.reserve(static_cast<size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

VelocityEstimate velocity_direct(const std::vector<Trajectory>& trajs,
                                 double level) {
    if (trajs.size() < 2) {
        throw InsufficientData(
            "velocity_direct: need at least 2 replicas, have " +
            std::to_string(trajs.size()));
    }
    const double n_steps = static_cast<double>(common_horizon(trajs));
    Moments m;
    for (const auto& t : trajs) {
        m.add(static_cast<double>(t.positions.back()) / n_steps);
    }
    VelocityEstimate est;
    est.v = m.mean();
    est.ci = t_interval(m, level);
    est.n_replicas = static_cast<long long>(trajs.size());
    return est;
}

CltReport clt_diagnostics(const std::vector<Trajectory>& trajs, double v) {
    return clt_core(trajs, v, endpoint_sigma2(trajs), "endpoint");
}

CltReport clt_diagnostics(const std::vector<Trajectory>& trajs, double v,
                          double renewal_sigma2) {
    if (renewal_sigma2 < 0.0) {
        throw ParamError("clt_diagnostics: renewal_sigma2 must be >= 0");
    }
    return clt_core(trajs, v, renewal_sigma2, "renewal");
}

ReplicaSummary summarize(const std::vector<Trajectory>& trajs) {
    ReplicaSummary s;
    if (trajs.empty()) return s;
    s.horizon = common_horizon(trajs);
    for (const auto& t : trajs) {
        s.endpoint.add(static_cast<double>(t.positions.back()));
    }
    return s;
}

ReplicaSummary merge(const ReplicaSummary& a, const ReplicaSummary& b) {
    if (a.endpoint.n == 0.0) return b;
    if (b.endpoint.n == 0.0) return a;
    if (a.horizon != b.horizon) {
        throw ParamError("merge: summaries disagree on the horizon: " +
                         std::to_string(a.horizon) + " vs " +
                         std::to_string(b.horizon));
    }
    ReplicaSummary out = a;
    out.endpoint.merge(b.endpoint);
    return out;
}

SummaryStats summarize_replicas(const std::vector<Trajectory>& trajs,
                                const std::vector<EnvRecord>& recs,
                                const SummaryOptions& opt) {
    const auto vel = velocity_direct(trajs, opt.level);
    SummaryStats s;
    s.n_replicas = vel.n_replicas;
    s.horizon = common_horizon(trajs);
    s.v_direct = vel.v;
    s.v_direct_ci = vel.ci;

    if (opt.try_renewal && recs.size() == trajs.size()) {
        const ConeParams cone = opt.cone_slope > 0.0
                                    ? ConeParams{opt.cone_slope,
                                                 ConeParams::Source::user}
                                    : default_cone(s.v_direct);
        std::vector<std::vector<RenewalRecord>> runs;
        bool supported = true;
        for (size_t i = 0; i < trajs.size() && supported; ++i) {
            try {
                runs.push_back(extract_renewals(trajs[i], recs[i], cone,
                                                opt.fwd_horizon, opt.guard));
            } catch (const NoRenewalFound&) {
                // This replica contributes nothing; the pool decides.
            } catch (const BackendError&) {
                supported = false;
            }
        }
        if (supported && !runs.empty()) {
            try {
                const auto est = renewal_estimates(runs, opt.level);
                s.has_renewal = true;
                s.v_renewal = est.v_hat;
                s.v_renewal_ci = est.v_ci;
                s.n_renewals = est.n_records;
                s.sigma2 = est.sigma2_hat;
                s.sigma2_ci = est.sigma2_ci;
                s.sigma2_source = "renewal";
            } catch (const InsufficientRecords&) {
                // Fall through to the endpoint variance.
            }
        }
    }

    if (!s.has_renewal) {
        // Endpoint-based per-step variance with a t-interval from the
        // per-replica influence values.
        const double n_steps = static_cast<double>(s.horizon);
        Moments m;
        for (const auto& t : trajs) {
            m.add(static_cast<double>(t.positions.back()));
        }
        s.sigma2 = m.var() / n_steps;
        s.sigma2_source = "endpoint";
        Moments infl;
        for (const auto& t : trajs) {
            const double d = static_cast<double>(t.positions.back()) -
                             m.mean();
            infl.add(d * d / n_steps);
        }
        const auto ci = t_interval(infl, opt.level);
        s.sigma2_ci = {std::max(0.0, ci.lo), ci.hi};
    }

    if (trajs.size() >= 100) {
        const auto clt =
            s.sigma2_source == "renewal"
                ? clt_diagnostics(trajs, s.v_direct, s.sigma2)
                : clt_diagnostics(trajs, s.v_direct);
        s.has_clt = true;
        s.scaling_exponent = clt.scaling_exponent;
        s.scaling_degenerate = clt.degenerate;
        s.ks_stat = clt.ks_stat;
        s.ks_pvalue = clt.ks_pvalue;
    }
    return s;
}

std::vector<ScanRow> gamma_scan(const ModelParams& base,
                                const std::vector<double>& gamma_grid,
                                const ScanOptions& opt) {
    if (gamma_grid.empty()) {
        throw ParamError("gamma_scan: empty gamma grid");
    }
    std::vector<ScanRow> rows;
    rows.reserve(gamma_grid.size());
    for (size_t gi = 0; gi < gamma_grid.size(); ++gi) {
        ScanRow row;
        row.gamma = gamma_grid[gi];
        try {
            const auto params =
                make_params(base.alpha, base.beta, base.rho, gamma_grid[gi],
                            base.allow_degenerate);
            const auto ens = run_replicas(
                params, opt.replicas, opt.horizon,
                split_seed(opt.master_seed, static_cast<uint64_t>(gi)),
                opt.run, opt.threads);
            row.stats = summarize_replicas(ens.trajectories, ens.records,
                                           opt.summary);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sepwalk
