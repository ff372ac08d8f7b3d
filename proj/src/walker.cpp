#include "sepwalk/walker.hpp"

#include <climits>
#include <cmath>

#include "sepwalk/errors.hpp"
#include "sepwalk/rng.hpp"

namespace sepwalk {

long long default_extent(const ModelParams& params, long long horizon,
                         bool follow_walker) {
    if (follow_walker) return 2048;
    // The walker stays within [-N, N]; the buffer keeps boundary effects
    // (spreading diffusively, with a wide safety margin on the tail) away
    // from every site the walker can read.
    const double spread =
        8.0 * std::sqrt(params.gamma * static_cast<double>(horizon));
    return 2 * horizon + static_cast<long long>(std::ceil(spread)) + 64;
}

std::pair<Trajectory, EnvRecord> run_annealed(const ModelParams& params,
                                              long long horizon,
                                              uint64_t seed_env,
                                              uint64_t seed_walker,
                                              const RunOptions& opts) {
    if (horizon < 1) throw ParamError("run_annealed: horizon must be >= 1");
    if (opts.follow_walker && opts.backend != Backend::reservoir_window) {
        throw ConfigError("follow_walker requires the reservoir_window"
                          " backend");
    }
    const long long extent =
        opts.extent > 0 ? opts.extent
                        : default_extent(params, horizon, opts.follow_walker);
    EnvState env = init_equilibrium(params, extent, opts.backend, seed_env);
    Rng walk(seed_walker);

    Trajectory traj;
    traj.seed_env = seed_env;
    traj.seed_walker = seed_walker;
    traj.positions.reserve(static_cast<size_t>(horizon) + 1);
    traj.observations.reserve(static_cast<size_t>(horizon));
    traj.positions.push_back(0);

    const bool track_visited = opts.backend == Backend::torus;
    const size_t nlabels = env.nu.size();
    std::vector<uint8_t> vis;
    std::vector<uint32_t> vis_gen;
    if (track_visited || opts.record_max_visited) {
        vis.assign(nlabels, 0);
        vis_gen.assign(nlabels, 0);
    }

    EnvRecord rec;
    rec.params = params;
    rec.backend = opts.backend;
    rec.extent = extent;
    rec.follow_walker = opts.follow_walker;
    rec.seed_env = seed_env;
    if (opts.record_max_visited)
        rec.max_visited.reserve(static_cast<size_t>(horizon) + 1);

    long long x = 0;
    for (long long m = 0; m <= horizon; ++m) {
        if (x < env.leftmost() || x > env.rightmost()) {
            throw WindowError("walker left the tracked sites at step " +
                              std::to_string(m));
        }
        if (opts.record_max_visited) {
            // Largest current position among labels visited strictly before
            // this step.
            long long best = LLONG_MIN;
            const bool torus = env.backend == Backend::torus;
            for (size_t i = 0; i < env.mu.size(); ++i) {
                const uint32_t l = env.mu[i];
                if (vis[l] && vis_gen[l] == env.generation[l]) {
                    long long pos =
                        env.origin_offset + static_cast<long long>(i);
                    if (torus)
                        pos += env.extent *
                               static_cast<long long>(env.winding[l]);
                    if (pos > best) best = pos;
                }
            }
            rec.max_visited.push_back(best);
        }
        if (opts.observer) opts.observer->observe(env, m, x);
        if (m == horizon) break;

        const uint32_t label_here = env.label_at(x);
        if (track_visited || opts.record_max_visited) {
            if (!(vis[label_here] &&
                  vis_gen[label_here] == env.generation[label_here])) {
                vis[label_here] = 1;
                vis_gen[label_here] = env.generation[label_here];
                if (track_visited) traj.visited_labels.push_back(label_here);
            }
        }

        const int occ = env.nu[label_here];
        traj.observations.push_back(static_cast<uint8_t>(occ));
        const double p = occ ? params.alpha : params.beta;
        x += walk.next_double() < p ? 1 : -1;
        traj.positions.push_back(x);

        env.advance(1.0);
        if (opts.follow_walker) {
            env.shift_window(x - (env.origin_offset + env.extent / 2));
        }
    }

    rec.final_state = env.snapshot(opts.backend == Backend::torus);
    rec.swap_events = env.swap_events;
    return {std::move(traj), std::move(rec)};
}

Trajectory run_quenched_static(const std::vector<double>& omega,
                               long long horizon, uint64_t seed_walker,
                               bool allow_degenerate) {
    if (omega.empty()) throw ConfigError("run_quenched_static: empty omega");
    if (horizon < 1)
        throw ParamError("run_quenched_static: horizon must be >= 1");
    for (double w : omega) {
        const bool ok = allow_degenerate ? (w >= 0.0 && w <= 1.0)
                                         : (w > 0.0 && w < 1.0);
        if (!ok) {
            throw RangeError("omega value " + std::to_string(w) +
                             " outside the admissible range");
        }
    }
    const long long offset = -(static_cast<long long>(omega.size()) / 2);
    Rng walk(seed_walker);
    Trajectory traj;
    traj.seed_walker = seed_walker;
    traj.positions.reserve(static_cast<size_t>(horizon) + 1);
    long long x = 0;
    traj.positions.push_back(x);
    for (long long m = 0; m < horizon; ++m) {
        const long long idx = x - offset;
        if (idx < 0 || idx >= static_cast<long long>(omega.size())) {
            throw WindowError("walker left the omega range at step " +
                              std::to_string(m));
        }
        x += walk.next_double() < omega[static_cast<size_t>(idx)] ? 1 : -1;
        traj.positions.push_back(x);
    }
    return traj;
}

}  // namespace sepwalk
