#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sepwalk/env.hpp"
#include "sepwalk/model.hpp"

namespace sepwalk {

// A realized walk. positions holds X_0..X_N; observations holds the
// occupancy bit the walker saw before each of the N steps, so the step from
// X_k to X_{k+1} was taken with probability alpha (bit 1) or beta (bit 0).
// visited_labels lists, in first-visit order, the environment labels found
// under the walker (torus backend only, where labels are conserved).
struct Trajectory {
    long long start_time = 0;
    long long start_site = 0;
    std::vector<long long> positions;
    std::vector<uint8_t> observations;
    std::vector<uint32_t> visited_labels;
    uint64_t seed_env = 0;
    uint64_t seed_walker = 0;

    long long steps() const {
        return static_cast<long long>(positions.size()) - 1;
    }
};

// Everything needed to reconstruct the environment's side of a run: the
// configuration and seed replay the event stream deterministically, so
// downstream analyses can rebuild any intermediate state instead of storing
// per-step snapshots. max_visited(n), when recorded, is the largest current
// position among labels the walker had stood on before step n (sentinel
// LLONG_MIN while no label was visited yet).
struct EnvRecord {
    ModelParams params;
    Backend backend = Backend::torus;
    long long extent = 0;
    bool follow_walker = false;
    uint64_t seed_env = 0;
    std::vector<long long> max_visited;
    EnvSnapshot final_state;
    uint64_t swap_events = 0;
};

// Hook invoked at every integer time m = 0..N with the environment at
// sim_time m and the walker at x = X_m (before the step out of m).
class StepObserver {
  public:
    virtual ~StepObserver() = default;
    virtual void observe(const EnvState& env, long long m, long long x) = 0;
};

struct RunOptions {
    Backend backend = Backend::torus;
    // 0 picks a default: for fixed frames, wide enough that the walker and
    // the information spreading from the boundary stay separated for the
    // whole run; for a following window, a fixed moving width.
    long long extent = 0;
    // Recenter a reservoir_window on the walker after every step. Keeps the
    // cost per step proportional to the window width instead of the horizon;
    // the price is that the environment beyond the window edge is replaced
    // by fresh equilibrium, a deliberate approximation for long runs.
    bool follow_walker = false;
    bool record_max_visited = false;
    StepObserver* observer = nullptr;
};

// Width used when RunOptions.extent is 0.
long long default_extent(const ModelParams& params, long long horizon,
                         bool follow_walker);

// Walker on a live environment started from equilibrium: between integer
// times the environment advances exactly 1.0; at time k the walker reads the
// occupancy under itself and steps right with probability alpha (occupied)
// or beta (vacant), using its own random stream. Throws WindowError if the
// walker leaves the tracked sites.
std::pair<Trajectory, EnvRecord> run_annealed(const ModelParams& params,
                                              long long horizon,
                                              uint64_t seed_env,
                                              uint64_t seed_walker,
                                              const RunOptions& opts = {});

// Walker in a frozen site-dependent environment: omega[i] is the
// right-step probability at lattice site i - omega.size()/2. Values must
// lie in (0,1), or [0,1] when allow_degenerate is set. Throws WindowError
// if the walker leaves the covered sites.
Trajectory run_quenched_static(const std::vector<double>& omega,
                               long long horizon, uint64_t seed_walker,
                               bool allow_degenerate = false);

}  // namespace sepwalk
