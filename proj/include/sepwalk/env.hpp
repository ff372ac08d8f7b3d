#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepwalk/model.hpp"
#include "sepwalk/rng.hpp"

namespace sepwalk {

// Spatial backends. torus: periodic lattice, particle labels conserved,
// suitable whenever label bookkeeping matters. reservoir_window: open
// segment whose two edge sites are refreshed to Bernoulli(rho) at the swap
// rate, so the window stays in product equilibrium; labels at the edges are
// recycled and the window can slide.
enum class Backend { torus, reservoir_window };

struct EnvSnapshot {
    double time = 0.0;
    long long offset = 0;  // lattice coordinate of occupancy[0]
    std::vector<uint8_t> occupancy;
    bool has_labels = false;
    std::vector<long long> label_positions;  // label -> lattice coordinate
};

// One line: "t=<real> offset=<int> bits=<0/1 string>".
std::string dump_snapshot(const EnvSnapshot& s);

// Exclusion dynamics in the label representation: a permutation of labels
// over sites plus a fixed Bernoulli type per label. Every edge swaps its two
// labels at rate gamma independently of the types, which leaves each label
// performing a rate-2*gamma simple walk while the type field evolves as the
// exclusion process.
class EnvState {
  public:
    Backend backend = Backend::torus;
    long long extent = 0;         // tracked sites
    long long origin_offset = 0;  // lattice coordinate of site index 0
    double sim_time = 0.0;
    ModelParams params;
    Rng clock{0};

    std::vector<uint32_t> mu;  // site index -> label
    std::vector<uint8_t> nu;   // label -> type bit
    // torus only: net wrap count per label, so label positions are genuine
    // lattice coordinates rather than residues.
    std::vector<int32_t> winding;
    // Bumped when a label id is recycled at a sliding-window edge, so
    // observers holding per-label state can detect staleness.
    std::vector<uint32_t> generation;

    uint64_t swap_events = 0;
    uint64_t refresh_events = 0;

    // Runs the jump chain for a time increment: the number of events in the
    // increment is Poisson(total rate), each event picks a uniform slot
    // (edge swap, or boundary refresh on reservoir_window). Equal in law to
    // per-edge exponential clocks because superposed Poisson streams place
    // their marks i.i.d. uniformly.
    void advance(double dt);

    int occupancy(long long x) const;
    // Mean occupancy over the 2L+1 sites centered at x (torus wraps,
    // reservoir_window throws WindowError if the box leaves the extent).
    double empirical_density(long long x, long L) const;

    uint32_t label_at(long long x) const;
    // Lattice coordinate of a label, wrap-corrected on the torus.
    long long position_of(uint32_t label) const;
    // label -> site index table, rebuilt on demand after advances.
    const std::vector<uint32_t>& label_sites() const;

    // Slides a reservoir_window by delta sites, recycling the label ids that
    // fall off one edge as fresh Bernoulli(rho) types entering the other.
    void shift_window(long long delta);

    EnvSnapshot snapshot(bool with_labels = false) const;

    long long site_index(long long x) const;  // wraps or throws WindowError
    long long leftmost() const { return origin_offset; }
    long long rightmost() const { return origin_offset + extent - 1; }

  private:
    mutable std::vector<uint32_t> xi_cache_;
    mutable bool xi_stale_ = true;
};

// Product-Bernoulli(rho) start: types i.i.d., labels at their home sites.
// The tracked range is centered on the origin. ConfigError when extent < 3.
EnvState init_equilibrium(const ModelParams& params, long long extent,
                          Backend backend, uint64_t seed);

// Deterministic initial occupancy (bit i sits at lattice coordinate
// i - extent/2). ConfigError on an empty profile or extent < 3.
EnvState init_profile(const ModelParams& params,
                      const std::vector<uint8_t>& occupancy, Backend backend,
                      uint64_t seed);

// Positions of the requested labels sampled at the given nondecreasing times
// (>= current sim_time), advancing the state to each grid point in turn.
// Torus only; BackendError otherwise.
std::vector<std::vector<long long>> label_trace(EnvState& env,
                                                const std::vector<uint32_t>& labels,
                                                const std::vector<double>& t_grid);

}  // namespace sepwalk
