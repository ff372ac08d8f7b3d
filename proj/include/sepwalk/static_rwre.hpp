#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepwalk/model.hpp"

namespace sepwalk {

// Cumulative potential of a frozen environment. omega[k] is the right-step
// probability at site span_lo + 1 + k; v[k] is the potential at site
// span_lo + k. Each increment is ln((1 - w) / w) of the site it enters, and
// the anchor is v = 0 at site 0, so uphill stretches of v are exactly the
// regions the walk crosses slowly: the mean crossing time of a rise is
// exponential in its height.
struct StaticPotential {
    long long span_lo = 0;
    long long span_hi = 0;
    std::vector<double> omega;
    std::vector<double> v;

    double omega_at(long long site) const;
    double v_at(long long site) const;
};

// Builds the potential from per-site right-step probabilities strictly
// inside (0, 1). The span [span_lo, span_lo + omega.size()] must contain
// site 0 for the anchor. Sums are compensated so increments reconstruct
// the inputs even on deep environments.
StaticPotential potential(const std::vector<double>& omega,
                          long long span_lo = 0);

// Right-step probabilities induced by an occupancy profile: alpha on
// occupied sites, beta on vacant ones.
std::vector<double> omega_from_bits(const ModelParams& params,
                                    const std::vector<uint8_t>& bits);

// Probability that the walk started at 0 hits -depth before +1: the
// potential-sum closed form 1 / sum_{i in [-depth, 0]} e^{v(i)}. The
// potential must span [-depth, 1]. Switches to a log-sum-exp evaluation
// when the potential peaks too high for direct exponentials.
double exit_left_prob(const StaticPotential& pot, long long depth);

// The same kind of quantity from first principles, with no potential in
// sight: solves the (a + b - 1)-state harmonic system
// h(x) = w_x h(x+1) + (1 - w_x) h(x-1), h(-a) = 1, h(b) = 0 by tridiagonal
// elimination and returns h(0). omega[k] is the right-step probability at
// interior site -a + 1 + k, so omega.size() must equal a + b - 1.
double exit_prob_oracle(const std::vector<double>& omega, long long a,
                        long long b);

// Empirical exit statistics: the fraction of `walks` independent quenched
// walks from 0 that hit -a before b, with omega indexed as in
// exit_prob_oracle.
double exit_left_mc(const std::vector<double>& omega, long long a,
                    long long b, long long walks, uint64_t seed);

// Largest rise of the potential inside a window: max v(j) - v(i) over
// a <= i <= j <= b. Zero when the potential never climbs.
struct ExcursionStat {
    double bracket = 0.0;
};
ExcursionStat excursion_bracket(const StaticPotential& pot, long long a,
                                long long b);

// Mean time for the walk started at 0 to first reach `target`, in the
// chain where every site left of `barrier` steps right surely (the
// escape-time analysis pushes all sub-barrier mass rightward, which can
// only speed the chain up, so ceilings proved for this chain transfer).
// Exact, via the one-step recursion for per-edge crossing times. The
// potential must span [barrier - 1, target].
double reflected_hit_time_exact(const StaticPotential& pot,
                                long long barrier, long long target);

// The same mean estimated by simulation.
double reflected_hit_time_mc(const StaticPotential& pot, long long barrier,
                             long long target, long long walks,
                             uint64_t seed);

// A-priori ceiling on reflected_hit_time_exact(pot, -2 * reach, 2 * reach):
// (4 * reach)^2 * e^bracket / min_step, where the bracket and the smallest
// step probability are taken over the reflected interval.
double reflected_hit_time_bound(const StaticPotential& pot, long long reach);

enum class StaticRegime {
    transient_right_ballistic,
    transient_right_subballistic,
    recurrent,
    transient_left_ballistic,
    transient_left_subballistic,
};

// Hyphenated lowercase label, e.g. "transient-right-subballistic".
std::string regime_name(StaticRegime regime);

// Where the frozen-environment walk sits on the drift map. The sign of
// E ln((1-w)/w) picks the direction. Within a transient direction the walk
// has positive speed exactly when the matching mean ratio, E[(1-w)/w]
// going right or E[w/(1-w)] going left, stays below 1; rare steep
// counter-slopes push that mean past 1 and zero the speed without flipping
// the direction. `boundary` flags decisions that landed within 1e-9 of a
// threshold.
struct StaticClassification {
    StaticRegime regime = StaticRegime::recurrent;
    double log_slope = 0.0;
    double mean_ratio = 0.0;
    double mean_ratio_inv = 0.0;
    bool boundary = false;
};
StaticClassification static_classify(const ModelParams& params);

}  // namespace sepwalk
