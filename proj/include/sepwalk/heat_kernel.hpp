#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sepwalk/model.hpp"
#include "sepwalk/stats.hpp"

namespace sepwalk {

// Transition weights of a rate-2*gamma continuous-time nearest-neighbor walk
// after time t, tabulated on a symmetric truncated support. The tail mass
// beyond the support is truncation_eps.
struct KernelTable {
    double gamma = 0.0;
    double t = 0.0;
    long long radius = 0;
    std::vector<double> values;  // index x + radius
    double truncation_eps = 0.0;

    double at(long long x) const {
        const long long i = x + radius;
        if (i < 0 || i >= static_cast<long long>(values.size())) return 0.0;
        return values[static_cast<size_t>(i)];
    }
};

// Single-site transition weight p(t, x) for the lattice diffusion
// d/dt p = gamma * (discrete Laplacian) p started from a unit mass at 0.
// Evaluated through scaled modified Bessel values by backward recurrence,
// switching to a spectral quadrature for very large gamma*t. Relative
// accuracy 1e-12 for gamma*t <= 1e4. DomainError on t < 0, RangeError on
// gamma < 0.
double heat_kernel(double gamma, double t, long long x);

// All weights with |x| <= radius in one pass; radius defaults to the point
// where the neglected tail is far below double precision.
KernelTable kernel_table(double gamma, double t);

// Box-summed kernels: first = sum of p(t, x+y) over |y| <= L, second = that
// sum divided by the box size 2L+1.
std::pair<double, double> box_kernels(double gamma, double t, long long x,
                                      long L);

// How sites beyond a finite profile's ends are treated when evolving it.
enum class Padding { zero, one, density };

struct MeanEvolution {
    std::vector<uint8_t> profile;
    double t = 0.0;
    std::vector<double> values;      // same indexing as profile
    double truncation_error = 0.0;   // bound from the kernel tail
};

// Expected occupancy profile after time t: convolution of the initial bits
// with the kernel, with out-of-range sites read as 0, 1, or pad_density
// according to the padding choice.
MeanEvolution mean_evolution(const std::vector<uint8_t>& profile, double gamma,
                             double t, Padding padding,
                             double pad_density = 0.0);

// Empirical tail of the box-averaged deviation between the evolved field and
// its expectation, at the box center, over independent equilibrium starts.
struct ConcentrationRow {
    double a = 0.0;
    double freq = 0.0;  // empirical P(deviation >= a)
};

struct ConcentrationTable {
    std::vector<ConcentrationRow> rows;
    double c_hat = 0.0;  // fitted decay rate of freq ~ exp(-c a^2 L)
    long replicas = 0;
};

// Samples P(<eta(t) - mean field(t)>_{0,L} >= a) over equilibrium starts and
// fits the exponential-in-a^2*L decay rate on the rows whose frequency lands
// in [1e-3, 1e-1]. InsufficientData when no row lands there.
ConcentrationTable concentration_check(const ModelParams& params, long L,
                                       double t,
                                       const std::vector<double>& a_grid,
                                       long replicas, uint64_t seed);

struct DissipationRow {
    double t = 0.0;
    double rescaled_t = 0.0;  // t divided by l^2/gamma
    double prob_bad = 0.0;    // empirical P(0 not good at radius J)
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct DissipationResult {
    std::vector<DissipationRow> rows;
    // Per-replica first grid time at which site 0 became good (time after
    // which it stayed good is not required); -1 when it never did.
    std::vector<double> first_good_time;
    double median_first_good = -1.0;
};

// Plants a solid block of particles on [-l, l] inside an equilibrium
// background, runs the dynamics, and tracks how quickly site 0 joins the
// good set at radius J. ConfigError when J > l: the probe scale must not
// exceed the planted block (l = 0 with J = 0 degenerates to watching an
// undisturbed equilibrium).
DissipationResult dissipation_check(long trap_halfwidth, long J,
                                    const ModelParams& params,
                                    const std::vector<double>& t_grid,
                                    long replicas, uint64_t seed);

}  // namespace sepwalk
