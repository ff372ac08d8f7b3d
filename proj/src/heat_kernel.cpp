#include "sepwalk/heat_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "sepwalk/env.hpp"
#include "sepwalk/errors.hpp"
#include "sepwalk/renewal.hpp"
#include "sepwalk/rng.hpp"

namespace sepwalk {

namespace {

// Backward recurrence for the scaled Bessel family: returns
// v[k] = e^{-u} I_k(u) for k = 0..kmax. Seeding far above both kmax and u
// and normalizing with v0 + 2*sum(v_k) = 1 gives full double accuracy
// without ever forming e^u. Intermediate growth is absorbed by
// power-of-two rescales; entries stored before a rescale are brought to the
// final scale at the end (underflowing to zero exactly when they are
// negligibly small relative to the peak).
std::vector<double> scaled_bessel_row(double u, long long kmax) {
    std::vector<double> out(static_cast<size_t>(kmax) + 1, 0.0);
    if (u <= 0.0) {
        out[0] = 1.0;
        return out;
    }
    long long start = std::max(kmax, static_cast<long long>(std::ceil(u)));
    start += 2 * static_cast<long long>(
                     std::ceil(std::sqrt(static_cast<double>(start) + 1.0))) +
             60;
    std::vector<int> epoch(static_cast<size_t>(kmax) + 1, 0);
    int rescales = 0;
    const double kCap = 0x1p512;
    double f_up = 0.0;     // f_{k+1}
    double f_k = 0x1p-512; // f_k, arbitrary seed scale
    double tail_sum = 0.0; // accumulates 2 * f_k over k >= 1
    for (long long k = start; k >= 1; --k) {
        tail_sum += 2.0 * f_k;
        if (k <= kmax) {
            out[static_cast<size_t>(k)] = f_k;
            epoch[static_cast<size_t>(k)] = rescales;
        }
        const double f_down = f_up + (2.0 * static_cast<double>(k) / u) * f_k;
        f_up = f_k;
        f_k = f_down;
        if (f_k > kCap) {
            f_k *= 0x1p-512;
            f_up *= 0x1p-512;
            tail_sum *= 0x1p-512;
            ++rescales;
        }
    }
    out[0] = f_k;
    epoch[0] = rescales;
    const double total = f_k + tail_sum;
    for (size_t k = 0; k < out.size(); ++k) {
        const int lag = rescales - epoch[k];
        out[k] = std::ldexp(out[k] / total, -512 * lag);
    }
    return out;
}

// Quadrature form of the same kernel, used when u is too large for the
// recurrence to be economical: (1/pi) * integral over [0, pi] of
// exp(-u (1 - cos s)) cos(x s). The integrand extends to an analytic
// periodic function, so the trapezoid rule converges geometrically.
double spectral_kernel(double u, long long x) {
    const long long m =
        64 + 32 * static_cast<long long>(std::ceil(std::sqrt(u)));
    const double h = M_PI / static_cast<double>(m);
    // Endpoints: s=0 gives 1*cos(0), s=pi gives exp(-2u)*cos(pi x).
    double sum = 0.5 * (1.0 + std::exp(-2.0 * u) * (x % 2 == 0 ? 1.0 : -1.0));
    for (long long j = 1; j < m; ++j) {
        const double s = h * static_cast<double>(j);
        const double half = std::sin(0.5 * s);
        sum += std::exp(-2.0 * u * half * half) *
               std::cos(s * static_cast<double>(x));
    }
    return std::max(0.0, sum * h / M_PI);
}

void check_time_rate(double gamma, double t, const char* who) {
    if (gamma < 0.0) {
        throw RangeError(std::string(who) + ": gamma must be nonnegative");
    }
    if (t < 0.0) {
        throw DomainError(std::string(who) + ": t must be nonnegative");
    }
}

}  // namespace

double heat_kernel(double gamma, double t, long long x) {
    check_time_rate(gamma, t, "heat_kernel");
    const double u = 2.0 * gamma * t;
    const long long ax = x < 0 ? -x : x;
    if (u == 0.0) return ax == 0 ? 1.0 : 0.0;
    if (gamma * t > 1e4) return spectral_kernel(u, ax);
    return scaled_bessel_row(u, ax)[static_cast<size_t>(ax)];
}

KernelTable kernel_table(double gamma, double t) {
    check_time_rate(gamma, t, "kernel_table");
    KernelTable table;
    table.gamma = gamma;
    table.t = t;
    const double gt = gamma * t;
    table.radius = static_cast<long long>(
        std::ceil(2.0 * gt + 12.0 * std::sqrt(gt) + 30.0));
    const auto row = scaled_bessel_row(2.0 * gt, table.radius);
    table.values.resize(static_cast<size_t>(2 * table.radius) + 1);
    double mass = 0.0;
    for (long long x = -table.radius; x <= table.radius; ++x) {
        const double v = row[static_cast<size_t>(x < 0 ? -x : x)];
        table.values[static_cast<size_t>(x + table.radius)] = v;
        mass += v;
    }
    table.truncation_eps = std::max(0.0, 1.0 - mass);
    return table;
}

std::pair<double, double> box_kernels(double gamma, double t, long long x,
                                      long L) {
    check_time_rate(gamma, t, "box_kernels");
    if (L < 0) throw RangeError("box_kernels: L must be nonnegative");
    const KernelTable table = kernel_table(gamma, t);
    double bold = 0.0;
    for (long long y = -L; y <= L; ++y) bold += table.at(x + y);
    return {bold, bold / static_cast<double>(2 * L + 1)};
}

MeanEvolution mean_evolution(const std::vector<uint8_t>& profile, double gamma,
                             double t, Padding padding, double pad_density) {
    check_time_rate(gamma, t, "mean_evolution");
    if (profile.empty()) throw ConfigError("mean_evolution: empty profile");
    double pad = 0.0;
    switch (padding) {
        case Padding::zero: pad = 0.0; break;
        case Padding::one: pad = 1.0; break;
        case Padding::density:
            if (!(pad_density >= 0.0 && pad_density <= 1.0)) {
                throw RangeError("mean_evolution: pad_density must lie in"
                                 " [0,1]");
            }
            pad = pad_density;
            break;
    }
    MeanEvolution ev;
    ev.profile = profile;
    ev.t = t;
    const KernelTable table = kernel_table(gamma, t);
    const long long n = static_cast<long long>(profile.size());
    const long long r = table.radius;
    ev.values.resize(profile.size());
    for (long long i = 0; i < n; ++i) {
        double acc = 0.0;
        double mass_seen = 0.0;
        const long long j_lo = std::max(-r, i - (n - 1));
        const long long j_hi = std::min(r, i);
        for (long long j = j_lo; j <= j_hi; ++j) {
            const double w = table.values[static_cast<size_t>(j + r)];
            mass_seen += w;
            acc += w * static_cast<double>(profile[static_cast<size_t>(i - j)]);
        }
        // Everything outside the profile (including the truncated kernel
        // tail) is read as the padding value.
        acc += (1.0 - mass_seen) * pad;
        ev.values[static_cast<size_t>(i)] = std::clamp(acc, 0.0, 1.0);
    }
    ev.truncation_error = table.truncation_eps;
    return ev;
}

ConcentrationTable concentration_check(const ModelParams& params, long L,
                                       double t,
                                       const std::vector<double>& a_grid,
                                       long replicas, uint64_t seed) {
    if (replicas < 1000) {
        throw ParamError("concentration_check: needs at least 1000 replicas");
    }
    if (L < 1) throw RangeError("concentration_check: L must be >= 1");
    check_time_rate(params.gamma, t, "concentration_check");
    const double gt = params.gamma * t;
    const long long spread = static_cast<long long>(
        std::ceil(2.0 * gt + 12.0 * std::sqrt(gt) + 30.0));
    const long long extent = 2 * (L + spread) + 63;

    std::vector<double> devs(static_cast<size_t>(replicas));
    for (long r = 0; r < replicas; ++r) {
        EnvState env =
            init_equilibrium(params, extent, Backend::reservoir_window,
                             split_seed(seed, static_cast<uint64_t>(r)));
        const EnvSnapshot start = env.snapshot();
        const MeanEvolution mean =
            mean_evolution(start.occupancy, params.gamma, t, Padding::density,
                           params.rho);
        env.advance(t);
        const long long center = extent / 2;  // site 0's index
        double expected = 0.0;
        for (long long i = center - L; i <= center + L; ++i) {
            expected += mean.values[static_cast<size_t>(i)];
        }
        expected /= static_cast<double>(2 * L + 1);
        devs[static_cast<size_t>(r)] = env.empirical_density(0, L) - expected;
    }

    ConcentrationTable table;
    table.replicas = replicas;
    Moments c_fit;
    for (double a : a_grid) {
        long long hits = 0;
        for (double d : devs) hits += d >= a;
        const double freq =
            static_cast<double>(hits) / static_cast<double>(replicas);
        table.rows.push_back({a, freq});
        if (a > 0.0 && freq >= 1e-3 && freq <= 1e-1) {
            c_fit.add(-std::log(freq) / (a * a * static_cast<double>(L)));
        }
    }
    if (c_fit.n == 0) {
        throw InsufficientData(
            "concentration_check: no grid point produced a tail frequency in"
            " [1e-3, 1e-1]; widen the a grid");
    }
    table.c_hat = c_fit.mean();
    return table;
}

DissipationResult dissipation_check(long trap_halfwidth, long J,
                                    const ModelParams& params,
                                    const std::vector<double>& t_grid,
                                    long replicas, uint64_t seed) {
    if (trap_halfwidth < 0 || J < 0) {
        throw RangeError("dissipation_check: radii must be nonnegative");
    }
    if (J > trap_halfwidth) {
        throw ConfigError("dissipation_check: probe radius J exceeds the"
                          " planted trap halfwidth");
    }
    if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) ||
        t_grid.front() < 0.0) {
        throw ConfigError("dissipation_check: t_grid must be sorted and"
                          " nonnegative");
    }
    if (replicas < 1) throw ParamError("dissipation_check: replicas >= 1");

    const long long l = trap_halfwidth;
    long long extent = std::max<long long>({20 * l, 20 * J, 511});
    if (extent % 2 == 0) ++extent;  // symmetric around site 0
    const long long half = extent / 2;
    const GoodSetQuery query = make_good_query(params, J, half);

    std::vector<long long> bad_counts(t_grid.size(), 0);
    DissipationResult out;
    out.first_good_time.assign(static_cast<size_t>(replicas), -1.0);

    for (long r = 0; r < replicas; ++r) {
        Rng profile_rng(split_seed(seed, 2 * static_cast<uint64_t>(r)));
        std::vector<uint8_t> bits(static_cast<size_t>(extent));
        for (long long i = 0; i < extent; ++i) {
            const long long coord = i - half;
            const bool in_trap = coord >= -l && coord <= l;
            bits[static_cast<size_t>(i)] =
                in_trap ? 1
                        : (profile_rng.next_bernoulli(params.rho) ? 1 : 0);
        }
        // Reservoir boundaries let the trap's excess mass drain away; a torus
        // would conserve it and never return to the background density.
        EnvState env =
            init_profile(params, bits, Backend::reservoir_window,
                         split_seed(seed, 2 * static_cast<uint64_t>(r) + 1));
        double prev = 0.0;
        for (size_t gi = 0; gi < t_grid.size(); ++gi) {
            env.advance(t_grid[gi] - prev);
            prev = t_grid[gi];
            const bool good = good_site(env.snapshot(), 0, query);
            if (!good) {
                ++bad_counts[gi];
            } else if (out.first_good_time[static_cast<size_t>(r)] < 0.0) {
                out.first_good_time[static_cast<size_t>(r)] = t_grid[gi];
            }
        }
    }

    const double scale =
        l > 0 ? params.gamma / (static_cast<double>(l) * static_cast<double>(l))
              : 1.0;
    for (size_t gi = 0; gi < t_grid.size(); ++gi) {
        DissipationRow row;
        row.t = t_grid[gi];
        row.rescaled_t = t_grid[gi] * scale;
        row.prob_bad = static_cast<double>(bad_counts[gi]) /
                       static_cast<double>(replicas);
        const double se = std::sqrt(
            std::max(0.0, row.prob_bad * (1.0 - row.prob_bad)) /
            static_cast<double>(replicas));
        row.ci_lo = std::max(0.0, row.prob_bad - 1.96 * se);
        row.ci_hi = std::min(1.0, row.prob_bad + 1.96 * se);
        out.rows.push_back(row);
    }

    std::vector<double> finite;
    for (double ft : out.first_good_time) {
        if (ft >= 0.0) finite.push_back(ft);
    }
    if (finite.size() * 2 > out.first_good_time.size()) {
        // Median over all replicas, with never-good counting as +infinity:
        // well defined as soon as more than half the replicas reached
        // goodness. Sorting puts the finite times first, so the median
        // lands inside them.
        std::sort(finite.begin(), finite.end());
        out.median_first_good = finite[out.first_good_time.size() / 2];
    }
    return out;
}

}  // namespace sepwalk
