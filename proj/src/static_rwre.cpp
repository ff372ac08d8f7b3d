// Frozen-environment analysis: potential, exact exit probabilities, an
// independent harmonic-system solver, reflected-chain hitting times, and
// drift-regime classification.
#include "sepwalk/static_rwre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sepwalk/errors.hpp"
#include "sepwalk/rng.hpp"

namespace sepwalk {

namespace {

// Compensated running sum; deep environments accumulate thousands of
// increments and downstream formulas exponentiate the result, so the
// cheap extra digit matters.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double log_ratio(double w) { return std::log((1.0 - w) / w); }

void require_unit_open(const std::vector<double>& omega) {
    for (double w : omega) {
        if (!(w > 0.0 && w < 1.0)) {
            throw RangeError("omega value " + std::to_string(w) +
                             " outside (0,1)");
        }
    }
}

void require_span(const StaticPotential& pot, long long lo, long long hi,
                  const char* who) {
    if (pot.span_lo > lo || pot.span_hi < hi) {
        throw SpanError(std::string(who) + ": potential spans [" +
                        std::to_string(pot.span_lo) + ", " +
                        std::to_string(pot.span_hi) + "], need [" +
                        std::to_string(lo) + ", " + std::to_string(hi) +
                        "]");
    }
}

// exp-sum over v(lo..hi), stable against high potential peaks.
double log_sum_exp_v(const StaticPotential& pot, long long lo, long long hi) {
    double vmax = -std::numeric_limits<double>::infinity();
    for (long long i = lo; i <= hi; ++i) vmax = std::max(vmax, pot.v_at(i));
    Kahan acc;
    for (long long i = lo; i <= hi; ++i) acc.add(std::exp(pot.v_at(i) - vmax));
    return vmax + std::log(acc.sum);
}

}  // namespace

double StaticPotential::omega_at(long long site) const {
    if (site <= span_lo || site > span_hi) {
        throw SpanError("omega_at: site " + std::to_string(site) +
                        " outside (" + std::to_string(span_lo) + ", " +
                        std::to_string(span_hi) + "]");
    }
    return omega[static_cast<size_t>(site - span_lo - 1)];
}

double StaticPotential::v_at(long long site) const {
    if (site < span_lo || site > span_hi) {
        throw SpanError("v_at: site " + std::to_string(site) + " outside [" +
                        std::to_string(span_lo) + ", " +
                        std::to_string(span_hi) + "]");
    }
    return v[static_cast<size_t>(site - span_lo)];
}

StaticPotential potential(const std::vector<double>& omega,
                          long long span_lo) {
    require_unit_open(omega);
    const long long n = static_cast<long long>(omega.size());
    const long long span_hi = span_lo + n;
    if (span_lo > 0 || span_hi < 0) {
        throw ParamError("potential: span [" + std::to_string(span_lo) +
                         ", " + std::to_string(span_hi) +
                         "] must contain the anchor site 0");
    }
    StaticPotential pot;
    pot.span_lo = span_lo;
    pot.span_hi = span_hi;
    pot.omega = omega;
    pot.v.assign(static_cast<size_t>(n) + 1, 0.0);
    const long long anchor = -span_lo;  // index of site 0

    Kahan right;
    for (long long k = anchor + 1; k <= n; ++k) {
        // omega[k-1] is the probability at site span_lo + k.
        right.add(log_ratio(omega[static_cast<size_t>(k - 1)]));
        pot.v[static_cast<size_t>(k)] = right.sum;
    }
    Kahan left;
    for (long long k = anchor - 1; k >= 0; --k) {
        left.add(-log_ratio(omega[static_cast<size_t>(k)]));
        pot.v[static_cast<size_t>(k)] = left.sum;
    }
    return pot;
}

std::vector<double> omega_from_bits(const ModelParams& params,
                                    const std::vector<uint8_t>& bits) {
    std::vector<double> omega(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
        omega[i] = bits[i] ? params.alpha : params.beta;
    }
    return omega;
}

double exit_left_prob(const StaticPotential& pot, long long depth) {
    if (depth < 1) throw ParamError("exit_left_prob: depth must be >= 1");
    require_span(pot, -depth, 1, "exit_left_prob");
    double vmax = 0.0;  // v(0) = 0 is always in the sum
    for (long long i = -depth; i <= 0; ++i) {
        vmax = std::max(vmax, pot.v_at(i));
    }
    if (vmax > 600.0) {
        return std::exp(-log_sum_exp_v(pot, -depth, 0));
    }
    Kahan acc;
    for (long long i = -depth; i <= 0; ++i) acc.add(std::exp(pot.v_at(i)));
    return 1.0 / acc.sum;
}

double exit_prob_oracle(const std::vector<double>& omega, long long a,
                        long long b) {
    if (a < 1 || b < 1) {
        throw ParamError("exit_prob_oracle: interval ends must satisfy "
                         "a >= 1, b >= 1");
    }
    const long long n = a + b - 1;
    if (static_cast<long long>(omega.size()) != n) {
        throw ParamError("exit_prob_oracle: need " + std::to_string(n) +
                         " interior probabilities, got " +
                         std::to_string(omega.size()));
    }
    require_unit_open(omega);

    // h(x) - w_x h(x+1) - (1-w_x) h(x-1) = 0 on the interior, with the
    // absorbed values h(-a) = 1 and h(b) = 0 moved to the right-hand side.
    // The matrix is tridiagonal and diagonally dominant, so plain forward
    // elimination is stable.
    std::vector<double> diag(static_cast<size_t>(n), 1.0);
    std::vector<double> rhs(static_cast<size_t>(n), 0.0);
    rhs[0] = 1.0 - omega[0];
    for (long long i = 1; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        const double m = -(1.0 - omega[k]) / diag[k - 1];
        diag[k] -= m * (-omega[k - 1]);
        rhs[k] -= m * rhs[k - 1];
    }
    std::vector<double> h(static_cast<size_t>(n), 0.0);
    h[static_cast<size_t>(n - 1)] =
        rhs[static_cast<size_t>(n - 1)] / diag[static_cast<size_t>(n - 1)];
    for (long long i = n - 2; i >= 0; --i) {
        const size_t k = static_cast<size_t>(i);
        h[k] = (rhs[k] + omega[k] * h[k + 1]) / diag[k];
    }
    return h[static_cast<size_t>(a - 1)];
}

double exit_left_mc(const std::vector<double>& omega, long long a,
                    long long b, long long walks, uint64_t seed) {
    if (a < 1 || b < 1) {
        throw ParamError("exit_left_mc: interval ends must satisfy "
                         "a >= 1, b >= 1");
    }
    if (static_cast<long long>(omega.size()) != a + b - 1) {
        throw ParamError("exit_left_mc: omega size does not match interval");
    }
    if (walks < 1) throw ParamError("exit_left_mc: walks must be >= 1");
    require_unit_open(omega);
    Rng rng(seed);
    long long hits = 0;
    for (long long w = 0; w < walks; ++w) {
        long long x = 0;
        while (x > -a && x < b) {
            x += rng.next_double() < omega[static_cast<size_t>(x + a - 1)]
                     ? 1
                     : -1;
        }
        hits += x == -a;
    }
    return static_cast<double>(hits) / static_cast<double>(walks);
}

ExcursionStat excursion_bracket(const StaticPotential& pot, long long a,
                                long long b) {
    if (a > b) throw ParamError("excursion_bracket: window ends reversed");
    require_span(pot, a, b, "excursion_bracket");
    ExcursionStat stat;
    double run_min = pot.v_at(a);
    for (long long i = a; i <= b; ++i) {
        const double val = pot.v_at(i);
        stat.bracket = std::max(stat.bracket, val - run_min);
        run_min = std::min(run_min, val);
    }
    return stat;
}

double reflected_hit_time_exact(const StaticPotential& pot,
                                long long barrier, long long target) {
    if (barrier > 0 || target < 1) {
        throw ParamError("reflected_hit_time: need barrier <= 0 < target");
    }
    require_span(pot, barrier - 1, target, "reflected_hit_time");
    // e_x, the mean time to first cross the edge (x, x+1), satisfies
    // e_x = 1/w_x + ((1-w_x)/w_x) e_{x-1}; below the barrier every step is
    // rightward, so the seed value is exactly 1.
    double total = 0.0;
    double e_prev = 1.0;
    for (long long x = barrier; x < target; ++x) {
        const double w = pot.omega_at(x);
        const double e = 1.0 / w + (1.0 - w) / w * e_prev;
        if (x >= 0) total += e;
        e_prev = e;
    }
    return total;
}

double reflected_hit_time_mc(const StaticPotential& pot, long long barrier,
                             long long target, long long walks,
                             uint64_t seed) {
    if (barrier > 0 || target < 1) {
        throw ParamError("reflected_hit_time: need barrier <= 0 < target");
    }
    if (walks < 1) throw ParamError("reflected_hit_time_mc: walks >= 1");
    require_span(pot, barrier - 1, target, "reflected_hit_time");
    std::vector<double> w(static_cast<size_t>(target - barrier));
    for (long long x = barrier; x < target; ++x) {
        w[static_cast<size_t>(x - barrier)] = pot.omega_at(x);
    }
    Rng rng(seed);
    double total = 0.0;
    for (long long run = 0; run < walks; ++run) {
        long long x = 0;
        long long steps = 0;
        while (x < target) {
            ++steps;
            if (x < barrier) {
                ++x;
            } else {
                x += rng.next_double() < w[static_cast<size_t>(x - barrier)]
                         ? 1
                         : -1;
            }
        }
        total += static_cast<double>(steps);
    }
    return total / static_cast<double>(walks);
}

double reflected_hit_time_bound(const StaticPotential& pot, long long reach) {
    if (reach < 1) throw ParamError("reflected_hit_time_bound: reach >= 1");
    const long long barrier = -2 * reach;
    const long long target = 2 * reach;
    require_span(pot, barrier - 1, target, "reflected_hit_time_bound");
    double min_step = 1.0;
    for (long long x = barrier; x < target; ++x) {
        min_step = std::min(min_step, pot.omega_at(x));
    }
    const double bracket = excursion_bracket(pot, barrier, target).bracket;
    const double side = 4.0 * static_cast<double>(reach);
    return side * side * std::exp(bracket) / min_step;
}

std::string regime_name(StaticRegime regime) {
    switch (regime) {
        case StaticRegime::transient_right_ballistic:
            return "transient-right-ballistic";
        case StaticRegime::transient_right_subballistic:
            return "transient-right-subballistic";
        case StaticRegime::recurrent:
            return "recurrent";
        case StaticRegime::transient_left_ballistic:
            return "transient-left-ballistic";
        case StaticRegime::transient_left_subballistic:
            return "transient-left-subballistic";
    }
    return "unknown";
}

namespace {

// rho-weighted mean of f over the two site types, skipping zero-weight
// terms so degenerate step probabilities cannot poison the sum with
// 0 * inf.
double site_mean(const ModelParams& p, double f_alpha, double f_beta) {
    double total = 0.0;
    if (p.rho > 0.0) total += p.rho * f_alpha;
    if (p.rho < 1.0) total += (1.0 - p.rho) * f_beta;
    return total;
}

}  // namespace

StaticClassification static_classify(const ModelParams& p) {
    StaticClassification out;
    out.log_slope = site_mean(p, log_ratio(p.alpha), log_ratio(p.beta));
    out.mean_ratio = site_mean(p, (1.0 - p.alpha) / p.alpha,
                               (1.0 - p.beta) / p.beta);
    out.mean_ratio_inv = site_mean(p, p.alpha / (1.0 - p.alpha),
                                   p.beta / (1.0 - p.beta));
    const double tol = 1e-9;
    out.boundary = std::abs(out.log_slope) < tol;
    if (out.log_slope < 0.0) {
        out.boundary = out.boundary || std::abs(out.mean_ratio - 1.0) < tol;
        out.regime = out.mean_ratio < 1.0
                         ? StaticRegime::transient_right_ballistic
                         : StaticRegime::transient_right_subballistic;
    } else if (out.log_slope > 0.0) {
        out.boundary =
            out.boundary || std::abs(out.mean_ratio_inv - 1.0) < tol;
        out.regime = out.mean_ratio_inv < 1.0
                         ? StaticRegime::transient_left_ballistic
                         : StaticRegime::transient_left_subballistic;
    } else {
        out.regime = StaticRegime::recurrent;
    }
    return out;
}

}  // namespace sepwalk
