// stats.hpp -- small statistics toolbox used by the estimators and tests.
#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace sepwalk {

// Mergeable moment accumulator. Kept as raw (count, sum, sum of squares)
// so that replica summaries form a monoid: merge order changes results only
// at rounding level (tested to 1e-12).
struct Moments {
    double n = 0.0;
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double x) {
        n += 1.0;
        sum += x;
        sumsq += x * x;
    }
    void merge(const Moments& o) {
        n += o.n;
        sum += o.sum;
        sumsq += o.sumsq;
    }
    double mean() const { return n > 0 ? sum / n : 0.0; }
    // unbiased sample variance
    double var() const {
        if (n < 2) return 0.0;
        double m = mean();
        double v = (sumsq - n * m * m) / (n - 1.0);
        return v > 0.0 ? v : 0.0;
    }
    double sd() const;
    double sem() const;  // standard error of the mean
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

// ---- distributions -------------------------------------------------------

double normal_cdf(double z);
double normal_quantile(double p);           // Acklam/Wichura style, ~1e-9
double student_t_quantile(double p, double df);  // Hill's approximation

// Two-sided (1-level) t-interval for the mean of the accumulated sample.
Interval t_interval(const Moments& m, double level = 0.95);

// ---- tests and fits --------------------------------------------------------

// One-sample Kolmogorov-Smirnov statistic against the standard normal.
double ks_statistic_normal(std::vector<double> sample);
// Asymptotic Kolmogorov survival function Q(sqrt(n)*D).
double ks_pvalue(double d_stat, std::size_t n);

// lag-1 autocorrelation and its approximate normal z-score under the
// white-noise null (sd ~ 1/sqrt(n))
struct Lag1 {
    double corr = 0.0;
    double z = 0.0;
};
Lag1 lag1_autocorr(const std::vector<double>& xs);

// permutation p-value for dependence between consecutive pairs (x_k, x_{k+1});
// statistic is |lag-1 autocorrelation|, permutations of the sequence order
double permutation_pvalue_lag1(const std::vector<double>& xs, int n_perm,
                               uint64_t seed);

// least squares slope/intercept of y against x
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sepwalk
