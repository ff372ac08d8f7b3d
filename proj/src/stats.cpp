// stats.cpp
#include "sepwalk/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sepwalk/errors.hpp"
#include "sepwalk/rng.hpp"

namespace sepwalk {

double Moments::sd() const { return std::sqrt(var()); }
double Moments::sem() const { return n > 0 ? std::sqrt(var() / n) : 0.0; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Peter Acklam's rational approximation refined by one Halley step;
// absolute error below 1e-12 after refinement.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParamError("normal_quantile: p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // one Halley refinement against erfc
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

// Hill (1970): inverse Student-t, good to ~1e-6 for df >= 1.
double student_t_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) throw ParamError("student_t_quantile: p in (0,1)");
    if (df <= 0.0) throw ParamError("student_t_quantile: df > 0");
    bool lower = p < 0.5;
    double pp = 2.0 * (lower ? p : 1.0 - p);  // two-tail probability
    double t;
    if (df > 1e7) {
        t = normal_quantile(pp / 2.0);
        return lower ? t : -t;
    }
    // Hill's expansion is asymptotic in df; one and two degrees of freedom
    // have exact closed forms, so use those.
    if (df == 1.0) {
        t = std::tan(M_PI * 0.5 * (1.0 - pp));
        return lower ? -t : t;
    }
    if (df == 2.0) {
        double q = 1.0 - pp;  // |2p - 1|
        t = q * std::sqrt(2.0 / (1.0 - q * q));
        return lower ? -t : t;
    }
    double a = 1.0 / (df - 0.5);
    double b = 48.0 / (a * a);
    double c = ((20700.0 * a / b - 98.0) * a - 16.0) * a + 96.36;
    double d = ((94.5 / (b + c) - 3.0) / b + 1.0) * std::sqrt(a * M_PI / 2.0) * df;
    double x = d * pp;
    double y = std::pow(x, 2.0 / df);
    if (y > 0.05 + a) {
        x = normal_quantile(pp / 2.0);
        y = x * x;
        if (df < 5.0) c += 0.3 * (df - 4.5) * (x + 0.6);
        c = (((0.05 * d * x - 5.0) * x - 7.0) * x - 2.0) * x + b + c;
        y = (((((0.4 * y + 6.3) * y + 36.0) * y + 94.5) / c - y - 3.0) / b + 1.0) * x;
        y = a * y * y;
        y = y > 0.002 ? std::exp(y) - 1.0 : 0.5 * y * y + y;
    } else {
        y = ((1.0 / (((df + 6.0) / (df * y) - 0.089 * d - 0.822) * (df + 2.0) * 3.0) +
              0.5 / (df + 4.0)) * y - 1.0) * (df + 1.0) / (df + 2.0) + 1.0 / y;
    }
    t = std::sqrt(df * y);
    return lower ? -t : t;
}

Interval t_interval(const Moments& m, double level) {
    if (m.n < 2) throw InsufficientData("t_interval: need at least 2 samples");
    double tq = student_t_quantile(0.5 + level / 2.0, m.n - 1.0);
    double half = tq * m.sem();
    return {m.mean() - half, m.mean() + half};
}

double ks_statistic_normal(std::vector<double> sample) {
    if (sample.empty()) throw InsufficientData("ks_statistic_normal: empty");
    std::sort(sample.begin(), sample.end());
    double n = (double)sample.size();
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = normal_cdf(sample[i]);
        d = std::max(d, std::fabs((i + 1) / n - f));
        d = std::max(d, std::fabs(f - i / n));
    }
    return d;
}

// Kolmogorov asymptotic survival: Q(x) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2},
// with the small-sample Stephens adjustment of the argument.
double ks_pvalue(double d_stat, std::size_t n) {
    double sn = std::sqrt((double)n);
    double x = (sn + 0.12 + 0.11 / sn) * d_stat;
    if (x < 0.2) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 101; ++k) {
        double term = 2.0 * std::exp(-2.0 * k * k * x * x);
        q += (k % 2 == 1) ? term : -term;
        if (term < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, q));
}

Lag1 lag1_autocorr(const std::vector<double>& xs) {
    if (xs.size() < 3) throw InsufficientData("lag1_autocorr: need >= 3 values");
    double n = (double)xs.size();
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double d = xs[i] - mean;
        den += d * d;
        if (i + 1 < xs.size()) num += d * (xs[i + 1] - mean);
    }
    Lag1 out;
    out.corr = den > 0 ? num / den : 0.0;
    out.z = out.corr * std::sqrt(n);
    return out;
}

double permutation_pvalue_lag1(const std::vector<double>& xs, int n_perm,
                               uint64_t seed) {
    double observed = std::fabs(lag1_autocorr(xs).corr);
    Rng rng(seed);
    std::vector<double> work = xs;
    int at_least = 0;
    for (int p = 0; p < n_perm; ++p) {
        // Fisher-Yates
        for (std::size_t i = work.size() - 1; i > 0; --i) {
            std::size_t j = (std::size_t)rng.next_below(i + 1);
            std::swap(work[i], work[j]);
        }
        if (std::fabs(lag1_autocorr(work).corr) >= observed) ++at_least;
    }
    return (at_least + 1.0) / (n_perm + 1.0);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InsufficientData("fit_line: need >= 2 matched points");
    double n = (double)x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) throw InsufficientData("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

}  // namespace sepwalk
