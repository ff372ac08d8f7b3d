#pragma once

#include <string>

namespace sepwalk {

// Core inputs shared by every scenario: walker step probabilities on occupied
// (alpha) and vacant (beta) sites, particle density rho, and the environment
// swap rate gamma.
struct ModelParams {
    double alpha = 0.5;
    double beta = 0.5;
    double rho = 0.5;
    double gamma = 1.0;
    bool allow_degenerate = false;
};

// Validates and returns the parameter set. Throws RangeError when a
// probability leaves [0,1] or gamma is negative, EllipticityError when alpha
// or beta sits on {0,1} without allow_degenerate.
ModelParams make_params(double alpha, double beta, double rho, double gamma,
                        bool allow_degenerate = false);

// Uniform ellipticity margin: min{alpha, 1-alpha, beta, 1-beta}.
double kappa(const ModelParams& p);

// Slowly varying tolerance and scale growth used by the coarse-graining
// diagnostics. epsilon shrinks like 1/log, phi grows like a tiny power.
struct ScaleSequences {
    // 1 / (1 + ln(L + 1)); throws DomainError for negative L.
    double epsilon(long L) const;
    // L^(1/100); throws DomainError for negative L.
    double phi(long L) const;
};

// Summary functionals that locate a parameter set in the phase diagram.
//
// homogenized_p    effective step probability rho*alpha + (1-rho)*beta
// homogenized_drift  2*homogenized_p - 1
// transience_lhs   rho*ln((1-alpha)/alpha) + (1-rho)*ln((1-beta)/beta)
// jensen_lhs       rho*(1-alpha)/alpha + (1-rho)*(1-beta)/beta
struct RegimeReport {
    double homogenized_p = 0.0;
    double homogenized_drift = 0.0;
    double transience_lhs = 0.0;
    double jensen_lhs = 0.0;
    double kappa = 0.0;
    std::string classification;
};

// Computes the functionals above and classifies the parameter set.
//
// mixed-regime is reported exactly when homogenized_drift and transience_lhs
// carry the same strict sign (drift and the log-criterion disagree about
// direction; note transience_lhs < 0 favors rightward transience). Otherwise
// a nonzero drift gives fluid-right-drift / fluid-left-drift, and drift zero
// falls back on the log-criterion: static-recurrent at zero, else
// static-transient-right / static-transient-left, demoted to
// static-subballistic when the matching Jensen functional exceeds 1.
RegimeReport regime_report(const ModelParams& p);

// JSON object with exactly the RegimeReport field names above.
std::string to_json(const RegimeReport& r);

}  // namespace sepwalk
