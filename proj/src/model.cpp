#include "sepwalk/model.hpp"

#include <cmath>

#include <json.hpp>

#include "sepwalk/errors.hpp"

namespace sepwalk {

namespace {

void check_unit_interval(const char* field, double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw RangeError(std::string(field) + " must lie in [0,1], got " +
                         std::to_string(x));
    }
}

// w * f(x) with the convention that zero weight kills the term even when
// f(x) is infinite (degenerate alpha/beta would otherwise produce NaN).
double weighted(double w, double term) {
    return w > 0.0 ? w * term : 0.0;
}

}  // namespace

ModelParams make_params(double alpha, double beta, double rho, double gamma,
                        bool allow_degenerate) {
    check_unit_interval("alpha", alpha);
    check_unit_interval("beta", beta);
    check_unit_interval("rho", rho);
    if (!(gamma >= 0.0)) {
        throw RangeError("gamma must be nonnegative, got " +
                         std::to_string(gamma));
    }
    if (!allow_degenerate) {
        if (alpha == 0.0 || alpha == 1.0) {
            throw EllipticityError(
                "alpha = " + std::to_string(alpha) +
                " is degenerate; pass allow_degenerate to accept it");
        }
        if (beta == 0.0 || beta == 1.0) {
            throw EllipticityError(
                "beta = " + std::to_string(beta) +
                " is degenerate; pass allow_degenerate to accept it");
        }
    }
    ModelParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.rho = rho;
    p.gamma = gamma;
    p.allow_degenerate = allow_degenerate;
    return p;
}

double kappa(const ModelParams& p) {
    return std::min(std::min(p.alpha, 1.0 - p.alpha),
                    std::min(p.beta, 1.0 - p.beta));
}

double ScaleSequences::epsilon(long L) const {
    if (L < 0) throw DomainError("epsilon: scale index must be nonnegative");
    return 1.0 / (1.0 + std::log(static_cast<double>(L) + 1.0));
}

double ScaleSequences::phi(long L) const {
    if (L < 0) throw DomainError("phi: scale index must be nonnegative");
    return std::pow(static_cast<double>(L), 0.01);
}

RegimeReport regime_report(const ModelParams& p) {
    RegimeReport r;
    r.homogenized_p = p.rho * p.alpha + (1.0 - p.rho) * p.beta;
    r.homogenized_drift = 2.0 * r.homogenized_p - 1.0;
    r.transience_lhs =
        weighted(p.rho, std::log((1.0 - p.alpha) / p.alpha)) +
        weighted(1.0 - p.rho, std::log((1.0 - p.beta) / p.beta));
    r.jensen_lhs = weighted(p.rho, (1.0 - p.alpha) / p.alpha) +
                   weighted(1.0 - p.rho, (1.0 - p.beta) / p.beta);
    r.kappa = kappa(p);

    const double h = r.homogenized_drift;
    const double t = r.transience_lhs;
    if ((h < 0.0 && t < 0.0) || (h > 0.0 && t > 0.0)) {
        // Drift and the log-criterion point in opposite directions
        // (transience_lhs < 0 favors rightward escape).
        r.classification = "mixed-regime";
    } else if (h > 0.0) {
        r.classification = "fluid-right-drift";
    } else if (h < 0.0) {
        r.classification = "fluid-left-drift";
    } else if (t < 0.0) {
        r.classification = r.jensen_lhs > 1.0 ? "static-subballistic"
                                              : "static-transient-right";
    } else if (t > 0.0) {
        const double jensen_mirror =
            weighted(p.rho, p.alpha / (1.0 - p.alpha)) +
            weighted(1.0 - p.rho, p.beta / (1.0 - p.beta));
        r.classification = jensen_mirror > 1.0 ? "static-subballistic"
                                               : "static-transient-left";
    } else {
        r.classification = "static-recurrent";
    }
    return r;
}

std::string to_json(const RegimeReport& r) {
    nlohmann::ordered_json j;
    j["homogenized_p"] = r.homogenized_p;
    j["homogenized_drift"] = r.homogenized_drift;
    j["transience_lhs"] = r.transience_lhs;
    j["jensen_lhs"] = r.jensen_lhs;
    j["kappa"] = r.kappa;
    j["classification"] = r.classification;
    return j.dump(2);
}

}  // namespace sepwalk
