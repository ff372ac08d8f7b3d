// rng.cpp -- Poisson sampling (exact for all rates).
#include "sepwalk/rng.hpp"

namespace sepwalk {

// Small rates: multiplicative inversion. Large rates: Hormann's PTRS
// transformed rejection, exact and O(1) with a ~94% fast accept path.
uint64_t Rng::next_poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 10.0) {
        double limit = std::exp(-lambda);
        uint64_t k = 0;
        double prod = next_double();
        while (prod > limit) {
            ++k;
            prod *= next_double();
        }
        return k;
    }
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        double u = next_double() - 0.5;
        double v = next_double();
        double us = 0.5 - std::fabs(u);
        double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= v_r) return (uint64_t)kf;
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * loglam - lambda - std::lgamma(kf + 1.0))
            return (uint64_t)kf;
    }
}

}  // namespace sepwalk
