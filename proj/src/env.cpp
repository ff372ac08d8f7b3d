#include "sepwalk/env.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "sepwalk/errors.hpp"

namespace sepwalk {

namespace {

EnvState make_base(const ModelParams& params, long long extent, Backend backend,
                   uint64_t seed) {
    if (extent < 3) {
        throw ConfigError("environment extent must be at least 3, got " +
                          std::to_string(extent));
    }
    EnvState e;
    e.backend = backend;
    e.extent = extent;
    e.origin_offset = -(extent / 2);
    e.params = params;
    e.clock = Rng(seed);
    e.mu.resize(static_cast<size_t>(extent));
    std::iota(e.mu.begin(), e.mu.end(), 0u);
    e.nu.assign(static_cast<size_t>(extent), 0);
    if (backend == Backend::torus) {
        e.winding.assign(static_cast<size_t>(extent), 0);
    }
    e.generation.assign(static_cast<size_t>(extent), 0);
    return e;
}

}  // namespace

EnvState init_equilibrium(const ModelParams& params, long long extent,
                          Backend backend, uint64_t seed) {
    EnvState e = make_base(params, extent, backend, seed);
    for (auto& t : e.nu) t = e.clock.next_bernoulli(params.rho) ? 1 : 0;
    return e;
}

EnvState init_profile(const ModelParams& params,
                      const std::vector<uint8_t>& occupancy, Backend backend,
                      uint64_t seed) {
    EnvState e = make_base(params, static_cast<long long>(occupancy.size()),
                           backend, seed);
    // Labels start at their home sites, so giving label i the i-th profile
    // bit reproduces the requested occupancy exactly.
    for (size_t i = 0; i < occupancy.size(); ++i) e.nu[i] = occupancy[i] ? 1 : 0;
    return e;
}

void EnvState::advance(double dt) {
    if (!(dt >= 0.0)) throw ParamError("advance: dt must be nonnegative");
    sim_time += dt;
    const double g = params.gamma;
    if (g <= 0.0 || dt <= 0.0) return;

    const uint64_t edges =
        static_cast<uint64_t>(backend == Backend::torus ? extent : extent - 1);
    const uint64_t slots = backend == Backend::torus ? edges : edges + 2;
    const uint64_t m = clock.next_poisson(g * static_cast<double>(slots) * dt);
    if (m == 0) return;
    xi_stale_ = true;

    uint32_t* mu_p = mu.data();
    if (backend == Backend::torus) {
        const uint64_t last = edges - 1;
        int32_t* w = winding.data();
        for (uint64_t e = 0; e < m; ++e) {
            const uint64_t slot = clock.next_below(edges);
            if (slot != last) {
                const uint32_t a = mu_p[slot];
                mu_p[slot] = mu_p[slot + 1];
                mu_p[slot + 1] = a;
            } else {
                // Wrap edge: the label leaving to the right re-enters on the
                // left one full turn up, and vice versa.
                const uint32_t a = mu_p[last];
                const uint32_t b = mu_p[0];
                mu_p[last] = b;
                mu_p[0] = a;
                ++w[a];
                --w[b];
            }
        }
        swap_events += m;
    } else {
        const double rho = params.rho;
        uint64_t swaps = 0;
        for (uint64_t e = 0; e < m; ++e) {
            const uint64_t slot = clock.next_below(slots);
            if (slot < edges) {
                const uint32_t a = mu_p[slot];
                mu_p[slot] = mu_p[slot + 1];
                mu_p[slot + 1] = a;
                ++swaps;
            } else {
                const long long site = slot == edges ? 0 : extent - 1;
                nu[mu_p[site]] = clock.next_double() < rho ? 1 : 0;
            }
        }
        swap_events += swaps;
        refresh_events += m - swaps;
    }
}

long long EnvState::site_index(long long x) const {
    long long r = x - origin_offset;
    if (backend == Backend::torus) {
        r %= extent;
        if (r < 0) r += extent;
        return r;
    }
    if (r < 0 || r >= extent) {
        throw WindowError("site " + std::to_string(x) +
                          " is outside the tracked window [" +
                          std::to_string(leftmost()) + ", " +
                          std::to_string(rightmost()) + "]");
    }
    return r;
}

int EnvState::occupancy(long long x) const {
    return nu[mu[static_cast<size_t>(site_index(x))]];
}

double EnvState::empirical_density(long long x, long L) const {
    if (L < 0) throw ParamError("empirical_density: radius must be >= 0");
    long long count = 0;
    for (long long y = x - L; y <= x + L; ++y) count += occupancy(y);
    return static_cast<double>(count) / static_cast<double>(2 * L + 1);
}

uint32_t EnvState::label_at(long long x) const {
    return mu[static_cast<size_t>(site_index(x))];
}

const std::vector<uint32_t>& EnvState::label_sites() const {
    if (xi_stale_) {
        xi_cache_.resize(mu.size());
        for (size_t i = 0; i < mu.size(); ++i)
            xi_cache_[mu[i]] = static_cast<uint32_t>(i);
        xi_stale_ = false;
    }
    return xi_cache_;
}

long long EnvState::position_of(uint32_t label) const {
    if (label >= nu.size()) {
        throw RangeError("unknown label " + std::to_string(label));
    }
    long long pos = origin_offset + label_sites()[label];
    if (backend == Backend::torus) {
        pos += extent * static_cast<long long>(winding[label]);
    }
    return pos;
}

void EnvState::shift_window(long long delta) {
    if (backend != Backend::reservoir_window) {
        throw BackendError("shift_window: only a reservoir_window can slide");
    }
    if (delta == 0) return;
    xi_stale_ = true;
    const long long n = extent;
    const long long shift = std::min(delta > 0 ? delta : -delta, n);
    std::vector<uint32_t> dropped(static_cast<size_t>(shift));
    if (delta > 0) {
        std::copy(mu.begin(), mu.begin() + shift, dropped.begin());
        std::copy(mu.begin() + shift, mu.end(), mu.begin());
        for (long long i = 0; i < shift; ++i) {
            const uint32_t id = dropped[static_cast<size_t>(i)];
            mu[static_cast<size_t>(n - shift + i)] = id;
            nu[id] = clock.next_bernoulli(params.rho) ? 1 : 0;
            ++generation[id];
        }
    } else {
        std::copy(mu.end() - shift, mu.end(), dropped.begin());
        std::copy_backward(mu.begin(), mu.end() - shift, mu.end());
        for (long long i = 0; i < shift; ++i) {
            const uint32_t id = dropped[static_cast<size_t>(i)];
            mu[static_cast<size_t>(i)] = id;
            nu[id] = clock.next_bernoulli(params.rho) ? 1 : 0;
            ++generation[id];
        }
    }
    origin_offset += delta;
}

EnvSnapshot EnvState::snapshot(bool with_labels) const {
    EnvSnapshot s;
    s.time = sim_time;
    s.offset = origin_offset;
    s.occupancy.resize(mu.size());
    for (size_t i = 0; i < mu.size(); ++i) s.occupancy[i] = nu[mu[i]];
    if (with_labels) {
        s.has_labels = true;
        s.label_positions.resize(nu.size());
        for (uint32_t l = 0; l < nu.size(); ++l)
            s.label_positions[l] = position_of(l);
    }
    return s;
}

std::string dump_snapshot(const EnvSnapshot& s) {
    char head[96];
    std::snprintf(head, sizeof(head), "t=%.17g offset=%lld bits=", s.time,
                  s.offset);
    std::string line(head);
    line.reserve(line.size() + s.occupancy.size());
    for (uint8_t b : s.occupancy) line.push_back(b ? '1' : '0');
    return line;
}

std::vector<std::vector<long long>> label_trace(
    EnvState& env, const std::vector<uint32_t>& labels,
    const std::vector<double>& t_grid) {
    if (env.backend != Backend::torus) {
        throw BackendError("label_trace needs the torus backend, where labels"
                           " are conserved");
    }
    for (uint32_t l : labels) {
        if (l >= env.nu.size())
            throw RangeError("label_trace: unknown label " + std::to_string(l));
    }
    std::vector<std::vector<long long>> out(labels.size());
    double prev = env.sim_time;
    for (double t : t_grid) {
        if (t < prev) {
            throw ParamError(
                "label_trace: time grid must be nondecreasing and start at or"
                " after the current time");
        }
        env.advance(t - prev);
        prev = t;
        for (size_t j = 0; j < labels.size(); ++j)
            out[j].push_back(env.position_of(labels[j]));
    }
    return out;
}

}  // namespace sepwalk
