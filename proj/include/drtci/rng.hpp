#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "drtci/common.hpp"

namespace drtci {

// Deterministic splitmix64 stream. All sampling is implemented here rather
// than with <random> distributions so the byte stream is pinned by this code,
// not by the standard library version.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    // Derives an independent stream from (seed, id...) without touching this one.
    static RngStream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
        std::uint64_t s = mix(seed ^ 0x9e3779b97f4a7c15ULL);
        s = mix(s ^ mix(a));
        s = mix(s ^ mix(b + 0x42ULL));
        s = mix(s ^ mix(c + 0x1777ULL));
        return RngStream(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller; caches the second variate.
    double normal() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cache_ = r * std::sin(theta);
        has_cache_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Rejection-sampled truncated normal on [lo, hi]. Falls back to clamping
    // after a bounded number of rejections (only reachable for pathological
    // bounds many sigmas out in the tail).
    double truncated_normal(double mean, double sd, double lo, double hi) {
        if (sd < 0.0) throw ConfigError("truncated_normal: negative sd");
        if (lo > hi) throw ConfigError("truncated_normal: lo > hi");
        if (sd == 0.0) return std::min(hi, std::max(lo, mean));
        for (int i = 0; i < 1024; ++i) {
            const double x = normal(mean, sd);
            if (x >= lo && x <= hi) return x;
        }
        return std::min(hi, std::max(lo, mean));
    }

    // Index sampled proportionally to non-negative weights.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw ConfigError("categorical: negative weight");
            total += w;
        }
        if (total <= 0.0) throw ConfigError("categorical: weights sum to zero");
        double u = uniform01() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return weights.size() - 1;
    }

    // Seed-stable permutation of {0..n-1} (Fisher-Yates).
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_u64() % i);
            std::swap(idx[i - 1], idx[j]);
        }
        return idx;
    }

  private:
    // splitmix64 output function
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double cache_ = 0.0;
    bool has_cache_ = false;
};

}  // namespace drtci
