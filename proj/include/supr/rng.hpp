#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace supr {

/// splitmix64 finalizer, used to derive independent per-ray seeds from one
/// run seed. Identical output on every platform.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic generator. All sampling is built on raw mt19937_64 words so
/// results do not depend on the standard library's distribution objects.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (no cached spare, two uniforms per draw).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Poisson draw: CDF inversion for small means, normal approximation above
    /// 1e3. Means between 500 and 1e3 are split into two half-mean draws so the
    /// inversion never evaluates exp() below its underflow threshold.
    long long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 1000.0) {
            const double v = std::round(mean + std::sqrt(mean) * normal());
            return v < 0.0 ? 0 : static_cast<long long>(v);
        }
        if (mean > 500.0) return poisson(mean * 0.5) + poisson(mean * 0.5);
        double p = std::exp(-mean);
        double cdf = p;
        long long k = 0;
        const double u = uniform();
        while (u > cdf && k < 100000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace supr
