#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "urag/core/errors.hpp"

namespace urag::core {

using Rng = std::mt19937_64;

// FNV-1a, used for stable content hashes and seed mixing.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
    std::uint64_t h = fnv1a(salt, seed ^ 0x9e3779b97f4a7c15ull);
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t h = seed ^ (salt + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

// Unbiased draw in [0, n). Explicit rejection sampling so results are pinned
// to the engine's output stream, independent of the standard library.
inline std::uint64_t bounded(Rng& rng, std::uint64_t n) {
    if (n == 0) throw ArgumentError("bounded: n must be positive");
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; two engine draws per variate.
inline double normal_sample(Rng& rng, double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
}

// Marsaglia-Tsang; shape < 1 handled via the boost trick.
inline double gamma_sample(Rng& rng, double shape) {
    if (shape <= 0.0) throw ArgumentError("gamma_sample: shape must be positive");
    if (shape < 1.0) {
        double u = uniform01(rng);
        while (u <= 0.0) u = uniform01(rng);
        return gamma_sample(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal_sample(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline std::vector<double> dirichlet_sample(Rng& rng, std::size_t k, double concentration) {
    if (k == 0) throw ArgumentError("dirichlet_sample: k must be positive");
    if (concentration <= 0.0) throw ArgumentError("dirichlet_sample: concentration must be positive");
    std::vector<double> out(k);
    double sum = 0.0;
    for (auto& v : out) {
        v = gamma_sample(rng, concentration);
        sum += v;
    }
    if (sum <= 0.0) {
        for (auto& v : out) v = 1.0 / static_cast<double>(k);
        return out;
    }
    for (auto& v : out) v /= sum;
    return out;
}

// Fisher-Yates with the explicit bounded draw above.
template <typename T>
void shuffle_inplace(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

// Uniform sample of `count` distinct indices from [0, n), order randomized.
inline std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t count) {
    if (count > n) throw ArgumentError("sample_indices: count exceeds population");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace urag::core
