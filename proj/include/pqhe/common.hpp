// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pqhe {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
    using Error::Error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct DepthBudgetError : Error {
    using Error::Error;
};
struct BackendMismatchError : Error {
    using Error::Error;
};
struct KeyError : Error {
    using Error::Error;
};
struct OverflowError : Error {
    using Error::Error;
};
struct SerializationError : Error {
    using Error::Error;
};
struct TransportError : Error {
    using Error::Error;
};
struct ProtocolError : Error {
    using Error::Error;
};

inline constexpr std::size_t kKiB = 1024;
inline constexpr std::size_t kMiB = 1024 * 1024;

inline bool is_power_of_two(std::size_t x) {
    return x != 0 && (x & (x - 1)) == 0;
}

inline std::size_t ceil_div(std::size_t a, std::size_t b) {
    return (a + b - 1) / b;
}

// floor(log2(x)) for x >= 1
inline std::size_t floor_log2(std::size_t x) {
    std::size_t r = 0;
    while (x >>= 1)
        ++r;
    return r;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable seed derivation so that every pipeline stage (and its test oracle)
// draws from an independent, reproducible stream.
inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index = 0) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(master ^ splitmix64(h) ^ (0x517cc1b727220a95ULL * (index + 1)));
}

// Deterministic RNG wrapper. Distributions are hand-rolled because the
// standard ones are implementation-defined and would break reproducibility
// claims across library versions.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    uint64_t bounded(uint64_t n) {
        if (n == 0)
            throw InvalidArgument("Rng::bounded: n must be positive");
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Box-Muller; one fresh pair of uniforms per sample keeps the stream
    // independent of call parity.
    double normal() {
        double u1 = uniform();
        while (u1 == 0.0)
            u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 eng_;
};

// k distinct indices sampled uniformly from [0, n), in draw order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n)
        throw InvalidArgument("sample_indices: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i)
        pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace pqhe
