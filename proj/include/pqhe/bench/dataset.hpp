// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "pqhe/codebook.hpp"
#include "pqhe/common.hpp"

namespace pqhe::bench {

// fvecs/ivecs: each record is a 4-byte little-endian element count followed
// by that many little-endian float32 (int32 for ivecs) values; every record
// in a file carries the same dimension.

template <typename T>
std::vector<std::vector<T>> load_vecs(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw SerializationError("cannot open " + path);
    std::vector<std::vector<T>> out;
    int32_t dim = -1;
    while (true) {
        int32_t n;
        if (!is.read(reinterpret_cast<char*>(&n), 4))
            break;  // clean EOF
        if (n <= 0)
            throw SerializationError(path + ": non-positive record dimension");
        if (dim < 0)
            dim = n;
        else if (n != dim)
            throw SerializationError(path + ": inconsistent record dimension");
        std::vector<T> rec(static_cast<std::size_t>(n), T{});
        if (!is.read(reinterpret_cast<char*>(rec.data()), std::streamsize(n) * 4))
            throw SerializationError(path + ": truncated record");
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<std::vector<float>> load_fvecs(const std::string& path) {
    return load_vecs<float>(path);
}
inline std::vector<std::vector<int32_t>> load_ivecs(const std::string& path) {
    return load_vecs<int32_t>(path);
}

template <typename T>
void save_vecs(const std::string& path, const std::vector<std::vector<T>>& vecs) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw SerializationError("cannot open " + path);
    for (const auto& rec : vecs) {
        int32_t n = int32_t(rec.size());
        os.write(reinterpret_cast<const char*>(&n), 4);
        os.write(reinterpret_cast<const char*>(rec.data()), std::streamsize(n) * 4);
    }
}

inline void save_fvecs(const std::string& path, const std::vector<std::vector<float>>& v) {
    save_vecs(path, v);
}
inline void save_ivecs(const std::string& path, const std::vector<std::vector<int32_t>>& v) {
    save_vecs(path, v);
}

// Exact brute-force top-k neighbor ids with deterministic tie-breaking by id.
inline std::vector<std::vector<uint64_t>> ground_truth(
    const std::vector<std::vector<float>>& base, const std::vector<std::vector<float>>& queries,
    std::size_t k, Metric metric) {
    if (k > base.size())
        throw InvalidArgument("ground_truth: k exceeds base size");
    std::vector<std::vector<uint64_t>> out(queries.size());
    std::vector<std::pair<double, uint64_t>> scored(base.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (std::size_t i = 0; i < base.size(); ++i) {
            double s = 0.0;
            if (metric == Metric::Euclidean) {
                for (std::size_t t = 0; t < queries[q].size(); ++t) {
                    double d = double(queries[q][t]) - double(base[i][t]);
                    s += d * d;
                }
            } else {
                for (std::size_t t = 0; t < queries[q].size(); ++t)
                    s += double(queries[q][t]) * double(base[i][t]);
            }
            scored[i] = {s, uint64_t(i)};
        }
        std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(k), scored.end(),
                          [&](const auto& a, const auto& b) {
                              if (a.first != b.first)
                                  return score_better(metric, a.first, b.first);
                              return a.second < b.second;
                          });
        out[q].reserve(k);
        for (std::size_t r = 0; r < k; ++r)
            out[q].push_back(scored[r].second);
    }
    return out;
}

struct SynthSpec {
    uint64_t seed = 1;
    std::size_t n = 1000;
    std::size_t d = 16;
    std::size_t clusters = 16;
    double center_spread = 100.0;  // cluster centers uniform in [0, spread]
    double noise = 1.0;            // within-cluster standard deviation
    bool quantize = false;         // round to integers and clip to [0, 255]
};

// Gaussian mixture with controllable separation; reproducible by seed. The
// quantized flavor produces descriptor-style integer-valued vectors.
inline std::vector<std::vector<float>> synth_dataset(const SynthSpec& spec) {
    if (spec.clusters == 0 || spec.clusters > spec.n)
        throw InvalidArgument("synth_dataset: clusters must be in [1, n]");
    Rng rng(spec.seed);
    std::vector<std::vector<double>> centers(spec.clusters, std::vector<double>(spec.d));
    for (auto& c : centers)
        for (auto& x : c)
            x = rng.uniform(0.0, spec.center_spread);
    std::vector<std::vector<float>> out(spec.n, std::vector<float>(spec.d));
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto& c = centers[rng.bounded(spec.clusters)];
        for (std::size_t t = 0; t < spec.d; ++t) {
            double v = c[t] + rng.normal() * spec.noise;
            if (spec.quantize)
                v = std::min(255.0, std::max(0.0, std::nearbyint(v)));
            out[i][t] = float(v);
        }
    }
    return out;
}

}  // namespace pqhe::bench
