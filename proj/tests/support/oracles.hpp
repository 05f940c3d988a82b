// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles. Everything here recomputes expected values from first
// principles on plain scalar arrays and must stay independent of the
// library's ciphertext code paths.
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

// Naive left-to-right block sum. Exact for integer-valued inputs, where any
// association order yields the same double.
inline double naive_block_sum(const double* v, std::size_t d_s) {
    double s = 0.0;
    for (std::size_t t = 0; t < d_s; ++t)
        s += v[t];
    return s;
}

// Block sum with the same association order as the packed rotation network:
// doubling partial sums, then largest power-of-two remainder chunks, then an
// odd tail. Operates on a scalar window, no slots involved, so comparisons
// against decrypted block starts are exact even for non-integer data.
inline double packed_order_block_sum(const double* v, std::size_t d_s) {
    if (d_s == 0)
        return 0.0;
    std::vector<double> r(v, v + d_s);
    if (d_s == 1)
        return r[0];
    std::size_t log2ds = 0;
    for (std::size_t x = d_s; x >>= 1;)
        ++log2ds;
    std::vector<std::vector<double>> memo;
    std::size_t i = 0;
    auto shifted = [&](const std::vector<double>& a, std::size_t k, std::size_t t) {
        return t + k < d_s ? a[t + k] : 0.0;
    };
    while (i < log2ds) {
        std::vector<double> next(d_s);
        for (std::size_t t = 0; t < d_s; ++t)
            next[t] = r[t] + shifted(r, std::size_t{1} << i, t);
        r = next;
        memo.push_back(r);
        ++i;
    }
    std::size_t pow_i = std::size_t{1} << i;
    std::size_t j = 0;
    while (d_s >= pow_i + j + 2) {
        std::size_t k = 0;
        for (std::size_t x = d_s - pow_i - j; x >>= 1;)
            ++k;
        std::vector<double> next(d_s);
        for (std::size_t t = 0; t < d_s; ++t)
            next[t] = r[t] + shifted(memo[k - 1], pow_i + j, t);
        r = next;
        j += std::size_t{1} << k;
    }
    if (d_s % 2 == 1) {
        std::vector<double> orig(v, v + d_s);
        std::vector<double> next(d_s);
        for (std::size_t t = 0; t < d_s; ++t)
            next[t] = r[t] + shifted(orig, pow_i + j, t);
        r = next;
    }
    return r[0];
}

inline double sq_euclidean(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double d = a[t] - b[t];
        s += d * d;
    }
    return s;
}

inline double inner_product(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        s += a[t] * b[t];
    return s;
}

// Squared distance / inner product with the packed association order; used
// where decrypted kernel outputs must match bit for bit on real-valued data.
inline double packed_order_sq_euclidean(const double* a, const double* b, std::size_t n) {
    std::vector<double> sq(n);
    for (std::size_t t = 0; t < n; ++t) {
        double d = a[t] - b[t];
        sq[t] = d * d;
    }
    return packed_order_block_sum(sq.data(), n);
}

inline double packed_order_inner_product(const double* a, const double* b, std::size_t n) {
    std::vector<double> pr(n);
    for (std::size_t t = 0; t < n; ++t)
        pr[t] = a[t] * b[t];
    return packed_order_block_sum(pr.data(), n);
}

// Brute-force k-means on scalar blocks, mirroring the published protocol
// semantics: argmin labels with lowest-index ties, mean updates in point
// order, empty clusters repaired by stealing the farthest point of the
// largest cluster, loop ends on a label fixpoint or after max_iters.
struct KMeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<uint32_t> labels;
    std::size_t iterations = 0;
};

inline KMeansResult brute_kmeans(const std::vector<std::vector<double>>& points,
                                 std::vector<std::vector<double>> init, std::size_t max_iters,
                                 double (*block_dist)(const double*, const double*, std::size_t)) {
    std::size_t n = points.size();
    std::size_t k = init.size();
    std::size_t dim = init.empty() ? 0 : init[0].size();
    KMeansResult res;
    res.centroids = std::move(init);
    std::vector<uint32_t> prev(n, 0);
    res.labels.assign(n, 1);
    std::size_t iter = 0;
    while (iter < max_iters) {
        if (res.labels == prev)
            break;
        prev = res.labels;
        // assignment
        for (std::size_t p = 0; p < n; ++p) {
            double best = std::numeric_limits<double>::infinity();
            uint32_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double d = block_dist(points[p].data(), res.centroids[c].data(), dim);
                if (d < best) {
                    best = d;
                    arg = static_cast<uint32_t>(c);
                }
            }
            res.labels[p] = arg;
        }
        // empty-cluster repair
        std::vector<std::size_t> count(k, 0);
        for (auto l : res.labels)
            ++count[l];
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] != 0)
                continue;
            std::size_t big = 0;
            for (std::size_t o = 1; o < k; ++o)
                if (count[o] > count[big])
                    big = o;
            double worst = -1.0;
            std::size_t victim = 0;
            for (std::size_t p = 0; p < n; ++p) {
                if (res.labels[p] != big)
                    continue;
                double d = block_dist(points[p].data(), res.centroids[big].data(), dim);
                if (d > worst) {
                    worst = d;
                    victim = p;
                }
            }
            res.labels[victim] = static_cast<uint32_t>(c);
            --count[big];
            ++count[c];
        }
        // update
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0)
                continue;
            std::vector<double> sum(dim, 0.0);
            for (std::size_t p = 0; p < n; ++p) {
                if (res.labels[p] != c)
                    continue;
                for (std::size_t t = 0; t < dim; ++t)
                    sum[t] += points[p][t];
            }
            for (std::size_t t = 0; t < dim; ++t)
                res.centroids[c][t] = sum[t] / static_cast<double>(count[c]);
        }
        ++iter;
    }
    res.iterations = iter;
    return res;
}

}  // namespace oracle
