// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "pqhe/codebook.hpp"
#include "pqhe/common.hpp"

namespace pqhe {

// Score between two PQ codes under the inter-code tables: the sum over
// subspaces of the tabulated code-to-code distances (or inner products).
inline double code_score(const InterCodeTables& t, const uint32_t* a, const uint32_t* b) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.n_s; ++i)
        s += t.at(i, a[i], b[i]);
    return s;
}

// k-means over PQ codes. Assignment is nearest-center under the table
// metric; the center update picks, per cluster and subspace, the code index
// minimizing (or maximizing, for inner product) the summed table cost via a
// histogram of member codes, so centers always stay valid PQ codes.
// Deterministic: ties go to the lowest index, initialization samples member
// codes without replacement, empty clusters steal the worst-fitting point of
// the largest cluster.
inline std::vector<uint32_t> pqkmeans(const EncodedDatabase& db, const InterCodeTables& tables,
                                      std::size_t n_centers, std::size_t max_iters,
                                      uint64_t seed) {
    if (n_centers > db.size())
        throw InvalidArgument("pqkmeans: more centers than data");
    const std::size_t n = db.size();
    const std::size_t n_s = db.n_s;
    const std::size_t n_c = tables.n_c;
    const Metric metric = tables.metric;

    Rng rng(seed);
    std::vector<std::size_t> init = sample_indices(n, n_centers, rng);
    std::vector<uint32_t> centers(n_centers * n_s);
    for (std::size_t c = 0; c < n_centers; ++c)
        for (std::size_t s = 0; s < n_s; ++s)
            centers[c * n_s + s] = db.row(init[c])[s];

    std::vector<uint32_t> assign(n, 0), prev(n, uint32_t(n_centers));  // force first round
    for (std::size_t iter = 0; iter < max_iters && assign != prev; ++iter) {
        prev = assign;
        for (std::size_t p = 0; p < n; ++p) {
            double best = 0.0;
            uint32_t arg = 0;
            for (std::size_t c = 0; c < n_centers; ++c) {
                double d = code_score(tables, db.row(p), centers.data() + c * n_s);
                if (c == 0 || score_better(metric, d, best)) {
                    best = d;
                    arg = uint32_t(c);
                }
            }
            assign[p] = arg;
        }

        std::vector<std::size_t> count(n_centers, 0);
        for (uint32_t a : assign)
            ++count[a];
        for (std::size_t c = 0; c < n_centers; ++c) {
            if (count[c] != 0)
                continue;
            std::size_t big = 0;
            for (std::size_t o = 1; o < n_centers; ++o)
                if (count[o] > count[big])
                    big = o;
            // worst-fitting member of the largest cluster
            bool first = true;
            double worst = 0.0;
            std::size_t victim = 0;
            for (std::size_t p = 0; p < n; ++p) {
                if (assign[p] != big)
                    continue;
                double d = code_score(tables, db.row(p), centers.data() + big * n_s);
                if (first || score_better(metric, worst, d)) {  // inverted: keep the worst
                    worst = d;
                    victim = p;
                    first = false;
                }
            }
            assign[victim] = uint32_t(c);
            --count[big];
            ++count[c];
        }

        // sparse-voting update: histogram member codes per subspace, then
        // cost(j) = sum_c hist[c] * table[s][c][j]
        for (std::size_t c = 0; c < n_centers; ++c) {
            if (count[c] == 0)
                continue;
            for (std::size_t s = 0; s < n_s; ++s) {
                std::vector<double> hist(n_c, 0.0);
                for (std::size_t p = 0; p < n; ++p)
                    if (assign[p] == c)
                        hist[db.row(p)[s]] += 1.0;
                double best = 0.0;
                uint32_t arg = 0;
                for (std::size_t j = 0; j < n_c; ++j) {
                    double cost = 0.0;
                    for (std::size_t h = 0; h < n_c; ++h)
                        if (hist[h] != 0.0)
                            cost += hist[h] * tables.at(s, h, j);
                    if (j == 0 || score_better(metric, cost, best)) {
                        best = cost;
                        arg = uint32_t(j);
                    }
                }
                centers[c * n_s + s] = arg;
            }
        }
    }
    return centers;
}

// Registers every datum in its n_nb best centers' posting lists; codes are
// stored as-is, no residual re-encoding.
inline IVFIndex build_ivf(const EncodedDatabase& db, const std::vector<uint32_t>& centers,
                          const InterCodeTables& tables, std::size_t n_nb) {
    const std::size_t n_s = db.n_s;
    const std::size_t n_centers = centers.size() / n_s;
    if (n_nb > n_centers)
        throw InvalidArgument("build_ivf: n_nb exceeds the number of centers");
    IVFIndex idx;
    idx.n_s = n_s;
    idx.n_nb = n_nb;
    idx.center_codes = centers;
    idx.posting_lists.assign(n_centers, {});
    std::vector<std::pair<double, std::size_t>> scored(n_centers);
    for (std::size_t p = 0; p < db.size(); ++p) {
        for (std::size_t c = 0; c < n_centers; ++c)
            scored[c] = {code_score(tables, db.row(p), centers.data() + c * n_s), c};
        std::partial_sort(scored.begin(), scored.begin() + n_nb, scored.end(),
                          [&](const auto& a, const auto& b) {
                              if (a.first != b.first)
                                  return score_better(tables.metric, a.first, b.first);
                              return a.second < b.second;
                          });
        for (std::size_t r = 0; r < n_nb; ++r)
            idx.posting_lists[scored[r].second].push_back(p);
    }
    return idx;
}

}  // namespace pqhe
