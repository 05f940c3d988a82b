// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
//
// Plaintext IVF-PQ reference pipeline. Reimplements subdivision, k-means
// codebook training, PQ encoding, inter-code tables, code-space clustering,
// IVF assignment and ADC search directly on scalar arrays, mirroring the
// protocol's published semantics (initialization draws, tie-breaking, loop
// conditions, block summation order) without touching any ciphertext code.
// Used to check that the packed pipeline is bit-identical on the simulator.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pqhe/common.hpp"  // Rng / derive_seed / sample_indices (shared plumbing)

namespace pqhe::bench::ref {

// Scalar block sum with the same association order as the packed rotation
// reduction (doubling partials, largest power-of-two remainder chunks, odd
// tail); comparisons against decrypted block starts are exact this way.
inline double reduction_order_sum(const double* v, std::size_t d_s) {
    if (d_s == 0)
        return 0.0;
    std::vector<double> r(v, v + d_s);
    if (d_s == 1)
        return r[0];
    std::size_t log2ds = 0;
    for (std::size_t x = d_s; x >>= 1;)
        ++log2ds;
    auto shifted = [&](const std::vector<double>& a, std::size_t k, std::size_t t) {
        return t + k < d_s ? a[t + k] : 0.0;
    };
    std::vector<std::vector<double>> memo;
    std::size_t i = 0;
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

inline double ref_sq_euclidean(const double* a, const double* b, std::size_t n) {
    std::vector<double> sq(n);
    for (std::size_t t = 0; t < n; ++t) {
        double d = a[t] - b[t];
        sq[t] = d * d;
    }
    return reduction_order_sum(sq.data(), n);
}

inline double ref_inner_product(const double* a, const double* b, std::size_t n) {
    std::vector<double> pr(n);
    for (std::size_t t = 0; t < n; ++t)
        pr[t] = a[t] * b[t];
    return reduction_order_sum(pr.data(), n);
}

struct Config {
    std::size_t d = 0;
    std::size_t n_s = 0;
    std::size_t n_c = 0;
    std::size_t n_rs = 0;
    std::size_t n_k = 100;
    std::size_t pq_iters = 100;
    std::size_t n_i = 0;
    std::size_t n_nb = 3;
    bool inner_product = false;
    uint64_t seed = 1;
};

struct Pipeline {
    Config cfg;
    std::size_t d_s = 0;
    std::vector<std::vector<std::vector<double>>> codebook;  // [s][j][t]
    std::vector<std::vector<uint32_t>> codes;                // [i][s]
    std::vector<double> tables;                              // [s][i][j]
    std::vector<std::vector<uint32_t>> centers;              // [c][s]
    std::vector<std::vector<uint64_t>> posting_lists;
};

inline std::vector<std::vector<double>> split_blocks(const std::vector<float>& x,
                                                     std::size_t n_s, std::size_t d_s) {
    std::size_t d = x.size();
    std::size_t q = d / n_s, r = d % n_s;
    std::vector<std::vector<double>> blocks(n_s, std::vector<double>(d_s, 0.0));
    std::size_t pos = 0;
    for (std::size_t s = 0; s < n_s; ++s) {
        std::size_t take = q + (s >= n_s - r ? 1 : 0);
        for (std::size_t t = 0; t < take; ++t)
            blocks[s][t] = double(x[pos + t]);
        pos += take;
    }
    return blocks;
}

inline double block_score(const double* a, const double* b, std::size_t d_s, bool ip) {
    return ip ? ref_inner_product(a, b, d_s)
              : ref_sq_euclidean(a, b, d_s);
}

inline bool better(bool ip, double a, double b) {
    return ip ? a > b : a < b;
}

// Codebook training: uniform row sample shared across subspaces, per-subspace
// initial codes, argmin labels from packed-order Euclidean distances, mean
// updates in point order, farthest-point empty-cluster repair, label-fixpoint
// termination. Distances are Euclidean regardless of the search metric.
inline void train_codebook(Pipeline& P, const std::vector<std::vector<float>>& train) {
    const auto& cfg = P.cfg;
    pqhe::Rng sample_rng(pqhe::derive_seed(cfg.seed, "train-sample"));
    std::vector<std::size_t> rows = pqhe::sample_indices(train.size(), cfg.n_rs, sample_rng);

    P.codebook.assign(cfg.n_s, {});
    for (std::size_t s = 0; s < cfg.n_s; ++s) {
        std::vector<std::vector<double>> samples;
        samples.reserve(cfg.n_rs);
        for (std::size_t r : rows)
            samples.push_back(split_blocks(train[r], cfg.n_s, P.d_s)[s]);

        pqhe::Rng init_rng(pqhe::derive_seed(cfg.seed, "kmeans-init", s));
        std::vector<std::size_t> picks = pqhe::sample_indices(cfg.n_rs, cfg.n_c, init_rng);
        std::vector<std::vector<double>> centroids;
        for (std::size_t j = 0; j < cfg.n_c; ++j)
            centroids.push_back(samples[picks[j]]);

        std::vector<uint32_t> prev(cfg.n_rs, 0), labels(cfg.n_rs, 1);
        for (std::size_t iter = 1; iter <= cfg.n_k; ++iter) {
            if (labels == prev)
                break;
            prev = labels;
            std::vector<double> dist(cfg.n_rs * cfg.n_c);
            for (std::size_t p = 0; p < cfg.n_rs; ++p)
                for (std::size_t j = 0; j < cfg.n_c; ++j)
                    dist[p * cfg.n_c + j] = ref_sq_euclidean(
                        samples[p].data(), centroids[j].data(), P.d_s);
            for (std::size_t p = 0; p < cfg.n_rs; ++p) {
                double best = dist[p * cfg.n_c];
                uint32_t arg = 0;
                for (std::size_t j = 1; j < cfg.n_c; ++j)
                    if (dist[p * cfg.n_c + j] < best) {
                        best = dist[p * cfg.n_c + j];
                        arg = uint32_t(j);
                    }
                labels[p] = arg;
            }
            // empty-cluster repair
            std::vector<std::size_t> count(cfg.n_c, 0);
            for (uint32_t l : labels)
                ++count[l];
            for (std::size_t j = 0; j < cfg.n_c; ++j) {
                if (count[j] != 0)
                    continue;
                std::size_t big = 0;
                for (std::size_t o = 1; o < cfg.n_c; ++o)
                    if (count[o] > count[big])
                        big = o;
                double worst = -1.0;
                std::size_t victim = cfg.n_rs;
                for (std::size_t p = 0; p < cfg.n_rs; ++p)
                    if (labels[p] == big && dist[p * cfg.n_c + big] > worst) {
                        worst = dist[p * cfg.n_c + big];
                        victim = p;
                    }
                labels[victim] = uint32_t(j);
                --count[big];
                ++count[j];
            }
            // mean update in point order
            for (auto& c : centroids)
                c.assign(P.d_s, 0.0);
            std::vector<std::size_t> n(cfg.n_c, 0);
            for (std::size_t p = 0; p < cfg.n_rs; ++p) {
                ++n[labels[p]];
                for (std::size_t t = 0; t < P.d_s; ++t)
                    centroids[labels[p]][t] += samples[p][t];
            }
            for (std::size_t j = 0; j < cfg.n_c; ++j)
                if (n[j] > 0)
                    for (std::size_t t = 0; t < P.d_s; ++t)
                        centroids[j][t] /= double(n[j]);
        }
        P.codebook[s] = centroids;
    }
}

inline std::vector<uint32_t> encode_one(const Pipeline& P, const std::vector<float>& x) {
    auto blocks = split_blocks(x, P.cfg.n_s, P.d_s);
    std::vector<uint32_t> code(P.cfg.n_s);
    for (std::size_t s = 0; s < P.cfg.n_s; ++s) {
        double best = 0.0;
        uint32_t arg = 0;
        for (std::size_t j = 0; j < P.cfg.n_c; ++j) {
            double v = block_score(blocks[s].data(), P.codebook[s][j].data(), P.d_s,
                                   P.cfg.inner_product);
            if (j == 0 || better(P.cfg.inner_product, v, best)) {
                best = v;
                arg = uint32_t(j);
            }
        }
        code[s] = arg;
    }
    return code;
}

inline double table_at(const Pipeline& P, std::size_t s, std::size_t i, std::size_t j) {
    return P.tables[(s * P.cfg.n_c + i) * P.cfg.n_c + j];
}

inline double code_score(const Pipeline& P, const uint32_t* a, const uint32_t* b) {
    double v = 0.0;
    for (std::size_t s = 0; s < P.cfg.n_s; ++s)
        v += table_at(P, s, a[s], b[s]);
    return v;
}

inline void build_tables(Pipeline& P) {
    const auto& cfg = P.cfg;
    P.tables.assign(cfg.n_s * cfg.n_c * cfg.n_c, 0.0);
    for (std::size_t s = 0; s < cfg.n_s; ++s)
        for (std::size_t i = 0; i < cfg.n_c; ++i)
            for (std::size_t j = 0; j < cfg.n_c; ++j)
                P.tables[(s * cfg.n_c + i) * cfg.n_c + j] =
                    block_score(P.codebook[s][i].data(), P.codebook[s][j].data(), P.d_s,
                                cfg.inner_product);
}

inline void cluster_codes(Pipeline& P) {
    const auto& cfg = P.cfg;
    const std::size_t n = P.codes.size();
    pqhe::Rng rng(pqhe::derive_seed(cfg.seed, "pqkmeans-init"));
    std::vector<std::size_t> init = pqhe::sample_indices(n, cfg.n_i, rng);
    P.centers.assign(cfg.n_i, {});
    for (std::size_t c = 0; c < cfg.n_i; ++c)
        P.centers[c] = P.codes[init[c]];

    std::vector<uint32_t> assign(n, 0), prev(n, uint32_t(cfg.n_i));
    for (std::size_t iter = 0; iter < cfg.pq_iters && assign != prev; ++iter) {
        prev = assign;
        for (std::size_t p = 0; p < n; ++p) {
            double best = 0.0;
            uint32_t arg = 0;
            for (std::size_t c = 0; c < cfg.n_i; ++c) {
                double v = code_score(P, P.codes[p].data(), P.centers[c].data());
                if (c == 0 || better(cfg.inner_product, v, best)) {
                    best = v;
                    arg = uint32_t(c);
                }
            }
            assign[p] = arg;
        }
        std::vector<std::size_t> count(cfg.n_i, 0);
        for (uint32_t a : assign)
            ++count[a];
        for (std::size_t c = 0; c < cfg.n_i; ++c) {
            if (count[c] != 0)
                continue;
            std::size_t big = 0;
            for (std::size_t o = 1; o < cfg.n_i; ++o)
                if (count[o] > count[big])
                    big = o;
            bool first = true;
            double worst = 0.0;
            std::size_t victim = 0;
            for (std::size_t p = 0; p < n; ++p) {
                if (assign[p] != big)
                    continue;
                double v = code_score(P, P.codes[p].data(), P.centers[big].data());
                if (first || better(cfg.inner_product, worst, v)) {
                    worst = v;
                    victim = p;
                    first = false;
                }
            }
            assign[victim] = uint32_t(c);
            --count[big];
            ++count[c];
        }
        for (std::size_t c = 0; c < cfg.n_i; ++c) {
            if (count[c] == 0)
                continue;
            for (std::size_t s = 0; s < cfg.n_s; ++s) {
                std::vector<double> hist(cfg.n_c, 0.0);
                for (std::size_t p = 0; p < n; ++p)
                    if (assign[p] == c)
                        hist[P.codes[p][s]] += 1.0;
                double best = 0.0;
                uint32_t arg = 0;
                for (std::size_t j = 0; j < cfg.n_c; ++j) {
                    double cost = 0.0;
                    for (std::size_t h = 0; h < cfg.n_c; ++h)
                        if (hist[h] != 0.0)
                            cost += hist[h] * table_at(P, s, h, j);
                    if (j == 0 || better(cfg.inner_product, cost, best)) {
                        best = cost;
                        arg = uint32_t(j);
                    }
                }
                P.centers[c][s] = arg;
            }
        }
    }
}

inline void assign_ivf(Pipeline& P) {
    const auto& cfg = P.cfg;
    P.posting_lists.assign(cfg.n_i, {});
    std::vector<std::pair<double, std::size_t>> scored(cfg.n_i);
    for (std::size_t p = 0; p < P.codes.size(); ++p) {
        for (std::size_t c = 0; c < cfg.n_i; ++c)
            scored[c] = {code_score(P, P.codes[p].data(), P.centers[c].data()), c};
        std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(cfg.n_nb), scored.end(),
                          [&](const auto& a, const auto& b) {
                              if (a.first != b.first)
                                  return better(cfg.inner_product, a.first, b.first);
                              return a.second < b.second;
                          });
        for (std::size_t r = 0; r < cfg.n_nb; ++r)
            P.posting_lists[scored[r].second].push_back(p);
    }
}

// query table [s][j] with the packed-order kernel
inline std::vector<double> query_table(const Pipeline& P, const std::vector<float>& q) {
    auto blocks = split_blocks(q, P.cfg.n_s, P.d_s);
    std::vector<double> t(P.cfg.n_s * P.cfg.n_c);
    for (std::size_t s = 0; s < P.cfg.n_s; ++s)
        for (std::size_t j = 0; j < P.cfg.n_c; ++j)
            t[s * P.cfg.n_c + j] = block_score(blocks[s].data(), P.codebook[s][j].data(), P.d_s,
                                               P.cfg.inner_product);
    return t;
}

inline double adc(const Pipeline& P, const std::vector<double>& table, const uint32_t* code) {
    double v = 0.0;
    for (std::size_t s = 0; s < P.cfg.n_s; ++s)
        v += table[s * P.cfg.n_c + code[s]];
    return v;
}

inline std::vector<uint64_t> search(const Pipeline& P, const std::vector<double>& table,
                                    const std::vector<uint64_t>& ids, std::size_t l,
                                    std::size_t l_c) {
    const auto& cfg = P.cfg;
    std::vector<std::pair<double, std::size_t>> center_rank(cfg.n_i);
    for (std::size_t c = 0; c < cfg.n_i; ++c)
        center_rank[c] = {adc(P, table, P.centers[c].data()), c};
    std::partial_sort(center_rank.begin(), center_rank.begin() + std::ptrdiff_t(l_c),
                      center_rank.end(), [&](const auto& a, const auto& b) {
                          if (a.first != b.first)
                              return better(cfg.inner_product, a.first, b.first);
                          return a.second < b.second;
                      });
    std::vector<uint64_t> cand;
    for (std::size_t r = 0; r < l_c; ++r)
        for (uint64_t p : P.posting_lists[center_rank[r].second])
            cand.push_back(p);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::vector<std::pair<double, uint64_t>> scored;
    for (uint64_t p : cand)
        scored.push_back({adc(P, table, P.codes[std::size_t(p)].data()), p});
    std::size_t take = std::min(l, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(take), scored.end(),
                      [&](const auto& a, const auto& b) {
                          if (a.first != b.first)
                              return better(cfg.inner_product, a.first, b.first);
                          return a.second < b.second;
                      });
    std::vector<uint64_t> out;
    for (std::size_t r = 0; r < take; ++r)
        out.push_back(ids.empty() ? scored[r].second : ids[std::size_t(scored[r].second)]);
    return out;
}

// Full pipeline driver.
inline Pipeline run(const Config& cfg, const std::vector<std::vector<float>>& train,
                    const std::vector<std::vector<float>>& base) {
    Pipeline P;
    P.cfg = cfg;
    P.d_s = (cfg.d + cfg.n_s - 1) / cfg.n_s;
    train_codebook(P, train);
    P.codes.reserve(base.size());
    for (const auto& x : base)
        P.codes.push_back(encode_one(P, x));
    build_tables(P);
    cluster_codes(P);
    assign_ivf(P);
    return P;
}

}  // namespace pqhe::bench::ref
