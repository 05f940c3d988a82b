// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "pqhe/common.hpp"

namespace pqhe {

// Derived packing geometry for a (N_r, d, n_s, N_C) tuple.
//
//   d_s   sub-dimension, ceil(d / n_s)
//   d'    pseudo-dimension after zero fill, n_s * d_s
//   n_pd  sub-dimension blocks per ciphertext, floor(n_p / d_s)
//   N_SDOP / N_SDRP  ciphertext counts for the per-subspace packings
//   N_WOP / N_WRP    ciphertext counts for the whole packings
//
// n_pd uses a floor: with a ceiling, layouts whose d_s does not divide n_p
// would claim more slots than a ciphertext has (e.g. n_p = 8192, d_s = 12).
struct PQLayout {
    std::size_t ring_dimension = 0;
    std::size_t d = 0;      // data dimension
    std::size_t n_s = 0;    // number of subspaces
    std::size_t n_c = 0;    // codebook size per subspace
    std::size_t n_rs = 0;   // sampled points per subspace for codebook training

    std::size_t d_s = 0;
    std::size_t d_prime = 0;
    std::size_t n_p = 0;
    std::size_t n_pd = 0;
    std::size_t n_sdop = 0;
    std::size_t n_sdrp = 0;
    std::size_t n_wop = 0;
    std::size_t n_wrp = 0;

    // Number of occupied blocks in whole-packing ciphertext i.
    std::size_t wop_blocks_in(std::size_t i) const {
        std::size_t total = n_s * n_c;
        std::size_t start = i * n_pd;
        if (start >= total)
            return 0;
        return std::min(n_pd, total - start);
    }

    // Global whole-packing block index -> (subspace, code) in subspace-major
    // order: all N_C codes of subspace 0, then subspace 1, ...
    std::size_t block_subspace(std::size_t g) const { return g / n_c; }
    std::size_t block_code(std::size_t g) const { return g % n_c; }
};

inline PQLayout layout_counts(std::size_t ring_dimension, std::size_t d, std::size_t n_s,
                              std::size_t n_c, std::size_t n_rs = 0) {
    if (!is_power_of_two(ring_dimension))
        throw InvalidArgument("layout_counts: ring dimension must be a power of two");
    if (n_s == 0 || d == 0 || n_c == 0)
        throw InvalidArgument("layout_counts: d, n_s, N_C must be positive");
    if (n_s > d)
        throw InvalidArgument("layout_counts: n_s must not exceed d");

    PQLayout L;
    L.ring_dimension = ring_dimension;
    L.d = d;
    L.n_s = n_s;
    L.n_c = n_c;
    L.n_rs = n_rs;
    L.n_p = ring_dimension / 2;
    L.d_s = ceil_div(d, n_s);
    L.d_prime = L.n_s * L.d_s;
    if (L.d_s > L.n_p)
        throw InvalidArgument("layout_counts: one sub-dimension block does not fit a ciphertext");
    L.n_pd = L.n_p / L.d_s;
    L.n_sdop = n_rs == 0 ? 0 : ceil_div(n_rs, L.n_pd);
    L.n_sdrp = n_c;
    L.n_wop = ceil_div(n_s * n_c, L.n_pd);
    L.n_wrp = n_c * L.n_wop;
    return L;
}

// A d-vector split into n_s zero-filled blocks of length d_s. When n_s does
// not divide d, the first n_s - (d mod n_s) blocks carry floor(d/n_s)
// elements and the remaining blocks carry one more, so every block fits in
// d_s slots and concatenation restores the original values plus exactly
// d' - d zeros at block tails.
struct SubdividedVector {
    std::size_t d_s = 0;
    std::vector<std::vector<double>> blocks;
};

template <typename Scalar>
SubdividedVector subdivide(const std::vector<Scalar>& x, const PQLayout& layout) {
    if (x.size() != layout.d)
        throw DimensionError("subdivide: vector length does not match layout dimension");
    SubdividedVector out;
    out.d_s = layout.d_s;
    out.blocks.resize(layout.n_s);
    std::size_t q = layout.d / layout.n_s;
    std::size_t r = layout.d % layout.n_s;
    std::size_t pos = 0;
    for (std::size_t s = 0; s < layout.n_s; ++s) {
        std::size_t take = q + (s >= layout.n_s - r ? 1 : 0);
        auto& blk = out.blocks[s];
        blk.assign(layout.d_s, 0.0);
        for (std::size_t t = 0; t < take; ++t)
            blk[t] = static_cast<double>(x[pos + t]);
        pos += take;
    }
    return out;
}

}  // namespace pqhe
