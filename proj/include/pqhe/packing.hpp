// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pqhe/codebook.hpp"
#include "pqhe/layout.hpp"
#include "pqhe/slots.hpp"

namespace pqhe {

// The four slot layouts. All of them tile a ciphertext with n_pd blocks of
// d_s slots; unused trailing slots stay zero, which is distance-neutral for
// both metrics.
//
//   SDOP  one subspace, data points in order:      x0 | x1 | x2 | ...
//   SDRP  one subspace, one code repeated:         c  | c  | c  | ...
//   WOP   whole codebook, subspace-major:          c(0,0)..c(0,Nc-1) | c(1,0)..
//   WRP   one datum aligned to WOP block for block: block g of WOP holds
//         subspace s = g / N_C, so WRP repeats the datum's block s there.

// Packs d_s-blocks back to back; ciphertext i holds blocks [i*n_pd, (i+1)*n_pd).
inline std::vector<SlotVector> pack_sdop(const std::vector<std::vector<double>>& blocks,
                                         const PQLayout& layout) {
    for (const auto& b : blocks)
        if (b.size() != layout.d_s)
            throw DimensionError("pack_sdop: block length must equal d_s");
    std::size_t n_ct = ceil_div(blocks.size(), layout.n_pd);
    std::vector<SlotVector> out(n_ct, SlotVector(layout.n_p, 0.0));
    for (std::size_t p = 0; p < blocks.size(); ++p) {
        std::size_t ct = p / layout.n_pd;
        std::size_t off = (p % layout.n_pd) * layout.d_s;
        for (std::size_t t = 0; t < layout.d_s; ++t)
            out[ct][off + t] = blocks[p][t];
    }
    return out;
}

// One code block repeated n_pd times (the repeat count of the matching SDOP).
inline SlotVector pack_sdrp(const std::vector<double>& block, const PQLayout& layout) {
    if (block.size() != layout.d_s)
        throw DimensionError("pack_sdrp: block length must equal d_s");
    SlotVector out(layout.n_p, 0.0);
    for (std::size_t r = 0; r < layout.n_pd; ++r)
        for (std::size_t t = 0; t < layout.d_s; ++t)
            out[r * layout.d_s + t] = block[t];
    return out;
}

// Whole codebook in subspace-major order, split into N_WOP vectors.
inline std::vector<SlotVector> pack_wop(const Codebook& cb, const PQLayout& layout) {
    if (cb.n_s != layout.n_s || cb.n_c != layout.n_c || cb.d_s != layout.d_s)
        throw DimensionError("pack_wop: codebook shape does not match layout");
    std::vector<SlotVector> out(layout.n_wop, SlotVector(layout.n_p, 0.0));
    std::size_t total = layout.n_s * layout.n_c;
    for (std::size_t g = 0; g < total; ++g) {
        std::size_t ct = g / layout.n_pd;
        std::size_t off = (g % layout.n_pd) * layout.d_s;
        const double* c = cb.code(layout.block_subspace(g), layout.block_code(g));
        for (std::size_t t = 0; t < layout.d_s; ++t)
            out[ct][off + t] = c[t];
    }
    return out;
}

// One datum aligned to the WOP geometry: wherever WOP holds a subspace-s
// code, WRP holds the datum's subspace-s block, so WOP - WRP yields
// (c_{j,s} - x_s) in every block at once.
inline std::vector<SlotVector> pack_wrp(const SubdividedVector& x, const PQLayout& layout) {
    if (x.blocks.size() != layout.n_s || x.d_s != layout.d_s)
        throw DimensionError("pack_wrp: subdivided vector does not match layout");
    std::vector<SlotVector> out(layout.n_wop, SlotVector(layout.n_p, 0.0));
    std::size_t total = layout.n_s * layout.n_c;
    for (std::size_t g = 0; g < total; ++g) {
        std::size_t ct = g / layout.n_pd;
        std::size_t off = (g % layout.n_pd) * layout.d_s;
        const auto& blk = x.blocks[layout.block_subspace(g)];
        for (std::size_t t = 0; t < layout.d_s; ++t)
            out[ct][off + t] = blk[t];
    }
    return out;
}

// Reads the block-start slots (indices 0 mod d_s) of a post-summation vector
// for the first `occupied` blocks. Every other slot holds cross-block
// partial sums and is never read.
inline std::vector<double> extract_block_values(const SlotVector& v, const PQLayout& layout,
                                                std::size_t occupied) {
    if (occupied > layout.n_pd)
        occupied = layout.n_pd;
    std::vector<double> out;
    out.reserve(occupied);
    for (std::size_t b = 0; b < occupied; ++b) {
        std::size_t idx = b * layout.d_s;
        if (idx >= v.size())
            break;
        out.push_back(v[idx]);
    }
    return out;
}

// Inverse of pack_sdop on occupied blocks; used by round-trip checks.
inline std::vector<std::vector<double>> unpack_sdop(const std::vector<SlotVector>& cts,
                                                    const PQLayout& layout, std::size_t count) {
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::size_t p = 0; p < count; ++p) {
        std::size_t ct = p / layout.n_pd;
        std::size_t off = (p % layout.n_pd) * layout.d_s;
        out.emplace_back(cts.at(ct).begin() + off, cts.at(ct).begin() + off + layout.d_s);
    }
    return out;
}

}  // namespace pqhe
