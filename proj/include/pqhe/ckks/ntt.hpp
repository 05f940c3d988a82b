// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "pqhe/ckks/modmath.hpp"

namespace pqhe::ckks {

// Negacyclic number-theoretic transform over Z_p[X]/(X^N + 1), the classic
// merged-psi formulation: forward is Cooley-Tukey with bit-reversed psi
// powers, inverse is Gentleman-Sande with inverse powers and a final 1/N.
// Pointwise products of two forward transforms give the negacyclic product.
class Ntt {
public:
    Ntt() = default;

    Ntt(std::size_t n, u64 prime, u64 psi) : n_(n), p_(prime) {
        if (!is_power_of_two(n))
            throw InvalidArgument("Ntt: n must be a power of two");
        psi_rev_.resize(n);
        psi_rev_shoup_.resize(n);
        ipsi_rev_.resize(n);
        ipsi_rev_shoup_.resize(n);
        u64 ipsi = inv_mod(psi, p_);
        std::size_t log_n = floor_log2(n);
        u64 w = 1, iw = 1;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = bit_reverse(i, log_n);
            psi_rev_[r] = w;
            ipsi_rev_[r] = iw;
            psi_rev_shoup_[r] = shoup_precompute(w, p_);
            ipsi_rev_shoup_[r] = shoup_precompute(iw, p_);
            w = mul_mod(w, psi, p_);
            iw = mul_mod(iw, ipsi, p_);
        }
        n_inv_ = inv_mod(static_cast<u64>(n % p_), p_);
        n_inv_shoup_ = shoup_precompute(n_inv_, p_);
    }

    std::size_t size() const { return n_; }
    u64 prime() const { return p_; }

    void forward(u64* a) const {
        std::size_t t = n_;
        for (std::size_t m = 1; m < n_; m <<= 1) {
            t >>= 1;
            for (std::size_t i = 0; i < m; ++i) {
                u64 s = psi_rev_[m + i];
                u64 s_shoup = psi_rev_shoup_[m + i];
                std::size_t j1 = 2 * i * t;
                for (std::size_t j = j1; j < j1 + t; ++j) {
                    u64 u = a[j];
                    u64 v = mul_mod_shoup(a[j + t], s, s_shoup, p_);
                    a[j] = add_mod(u, v, p_);
                    a[j + t] = sub_mod(u, v, p_);
                }
            }
        }
    }

    void inverse(u64* a) const {
        std::size_t t = 1;
        for (std::size_t m = n_; m > 1; m >>= 1) {
            std::size_t h = m >> 1;
            std::size_t j1 = 0;
            for (std::size_t i = 0; i < h; ++i) {
                u64 s = ipsi_rev_[h + i];
                u64 s_shoup = ipsi_rev_shoup_[h + i];
                for (std::size_t j = j1; j < j1 + t; ++j) {
                    u64 u = a[j];
                    u64 v = a[j + t];
                    a[j] = add_mod(u, v, p_);
                    a[j + t] = mul_mod_shoup(sub_mod(u, v, p_), s, s_shoup, p_);
                }
                j1 += 2 * t;
            }
            t <<= 1;
        }
        for (std::size_t j = 0; j < n_; ++j)
            a[j] = mul_mod_shoup(a[j], n_inv_, n_inv_shoup_, p_);
    }

private:
    static std::size_t bit_reverse(std::size_t x, std::size_t bits) {
        std::size_t r = 0;
        for (std::size_t i = 0; i < bits; ++i)
            r |= ((x >> i) & 1) << (bits - 1 - i);
        return r;
    }

    std::size_t n_ = 0;
    u64 p_ = 0;
    u64 n_inv_ = 0, n_inv_shoup_ = 0;
    std::vector<u64> psi_rev_, psi_rev_shoup_, ipsi_rev_, ipsi_rev_shoup_;
};

}  // namespace pqhe::ckks
