// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "pqhe/common.hpp"

namespace pqhe::ckks {

using u64 = uint64_t;
using u128 = unsigned __int128;

inline u64 add_mod(u64 a, u64 b, u64 m) {
    u64 s = a + b;
    return s >= m ? s - m : s;
}

inline u64 sub_mod(u64 a, u64 b, u64 m) {
    return a >= b ? a - b : a + m - b;
}

inline u64 mul_mod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 pow_mod(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1)
            r = mul_mod(r, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return r;
}

inline u64 inv_mod(u64 a, u64 m) {
    // m prime throughout this backend
    return pow_mod(a % m, m - 2, m);
}

// Shoup representation: w_shoup = floor(w * 2^64 / m) lets the NTT butterfly
// multiply by a fixed constant with one mulhi and one low mul.
inline u64 shoup_precompute(u64 w, u64 m) {
    return static_cast<u64>((static_cast<u128>(w) << 64) / m);
}

inline u64 mul_mod_shoup(u64 a, u64 w, u64 w_shoup, u64 m) {
    u64 q = static_cast<u64>((static_cast<u128>(a) * w_shoup) >> 64);
    u64 r = a * w - q * m;
    return r >= m ? r - m : r;
}

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
inline bool is_prime(u64 n) {
    if (n < 2)
        return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0)
            return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1)
            continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness)
            return false;
    }
    return true;
}

// Largest primes p < 2^bits with p = 1 (mod modulus_step), skipping `index`
// hits; the NTT needs modulus_step = 2 * ring_dimension.
inline u64 find_ntt_prime(unsigned bits, u64 modulus_step, unsigned index = 0) {
    if (bits < 20 || bits > 62)
        throw InvalidArgument("find_ntt_prime: bits out of supported range");
    u64 candidate = ((u64{1} << bits) / modulus_step) * modulus_step + 1;
    while (candidate > (u64{1} << (bits - 1))) {
        if (candidate < (u64{1} << bits) && is_prime(candidate)) {
            if (index == 0)
                return candidate;
            --index;
        }
        candidate -= modulus_step;
    }
    throw InvalidArgument("find_ntt_prime: no prime found");
}

// Primitive 2N-th root of unity mod p (psi with psi^N = -1).
inline u64 find_primitive_root(u64 p, u64 two_n, Rng& rng) {
    if ((p - 1) % two_n != 0)
        throw InvalidArgument("find_primitive_root: prime is not NTT friendly");
    for (int attempt = 0; attempt < 4096; ++attempt) {
        u64 h = 2 + rng.bounded(p - 3);
        u64 psi = pow_mod(h, (p - 1) / two_n, p);
        if (pow_mod(psi, two_n / 2, p) == p - 1)
            return psi;
    }
    throw InvalidArgument("find_primitive_root: search failed");
}

}  // namespace pqhe::ckks
