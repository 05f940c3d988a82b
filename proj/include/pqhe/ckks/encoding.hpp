// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pqhe/common.hpp"

namespace pqhe::ckks {

// Canonical-embedding codec. A real slot vector v of length N/2 maps to a
// real polynomial m with m(zeta^{5^t}) ~= scale * v[t], where zeta is a
// primitive 2N-th root of unity. Slots follow the 5-power orbit so that the
// Galois automorphism X -> X^(5^k) acts as a cyclic left slot rotation by k.
class Embedding {
public:
    Embedding() = default;

    explicit Embedding(std::size_t n) : n_(n) {
        if (!is_power_of_two(n) || n < 4)
            throw InvalidArgument("Embedding: ring dimension must be a power of two >= 4");
        std::size_t log_n = floor_log2(n);
        twiddle_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            double ang = 2.0 * kPi * double(k) / double(n);
            twiddle_[k] = {std::cos(ang), std::sin(ang)};
        }
        // zeta^k, zeta = exp(i*pi/n)
        zeta_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            double ang = kPi * double(k) / double(n);
            zeta_[k] = {std::cos(ang), std::sin(ang)};
        }
        bitrev_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log_n; ++b)
                r |= ((i >> b) & 1) << (log_n - 1 - b);
            bitrev_[i] = r;
        }
        // eval index of slot t: exponent 5^t mod 2n, point index (exp-1)/2
        slot_eval_index_.resize(n / 2);
        uint64_t e = 1;
        for (std::size_t t = 0; t < n / 2; ++t) {
            slot_eval_index_[t] = static_cast<std::size_t>((e - 1) / 2);
            e = (e * 5) % (2 * n);
        }
    }

    std::size_t ring_dimension() const { return n_; }
    std::size_t slot_count() const { return n_ / 2; }

    // v (length N/2) -> real coefficients scale * sigma^{-1}(conjugate-closed v).
    // Coefficients are rounded by the caller; magnitudes come out bounded by
    // roughly scale * max|v|.
    std::vector<double> encode_real(const std::vector<double>& v, double scale) const {
        if (v.size() != slot_count())
            throw DimensionError("Embedding::encode_real: wrong slot vector length");
        std::vector<std::complex<double>> w(n_, {0.0, 0.0});
        for (std::size_t t = 0; t < slot_count(); ++t) {
            std::size_t j = slot_eval_index_[t];
            w[j] = {v[t], 0.0};
            w[n_ - 1 - j] = {v[t], 0.0};  // conjugate point, real input
        }
        fft(w, /*invert=*/true);  // (1/N) sum_j w_j exp(-2*pi*i*j*k/N)
        std::vector<double> out(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            std::complex<double> m = w[k] * std::conj(zeta_[k]);
            out[k] = m.real() * scale;
        }
        return out;
    }

    // Centered real coefficients -> slot values / scale.
    std::vector<double> decode_real(const std::vector<double>& coeffs, double scale) const {
        if (coeffs.size() != n_)
            throw DimensionError("Embedding::decode_real: wrong coefficient count");
        std::vector<std::complex<double>> w(n_);
        for (std::size_t k = 0; k < n_; ++k)
            w[k] = coeffs[k] * zeta_[k];
        fft(w, /*invert=*/false);  // sum_k x_k exp(+2*pi*i*j*k/N)
        std::vector<double> out(slot_count());
        for (std::size_t t = 0; t < slot_count(); ++t)
            out[t] = w[slot_eval_index_[t]].real() / scale;
        return out;
    }

private:
    static constexpr double kPi = 3.14159265358979323846264338327950288;

    void fft(std::vector<std::complex<double>>& a, bool invert) const {
        std::size_t n = a.size();
        for (std::size_t i = 0; i < n; ++i)
            if (i < bitrev_[i])
                std::swap(a[i], a[bitrev_[i]]);
        for (std::size_t len = 2; len <= n; len <<= 1) {
            std::size_t step = n / len;
            for (std::size_t i = 0; i < n; i += len) {
                for (std::size_t j = 0; j < len / 2; ++j) {
                    std::complex<double> w = twiddle_[j * step];
                    if (invert)
                        w = std::conj(w);
                    std::complex<double> u = a[i + j];
                    std::complex<double> t = a[i + j + len / 2] * w;
                    a[i + j] = u + t;
                    a[i + j + len / 2] = u - t;
                }
            }
        }
        if (invert) {
            double inv_n = 1.0 / double(n);
            for (auto& x : a)
                x *= inv_n;
        }
    }

    std::size_t n_ = 0;
    std::vector<std::complex<double>> twiddle_;
    std::vector<std::complex<double>> zeta_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::size_t> slot_eval_index_;
};

}  // namespace pqhe::ckks
