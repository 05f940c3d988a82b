// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <utility>

#include "pqhe/backend.hpp"
#include "pqhe/ckks/encoding.hpp"
#include "pqhe/ckks/modmath.hpp"
#include "pqhe/ckks/ntt.hpp"

namespace pqhe::ckks {

// Toy-parameter CKKS over Z[X]/(X^N + 1) with an RNS modulus chain of
// base prime + mult_depth rescale primes, plus one special prime used only
// inside key switching. Correct and fast enough for desk-scale verification;
// the parameters are NOT chosen for security and a warning says so loudly.
struct ToyParams {
    std::size_t ring_dimension = 4096;
    std::size_t mult_depth = 1;
    double scale = 1073741824.0;  // 2^30
    double error_stddev = 3.2;
    unsigned base_prime_bits = 59;
    unsigned rescale_prime_bits = 30;
    unsigned special_prime_bits = 60;
    std::vector<u64> modulus_chain;  // optional explicit chain: base first, then rescale primes
    uint64_t seed = 0x746f79636b6b73ULL;
    bool quiet = false;

    void validate() const {
        if (!is_power_of_two(ring_dimension) || ring_dimension < 8)
            throw InvalidArgument("ToyParams: ring_dimension must be a power of two >= 8");
        if (mult_depth < 1 || mult_depth > 2)
            throw InvalidArgument("ToyParams: mult_depth must be 1 or 2");
        if (scale < 2.0)
            throw InvalidArgument("ToyParams: scale too small");
        if (!modulus_chain.empty()) {
            if (modulus_chain.size() != mult_depth + 1)
                throw InvalidArgument("ToyParams: modulus chain length must be mult_depth + 1");
            for (u64 p : modulus_chain)
                if (!is_prime(p) || (p - 1) % (2 * ring_dimension) != 0)
                    throw InvalidArgument("ToyParams: modulus chain prime is not NTT friendly");
        }
    }
};

namespace detail {

using Poly = std::vector<u64>;     // one modulus, coefficient or NTT domain
using RnsPoly = std::vector<Poly>;  // indexed by modulus

struct CkksBody {
    RnsPoly c0, c1;      // coefficient domain, active moduli 0..level
    std::size_t level;   // rescale primes still active; also depth_remaining
    double scale;
};

struct CkksSecret {
    uint64_t key_id = 0;
    std::vector<int8_t> s;  // ternary
};

struct KswKey {
    // gadget digit i pairs over moduli {q_0..q_level, p_special}, NTT domain
    std::vector<RnsPoly> b, a;
};

}  // namespace detail

class CkksBackend final : public pqhe::detail::BackendImpl {
    using Poly = detail::Poly;
    using RnsPoly = detail::RnsPoly;

public:
    explicit CkksBackend(ToyParams params) : params_(std::move(params)), rng_(params_.seed) {
        params_.validate();
        n_ = params_.ring_dimension;
        if (!params_.modulus_chain.empty()) {
            primes_ = params_.modulus_chain;
        } else {
            primes_.push_back(find_ntt_prime(params_.base_prime_bits, 2 * n_, 0));
            for (std::size_t i = 0; i < params_.mult_depth; ++i)
                primes_.push_back(find_ntt_prime(params_.rescale_prime_bits, 2 * n_, unsigned(i)));
        }
        special_ = find_ntt_prime(params_.special_prime_bits, 2 * n_, 0);
        for (u64 p : primes_)
            if (p == special_)
                special_ = find_ntt_prime(params_.special_prime_bits, 2 * n_, 1);

        for (u64 p : primes_)
            ntts_.emplace_back(n_, p, find_primitive_root(p, 2 * n_, rng_));
        ntt_sp_ = Ntt(n_, special_, find_primitive_root(special_, 2 * n_, rng_));
        embed_ = Embedding(n_);

        scheme_.ring_dimension = n_;
        scheme_.mult_depth = params_.mult_depth;
        scheme_.ciphertext_bytes = body_bytes(params_.mult_depth);
        scheme_.security_label = "toy parameters - NOT secure";

        if (!params_.quiet) {
            static std::once_flag warned;
            std::call_once(warned, [] {
                std::fprintf(stderr,
                             "[pqhe] WARNING: toy CKKS backend uses small, insecure parameters; "
                             "use it for correctness and accounting work only.\n");
            });
        }
    }

    const SchemeParams& scheme() const override { return scheme_; }
    const std::set<std::size_t>& rotation_steps() const override { return steps_; }
    bool restricts_rotation_steps() const override { return true; }

    const std::vector<u64>& modulus_chain() const { return primes_; }
    u64 special_prime() const { return special_; }

    KeyPair keygen(const std::set<std::size_t>& rotation_steps) override {
        std::lock_guard<std::mutex> lk(rng_mutex_);
        steps_ = rotation_steps;
        key_id_ = splitmix64(backend_id() * 0x2545f4914f6cdd1dULL + 17);

        auto secret = std::make_shared<detail::CkksSecret>();
        secret->key_id = key_id_;
        secret->s = sample_ternary();
        sk_raw_ = secret->s;
        sk_ntt_ = to_rns_ntt_all(secret->s);

        // public key over the full chain
        pk_a_ntt_.assign(level_count(), Poly());
        pk_b_ntt_.assign(level_count(), Poly());
        std::vector<int64_t> pe = sample_gaussian();
        for (std::size_t m = 0; m < level_count(); ++m) {
            Poly a = sample_uniform(primes_[m]);
            ntts_[m].forward(a.data());
            Poly b(n_);
            for (std::size_t k = 0; k < n_; ++k)
                b[k] = mul_mod(a[k], sk_ntt_[m][k], primes_[m]);
            // b = -a*s + e
            Poly e = lift_signed(pe, primes_[m]);
            ntts_[m].forward(e.data());
            for (std::size_t k = 0; k < n_; ++k)
                b[k] = sub_mod(e[k], b[k], primes_[m]);
            pk_a_ntt_[m] = std::move(a);
            pk_b_ntt_[m] = std::move(b);
        }

        // relinearization keys (target s^2) for every level that can multiply
        relin_.assign(level_count(), detail::KswKey{});
        std::vector<int64_t> s2 = square_secret(secret->s);
        for (std::size_t lvl = 1; lvl < level_count(); ++lvl)
            relin_[lvl] = make_ksw_key(s2, lvl);

        // Galois keys (target s(X^{5^k})) per requested step per level
        galois_.clear();
        for (std::size_t k : steps_) {
            if (k == 0 || k >= n_ / 2)
                throw InvalidArgument("keygen: rotation step out of range");
            std::vector<int8_t> sg = automorphism_ternary(secret->s, galois_element(k));
            std::vector<int64_t> tgt(sg.begin(), sg.end());
            auto& per_level = galois_[k];
            per_level.assign(level_count(), detail::KswKey{});
            for (std::size_t lvl = 0; lvl < level_count(); ++lvl)
                per_level[lvl] = make_ksw_key(tgt, lvl);
        }

        KeyPair kp;
        kp.pub = PublicKey{key_id_, secret};  // carries id; material unused for encryption
        kp.sec = SecretKey{key_id_, secret};
        return kp;
    }

    Ciphertext encrypt(const SlotVector& v, PackingTag tag, const PublicKey& key) override {
        if (key.key_id == 0 || key.key_id != key_id_)
            throw KeyError("ckks: unknown public key");
        if (v.size() != n_ / 2)
            throw DimensionError("ckks: slot vector length must equal n_p");
        RnsPoly m = encode_to_rns(v, params_.scale, level_count() - 1);

        std::vector<int8_t> u;
        std::vector<int64_t> e0, e1;
        {
            std::lock_guard<std::mutex> lk(rng_mutex_);
            u = sample_ternary();
            e0 = sample_gaussian();
            e1 = sample_gaussian();
        }
        auto body = std::make_shared<detail::CkksBody>();
        body->level = level_count() - 1;
        body->scale = params_.scale;
        body->c0.resize(level_count());
        body->c1.resize(level_count());
        for (std::size_t mi = 0; mi < level_count(); ++mi) {
            u64 p = primes_[mi];
            Poly un = lift_signed_small(u, p);
            ntts_[mi].forward(un.data());
            Poly c0(n_), c1(n_);
            for (std::size_t k = 0; k < n_; ++k) {
                c0[k] = mul_mod(un[k], pk_b_ntt_[mi][k], p);
                c1[k] = mul_mod(un[k], pk_a_ntt_[mi][k], p);
            }
            ntts_[mi].inverse(c0.data());
            ntts_[mi].inverse(c1.data());
            Poly le0 = lift_signed(e0, p), le1 = lift_signed(e1, p);
            for (std::size_t k = 0; k < n_; ++k) {
                c0[k] = add_mod(add_mod(c0[k], le0[k], p), m[mi][k], p);
                c1[k] = add_mod(c1[k], le1[k], p);
            }
            body->c0[mi] = std::move(c0);
            body->c1[mi] = std::move(c1);
        }
        Ciphertext ct = wrap(body, tag);
        counters().record(OpKind::Encrypt, size_of_body(*body));
        return ct;
    }

    SlotVector decrypt(const Ciphertext& c, const SecretKey& key) override {
        check_backend(c);
        if (key.key_id == 0 || key.key_id != key_id_)
            throw KeyError("ckks: unknown secret key");
        const auto& body = this->body(c);
        // m = c0 + c1 * s on the first one or two active moduli, then a CRT
        // centered lift; valid message coefficients stay far below q0*q1/4.
        std::size_t use = std::min<std::size_t>(2, body.level + 1);
        std::vector<Poly> m(use);
        for (std::size_t mi = 0; mi < use; ++mi) {
            u64 p = primes_[mi];
            Poly t = body.c1[mi];
            ntts_[mi].forward(t.data());
            for (std::size_t k = 0; k < n_; ++k)
                t[k] = mul_mod(t[k], sk_ntt_[mi][k], p);
            ntts_[mi].inverse(t.data());
            for (std::size_t k = 0; k < n_; ++k)
                t[k] = add_mod(t[k], body.c0[mi][k], p);
            m[mi] = std::move(t);
        }
        std::vector<double> coeffs(n_);
        if (use == 1) {
            u64 p = primes_[0];
            for (std::size_t k = 0; k < n_; ++k) {
                u64 r = m[0][k];
                double v = r > p / 2 ? -double(p - r) : double(r);
                if (std::abs(v) > double(p) * 0.375)
                    throw OverflowError("ckks: decrypted coefficient near modulus boundary");
                coeffs[k] = v;
            }
        } else {
            u64 q0 = primes_[0], q1 = primes_[1];
            u64 q0_inv_q1 = inv_mod(q0 % q1, q1);
            u128 q01 = static_cast<u128>(q0) * q1;
            for (std::size_t k = 0; k < n_; ++k) {
                u64 r0 = m[0][k], r1 = m[1][k];
                u64 diff = sub_mod(r1, r0 % q1, q1);
                u128 x = static_cast<u128>(r0) + static_cast<u128>(q0) * mul_mod(diff, q0_inv_q1, q1);
                bool neg = x > q01 / 2;
                u128 mag = neg ? q01 - x : x;
                if (mag > q01 / 4 * 3 / 2)
                    throw OverflowError("ckks: decrypted coefficient near modulus boundary");
                double v = double(mag);
                coeffs[k] = neg ? -v : v;
            }
        }
        counters().record(OpKind::Decrypt, 0);
        return embed_.decode_real(coeffs, body.scale);
    }

    Ciphertext add(const Ciphertext& a, const Ciphertext& b) override {
        return linear(a, b, OpKind::Add);
    }
    Ciphertext sub(const Ciphertext& a, const Ciphertext& b) override {
        return linear(a, b, OpKind::Sub);
    }

    Ciphertext mul(const Ciphertext& a, const Ciphertext& b) override {
        check_same_backend(a, b);
        const auto& A = body(a);
        const auto& B = body(b);
        if (A.level < 1 || B.level < 1)
            throw DepthBudgetError("ckks: multiplicative depth exhausted");
        if (A.level != B.level)
            throw InvalidArgument("ckks: level mismatch in mul");
        std::size_t lvl = A.level;

        RnsPoly t0(lvl + 1), t1(lvl + 1), t2(lvl + 1);
        for (std::size_t mi = 0; mi <= lvl; ++mi) {
            u64 p = primes_[mi];
            Poly a0 = A.c0[mi], a1 = A.c1[mi], b0 = B.c0[mi], b1 = B.c1[mi];
            ntts_[mi].forward(a0.data());
            ntts_[mi].forward(a1.data());
            ntts_[mi].forward(b0.data());
            ntts_[mi].forward(b1.data());
            Poly u0(n_), u1(n_), u2(n_);
            for (std::size_t k = 0; k < n_; ++k) {
                u0[k] = mul_mod(a0[k], b0[k], p);
                u1[k] = add_mod(mul_mod(a0[k], b1[k], p), mul_mod(a1[k], b0[k], p), p);
                u2[k] = mul_mod(a1[k], b1[k], p);
            }
            ntts_[mi].inverse(u0.data());
            ntts_[mi].inverse(u1.data());
            ntts_[mi].inverse(u2.data());
            t0[mi] = std::move(u0);
            t1[mi] = std::move(u1);
            t2[mi] = std::move(u2);
        }
        auto [u0, u1] = key_switch(t2, relin_[lvl], lvl);
        auto out = std::make_shared<detail::CkksBody>();
        out->level = lvl;
        out->scale = A.scale * B.scale;
        out->c0.resize(lvl + 1);
        out->c1.resize(lvl + 1);
        for (std::size_t mi = 0; mi <= lvl; ++mi) {
            u64 p = primes_[mi];
            Poly& r0 = t0[mi];
            Poly& r1 = t1[mi];
            for (std::size_t k = 0; k < n_; ++k) {
                r0[k] = add_mod(r0[k], u0[mi][k], p);
                r1[k] = add_mod(r1[k], u1[mi][k], p);
            }
            out->c0[mi] = std::move(r0);
            out->c1[mi] = std::move(r1);
        }
        rescale(*out);
        Ciphertext ct = wrap(out, a.tag);
        counters().record(OpKind::Mul, size_of_body(*out));
        return ct;
    }

    Ciphertext mul_plain(const Ciphertext& a, const SlotVector& pvals) override {
        check_backend(a);
        const auto& A = body(a);
        if (A.level < 1)
            throw DepthBudgetError("ckks: multiplicative depth exhausted");
        if (pvals.size() != n_ / 2)
            throw DimensionError("ckks: plaintext length must equal n_p");
        RnsPoly m = encode_to_rns(pvals, params_.scale, A.level);
        auto out = std::make_shared<detail::CkksBody>();
        out->level = A.level;
        out->scale = A.scale * params_.scale;
        out->c0.resize(A.level + 1);
        out->c1.resize(A.level + 1);
        for (std::size_t mi = 0; mi <= A.level; ++mi) {
            u64 p = primes_[mi];
            Poly c0 = A.c0[mi], c1 = A.c1[mi], mm = m[mi];
            ntts_[mi].forward(c0.data());
            ntts_[mi].forward(c1.data());
            ntts_[mi].forward(mm.data());
            for (std::size_t k = 0; k < n_; ++k) {
                c0[k] = mul_mod(c0[k], mm[k], p);
                c1[k] = mul_mod(c1[k], mm[k], p);
            }
            ntts_[mi].inverse(c0.data());
            ntts_[mi].inverse(c1.data());
            out->c0[mi] = std::move(c0);
            out->c1[mi] = std::move(c1);
        }
        rescale(*out);
        Ciphertext ct = wrap(out, a.tag);
        counters().record(OpKind::MulPlain, size_of_body(*out));
        return ct;
    }

    Ciphertext rotate(const Ciphertext& a, std::size_t k) override {
        check_backend(a);
        if (k >= n_ / 2)
            throw InvalidArgument("ckks: rotation amount out of range");
        const auto& A = body(a);
        if (k == 0) {
            auto out = std::make_shared<detail::CkksBody>(A);
            Ciphertext ct = wrap(out, a.tag);
            counters().record(OpKind::Rotate, size_of_body(*out));
            return ct;
        }
        auto it = galois_.find(k);
        if (it == galois_.end())
            throw KeyError("ckks: missing rotation key for requested step");
        u64 g = galois_element(k);
        std::size_t lvl = A.level;
        RnsPoly rc0(lvl + 1), rc1(lvl + 1);
        for (std::size_t mi = 0; mi <= lvl; ++mi) {
            rc0[mi] = apply_automorphism(A.c0[mi], g, primes_[mi]);
            rc1[mi] = apply_automorphism(A.c1[mi], g, primes_[mi]);
        }
        auto [u0, u1] = key_switch(rc1, it->second[lvl], lvl);
        auto out = std::make_shared<detail::CkksBody>();
        out->level = lvl;
        out->scale = A.scale;
        out->c0.resize(lvl + 1);
        out->c1.resize(lvl + 1);
        for (std::size_t mi = 0; mi <= lvl; ++mi) {
            u64 p = primes_[mi];
            Poly r0(n_);
            for (std::size_t t = 0; t < n_; ++t)
                r0[t] = add_mod(rc0[mi][t], u0[mi][t], p);
            out->c0[mi] = std::move(r0);
            out->c1[mi] = std::move(u1[mi]);
        }
        Ciphertext ct = wrap(out, a.tag);
        counters().record(OpKind::Rotate, size_of_body(*out));
        return ct;
    }

    std::size_t size_bytes(const Ciphertext& c) const override {
        check_backend(c);
        return size_of_body(body(c));
    }

    // discriminator + tag + depth + prime count + scale + polys
    std::vector<uint8_t> serialize(const Ciphertext& c) const override {
        check_backend(c);
        const auto& B = body(c);
        std::size_t active = B.level + 1;
        std::vector<uint8_t> out;
        out.reserve(size_of_body(B));
        out.push_back(0xC1);
        out.push_back(static_cast<uint8_t>(c.tag));
        out.push_back(static_cast<uint8_t>(B.level));
        out.push_back(static_cast<uint8_t>(active));
        uint8_t sc[8];
        std::memcpy(sc, &B.scale, 8);
        out.insert(out.end(), sc, sc + 8);
        auto put_poly = [&](const Poly& p) {
            const uint8_t* raw = reinterpret_cast<const uint8_t*>(p.data());
            out.insert(out.end(), raw, raw + n_ * sizeof(u64));
        };
        for (std::size_t mi = 0; mi < active; ++mi)
            put_poly(B.c0[mi]);
        for (std::size_t mi = 0; mi < active; ++mi)
            put_poly(B.c1[mi]);
        return out;
    }

    Ciphertext deserialize(const uint8_t* data, std::size_t len) const override {
        if (len < 12 || data[0] != 0xC1)
            throw SerializationError("ckks: bad ciphertext frame");
        std::size_t level = data[2];
        std::size_t active = data[3];
        if (active != level + 1 || active > level_count())
            throw SerializationError("ckks: bad level in ciphertext frame");
        if (len != 12 + 2 * active * n_ * sizeof(u64))
            throw SerializationError("ckks: bad ciphertext payload length");
        auto body = std::make_shared<detail::CkksBody>();
        body->level = level;
        std::memcpy(&body->scale, data + 4, 8);
        const uint8_t* p = data + 12;
        auto get_poly = [&]() {
            Poly poly(n_);
            std::memcpy(poly.data(), p, n_ * sizeof(u64));
            p += n_ * sizeof(u64);
            return poly;
        };
        body->c0.resize(active);
        body->c1.resize(active);
        for (std::size_t mi = 0; mi < active; ++mi)
            body->c0[mi] = get_poly();
        for (std::size_t mi = 0; mi < active; ++mi)
            body->c1[mi] = get_poly();
        for (std::size_t mi = 0; mi < active; ++mi)
            for (std::size_t k = 0; k < n_; ++k)
                if (body->c0[mi][k] >= primes_[mi] || body->c1[mi][k] >= primes_[mi])
                    throw SerializationError("ckks: coefficient out of range");
        if (data[1] > static_cast<uint8_t>(PackingTag::Raw))
            throw SerializationError("ckks: bad packing tag");
        return wrap(body, static_cast<PackingTag>(data[1]));
    }

private:
    std::size_t level_count() const { return primes_.size(); }

    const detail::CkksBody& body(const Ciphertext& c) const {
        return *static_cast<const detail::CkksBody*>(c.payload.get());
    }

    Ciphertext wrap(std::shared_ptr<const detail::CkksBody> b, PackingTag tag) const {
        Ciphertext c;
        c.backend_id = backend_id();
        c.slot_count = n_ / 2;
        c.depth_remaining = b->level;
        c.tag = tag;
        c.payload = std::move(b);
        return c;
    }

    std::size_t body_bytes(std::size_t level) const {
        return 12 + 2 * (level + 1) * n_ * sizeof(u64);
    }
    std::size_t size_of_body(const detail::CkksBody& b) const { return body_bytes(b.level); }

    // ----- sampling (rng_mutex_ held by callers where shared) -----

    std::vector<int8_t> sample_ternary() {
        std::vector<int8_t> s(n_);
        for (auto& x : s)
            x = static_cast<int8_t>(int(rng_.bounded(3)) - 1);
        return s;
    }

    std::vector<int64_t> sample_gaussian() {
        std::vector<int64_t> e(n_);
        for (auto& x : e)
            x = llround(rng_.normal() * params_.error_stddev);
        return e;
    }

    Poly sample_uniform(u64 p) {
        Poly a(n_);
        for (auto& x : a)
            x = rng_.bounded(p);
        return a;
    }

    static Poly lift_signed(const std::vector<int64_t>& v, u64 p) {
        Poly out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = v[i] >= 0 ? u64(v[i]) % p : p - (u64(-v[i]) % p);
        return out;
    }

    static Poly lift_signed_small(const std::vector<int8_t>& v, u64 p) {
        Poly out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = v[i] >= 0 ? u64(v[i]) : p - u64(-v[i]);
        return out;
    }

    // secret residues in NTT form for all chain primes (decrypt/keygen)
    RnsPoly to_rns_ntt_all(const std::vector<int8_t>& s) {
        RnsPoly out(level_count());
        for (std::size_t mi = 0; mi < level_count(); ++mi) {
            out[mi] = lift_signed_small(s, primes_[mi]);
            ntts_[mi].forward(out[mi].data());
        }
        return out;
    }

    // exact negacyclic s^2 over the integers; coefficients bounded by n
    std::vector<int64_t> square_secret(const std::vector<int8_t>& s) {
        std::vector<int64_t> sq(n_, 0);
        for (std::size_t i = 0; i < n_; ++i) {
            if (s[i] == 0)
                continue;
            for (std::size_t j = 0; j < n_; ++j) {
                if (s[j] == 0)
                    continue;
                std::size_t k = i + j;
                int64_t v = int64_t(s[i]) * int64_t(s[j]);
                if (k < n_)
                    sq[k] += v;
                else
                    sq[k - n_] -= v;
            }
        }
        return sq;
    }

    u64 galois_element(std::size_t k) const {
        u64 g = 1;
        u64 m = 2 * n_;
        for (std::size_t i = 0; i < k; ++i)
            g = (g * 5) % m;
        return g;
    }

    std::vector<int8_t> automorphism_ternary(const std::vector<int8_t>& s, u64 g) const {
        std::vector<int8_t> out(n_, 0);
        u64 m = 2 * n_;
        for (std::size_t i = 0; i < n_; ++i) {
            u64 e = (static_cast<u128>(i) * g) % m;
            if (e < n_)
                out[e] = s[i];
            else
                out[e - n_] = static_cast<int8_t>(-s[i]);
        }
        return out;
    }

    Poly apply_automorphism(const Poly& a, u64 g, u64 p) const {
        Poly out(n_, 0);
        u64 m = 2 * n_;
        for (std::size_t i = 0; i < n_; ++i) {
            u64 e = (static_cast<u128>(i) * g) % m;
            if (e < n_)
                out[e] = a[i];
            else
                out[e - n_] = a[i] == 0 ? 0 : p - a[i];
        }
        return out;
    }

    RnsPoly encode_to_rns(const SlotVector& v, double scale, std::size_t level) const {
        std::vector<double> coeffs = embed_.encode_real(v, scale);
        long double headroom = 1.0L;
        for (std::size_t mi = 0; mi <= level; ++mi)
            headroom *= static_cast<long double>(primes_[mi]);
        headroom /= 4.0L;
        RnsPoly out(level + 1, Poly(n_));
        for (std::size_t k = 0; k < n_; ++k) {
            double c = coeffs[k];
            if (std::abs(c) >= double(headroom) || std::abs(c) >= 4.6e18)
                throw OverflowError("ckks: encoded coefficient exceeds modulus headroom");
            int64_t r = llround(c);
            for (std::size_t mi = 0; mi <= level; ++mi)
                out[mi][k] = r >= 0 ? u64(r) % primes_[mi] : primes_[mi] - (u64(-r) % primes_[mi]);
        }
        return out;
    }

    Ciphertext linear(const Ciphertext& a, const Ciphertext& b, OpKind op) {
        check_same_backend(a, b);
        const auto& A = body(a);
        const auto& B = body(b);
        if (A.level != B.level)
            throw InvalidArgument("ckks: level mismatch in add/sub");
        double rel = std::abs(A.scale - B.scale) / A.scale;
        if (rel > 1e-9)
            throw InvalidArgument("ckks: scale mismatch in add/sub");
        auto out = std::make_shared<detail::CkksBody>();
        out->level = A.level;
        out->scale = A.scale;
        out->c0.resize(A.level + 1);
        out->c1.resize(A.level + 1);
        for (std::size_t mi = 0; mi <= A.level; ++mi) {
            u64 p = primes_[mi];
            Poly r0(n_), r1(n_);
            if (op == OpKind::Add) {
                for (std::size_t k = 0; k < n_; ++k) {
                    r0[k] = add_mod(A.c0[mi][k], B.c0[mi][k], p);
                    r1[k] = add_mod(A.c1[mi][k], B.c1[mi][k], p);
                }
            } else {
                for (std::size_t k = 0; k < n_; ++k) {
                    r0[k] = sub_mod(A.c0[mi][k], B.c0[mi][k], p);
                    r1[k] = sub_mod(A.c1[mi][k], B.c1[mi][k], p);
                }
            }
            out->c0[mi] = std::move(r0);
            out->c1[mi] = std::move(r1);
        }
        Ciphertext ct = wrap(out, a.tag);
        counters().record(op, size_of_body(*out));
        return ct;
    }

    // ----- key switching -----

    // Gadget key for target polynomial T at a level: digit i carries
    // P * (Q_l/q_i) * [(Q_l/q_i)^{-1}]_{q_i} * T plus RLWE noise, over moduli
    // {q_0..q_l, special}. T is given as exact signed integers.
    detail::KswKey make_ksw_key(const std::vector<int64_t>& T, std::size_t level) {
        detail::KswKey key;
        std::size_t digits = level + 1;
        std::size_t mods = level + 2;  // + special
        key.b.assign(digits, RnsPoly(mods));
        key.a.assign(digits, RnsPoly(mods));
        for (std::size_t i = 0; i < digits; ++i) {
            // inv_i = (prod_{j != i} q_j)^{-1} mod q_i
            u64 prod_mod_qi = 1;
            for (std::size_t j = 0; j <= level; ++j)
                if (j != i)
                    prod_mod_qi = mul_mod(prod_mod_qi, primes_[j] % primes_[i], primes_[i]);
            u64 inv_i = inv_mod(prod_mod_qi, primes_[i]);

            std::vector<int64_t> e = sample_gaussian();
            for (std::size_t m = 0; m < mods; ++m) {
                u64 p = m <= level ? primes_[m] : special_;
                const Ntt& ntt = m <= level ? ntts_[m] : ntt_sp_;
                // factor = P * prod_{j != i} q_j * inv_i mod p
                u64 f = special_ % p;
                for (std::size_t j = 0; j <= level; ++j)
                    if (j != i)
                        f = mul_mod(f, primes_[j] % p, p);
                f = mul_mod(f, inv_i % p, p);

                Poly a = sample_uniform(p);
                ntt.forward(a.data());
                Poly skp = lift_signed_small(sk_raw_, p);
                ntt.forward(skp.data());
                Poly b(n_);
                for (std::size_t k = 0; k < n_; ++k)
                    b[k] = mul_mod(a[k], skp[k], p);
                Poly tp = lift_signed(T, p);
                ntt.forward(tp.data());
                Poly ep = lift_signed(e, p);
                ntt.forward(ep.data());
                for (std::size_t k = 0; k < n_; ++k) {
                    u64 ft = mul_mod(f, tp[k], p);
                    b[k] = add_mod(sub_mod(ep[k], b[k], p), ft, p);
                }
                key.b[i][m] = std::move(b);
                key.a[i][m] = std::move(a);
            }
        }
        return key;
    }

    // Applies the gadget to polynomial d (RNS, coeff domain, level moduli);
    // returns (u0, u1) with u0 + u1*s ~= d * T, coeff domain.
    std::pair<RnsPoly, RnsPoly> key_switch(const RnsPoly& d, const detail::KswKey& key,
                                           std::size_t level) const {
        std::size_t digits = level + 1;
        std::size_t mods = level + 2;
        std::vector<Poly> acc0(mods, Poly(n_, 0)), acc1(mods, Poly(n_, 0));
        for (std::size_t i = 0; i < digits; ++i) {
            for (std::size_t m = 0; m < mods; ++m) {
                u64 p = m <= level ? primes_[m] : special_;
                const Ntt& ntt = m <= level ? ntts_[m] : ntt_sp_;
                Poly dig(n_);
                for (std::size_t k = 0; k < n_; ++k)
                    dig[k] = d[i][k] % p;
                ntt.forward(dig.data());
                for (std::size_t k = 0; k < n_; ++k) {
                    acc0[m][k] = add_mod(acc0[m][k], mul_mod(dig[k], key.b[i][m][k], p), p);
                    acc1[m][k] = add_mod(acc1[m][k], mul_mod(dig[k], key.a[i][m][k], p), p);
                }
            }
        }
        for (std::size_t m = 0; m <= level; ++m) {
            ntts_[m].inverse(acc0[m].data());
            ntts_[m].inverse(acc1[m].data());
        }
        ntt_sp_.inverse(acc0[level + 1].data());
        ntt_sp_.inverse(acc1[level + 1].data());

        // divide by the special prime with centered rounding
        RnsPoly u0(level + 1, Poly(n_)), u1(level + 1, Poly(n_));
        for (std::size_t m = 0; m <= level; ++m) {
            u64 p = primes_[m];
            u64 pinv = inv_mod(special_ % p, p);
            u64 sp_mod_p = special_ % p;
            for (std::size_t k = 0; k < n_; ++k) {
                u64 r0 = acc0[level + 1][k];
                u64 rr0 = r0 % p;
                u64 x0 = sub_mod(acc0[m][k], rr0, p);
                if (r0 > special_ / 2)
                    x0 = add_mod(x0, sp_mod_p, p);
                u0[m][k] = mul_mod(x0, pinv, p);

                u64 r1 = acc1[level + 1][k];
                u64 rr1 = r1 % p;
                u64 x1 = sub_mod(acc1[m][k], rr1, p);
                if (r1 > special_ / 2)
                    x1 = add_mod(x1, sp_mod_p, p);
                u1[m][k] = mul_mod(x1, pinv, p);
            }
        }
        return {std::move(u0), std::move(u1)};
    }

    // drop the top rescale prime with centered rounding; scale divides
    void rescale(detail::CkksBody& b) const {
        std::size_t lvl = b.level;
        u64 q = primes_[lvl];
        auto divide = [&](Poly& comp, const Poly& top_poly, u64 p, u64 qinv, u64 q_mod_p) {
            for (std::size_t k = 0; k < n_; ++k) {
                u64 top = top_poly[k];
                u64 x = sub_mod(comp[k], top % p, p);
                if (top > q / 2)
                    x = add_mod(x, q_mod_p, p);
                comp[k] = mul_mod(x, qinv, p);
            }
        };
        for (std::size_t m = 0; m < lvl; ++m) {
            u64 p = primes_[m];
            u64 qinv = inv_mod(q % p, p);
            u64 q_mod_p = q % p;
            divide(b.c0[m], b.c0[lvl], p, qinv, q_mod_p);
            divide(b.c1[m], b.c1[lvl], p, qinv, q_mod_p);
        }
        b.c0.pop_back();
        b.c1.pop_back();
        b.level -= 1;
        b.scale /= double(q);
    }

    ToyParams params_;
    std::size_t n_ = 0;
    std::vector<u64> primes_;
    u64 special_ = 0;
    std::vector<Ntt> ntts_;
    Ntt ntt_sp_;
    Embedding embed_;
    SchemeParams scheme_;

    Rng rng_;
    std::mutex rng_mutex_;

    uint64_t key_id_ = 0;
    std::vector<int8_t> sk_raw_;
    RnsPoly sk_ntt_;
    RnsPoly pk_b_ntt_, pk_a_ntt_;
    std::vector<detail::KswKey> relin_;
    std::map<std::size_t, std::vector<detail::KswKey>> galois_;
    std::set<std::size_t> steps_;
};

inline HeContext make_toy_ckks(ToyParams params) {
    return HeContext(std::make_shared<CkksBackend>(std::move(params)));
}

}  // namespace pqhe::ckks

namespace pqhe {
using ckks::make_toy_ckks;
using ckks::ToyParams;
}  // namespace pqhe
