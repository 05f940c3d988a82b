// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstring>
#include <memory>

#include "pqhe/backend.hpp"

namespace pqhe {
namespace detail {

// Plaintext-simulating backend. Stores slot vectors verbatim but enforces
// the exact operation contract of a real scheme (depth budget, rotation
// semantics, key checks), so code built on Evaluator cannot tell which
// backend it runs on. Arithmetic is bit-exact, which is what makes it usable
// as the oracle and as the operation/byte accountant.
class SimulatorBackend final : public BackendImpl {
public:
    explicit SimulatorBackend(SchemeParams params) : params_(std::move(params)) {
        params_.validate();
    }

    const SchemeParams& scheme() const override { return params_; }

    const std::set<std::size_t>& rotation_steps() const override { return steps_; }
    bool restricts_rotation_steps() const override { return false; }

    KeyPair keygen(const std::set<std::size_t>& rotation_steps) override {
        steps_ = rotation_steps;
        key_id_ = splitmix64(backend_id() * 0x9e3779b97f4a7c15ULL + 1);
        KeyPair kp;
        kp.pub = PublicKey{key_id_, nullptr};
        kp.sec = SecretKey{key_id_, nullptr};
        return kp;
    }

    Ciphertext encrypt(const SlotVector& v, PackingTag tag, const PublicKey& key) override {
        if (key.key_id == 0 || key.key_id != key_id_)
            throw KeyError("simulator: unknown public key");
        if (v.size() != params_.slot_count())
            throw DimensionError("simulator: slot vector length must equal n_p");
        Ciphertext c = wrap(std::make_shared<SlotVector>(v), tag, params_.mult_depth);
        counters().record(OpKind::Encrypt, params_.ciphertext_bytes);
        return c;
    }

    SlotVector decrypt(const Ciphertext& c, const SecretKey& key) override {
        check_backend(c);
        if (key.key_id == 0 || key.key_id != key_id_)
            throw KeyError("simulator: unknown secret key");
        counters().record(OpKind::Decrypt, 0);
        return slots(c);
    }

    Ciphertext add(const Ciphertext& a, const Ciphertext& b) override {
        return binary(a, b, OpKind::Add);
    }
    Ciphertext sub(const Ciphertext& a, const Ciphertext& b) override {
        return binary(a, b, OpKind::Sub);
    }

    Ciphertext mul(const Ciphertext& a, const Ciphertext& b) override {
        check_same_backend(a, b);
        if (a.depth_remaining < 1 || b.depth_remaining < 1)
            throw DepthBudgetError("simulator: multiplicative depth exhausted");
        const SlotVector& va = slots(a);
        const SlotVector& vb = slots(b);
        auto out = std::make_shared<SlotVector>(params_.slot_count());
        for (std::size_t i = 0; i < out->size(); ++i)
            (*out)[i] = va[i] * vb[i];
        Ciphertext c = wrap(out, a.tag, std::min(a.depth_remaining, b.depth_remaining) - 1);
        counters().record(OpKind::Mul, params_.ciphertext_bytes);
        return c;
    }

    Ciphertext mul_plain(const Ciphertext& a, const SlotVector& p) override {
        check_backend(a);
        if (a.depth_remaining < 1)
            throw DepthBudgetError("simulator: multiplicative depth exhausted");
        if (p.size() != params_.slot_count())
            throw DimensionError("simulator: plaintext length must equal n_p");
        const SlotVector& va = slots(a);
        auto out = std::make_shared<SlotVector>(params_.slot_count());
        for (std::size_t i = 0; i < out->size(); ++i)
            (*out)[i] = va[i] * p[i];
        Ciphertext c = wrap(out, a.tag, a.depth_remaining - 1);
        counters().record(OpKind::MulPlain, params_.ciphertext_bytes);
        return c;
    }

    // Left rotation: slot j of the result is slot (j+k) mod n_p of the input.
    Ciphertext rotate(const Ciphertext& a, std::size_t k) override {
        check_backend(a);
        std::size_t n = params_.slot_count();
        if (k >= n)
            throw InvalidArgument("simulator: rotation amount out of range");
        const SlotVector& va = slots(a);
        auto out = std::make_shared<SlotVector>(n);
        for (std::size_t j = 0; j < n; ++j)
            (*out)[j] = va[(j + k) % n];
        Ciphertext c = wrap(out, a.tag, a.depth_remaining);
        counters().record(OpKind::Rotate, params_.ciphertext_bytes);
        return c;
    }

    std::size_t size_bytes(const Ciphertext& c) const override {
        check_backend(c);
        return params_.ciphertext_bytes;
    }

    // Frame payload: packing tag byte + depth byte + little-endian f64 slots.
    std::vector<uint8_t> serialize(const Ciphertext& c) const override {
        check_backend(c);
        const SlotVector& v = slots(c);
        std::vector<uint8_t> out(2 + v.size() * sizeof(double));
        out[0] = static_cast<uint8_t>(c.tag);
        out[1] = static_cast<uint8_t>(c.depth_remaining);
        std::memcpy(out.data() + 2, v.data(), v.size() * sizeof(double));
        return out;
    }

    Ciphertext deserialize(const uint8_t* data, std::size_t len) const override {
        std::size_t n = params_.slot_count();
        if (len != 2 + n * sizeof(double))
            throw SerializationError("simulator: bad ciphertext payload length");
        if (data[0] > static_cast<uint8_t>(PackingTag::Raw))
            throw SerializationError("simulator: bad packing tag");
        auto v = std::make_shared<SlotVector>(n);
        std::memcpy(v->data(), data + 2, n * sizeof(double));
        return wrap(v, static_cast<PackingTag>(data[0]), data[1]);
    }

private:
    const SlotVector& slots(const Ciphertext& c) const {
        return *static_cast<const SlotVector*>(c.payload.get());
    }

    Ciphertext wrap(std::shared_ptr<const SlotVector> v, PackingTag tag, std::size_t depth) const {
        Ciphertext c;
        c.backend_id = backend_id();
        c.slot_count = params_.slot_count();
        c.depth_remaining = depth;
        c.tag = tag;
        c.payload = std::move(v);
        return c;
    }

    Ciphertext binary(const Ciphertext& a, const Ciphertext& b, OpKind op) {
        check_same_backend(a, b);
        const SlotVector& va = slots(a);
        const SlotVector& vb = slots(b);
        auto out = std::make_shared<SlotVector>(params_.slot_count());
        if (op == OpKind::Add) {
            for (std::size_t i = 0; i < out->size(); ++i)
                (*out)[i] = va[i] + vb[i];
        } else {
            for (std::size_t i = 0; i < out->size(); ++i)
                (*out)[i] = va[i] - vb[i];
        }
        Ciphertext c = wrap(out, a.tag, std::min(a.depth_remaining, b.depth_remaining));
        counters().record(op, params_.ciphertext_bytes);
        return c;
    }

    SchemeParams params_;
    std::set<std::size_t> steps_;
    uint64_t key_id_ = 0;
};

}  // namespace detail

inline HeContext make_simulator(SchemeParams params) {
    return HeContext(std::make_shared<detail::SimulatorBackend>(std::move(params)));
}

}  // namespace pqhe
