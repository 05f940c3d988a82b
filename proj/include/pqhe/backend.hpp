// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <vector>

#include "pqhe/params.hpp"
#include "pqhe/slots.hpp"

namespace pqhe {

// Public encryption key. Copyable; holding one does not allow decryption.
struct PublicKey {
    uint64_t key_id = 0;
    std::shared_ptr<const void> material;
};

// Decryption capability. Move-only so that exactly one party holds it; the
// server role never receives one and the evaluation API below has no entry
// point that accepts ciphertexts without it.
struct SecretKey {
    uint64_t key_id = 0;
    std::shared_ptr<const void> material;

    SecretKey() = default;
    SecretKey(uint64_t id, std::shared_ptr<const void> m) : key_id(id), material(std::move(m)) {}
    SecretKey(const SecretKey&) = delete;
    SecretKey& operator=(const SecretKey&) = delete;
    SecretKey(SecretKey&&) = default;
    SecretKey& operator=(SecretKey&&) = default;
};

struct KeyPair {
    PublicKey pub;
    SecretKey sec;
};

namespace detail {

// Full backend surface. Never handed out directly: the client-side HeContext
// and the evaluation-only Evaluator wrap it with different capability sets.
class BackendImpl {
public:
    virtual ~BackendImpl() = default;

    virtual const SchemeParams& scheme() const = 0;

    // Rotation steps the backend holds evaluation keys for (empty set means
    // "any step", which is what the simulator reports).
    virtual const std::set<std::size_t>& rotation_steps() const = 0;
    virtual bool restricts_rotation_steps() const = 0;

    virtual KeyPair keygen(const std::set<std::size_t>& rotation_steps) = 0;

    virtual Ciphertext encrypt(const SlotVector& v, PackingTag tag, const PublicKey& key) = 0;
    virtual SlotVector decrypt(const Ciphertext& c, const SecretKey& key) = 0;

    virtual Ciphertext add(const Ciphertext& a, const Ciphertext& b) = 0;
    virtual Ciphertext sub(const Ciphertext& a, const Ciphertext& b) = 0;
    virtual Ciphertext mul(const Ciphertext& a, const Ciphertext& b) = 0;
    virtual Ciphertext mul_plain(const Ciphertext& a, const SlotVector& p) = 0;
    virtual Ciphertext rotate(const Ciphertext& a, std::size_t k) = 0;

    virtual std::size_t size_bytes(const Ciphertext& c) const = 0;

    virtual std::vector<uint8_t> serialize(const Ciphertext& c) const = 0;
    virtual Ciphertext deserialize(const uint8_t* data, std::size_t len) const = 0;

    uint64_t backend_id() const { return backend_id_; }
    OpCounters& counters() { return counters_; }
    const OpCounters& counters() const { return counters_; }

protected:
    BackendImpl() : backend_id_(next_backend_id()) {}

    void check_same_backend(const Ciphertext& a, const Ciphertext& b) const {
        if (a.backend_id != backend_id_ || b.backend_id != backend_id_)
            throw BackendMismatchError("ciphertexts belong to a different backend instance");
    }
    void check_backend(const Ciphertext& a) const {
        if (a.backend_id != backend_id_)
            throw BackendMismatchError("ciphertext belongs to a different backend instance");
    }

private:
    static uint64_t next_backend_id() {
        static std::atomic<uint64_t> counter{1};
        return counter.fetch_add(1);
    }

    uint64_t backend_id_;
    OpCounters counters_;
};

}  // namespace detail

// Evaluation-only capability: slot-wise arithmetic, rotations, byte
// accounting and (de)serialization. No decrypt method exists on this type
// and no secret material is reachable through it.
class Evaluator {
public:
    Evaluator() = default;
    explicit Evaluator(std::shared_ptr<detail::BackendImpl> impl) : impl_(std::move(impl)) {}

    const SchemeParams& scheme() const { return impl_->scheme(); }
    std::size_t slot_count() const { return impl_->scheme().slot_count(); }

    Ciphertext add(const Ciphertext& a, const Ciphertext& b) const { return impl_->add(a, b); }
    Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const { return impl_->sub(a, b); }
    Ciphertext mul(const Ciphertext& a, const Ciphertext& b) const { return impl_->mul(a, b); }
    Ciphertext mul_plain(const Ciphertext& a, const SlotVector& p) const {
        return impl_->mul_plain(a, p);
    }
    Ciphertext rotate(const Ciphertext& a, std::size_t k) const { return impl_->rotate(a, k); }

    std::size_t size_bytes(const Ciphertext& c) const { return impl_->size_bytes(c); }

    std::vector<uint8_t> serialize(const Ciphertext& c) const { return impl_->serialize(c); }
    Ciphertext deserialize(const uint8_t* data, std::size_t len) const {
        return impl_->deserialize(data, len);
    }

    CounterSnapshot counters() const { return impl_->counters().snapshot(); }
    bool joint(const Evaluator& other) const { return impl_ == other.impl_; }

private:
    std::shared_ptr<detail::BackendImpl> impl_;
};

// Client-side handle: key generation and the full cryptographic surface.
// evaluator() derives the capability that is safe to hand to the server.
class HeContext {
public:
    HeContext() = default;
    explicit HeContext(std::shared_ptr<detail::BackendImpl> impl) : impl_(std::move(impl)) {}

    const SchemeParams& scheme() const { return impl_->scheme(); }
    std::size_t slot_count() const { return impl_->scheme().slot_count(); }

    KeyPair keygen(const std::set<std::size_t>& rotation_steps = {}) {
        return impl_->keygen(rotation_steps);
    }

    Ciphertext encrypt(const SlotVector& v, PackingTag tag, const PublicKey& key) const {
        return impl_->encrypt(v, tag, key);
    }
    SlotVector decrypt(const Ciphertext& c, const SecretKey& key) const {
        return impl_->decrypt(c, key);
    }

    Evaluator evaluator() const { return Evaluator(impl_); }

    CounterSnapshot counters() const { return impl_->counters().snapshot(); }
    void reset_counters() { impl_->counters().reset(); }
    void enable_op_log(bool on) { impl_->counters().enable_log(on); }
    std::vector<OpCounters::LogEntry> op_log() const { return impl_->counters().log_copy(); }

private:
    std::shared_ptr<detail::BackendImpl> impl_;
};

}  // namespace pqhe
