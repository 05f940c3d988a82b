// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "pqhe/common.hpp"

namespace pqhe {

enum class PackingTag : uint8_t {
    Sdop = 0,
    Sdrp = 1,
    Wop = 2,
    Wrp = 3,
    Raw = 4,
};

inline const char* to_string(PackingTag t) {
    switch (t) {
        case PackingTag::Sdop: return "SDOP";
        case PackingTag::Sdrp: return "SDRP";
        case PackingTag::Wop: return "WOP";
        case PackingTag::Wrp: return "WRP";
        case PackingTag::Raw: return "RAW";
    }
    return "?";
}

// Plaintext image of one packed ciphertext: exactly n_p slots.
using SlotVector = std::vector<double>;

// Immutable value handle. The payload is owned by the backend that minted it
// and is opaque to everything else; algorithm code can only route handles
// through the Evaluator interface.
struct Ciphertext {
    uint64_t backend_id = 0;
    std::size_t slot_count = 0;
    std::size_t depth_remaining = 0;
    PackingTag tag = PackingTag::Raw;
    std::shared_ptr<const void> payload;

    bool valid() const { return payload != nullptr; }
};

enum class OpKind : uint8_t { Add, Sub, Mul, MulPlain, Rotate, Encrypt, Decrypt };

struct CounterSnapshot {
    uint64_t n_add = 0;
    uint64_t n_mul = 0;
    uint64_t n_rotate = 0;
    uint64_t n_encrypt = 0;
    uint64_t n_decrypt = 0;
    uint64_t bytes_produced = 0;

    friend bool operator==(const CounterSnapshot&, const CounterSnapshot&) = default;
};

// Exact per-session accounting. add/sub both tick n_add; mul and
// plaintext-ciphertext mul both tick n_mul. bytes_produced accumulates the
// byte model of every ciphertext an operation or encryption emits.
class OpCounters {
public:
    void record(OpKind op, std::size_t produced_bytes) {
        switch (op) {
            case OpKind::Add:
            case OpKind::Sub: n_add_.fetch_add(1, std::memory_order_relaxed); break;
            case OpKind::Mul:
            case OpKind::MulPlain: n_mul_.fetch_add(1, std::memory_order_relaxed); break;
            case OpKind::Rotate: n_rotate_.fetch_add(1, std::memory_order_relaxed); break;
            case OpKind::Encrypt: n_encrypt_.fetch_add(1, std::memory_order_relaxed); break;
            case OpKind::Decrypt: n_decrypt_.fetch_add(1, std::memory_order_relaxed); break;
        }
        bytes_produced_.fetch_add(produced_bytes, std::memory_order_relaxed);
        if (logging_.load(std::memory_order_relaxed)) {
            std::lock_guard<std::mutex> lk(log_mutex_);
            log_.push_back({op, produced_bytes});
        }
    }

    CounterSnapshot snapshot() const {
        CounterSnapshot s;
        s.n_add = n_add_.load();
        s.n_mul = n_mul_.load();
        s.n_rotate = n_rotate_.load();
        s.n_encrypt = n_encrypt_.load();
        s.n_decrypt = n_decrypt_.load();
        s.bytes_produced = bytes_produced_.load();
        return s;
    }

    void reset() {
        n_add_ = n_mul_ = n_rotate_ = n_encrypt_ = n_decrypt_ = bytes_produced_ = 0;
        std::lock_guard<std::mutex> lk(log_mutex_);
        log_.clear();
    }

    void enable_log(bool on) { logging_.store(on); }

    struct LogEntry {
        OpKind op;
        std::size_t bytes;
    };

    std::vector<LogEntry> log_copy() const {
        std::lock_guard<std::mutex> lk(log_mutex_);
        return log_;
    }

private:
    std::atomic<uint64_t> n_add_{0}, n_mul_{0}, n_rotate_{0};
    std::atomic<uint64_t> n_encrypt_{0}, n_decrypt_{0}, bytes_produced_{0};
    std::atomic<bool> logging_{false};
    mutable std::mutex log_mutex_;
    std::vector<LogEntry> log_;
};

// Recomputes a snapshot from an op log; used to check counter exactness.
inline CounterSnapshot replay_counters(const std::vector<OpCounters::LogEntry>& log) {
    CounterSnapshot s;
    for (const auto& e : log) {
        switch (e.op) {
            case OpKind::Add:
            case OpKind::Sub: ++s.n_add; break;
            case OpKind::Mul:
            case OpKind::MulPlain: ++s.n_mul; break;
            case OpKind::Rotate: ++s.n_rotate; break;
            case OpKind::Encrypt: ++s.n_encrypt; break;
            case OpKind::Decrypt: ++s.n_decrypt; break;
        }
        s.bytes_produced += e.bytes;
    }
    return s;
}

}  // namespace pqhe
