// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "pqhe/layout.hpp"
#include "pqhe/protocol/message.hpp"
#include "pqhe/protocol/transport.hpp"

namespace pqhe::proto {

enum class Dir : uint8_t { Sent = 0, Received = 1 };

struct DirCounters {
    uint64_t messages = 0;
    uint64_t ciphertexts = 0;
    uint64_t ciphertext_bytes = 0;
    uint64_t plaintext_bytes = 0;
};

// Per-step, per-direction traffic accounting from the server's perspective.
// Ciphertext bytes use the backend byte model (configured B_C on the
// simulator, actual serialized size on the real backend); plaintext replies
// are tracked separately and excluded from ciphertext-traffic checks.
class TrafficLedger {
public:
    void record(Step step, Dir dir, const Message& m, const Evaluator& sizer) {
        uint64_t ct_bytes = 0;
        for (const auto& ct : m.cts)
            ct_bytes += sizer.size_bytes(ct);
        std::lock_guard<std::mutex> lk(mu_);
        auto& c = cell(step, dir);
        c.messages += 1;
        c.ciphertexts += m.cts.size();
        c.ciphertext_bytes += ct_bytes;
        c.plaintext_bytes += m.plain.size();
    }

    DirCounters get(Step step, Dir dir) const {
        std::lock_guard<std::mutex> lk(mu_);
        return cells_[index(step, dir)];
    }

    DirCounters total(Dir dir) const {
        std::lock_guard<std::mutex> lk(mu_);
        DirCounters t;
        for (uint8_t s = 0; s < kStepCount; ++s) {
            const auto& c = cells_[index(static_cast<Step>(s), dir)];
            t.messages += c.messages;
            t.ciphertexts += c.ciphertexts;
            t.ciphertext_bytes += c.ciphertext_bytes;
            t.plaintext_bytes += c.plaintext_bytes;
        }
        return t;
    }

    uint64_t ciphertext_bytes_both(Step step) const {
        std::lock_guard<std::mutex> lk(mu_);
        return cells_[index(step, Dir::Sent)].ciphertext_bytes +
               cells_[index(step, Dir::Received)].ciphertext_bytes;
    }

    void reset() {
        std::lock_guard<std::mutex> lk(mu_);
        cells_.fill(DirCounters{});
    }

    std::string to_string() const {
        std::lock_guard<std::mutex> lk(mu_);
        std::ostringstream os;
        for (uint8_t s = 0; s < kStepCount; ++s) {
            for (Dir dir : {Dir::Sent, Dir::Received}) {
                const auto& c = cells_[index(static_cast<Step>(s), dir)];
                if (c.messages == 0)
                    continue;
                os << proto::to_string(static_cast<Step>(s))
                   << (dir == Dir::Sent ? " sent" : " recv") << ": msgs=" << c.messages
                   << " cts=" << c.ciphertexts << " ct_bytes=" << c.ciphertext_bytes
                   << " pt_bytes=" << c.plaintext_bytes << "\n";
            }
        }
        return os.str();
    }

private:
    static std::size_t index(Step s, Dir d) {
        return std::size_t(static_cast<uint8_t>(s)) * 2 + static_cast<uint8_t>(d);
    }
    DirCounters& cell(Step s, Dir d) { return cells_[index(s, d)]; }

    mutable std::mutex mu_;
    std::array<DirCounters, std::size_t(kStepCount) * 2> cells_{};
};

// Transport wrapper that feeds the ledger. `sent` direction is defined by
// the owning role; the server session wraps its transport with role=server.
class LedgerTransport final : public Transport {
public:
    LedgerTransport(Transport& inner, TrafficLedger& ledger, Evaluator sizer)
        : inner_(inner), ledger_(ledger), sizer_(std::move(sizer)) {}

    void send(const Message& m) override {
        ledger_.record(m.step, Dir::Sent, m, sizer_);
        inner_.send(m);
    }
    Message receive() override {
        Message m = inner_.receive();
        ledger_.record(m.step, Dir::Received, m, sizer_);
        return m;
    }

private:
    Transport& inner_;
    TrafficLedger& ledger_;
    Evaluator sizer_;
};

// ----- closed-form traffic models -----

// Two-way ciphertext bytes per encoded datum and per query: the WRP upload
// plus the distance reply.
inline uint64_t model_encode_per_datum(const PQLayout& L, uint64_t b_c) {
    return 2 * L.n_wop * b_c;
}
inline uint64_t model_search_per_query(const PQLayout& L, uint64_t b_c) {
    return 2 * L.n_wop * b_c;
}

// Indexing: WRP codebook delivery up plus distance ciphertexts down.
inline uint64_t model_index_total(const PQLayout& L, uint64_t b_c) {
    return 2 * L.n_c * L.n_wop * b_c;
}
// One-way variant (distance ciphertexts only).
inline uint64_t model_index_distances(const PQLayout& L, uint64_t b_c) {
    return L.n_c * L.n_wop * b_c;
}

// Upper bound on k-means distance-ciphertext traffic over all subspaces.
inline uint64_t model_kmeans_bound(const PQLayout& L, uint64_t n_k, uint64_t b_c) {
    return L.n_s * n_k * L.n_sdop * L.n_sdrp * b_c;
}

// Full codebook-generation session bytes (both directions) when subspace s
// executes iters[s] k-means rounds: initial uploads, per-round distance and
// update ciphertexts, the conversion exchange and the WRP delivery.
inline uint64_t model_codebook_session_total(const PQLayout& L,
                                             const std::vector<uint64_t>& iters, uint64_t b_c) {
    uint64_t cts = 0;
    for (uint64_t it : iters)
        cts += (L.n_sdop + L.n_sdrp) + it * (L.n_sdop * L.n_sdrp + L.n_sdrp);
    cts += L.n_s * L.n_sdrp + L.n_wop;  // conversion request/reply
    cts += L.n_wrp;                     // WRP delivery
    return cts * b_c;
}

struct TrafficCheck {
    std::string name;
    uint64_t expected = 0;
    uint64_t measured = 0;
    bool upper_bound = false;
    bool pass = false;
};

struct TrafficReport {
    std::vector<TrafficCheck> checks;
    bool all_pass = true;

    std::string to_string() const {
        std::ostringstream os;
        for (const auto& c : checks)
            os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": measured=" << c.measured
               << (c.upper_bound ? " <= bound=" : " expected=") << c.expected << "\n";
        return os.str();
    }
};

// Compares measured per-step ciphertext bytes with the closed forms.
// Codebook generation is checked against its upper bound (early stopping is
// allowed); encoding, indexing and search are exact.
inline TrafficReport assert_traffic(const TrafficLedger& ledger, const PQLayout& L, uint64_t b_c,
                                    uint64_t n_k, uint64_t n_data, uint64_t n_queries) {
    TrafficReport rep;
    auto add = [&](std::string name, uint64_t expected, uint64_t measured, bool upper) {
        TrafficCheck c;
        c.name = std::move(name);
        c.expected = expected;
        c.measured = measured;
        c.upper_bound = upper;
        c.pass = upper ? measured <= expected : measured == expected;
        rep.all_pass = rep.all_pass && c.pass;
        rep.checks.push_back(std::move(c));
    };

    uint64_t kmeans_down = ledger.get(Step::KMeansDistances, Dir::Sent).ciphertext_bytes;
    add("codebook generation distance traffic", model_kmeans_bound(L, n_k, b_c), kmeans_down,
        true);

    if (n_data > 0) {
        uint64_t enc = ledger.get(Step::EncodeCiphertexts, Dir::Received).ciphertext_bytes +
                       ledger.get(Step::EncodeDistances, Dir::Sent).ciphertext_bytes;
        add("database encoding traffic", n_data * model_encode_per_datum(L, b_c), enc, false);
    }

    uint64_t idx = ledger.get(Step::WrpDelivery, Dir::Received).ciphertext_bytes +
                   ledger.get(Step::IndexDistances, Dir::Sent).ciphertext_bytes;
    if (idx > 0) {
        add("database indexing traffic", model_index_total(L, b_c), idx, false);
        add("database indexing distance ciphertexts (one way)", model_index_distances(L, b_c),
            ledger.get(Step::IndexDistances, Dir::Sent).ciphertext_bytes, false);
    }

    if (n_queries > 0) {
        uint64_t q = ledger.get(Step::QueryCiphertexts, Dir::Received).ciphertext_bytes +
                     ledger.get(Step::QueryDistances, Dir::Sent).ciphertext_bytes;
        add("search traffic", n_queries * model_search_per_query(L, b_c), q, false);
    }
    return rep;
}

}  // namespace pqhe::proto
