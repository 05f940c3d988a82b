// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "pqhe/backend.hpp"

namespace pqhe::proto {

// Protocol steps. Direction notes are from the server's point of view.
enum class Step : uint8_t {
    Hello = 0,              // c->s  session id + shared layout manifest
    KMeansData = 1,         // c->s  SDOP data + initial SDRP codes, one subspace
    KMeansDistances = 2,    // s->c  distance ciphertexts
    KMeansUpdate = 3,       // c->s  new SDRP codes + plaintext labels
    KMeansSubspaceDone = 4, // s->c  subspace converged or hit the iteration cap
    ConvertRequest = 5,     // s->c  trained SDRP codebooks
    ConvertReply = 6,       // c->s  WOP codebook ciphertexts
    WrpDelivery = 7,        // c->s  WRP codebook ciphertexts (start of indexing)
    EncodeCiphertexts = 8,  // c->s  one datum, WRP form
    EncodeDistances = 9,    // s->c  distance ciphertexts
    EncodeTableReply = 10,  // c->s  plaintext strided distance table
    IndexDistances = 11,    // s->c  inter-code distance ciphertexts
    IndexTableReply = 12,   // c->s  plaintext inter-code tables
    IndexBuilt = 13,        // s->c  plaintext build summary
    QueryCiphertexts = 14,  // c->s  one query, WRP form
    QueryDistances = 15,    // s->c  distance ciphertexts
    QueryTableReply = 16,   // c->s  plaintext strided distance table
    SearchResults = 17,     // s->c  plaintext ranked ids
    StageEnd = 18,          // c->s  end of a client-driven stage
    Goodbye = 19,           // c->s  session shutdown
};

inline constexpr uint8_t kStepCount = 20;

inline const char* to_string(Step s) {
    static const char* names[] = {
        "Hello",          "KMeansData",      "KMeansDistances", "KMeansUpdate",
        "KMeansSubspaceDone", "ConvertRequest", "ConvertReply",  "WrpDelivery",
        "EncodeCiphertexts", "EncodeDistances", "EncodeTableReply", "IndexDistances",
        "IndexTableReply", "IndexBuilt",      "QueryCiphertexts", "QueryDistances",
        "QueryTableReply", "SearchResults",   "StageEnd",        "Goodbye"};
    return names[static_cast<uint8_t>(s)];
}

struct Message {
    Step step = Step::Hello;
    uint64_t session_id = 0;
    std::vector<Ciphertext> cts;
    std::vector<uint8_t> plain;
};

// little-endian scalar codecs for plaintext payloads
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i)
            buf_.push_back(uint8_t(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i)
            buf_.push_back(uint8_t(v >> (8 * i)));
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void bytes(const uint8_t* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const uint8_t* p, std::size_t n) : p_(p), end_(p + n) {}

    uint8_t u8() {
        need(1);
        return *p_++;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= uint32_t(p_[i]) << (8 * i);
        p_ += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= uint64_t(p_[i]) << (8 * i);
        p_ += 8;
        return v;
    }
    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    bool done() const { return p_ == end_; }
    std::size_t remaining() const { return std::size_t(end_ - p_); }

private:
    void need(std::size_t n) const {
        if (std::size_t(end_ - p_) < n)
            throw SerializationError("message payload truncated");
    }
    const uint8_t* p_;
    const uint8_t* end_;
};

// Wire encoding: 8-byte magic, 1-byte version, step byte, 4-byte ciphertext
// frame count, then the ciphertext frames and one plaintext frame. Every
// frame is a 4-byte little-endian length followed by the payload.
inline constexpr uint8_t kWireMagic[8] = {'P', 'Q', 'H', 'E', 'W', 'I', 'R', 'E'};
inline constexpr uint8_t kWireVersion = 1;

inline std::vector<uint8_t> encode_wire(const Message& m, const Evaluator& codec) {
    ByteWriter w;
    w.bytes(kWireMagic, 8);
    w.u8(kWireVersion);
    w.u8(static_cast<uint8_t>(m.step));
    w.u32(static_cast<uint32_t>(m.cts.size()));
    for (const auto& ct : m.cts) {
        auto payload = codec.serialize(ct);
        w.u32(static_cast<uint32_t>(payload.size()));
        w.bytes(payload.data(), payload.size());
    }
    w.u32(static_cast<uint32_t>(m.plain.size()));
    w.bytes(m.plain.data(), m.plain.size());
    return w.take();
}

inline Message decode_wire(const uint8_t* data, std::size_t len, const Evaluator& codec) {
    ByteReader r(data, len);
    uint8_t magic[8];
    for (auto& b : magic)
        b = r.u8();
    if (std::memcmp(magic, kWireMagic, 8) != 0)
        throw ProtocolError("bad wire magic");
    uint8_t version = r.u8();
    if (version != kWireVersion)
        throw ProtocolError("wire schema version mismatch");
    uint8_t step = r.u8();
    if (step >= kStepCount)
        throw ProtocolError("unknown protocol step");
    Message m;
    m.step = static_cast<Step>(step);
    uint32_t count = r.u32();
    m.cts.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t flen = r.u32();
        if (r.remaining() < flen)
            throw SerializationError("ciphertext frame truncated");
        std::vector<uint8_t> payload(flen);
        for (auto& b : payload)
            b = r.u8();
        m.cts.push_back(codec.deserialize(payload.data(), payload.size()));
    }
    uint32_t plen = r.u32();
    if (r.remaining() != plen)
        throw SerializationError("plaintext frame length mismatch");
    m.plain.resize(plen);
    for (auto& b : m.plain)
        b = r.u8();
    return m;
}

// ----- typed plaintext payloads -----

struct StridedTable {
    uint32_t n_s = 0;
    uint32_t n_c = 0;
    std::vector<double> values;  // [s][j]
};

inline std::vector<uint8_t> pack_table(const StridedTable& t) {
    ByteWriter w;
    w.u32(t.n_s);
    w.u32(t.n_c);
    for (double v : t.values)
        w.f64(v);
    return w.take();
}

inline StridedTable unpack_table(const std::vector<uint8_t>& p) {
    ByteReader r(p.data(), p.size());
    StridedTable t;
    t.n_s = r.u32();
    t.n_c = r.u32();
    t.values.resize(std::size_t(t.n_s) * t.n_c);
    for (auto& v : t.values)
        v = r.f64();
    if (!r.done())
        throw SerializationError("table payload has trailing bytes");
    return t;
}

inline std::vector<uint8_t> pack_labels(const std::vector<uint32_t>& labels) {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(labels.size()));
    for (uint32_t l : labels)
        w.u32(l);
    return w.take();
}

inline std::vector<uint32_t> unpack_labels(const std::vector<uint8_t>& p) {
    ByteReader r(p.data(), p.size());
    std::vector<uint32_t> labels(r.u32());
    for (auto& l : labels)
        l = r.u32();
    if (!r.done())
        throw SerializationError("label payload has trailing bytes");
    return labels;
}

struct RankedResults {
    std::vector<uint64_t> ids;
    std::vector<double> scores;
    bool truncated = false;
};

inline std::vector<uint8_t> pack_results(const RankedResults& res) {
    ByteWriter w;
    w.u8(res.truncated ? 1 : 0);
    w.u32(static_cast<uint32_t>(res.ids.size()));
    for (std::size_t i = 0; i < res.ids.size(); ++i) {
        w.u64(res.ids[i]);
        w.f64(res.scores[i]);
    }
    return w.take();
}

inline RankedResults unpack_results(const std::vector<uint8_t>& p) {
    ByteReader r(p.data(), p.size());
    RankedResults res;
    res.truncated = r.u8() != 0;
    uint32_t n = r.u32();
    res.ids.resize(n);
    res.scores.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        res.ids[i] = r.u64();
        res.scores[i] = r.f64();
    }
    return res;
}

}  // namespace pqhe::proto
