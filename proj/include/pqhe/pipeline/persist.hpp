// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "pqhe/codebook.hpp"
#include "pqhe/layout.hpp"

namespace pqhe {

// Versioned binary artifact files: 4 magic bytes, a version byte, then
// little-endian arrays. The manifest (JSON) records the layout parameters
// and seed that produced them.

namespace detail {

inline void put_u32(std::ostream& os, uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    os.write(reinterpret_cast<char*>(b), 4);
}
inline void put_u64(std::ostream& os, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = uint8_t(v >> (8 * i));
    os.write(reinterpret_cast<char*>(b), 8);
}
inline void put_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}
inline uint32_t get_u32(std::istream& is) {
    uint8_t b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw SerializationError("artifact file truncated");
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}
inline uint64_t get_u64(std::istream& is) {
    uint8_t b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw SerializationError("artifact file truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= uint64_t(b[i]) << (8 * i);
    return v;
}
inline double get_f64(std::istream& is) {
    uint64_t bits = get_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void expect_magic(std::istream& is, const char* magic) {
    char got[4];
    if (!is.read(got, 4) || std::memcmp(got, magic, 4) != 0)
        throw SerializationError(std::string("bad artifact magic, wanted ") + magic);
    char version;
    if (!is.read(&version, 1) || version != 1)
        throw SerializationError("unsupported artifact version");
}
inline void write_magic(std::ostream& os, const char* magic) {
    os.write(magic, 4);
    char version = 1;
    os.write(&version, 1);
}

}  // namespace detail

inline void save_codebook(const std::string& path, const Codebook& cb) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw SerializationError("cannot open " + path);
    detail::write_magic(os, "PQCB");
    os.put(char(cb.metric));
    detail::put_u32(os, uint32_t(cb.n_s));
    detail::put_u32(os, uint32_t(cb.n_c));
    detail::put_u32(os, uint32_t(cb.d_s));
    for (double v : cb.centroids)
        detail::put_f64(os, v);
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw SerializationError("cannot open " + path);
    detail::expect_magic(is, "PQCB");
    Metric metric = Metric(is.get());
    uint32_t n_s = detail::get_u32(is);
    uint32_t n_c = detail::get_u32(is);
    uint32_t d_s = detail::get_u32(is);
    Codebook cb = Codebook::zeros(n_s, n_c, d_s, metric);
    for (auto& v : cb.centroids)
        v = detail::get_f64(is);
    return cb;
}

inline void save_encoded(const std::string& path, const EncodedDatabase& db) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw SerializationError("cannot open " + path);
    detail::write_magic(os, "PQDB");
    detail::put_u64(os, db.size());
    detail::put_u32(os, uint32_t(db.n_s));
    detail::put_u32(os, uint32_t(db.n_c));
    for (uint32_t c : db.codes)
        detail::put_u32(os, c);
    for (uint64_t id : db.ids)
        detail::put_u64(os, id);
}

inline EncodedDatabase load_encoded(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw SerializationError("cannot open " + path);
    detail::expect_magic(is, "PQDB");
    uint64_t n = detail::get_u64(is);
    EncodedDatabase db;
    db.n_s = detail::get_u32(is);
    db.n_c = detail::get_u32(is);
    db.codes.resize(n * db.n_s);
    for (auto& c : db.codes) {
        c = detail::get_u32(is);
        if (c >= db.n_c)
            throw SerializationError("encoded database: code index out of range");
    }
    db.ids.resize(n);
    for (auto& id : db.ids)
        id = detail::get_u64(is);
    return db;
}

inline void save_tables(const std::string& path, const InterCodeTables& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw SerializationError("cannot open " + path);
    detail::write_magic(os, "PQTB");
    os.put(char(t.metric));
    detail::put_u32(os, uint32_t(t.n_s));
    detail::put_u32(os, uint32_t(t.n_c));
    for (double v : t.values)
        detail::put_f64(os, v);
}

inline InterCodeTables load_tables(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw SerializationError("cannot open " + path);
    detail::expect_magic(is, "PQTB");
    Metric metric = Metric(is.get());
    uint32_t n_s = detail::get_u32(is);
    uint32_t n_c = detail::get_u32(is);
    InterCodeTables t = InterCodeTables::zeros(n_s, n_c, metric);
    for (auto& v : t.values)
        v = detail::get_f64(is);
    return t;
}

inline void save_ivf(const std::string& path, const IVFIndex& idx) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw SerializationError("cannot open " + path);
    detail::write_magic(os, "PQIV");
    detail::put_u32(os, uint32_t(idx.center_count()));
    detail::put_u32(os, uint32_t(idx.n_s));
    detail::put_u32(os, uint32_t(idx.n_nb));
    for (uint32_t c : idx.center_codes)
        detail::put_u32(os, c);
    for (const auto& list : idx.posting_lists) {
        detail::put_u64(os, list.size());
        for (uint64_t p : list)
            detail::put_u64(os, p);
    }
}

inline IVFIndex load_ivf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw SerializationError("cannot open " + path);
    detail::expect_magic(is, "PQIV");
    uint32_t n_centers = detail::get_u32(is);
    IVFIndex idx;
    idx.n_s = detail::get_u32(is);
    idx.n_nb = detail::get_u32(is);
    idx.center_codes.resize(std::size_t(n_centers) * idx.n_s);
    for (auto& c : idx.center_codes)
        c = detail::get_u32(is);
    idx.posting_lists.resize(n_centers);
    for (auto& list : idx.posting_lists) {
        list.resize(detail::get_u64(is));
        for (auto& p : list)
            p = detail::get_u64(is);
    }
    return idx;
}

struct Manifest {
    std::size_t d = 0, n_s = 0, n_c = 0, n_rs = 0;
    std::size_t n_k = 0, pq_iters = 0, n_i = 0, n_nb = 0;
    std::string metric = "euclidean";
    std::string backend = "sim";
    std::string profile = "glove";
    uint64_t seed = 1;
};

inline void save_manifest(const std::string& path, const Manifest& m) {
    nlohmann::json j;
    j["d"] = m.d;
    j["n_s"] = m.n_s;
    j["n_c"] = m.n_c;
    j["n_rs"] = m.n_rs;
    j["n_k"] = m.n_k;
    j["pq_iters"] = m.pq_iters;
    j["n_i"] = m.n_i;
    j["n_nb"] = m.n_nb;
    j["metric"] = m.metric;
    j["backend"] = m.backend;
    j["profile"] = m.profile;
    j["seed"] = m.seed;
    std::ofstream os(path);
    if (!os)
        throw SerializationError("cannot open " + path);
    os << j.dump(2) << "\n";
}

inline Manifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw SerializationError("cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    Manifest m;
    m.d = j.at("d");
    m.n_s = j.at("n_s");
    m.n_c = j.at("n_c");
    m.n_rs = j.at("n_rs");
    m.n_k = j.at("n_k");
    m.pq_iters = j.at("pq_iters");
    m.n_i = j.at("n_i");
    m.n_nb = j.at("n_nb");
    m.metric = j.at("metric");
    m.backend = j.at("backend");
    m.profile = j.at("profile");
    m.seed = j.at("seed");
    return m;
}

}  // namespace pqhe
