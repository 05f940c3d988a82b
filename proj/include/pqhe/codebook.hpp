// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pqhe/layout.hpp"

namespace pqhe {

enum class Metric : uint8_t { Euclidean = 0, InnerProduct = 1 };

inline const char* to_string(Metric m) {
    return m == Metric::Euclidean ? "euclidean" : "inner_product";
}

// For Euclidean, smaller scores win; for inner product, larger scores win.
inline bool score_better(Metric m, double a, double b) {
    return m == Metric::Euclidean ? a < b : a > b;
}

// PQ centroids: n_s subspaces x N_C codes x d_s values.
struct Codebook {
    std::size_t n_s = 0;
    std::size_t n_c = 0;
    std::size_t d_s = 0;
    Metric metric = Metric::Euclidean;
    std::vector<double> centroids;  // [s][j][t] flattened

    double* code(std::size_t s, std::size_t j) { return centroids.data() + (s * n_c + j) * d_s; }
    const double* code(std::size_t s, std::size_t j) const {
        return centroids.data() + (s * n_c + j) * d_s;
    }

    static Codebook zeros(std::size_t n_s, std::size_t n_c, std::size_t d_s, Metric metric) {
        Codebook cb;
        cb.n_s = n_s;
        cb.n_c = n_c;
        cb.d_s = d_s;
        cb.metric = metric;
        cb.centroids.assign(n_s * n_c * d_s, 0.0);
        return cb;
    }
};

// PQ codes plus the original-id mapping, one row per datum.
struct EncodedDatabase {
    std::size_t n_s = 0;
    std::size_t n_c = 0;
    std::vector<uint32_t> codes;  // [i][s] flattened
    std::vector<uint64_t> ids;

    std::size_t size() const { return ids.size(); }
    uint32_t* row(std::size_t i) { return codes.data() + i * n_s; }
    const uint32_t* row(std::size_t i) const { return codes.data() + i * n_s; }
};

// Per-subspace code-to-code distance tables: tables[s][i][j].
struct InterCodeTables {
    std::size_t n_s = 0;
    std::size_t n_c = 0;
    Metric metric = Metric::Euclidean;
    std::vector<double> values;

    double& at(std::size_t s, std::size_t i, std::size_t j) {
        return values[(s * n_c + i) * n_c + j];
    }
    double at(std::size_t s, std::size_t i, std::size_t j) const {
        return values[(s * n_c + i) * n_c + j];
    }

    static InterCodeTables zeros(std::size_t n_s, std::size_t n_c, Metric metric) {
        InterCodeTables t;
        t.n_s = n_s;
        t.n_c = n_c;
        t.metric = metric;
        t.values.assign(n_s * n_c * n_c, 0.0);
        return t;
    }
};

// Inverted file index over PQ codes: center codes plus n_nb-way redundant
// posting lists of datum positions (indexes into the encoded database).
struct IVFIndex {
    std::size_t n_s = 0;
    std::size_t n_nb = 0;
    std::vector<uint32_t> center_codes;            // [c][s] flattened
    std::vector<std::vector<uint64_t>> posting_lists;

    std::size_t center_count() const { return posting_lists.size(); }
    const uint32_t* center(std::size_t c) const { return center_codes.data() + c * n_s; }
};

// Reconstruction of a PQ code in pseudo-dimension d' (zero fill retained).
inline std::vector<double> reconstruct(const Codebook& cb, const uint32_t* code) {
    std::vector<double> out(cb.n_s * cb.d_s);
    for (std::size_t s = 0; s < cb.n_s; ++s) {
        const double* c = cb.code(s, code[s]);
        for (std::size_t t = 0; t < cb.d_s; ++t)
            out[s * cb.d_s + t] = c[t];
    }
    return out;
}

// Mean over data of the total squared reconstruction error per vector
// (no division by the dimension; the convention is echoed in reports).
inline double mse(const EncodedDatabase& db, const Codebook& cb,
                  const std::vector<std::vector<float>>& originals, const PQLayout& layout) {
    if (db.size() == 0)
        return 0.0;
    if (originals.size() != db.size())
        throw DimensionError("mse: database and originals disagree on size");
    double total = 0.0;
    for (std::size_t i = 0; i < db.size(); ++i) {
        SubdividedVector sd = subdivide(originals[i], layout);
        const uint32_t* code = db.row(i);
        double err = 0.0;
        for (std::size_t s = 0; s < cb.n_s; ++s) {
            const double* c = cb.code(s, code[s]);
            for (std::size_t t = 0; t < cb.d_s; ++t) {
                double diff = sd.blocks[s][t] - c[t];
                err += diff * diff;
            }
        }
        total += err;
    }
    return total / static_cast<double>(db.size());
}

inline constexpr const char* kMseConvention = "mean over data of squared L2 error per vector";

}  // namespace pqhe
