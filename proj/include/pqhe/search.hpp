// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "pqhe/codebook.hpp"
#include "pqhe/pipeline/pqkmeans.hpp"

namespace pqhe {

// Per-query table of query-to-centroid scores, one row per subspace.
struct SubDistanceTable {
    std::size_t n_s = 0;
    std::size_t n_c = 0;
    Metric metric = Metric::Euclidean;
    std::vector<double> values;  // [s][j]

    double at(std::size_t s, std::size_t j) const { return values[s * n_c + j]; }
};

struct SearchParams {
    std::size_t l = 10;    // result length
    std::size_t l_c = 3;   // probed posting lists

    void validate(std::size_t n_centers) const {
        if (l < 1)
            throw InvalidArgument("SearchParams: l must be >= 1");
        if (l_c < 1 || l_c > n_centers)
            throw InvalidArgument("SearchParams: l_c must be in [1, N_I]");
    }
};

// Asymmetric distance: sum over subspaces of the tabulated query-to-centroid
// score selected by the code. Smaller is better for Euclidean, larger for
// inner product.
inline double adc_score(const uint32_t* code, const SubDistanceTable& table) {
    double s = 0.0;
    for (std::size_t i = 0; i < table.n_s; ++i)
        s += table.at(i, code[i]);
    return s;
}

struct SearchResult {
    std::vector<uint64_t> ids;
    std::vector<double> scores;
    bool truncated = false;  // fewer than l candidates were available
};

// Scores all centers with ADC, probes the best l_c posting lists,
// deduplicates the n_nb-redundant candidates and returns the top l by ADC
// score with index-order tie-breaking.
inline SearchResult ivf_search(const SubDistanceTable& table, const IVFIndex& index,
                               const EncodedDatabase& db, const SearchParams& params) {
    params.validate(index.center_count());
    const Metric metric = table.metric;

    std::vector<std::pair<double, std::size_t>> center_rank(index.center_count());
    for (std::size_t c = 0; c < index.center_count(); ++c)
        center_rank[c] = {adc_score(index.center(c), table), c};
    std::partial_sort(center_rank.begin(), center_rank.begin() + std::ptrdiff_t(params.l_c),
                      center_rank.end(), [&](const auto& a, const auto& b) {
                          if (a.first != b.first)
                              return score_better(metric, a.first, b.first);
                          return a.second < b.second;
                      });

    std::vector<uint64_t> candidates;
    for (std::size_t r = 0; r < params.l_c; ++r) {
        const auto& list = index.posting_lists[center_rank[r].second];
        candidates.insert(candidates.end(), list.begin(), list.end());
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::pair<double, uint64_t>> scored;
    scored.reserve(candidates.size());
    for (uint64_t pos : candidates)
        scored.push_back({adc_score(db.row(std::size_t(pos)), table), pos});
    std::size_t take = std::min(params.l, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(take), scored.end(),
                      [&](const auto& a, const auto& b) {
                          if (a.first != b.first)
                              return score_better(metric, a.first, b.first);
                          return a.second < b.second;
                      });

    SearchResult res;
    res.truncated = scored.size() < params.l;
    for (std::size_t r = 0; r < take; ++r) {
        res.ids.push_back(db.ids[std::size_t(scored[r].second)]);
        res.scores.push_back(scored[r].first);
    }
    return res;
}

// Fraction of the true k nearest neighbors present in the first k results,
// averaged over queries.
inline double recall_at_k(const std::vector<std::vector<uint64_t>>& results,
                          const std::vector<std::vector<uint64_t>>& ground_truth, std::size_t k) {
    if (results.size() != ground_truth.size())
        throw DimensionError("recall_at_k: result/truth count mismatch");
    if (results.empty())
        return 0.0;
    double total = 0.0;
    for (std::size_t q = 0; q < results.size(); ++q) {
        if (ground_truth[q].size() < k)
            throw InvalidArgument("recall_at_k: ground truth shorter than k");
        std::vector<uint64_t> truth(ground_truth[q].begin(), ground_truth[q].begin() + k);
        std::sort(truth.begin(), truth.end());
        std::size_t hits = 0;
        std::size_t upto = std::min(k, results[q].size());
        for (std::size_t i = 0; i < upto; ++i)
            if (std::binary_search(truth.begin(), truth.end(), results[q][i]))
                ++hits;
        total += double(hits) / double(k);
    }
    return total / double(results.size());
}

}  // namespace pqhe
