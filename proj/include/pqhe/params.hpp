// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "pqhe/common.hpp"

namespace pqhe {

// Scheme-level knobs shared by every slotted backend. `ciphertext_bytes` is
// the accounting byte model: the simulator reports it verbatim from
// size_bytes(), the real backend reports actual serialized sizes instead.
struct SchemeParams {
    std::size_t ring_dimension = 16384;
    std::size_t mult_depth = 1;
    std::size_t ciphertext_bytes = 512 * kKiB;
    std::string security_label = "unspecified";

    std::size_t slot_count() const { return ring_dimension / 2; }

    void validate() const {
        if (!is_power_of_two(ring_dimension))
            throw InvalidArgument("SchemeParams: ring_dimension must be a power of two");
        if (mult_depth < 1 || mult_depth > 2)
            throw InvalidArgument("SchemeParams: mult_depth must be 1 or 2");
        if (ciphertext_bytes == 0)
            throw InvalidArgument("SchemeParams: ciphertext_bytes must be positive");
    }
};

// The three parameter profiles used throughout the benchmarks.
inline SchemeParams sift_profile() {
    return SchemeParams{16384, 2, 768 * kKiB, "192bit (reference profile; simulator has none)"};
}
inline SchemeParams gist_profile() {
    return SchemeParams{16384, 1, 512 * kKiB, "192bit (reference profile; simulator has none)"};
}
inline SchemeParams glove_profile() {
    return SchemeParams{16384, 1, 512 * kKiB, "192bit (reference profile; simulator has none)"};
}

}  // namespace pqhe
