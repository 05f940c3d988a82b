// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pqhe/backend.hpp"
#include "pqhe/codebook.hpp"
#include "pqhe/common.hpp"

namespace pqhe {

// One rotation-and-add of the block summation network. The source tells
// which ciphertext the rotated operand comes from:
//   Running   the running sum r
//   Memo      memoized doubling result r_m[memo_index]
//   Original  the untouched input c (odd tail)
enum class RotSource : uint8_t { Running = 0, Memo = 1, Original = 2 };

struct ReductionStep {
    RotSource source = RotSource::Running;
    std::size_t memo_index = 0;
    std::size_t rotation = 0;
};

// Fully determined by d_s; replaying the steps on plaintext yields exact
// block sums at block-start slots.
struct ReductionPlan {
    std::size_t d_s = 1;
    std::vector<ReductionStep> steps;

    std::size_t n_rot() const { return steps.size(); }

    std::set<std::size_t> rotation_steps() const {
        std::set<std::size_t> out;
        for (const auto& s : steps)
            out.insert(s.rotation);
        return out;
    }

    std::size_t memo_slots() const {
        std::size_t m = 0;
        for (const auto& s : steps)
            if (s.source == RotSource::Memo)
                m = std::max(m, s.memo_index + 1);
        // the doubling phase stores into memo regardless of later reads
        return std::max(m, d_s > 1 ? floor_log2(d_s) : 0);
    }

    // JSON lines, one step per line, for plan auditing.
    std::string to_jsonl() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const auto& s = steps[i];
            os << "{\"op\":\"rotate_add\",\"index\":" << i << ",\"rotation\":" << s.rotation
               << ",\"source\":\"";
            switch (s.source) {
                case RotSource::Running: os << "running"; break;
                case RotSource::Memo: os << "memo[" << s.memo_index << "]"; break;
                case RotSource::Original: os << "original"; break;
            }
            os << "\"}\n";
        }
        return os.str();
    }
};

// Builds the summation schedule for block length d_s:
//   phase 1  doubling: r += rot(r, 2^i), memoizing every partial,
//   phase 2  consume the remainder with the largest memoized chunks,
//   phase 3  odd tail pulls one last element from the original input.
inline ReductionPlan plan_rot_sum(std::size_t d_s) {
    if (d_s == 0)
        throw InvalidArgument("plan_rot_sum: d_s must be >= 1");
    ReductionPlan plan;
    plan.d_s = d_s;
    if (d_s == 1)
        return plan;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < floor_log2(d_s)) {
        plan.steps.push_back({RotSource::Running, 0, std::size_t{1} << i});
        ++i;
    }
    std::size_t pow_i = std::size_t{1} << i;
    while (d_s >= pow_i + j + 2) {
        std::size_t k = floor_log2(d_s - pow_i - j);
        plan.steps.push_back({RotSource::Memo, k - 1, pow_i + j});
        j += std::size_t{1} << k;
    }
    if (d_s % 2 == 1)
        plan.steps.push_back({RotSource::Original, 0, pow_i + j});
    return plan;
}

// Rotation count of the plan; matches an actual traced run by construction.
inline std::size_t rotation_count(std::size_t d_s) {
    return plan_rot_sum(d_s).n_rot();
}

// Rotation count of the doubling-then-single-steps baseline:
// floor(log2 d_s) + d_s - 2^floor(log2 d_s).
inline std::size_t conventional_count(std::size_t d_s) {
    if (d_s == 0)
        throw InvalidArgument("conventional_count: d_s must be >= 1");
    if (d_s == 1)
        return 0;
    std::size_t m = floor_log2(d_s);
    return m + d_s - (std::size_t{1} << m);
}

// Slot j of the result is the sum of input slots j .. j+d_s-1 (cyclic).
// Valid at block-start slots; other slots hold cross-block partial sums and
// are never read downstream. Consumes no depth.
inline Ciphertext rot_sum(const Evaluator& eval, const Ciphertext& c, std::size_t d_s) {
    ReductionPlan plan = plan_rot_sum(d_s);
    if (plan.steps.empty())
        return c;
    std::vector<Ciphertext> memo(d_s > 1 ? floor_log2(d_s) : 0);
    Ciphertext r = c;
    std::size_t doubling = 0;
    for (const auto& step : plan.steps) {
        switch (step.source) {
            case RotSource::Running:
                r = eval.add(r, eval.rotate(r, step.rotation));
                memo[doubling++] = r;
                break;
            case RotSource::Memo:
                r = eval.add(r, eval.rotate(memo[step.memo_index], step.rotation));
                break;
            case RotSource::Original:
                r = eval.add(r, eval.rotate(c, step.rotation));
                break;
        }
    }
    return r;
}

// Same result contract as rot_sum with the conventional schedule.
inline Ciphertext rot_sum_conventional(const Evaluator& eval, const Ciphertext& c,
                                       std::size_t d_s) {
    if (d_s == 0)
        throw InvalidArgument("rot_sum_conventional: d_s must be >= 1");
    if (d_s == 1)
        return c;
    std::size_t m = floor_log2(d_s);
    Ciphertext r = c;
    for (std::size_t i = 0; i < m; ++i)
        r = eval.add(r, eval.rotate(r, std::size_t{1} << i));
    for (std::size_t t = std::size_t{1} << m; t < d_s; ++t)
        r = eval.add(r, eval.rotate(c, t));
    return r;
}

// Rotation steps rot_sum will request for d_s; what Galois keygen needs.
inline std::set<std::size_t> rotation_steps_for(std::size_t d_s) {
    return plan_rot_sum(d_s).rotation_steps();
}

inline std::set<std::size_t> rotation_steps_conventional(std::size_t d_s) {
    std::set<std::size_t> out;
    if (d_s <= 1)
        return out;
    std::size_t m = floor_log2(d_s);
    for (std::size_t i = 0; i < m; ++i)
        out.insert(std::size_t{1} << i);
    for (std::size_t t = std::size_t{1} << m; t < d_s; ++t)
        out.insert(t);
    return out;
}

// Packed squared Euclidean distance between an OP-form and an RP-form
// ciphertext: block-start slot of block b holds ||a_b - b_b||^2. Consumes
// one depth level and rotation_count(d_s) rotations.
inline Ciphertext he_sq_euclidean(const Evaluator& eval, const Ciphertext& op_ct,
                                  const Ciphertext& rp_ct, std::size_t d_s) {
    Ciphertext diff = eval.sub(op_ct, rp_ct);
    Ciphertext sq = eval.mul(diff, diff);
    return rot_sum(eval, sq, d_s);
}

// Packed inner product; block-start slots hold <a_b, b_b>. Scores are
// maximized downstream.
inline Ciphertext he_inner_product(const Evaluator& eval, const Ciphertext& op_ct,
                                   const Ciphertext& rp_ct, std::size_t d_s) {
    Ciphertext prod = eval.mul(op_ct, rp_ct);
    return rot_sum(eval, prod, d_s);
}

inline Ciphertext he_block_distance(const Evaluator& eval, const Ciphertext& op_ct,
                                    const Ciphertext& rp_ct, std::size_t d_s, Metric metric) {
    return metric == Metric::Euclidean ? he_sq_euclidean(eval, op_ct, rp_ct, d_s)
                                       : he_inner_product(eval, op_ct, rp_ct, d_s);
}

}  // namespace pqhe
