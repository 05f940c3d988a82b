// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pqhe/secdist.hpp"
#include "pqhe/simulator.hpp"

#include "support/oracles.hpp"

using namespace pqhe;

namespace {

std::size_t popcount(std::size_t x) {
    std::size_t c = 0;
    for (; x; x &= x - 1)
        ++c;
    return c;
}

}  // namespace

TEST_CASE("rotation_count matches the reference values") {
    CHECK(rotation_count(1) == 0);
    CHECK(rotation_count(2) == 1);
    CHECK(rotation_count(3) == 2);
    CHECK(rotation_count(10) == 4);
    CHECK(rotation_count(12) == 4);
    CHECK(rotation_count(16) == 4);
    CHECK(rotation_count(100) == 8);

    CHECK(conventional_count(2) == 1);
    CHECK(conventional_count(64) == 6);
    CHECK(rotation_count(64) == 6);  // powers of two reduce to plain doubling
    CHECK(conventional_count(100) == 42);
}

TEST_CASE("rotation counts beat the conventional schedule and the log bound") {
    for (std::size_t d_s = 2; d_s <= 4096; ++d_s) {
        std::size_t n = rotation_count(d_s);
        CHECK(n <= conventional_count(d_s));
        CHECK(double(n) < 2.0 * std::log2(double(d_s)));
        // closed form implied by the schedule
        CHECK(n == floor_log2(d_s) + popcount(d_s) - 1);
    }
}

TEST_CASE("plan for d_s=100 requests exactly the expected rotation steps") {
    auto plan = plan_rot_sum(100);
    CHECK(plan.n_rot() == 8);
    CHECK(plan.rotation_steps() == std::set<std::size_t>{1, 2, 4, 8, 16, 32, 64, 96});
    CHECK(plan.memo_slots() == 6);  // floor(log2 100)
    CHECK(rotation_steps_for(1).empty());
}

TEST_CASE("plan trace dumps one JSON line per rotation") {
    auto plan = plan_rot_sum(7);
    auto jsonl = plan.to_jsonl();
    std::size_t lines = 0;
    for (char c : jsonl)
        if (c == '\n')
            ++lines;
    CHECK(lines == plan.n_rot());
    CHECK(jsonl.find("\"source\":\"memo[0]\"") != std::string::npos);
    CHECK(jsonl.find("\"source\":\"original\"") != std::string::npos);
}

TEST_CASE("rot_sum puts block sums at block starts") {
    auto ctx = make_simulator({16, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();

    SECTION("d_s=1 returns the input unchanged with zero rotations") {
        auto x = ctx.encrypt(SlotVector{5, 6, 7, 8, 0, 0, 0, 0}, PackingTag::Sdop, keys.pub);
        ctx.reset_counters();
        auto r = rot_sum(eval, x, 1);
        CHECK(ctx.decrypt(r, keys.sec) == SlotVector{5, 6, 7, 8, 0, 0, 0, 0});
        CHECK(ctx.counters().n_rotate == 0);
    }
    SECTION("two 3-blocks") {
        auto x = ctx.encrypt(SlotVector{1, 2, 3, 4, 5, 6, 0, 0}, PackingTag::Sdop, keys.pub);
        auto r = rot_sum(eval, x, 3);
        auto v = ctx.decrypt(r, keys.sec);
        CHECK(v[0] == 6.0);
        CHECK(v[3] == 15.0);
    }
}

TEST_CASE("rot_sum issues exactly the planned number of rotations") {
    auto ctx = make_simulator({512, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    auto x = ctx.encrypt(SlotVector(256, 1.0), PackingTag::Sdop, keys.pub);
    for (std::size_t d_s : {1u, 2u, 3u, 5u, 12u, 100u, 255u}) {
        ctx.reset_counters();
        (void)rot_sum(eval, x, d_s);
        CHECK(ctx.counters().n_rotate == rotation_count(d_s));
        ctx.reset_counters();
        (void)rot_sum_conventional(eval, x, d_s);
        CHECK(ctx.counters().n_rotate == conventional_count(d_s));
    }
}

TEST_CASE("rot_sum and the conventional schedule agree with plaintext block sums") {
    auto ctx = make_simulator({512, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    const std::size_t n_p = 256;
    Rng rng(101);

    for (std::size_t d_s = 1; d_s <= 64; ++d_s) {
        std::size_t blocks = n_p / d_s;
        SlotVector v(n_p, 0.0);
        // integer-valued slots: sums are exact in any association order
        for (std::size_t i = 0; i < blocks * d_s; ++i)
            v[i] = double(int64_t(rng.bounded(17)) - 8);
        auto ct = ctx.encrypt(v, PackingTag::Sdop, keys.pub);
        auto fast = ctx.decrypt(rot_sum(eval, ct, d_s), keys.sec);
        auto conv = ctx.decrypt(rot_sum_conventional(eval, ct, d_s), keys.sec);
        for (std::size_t b = 0; b < blocks; ++b) {
            double want = oracle::naive_block_sum(v.data() + b * d_s, d_s);
            REQUIRE(fast[b * d_s] == want);
            REQUIRE(conv[b * d_s] == want);
        }
    }
}

TEST_CASE("real-valued block sums match the packed association order exactly") {
    auto ctx = make_simulator({256, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    Rng rng(555);
    for (std::size_t d_s : {3u, 7u, 12u, 25u, 100u}) {
        SlotVector v(128);
        for (auto& x : v)
            x = rng.uniform(-1e3, 1e3);
        auto ct = ctx.encrypt(v, PackingTag::Sdop, keys.pub);
        auto got = ctx.decrypt(rot_sum(eval, ct, d_s), keys.sec);
        for (std::size_t b = 0; b + 1 < 128 / d_s; ++b)
            REQUIRE(got[b * d_s] == oracle::packed_order_block_sum(v.data() + b * d_s, d_s));
    }
}

TEST_CASE("memo storage stays within floor(log2 d_s) ciphertexts") {
    for (std::size_t d_s = 2; d_s <= 1024; ++d_s) {
        auto plan = plan_rot_sum(d_s);
        CHECK(plan.memo_slots() <= floor_log2(d_s));
        for (const auto& s : plan.steps)
            if (s.source == RotSource::Memo)
                CHECK(s.memo_index < floor_log2(d_s));
    }
}

TEST_CASE("squared Euclidean kernel produces per-block distances") {
    auto ctx = make_simulator({8, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();

    auto op = ctx.encrypt(SlotVector{1, 2, 3, 4}, PackingTag::Sdop, keys.pub);
    auto rp = ctx.encrypt(SlotVector{1, 1, 1, 1}, PackingTag::Sdrp, keys.pub);

    SECTION("brute-force expected values") {
        auto r = ctx.decrypt(he_sq_euclidean(eval, op, rp, 2), keys.sec);
        CHECK(r[0] == 1.0);   // (1-1)^2 + (2-1)^2
        CHECK(r[2] == 13.0);  // (3-1)^2 + (4-1)^2
    }
    SECTION("identical inputs give all-zero block starts") {
        auto r = ctx.decrypt(he_sq_euclidean(eval, op, op, 2), keys.sec);
        CHECK(r[0] == 0.0);
        CHECK(r[2] == 0.0);
    }
    SECTION("consumes one depth and the planned rotations") {
        ctx.reset_counters();
        auto d = he_sq_euclidean(eval, op, rp, 2);
        CHECK(d.depth_remaining == 0);
        CHECK(ctx.counters().n_rotate == rotation_count(2));
        CHECK(ctx.counters().n_mul == 1);
        CHECK_THROWS_AS(he_sq_euclidean(eval, d, d, 2), DepthBudgetError);
    }
}

TEST_CASE("inner product kernel") {
    auto ctx = make_simulator({8, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();

    auto op = ctx.encrypt(SlotVector{1, 2, 3, 4}, PackingTag::Sdop, keys.pub);
    auto rp = ctx.encrypt(SlotVector{1, 1, 1, 1}, PackingTag::Sdrp, keys.pub);
    auto r = ctx.decrypt(he_inner_product(eval, op, rp, 2), keys.sec);
    CHECK(r[0] == 3.0);
    CHECK(r[2] == 7.0);

    SECTION("orthogonal blocks score zero") {
        auto a = ctx.encrypt(SlotVector{1, 0, 0, 1}, PackingTag::Sdop, keys.pub);
        auto b = ctx.encrypt(SlotVector{0, 1, 1, 0}, PackingTag::Sdrp, keys.pub);
        auto v = ctx.decrypt(he_inner_product(eval, a, b, 2), keys.sec);
        CHECK(v[0] == 0.0);
        CHECK(v[2] == 0.0);
    }
}

TEST_CASE("zero-padded tails are distance-neutral") {
    // d = 3 padded into d_s = 2 blocks: tail zeros contribute nothing
    auto ctx = make_simulator({8, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    auto op = ctx.encrypt(SlotVector{5, 0, 7, 0}, PackingTag::Sdop, keys.pub);
    auto rp = ctx.encrypt(SlotVector{2, 0, 2, 0}, PackingTag::Sdrp, keys.pub);
    auto e = ctx.decrypt(he_sq_euclidean(eval, op, rp, 2), keys.sec);
    CHECK(e[0] == 9.0);
    CHECK(e[2] == 25.0);
    auto p = ctx.decrypt(he_inner_product(eval, op, rp, 2), keys.sec);
    CHECK(p[0] == 10.0);
    CHECK(p[2] == 14.0);
}

TEST_CASE("kernels match the plaintext oracle on random blocks") {
    auto ctx = make_simulator({64, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    Rng rng(2025);
    const std::size_t d_s = 16;
    for (int rep = 0; rep < 50; ++rep) {
        SlotVector a(32), b(32);
        for (auto& x : a)
            x = rng.uniform(-100, 100);
        std::vector<double> blockb(d_s);
        for (auto& x : blockb)
            x = rng.uniform(-100, 100);
        for (std::size_t i = 0; i < 32; ++i)
            b[i] = blockb[i % d_s];
        auto ca = ctx.encrypt(a, PackingTag::Sdop, keys.pub);
        auto cb = ctx.encrypt(b, PackingTag::Sdrp, keys.pub);
        auto e = ctx.decrypt(he_sq_euclidean(eval, ca, cb, d_s), keys.sec);
        auto p = ctx.decrypt(he_inner_product(eval, ca, cb, d_s), keys.sec);
        for (std::size_t blk = 0; blk < 2; ++blk) {
            REQUIRE(e[blk * d_s] ==
                    oracle::packed_order_sq_euclidean(a.data() + blk * d_s, blockb.data(), d_s));
            REQUIRE(p[blk * d_s] ==
                    oracle::packed_order_inner_product(a.data() + blk * d_s, blockb.data(), d_s));
            // and within numeric noise of the naive order
            REQUIRE_THAT(e[blk * d_s],
                         Catch::Matchers::WithinRel(
                             oracle::sq_euclidean(a.data() + blk * d_s, blockb.data(), d_s), 1e-12));
        }
    }
}
