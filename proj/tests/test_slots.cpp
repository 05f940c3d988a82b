// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "pqhe/common.hpp"
#include "pqhe/params.hpp"
#include "pqhe/simulator.hpp"

#include "support/oracles.hpp"

using namespace pqhe;

namespace {

SlotVector padded(std::vector<double> v, std::size_t n) {
    v.resize(n, 0.0);
    return v;
}

}  // namespace

TEST_CASE("slot count is half the ring dimension for every profile") {
    CHECK(sift_profile().slot_count() == 8192);
    CHECK(gist_profile().slot_count() == 8192);
    CHECK(glove_profile().slot_count() == 8192);
    CHECK(make_simulator({16, 1, 1024, "toy"}).slot_count() == 8);
}

TEST_CASE("simulator encrypt/decrypt round trip is exact") {
    auto ctx = make_simulator({16, 1, 1024, "toy"});
    auto keys = ctx.keygen();

    SECTION("all zeros") {
        SlotVector v(8, 0.0);
        auto ct = ctx.encrypt(v, PackingTag::Raw, keys.pub);
        CHECK(ctx.decrypt(ct, keys.sec) == v);
    }
    SECTION("1..8") {
        SlotVector v{1, 2, 3, 4, 5, 6, 7, 8};
        auto ct = ctx.encrypt(v, PackingTag::Raw, keys.pub);
        CHECK(ctx.decrypt(ct, keys.sec) == v);
        CHECK(ct.depth_remaining == 1);
        CHECK(ct.slot_count == 8);
    }
    SECTION("wrong vector length") {
        CHECK_THROWS_AS(ctx.encrypt(SlotVector(7, 0.0), PackingTag::Raw, keys.pub),
                        DimensionError);
    }
    SECTION("unknown key") {
        auto other = make_simulator({16, 1, 1024, "toy"});
        auto foreign = other.keygen();
        CHECK_THROWS_AS(ctx.encrypt(SlotVector(8, 0.0), PackingTag::Raw, foreign.pub), KeyError);
        auto ct = ctx.encrypt(SlotVector(8, 1.0), PackingTag::Raw, keys.pub);
        CHECK_THROWS_AS(ctx.decrypt(ct, foreign.sec), KeyError);
    }
}

TEST_CASE("add and sub are slot-wise and keep depth at the minimum") {
    auto ctx = make_simulator({16, 2, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();

    auto a = ctx.encrypt(padded({1, 2}, 8), PackingTag::Raw, keys.pub);
    auto b = ctx.encrypt(padded({3, 4}, 8), PackingTag::Raw, keys.pub);
    auto zero = ctx.encrypt(SlotVector(8, 0.0), PackingTag::Raw, keys.pub);

    CHECK(ctx.decrypt(eval.add(a, zero), keys.sec) == padded({1, 2}, 8));
    CHECK(ctx.decrypt(eval.add(a, b), keys.sec) == padded({4, 6}, 8));
    CHECK(ctx.decrypt(eval.sub(b, a), keys.sec) == padded({2, 2}, 8));

    auto low = eval.mul(a, b);  // depth 1 now
    CHECK(eval.add(low, b).depth_remaining == 1);

    auto other = make_simulator({16, 2, 1024, "toy"});
    auto okeys = other.keygen();
    auto foreign = other.encrypt(SlotVector(8, 0.0), PackingTag::Raw, okeys.pub);
    CHECK_THROWS_AS(eval.add(a, foreign), BackendMismatchError);
}

TEST_CASE("mul consumes exactly one depth level and errors when exhausted") {
    auto ctx = make_simulator({16, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();

    auto a = ctx.encrypt(padded({2, 3}, 8), PackingTag::Raw, keys.pub);
    auto b = ctx.encrypt(padded({4, 5}, 8), PackingTag::Raw, keys.pub);
    auto p = eval.mul(a, b);
    CHECK(ctx.decrypt(p, keys.sec) == padded({8, 15}, 8));
    CHECK(p.depth_remaining == 0);
    CHECK_THROWS_AS(eval.mul(p, p), DepthBudgetError);
    CHECK_THROWS_AS(eval.mul_plain(p, SlotVector(8, 1.0)), DepthBudgetError);
}

TEST_CASE("depth-2 profile allows exactly two chained multiplies") {
    SchemeParams params = sift_profile();
    params.ring_dimension = 16;  // desk-size, same depth contract
    auto ctx = make_simulator(params);
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    auto a = ctx.encrypt(SlotVector(8, 2.0), PackingTag::Raw, keys.pub);
    auto m1 = eval.mul(a, a);
    auto m2 = eval.mul(m1, m1);
    CHECK(ctx.decrypt(m2, keys.sec)[0] == 16.0);
    CHECK_THROWS_AS(eval.mul(m2, m2), DepthBudgetError);
}

TEST_CASE("rotation is a left cyclic shift") {
    auto ctx = make_simulator({8, 1, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    auto x = ctx.encrypt({1, 2, 3, 4}, PackingTag::Raw, keys.pub);

    CHECK(ctx.decrypt(eval.rotate(x, 1), keys.sec) == SlotVector{2, 3, 4, 1});
    CHECK(ctx.decrypt(eval.rotate(x, 0), keys.sec) == SlotVector{1, 2, 3, 4});
    CHECK(eval.rotate(x, 3).depth_remaining == x.depth_remaining);
    CHECK_THROWS_AS(eval.rotate(x, 4), InvalidArgument);
}

TEST_CASE("size_bytes reports the configured byte model") {
    auto gist = make_simulator(gist_profile());
    auto gk = gist.keygen();
    auto gct = gist.encrypt(SlotVector(8192, 0.0), PackingTag::Raw, gk.pub);
    CHECK(gist.evaluator().size_bytes(gct) == 512 * kKiB);

    auto sift = make_simulator(sift_profile());
    auto sk = sift.keygen();
    auto sct = sift.encrypt(SlotVector(8192, 0.0), PackingTag::Raw, sk.pub);
    CHECK(sift.evaluator().size_bytes(sct) == 768 * kKiB);
}

TEST_CASE("random op sequences decrypt to the same sequence applied to plaintext") {
    auto ctx = make_simulator({64, 2, 1024, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    const std::size_t n = 32;

    Rng rng(20260810);
    for (int rep = 0; rep < 25; ++rep) {
        SlotVector va(n), vb(n);
        for (auto& x : va)
            x = rng.uniform(-50, 50);
        for (auto& x : vb)
            x = rng.uniform(-50, 50);
        auto ca = ctx.encrypt(va, PackingTag::Raw, keys.pub);
        auto cb = ctx.encrypt(vb, PackingTag::Raw, keys.pub);
        for (int op = 0; op < 12; ++op) {
            switch (rng.bounded(4)) {
                case 0: {
                    ca = eval.add(ca, cb);
                    for (std::size_t i = 0; i < n; ++i)
                        va[i] += vb[i];
                    break;
                }
                case 1: {
                    ca = eval.sub(ca, cb);
                    for (std::size_t i = 0; i < n; ++i)
                        va[i] -= vb[i];
                    break;
                }
                case 2: {
                    if (ca.depth_remaining >= 1 && cb.depth_remaining >= 1) {
                        ca = eval.mul(ca, cb);
                        for (std::size_t i = 0; i < n; ++i)
                            va[i] *= vb[i];
                    }
                    break;
                }
                default: {
                    std::size_t k = rng.bounded(n);
                    ca = eval.rotate(ca, k);
                    SlotVector rot(n);
                    for (std::size_t i = 0; i < n; ++i)
                        rot[i] = va[(i + k) % n];
                    va = rot;
                    break;
                }
            }
        }
        REQUIRE(ctx.decrypt(ca, keys.sec) == va);  // bit-exact
    }
}

TEST_CASE("op counters are exact and replaying the log reproduces them") {
    auto ctx = make_simulator({16, 2, 2048, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    ctx.reset_counters();
    ctx.enable_op_log(true);

    auto a = ctx.encrypt(SlotVector(8, 1.0), PackingTag::Raw, keys.pub);
    auto b = ctx.encrypt(SlotVector(8, 2.0), PackingTag::Raw, keys.pub);
    auto c = eval.add(a, b);
    c = eval.sub(c, a);
    c = eval.mul(c, b);
    c = eval.rotate(c, 2);
    c = eval.rotate(c, 0);
    (void)ctx.decrypt(c, keys.sec);

    auto snap = ctx.counters();
    CHECK(snap.n_encrypt == 2);
    CHECK(snap.n_add == 2);
    CHECK(snap.n_mul == 1);
    CHECK(snap.n_rotate == 2);
    CHECK(snap.n_decrypt == 1);
    CHECK(snap.bytes_produced == 7 * 2048);

    CHECK(replay_counters(ctx.op_log()) == snap);
    ctx.enable_op_log(false);
}

TEST_CASE("ciphertext serialization round-trips through the frame payload") {
    auto ctx = make_simulator({32, 2, 4096, "toy"});
    auto keys = ctx.keygen();
    auto eval = ctx.evaluator();
    Rng rng(7);
    SlotVector v(16);
    for (auto& x : v)
        x = rng.uniform(-1e6, 1e6);
    auto ct = ctx.encrypt(v, PackingTag::Wop, keys.pub);
    auto bytes = eval.serialize(ct);
    CHECK(bytes.size() == 2 + 16 * sizeof(double));
    auto back = eval.deserialize(bytes.data(), bytes.size());
    CHECK(back.tag == PackingTag::Wop);
    CHECK(back.depth_remaining == ct.depth_remaining);
    CHECK(ctx.decrypt(back, keys.sec) == v);

    CHECK_THROWS_AS(eval.deserialize(bytes.data(), bytes.size() - 1), SerializationError);
}

TEST_CASE("scheme params are validated") {
    CHECK_THROWS_AS(make_simulator({15, 1, 1024, ""}), InvalidArgument);
    CHECK_THROWS_AS(make_simulator({16, 3, 1024, ""}), InvalidArgument);
    CHECK_THROWS_AS(make_simulator({16, 1, 0, ""}), InvalidArgument);
}
