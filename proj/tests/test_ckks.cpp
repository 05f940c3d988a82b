// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pqhe/ckks/ckks.hpp"
#include "pqhe/secdist.hpp"
#include "pqhe/simulator.hpp"

#include "support/oracles.hpp"

using namespace pqhe;
using namespace pqhe::ckks;

namespace {

ToyParams tiny_params(std::size_t depth = 1) {
    ToyParams p;
    p.ring_dimension = 256;
    p.mult_depth = depth;
    p.quiet = true;
    return p;
}

double max_abs_diff(const SlotVector& a, const SlotVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// relative with a unit floor so near-zero values are judged absolutely
double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("ntt prime search and negacyclic transform") {
    u64 p = find_ntt_prime(30, 512);
    CHECK(is_prime(p));
    CHECK((p - 1) % 512 == 0);

    Rng rng(3);
    u64 psi = find_primitive_root(p, 512, rng);
    CHECK(pow_mod(psi, 256, p) == p - 1);

    Ntt ntt(256, p, psi);
    std::vector<u64> a(256), b(256);
    for (auto& x : a)
        x = rng.bounded(p);
    auto orig = a;
    ntt.forward(a.data());
    ntt.inverse(a.data());
    CHECK(a == orig);

    // negacyclic product against schoolbook on a small case
    std::vector<u64> f(256, 0), g(256, 0);
    f[0] = 3;
    f[255] = 2;
    g[1] = 5;
    ntt.forward(f.data());
    ntt.forward(g.data());
    for (std::size_t i = 0; i < 256; ++i)
        f[i] = mul_mod(f[i], g[i], p);
    ntt.inverse(f.data());
    // (3 + 2 X^255) * 5X = 15 X + 10 X^256 = -10 + 15 X  (mod X^256 + 1)
    CHECK(f[0] == p - 10);
    CHECK(f[1] == 15);
}

TEST_CASE("embedding encode/decode round trip") {
    Embedding emb(256);
    Rng rng(11);

    SECTION("all zeros map to the zero polynomial") {
        std::vector<double> v(128, 0.0);
        auto c = emb.encode_real(v, 1 << 20);
        for (double x : c)
            CHECK(std::abs(x) < 1e-9);
        CHECK(max_abs_diff(emb.decode_real(c, 1 << 20), v) < 1e-12);
    }
    SECTION("basis vector") {
        std::vector<double> v(128, 0.0);
        v[0] = 1.0;
        auto c = emb.encode_real(v, 1 << 20);
        auto back = emb.decode_real(c, 1 << 20);
        CHECK(max_abs_diff(back, v) < 1e-10);
    }
    SECTION("random vectors with rounding stay within tolerance") {
        std::vector<double> v(128);
        for (auto& x : v)
            x = rng.uniform(-1000, 1000);
        auto c = emb.encode_real(v, double(1ULL << 30));
        for (auto& x : c)
            x = std::nearbyint(x);  // integer coefficients as the scheme stores them
        auto back = emb.decode_real(c, double(1ULL << 30));
        CHECK(max_abs_diff(back, v) < 1e-4);
    }
}

TEST_CASE("ckks encrypt/decrypt round trip stays within 1e-4 on [-1000,1000]") {
    auto ctx = make_toy_ckks(tiny_params());
    auto keys = ctx.keygen({});
    Rng rng(42);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        SlotVector v(ctx.slot_count());
        for (auto& x : v)
            x = rng.uniform(-1000, 1000);
        auto ct = ctx.encrypt(v, PackingTag::Raw, keys.pub);
        CHECK(ct.depth_remaining == 1);
        worst = std::max(worst, max_abs_diff(ctx.decrypt(ct, keys.sec), v));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("ckks keygen step sets") {
    auto ctx = make_toy_ckks(tiny_params());
    SECTION("three keys for steps {1,2,4}") {
        auto keys = ctx.keygen({1, 2, 4});
        (void)keys;
    }
    SECTION("steps for d_s=100 under the fast schedule") {
        CHECK(rotation_steps_for(100) == std::set<std::size_t>{1, 2, 4, 8, 16, 32, 64, 96});
        auto keys = ctx.keygen(rotation_steps_for(100));
        (void)keys;
    }
    SECTION("d_s=1 needs no keys and unlisted steps fail") {
        auto keys = ctx.keygen(rotation_steps_for(1));
        auto ct = ctx.encrypt(SlotVector(ctx.slot_count(), 1.0), PackingTag::Raw, keys.pub);
        auto eval = ctx.evaluator();
        CHECK_THROWS_AS(eval.rotate(ct, 3), KeyError);
        CHECK(ctx.decrypt(eval.rotate(ct, 0), keys.sec)[0] == Catch::Approx(1.0).margin(1e-4));
    }
}

TEST_CASE("ckks add/sub/mul/rotate against plaintext") {
    auto ctx = make_toy_ckks(tiny_params());
    auto keys = ctx.keygen({1, 2, 3, 5});
    auto eval = ctx.evaluator();
    Rng rng(7);
    std::size_t n = ctx.slot_count();

    SlotVector va(n), vb(n);
    for (auto& x : va)
        x = rng.uniform(-100, 100);
    for (auto& x : vb)
        x = rng.uniform(-100, 100);
    auto ca = ctx.encrypt(va, PackingTag::Raw, keys.pub);
    auto cb = ctx.encrypt(vb, PackingTag::Raw, keys.pub);

    SECTION("add error stays within twice the round-trip error") {
        double rt = 0.0;
        rt = std::max(rt, max_abs_diff(ctx.decrypt(ca, keys.sec), va));
        rt = std::max(rt, max_abs_diff(ctx.decrypt(cb, keys.sec), vb));
        SlotVector want(n);
        for (std::size_t i = 0; i < n; ++i)
            want[i] = va[i] + vb[i];
        double err = max_abs_diff(ctx.decrypt(eval.add(ca, cb), keys.sec), want);
        CHECK(err <= 2.0 * rt + 1e-12);
    }
    SECTION("mul decrypts to the slot-wise product") {
        auto prod = eval.mul(ca, cb);
        CHECK(prod.depth_remaining == 0);
        auto got = ctx.decrypt(prod, keys.sec);
        for (std::size_t i = 0; i < n; i += 17)
            CHECK(rel_err(got[i], va[i] * vb[i]) < 1e-3);
        CHECK_THROWS_AS(eval.mul(prod, prod), DepthBudgetError);
    }
    SECTION("mul_plain consumes a level") {
        auto prod = eval.mul_plain(ca, vb);
        CHECK(prod.depth_remaining == 0);
        auto got = ctx.decrypt(prod, keys.sec);
        for (std::size_t i = 0; i < n; i += 29)
            CHECK(rel_err(got[i], va[i] * vb[i]) < 1e-3);
    }
    SECTION("rotate matches a plaintext left shift") {
        auto got = ctx.decrypt(eval.rotate(ca, 5), keys.sec);
        for (std::size_t i = 0; i < n; i += 13)
            CHECK(rel_err(got[i], va[(i + 5) % n]) < 1e-3);
    }
    SECTION("rotate composition obeys the group law") {
        auto r12 = eval.rotate(eval.rotate(ca, 1), 2);
        auto r3 = eval.rotate(ca, 3);
        CHECK(max_abs_diff(ctx.decrypt(r12, keys.sec), ctx.decrypt(r3, keys.sec)) < 1e-3);
    }
}

TEST_CASE("depth-2 chain supports two chained multiplies") {
    auto ctx = make_toy_ckks(tiny_params(2));
    auto keys = ctx.keygen({});
    auto eval = ctx.evaluator();
    SlotVector v(ctx.slot_count(), 3.0);
    auto ct = ctx.encrypt(v, PackingTag::Raw, keys.pub);
    CHECK(ct.depth_remaining == 2);
    auto m1 = eval.mul(ct, ct);
    auto m2 = eval.mul(m1, m1);
    CHECK(m2.depth_remaining == 0);
    CHECK(rel_err(ctx.decrypt(m2, keys.sec)[0], 81.0) < 1e-3);
    CHECK_THROWS_AS(eval.mul(m2, m2), DepthBudgetError);
}

TEST_CASE("squared-distance kernel matches the simulator within 1e-3 relative") {
    const std::size_t d_s = 16;
    auto ckks_ctx = make_toy_ckks(tiny_params());
    auto ckks_keys = ckks_ctx.keygen(rotation_steps_for(d_s));

    auto sim_ctx = make_simulator({256, 1, 1024, "oracle"});
    auto sim_keys = sim_ctx.keygen();

    Rng rng(99);
    std::size_t n = ckks_ctx.slot_count();
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        SlotVector a(n), b(n);
        for (auto& x : a)
            x = rng.uniform(-1000, 1000);
        std::vector<double> blockb(d_s);
        for (auto& x : blockb)
            x = rng.uniform(-1000, 1000);
        for (std::size_t i = 0; i < n; ++i)
            b[i] = blockb[i % d_s];

        auto cd = he_sq_euclidean(ckks_ctx.evaluator(),
                                  ckks_ctx.encrypt(a, PackingTag::Sdop, ckks_keys.pub),
                                  ckks_ctx.encrypt(b, PackingTag::Sdrp, ckks_keys.pub), d_s);
        auto sd = he_sq_euclidean(sim_ctx.evaluator(),
                                  sim_ctx.encrypt(a, PackingTag::Sdop, sim_keys.pub),
                                  sim_ctx.encrypt(b, PackingTag::Sdrp, sim_keys.pub), d_s);
        auto got = ckks_ctx.decrypt(cd, ckks_keys.sec);
        auto want = sim_ctx.decrypt(sd, sim_keys.sec);
        for (std::size_t blk = 0; blk + 1 < n / d_s; ++blk)
            worst = std::max(worst, rel_err(got[blk * d_s], want[blk * d_s]));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("identical inputs give near-zero distances") {
    const std::size_t d_s = 8;
    auto ctx = make_toy_ckks(tiny_params());
    auto keys = ctx.keygen(rotation_steps_for(d_s));
    SlotVector v(ctx.slot_count());
    Rng rng(5);
    for (auto& x : v)
        x = rng.uniform(-1000, 1000);
    auto a = ctx.encrypt(v, PackingTag::Sdop, keys.pub);
    auto b = ctx.encrypt(v, PackingTag::Sdrp, keys.pub);
    auto d = ctx.decrypt(he_sq_euclidean(ctx.evaluator(), a, b, d_s), keys.sec);
    CHECK(std::abs(d[0]) < 1e-3);
}

TEST_CASE("noise grows monotonically with a multiply") {
    auto ctx = make_toy_ckks(tiny_params());
    auto keys = ctx.keygen({});
    auto eval = ctx.evaluator();
    Rng rng(21);
    SlotVector v(ctx.slot_count());
    for (auto& x : v)
        x = rng.uniform(0.5, 2.0);
    auto ct = ctx.encrypt(v, PackingTag::Raw, keys.pub);
    double fresh = max_abs_diff(ctx.decrypt(ct, keys.sec), v);
    SlotVector want(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        want[i] = v[i] * v[i];
    double multiplied = max_abs_diff(ctx.decrypt(eval.mul(ct, ct), keys.sec), want);
    CHECK(multiplied > fresh);
}

TEST_CASE("overflow is detected loudly instead of wrapping") {
    ToyParams p = tiny_params();
    auto ctx = make_toy_ckks(p);
    auto keys = ctx.keygen({});
    SlotVector v(ctx.slot_count(), 1e30);
    CHECK_THROWS_AS(ctx.encrypt(v, PackingTag::Raw, keys.pub), OverflowError);
}

TEST_CASE("ckks ciphertext serialization round-trips") {
    auto ctx = make_toy_ckks(tiny_params());
    auto keys = ctx.keygen({});
    auto eval = ctx.evaluator();
    SlotVector v(ctx.slot_count(), 2.5);
    auto ct = ctx.encrypt(v, PackingTag::Wrp, keys.pub);
    auto bytes = eval.serialize(ct);
    CHECK(bytes.size() == eval.size_bytes(ct));
    auto back = eval.deserialize(bytes.data(), bytes.size());
    CHECK(back.tag == PackingTag::Wrp);
    CHECK(max_abs_diff(ctx.decrypt(back, keys.sec), v) < 1e-4);
    CHECK_THROWS_AS(eval.deserialize(bytes.data(), bytes.size() - 8), SerializationError);
}

TEST_CASE("explicit modulus chains are validated") {
    ToyParams p = tiny_params();
    p.modulus_chain = {12289, 12289};  // 12289 = 1 mod 512, prime, but wrong count
    p.mult_depth = 1;
    CHECK_NOTHROW(p.validate());
    p.modulus_chain = {12288, 12289};
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    ToyParams bad = tiny_params();
    bad.mult_depth = 5;
    CHECK_THROWS_AS(make_toy_ckks(bad), InvalidArgument);
}
