// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "pqhe/layout.hpp"
#include "pqhe/packing.hpp"

using namespace pqhe;

namespace {

struct LayoutRow {
    const char* name;
    std::size_t d, n_s, n_c;
    std::size_t d_prime, n_wop;
};

// The twelve reference parameter combinations (ring dimension 16384).
constexpr LayoutRow kRows[] = {
    {"sift", 128, 8, 256, 128, 4},   {"sift", 128, 64, 32, 128, 1},
    {"gist", 960, 80, 16, 960, 2},   {"gist", 960, 320, 8, 960, 1},
    {"glove-25d", 25, 12, 192, 36, 1},  {"glove-25d", 25, 25, 256, 25, 1},
    {"glove-50d", 50, 5, 128, 50, 1},   {"glove-50d", 50, 25, 128, 50, 1},
    {"glove-100d", 100, 10, 64, 100, 1}, {"glove-100d", 100, 50, 64, 100, 1},
    {"glove-200d", 200, 50, 32, 200, 1}, {"glove-200d", 200, 100, 32, 200, 1},
};

}  // namespace

TEST_CASE("subdivide follows the short-blocks-first zero-fill rule") {
    SECTION("d=4 over 3 subspaces") {
        auto L = layout_counts(16, 4, 3, 2);
        auto sd = subdivide(std::vector<double>{1, 2, 3, 4}, L);
        REQUIRE(sd.blocks.size() == 3);
        CHECK(sd.blocks[0] == std::vector<double>{1, 0});
        CHECK(sd.blocks[1] == std::vector<double>{2, 0});
        CHECK(sd.blocks[2] == std::vector<double>{3, 4});
    }
    SECTION("divisible case has no padding") {
        auto L = layout_counts(16384, 128, 8, 256);
        std::vector<double> x(128);
        for (std::size_t i = 0; i < 128; ++i)
            x[i] = double(i + 1);
        auto sd = subdivide(x, L);
        REQUIRE(sd.blocks.size() == 8);
        for (std::size_t s = 0; s < 8; ++s) {
            REQUIRE(sd.blocks[s].size() == 16);
            for (std::size_t t = 0; t < 16; ++t)
                CHECK(sd.blocks[s][t] == double(s * 16 + t + 1));
        }
    }
    SECTION("d=25 over 12 subspaces: eleven short blocks then one full") {
        auto L = layout_counts(16384, 25, 12, 192);
        CHECK(L.d_prime == 36);
        std::vector<double> x(25);
        for (std::size_t i = 0; i < 25; ++i)
            x[i] = double(i + 1);
        auto sd = subdivide(x, L);
        REQUIRE(sd.blocks.size() == 12);
        for (std::size_t s = 0; s < 11; ++s) {
            CHECK(sd.blocks[s][2] == 0.0);  // zero tail
            CHECK(sd.blocks[s][0] == double(2 * s + 1));
            CHECK(sd.blocks[s][1] == double(2 * s + 2));
        }
        CHECK(sd.blocks[11] == std::vector<double>{23, 24, 25});
        // concatenation restores the original plus exactly d'-d zeros
        std::size_t zeros = 0;
        for (const auto& b : sd.blocks)
            for (double v : b)
                if (v == 0.0)
                    ++zeros;
        CHECK(zeros == L.d_prime - L.d);
    }
    SECTION("dimension mismatch") {
        auto L = layout_counts(16, 4, 2, 2);
        CHECK_THROWS_AS(subdivide(std::vector<double>{1, 2, 3}, L), DimensionError);
    }
}

TEST_CASE("layout_counts reproduces all twelve reference rows") {
    for (const auto& row : kRows) {
        INFO(row.name << " n_s=" << row.n_s << " N_C=" << row.n_c);
        auto L = layout_counts(16384, row.d, row.n_s, row.n_c);
        CHECK(L.d_prime == row.d_prime);
        CHECK(L.n_wop == row.n_wop);
        CHECK(L.n_wrp == row.n_c * row.n_wop);
        CHECK(L.n_sdrp == row.n_c);
        // N_WOP stays within one of the pseudo-dimension approximation
        CHECK(L.n_wop <= ceil_div(2 * L.d_prime * L.n_c, L.ring_dimension) + 1);
    }
}

TEST_CASE("layout_counts worked examples") {
    auto sift = layout_counts(16384, 128, 8, 256, 1000);
    CHECK(sift.d_s == 16);
    CHECK(sift.n_pd == 512);
    CHECK(sift.n_wop == 4);
    CHECK(sift.n_sdop == 2);  // ceil(1000/512)

    auto sift2 = layout_counts(16384, 128, 64, 32);
    CHECK(sift2.d_s == 2);
    CHECK(sift2.n_wop == 1);

    auto gist = layout_counts(16384, 960, 80, 16);
    CHECK(gist.d_s == 12);
    CHECK(gist.n_pd == 682);
    CHECK(gist.n_wop == 2);
    CHECK(gist.n_wrp == 32);

    CHECK_THROWS_AS(layout_counts(16, 100, 1, 4), InvalidArgument);  // d_s > n_p
    CHECK_THROWS_AS(layout_counts(16384, 8, 16, 4), InvalidArgument);  // n_s > d
}

TEST_CASE("pack_sdop places blocks back to back") {
    SECTION("nine points fit one vector when n_pd = 9") {
        auto L = layout_counts(128, 7, 1, 6);  // d_s = 7, n_p = 64, n_pd = 9
        REQUIRE(L.n_pd == 9);
        std::vector<std::vector<double>> blocks(9, std::vector<double>(7, 1.0));
        auto cts = pack_sdop(blocks, L);
        CHECK(cts.size() == 1);
    }
    SECTION("split across ciphertexts") {
        auto L = layout_counts(16384, 128, 8, 256);
        REQUIRE(L.n_pd == 512);
        std::vector<std::vector<double>> blocks(1000, std::vector<double>(16, 0.5));
        auto cts = pack_sdop(blocks, L);
        CHECK(cts.size() == 2);
        // round trip on occupied blocks
        auto back = unpack_sdop(cts, L, 1000);
        CHECK(back == blocks);
        // last occupied block then zero tail
        CHECK(cts[1][(1000 - 512 - 1) * 16] == 0.5);
        CHECK(cts[1][(1000 - 512) * 16] == 0.0);
    }
    SECTION("zero points give an empty list") {
        auto L = layout_counts(64, 4, 2, 2);
        CHECK(pack_sdop({}, L).empty());
    }
}

TEST_CASE("pack_sdrp repeats one block up to the SDOP capacity") {
    SECTION("repeat [a,b] three times") {
        auto L = layout_counts(16, 2, 1, 2);  // n_p=8, d_s=2 -> n_pd=4
        REQUIRE(L.n_pd == 4);
        auto v = pack_sdrp({7, 9}, L);
        CHECK(v == SlotVector{7, 9, 7, 9, 7, 9, 7, 9});
    }
    SECTION("repeat count equals SDOP capacity") {
        auto L = layout_counts(128, 7, 1, 6);
        auto v = pack_sdrp(std::vector<double>(7, 3.0), L);
        std::size_t nonzero = 0;
        for (double x : v)
            if (x != 0.0)
                ++nonzero;
        CHECK(nonzero == L.n_pd * L.d_s);
    }
    SECTION("d_s equal to n_p gives a single copy") {
        auto L = layout_counts(16, 8, 1, 2);
        REQUIRE(L.n_pd == 1);
        std::vector<double> blk(8);
        for (std::size_t i = 0; i < 8; ++i)
            blk[i] = double(i);
        auto v = pack_sdrp(blk, L);
        CHECK(SlotVector(v.begin(), v.begin() + 8) == SlotVector(blk.begin(), blk.end()));
    }
}

TEST_CASE("pack_wop lays the whole codebook out subspace-major") {
    SECTION("3 subspaces x 6 codes fit 18 blocks of one vector") {
        auto L = layout_counts(128, 9, 3, 6);  // d_s = 3, n_p = 64, n_pd = 21
        REQUIRE(L.n_wop == 1);
        Codebook cb = Codebook::zeros(3, 6, 3, Metric::Euclidean);
        for (std::size_t s = 0; s < 3; ++s)
            for (std::size_t j = 0; j < 6; ++j)
                for (std::size_t t = 0; t < 3; ++t)
                    cb.code(s, j)[t] = double(100 * s + 10 * j + t);
        auto cts = pack_wop(cb, L);
        REQUIRE(cts.size() == 1);
        // block g holds code (g / 6, g % 6)
        for (std::size_t g = 0; g < 18; ++g)
            for (std::size_t t = 0; t < 3; ++t)
                CHECK(cts[0][g * 3 + t] == double(100 * (g / 6) + 10 * (g % 6) + t));
        CHECK(cts[0][18 * 3] == 0.0);
    }
    SECTION("SIFT-style codebook needs 4 vectors of 512 blocks") {
        auto L = layout_counts(16384, 128, 8, 256);
        auto cts = pack_wop(Codebook::zeros(8, 256, 16, Metric::Euclidean), L);
        CHECK(cts.size() == 4);
    }
    SECTION("N_C = 1 degenerates to one block per subspace") {
        auto L = layout_counts(64, 6, 3, 1);
        Codebook cb = Codebook::zeros(3, 1, 2, Metric::Euclidean);
        cb.code(1, 0)[0] = 5.0;
        auto cts = pack_wop(cb, L);
        REQUIRE(cts.size() == 1);
        CHECK(cts[0][2] == 5.0);  // block 1 = subspace 1
    }
}

TEST_CASE("WOP and WRP block ranges are aligned") {
    auto L = layout_counts(256, 10, 5, 7);  // d_s=2, n_pd=64, one vector
    Codebook cb = Codebook::zeros(5, 7, 2, Metric::Euclidean);
    Rng rng(99);
    for (auto& v : cb.centroids)
        v = rng.uniform(-4, 4);
    std::vector<double> x(10);
    for (auto& v : x)
        v = rng.uniform(-4, 4);
    auto sd = subdivide(x, L);
    auto wop = pack_wop(cb, L);
    auto wrp = pack_wrp(sd, L);
    REQUIRE(wop.size() == wrp.size());
    // for every block (s, j): wop slice is c_{j,s}, wrp slice is x_s
    for (std::size_t g = 0; g < L.n_s * L.n_c; ++g) {
        std::size_t ct = g / L.n_pd, off = (g % L.n_pd) * L.d_s;
        for (std::size_t t = 0; t < L.d_s; ++t) {
            CHECK(wop[ct][off + t] == cb.code(L.block_subspace(g), L.block_code(g))[t]);
            CHECK(wrp[ct][off + t] == sd.blocks[L.block_subspace(g)][t]);
        }
    }
}

TEST_CASE("pack_wrp splits exactly as WOP and the full set counts N_C * N_WOP") {
    auto L = layout_counts(16384, 128, 8, 256);
    std::vector<double> x(128, 1.5);
    auto wrp = pack_wrp(subdivide(x, L), L);
    CHECK(wrp.size() == 4);  // same split as N_WOP
    CHECK(L.n_wrp == 1024);  // one WRP set per code
}

TEST_CASE("extract_block_values reads strides of d_s") {
    auto L = layout_counts(16, 3, 1, 2);  // d_s = 3, n_p = 8, n_pd = 2
    SlotVector v{6, -1, -1, 15, -1, -1, 42, 0};
    CHECK(extract_block_values(v, L, 2) == std::vector<double>{6, 15});
    // occupied beyond capacity is clamped
    CHECK(extract_block_values(v, L, 5) == std::vector<double>{6, 15});
    CHECK(extract_block_values(v, L, 1) == std::vector<double>{6});
}
