// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "pqhe/bench/dataset.hpp"
#include "pqhe/bench/reference.hpp"
#include "pqhe/ckks/ckks.hpp"
#include "pqhe/pipeline/persist.hpp"
#include "pqhe/pipeline/session.hpp"
#include "pqhe/simulator.hpp"

namespace pqhe::bench {

// The twelve reference parameter combinations with their published layout
// columns; the table4 command recomputes and diffs every row.
struct ReferenceRow {
    const char* dataset;
    const char* profile;
    Metric metric;
    std::size_t d, n_s, n_c;
    long log2_np;  // rounded
    std::size_t d_prime, n_wop, n_rot;
};

inline const std::vector<ReferenceRow>& reference_rows() {
    static const std::vector<ReferenceRow> rows = {
        {"sift", "sift", Metric::Euclidean, 128, 8, 256, 64, 128, 4, 4},
        {"sift", "sift", Metric::Euclidean, 128, 64, 32, 320, 128, 1, 1},
        {"gist", "gist", Metric::Euclidean, 960, 80, 16, 320, 960, 2, 4},
        {"gist", "gist", Metric::Euclidean, 960, 320, 8, 960, 960, 1, 2},
        {"glove-25d", "glove", Metric::InnerProduct, 25, 12, 192, 91, 36, 1, 2},
        {"glove-25d", "glove", Metric::InnerProduct, 25, 25, 256, 200, 25, 1, 0},
        {"glove-50d", "glove", Metric::InnerProduct, 50, 5, 128, 35, 50, 1, 4},
        {"glove-50d", "glove", Metric::InnerProduct, 50, 25, 128, 175, 50, 1, 1},
        {"glove-100d", "glove", Metric::InnerProduct, 100, 10, 64, 60, 100, 1, 4},
        {"glove-100d", "glove", Metric::InnerProduct, 100, 50, 64, 300, 100, 1, 1},
        {"glove-200d", "glove", Metric::InnerProduct, 200, 50, 32, 250, 200, 1, 2},
        {"glove-200d", "glove", Metric::InnerProduct, 200, 100, 32, 500, 200, 1, 1},
    };
    return rows;
}

inline SchemeParams profile_by_name(const std::string& name) {
    if (name == "sift")
        return sift_profile();
    if (name == "gist")
        return gist_profile();
    if (name == "glove")
        return glove_profile();
    throw InvalidArgument("unknown profile: " + name);
}

struct Table4Row {
    ReferenceRow expected;
    long got_log2_np = 0;
    std::size_t got_d_prime = 0, got_n_wop = 0, got_n_rot = 0;
    bool match = false;
};

inline std::vector<Table4Row> table4_rows() {
    std::vector<Table4Row> out;
    for (const auto& row : reference_rows()) {
        Table4Row r;
        r.expected = row;
        PQLayout L = layout_counts(16384, row.d, row.n_s, row.n_c);
        r.got_log2_np = std::lround(double(row.n_s) * std::log2(double(row.n_c)));
        r.got_d_prime = L.d_prime;
        r.got_n_wop = L.n_wop;
        r.got_n_rot = rotation_count(L.d_s);
        r.match = r.got_log2_np == row.log2_np && r.got_d_prime == row.d_prime &&
                  r.got_n_wop == row.n_wop && r.got_n_rot == row.n_rot;
        out.push_back(r);
    }
    return out;
}

inline std::string table4_text(const std::vector<Table4Row>& rows, std::size_t* diffs_out) {
    std::ostringstream os;
    os << "dataset      n_s  N_C  log2(Np)  d'    N_WOP  n_rot  status\n";
    std::size_t diffs = 0;
    for (const auto& r : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-12s %-4zu %-4zu %-9ld %-5zu %-6zu %-6zu %s\n",
                      r.expected.dataset, r.expected.n_s, r.expected.n_c, r.got_log2_np,
                      r.got_d_prime, r.got_n_wop, r.got_n_rot, r.match ? "ok" : "DIFF");
        os << line;
        if (!r.match)
            ++diffs;
    }
    if (diffs_out)
        *diffs_out = diffs;
    return os.str();
}

struct BenchConfig {
    std::string backend = "sim";    // sim | ckks
    std::string profile = "glove";  // scheme byte model for the simulator
    Metric metric = Metric::Euclidean;
    uint64_t seed = 1;

    // dataset: either synthetic or fvecs paths
    std::optional<SynthSpec> synth;          // base synthesizer (train/query derived)
    std::string base_path, query_path, train_path, truth_path;
    std::size_t n_train = 0;   // synthetic train size (default: reuse base)
    std::size_t n_queries = 0; // synthetic query count

    std::size_t n_s = 8, n_c = 16, n_rs = 1000;
    std::size_t n_k = 25, pq_iters = 50, n_i = 64, n_nb = 3;
    SearchParams search;
    std::size_t encode_workers = 1;
    bool check_oracle = true;   // simulator only: assert reference equivalence
    ckks::ToyParams toy;        // used when backend == "ckks"
};

struct BenchResult {
    nlohmann::json report;
    bool oracle_match = true;
    double recall = 0.0;
    double mse_value = 0.0;
    std::vector<std::vector<uint64_t>> results;  // per query ranked ids

    // retained for inspection and persistence
    Codebook codebook;
    EncodedDatabase encoded;
    InterCodeTables tables;
    IVFIndex index;
};

struct LoadedData {
    std::vector<std::vector<float>> train, base, queries;
    std::vector<std::vector<uint64_t>> truth;
};

inline bool pipelines_match(const ref::Pipeline& P, const BenchResult& got,
                            const PQLayout& layout);

inline LoadedData load_data(const BenchConfig& cfg, std::size_t recall_k) {
    LoadedData data;
    if (cfg.synth) {
        SynthSpec base_spec = *cfg.synth;
        data.base = synth_dataset(base_spec);
        SynthSpec train_spec = base_spec;
        train_spec.seed = derive_seed(base_spec.seed, "synth-train");
        train_spec.n = cfg.n_train ? cfg.n_train : base_spec.n;
        data.train = synth_dataset(train_spec);
        SynthSpec query_spec = base_spec;
        query_spec.seed = derive_seed(base_spec.seed, "synth-query");
        query_spec.n = cfg.n_queries ? cfg.n_queries : 100;
        data.queries = synth_dataset(query_spec);
    } else {
        data.base = load_fvecs(cfg.base_path);
        data.queries = load_fvecs(cfg.query_path);
        data.train = cfg.train_path.empty() ? data.base : load_fvecs(cfg.train_path);
    }
    if (!cfg.truth_path.empty()) {
        for (const auto& row : load_ivecs(cfg.truth_path)) {
            data.truth.emplace_back();
            for (int32_t v : row)
                data.truth.back().push_back(uint64_t(v));
        }
    } else {
        data.truth = ground_truth(data.base, data.queries, recall_k, cfg.metric);
    }
    return data;
}

inline HeContext make_backend(const BenchConfig& cfg) {
    if (cfg.backend == "sim")
        return make_simulator(profile_by_name(cfg.profile));
    if (cfg.backend == "ckks")
        return make_toy_ckks(cfg.toy);
    throw InvalidArgument("unknown backend: " + cfg.backend);
}

// Runs codebook generation, encoding, indexing and search end to end over a
// loopback session and assembles the report. On the simulator backend the
// plaintext reference pipeline runs alongside and every stage is compared.
inline BenchResult run_benchmark(const BenchConfig& cfg) {
    using Clock = std::chrono::steady_clock;
    BenchResult out;
    LoadedData data = load_data(cfg, cfg.search.l);

    HeContext ctx = make_backend(cfg);
    ClientConfig ccfg;
    ccfg.d = data.base.at(0).size();
    ccfg.n_s = cfg.n_s;
    ccfg.n_c = cfg.n_c;
    ccfg.n_rs = cfg.n_rs;
    ccfg.metric = cfg.metric;
    ccfg.seed = cfg.seed;
    ccfg.n_k = cfg.n_k;
    ccfg.pq_iters = cfg.pq_iters;
    ccfg.n_i = cfg.n_i;
    ccfg.n_nb = cfg.n_nb;
    ClientSession client(ctx, ccfg);
    ServerNode server(ctx.evaluator());

    nlohmann::json stages;
    CounterSnapshot before = ctx.counters();
    auto stage_counters = [&](const char* name) {
        CounterSnapshot now = ctx.counters();
        nlohmann::json j;
        j["n_add"] = now.n_add - before.n_add;
        j["n_mul"] = now.n_mul - before.n_mul;
        j["n_rotate"] = now.n_rotate - before.n_rotate;
        j["n_encrypt"] = now.n_encrypt - before.n_encrypt;
        j["n_decrypt"] = now.n_decrypt - before.n_decrypt;
        stages[name]["op_counters"] = j;
        before = now;
    };

    auto t0 = Clock::now();
    run_loopback_session(server, [&](proto::Transport& t) {
        client.hello(t);
        client.run_codebook_generation(t, data.train);
        client.finish(t);
    });
    stage_counters("codebook_generation");
    auto t1 = Clock::now();
    parallel_encode(server, client, data.base, {}, cfg.encode_workers);
    stage_counters("database_encoding");
    auto t2 = Clock::now();
    run_loopback_session(server, [&](proto::Transport& t) {
        client.build_index(t);
        client.finish(t);
    });
    stage_counters("database_indexing");
    auto t3 = Clock::now();

    out.results.resize(data.queries.size());
    run_loopback_session(server, [&](proto::Transport& t) {
        for (std::size_t q = 0; q < data.queries.size(); ++q) {
            auto res = client.search(t, data.queries[q], cfg.search.l, cfg.search.l_c, q);
            out.results[q] = res.ids;
        }
        client.finish(t);
    });
    stage_counters("search");
    auto t4 = Clock::now();

    out.codebook = client.codebook();
    out.encoded = server.state().encoded;
    out.tables = server.state().tables;
    out.index = server.state().index;
    out.recall = recall_at_k(out.results, data.truth, cfg.search.l);

    PQLayout layout = client.layout();
    out.mse_value = mse(out.encoded, out.codebook, data.base, layout);

    // oracle equivalence on the exact-arithmetic backend
    if (cfg.backend == "sim" && cfg.check_oracle) {
        ref::Config rc;
        rc.d = ccfg.d;
        rc.n_s = cfg.n_s;
        rc.n_c = cfg.n_c;
        rc.n_rs = cfg.n_rs;
        rc.n_k = cfg.n_k;
        rc.pq_iters = cfg.pq_iters;
        rc.n_i = cfg.n_i;
        rc.n_nb = cfg.n_nb;
        rc.inner_product = cfg.metric == Metric::InnerProduct;
        rc.seed = cfg.seed;
        ref::Pipeline P = ref::run(rc, data.train, data.base);
        out.oracle_match = pipelines_match(P, out, layout);
        if (out.oracle_match) {
            std::vector<std::vector<uint64_t>> ref_results(data.queries.size());
            for (std::size_t q = 0; q < data.queries.size(); ++q)
                ref_results[q] = ref::search(P, ref::query_table(P, data.queries[q]), {},
                                             cfg.search.l, cfg.search.l_c);
            out.oracle_match = ref_results == out.results;
        }
        if (!out.oracle_match)
            stages["oracle"]["match"] = false;
    }

    const auto& ledger = server.ledger();
    uint64_t b_c = ctx.scheme().ciphertext_bytes;
    nlohmann::json traffic;
    auto put_step = [&](const char* name, proto::Step step) {
        auto sent = ledger.get(step, proto::Dir::Sent);
        auto recv = ledger.get(step, proto::Dir::Received);
        traffic[name] = {{"sent_cts", sent.ciphertexts},
                         {"sent_ct_bytes", sent.ciphertext_bytes},
                         {"recv_cts", recv.ciphertexts},
                         {"recv_ct_bytes", recv.ciphertext_bytes},
                         {"plaintext_bytes", sent.plaintext_bytes + recv.plaintext_bytes}};
    };
    put_step("kmeans_data", proto::Step::KMeansData);
    put_step("kmeans_distances", proto::Step::KMeansDistances);
    put_step("kmeans_update", proto::Step::KMeansUpdate);
    put_step("convert_request", proto::Step::ConvertRequest);
    put_step("convert_reply", proto::Step::ConvertReply);
    put_step("wrp_delivery", proto::Step::WrpDelivery);
    put_step("encode_ciphertexts", proto::Step::EncodeCiphertexts);
    put_step("encode_distances", proto::Step::EncodeDistances);
    put_step("index_distances", proto::Step::IndexDistances);
    put_step("query_ciphertexts", proto::Step::QueryCiphertexts);
    put_step("query_distances", proto::Step::QueryDistances);

    proto::TrafficReport tr = proto::assert_traffic(ledger, layout, b_c, cfg.n_k,
                                                    data.base.size(), data.queries.size());

    nlohmann::json& rep = out.report;
    rep["seed"] = cfg.seed;
    rep["backend"] = cfg.backend;
    rep["profile"] = cfg.profile;
    rep["metric"] = to_string(cfg.metric);
    rep["layout"] = {{"d", layout.d},       {"n_s", layout.n_s},   {"n_c", layout.n_c},
                     {"d_s", layout.d_s},   {"d_prime", layout.d_prime},
                     {"n_pd", layout.n_pd}, {"n_wop", layout.n_wop},
                     {"n_wrp", layout.n_wrp}, {"n_sdop", layout.n_sdop},
                     {"n_rot", rotation_count(layout.d_s)}};
    rep["dataset"] = {{"n_base", data.base.size()},
                      {"n_train", data.train.size()},
                      {"n_queries", data.queries.size()}};
    rep["recall_at_l"] = out.recall;
    rep["recall_convention"] = "fraction in [0,1]";
    rep["mse"] = out.mse_value;
    rep["mse_convention"] = kMseConvention;
    rep["stages"] = stages;
    rep["traffic"] = traffic;
    rep["traffic_checks"] = nlohmann::json::array();
    for (const auto& c : tr.checks)
        rep["traffic_checks"].push_back({{"name", c.name},
                                         {"expected", c.expected},
                                         {"measured", c.measured},
                                         {"upper_bound", c.upper_bound},
                                         {"pass", c.pass}});
    rep["traffic_all_pass"] = tr.all_pass;
    rep["per_query_ciphertext_bytes"] = proto::model_search_per_query(layout, b_c);
    rep["oracle_match"] = out.oracle_match;
    rep["timing_seconds"] = {
        {"codebook_generation", std::chrono::duration<double>(t1 - t0).count()},
        {"database_encoding", std::chrono::duration<double>(t2 - t1).count()},
        {"database_indexing", std::chrono::duration<double>(t3 - t2).count()},
        {"search", std::chrono::duration<double>(t4 - t3).count()},
        {"server_total", server.server_seconds()},
        {"client_total", client.client_seconds()}};
    double search_secs = std::chrono::duration<double>(t4 - t3).count();
    rep["qps_informational"] =
        search_secs > 0 ? double(data.queries.size()) / search_secs : 0.0;
    return out;
}

struct AblationRow {
    std::size_t n_s = 0;
    std::size_t d_s = 0;
    std::size_t n_rot = 0;
    double recall = 0.0;
    double mse_value = 0.0;
};

// Sub-dimension sweep on 200-d synthetic data with 32 codes per subspace:
// the rotation count shrinks and recall grows as n_s increases. Exhaustive
// list probing keeps the recall column a function of codebook quality only.
inline std::vector<AblationRow> run_ablation(uint64_t seed,
                                             const std::vector<std::size_t>& subspace_counts = {
                                                 2, 5, 10, 20, 25, 50, 100}) {
    std::vector<AblationRow> rows;
    for (std::size_t n_s : subspace_counts) {
        BenchConfig cfg;
        cfg.backend = "sim";
        cfg.profile = "glove";
        cfg.metric = Metric::Euclidean;
        cfg.seed = seed;
        SynthSpec spec;
        spec.seed = seed;
        spec.n = 2000;
        spec.d = 200;
        spec.clusters = 64;
        spec.center_spread = 100.0;
        spec.noise = 12.0;
        cfg.synth = spec;
        cfg.n_train = 1200;
        cfg.n_queries = 50;
        cfg.n_s = n_s;
        cfg.n_c = 32;
        cfg.n_rs = 256;
        cfg.n_k = 10;
        cfg.pq_iters = 15;
        cfg.n_i = 32;
        cfg.n_nb = 3;
        cfg.search.l = 10;
        cfg.search.l_c = 32;  // exhaustive
        cfg.check_oracle = false;

        BenchResult res = run_benchmark(cfg);
        AblationRow row;
        row.n_s = n_s;
        row.d_s = ceil_div(200, n_s);
        row.n_rot = rotation_count(row.d_s);
        row.recall = res.recall;
        row.mse_value = res.mse_value;
        rows.push_back(row);
    }
    return rows;
}

// Stage-by-stage equality between the protocol run and the reference.
inline bool pipelines_match(const ref::Pipeline& P, const BenchResult& got,
                            const PQLayout& layout) {
    // codebook
    for (std::size_t s = 0; s < layout.n_s; ++s)
        for (std::size_t j = 0; j < layout.n_c; ++j)
            for (std::size_t t = 0; t < layout.d_s; ++t)
                if (P.codebook[s][j][t] != got.codebook.code(s, j)[t])
                    return false;
    // codes
    if (P.codes.size() != got.encoded.size())
        return false;
    for (std::size_t i = 0; i < P.codes.size(); ++i)
        for (std::size_t s = 0; s < layout.n_s; ++s)
            if (P.codes[i][s] != got.encoded.row(i)[s])
                return false;
    // centers and posting lists
    if (P.centers.size() != got.index.center_count())
        return false;
    for (std::size_t c = 0; c < P.centers.size(); ++c)
        for (std::size_t s = 0; s < layout.n_s; ++s)
            if (P.centers[c][s] != got.index.center(c)[s])
                return false;
    if (P.posting_lists != got.index.posting_lists)
        return false;
    return true;
}

}  // namespace pqhe::bench
