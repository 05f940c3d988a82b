// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <mutex>

#include <json.hpp>

#include "pqhe/layout.hpp"
#include "pqhe/packing.hpp"
#include "pqhe/pipeline/pqkmeans.hpp"
#include "pqhe/protocol/ledger.hpp"
#include "pqhe/search.hpp"
#include "pqhe/secdist.hpp"

namespace pqhe {

// Everything the server accumulates across a session. It only ever sees
// ciphertexts, plaintext labels, strided distance values and PQ codes; the
// session holds an Evaluator, which exposes no decryption surface at all.
struct ServerState {
    bool configured = false;
    PQLayout layout;
    Metric metric = Metric::Euclidean;
    uint64_t seed = 0;
    std::size_t n_k = 100;
    std::size_t pq_iters = 100;
    std::size_t n_i = 0;
    std::size_t n_nb = 1;

    std::vector<std::vector<Ciphertext>> sdrp_codes;  // per subspace, after k-means
    std::vector<std::size_t> kmeans_iterations;       // executed rounds per subspace
    std::vector<Ciphertext> wop_cts;
    std::vector<Ciphertext> wrp_cts;

    EncodedDatabase encoded;
    InterCodeTables tables;
    IVFIndex index;
    bool index_built = false;

    std::mutex encode_mu;
};

// One server node can serve several connections (parallel encode batches);
// state and the traffic ledger are shared, the message stream per connection
// stays ordered.
class ServerNode {
public:
    explicit ServerNode(Evaluator eval) : eval_(std::move(eval)) {}

    ServerNode(const ServerNode&) = delete;
    ServerNode& operator=(const ServerNode&) = delete;

    // Serves one connection until Goodbye (or StageEnd when serving a
    // secondary encode connection).
    void serve(proto::Transport& raw) {
        proto::LedgerTransport t(raw, ledger_, eval_);
        while (true) {
            proto::Message m = t.receive();
            auto started = std::chrono::steady_clock::now();
            bool done = false;
            switch (m.step) {
                case proto::Step::Hello: handle_hello(m); break;
                case proto::Step::KMeansData: handle_kmeans(m, t); break;
                case proto::Step::WrpDelivery: handle_indexing(m, t); break;
                case proto::Step::EncodeCiphertexts: handle_encode(m, t); break;
                case proto::Step::QueryCiphertexts: handle_query(m, t); break;
                case proto::Step::StageEnd: break;
                case proto::Step::Goodbye: done = true; break;
                default:
                    throw ProtocolError(std::string("server: unexpected step ") +
                                        proto::to_string(m.step));
            }
            server_nanos_ += std::chrono::duration_cast<std::chrono::nanoseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
            if (done)
                break;
        }
    }

    const ServerState& state() const { return st_; }
    ServerState& state() { return st_; }
    const proto::TrafficLedger& ledger() const { return ledger_; }
    proto::TrafficLedger& ledger() { return ledger_; }
    const Evaluator& evaluator() const { return eval_; }
    double server_seconds() const { return double(server_nanos_.load()) * 1e-9; }

private:
    void handle_hello(const proto::Message& m) {
        auto j = nlohmann::json::parse(m.plain.begin(), m.plain.end());
        st_.layout = layout_counts(eval_.scheme().ring_dimension, j.at("d"), j.at("n_s"),
                                   j.at("n_c"), j.at("n_rs"));
        st_.metric = j.at("metric") == "inner_product" ? Metric::InnerProduct : Metric::Euclidean;
        st_.seed = j.at("seed");
        st_.n_k = j.at("n_k");
        st_.pq_iters = j.value("pq_iters", 100);
        st_.n_i = j.at("n_i");
        st_.n_nb = j.at("n_nb");
        st_.sdrp_codes.assign(st_.layout.n_s, {});
        st_.kmeans_iterations.assign(st_.layout.n_s, 0);
        st_.encoded.n_s = st_.layout.n_s;
        st_.encoded.n_c = st_.layout.n_c;
        st_.configured = true;
    }

    // One subspace of secure k-means: iterate distance rounds against the
    // client until the labels reach a fixpoint or the iteration cap; after
    // the final subspace, request the codebook conversion.
    void handle_kmeans(const proto::Message& m, proto::Transport& t) {
        require_configured();
        const PQLayout& L = st_.layout;
        proto::ByteReader r(m.plain.data(), m.plain.size());
        std::size_t subspace = r.u32();
        if (subspace >= L.n_s || m.cts.size() != L.n_sdop + L.n_sdrp)
            throw ProtocolError("server: malformed KMeansData");
        std::vector<Ciphertext> sdop(m.cts.begin(), m.cts.begin() + std::ptrdiff_t(L.n_sdop));
        std::vector<Ciphertext> sdrp(m.cts.begin() + std::ptrdiff_t(L.n_sdop), m.cts.end());

        std::vector<uint32_t> prev_labels(L.n_rs, 0);
        std::vector<uint32_t> labels(L.n_rs, 1);
        std::size_t executed = 0;
        for (std::size_t iter = 1; iter <= st_.n_k; ++iter) {
            if (labels == prev_labels)
                break;
            prev_labels = labels;
            proto::Message dist;
            dist.step = proto::Step::KMeansDistances;
            dist.session_id = m.session_id;
            dist.cts.reserve(L.n_sdop * L.n_sdrp);
            for (const auto& d : sdop)
                for (const auto& c : sdrp)
                    dist.cts.push_back(he_sq_euclidean(eval_, d, c, L.d_s));
            t.send(dist);
            ++executed;

            proto::Message upd = t.receive();
            if (upd.step != proto::Step::KMeansUpdate || upd.cts.size() != L.n_sdrp)
                throw ProtocolError("server: expected KMeansUpdate");
            sdrp = upd.cts;
            labels = proto::unpack_labels(upd.plain);
            if (labels.size() != L.n_rs)
                throw ProtocolError("server: bad label count");
        }
        st_.sdrp_codes[subspace] = std::move(sdrp);
        st_.kmeans_iterations[subspace] = executed;

        proto::Message done;
        done.step = proto::Step::KMeansSubspaceDone;
        done.session_id = m.session_id;
        proto::ByteWriter w;
        w.u32(uint32_t(executed));
        done.plain = w.take();
        t.send(done);

        bool all_done = true;
        for (const auto& v : st_.sdrp_codes)
            all_done = all_done && !v.empty();
        if (all_done)
            run_conversion(m.session_id, t);
    }

    void run_conversion(uint64_t session_id, proto::Transport& t) {
        proto::Message req;
        req.step = proto::Step::ConvertRequest;
        req.session_id = session_id;
        for (const auto& per_subspace : st_.sdrp_codes)
            for (const auto& ct : per_subspace)
                req.cts.push_back(ct);
        t.send(req);

        proto::Message rep = t.receive();
        if (rep.step != proto::Step::ConvertReply || rep.cts.size() != st_.layout.n_wop)
            throw ProtocolError("server: expected ConvertReply with N_WOP ciphertexts");
        st_.wop_cts = rep.cts;
    }

    // Indexing: receive the WRP codebook set, compute the N_C * N_WOP
    // inter-code distance ciphertexts, get the decrypted tables back, then
    // cluster the encoded database and build the inverted file.
    void handle_indexing(const proto::Message& m, proto::Transport& t) {
        require_configured();
        const PQLayout& L = st_.layout;
        if (st_.wop_cts.empty())
            throw ProtocolError("server: indexing before codebook conversion");
        if (m.cts.size() != L.n_wrp)
            throw ProtocolError("server: WrpDelivery must carry N_WRP ciphertexts");
        st_.wrp_cts = m.cts;

        proto::Message dist;
        dist.step = proto::Step::IndexDistances;
        dist.session_id = m.session_id;
        dist.cts.reserve(L.n_c * L.n_wop);
        for (std::size_t k = 0; k < L.n_c; ++k)
            for (std::size_t i = 0; i < L.n_wop; ++i)
                dist.cts.push_back(he_block_distance(eval_, st_.wop_cts[i],
                                                     st_.wrp_cts[k * L.n_wop + i], L.d_s,
                                                     st_.metric));
        t.send(dist);

        proto::Message rep = t.receive();
        if (rep.step != proto::Step::IndexTableReply)
            throw ProtocolError("server: expected IndexTableReply");
        unpack_inter_code_tables(rep.plain);

        std::vector<uint32_t> centers =
            pqkmeans(st_.encoded, st_.tables, st_.n_i, st_.pq_iters,
                     derive_seed(st_.seed, "pqkmeans-init"));
        st_.index = build_ivf(st_.encoded, centers, st_.tables, st_.n_nb);
        st_.index_built = true;

        proto::Message built;
        built.step = proto::Step::IndexBuilt;
        built.session_id = m.session_id;
        nlohmann::json j;
        j["n_centers"] = st_.index.center_count();
        std::size_t entries = 0;
        for (const auto& list : st_.index.posting_lists)
            entries += list.size();
        j["list_entries"] = entries;
        auto s = j.dump();
        built.plain.assign(s.begin(), s.end());
        t.send(built);
    }

    // One datum: kernels against the WOP codebook, table comes back
    // decrypted, the server assigns the per-subspace best code index.
    void handle_encode(const proto::Message& m, proto::Transport& t) {
        require_configured();
        const PQLayout& L = st_.layout;
        if (st_.wop_cts.empty())
            throw ProtocolError("server: encoding before codebook conversion");
        if (m.cts.size() != L.n_wop)
            throw ProtocolError("server: EncodeCiphertexts must carry N_WOP ciphertexts");
        proto::ByteReader r(m.plain.data(), m.plain.size());
        uint64_t position = r.u64();
        uint64_t id = r.u64();

        proto::Message dist;
        dist.step = proto::Step::EncodeDistances;
        dist.session_id = m.session_id;
        for (std::size_t i = 0; i < L.n_wop; ++i)
            dist.cts.push_back(he_block_distance(eval_, st_.wop_cts[i], m.cts[i], L.d_s,
                                                 st_.metric));
        t.send(dist);

        proto::Message rep = t.receive();
        if (rep.step != proto::Step::EncodeTableReply)
            throw ProtocolError("server: expected EncodeTableReply");
        proto::StridedTable table = proto::unpack_table(rep.plain);
        if (table.n_s != L.n_s || table.n_c != L.n_c)
            throw ProtocolError("server: distance table shape mismatch");

        std::vector<uint32_t> code(L.n_s);
        for (std::size_t s = 0; s < L.n_s; ++s) {
            double best = 0.0;
            uint32_t arg = 0;
            for (std::size_t j = 0; j < L.n_c; ++j) {
                double v = table.values[s * L.n_c + j];
                if (j == 0 || score_better(st_.metric, v, best)) {
                    best = v;
                    arg = uint32_t(j);
                }
            }
            code[s] = arg;
        }
        {
            std::lock_guard<std::mutex> lk(st_.encode_mu);
            if (st_.encoded.ids.size() <= position) {
                st_.encoded.ids.resize(position + 1, 0);
                st_.encoded.codes.resize((position + 1) * L.n_s, 0);
            }
            st_.encoded.ids[position] = id;
            std::copy(code.begin(), code.end(), st_.encoded.codes.begin() + position * L.n_s);
        }
    }

    void handle_query(const proto::Message& m, proto::Transport& t) {
        require_configured();
        const PQLayout& L = st_.layout;
        if (!st_.index_built)
            throw ProtocolError("server: search before index build");
        if (m.cts.size() != L.n_wop)
            throw ProtocolError("server: QueryCiphertexts must carry N_WOP ciphertexts");
        proto::ByteReader r(m.plain.data(), m.plain.size());
        uint64_t qid = r.u64();
        SearchParams params;
        params.l = r.u32();
        params.l_c = r.u32();
        (void)qid;

        proto::Message dist;
        dist.step = proto::Step::QueryDistances;
        dist.session_id = m.session_id;
        for (std::size_t i = 0; i < L.n_wop; ++i)
            dist.cts.push_back(he_block_distance(eval_, st_.wop_cts[i], m.cts[i], L.d_s,
                                                 st_.metric));
        t.send(dist);

        proto::Message rep = t.receive();
        if (rep.step != proto::Step::QueryTableReply)
            throw ProtocolError("server: expected QueryTableReply");
        proto::StridedTable raw = proto::unpack_table(rep.plain);
        SubDistanceTable table;
        table.n_s = raw.n_s;
        table.n_c = raw.n_c;
        table.metric = st_.metric;
        table.values = std::move(raw.values);

        SearchResult res = ivf_search(table, st_.index, st_.encoded, params);
        proto::Message out;
        out.step = proto::Step::SearchResults;
        out.session_id = m.session_id;
        proto::RankedResults rr;
        rr.ids = res.ids;
        rr.scores = res.scores;
        rr.truncated = res.truncated;
        out.plain = proto::pack_results(rr);
        t.send(out);
    }

    void unpack_inter_code_tables(const std::vector<uint8_t>& plain) {
        const PQLayout& L = st_.layout;
        proto::ByteReader r(plain.data(), plain.size());
        std::size_t n_s = r.u32();
        std::size_t n_c = r.u32();
        if (n_s != L.n_s || n_c != L.n_c)
            throw ProtocolError("server: inter-code table shape mismatch");
        st_.tables = InterCodeTables::zeros(n_s, n_c, st_.metric);
        for (auto& v : st_.tables.values)
            v = r.f64();
    }

    void require_configured() const {
        if (!st_.configured)
            throw ProtocolError("server: session not configured (Hello missing)");
    }

    Evaluator eval_;
    proto::TrafficLedger ledger_;
    ServerState st_;
    std::atomic<int64_t> server_nanos_{0};
};

}  // namespace pqhe
