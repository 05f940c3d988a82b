// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>

#include <json.hpp>

#include "pqhe/layout.hpp"
#include "pqhe/packing.hpp"
#include "pqhe/protocol/message.hpp"
#include "pqhe/protocol/transport.hpp"
#include "pqhe/secdist.hpp"

namespace pqhe {

struct ClientConfig {
    std::size_t d = 0;
    std::size_t n_s = 0;
    std::size_t n_c = 0;
    std::size_t n_rs = 0;     // samples per subspace for codebook training
    Metric metric = Metric::Euclidean;
    uint64_t seed = 1;
    std::size_t n_k = 100;    // k-means iteration cap
    std::size_t pq_iters = 100;
    std::size_t n_i = 0;      // IVF centers
    std::size_t n_nb = 3;     // registrations per datum
};

// The data owner. Holds the only decryption capability in the protocol,
// trains the codebook through the distance round trips, and answers the
// server's decrypt-and-repack requests. Plaintext features never leave this
// class; the server sees labels, strided distance values and codes only.
class ClientSession {
public:
    ClientSession(HeContext ctx, ClientConfig cfg) : ctx_(std::move(ctx)), cfg_(cfg) {
        layout_ = layout_counts(ctx_.scheme().ring_dimension, cfg.d, cfg.n_s, cfg.n_c, cfg.n_rs);
        keys_ = ctx_.keygen(rotation_steps_for(layout_.d_s));
        session_id_ = derive_seed(cfg.seed, "session");
    }

    const PQLayout& layout() const { return layout_; }
    const Codebook& codebook() const { return trained_; }
    const Codebook& converted_codebook() const { return converted_; }
    double client_seconds() const { return double(client_nanos_.load()) * 1e-9; }

    void hello(proto::Transport& t) {
        nlohmann::json j;
        j["d"] = cfg_.d;
        j["n_s"] = cfg_.n_s;
        j["n_c"] = cfg_.n_c;
        j["n_rs"] = cfg_.n_rs;
        j["metric"] = to_string(cfg_.metric);
        j["seed"] = cfg_.seed;
        j["n_k"] = cfg_.n_k;
        j["pq_iters"] = cfg_.pq_iters;
        j["n_i"] = cfg_.n_i;
        j["n_nb"] = cfg_.n_nb;
        proto::Message m;
        m.step = proto::Step::Hello;
        m.session_id = session_id_;
        auto s = j.dump();
        m.plain.assign(s.begin(), s.end());
        t.send(m);
    }

    // Runs secure k-means for every subspace and answers the conversion
    // request. `train` supplies the client's training vectors; N_RS rows are
    // sampled once and shared across subspaces, initial codes per subspace.
    void run_codebook_generation(proto::Transport& t,
                                 const std::vector<std::vector<float>>& train) {
        Timer timer(client_nanos_);
        if (train.size() < cfg_.n_rs)
            throw InvalidArgument("client: training set smaller than N_RS");
        if (cfg_.n_rs < cfg_.n_c)
            throw InvalidArgument("client: N_RS must be at least N_C");

        Rng sample_rng(derive_seed(cfg_.seed, "train-sample"));
        std::vector<std::size_t> rows = sample_indices(train.size(), cfg_.n_rs, sample_rng);
        // per-subspace blocks of the sampled rows
        std::vector<std::vector<std::vector<double>>> samples(layout_.n_s);
        for (std::size_t s = 0; s < layout_.n_s; ++s)
            samples[s].reserve(cfg_.n_rs);
        for (std::size_t r : rows) {
            SubdividedVector sd = subdivide(train[r], layout_);
            for (std::size_t s = 0; s < layout_.n_s; ++s)
                samples[s].push_back(std::move(sd.blocks[s]));
        }

        trained_ = Codebook::zeros(layout_.n_s, layout_.n_c, layout_.d_s, cfg_.metric);
        for (std::size_t s = 0; s < layout_.n_s; ++s)
            train_subspace(t, s, samples[s]);

        // conversion: decrypt the returned SDRP codebooks, repack as WOP
        proto::Message req = receive_expect(t, proto::Step::ConvertRequest);
        if (req.cts.size() != layout_.n_s * layout_.n_c)
            throw ProtocolError("client: ConvertRequest must carry n_s * N_C ciphertexts");
        converted_ = Codebook::zeros(layout_.n_s, layout_.n_c, layout_.d_s, cfg_.metric);
        for (std::size_t s = 0; s < layout_.n_s; ++s) {
            for (std::size_t j = 0; j < layout_.n_c; ++j) {
                SlotVector v = ctx_.decrypt(req.cts[s * layout_.n_c + j], keys_.sec);
                for (std::size_t tt = 0; tt < layout_.d_s; ++tt)
                    converted_.code(s, j)[tt] = v[tt];  // first repeat of the RP block
            }
        }
        proto::Message rep;
        rep.step = proto::Step::ConvertReply;
        rep.session_id = session_id_;
        for (auto& slots : pack_wop(converted_, layout_))
            rep.cts.push_back(ctx_.encrypt(slots, PackingTag::Wop, keys_.pub));
        t.send(rep);
    }

    // Sends the WRP codebook set, decrypts the inter-code distance
    // ciphertexts and returns the assembled tables; the server clusters.
    void build_index(proto::Transport& t) {
        Timer timer(client_nanos_);
        proto::Message wrp;
        wrp.step = proto::Step::WrpDelivery;
        wrp.session_id = session_id_;
        for (std::size_t k = 0; k < layout_.n_c; ++k) {
            SubdividedVector pseudo;
            pseudo.d_s = layout_.d_s;
            pseudo.blocks.resize(layout_.n_s);
            for (std::size_t s = 0; s < layout_.n_s; ++s)
                pseudo.blocks[s].assign(converted_.code(s, k),
                                        converted_.code(s, k) + layout_.d_s);
            for (auto& slots : pack_wrp(pseudo, layout_))
                wrp.cts.push_back(ctx_.encrypt(slots, PackingTag::Wrp, keys_.pub));
        }
        t.send(wrp);

        proto::Message dist = receive_expect(t, proto::Step::IndexDistances);
        if (dist.cts.size() != layout_.n_c * layout_.n_wop)
            throw ProtocolError("client: expected N_C * N_WOP index distance ciphertexts");
        // tables[s][k][j] = score(c_{k,s}, c_{j,s}) from ciphertext (k, i)
        std::vector<double> tables(layout_.n_s * layout_.n_c * layout_.n_c, 0.0);
        for (std::size_t k = 0; k < layout_.n_c; ++k) {
            for (std::size_t i = 0; i < layout_.n_wop; ++i) {
                SlotVector v = ctx_.decrypt(dist.cts[k * layout_.n_wop + i], keys_.sec);
                std::size_t occupied = layout_.wop_blocks_in(i);
                for (std::size_t b = 0; b < occupied; ++b) {
                    std::size_t g = i * layout_.n_pd + b;
                    std::size_t s = layout_.block_subspace(g);
                    std::size_t j = layout_.block_code(g);
                    tables[(s * layout_.n_c + k) * layout_.n_c + j] = v[b * layout_.d_s];
                }
            }
        }
        proto::Message rep;
        rep.step = proto::Step::IndexTableReply;
        rep.session_id = session_id_;
        proto::ByteWriter w;
        w.u32(uint32_t(layout_.n_s));
        w.u32(uint32_t(layout_.n_c));
        for (double v : tables)
            w.f64(v);
        rep.plain = w.take();
        t.send(rep);

        (void)receive_expect(t, proto::Step::IndexBuilt);
    }

    // One datum through the encoding exchange; the server stores the code.
    void encode_datum(proto::Transport& t, const std::vector<float>& x, uint64_t position,
                      uint64_t id) {
        Timer timer(client_nanos_);
        proto::Message m;
        m.step = proto::Step::EncodeCiphertexts;
        m.session_id = session_id_;
        for (auto& slots : pack_wrp(subdivide(x, layout_), layout_))
            m.cts.push_back(ctx_.encrypt(slots, PackingTag::Wrp, keys_.pub));
        proto::ByteWriter w;
        w.u64(position);
        w.u64(id);
        m.plain = w.take();
        t.send(m);

        proto::Message dist = receive_expect(t, proto::Step::EncodeDistances);
        proto::Message rep;
        rep.step = proto::Step::EncodeTableReply;
        rep.session_id = session_id_;
        rep.plain = proto::pack_table(strided_table_from(dist.cts));
        t.send(rep);
    }

    void encode_database(proto::Transport& t, const std::vector<std::vector<float>>& base,
                         const std::vector<uint64_t>& ids) {
        for (std::size_t i = 0; i < base.size(); ++i)
            encode_datum(t, base[i], i, ids.empty() ? i : ids[i]);
        proto::Message end;
        end.step = proto::Step::StageEnd;
        end.session_id = session_id_;
        t.send(end);
    }

    proto::RankedResults search(proto::Transport& t, const std::vector<float>& query,
                                std::size_t l, std::size_t l_c, uint64_t qid = 0) {
        Timer timer(client_nanos_);
        proto::Message m;
        m.step = proto::Step::QueryCiphertexts;
        m.session_id = session_id_;
        for (auto& slots : pack_wrp(subdivide(query, layout_), layout_))
            m.cts.push_back(ctx_.encrypt(slots, PackingTag::Wrp, keys_.pub));
        proto::ByteWriter w;
        w.u64(qid);
        w.u32(uint32_t(l));
        w.u32(uint32_t(l_c));
        m.plain = w.take();
        t.send(m);

        proto::Message dist = receive_expect(t, proto::Step::QueryDistances);
        proto::Message rep;
        rep.step = proto::Step::QueryTableReply;
        rep.session_id = session_id_;
        rep.plain = proto::pack_table(strided_table_from(dist.cts));
        t.send(rep);

        proto::Message res = receive_expect(t, proto::Step::SearchResults);
        return proto::unpack_results(res.plain);
    }

    void finish(proto::Transport& t) {
        proto::Message m;
        m.step = proto::Step::Goodbye;
        m.session_id = session_id_;
        t.send(m);
    }

private:
    struct Timer {
        explicit Timer(std::atomic<int64_t>& sink)
            : sink_(sink), start_(std::chrono::steady_clock::now()) {}
        ~Timer() {
            sink_ += std::chrono::duration_cast<std::chrono::nanoseconds>(
                         std::chrono::steady_clock::now() - start_)
                         .count();
        }
        std::atomic<int64_t>& sink_;
        std::chrono::steady_clock::time_point start_;
    };

    proto::Message receive_expect(proto::Transport& t, proto::Step want) {
        proto::Message m = t.receive();
        if (m.step != want)
            throw ProtocolError(std::string("client: expected ") + proto::to_string(want) +
                                ", got " + proto::to_string(m.step));
        return m;
    }

    // Decrypts per-kernel results and reads the block starts into an
    // (n_s x N_C) table; garbage slots never leave this function.
    proto::StridedTable strided_table_from(const std::vector<Ciphertext>& cts) {
        if (cts.size() != layout_.n_wop)
            throw ProtocolError("client: expected N_WOP distance ciphertexts");
        proto::StridedTable table;
        table.n_s = uint32_t(layout_.n_s);
        table.n_c = uint32_t(layout_.n_c);
        table.values.assign(std::size_t(table.n_s) * table.n_c, 0.0);
        for (std::size_t i = 0; i < layout_.n_wop; ++i) {
            SlotVector v = ctx_.decrypt(cts[i], keys_.sec);
            std::size_t occupied = layout_.wop_blocks_in(i);
            for (std::size_t b = 0; b < occupied; ++b) {
                std::size_t g = i * layout_.n_pd + b;
                table.values[g] = v[b * layout_.d_s];
            }
        }
        return table;
    }

    // Secure k-means, client side: answer each distance round with labels
    // and re-encrypted mean codes until the server stops the loop.
    void train_subspace(proto::Transport& t, std::size_t subspace,
                        const std::vector<std::vector<double>>& samples) {
        const std::size_t n_rs = samples.size();
        const std::size_t n_c = layout_.n_c;

        Rng init_rng(derive_seed(cfg_.seed, "kmeans-init", subspace));
        std::vector<std::size_t> picks = sample_indices(n_rs, n_c, init_rng);
        std::vector<std::vector<double>> centroids(n_c);
        for (std::size_t j = 0; j < n_c; ++j)
            centroids[j] = samples[picks[j]];

        proto::Message data;
        data.step = proto::Step::KMeansData;
        data.session_id = session_id_;
        for (auto& slots : pack_sdop(samples, layout_))
            data.cts.push_back(ctx_.encrypt(slots, PackingTag::Sdop, keys_.pub));
        for (std::size_t j = 0; j < n_c; ++j)
            data.cts.push_back(
                ctx_.encrypt(pack_sdrp(centroids[j], layout_), PackingTag::Sdrp, keys_.pub));
        proto::ByteWriter w;
        w.u32(uint32_t(subspace));
        data.plain = w.take();
        t.send(data);

        while (true) {
            proto::Message m = t.receive();
            if (m.step == proto::Step::KMeansSubspaceDone)
                break;
            if (m.step != proto::Step::KMeansDistances)
                throw ProtocolError("client: expected KMeansDistances");
            if (m.cts.size() != layout_.n_sdop * layout_.n_sdrp)
                throw ProtocolError("client: bad distance ciphertext count");

            // distance table: point p vs code j
            std::vector<double> dist(n_rs * n_c, 0.0);
            for (std::size_t i = 0; i < layout_.n_sdop; ++i) {
                for (std::size_t j = 0; j < n_c; ++j) {
                    SlotVector v = ctx_.decrypt(m.cts[i * n_c + j], keys_.sec);
                    std::size_t points_here =
                        std::min(layout_.n_pd, n_rs - std::min(n_rs, i * layout_.n_pd));
                    for (std::size_t b = 0; b < points_here; ++b)
                        dist[(i * layout_.n_pd + b) * n_c + j] = v[b * layout_.d_s];
                }
            }

            std::vector<uint32_t> labels(n_rs);
            for (std::size_t p = 0; p < n_rs; ++p) {
                double best = dist[p * n_c];
                uint32_t arg = 0;
                for (std::size_t j = 1; j < n_c; ++j)
                    if (dist[p * n_c + j] < best) {
                        best = dist[p * n_c + j];
                        arg = uint32_t(j);
                    }
                labels[p] = arg;
            }
            repair_empty_clusters(labels, dist, n_c);

            // means in point order
            std::vector<std::size_t> count(n_c, 0);
            for (auto& c : centroids)
                c.assign(layout_.d_s, 0.0);
            for (std::size_t p = 0; p < n_rs; ++p) {
                ++count[labels[p]];
                for (std::size_t tt = 0; tt < layout_.d_s; ++tt)
                    centroids[labels[p]][tt] += samples[p][tt];
            }
            for (std::size_t j = 0; j < n_c; ++j)
                if (count[j] > 0)
                    for (std::size_t tt = 0; tt < layout_.d_s; ++tt)
                        centroids[j][tt] /= double(count[j]);

            proto::Message upd;
            upd.step = proto::Step::KMeansUpdate;
            upd.session_id = session_id_;
            for (std::size_t j = 0; j < n_c; ++j)
                upd.cts.push_back(
                    ctx_.encrypt(pack_sdrp(centroids[j], layout_), PackingTag::Sdrp, keys_.pub));
            upd.plain = proto::pack_labels(labels);
            t.send(upd);
        }

        for (std::size_t j = 0; j < n_c; ++j)
            for (std::size_t tt = 0; tt < layout_.d_s; ++tt)
                trained_.code(subspace, j)[tt] = centroids[j][tt];
    }

    // Empty clusters steal the farthest-from-centroid point of the largest
    // cluster, judged by the decrypted distance table; lowest index wins ties.
    void repair_empty_clusters(std::vector<uint32_t>& labels, const std::vector<double>& dist,
                               std::size_t n_c) const {
        std::vector<std::size_t> count(n_c, 0);
        for (uint32_t l : labels)
            ++count[l];
        for (std::size_t j = 0; j < n_c; ++j) {
            if (count[j] != 0)
                continue;
            std::size_t big = 0;
            for (std::size_t o = 1; o < n_c; ++o)
                if (count[o] > count[big])
                    big = o;
            double worst = -1.0;
            std::size_t victim = labels.size();
            for (std::size_t p = 0; p < labels.size(); ++p) {
                if (labels[p] != big)
                    continue;
                double d = dist[p * n_c + big];
                if (d > worst) {
                    worst = d;
                    victim = p;
                }
            }
            if (victim == labels.size())
                throw Error("client: empty-cluster repair found no donor");
            labels[victim] = uint32_t(j);
            --count[big];
            ++count[j];
        }
    }

    HeContext ctx_;
    ClientConfig cfg_;
    PQLayout layout_;
    KeyPair keys_;
    uint64_t session_id_ = 0;
    Codebook trained_;     // client-computed means (exact)
    Codebook converted_;   // decrypted values used for WOP/WRP repacking
    std::atomic<int64_t> client_nanos_{0};
};

}  // namespace pqhe
