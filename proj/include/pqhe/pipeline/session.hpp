// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <thread>

#include "pqhe/pipeline/client.hpp"
#include "pqhe/pipeline/server.hpp"

namespace pqhe {

// Drives one client function against a server node over an in-process
// channel. Both roles run on their own thread, exactly like the socket
// deployment; exceptions from either side propagate to the caller.
inline void run_loopback_session(ServerNode& server,
                                 const std::function<void(proto::Transport&)>& client_fn) {
    proto::LoopbackChannel chan;
    std::exception_ptr server_err;
    std::thread server_thread([&] {
        try {
            auto t = chan.endpoint_a();
            server.serve(t);
        } catch (...) {
            server_err = std::current_exception();
            chan.a_to_b->close();
            chan.b_to_a->close();
        }
    });
    std::exception_ptr client_err;
    try {
        auto t = chan.endpoint_b();
        client_fn(t);
    } catch (...) {
        client_err = std::current_exception();
        chan.a_to_b->close();
        chan.b_to_a->close();
    }
    server_thread.join();
    if (client_err)
        std::rethrow_exception(client_err);
    if (server_err)
        std::rethrow_exception(server_err);
}

// Database encoding split over several concurrent sessions, one connection
// per worker; the server node shares state, codes land at their positions.
inline void parallel_encode(ServerNode& server, ClientSession& client,
                            const std::vector<std::vector<float>>& base,
                            const std::vector<uint64_t>& ids, std::size_t workers) {
    if (workers <= 1) {
        run_loopback_session(server, [&](proto::Transport& t) {
            client.encode_database(t, base, ids);
            client.finish(t);
        });
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    std::size_t chunk = ceil_div(base.size(), workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                std::size_t lo = w * chunk;
                std::size_t hi = std::min(base.size(), lo + chunk);
                run_loopback_session(server, [&](proto::Transport& t) {
                    for (std::size_t i = lo; i < hi; ++i)
                        client.encode_datum(t, base[i], i, ids.empty() ? i : ids[i]);
                    proto::Message end;
                    end.step = proto::Step::Goodbye;
                    t.send(end);
                });
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace pqhe
