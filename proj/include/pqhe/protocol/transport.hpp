// Copyright 2026 the pqhe authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>

#include "pqhe/protocol/message.hpp"

namespace pqhe::proto {

class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(const Message& m) = 0;
    virtual Message receive() = 0;
};

// ----- in-process channel -----

namespace detail {

struct MessageQueue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Message> q;
    bool closed = false;

    void push(Message m) {
        {
            std::lock_guard<std::mutex> lk(mu);
            if (closed)
                throw TransportError("loopback channel closed");
            q.push_back(std::move(m));
        }
        cv.notify_one();
    }

    Message pop() {
        std::unique_lock<std::mutex> lk(mu);
        cv.wait(lk, [&] { return !q.empty() || closed; });
        if (q.empty())
            throw TransportError("loopback channel closed");
        Message m = std::move(q.front());
        q.pop_front();
        return m;
    }

    void close() {
        {
            std::lock_guard<std::mutex> lk(mu);
            closed = true;
        }
        cv.notify_all();
    }
};

}  // namespace detail

class LoopbackTransport final : public Transport {
public:
    LoopbackTransport(std::shared_ptr<detail::MessageQueue> out,
                      std::shared_ptr<detail::MessageQueue> in)
        : out_(std::move(out)), in_(std::move(in)) {}

    void send(const Message& m) override { out_->push(m); }
    Message receive() override { return in_->pop(); }

private:
    std::shared_ptr<detail::MessageQueue> out_, in_;
};

// A connected pair of endpoints sharing two queues.
struct LoopbackChannel {
    std::shared_ptr<detail::MessageQueue> a_to_b = std::make_shared<detail::MessageQueue>();
    std::shared_ptr<detail::MessageQueue> b_to_a = std::make_shared<detail::MessageQueue>();

    LoopbackTransport endpoint_a() { return LoopbackTransport(a_to_b, b_to_a); }
    LoopbackTransport endpoint_b() { return LoopbackTransport(b_to_a, a_to_b); }
};

// ----- TCP -----

// Blocking socket transport carrying the wire format; one connection is one
// session, messages are parsed incrementally off the stream.
class TcpTransport final : public Transport {
public:
    TcpTransport(int fd, Evaluator codec) : fd_(fd), codec_(std::move(codec)) {
        if (fd_ < 0)
            throw TransportError("tcp transport on invalid socket");
    }
    ~TcpTransport() override {
        if (fd_ >= 0)
            ::close(fd_);
    }
    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;
    TcpTransport(TcpTransport&& other) noexcept : fd_(other.fd_), codec_(other.codec_) {
        other.fd_ = -1;
    }

    void send(const Message& m) override {
        auto bytes = encode_wire(m, codec_);
        write_exact(bytes.data(), bytes.size());
    }

    Message receive() override {
        // header: magic + version + step + ct count
        std::vector<uint8_t> buf(14);
        read_exact(buf.data(), 14);
        uint32_t count = uint32_t(buf[10]) | uint32_t(buf[11]) << 8 | uint32_t(buf[12]) << 16 |
                         uint32_t(buf[13]) << 24;
        for (uint32_t i = 0; i < count + 1; ++i)
            read_frame(buf);
        return decode_wire(buf.data(), buf.size(), codec_);
    }

    static int listen_on(uint16_t& port) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0)
            throw TransportError("socket() failed");
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            ::listen(fd, 1) != 0) {
            ::close(fd);
            throw TransportError("bind/listen failed");
        }
        socklen_t len = sizeof(addr);
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        port = ntohs(addr.sin_port);
        return fd;
    }

    static int accept_one(int listen_fd) {
        int fd = ::accept(listen_fd, nullptr, nullptr);
        if (fd < 0)
            throw TransportError("accept() failed");
        return fd;
    }

    static int connect_to(const char* host, uint16_t port) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0)
            throw TransportError("socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host, &addr.sin_addr) != 1 ||
            ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            ::close(fd);
            throw TransportError("connect() failed");
        }
        return fd;
    }

private:
    void read_frame(std::vector<uint8_t>& buf) {
        uint8_t lenb[4];
        read_exact(lenb, 4);
        uint32_t flen = uint32_t(lenb[0]) | uint32_t(lenb[1]) << 8 | uint32_t(lenb[2]) << 16 |
                        uint32_t(lenb[3]) << 24;
        std::size_t off = buf.size();
        buf.insert(buf.end(), lenb, lenb + 4);
        buf.resize(off + 4 + flen);
        read_exact(buf.data() + off + 4, flen);
    }

    void read_exact(uint8_t* p, std::size_t n) {
        while (n > 0) {
            ssize_t r = ::recv(fd_, p, n, 0);
            if (r <= 0)
                throw TransportError("connection closed mid-message");
            p += r;
            n -= std::size_t(r);
        }
    }
    void write_exact(const uint8_t* p, std::size_t n) {
        while (n > 0) {
            ssize_t r = ::send(fd_, p, n, MSG_NOSIGNAL);
            if (r <= 0)
                throw TransportError("send failed");
            p += r;
            n -= std::size_t(r);
        }
    }

    int fd_;
    Evaluator codec_;
};

// ----- recording and replay -----

// Appends every message that passes through to a log stream. The log format
// is the wire format with a direction byte and a 8-byte length prefix per
// record, so a log can be replayed against a server role byte for byte.
class RecordingTransport final : public Transport {
public:
    RecordingTransport(Transport& inner, std::shared_ptr<std::ostream> log, Evaluator codec,
                       bool sender_is_client)
        : inner_(inner), log_(std::move(log)), codec_(std::move(codec)),
          sender_is_client_(sender_is_client) {}

    void send(const Message& m) override {
        record(sender_is_client_ ? 0 : 1, m);
        inner_.send(m);
    }
    Message receive() override {
        Message m = inner_.receive();
        record(sender_is_client_ ? 1 : 0, m);
        return m;
    }

private:
    void record(uint8_t direction, const Message& m) {
        auto bytes = encode_wire(m, codec_);
        std::lock_guard<std::mutex> lk(mu_);
        char dir = char(direction);
        log_->write(&dir, 1);
        uint64_t len = bytes.size();
        char lenb[8];
        std::memcpy(lenb, &len, 8);
        log_->write(lenb, 8);
        log_->write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }

    Transport& inner_;
    std::shared_ptr<std::ostream> log_;
    Evaluator codec_;
    bool sender_is_client_;
    std::mutex mu_;
};

struct ReplayRecord {
    uint8_t direction;  // 0 = client->server, 1 = server->client
    std::vector<uint8_t> wire;
};

inline std::vector<ReplayRecord> read_replay_log(std::istream& in) {
    std::vector<ReplayRecord> out;
    while (true) {
        char dir;
        if (!in.read(&dir, 1))
            break;
        char lenb[8];
        if (!in.read(lenb, 8))
            throw SerializationError("replay log truncated");
        uint64_t len;
        std::memcpy(&len, lenb, 8);
        ReplayRecord rec;
        rec.direction = uint8_t(dir);
        rec.wire.resize(len);
        if (!in.read(reinterpret_cast<char*>(rec.wire.data()), std::streamsize(len)))
            throw SerializationError("replay log truncated");
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace pqhe::proto
