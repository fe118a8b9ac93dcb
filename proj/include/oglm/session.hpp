#ifndef OGLM_SESSION_HPP
#define OGLM_SESSION_HPP

#include <memory>
#include <string>
#include <utility>

#include "oglm/net.hpp"
#include "oglm/wire.hpp"
#include "oglm/worker.hpp"

namespace oglm {

// One master-side handle to a worker. Both transports route every call
// through the wire codec, so a request costs the same bytes either way and
// the two transports see bit-identical payloads.
class WorkerSession {
public:
    virtual ~WorkerSession() = default;

    wire::Response call(const wire::Request& req) {
        const auto out = wire::encode(req);
        last_sent_ = out.size();
        total_sent_ += out.size();
        const auto in = exchange(out);
        last_received_ = in.size();
        total_received_ += in.size();
        const auto view = wire::parse_frame(in.data(), in.size());
        if (!view || view->frame_len != in.size())
            throw ProtocolError("session: short or trailing response bytes");
        return wire::decode_response(*view);
    }

    std::size_t last_sent() const { return last_sent_; }
    std::size_t last_received() const { return last_received_; }
    std::size_t total_sent() const { return total_sent_; }
    std::size_t total_received() const { return total_received_; }

protected:
    virtual std::vector<std::uint8_t> exchange(const std::vector<std::uint8_t>& frame) = 0;

private:
    std::size_t last_sent_ = 0, last_received_ = 0;
    std::size_t total_sent_ = 0, total_received_ = 0;
};

// In-process transport: the worker lives in the same address space; frames
// pass through memory buffers instead of a socket.
class InProcessSession final : public WorkerSession {
public:
    InProcessSession(DataShard shard, Family family)
        : worker_(std::move(shard), family) {}
    explicit InProcessSession(Worker worker) : worker_(std::move(worker)) {}

    const Worker& worker() const { return worker_; }

protected:
    std::vector<std::uint8_t> exchange(const std::vector<std::uint8_t>& frame) override {
        const auto view = wire::parse_frame(frame.data(), frame.size());
        if (!view) throw ProtocolError("in-process: truncated frame");
        wire::Response resp;
        try {
            resp = worker_.handle(wire::decode_request(*view));
        } catch (const ProtocolError& e) {
            resp = wire::ErrorResp{wire::ErrMalformed, e.what()};
        }
        return wire::encode(resp);
    }

private:
    Worker worker_;
};

// TCP transport: one persistent connection per worker, requests serialized
// on it.
class TcpSession final : public WorkerSession {
public:
    TcpSession(const std::string& host, int port, double timeout_s = 30.0)
        : sock_(net::connect_to(host, port, timeout_s)), peer_(host + ":" + std::to_string(port)) {
        sock_.set_timeout(timeout_s);
    }

    const std::string& peer() const { return peer_; }

protected:
    std::vector<std::uint8_t> exchange(const std::vector<std::uint8_t>& frame) override {
        sock_.write_all(frame.data(), frame.size());
        auto in = net::read_frame(sock_);
        if (in.empty()) throw net::NetworkError("worker " + peer_ + " closed connection");
        return in;
    }

private:
    net::Socket sock_;
    std::string peer_;
};

using SessionList = std::vector<std::unique_ptr<WorkerSession>>;

}  // namespace oglm

#endif  // OGLM_SESSION_HPP
