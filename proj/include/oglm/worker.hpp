#ifndef OGLM_WORKER_HPP
#define OGLM_WORKER_HPP

#include <atomic>
#include <functional>
#include <utility>

#include "oglm/glm.hpp"
#include "oglm/net.hpp"
#include "oglm/sharding.hpp"
#include "oglm/wire.hpp"

namespace oglm {

// Worker state machine: holds one read-only shard and answers protocol
// requests. Requests are processed strictly in arrival order per connection.
class Worker {
public:
    Worker(DataShard shard, Family family)
        : shard_(std::move(shard)), family_(family) {
        shard_.check();
    }

    const DataShard& shard() const { return shard_; }
    Family family() const { return family_; }

    wire::Response handle(const wire::Request& req) const {
        try {
            if (const auto* m = std::get_if<wire::PilotDrawReq>(&req)) return pilot_draw(*m);
            if (const auto* m2 = std::get_if<wire::DerivativesReq>(&req)) {
                return wire::DerivativesResp{derivatives(family_, shard_, m2->beta)};
            }
            if (const auto* m3 = std::get_if<wire::LogLikReq>(&req)) {
                return wire::LogLikResp{log_lik_kernel(family_, shard_, m3->beta)};
            }
            if (const auto* m4 = std::get_if<wire::LocalFitReq>(&req)) {
                return wire::LocalFitResp{fit_mle(family_, shard_, m4->init, m4->tol,
                                                  static_cast<int>(m4->max_iter))};
            }
            return wire::ShardInfoResp{static_cast<std::uint64_t>(shard_.rows()),
                                       static_cast<std::uint32_t>(shard_.dim())};
        } catch (const ShapeError& e) {
            return wire::ErrorResp{wire::ErrShape, e.what()};
        } catch (const SingularInformationError& e) {
            return wire::ErrorResp{wire::ErrSolver, e.what()};
        } catch (const ConfigError& e) {
            return wire::ErrorResp{wire::ErrAllocation, e.what()};
        } catch (const std::exception& e) {
            return wire::ErrorResp{wire::ErrInternal, e.what()};
        }
    }

    // Serve one connection until EOF or protocol violation. Malformed
    // message payloads get an Error response and the connection stays open;
    // a broken frame header closes the connection.
    void serve_connection(net::Socket& sock,
                          const std::function<void(std::uint8_t)>& on_request = {}) const {
        for (;;) {
            std::vector<std::uint8_t> frame;
            try {
                frame = net::read_frame(sock);
            } catch (const ProtocolError&) {
                return;  // bad magic/version: close
            } catch (const net::NetworkError&) {
                return;
            }
            if (frame.empty()) return;  // clean EOF
            const auto view = wire::parse_frame(frame.data(), frame.size());
            wire::Response resp;
            try {
                const wire::Request req = wire::decode_request(*view);
                if (on_request) on_request(view->msg_type);
                resp = handle(req);
            } catch (const ProtocolError& e) {
                resp = wire::ErrorResp{wire::ErrMalformed, e.what()};
            }
            const auto bytes = wire::encode(resp);
            try {
                sock.write_all(bytes.data(), bytes.size());
            } catch (const net::NetworkError&) {
                return;
            }
        }
    }

    // Accept loop; one connection served at a time. `stop` flips the loop
    // off after the current connection closes.
    void serve(net::Socket& listener, const std::atomic<bool>& stop,
               const std::function<void(std::uint8_t)>& on_request = {}) const {
        while (!stop.load(std::memory_order_relaxed)) {
            net::Socket conn(::accept(listener.fd(), nullptr, nullptr));
            if (!conn.valid()) {
                if (stop.load(std::memory_order_relaxed)) return;
                continue;
            }
            serve_connection(conn, on_request);
        }
    }

private:
    wire::Response pilot_draw(const wire::PilotDrawReq& req) const {
        const std::uint64_t m = static_cast<std::uint64_t>(shard_.rows());
        if (req.n_k > m)
            return wire::ErrorResp{wire::ErrAllocation, "pilot draw larger than shard"};
        const auto picks = srswor(m, req.n_k, req.seed);
        wire::PilotRowsResp resp;
        resp.y.resize(static_cast<Eigen::Index>(picks.size()));
        resp.X.resize(static_cast<Eigen::Index>(picks.size()), shard_.dim());
        for (std::size_t i = 0; i < picks.size(); ++i) {
            resp.y(static_cast<Eigen::Index>(i)) = shard_.y(static_cast<Eigen::Index>(picks[i]));
            resp.X.row(static_cast<Eigen::Index>(i)) =
                shard_.X.row(static_cast<Eigen::Index>(picks[i]));
        }
        return resp;
    }

    DataShard shard_;
    Family family_;
};

}  // namespace oglm

#endif  // OGLM_WORKER_HPP
