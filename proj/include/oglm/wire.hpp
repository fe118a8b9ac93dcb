#ifndef OGLM_WIRE_HPP
#define OGLM_WIRE_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oglm/errors.hpp"
#include "oglm/types.hpp"

// Length-prefixed binary framing. Every frame is
//   magic "OGLM" | version u8 = 1 | msg_type u8 | payload_len u32 LE | payload
// with all integers little-endian and all reals IEEE-754 binary64
// little-endian; matrices are row-major.

namespace oglm::wire {

constexpr char kMagic[4] = {'O', 'G', 'L', 'M'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 10;

enum MsgType : std::uint8_t {
    ReqPilotDraw = 1,
    ReqDerivatives = 2,
    ReqLogLik = 3,
    ReqLocalFit = 4,
    ReqShardInfo = 5,
    RespPilotRows = 129,
    RespDerivatives = 130,
    RespLogLik = 131,
    RespLocalFit = 132,
    RespShardInfo = 133,
    RespError = 255,
};

// Requests
struct PilotDrawReq {
    std::uint32_t n_k = 0;
    std::uint64_t seed = 0;
};
struct DerivativesReq {
    VectorXd beta;
};
struct LogLikReq {
    VectorXd beta;
};
struct LocalFitReq {
    VectorXd init;
    double tol = 1e-8;
    std::uint32_t max_iter = 100;
};
struct ShardInfoReq {};

using Request =
    std::variant<PilotDrawReq, DerivativesReq, LogLikReq, LocalFitReq, ShardInfoReq>;

// Responses
struct PilotRowsResp {
    VectorXd y;
    MatrixXd X;
};
struct DerivativesResp {
    DerivativeBundle bundle;
};
struct LogLikResp {
    double value = 0.0;
};
struct LocalFitResp {
    EstimateResult result;
};
struct ShardInfoResp {
    std::uint64_t count = 0;
    std::uint32_t d = 0;
};
struct ErrorResp {
    std::uint16_t code = 0;
    std::string message;
};

using Response = std::variant<PilotRowsResp, DerivativesResp, LogLikResp, LocalFitResp,
                              ShardInfoResp, ErrorResp>;

enum ErrorCode : std::uint16_t {
    ErrMalformed = 1,
    ErrShape = 2,
    ErrSolver = 3,
    ErrAllocation = 4,
    ErrInternal = 5,
};

namespace detail {

inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

struct Reader {
    const std::uint8_t* p;
    std::size_t remaining;

    void need(std::size_t k) const {
        if (remaining < k) throw ProtocolError("wire: truncated payload");
    }
    std::uint8_t u8() {
        need(1);
        std::uint8_t v = *p;
        p += 1;
        remaining -= 1;
        return v;
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(p[i]) << (8 * i);
        p += 2;
        remaining -= 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        p += 4;
        remaining -= 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        p += 8;
        remaining -= 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

inline void put_vec(std::vector<std::uint8_t>& out, const VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v(i));
}

inline void put_mat_rowmajor(std::vector<std::uint8_t>& out, const MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

inline VectorXd read_vec(Reader& r, Eigen::Index n) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = r.f64();
    return v;
}

inline MatrixXd read_mat_rowmajor(Reader& r, Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f64();
    return m;
}

inline std::vector<std::uint8_t> frame(std::uint8_t msg_type,
                                       std::vector<std::uint8_t> payload) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + payload.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u8(out, kVersion);
    put_u8(out, msg_type);
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

// Solve payload_len = 16 + 8 d + 8 d^2 for d.
inline Eigen::Index bundle_dim_from_len(std::size_t len) {
    if (len < 16 || (len - 16) % 8 != 0)
        throw ProtocolError("wire: bad derivatives payload length");
    const std::size_t q = (len - 16) / 8;  // d + d^2
    Eigen::Index d = static_cast<Eigen::Index>(std::sqrt(static_cast<double>(q)));
    while (static_cast<std::size_t>(d) * (d + 1) > q) --d;
    while (static_cast<std::size_t>(d + 1) * (d + 2) <= q) ++d;
    if (static_cast<std::size_t>(d) * (d + 1) != q)
        throw ProtocolError("wire: derivatives payload length not of form d+d^2");
    return d;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Request& req) {
    using namespace detail;
    std::vector<std::uint8_t> payload;
    std::uint8_t type = 0;
    if (const auto* m = std::get_if<PilotDrawReq>(&req)) {
        type = ReqPilotDraw;
        put_u32(payload, m->n_k);
        put_u64(payload, m->seed);
    } else if (const auto* m2 = std::get_if<DerivativesReq>(&req)) {
        type = ReqDerivatives;
        put_vec(payload, m2->beta);
    } else if (const auto* m3 = std::get_if<LogLikReq>(&req)) {
        type = ReqLogLik;
        put_vec(payload, m3->beta);
    } else if (const auto* m4 = std::get_if<LocalFitReq>(&req)) {
        type = ReqLocalFit;
        put_vec(payload, m4->init);
        put_f64(payload, m4->tol);
        put_u32(payload, m4->max_iter);
    } else {
        type = ReqShardInfo;
    }
    return frame(type, std::move(payload));
}

inline std::vector<std::uint8_t> encode(const Response& resp) {
    using namespace detail;
    std::vector<std::uint8_t> payload;
    std::uint8_t type = 0;
    if (const auto* m = std::get_if<PilotRowsResp>(&resp)) {
        type = RespPilotRows;
        put_u32(payload, static_cast<std::uint32_t>(m->X.rows()));
        put_u32(payload, static_cast<std::uint32_t>(m->X.cols()));
        put_vec(payload, m->y);
        put_mat_rowmajor(payload, m->X);
    } else if (const auto* m2 = std::get_if<DerivativesResp>(&resp)) {
        type = RespDerivatives;
        put_u64(payload, m2->bundle.count);
        put_f64(payload, m2->bundle.log_lik);
        put_vec(payload, m2->bundle.score);
        put_mat_rowmajor(payload, m2->bundle.info);
    } else if (const auto* m3 = std::get_if<LogLikResp>(&resp)) {
        type = RespLogLik;
        put_f64(payload, m3->value);
    } else if (const auto* m4 = std::get_if<LocalFitResp>(&resp)) {
        type = RespLocalFit;
        put_u32(payload, static_cast<std::uint32_t>(m4->result.beta.size()));
        put_vec(payload, m4->result.beta);
        put_f64(payload, m4->result.log_lik);
        put_u32(payload, static_cast<std::uint32_t>(m4->result.iterations));
        put_u8(payload, m4->result.converged ? 1 : 0);
        put_f64(payload, m4->result.final_step_norm);
    } else if (const auto* m5 = std::get_if<ShardInfoResp>(&resp)) {
        type = RespShardInfo;
        put_u64(payload, m5->count);
        put_u32(payload, m5->d);
    } else if (const auto* m6 = std::get_if<ErrorResp>(&resp)) {
        type = RespError;
        put_u16(payload, m6->code);
        put_u32(payload, static_cast<std::uint32_t>(m6->message.size()));
        payload.insert(payload.end(), m6->message.begin(), m6->message.end());
    }
    return frame(type, std::move(payload));
}

struct FrameView {
    std::uint8_t msg_type;
    const std::uint8_t* payload;
    std::size_t payload_len;
    std::size_t frame_len;  // header + payload
};

// Peel one frame off a byte buffer. nullopt means the buffer holds an
// incomplete frame (needs more bytes); bad magic or version is fatal for the
// connection.
inline std::optional<FrameView> parse_frame(const std::uint8_t* data, std::size_t len) {
    if (len < kHeaderSize) return std::nullopt;
    if (std::memcmp(data, kMagic, 4) != 0) throw ProtocolError("wire: bad magic");
    if (data[4] != kVersion) throw ProtocolError("wire: unsupported version");
    std::uint32_t plen = 0;
    for (int i = 0; i < 4; ++i) plen |= static_cast<std::uint32_t>(data[6 + i]) << (8 * i);
    if (len < kHeaderSize + plen) return std::nullopt;
    return FrameView{data[5], data + kHeaderSize, plen, kHeaderSize + plen};
}

inline Request decode_request(const FrameView& f) {
    using namespace detail;
    Reader r{f.payload, f.payload_len};
    switch (f.msg_type) {
        case ReqPilotDraw: {
            PilotDrawReq m;
            m.n_k = r.u32();
            m.seed = r.u64();
            return m;
        }
        case ReqDerivatives: {
            if (f.payload_len % 8 != 0) throw ProtocolError("wire: bad beta payload");
            return DerivativesReq{read_vec(r, static_cast<Eigen::Index>(f.payload_len / 8))};
        }
        case ReqLogLik: {
            if (f.payload_len % 8 != 0) throw ProtocolError("wire: bad beta payload");
            return LogLikReq{read_vec(r, static_cast<Eigen::Index>(f.payload_len / 8))};
        }
        case ReqLocalFit: {
            if (f.payload_len < 12 || (f.payload_len - 12) % 8 != 0)
                throw ProtocolError("wire: bad local-fit payload");
            LocalFitReq m;
            m.init = read_vec(r, static_cast<Eigen::Index>((f.payload_len - 12) / 8));
            m.tol = r.f64();
            m.max_iter = r.u32();
            return m;
        }
        case ReqShardInfo:
            return ShardInfoReq{};
        default:
            throw ProtocolError("wire: unknown request type " + std::to_string(f.msg_type));
    }
}

inline Response decode_response(const FrameView& f) {
    using namespace detail;
    Reader r{f.payload, f.payload_len};
    switch (f.msg_type) {
        case RespPilotRows: {
            const std::uint32_t m = r.u32();
            const std::uint32_t d = r.u32();
            PilotRowsResp out;
            out.y = read_vec(r, m);
            out.X = read_mat_rowmajor(r, m, d);
            return out;
        }
        case RespDerivatives: {
            const Eigen::Index d = bundle_dim_from_len(f.payload_len);
            DerivativesResp out;
            out.bundle.count = r.u64();
            out.bundle.log_lik = r.f64();
            out.bundle.score = read_vec(r, d);
            out.bundle.info = read_mat_rowmajor(r, d, d);
            return out;
        }
        case RespLogLik:
            return LogLikResp{r.f64()};
        case RespLocalFit: {
            const std::uint32_t d = r.u32();
            LocalFitResp out;
            out.result.beta = read_vec(r, d);
            out.result.log_lik = r.f64();
            out.result.iterations = static_cast<int>(r.u32());
            out.result.converged = r.u8() != 0;
            out.result.final_step_norm = r.f64();
            return out;
        }
        case RespShardInfo: {
            ShardInfoResp out;
            out.count = r.u64();
            out.d = r.u32();
            return out;
        }
        case RespError: {
            ErrorResp out;
            out.code = r.u16();
            const std::uint32_t len = r.u32();
            r.need(len);
            out.message.assign(reinterpret_cast<const char*>(r.p), len);
            return out;
        }
        default:
            throw ProtocolError("wire: unknown response type " + std::to_string(f.msg_type));
    }
}

}  // namespace oglm::wire

#endif  // OGLM_WIRE_HPP
