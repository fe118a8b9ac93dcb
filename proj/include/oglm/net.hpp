#ifndef OGLM_NET_HPP
#define OGLM_NET_HPP

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "oglm/errors.hpp"
#include "oglm/wire.hpp"

namespace oglm::net {

struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close(); }

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    void set_timeout(double seconds) {
        timeval tv{};
        tv.tv_sec = static_cast<time_t>(seconds);
        tv.tv_usec = static_cast<suseconds_t>((seconds - static_cast<double>(tv.tv_sec)) * 1e6);
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
        ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    }

    void write_all(const std::uint8_t* data, std::size_t len) {
        std::size_t sent = 0;
        while (sent < len) {
            const ssize_t r = ::send(fd_, data + sent, len - sent, MSG_NOSIGNAL);
            if (r <= 0) throw NetworkError("send failed: " + std::string(std::strerror(errno)));
            sent += static_cast<std::size_t>(r);
        }
    }

    // Returns false on clean EOF at a frame boundary.
    bool read_exact(std::uint8_t* data, std::size_t len) {
        std::size_t got = 0;
        while (got < len) {
            const ssize_t r = ::recv(fd_, data + got, len - got, 0);
            if (r == 0) {
                if (got == 0) return false;
                throw NetworkError("connection closed mid-frame");
            }
            if (r < 0) throw NetworkError("recv failed: " + std::string(std::strerror(errno)));
            got += static_cast<std::size_t>(r);
        }
        return true;
    }

private:
    int fd_ = -1;
};

// Read one complete frame; returns empty on clean EOF.
inline std::vector<std::uint8_t> read_frame(Socket& sock) {
    std::vector<std::uint8_t> buf(wire::kHeaderSize);
    if (!sock.read_exact(buf.data(), buf.size())) return {};
    const auto view = wire::parse_frame(buf.data(), buf.size());
    std::uint32_t plen = 0;
    for (int i = 0; i < 4; ++i) plen |= static_cast<std::uint32_t>(buf[6 + i]) << (8 * i);
    (void)view;  // header-only parse validates magic/version
    buf.resize(wire::kHeaderSize + plen);
    if (plen > 0 && !sock.read_exact(buf.data() + wire::kHeaderSize, plen))
        throw NetworkError("connection closed mid-frame");
    return buf;
}

inline Socket listen_on(const std::string& host, int port, int backlog = 16) {
    Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock.valid()) throw NetworkError("socket() failed");
    int one = 1;
    ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw NetworkError("bad listen address: " + host);
    if (::bind(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw NetworkError("bind failed on " + host + ":" + std::to_string(port) + ": " +
                           std::strerror(errno));
    if (::listen(sock.fd(), backlog) != 0) throw NetworkError("listen failed");
    return sock;
}

inline int bound_port(const Socket& sock) {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(sock.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

inline Socket connect_to(const std::string& host, int port, double timeout_s = 30.0) {
    Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock.valid()) throw NetworkError("socket() failed");
    sock.set_timeout(timeout_s);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        hostent* he = ::gethostbyname(host.c_str());
        if (he == nullptr || he->h_addrtype != AF_INET)
            throw NetworkError("cannot resolve host: " + host);
        std::memcpy(&addr.sin_addr, he->h_addr_list[0], sizeof(addr.sin_addr));
    }
    if (::connect(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw NetworkError("connect to " + host + ":" + std::to_string(port) + " failed: " +
                           std::strerror(errno));
    int one = 1;
    ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return sock;
}

}  // namespace oglm::net

#endif  // OGLM_NET_HPP
