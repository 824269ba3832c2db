// Copyright 2026 The StrongAuth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "strongauth/transport.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "strongauth/error.hpp"

namespace strongauth {

void Stream::read_exact(std::span<std::uint8_t> out) {
    while (!out.empty()) {
        auto n = read_some(out);
        if (n == 0) throw Error(Errc::connection, "stream closed mid-frame");
        out = out.subspan(n);
    }
}

namespace {

class Channel {
public:
    void push(ByteView data) {
        {
            std::lock_guard lock(mutex_);
            if (closed_) throw Error(Errc::connection, "write on closed stream");
            buffer_.insert(buffer_.end(), data.begin(), data.end());
        }
        cv_.notify_all();
    }

    std::size_t pull(std::span<std::uint8_t> out) {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return !buffer_.empty() || closed_; });
        auto n = std::min(out.size(), buffer_.size());
        std::copy_n(buffer_.begin(), n, out.begin());
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(n));
        return n;
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::uint8_t> buffer_;
    bool closed_ = false;
};

class PipeEnd final : public Stream {
public:
    PipeEnd(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out) : in_(std::move(in)), out_(std::move(out)) {}
    ~PipeEnd() override {
        out_->close();
        in_->close();
    }

    std::size_t read_some(std::span<std::uint8_t> out) override {
        if (out.empty()) return 0;
        return in_->pull(out);
    }
    void write_all(ByteView data) override { out_->push(data); }
    void close() override { out_->close(); }

private:
    std::shared_ptr<Channel> in_;
    std::shared_ptr<Channel> out_;
};

class TcpStream final : public Stream {
public:
    explicit TcpStream(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~TcpStream() override { ::close(fd_); }

    std::size_t read_some(std::span<std::uint8_t> out) override {
        if (out.empty()) return 0;
        for (;;) {
            auto n = ::recv(fd_, out.data(), out.size(), 0);
            if (n >= 0) return static_cast<std::size_t>(n);
            if (errno == EINTR) continue;
            // A reset peer is an ended stream as far as framing is concerned.
            if (errno == ECONNRESET) return 0;
            throw Error(Errc::connection, std::string("recv: ") + std::strerror(errno));
        }
    }

    void write_all(ByteView data) override {
        while (!data.empty()) {
            auto n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(Errc::connection, std::string("send: ") + std::strerror(errno));
            }
            data = data.subspan(static_cast<std::size_t>(n));
        }
    }

    void close() override { ::shutdown(fd_, SHUT_WR); }

private:
    int fd_;
};

struct AddrInfoDeleter {
    void operator()(addrinfo* p) const noexcept { ::freeaddrinfo(p); }
};

std::unique_ptr<addrinfo, AddrInfoDeleter> resolve(const HostPort& address, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* result = nullptr;
    auto port = std::to_string(address.port);
    int rc = ::getaddrinfo(address.host.empty() ? nullptr : address.host.c_str(), port.c_str(), &hints, &result);
    if (rc != 0) throw Error(Errc::connection, "cannot resolve " + address.to_string() + ": " + ::gai_strerror(rc));
    return std::unique_ptr<addrinfo, AddrInfoDeleter>(result);
}

}  // namespace

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_pipe_pair() {
    auto a_to_b = std::make_shared<Channel>();
    auto b_to_a = std::make_shared<Channel>();
    return {std::make_unique<PipeEnd>(b_to_a, a_to_b), std::make_unique<PipeEnd>(a_to_b, b_to_a)};
}

HostPort HostPort::parse(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon + 1 == text.size()) {
        throw Error(Errc::usage, "expected HOST:PORT, got '" + std::string(text) + "'");
    }
    HostPort hp;
    hp.host = std::string(text.substr(0, colon));
    auto digits = text.substr(colon + 1);
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || value > 65535) {
        throw Error(Errc::usage, "invalid port in '" + std::string(text) + "'");
    }
    hp.port = static_cast<std::uint16_t>(value);
    return hp;
}

std::string HostPort::to_string() const { return host + ":" + std::to_string(port); }

std::unique_ptr<Stream> tcp_connect(const HostPort& address) {
    auto info = resolve(address, false);
    int last_errno = 0;
    for (auto* ai = info.get(); ai != nullptr; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) return std::make_unique<TcpStream>(fd);
        last_errno = errno;
        ::close(fd);
    }
    throw Error(Errc::connection, "cannot connect to " + address.to_string() + ": " + std::strerror(last_errno));
}

TcpListener::TcpListener(const HostPort& address) {
    auto info = resolve(address, true);
    int last_errno = 0;
    for (auto* ai = info.get(); ai != nullptr; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
            fd_ = fd;
            break;
        }
        last_errno = errno;
        ::close(fd);
    }
    if (fd_ < 0) throw Error(Errc::connection, "cannot listen on " + address.to_string() + ": " + std::strerror(last_errno));

    sockaddr_storage bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    if (bound.ss_family == AF_INET) {
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    } else if (bound.ss_family == AF_INET6) {
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
    }
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Stream> TcpListener::accept(int timeout_ms) {
    pollfd pfd{fd_, POLLIN, 0};
    for (;;) {
        int rc = ::poll(&pfd, 1, timeout_ms);
        if (rc == 0) return nullptr;
        if (rc < 0) {
            // Let the caller re-check its shutdown flag after a signal.
            if (errno == EINTR) return nullptr;
            throw Error(Errc::connection, std::string("poll: ") + std::strerror(errno));
        }
        int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd >= 0) return std::make_unique<TcpStream>(fd);
        if (errno == EINTR || errno == ECONNABORTED) continue;
        throw Error(Errc::connection, std::string("accept: ") + std::strerror(errno));
    }
}

}  // namespace strongauth
