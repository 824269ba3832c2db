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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "strongauth/bytes.hpp"

namespace strongauth {

/// Bidirectional, ordered, reliable byte channel.
class Stream {
public:
    virtual ~Stream() = default;

    /// Blocks until at least one byte is available; returns 0 at end of stream.
    virtual std::size_t read_some(std::span<std::uint8_t> out) = 0;
    virtual void write_all(ByteView data) = 0;
    /// Ends the outgoing direction; the peer's reads drain and then return 0.
    virtual void close() = 0;

    /// Throws Errc::connection when the stream ends first.
    void read_exact(std::span<std::uint8_t> out);
};

/// Two connected in-process endpoints.
std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_pipe_pair();

struct HostPort {
    std::string host;
    std::uint16_t port = 0;

    /// Accepts "host:port"; throws Errc::usage otherwise.
    static HostPort parse(std::string_view text);
    std::string to_string() const;
};

std::unique_ptr<Stream> tcp_connect(const HostPort& address);

class TcpListener {
public:
    explicit TcpListener(const HostPort& address);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    /// The bound port (useful when binding port 0).
    std::uint16_t port() const noexcept { return port_; }

    /// Waits up to `timeout_ms` for a connection; returns nullptr on timeout.
    std::unique_ptr<Stream> accept(int timeout_ms = -1);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace strongauth
