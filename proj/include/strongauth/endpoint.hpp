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

// Message-level drivers: run the client and server roles over a Stream.

#include <atomic>
#include <functional>
#include <optional>

#include "strongauth/client.hpp"
#include "strongauth/server.hpp"
#include "strongauth/transport.hpp"

namespace strongauth {

/// Server-side counters and hooks. The harness uses them to see what the
/// server decided without trusting what the client reports.
struct ServerEvents {
    std::atomic<std::size_t> registrations{0};
    std::atomic<std::size_t> logins_accepted{0};
    std::atomic<std::size_t> logins_rejected{0};
    std::atomic<std::size_t> renewals_accepted{0};
    std::atomic<std::size_t> renewals_rejected{0};
    std::atomic<std::size_t> bad_state{0};
    std::atomic<std::size_t> malformed{0};
    /// Called with every session that reaches SK, before the challenge is sent.
    std::function<void(const server::ServerLoginSession&)> on_established;
};

/// Serves connections against one registration database. serve() may run
/// on many threads at once.
class ServerEndpoint {
public:
    ServerEndpoint(server::ServerIdentity identity, server::RegistrationDB& db, Rng& rng = system_rng())
        : identity_(std::move(identity)), db_(db), rng_(rng) {}

    /// Handles one connection until the peer closes it or sends a malformed
    /// frame. Each connection carries at most one live login session.
    void serve(Stream& stream);

    const server::ServerIdentity& identity() const noexcept { return identity_; }
    server::RegistrationDB& db() noexcept { return db_; }
    server::SessionTable& sessions() noexcept { return sessions_; }
    ServerEvents& events() noexcept { return events_; }

private:
    server::ServerIdentity identity_;
    server::RegistrationDB& db_;
    Rng& rng_;
    server::SessionTable sessions_;
    ServerEvents events_;
};

struct ClientContext {
    client::ClientConfig config;
    client::CredentialStore* store = nullptr;
    Certificate server_certificate;
    Block32 authority_public{};
    Rng* rng = &system_rng();
};

/// One client connection. Enrollment and login each start their own session
/// on the stream; renewal continues the logged-in session.
///
/// Failures surface as Error with codes wrong_secret, unknown_identity,
/// server_rejected, certificate or connection.
class ClientFlow {
public:
    ClientFlow(Stream& stream, ClientContext context) : stream_(stream), ctx_(std::move(context)) {}

    /// Adds the credential to the store; it is removed again if the server
    /// refuses. The caller persists the store.
    void enroll(std::string_view id, std::string_view secret);

    /// Full login. Returns SK.
    SymKey32 login(std::string_view id, std::string_view secret);

    /// Replaces the credential; the previous record is restored if the
    /// server refuses.
    void renew(std::string_view new_secret);

    const std::optional<client::ClientLoginSession>& session() const noexcept { return session_; }

private:
    wire::Message exchange(const wire::Message& m);

    Stream& stream_;
    ClientContext ctx_;
    std::optional<client::ClientLoginSession> session_;
};

}  // namespace strongauth
