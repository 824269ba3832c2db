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

// Browser side of the scheme: the credential store and the client halves of
// registration, login and key renewal.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "strongauth/bytes.hpp"
#include "strongauth/crypto.hpp"
#include "strongauth/protocol.hpp"
#include "strongauth/random.hpp"
#include "strongauth/wire.hpp"

namespace strongauth::client {

/// One credential: the user's signature keypair sealed under a key derived
/// from their secret. Neither the identity nor either key is stored in the
/// clear.
struct CredentialRecord {
    Digest32 id_digest{};
    crypto::SealedBlob a1;  // sealed private key
    crypto::SealedBlob a2;  // sealed public key
    crypto::SaltValue salt;

    friend bool operator==(const CredentialRecord&, const CredentialRecord&) = default;
};

/// Credential store, persisted as one line per record:
///
///     id_digest:a1:a2:salt\n
///
/// with every field lowercase hex. Lines starting with '#' are comments.
///
/// Single writer: mutations need exclusive access, reads may be concurrent.
class CredentialStore {
public:
    CredentialStore() = default;
    explicit CredentialStore(std::filesystem::path path) : path_(std::move(path)) {}

    /// Loads `path`; a missing file yields an empty store bound to `path`.
    static CredentialStore open(const std::filesystem::path& path);
    /// Throws ParseError (with line number) on malformed input.
    static CredentialStore parse(std::string_view text);
    std::string serialize() const;

    /// Writes to the bound path. Throws Errc::io without one.
    void save() const;
    void save_to(const std::filesystem::path& path) const;

    const CredentialRecord* find(const Digest32& id_digest) const;
    /// Throws Errc::already_registered on a duplicate id digest.
    void insert(CredentialRecord record);
    /// Inserts or overwrites.
    void put(CredentialRecord record);
    bool erase(const Digest32& id_digest);

    std::size_t size() const noexcept { return records_.size(); }
    const std::map<Digest32, CredentialRecord>& records() const noexcept { return records_; }
    const std::filesystem::path& path() const noexcept { return path_; }
    void set_path(std::filesystem::path path) { path_ = std::move(path); }

    friend bool operator==(const CredentialStore& a, const CredentialStore& b) { return a.records_ == b.records_; }

private:
    std::map<Digest32, CredentialRecord> records_;
    std::filesystem::path path_;
};

/// Writes the store in its own file format to `destination`.
void export_store(const CredentialStore& store, const std::filesystem::path& destination);
/// Throws ParseError on malformed input and Errc::io when unreadable.
CredentialStore import_store(const std::filesystem::path& source);

struct ClientConfig {
    std::string domain;
    std::uint32_t kdf_iterations = crypto::kDefaultKdfIterations;
    crypto::KdfPolicy kdf_policy = crypto::KdfPolicy::production;
};

/// Creates and stores a fresh credential for (id, domain) and returns the
/// enrollment message for the server.
///
/// Throws Errc::already_registered if the store already holds the identity and
/// Errc::validation on an empty secret or a bad identity.
wire::RegisterRequest register_user(std::string_view id, std::string_view secret, const ClientConfig& config,
                                    CredentialStore& store, Rng& rng = system_rng());

/// Per-login client state. Secrets are wiped on destruction.
struct ClientLoginSession {
    std::string domain;
    Block32 spk{};        // transport key the premaster was sealed to
    Block32 premaster{};  // transported to the server in SessionInit
    std::optional<SymKey32> ss;
    std::optional<protocol::IdentityBlock> identity;
    Nonce32 rb{};
    Block32 usk{};
    Block32 upk{};
    std::optional<Nonce32> rw_sess;
    std::optional<SymKey32> sk;

    ClientLoginSession() = default;
    ClientLoginSession(const ClientLoginSession&) = default;
    ClientLoginSession& operator=(const ClientLoginSession&) = default;
    ~ClientLoginSession();
};

struct LoginStart {
    ClientLoginSession session;
    Bytes sealed_k;
};

/// Draws the premaster and seals it to the server's transport key.
/// `spk` must come from a certificate already checked by the caller.
LoginStart login_start(const Block32& spk, std::string_view domain, Rng& rng = system_rng());

/// Fixes SS once the server's SessionAck names the session.
void bind_session(ClientLoginSession& session, const wire::SessionId& session_id);

/// Builds the login proof. Throws Errc::unknown_identity when the store has no record
/// for the identity and Errc::wrong_secret when the secret fails to open it.
wire::LoginProve login_prove(ClientLoginSession& session, std::string_view id, std::string_view secret,
                             const CredentialStore& store, const ClientConfig& config, Rng& rng = system_rng());

/// Checks the server's challenge. Stores RW on success; throws Errc::server_rejected otherwise.
Nonce32 login_verify_server(ClientLoginSession& session, const wire::LoginChallenge& challenge);

/// Derives SK. Throws Errc::state before the server has been verified.
SymKey32 derive_session_key(ClientLoginSession& session);

struct RenewOutcome {
    wire::RenewRequest request;
    /// Becomes the session's UPK once the server acknowledges.
    Block32 new_upk{};
    /// The replaced record, for rolling back if the server refuses.
    CredentialRecord previous;
};

/// Generates a new keypair and salt, reseals under `new_secret` and replaces
/// the store record. Throws Errc::state without an established SK.
RenewOutcome renew(ClientLoginSession& session, std::string_view new_secret, CredentialStore& store,
                   const ClientConfig& config, Rng& rng = system_rng());

}  // namespace strongauth::client
