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

// Web-application side: the masked verifier table and the server halves of
// registration, login and key renewal.
//
// A registration record never holds UPK directly:
//
//     B  = H(ID || 0x00 || d)
//     C  = UPK ^ SSK ^ RW
//     SR = RW ^ H(SSK)
//
// so recovering UPK requires the server's transport private key SSK.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "strongauth/bytes.hpp"
#include "strongauth/certificate.hpp"
#include "strongauth/crypto.hpp"
#include "strongauth/protocol.hpp"
#include "strongauth/random.hpp"
#include "strongauth/wire.hpp"

namespace strongauth::server {

struct RegistrationRecord {
    Digest32 b{};
    Block32 c{};
    Block32 sr{};

    friend bool operator==(const RegistrationRecord&, const RegistrationRecord&) = default;
};

/// Registration database, persisted as "b:c:sr\n" lowercase-hex lines.
/// Lookups may run concurrently; mutations are serialized and, when the
/// database is bound to a file, written through before they return.
class RegistrationDB {
public:
    RegistrationDB() = default;
    explicit RegistrationDB(std::filesystem::path path) : path_(std::move(path)) {}
    RegistrationDB(const RegistrationDB& other);
    RegistrationDB& operator=(const RegistrationDB& other);

    /// Loads `path`; a missing file yields an empty database bound to `path`.
    static RegistrationDB open(const std::filesystem::path& path);
    /// Throws ParseError on malformed input.
    static RegistrationDB parse(std::string_view text);
    std::string serialize() const;

    std::optional<RegistrationRecord> find(const Digest32& b) const;
    /// Throws Errc::already_registered on a duplicate b.
    void insert(const RegistrationRecord& record);
    /// Throws Errc::unknown_identity if no record has this b.
    void update(const RegistrationRecord& record);

    std::size_t size() const;
    std::map<Digest32, RegistrationRecord> snapshot() const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    void persist_locked() const;

    mutable std::shared_mutex mutex_;
    std::map<Digest32, RegistrationRecord> records_;
    std::filesystem::path path_;
};

struct ServerIdentity {
    crypto::TransportKeyPair keys;
    std::string domain;
    Certificate certificate;

    /// Key file: hex(ssk || spk) on one line. Certificate file as
    /// Certificate::serialize. Throws on mismatched or unreadable files.
    static ServerIdentity load(const std::filesystem::path& key_file, const std::filesystem::path& cert_file,
                               std::string_view domain);
    static std::string serialize_keys(const crypto::TransportKeyPair& keys);
};

enum class SessionState { awaiting_prove, awaiting_renewal_or_traffic, rejected };

struct ServerLoginSession {
    wire::SessionId session_id{};
    SymKey32 ss{};
    SessionState state = SessionState::awaiting_prove;
    std::optional<protocol::IdentityBlock> identity;
    Digest32 b{};
    Block32 upk{};
    Nonce32 rb{};
    std::optional<Nonce32> rw_sess;
    std::optional<SymKey32> sk;

    ServerLoginSession() = default;
    ServerLoginSession(const ServerLoginSession&) = default;
    ServerLoginSession& operator=(const ServerLoginSession&) = default;
    ~ServerLoginSession();
};

/// Stores the masked record for a new identity. Throws Errc::already_registered on a duplicate.
void handle_register(const wire::RegisterRequest& req, RegistrationDB& db, const ServerIdentity& ident,
                     Rng& rng = system_rng());

/// Opens SessionInit and starts a login session. Throws Errc::open_failure
/// if the sealed bytes do not open, and Errc::malformed_message if they do
/// not carry a 32-byte premaster.
ServerLoginSession session_init(ByteView sealed_k, const ServerIdentity& ident, Rng& rng = system_rng());

/// Starts a session from an already-opened premaster.
ServerLoginSession start_session(const Block32& premaster, const ServerIdentity& ident, Rng& rng = system_rng());

struct RecoveredSecrets {
    Nonce32 rw_reg;
    Block32 upk;
};

/// Unmasks a record. A wrong `ssk` silently yields a wrong UPK.
RecoveredSecrets recover_record_secrets(const RegistrationRecord& rec, const Block32& ssk);

enum class LoginVerdict { accepted, unknown_identity, bad_proof };

/// Checks a login proof. Throws Errc::state unless the session awaits a proof; a rejection
/// moves the session to SessionState::rejected.
LoginVerdict verify_login(ServerLoginSession& session, const wire::LoginProve& msg, const RegistrationDB& db,
                          const ServerIdentity& ident);

/// Answers an accepted proof and derives SK.
wire::LoginChallenge challenge_response(ServerLoginSession& session, const ServerIdentity& ident,
                                        Rng& rng = system_rng());

/// Checks a renewal request. On acceptance the record is remasked under a fresh RW
/// and the session continues with the new UPK. A rejection leaves both the
/// record and the session untouched.
bool handle_renewal(ServerLoginSession& session, const wire::RenewRequest& msg, RegistrationDB& db,
                    const ServerIdentity& ident, Rng& rng = system_rng());

/// Live sessions by id, safe for concurrent insertion and lookup.
class SessionTable {
public:
    void insert(std::shared_ptr<ServerLoginSession> session);
    std::shared_ptr<ServerLoginSession> find(const wire::SessionId& id) const;
    void erase(const wire::SessionId& id);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<wire::SessionId, std::shared_ptr<ServerLoginSession>> sessions_;
};

}  // namespace strongauth::server
