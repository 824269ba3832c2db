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

#include "strongauth/server.hpp"

#include "strongauth/error.hpp"
#include "strongauth/files.hpp"

namespace strongauth::server {

namespace {

Block32 hex_block(std::string_view text, std::size_t line, const char* name) {
    for (char c : text) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            throw ParseError(line, std::string(name) + " is not lowercase hex");
        }
    }
    if (text.size() != 64) throw ParseError(line, std::string(name) + " must be 32 bytes");
    return to_block(from_hex(text));
}

}  // namespace

RegistrationDB::RegistrationDB(const RegistrationDB& other) {
    std::shared_lock lock(other.mutex_);
    records_ = other.records_;
    path_ = other.path_;
}

RegistrationDB& RegistrationDB::operator=(const RegistrationDB& other) {
    if (this == &other) return *this;
    std::map<Digest32, RegistrationRecord> records;
    std::filesystem::path path;
    {
        std::shared_lock lock(other.mutex_);
        records = other.records_;
        path = other.path_;
    }
    std::unique_lock lock(mutex_);
    records_ = std::move(records);
    path_ = std::move(path);
    return *this;
}

RegistrationDB RegistrationDB::open(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return RegistrationDB(path);
    auto db = parse(read_text_file(path));
    db.path_ = path;
    return db;
}

RegistrationDB RegistrationDB::parse(std::string_view text) {
    RegistrationDB db;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        auto nl = text.find('\n');
        if (nl == std::string_view::npos) throw ParseError(line_no, "record is not newline-terminated");
        auto line = text.substr(0, nl);
        text.remove_prefix(nl + 1);
        if (!line.empty() && line.front() == '#') continue;

        auto c1 = line.find(':');
        auto c2 = c1 == std::string_view::npos ? c1 : line.find(':', c1 + 1);
        if (c2 == std::string_view::npos || line.find(':', c2 + 1) != std::string_view::npos) {
            throw ParseError(line_no, "expected 3 ':'-separated fields");
        }
        RegistrationRecord rec;
        rec.b = hex_block(line.substr(0, c1), line_no, "b");
        rec.c = hex_block(line.substr(c1 + 1, c2 - c1 - 1), line_no, "c");
        rec.sr = hex_block(line.substr(c2 + 1), line_no, "sr");
        if (!db.records_.emplace(rec.b, rec).second) throw ParseError(line_no, "duplicate identity digest");
    }
    return db;
}

std::string RegistrationDB::serialize() const {
    std::shared_lock lock(mutex_);
    std::string out;
    for (const auto& [b, rec] : records_) out += to_hex(rec.b) + ":" + to_hex(rec.c) + ":" + to_hex(rec.sr) + "\n";
    return out;
}

std::optional<RegistrationRecord> RegistrationDB::find(const Digest32& b) const {
    std::shared_lock lock(mutex_);
    auto it = records_.find(b);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

void RegistrationDB::insert(const RegistrationRecord& record) {
    std::unique_lock lock(mutex_);
    if (!records_.emplace(record.b, record).second) throw Error(Errc::already_registered, "identity already enrolled");
    try {
        persist_locked();
    } catch (...) {
        records_.erase(record.b);
        throw;
    }
}

void RegistrationDB::update(const RegistrationRecord& record) {
    std::unique_lock lock(mutex_);
    auto it = records_.find(record.b);
    if (it == records_.end()) throw Error(Errc::unknown_identity, "no record for this identity");
    auto previous = it->second;
    it->second = record;
    try {
        persist_locked();
    } catch (...) {
        it->second = previous;
        throw;
    }
}

std::size_t RegistrationDB::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::map<Digest32, RegistrationRecord> RegistrationDB::snapshot() const {
    std::shared_lock lock(mutex_);
    return records_;
}

void RegistrationDB::persist_locked() const {
    if (path_.empty()) return;
    std::string out;
    for (const auto& [b, rec] : records_) out += to_hex(rec.b) + ":" + to_hex(rec.c) + ":" + to_hex(rec.sr) + "\n";
    write_text_file_atomic(path_, out);
}

ServerIdentity ServerIdentity::load(const std::filesystem::path& key_file, const std::filesystem::path& cert_file,
                                    std::string_view domain) {
    auto text = read_text_file(key_file);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    Bytes raw;
    try {
        raw = from_hex(text);
    } catch (const Error&) {
        throw Error(Errc::parse, key_file.string() + ": key file is not hex");
    }
    if (raw.size() != 64) throw Error(Errc::parse, key_file.string() + ": key file must hold 64 bytes (ssk || spk)");
    ServerIdentity ident;
    ident.keys.private_key = to_block(ByteView(raw).first(32));
    ident.keys.public_key = to_block(ByteView(raw).subspan(32));
    secure_wipe(raw);
    if (crypto::transport_public_key(ident.keys.private_key) != ident.keys.public_key) {
        throw Error(Errc::parse, key_file.string() + ": public half does not match private half");
    }
    ident.domain = std::string(domain);
    ident.certificate = Certificate::parse(read_text_file(cert_file));
    if (ident.certificate.spk != ident.keys.public_key) {
        throw Error(Errc::certificate, "certificate does not certify this server's key");
    }
    if (ident.certificate.domain != ident.domain) {
        throw Error(Errc::certificate, "certificate is for '" + ident.certificate.domain + "'");
    }
    return ident;
}

std::string ServerIdentity::serialize_keys(const crypto::TransportKeyPair& keys) {
    return to_hex(keys.private_key) + to_hex(keys.public_key) + "\n";
}

ServerLoginSession::~ServerLoginSession() {
    secure_wipe(ss);
    if (sk) secure_wipe(*sk);
}

void handle_register(const wire::RegisterRequest& req, RegistrationDB& db, const ServerIdentity& ident, Rng& rng) {
    RegistrationRecord rec;
    rec.b = protocol::id_digest(req.id, ident.domain);
    if (db.find(rec.b)) throw Error(Errc::already_registered, "identity already enrolled");
    auto rw_reg = rng.block();
    const auto& ssk = ident.keys.private_key;
    rec.c = req.upk ^ ssk ^ rw_reg;
    rec.sr = rw_reg ^ crypto::hash(ssk);
    secure_wipe(rw_reg);
    db.insert(rec);
}

ServerLoginSession session_init(ByteView sealed_k, const ServerIdentity& ident, Rng& rng) {
    auto premaster = crypto::key_transport_open(ident.keys.private_key, sealed_k);
    if (premaster.size() != 32) throw Error(Errc::malformed_message, "session init does not carry a 32-byte secret");
    auto session = start_session(to_block(premaster), ident, rng);
    secure_wipe(premaster);
    return session;
}

ServerLoginSession start_session(const Block32& premaster, const ServerIdentity& ident, Rng& rng) {
    ServerLoginSession session;
    rng.fill(session.session_id);
    session.ss = protocol::derive_session_secret(premaster, session.session_id, ident.keys.public_key);
    session.state = SessionState::awaiting_prove;
    return session;
}

RecoveredSecrets recover_record_secrets(const RegistrationRecord& rec, const Block32& ssk) {
    RecoveredSecrets out;
    out.rw_reg = rec.sr ^ crypto::hash(ssk);
    out.upk = rec.c ^ ssk ^ out.rw_reg;
    return out;
}

LoginVerdict verify_login(ServerLoginSession& session, const wire::LoginProve& msg, const RegistrationDB& db,
                          const ServerIdentity& ident) {
    if (session.state != SessionState::awaiting_prove) throw Error(Errc::state, "session is not awaiting a proof");

    auto identity = protocol::IdentityBlock::from_block(msg.d ^ crypto::hash(session.ss));
    if (!identity) {
        session.state = SessionState::rejected;
        return LoginVerdict::unknown_identity;
    }
    auto b = protocol::id_digest(identity->id(), ident.domain);
    auto record = db.find(b);
    if (!record) {
        session.state = SessionState::rejected;
        return LoginVerdict::unknown_identity;
    }
    auto secrets = recover_record_secrets(*record, ident.keys.private_key);
    auto rb = msg.f ^ session.ss ^ secrets.upk;
    auto digest = protocol::proof_digest(*identity, ident.domain, secrets.upk, rb, session.ss);
    if (!crypto::verify(secrets.upk, digest, msg.e)) {
        session.state = SessionState::rejected;
        return LoginVerdict::bad_proof;
    }
    session.identity = identity;
    session.b = b;
    session.upk = secrets.upk;
    session.rb = rb;
    return LoginVerdict::accepted;
}

wire::LoginChallenge challenge_response(ServerLoginSession& session, const ServerIdentity& ident, Rng& rng) {
    if (session.state != SessionState::awaiting_prove || !session.identity || session.rw_sess) {
        throw Error(Errc::state, "challenge requires an accepted, unanswered proof");
    }
    auto rw = rng.block();
    wire::LoginChallenge out;
    out.g = rw ^ session.ss ^ session.upk;
    out.m = protocol::challenge_digest(session.rb, rw, session.ss, session.upk);
    session.rw_sess = rw;
    session.sk = protocol::session_key(*session.identity, ident.domain, session.upk, session.rb, rw, session.ss);
    session.state = SessionState::awaiting_renewal_or_traffic;
    return out;
}

bool handle_renewal(ServerLoginSession& session, const wire::RenewRequest& msg, RegistrationDB& db,
                    const ServerIdentity& ident, Rng& rng) {
    if (session.state != SessionState::awaiting_renewal_or_traffic || !session.sk) {
        throw Error(Errc::state, "renewal requires an authenticated session");
    }
    auto upk_new = msg.x ^ *session.sk ^ session.upk;
    auto expected = protocol::renewal_digest(*session.sk, session.upk, upk_new);
    if (!crypto::equal_ct(expected, msg.y)) return false;

    auto rw_reg = rng.block();
    const auto& ssk = ident.keys.private_key;
    RegistrationRecord rec;
    rec.b = session.b;
    rec.c = upk_new ^ ssk ^ rw_reg;
    rec.sr = rw_reg ^ crypto::hash(ssk);
    secure_wipe(rw_reg);
    db.update(rec);
    session.upk = upk_new;
    return true;
}

void SessionTable::insert(std::shared_ptr<ServerLoginSession> session) {
    std::lock_guard lock(mutex_);
    auto id = session->session_id;
    sessions_.insert_or_assign(id, std::move(session));
}

std::shared_ptr<ServerLoginSession> SessionTable::find(const wire::SessionId& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void SessionTable::erase(const wire::SessionId& id) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
}

std::size_t SessionTable::size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

}  // namespace strongauth::server
