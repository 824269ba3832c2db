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

#include "strongauth/client.hpp"

#include <sstream>

#include "strongauth/error.hpp"
#include "strongauth/files.hpp"

namespace strongauth::client {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        auto colon = line.find(':', start);
        fields.push_back(line.substr(start, colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    return fields;
}

Bytes hex_field(std::string_view text, std::size_t line, const char* name) {
    if (text.empty()) throw ParseError(line, std::string(name) + " is empty");
    for (char c : text) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            throw ParseError(line, std::string(name) + " is not lowercase hex");
        }
    }
    if (text.size() % 2 != 0) throw ParseError(line, std::string(name) + " has odd length");
    return from_hex(text);
}

crypto::SealedBlob blob_field(std::string_view text, std::size_t line, const char* name) {
    auto bytes = hex_field(text, line, name);
    if (bytes.size() < crypto::kAeadNonceSize + crypto::kAeadTagSize) {
        throw ParseError(line, std::string(name) + " is too short to be a sealed blob");
    }
    return crypto::SealedBlob::parse(bytes);
}

struct OpenedKeys {
    Block32 usk;
    Block32 upk;
};

OpenedKeys open_record(const CredentialRecord& record, std::string_view secret, const ClientConfig& config) {
    auto key = crypto::kdf(secret, record.salt, config.kdf_iterations, config.kdf_policy);
    OpenedKeys keys;
    try {
        auto usk = crypto::aead_open(key, record.a1);
        auto upk = crypto::aead_open(key, record.a2);
        keys.usk = to_block(usk);
        keys.upk = to_block(upk);
        secure_wipe(usk);
    } catch (const Error& e) {
        secure_wipe(key);
        if (e.code() == Errc::auth_failure) throw Error(Errc::wrong_secret, "wrong secret");
        throw;
    }
    secure_wipe(key);
    if (crypto::signature_public_key(keys.usk) != keys.upk) {
        throw Error(Errc::parse, "credential record holds a mismatched keypair");
    }
    return keys;
}

CredentialRecord seal_record(const Digest32& id_digest, const crypto::SignatureKeyPair& keys,
                             std::string_view secret, const ClientConfig& config, Rng& rng) {
    CredentialRecord record;
    record.id_digest = id_digest;
    record.salt = crypto::SaltValue::generate(rng);
    auto key = crypto::kdf(secret, record.salt, config.kdf_iterations, config.kdf_policy);
    record.a1 = crypto::aead_seal(key, keys.private_key, rng);
    record.a2 = crypto::aead_seal(key, keys.public_key, rng);
    secure_wipe(key);
    return record;
}

}  // namespace

CredentialStore CredentialStore::open(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return CredentialStore(path);
    auto store = parse(read_text_file(path));
    store.path_ = path;
    return store;
}

CredentialStore CredentialStore::parse(std::string_view text) {
    CredentialStore store;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        auto nl = text.find('\n');
        if (nl == std::string_view::npos) throw ParseError(line_no, "record is not newline-terminated");
        auto line = text.substr(0, nl);
        text.remove_prefix(nl + 1);
        if (!line.empty() && line.front() == '#') continue;

        auto fields = split_fields(line);
        if (fields.size() != 4) throw ParseError(line_no, "expected 4 ':'-separated fields");
        CredentialRecord record;
        auto digest = hex_field(fields[0], line_no, "id digest");
        if (digest.size() != 32) throw ParseError(line_no, "id digest must be 32 bytes");
        record.id_digest = to_block(digest);
        record.a1 = blob_field(fields[1], line_no, "a1");
        record.a2 = blob_field(fields[2], line_no, "a2");
        auto salt = hex_field(fields[3], line_no, "salt");
        if (salt.size() < crypto::kSaltSize) throw ParseError(line_no, "salt shorter than 64 bits");
        record.salt = crypto::SaltValue{std::move(salt)};
        if (store.records_.count(record.id_digest) != 0) throw ParseError(line_no, "duplicate id digest");
        store.records_.emplace(record.id_digest, std::move(record));
    }
    return store;
}

std::string CredentialStore::serialize() const {
    std::string out;
    for (const auto& [digest, record] : records_) {
        out += to_hex(digest);
        out += ':';
        out += to_hex(record.a1.serialize());
        out += ':';
        out += to_hex(record.a2.serialize());
        out += ':';
        out += to_hex(record.salt.bytes);
        out += '\n';
    }
    return out;
}

void CredentialStore::save() const {
    if (path_.empty()) throw Error(Errc::io, "credential store has no file path");
    save_to(path_);
}

void CredentialStore::save_to(const std::filesystem::path& path) const { write_text_file_atomic(path, serialize()); }

const CredentialRecord* CredentialStore::find(const Digest32& id_digest) const {
    auto it = records_.find(id_digest);
    return it == records_.end() ? nullptr : &it->second;
}

void CredentialStore::insert(CredentialRecord record) {
    if (records_.count(record.id_digest) != 0) throw Error(Errc::already_registered, "identity already enrolled");
    auto key = record.id_digest;
    records_.emplace(key, std::move(record));
}

void CredentialStore::put(CredentialRecord record) {
    auto key = record.id_digest;
    records_.insert_or_assign(key, std::move(record));
}

bool CredentialStore::erase(const Digest32& id_digest) { return records_.erase(id_digest) != 0; }

void export_store(const CredentialStore& store, const std::filesystem::path& destination) {
    store.save_to(destination);
}

CredentialStore import_store(const std::filesystem::path& source) {
    return CredentialStore::parse(read_text_file(source));
}

ClientLoginSession::~ClientLoginSession() {
    secure_wipe(premaster);
    secure_wipe(usk);
    if (ss) secure_wipe(*ss);
    if (sk) secure_wipe(*sk);
}

wire::RegisterRequest register_user(std::string_view id, std::string_view secret, const ClientConfig& config,
                                    CredentialStore& store, Rng& rng) {
    auto digest = protocol::id_digest(id, config.domain);
    if (secret.empty()) throw Error(Errc::validation, "secret must not be empty");
    if (store.find(digest) != nullptr) throw Error(Errc::already_registered, "identity already enrolled");

    auto keys = crypto::gen_signature_keypair(rng);
    store.insert(seal_record(digest, keys, secret, config, rng));
    secure_wipe(keys.private_key);
    return wire::RegisterRequest{std::string(id), keys.public_key};
}

LoginStart login_start(const Block32& spk, std::string_view domain, Rng& rng) {
    LoginStart out;
    out.session.domain = std::string(domain);
    out.session.spk = spk;
    out.session.premaster = rng.block();
    out.sealed_k = crypto::key_transport_seal(spk, out.session.premaster, rng);
    return out;
}

void bind_session(ClientLoginSession& session, const wire::SessionId& session_id) {
    session.ss = protocol::derive_session_secret(session.premaster, session_id, session.spk);
}

wire::LoginProve login_prove(ClientLoginSession& session, std::string_view id, std::string_view secret,
                             const CredentialStore& store, const ClientConfig& config, Rng& rng) {
    if (!session.ss) throw Error(Errc::state, "login_prove before the session was established");
    auto identity = protocol::IdentityBlock::encode(id);
    const auto* record = store.find(protocol::id_digest(id, session.domain));
    if (record == nullptr) throw Error(Errc::unknown_identity, "no credential for this identity");

    auto keys = open_record(*record, secret, config);
    const auto& ss = *session.ss;
    session.identity = identity;
    session.usk = keys.usk;
    session.upk = keys.upk;
    session.rb = rng.block();
    secure_wipe(keys.usk);

    wire::LoginProve msg;
    msg.d = identity.block() ^ crypto::hash(ss);
    msg.f = session.rb ^ ss ^ session.upk;
    msg.e = crypto::sign(session.usk,
                         protocol::proof_digest(identity, session.domain, session.upk, session.rb, ss));
    return msg;
}

Nonce32 login_verify_server(ClientLoginSession& session, const wire::LoginChallenge& challenge) {
    if (!session.ss || !session.identity) throw Error(Errc::state, "no login proof was sent in this session");
    const auto& ss = *session.ss;
    auto rw = challenge.g ^ ss ^ session.upk;
    auto expected = protocol::challenge_digest(session.rb, rw, ss, session.upk);
    if (!crypto::equal_ct(expected, challenge.m)) {
        throw Error(Errc::server_rejected, "server response failed verification");
    }
    session.rw_sess = rw;
    return rw;
}

SymKey32 derive_session_key(ClientLoginSession& session) {
    if (!session.rw_sess || !session.ss || !session.identity) {
        throw Error(Errc::state, "session key requested before mutual authentication");
    }
    session.sk = protocol::session_key(*session.identity, session.domain, session.upk, session.rb, *session.rw_sess,
                                       *session.ss);
    return *session.sk;
}

RenewOutcome renew(ClientLoginSession& session, std::string_view new_secret, CredentialStore& store,
                   const ClientConfig& config, Rng& rng) {
    if (!session.sk || !session.identity) throw Error(Errc::state, "renewal requires an authenticated session");
    if (new_secret.empty()) throw Error(Errc::validation, "secret must not be empty");
    auto digest = protocol::id_digest(session.identity->id(), session.domain);
    const auto* current = store.find(digest);
    if (current == nullptr) throw Error(Errc::unknown_identity, "no credential for this identity");

    auto keys = crypto::gen_signature_keypair(rng);
    RenewOutcome out;
    out.previous = *current;
    out.new_upk = keys.public_key;
    out.request.x = *session.sk ^ session.upk ^ keys.public_key;
    out.request.y = protocol::renewal_digest(*session.sk, session.upk, keys.public_key);
    store.put(seal_record(digest, keys, new_secret, config, rng));
    secure_wipe(keys.private_key);
    return out;
}

}  // namespace strongauth::client
