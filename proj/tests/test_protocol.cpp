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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "strongauth/certificate.hpp"
#include "strongauth/client.hpp"
#include "strongauth/error.hpp"
#include "strongauth/files.hpp"
#include "strongauth/protocol.hpp"
#include "strongauth/server.hpp"

using namespace strongauth;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return Errc::usage;
}

std::size_t parse_line(const std::function<void()>& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e.line();
    }
    ADD_FAILURE() << "no ParseError";
    return 0;
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("strongauth-test-" + to_hex(system_rng().bytes(6)));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

// Both halves of the protocol driven directly, without a transport.
struct Parties {
    SeededRng client_rng;
    SeededRng server_rng;
    client::ClientConfig config{"example.com", 1000, crypto::KdfPolicy::production};
    client::CredentialStore store;
    server::RegistrationDB db;
    server::ServerIdentity ident;

    explicit Parties(std::uint64_t seed = 1) : client_rng(2 * seed), server_rng(2 * seed + 1) {
        auto authority = crypto::gen_signature_keypair(server_rng);
        ident.keys = crypto::gen_transport_keypair(server_rng);
        ident.domain = config.domain;
        ident.certificate = Certificate::issue(authority, ident.domain, ident.keys.public_key);
    }

    void enroll(std::string_view id, std::string_view secret) {
        server::handle_register(client::register_user(id, secret, config, store, client_rng), db, ident, server_rng);
    }

    struct Run {
        client::ClientLoginSession client;
        server::ServerLoginSession server;
    };

    Run start() {
        auto start = client::login_start(ident.keys.public_key, config.domain, client_rng);
        Run run{std::move(start.session), server::session_init(start.sealed_k, ident, server_rng)};
        client::bind_session(run.client, run.server.session_id);
        return run;
    }
};

}  // namespace

TEST(IdentityBlock, EncodesLengthIdAndPadding) {
    auto b = protocol::IdentityBlock::encode("alice");
    EXPECT_EQ(b.block()[0], 5);
    EXPECT_EQ(to_string(ByteView(b.block()).subspan(1, 5)), "alice");
    for (std::size_t i = 6; i < 32; ++i) EXPECT_EQ(b.block()[i], 0);
    EXPECT_EQ(b.id(), "alice");
    EXPECT_EQ(protocol::IdentityBlock::from_block(b.block()), b);

    EXPECT_EQ(code_of([] { protocol::IdentityBlock::encode(""); }), Errc::validation);
    EXPECT_EQ(code_of([] { protocol::IdentityBlock::encode(std::string(32, 'x')); }), Errc::validation);
    EXPECT_EQ(code_of([] { protocol::IdentityBlock::encode("\xff"); }), Errc::validation);
    EXPECT_NO_THROW(protocol::IdentityBlock::encode(std::string(31, 'x')));
}

TEST(IdentityBlock, FromBlockRejectsNonCanonical) {
    auto b = protocol::IdentityBlock::encode("bob").block();
    auto padded = b;
    padded[20] = 1;
    EXPECT_FALSE(protocol::IdentityBlock::from_block(padded));
    auto zero = b;
    zero[0] = 0;
    EXPECT_FALSE(protocol::IdentityBlock::from_block(zero));
    auto big = b;
    big[0] = 32;
    EXPECT_FALSE(protocol::IdentityBlock::from_block(big));
}

TEST(Protocol, IdDigestSeparatesIdAndDomain) {
    auto expected = crypto::hash(as_bytes(std::string_view("alice\0example.com", 17)));
    EXPECT_EQ(protocol::id_digest("alice", "example.com"), expected);
    EXPECT_NE(protocol::id_digest("alice", "example.com"), protocol::id_digest("alice", "example.org"));
    EXPECT_EQ(code_of([] { protocol::id_digest("alice", ""); }), Errc::validation);
}

TEST(Protocol, FingerprintIsFirstEightBytesOfHash) {
    SymKey32 sk{};
    sk.fill(0xab);
    auto h = crypto::hash(sk);
    EXPECT_EQ(protocol::fingerprint(sk), to_hex(ByteView(h).first(8)));
    EXPECT_EQ(protocol::fingerprint(sk).size(), 16u);
}

TEST(Protocol, LeakScanFindsRawAndHexWindows) {
    Bytes secret = to_bytes(as_bytes("0123456789abcdef"));
    EXPECT_TRUE(protocol::leaks_substring(as_bytes("xx456789abyy"), secret));
    EXPECT_FALSE(protocol::leaks_substring(as_bytes("xx456789ayy"), secret));
    auto hex = "zz" + to_hex(ByteView(secret).subspan(3, 8)) + "zz";
    EXPECT_TRUE(protocol::leaks_substring(as_bytes(hex), secret));
    EXPECT_FALSE(protocol::leaks_substring(as_bytes("short"), as_bytes("short")));
}

TEST(Certificate, IssueVerifySerialize) {
    auto authority = crypto::gen_signature_keypair();
    auto spk = crypto::gen_transport_keypair().public_key;
    auto cert = Certificate::issue(authority, "example.com", spk);
    EXPECT_TRUE(cert.verify(authority.public_key));
    EXPECT_EQ(Certificate::parse(cert.serialize()), cert);
    EXPECT_NO_THROW(check_certificate(cert, authority.public_key, "example.com"));
    EXPECT_EQ(code_of([&] { check_certificate(cert, authority.public_key, "example.org"); }), Errc::certificate);
    EXPECT_EQ(code_of([&] { check_certificate(cert, crypto::gen_signature_keypair().public_key, "example.com"); }),
              Errc::certificate);
    auto other = cert;
    other.domain = "evil.com";
    EXPECT_FALSE(other.verify(authority.public_key));
    EXPECT_EQ(code_of([] { Certificate::parse("nocolons"); }), Errc::certificate);
}

TEST(CredentialStore, RoundTripAndParseErrors) {
    Parties p;
    p.enroll("alice", "pw-alice");
    p.enroll("bob", "pw-bob");
    auto text = p.store.serialize();
    EXPECT_EQ(client::CredentialStore::parse(text), p.store);
    EXPECT_EQ(client::CredentialStore::parse("# comment\n" + text), p.store);
    EXPECT_EQ(text.find("alice"), std::string::npos);

    auto first_line = text.substr(0, text.find('\n') + 1);
    EXPECT_EQ(parse_line([&] { client::CredentialStore::parse(first_line + "a:b:c\n"); }), 2u);
    EXPECT_EQ(parse_line([&] { client::CredentialStore::parse(first_line + first_line); }), 2u);
    EXPECT_EQ(parse_line([&] { client::CredentialStore::parse(first_line.substr(0, first_line.size() - 1)); }), 1u);
    auto upper = first_line;
    upper[0] = 'A';
    EXPECT_EQ(parse_line([&] { client::CredentialStore::parse(upper); }), 1u);
    auto short_salt = first_line.substr(0, first_line.rfind(':')) + ":00112233\n";
    EXPECT_EQ(parse_line([&] { client::CredentialStore::parse("#\n" + short_salt); }), 2u);
}

TEST(CredentialStore, ExportImportIsByteIdentical) {
    TempDir dir;
    Parties p;
    p.enroll("carol", "pw");
    p.store.set_path(dir / "store.cs");
    p.store.save();
    client::export_store(p.store, dir / "backup.cs");
    EXPECT_EQ(read_text_file(dir / "store.cs"), read_text_file(dir / "backup.cs"));
    EXPECT_EQ(client::import_store(dir / "backup.cs"), p.store);
    EXPECT_EQ(code_of([&] { client::import_store(dir / "missing.cs"); }), Errc::io);
    EXPECT_EQ(client::CredentialStore::open(dir / "absent.cs").size(), 0u);
}

TEST(CredentialStore, RecordsAreSaltedPerUser) {
    Parties p;
    p.enroll("u1", "same");
    p.enroll("u2", "same");
    auto it = p.store.records().begin();
    auto& a = it->second;
    auto& b = std::next(it)->second;
    EXPECT_NE(a.salt, b.salt);
    EXPECT_NE(a.a2, b.a2);
}

TEST(Registration, RejectsDuplicatesAndBadInput) {
    Parties p;
    p.enroll("alice", "pw");
    EXPECT_EQ(code_of([&] { p.enroll("alice", "pw2"); }), Errc::already_registered);
    client::CredentialStore fresh;
    auto req = client::register_user("alice", "pw", p.config, fresh, p.client_rng);
    EXPECT_EQ(code_of([&] { server::handle_register(req, p.db, p.ident, p.server_rng); }), Errc::already_registered);
    EXPECT_EQ(code_of([&] { p.enroll("dave", ""); }), Errc::validation);
    EXPECT_EQ(code_of([&] { p.enroll("", "pw"); }), Errc::validation);
    EXPECT_EQ(p.db.size(), 1u);
}

TEST(Registration, RecordMasksUpk) {
    Parties p;
    client::CredentialStore store;
    auto req = client::register_user("alice", "pw", p.config, store, p.client_rng);
    server::handle_register(req, p.db, p.ident, p.server_rng);
    auto rec = *p.db.find(protocol::id_digest("alice", "example.com"));
    EXPECT_NE(rec.c, req.upk);
    EXPECT_EQ(server::recover_record_secrets(rec, p.ident.keys.private_key).upk, req.upk);
    auto wrong = p.ident.keys.private_key;
    wrong[5] ^= 1;
    EXPECT_NE(server::recover_record_secrets(rec, wrong).upk, req.upk);
}

TEST(Login, MutualAuthenticationAgreesOnSk) {
    Parties p;
    p.enroll("alice", "pw");
    auto run = p.start();
    EXPECT_EQ(*run.client.ss, run.server.ss);
    auto prove = client::login_prove(run.client, "alice", "pw", p.store, p.config, p.client_rng);
    ASSERT_EQ(server::verify_login(run.server, prove, p.db, p.ident), server::LoginVerdict::accepted);
    auto challenge = server::challenge_response(run.server, p.ident, p.server_rng);
    client::login_verify_server(run.client, challenge);
    EXPECT_EQ(client::derive_session_key(run.client), *run.server.sk);
    EXPECT_EQ(run.server.state, server::SessionState::awaiting_renewal_or_traffic);
}

TEST(Login, ClientSideFailures) {
    Parties p;
    p.enroll("alice", "pw");
    auto run = p.start();
    EXPECT_EQ(code_of([&] { client::login_prove(run.client, "alice", "nope", p.store, p.config, p.client_rng); }),
              Errc::wrong_secret);
    EXPECT_EQ(code_of([&] { client::login_prove(run.client, "mallory", "pw", p.store, p.config, p.client_rng); }),
              Errc::unknown_identity);
    client::ClientLoginSession unbound;
    EXPECT_EQ(code_of([&] { client::login_prove(unbound, "alice", "pw", p.store, p.config, p.client_rng); }),
              Errc::state);
    EXPECT_EQ(code_of([&] { client::derive_session_key(run.client); }), Errc::state);
}

TEST(Login, ServerRejectsUnknownIdentityAndForeignProof) {
    Parties p;
    p.enroll("alice", "pw");
    Parties other(2);
    other.enroll("alice", "pw");

    // A proof made with another deployment's keys for the same id.
    auto run = p.start();
    auto forged = client::login_prove(run.client, "alice", "pw", other.store, other.config, other.client_rng);
    EXPECT_EQ(server::verify_login(run.server, forged, p.db, p.ident), server::LoginVerdict::bad_proof);
    EXPECT_EQ(run.server.state, server::SessionState::rejected);
    EXPECT_EQ(code_of([&] { server::verify_login(run.server, forged, p.db, p.ident); }), Errc::state);

    other.enroll("zed", "pw");
    auto run2 = p.start();
    auto stranger = client::login_prove(run2.client, "zed", "pw", other.store, other.config, other.client_rng);
    EXPECT_EQ(server::verify_login(run2.server, stranger, p.db, p.ident), server::LoginVerdict::unknown_identity);
}

TEST(Login, ClientRejectsWrongChallenge) {
    Parties p;
    p.enroll("alice", "pw");
    auto run = p.start();
    auto prove = client::login_prove(run.client, "alice", "pw", p.store, p.config, p.client_rng);
    ASSERT_EQ(server::verify_login(run.server, prove, p.db, p.ident), server::LoginVerdict::accepted);
    auto challenge = server::challenge_response(run.server, p.ident, p.server_rng);
    challenge.m[0] ^= 1;
    EXPECT_EQ(code_of([&] { client::login_verify_server(run.client, challenge); }), Errc::server_rejected);
    EXPECT_EQ(code_of([&] { server::challenge_response(run.server, p.ident, p.server_rng); }), Errc::state);
}

TEST(Login, SessionSecretBindsSessionIdAndKey) {
    Parties p;
    auto start = client::login_start(p.ident.keys.public_key, p.config.domain, p.client_rng);
    auto s1 = server::session_init(start.sealed_k, p.ident, p.server_rng);
    auto s2 = server::session_init(start.sealed_k, p.ident, p.server_rng);
    EXPECT_NE(s1.session_id, s2.session_id);
    EXPECT_NE(s1.ss, s2.ss);
    auto other = crypto::gen_transport_keypair();
    EXPECT_EQ(code_of([&] {
                  server::ServerIdentity wrong = p.ident;
                  wrong.keys = other;
                  server::session_init(start.sealed_k, wrong, p.server_rng);
              }),
              Errc::open_failure);
    auto sealed = crypto::key_transport_seal(p.ident.keys.public_key, Bytes(16), p.client_rng);
    EXPECT_EQ(code_of([&] { server::session_init(sealed, p.ident, p.server_rng); }), Errc::malformed_message);
}

TEST(Renewal, ReplacesCredentialAndRecord) {
    Parties p;
    p.enroll("alice", "old");
    auto run = p.start();
    auto prove = client::login_prove(run.client, "alice", "old", p.store, p.config, p.client_rng);
    ASSERT_EQ(server::verify_login(run.server, prove, p.db, p.ident), server::LoginVerdict::accepted);
    client::login_verify_server(run.client, server::challenge_response(run.server, p.ident, p.server_rng));
    client::derive_session_key(run.client);

    auto digest = protocol::id_digest("alice", "example.com");
    auto before = *p.db.find(digest);
    auto outcome = client::renew(run.client, "new", p.store, p.config, p.client_rng);
    auto tampered = outcome.request;
    tampered.y[3] ^= 1;
    EXPECT_FALSE(server::handle_renewal(run.server, tampered, p.db, p.ident, p.server_rng));
    EXPECT_EQ(*p.db.find(digest), before);

    ASSERT_TRUE(server::handle_renewal(run.server, outcome.request, p.db, p.ident, p.server_rng));
    auto after = *p.db.find(digest);
    EXPECT_NE(after, before);
    EXPECT_EQ(server::recover_record_secrets(after, p.ident.keys.private_key).upk, outcome.new_upk);

    auto run2 = p.start();
    EXPECT_EQ(code_of([&] { client::login_prove(run2.client, "alice", "old", p.store, p.config, p.client_rng); }),
              Errc::wrong_secret);
    auto prove2 = client::login_prove(run2.client, "alice", "new", p.store, p.config, p.client_rng);
    EXPECT_EQ(server::verify_login(run2.server, prove2, p.db, p.ident), server::LoginVerdict::accepted);
}

TEST(Renewal, RequiresAuthenticatedSession) {
    Parties p;
    p.enroll("alice", "pw");
    auto run = p.start();
    EXPECT_EQ(code_of([&] { client::renew(run.client, "x", p.store, p.config, p.client_rng); }), Errc::state);
    EXPECT_EQ(code_of([&] { server::handle_renewal(run.server, {}, p.db, p.ident, p.server_rng); }), Errc::state);
}

TEST(RegistrationDB, PersistsAndParses) {
    TempDir dir;
    Parties p;
    p.db = server::RegistrationDB(dir / "rd.db");
    p.enroll("alice", "pw");
    p.enroll("bob", "pw");
    auto reopened = server::RegistrationDB::open(dir / "rd.db");
    EXPECT_EQ(reopened.snapshot(), p.db.snapshot());
    auto text = read_text_file(dir / "rd.db");
    EXPECT_EQ(text, p.db.serialize());
    EXPECT_EQ(parse_line([&] { server::RegistrationDB::parse(text + "00:11:22\n"); }), 3u);
    EXPECT_EQ(parse_line([&] { server::RegistrationDB::parse(text + "x\n"); }), 3u);
    EXPECT_EQ(parse_line([&] { server::RegistrationDB::parse("#c\n" + text.substr(0, text.find('\n'))); }), 2u);
    EXPECT_EQ(code_of([&] { p.db.update({}); }), Errc::unknown_identity);
}

TEST(ServerIdentity, LoadValidatesFiles) {
    TempDir dir;
    auto authority = crypto::gen_signature_keypair();
    auto keys = crypto::gen_transport_keypair();
    write_text_file_atomic(dir / "server.key", server::ServerIdentity::serialize_keys(keys));
    write_text_file_atomic(dir / "server.cert",
                           Certificate::issue(authority, "example.com", keys.public_key).serialize());
    auto ident = server::ServerIdentity::load(dir / "server.key", dir / "server.cert", "example.com");
    EXPECT_EQ(ident.keys.public_key, keys.public_key);

    EXPECT_EQ(code_of([&] { server::ServerIdentity::load(dir / "none.key", dir / "server.cert", "example.com"); }),
              Errc::io);
    EXPECT_EQ(code_of([&] { server::ServerIdentity::load(dir / "server.key", dir / "server.cert", "other.com"); }),
              Errc::certificate);
    auto other = crypto::gen_transport_keypair();
    write_text_file_atomic(dir / "mixed.key", to_hex(keys.private_key) + to_hex(other.public_key));
    EXPECT_EQ(code_of([&] { server::ServerIdentity::load(dir / "mixed.key", dir / "server.cert", "example.com"); }),
              Errc::parse);
}
