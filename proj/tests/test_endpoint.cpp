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

#include <set>
#include <thread>

#include "strongauth/error.hpp"
#include "strongauth/harness.hpp"

using namespace strongauth;
using namespace strongauth::harness;

namespace {

DeploymentOptions seeded(std::uint64_t seed) {
    DeploymentOptions o;
    o.seed = seed;
    return o;
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return Errc::usage;
}

// Sends raw frames to a fresh connection and collects one reply per frame.
std::vector<wire::Message> raw_exchange(Deployment& d, const std::vector<Bytes>& frames) {
    std::vector<wire::Message> replies;
    run_linked(Backend::in_process, d.server(), [&](Stream& s) {
        for (const auto& f : frames) {
            s.write_all(f);
            auto reply = wire::read_frame_bytes_or_eof(s);
            if (!reply) return;
            replies.push_back(wire::decode(*reply));
        }
    });
    return replies;
}

}  // namespace

TEST(Endpoint, EnrollLoginRenewOverBothBackends) {
    for (auto backend : {Backend::in_process, Backend::tcp}) {
        Deployment d;
        d.enroll("alice", "pw", backend);
        auto run = run_happy_path(d, "alice", "pw", backend);
        EXPECT_EQ(run.sk_client, run.sk_server);

        run_linked(backend, d.server(), [&](Stream& s) {
            ClientFlow flow(s, d.client_context());
            flow.login("alice", "pw");
            flow.renew("pw2");
        });
        EXPECT_EQ(code_of([&] { run_happy_path(d, "alice", "pw", backend); }), Errc::wrong_secret);
        auto again = run_happy_path(d, "alice", "pw2", backend);
        EXPECT_EQ(again.sk_client, again.sk_server);
        EXPECT_NE(again.sk_client, run.sk_client);
    }
}

TEST(Endpoint, DuplicateEnrollmentRefusedAndStoreUnchanged) {
    Deployment d;
    d.enroll("alice", "pw");
    client::CredentialStore other;
    auto ctx = d.client_context();
    ctx.store = &other;
    EXPECT_EQ(code_of([&] {
                  run_linked(Backend::in_process, d.server(),
                             [&](Stream& s) { ClientFlow(s, ctx).enroll("alice", "pw"); });
              }),
              Errc::server_rejected);
    EXPECT_EQ(other.size(), 0u);
    EXPECT_EQ(d.db().size(), 1u);
}

TEST(Endpoint, UnknownIdentityIsClientSide) {
    Deployment d;
    d.enroll("alice", "pw");
    EXPECT_EQ(code_of([&] { run_happy_path(d, "bob", "pw"); }), Errc::unknown_identity);
    EXPECT_EQ(d.server().events().logins_rejected.load(), 0u);
}

TEST(Endpoint, WrongSecretSendsNothingAfterSessionInit) {
    Deployment d;
    d.enroll("alice", "pw");
    std::vector<Bytes> sent;
    EXPECT_EQ(code_of([&] {
                  run_linked(
                      Backend::in_process, d.server(),
                      [&](Stream& s) { ClientFlow(s, d.client_context()).login("alice", "bad"); },
                      [&](Direction dir, const Bytes& f) {
                          if (dir == Direction::client_to_server) sent.push_back(f);
                          return InterceptAction::pass();
                      });
              }),
              Errc::wrong_secret);
    ASSERT_EQ(sent.size(), 1u);
    EXPECT_EQ(sent[0][4], static_cast<std::uint8_t>(wire::MsgType::session_init));
    EXPECT_EQ(d.server().events().logins_rejected.load(), 0u);
}

TEST(Endpoint, RejectCodes) {
    Deployment d;
    d.enroll("alice", "pw");
    using wire::Reject;
    using wire::RejectCode;

    auto replies = raw_exchange(d, {wire::encode(wire::LoginProve{})});
    ASSERT_EQ(replies.size(), 1u);
    EXPECT_EQ(replies[0], wire::Message{Reject{RejectCode::bad_state}});

    replies = raw_exchange(d, {wire::encode(wire::RegisterRequest{"eve", {}})});
    EXPECT_EQ(replies.at(0), wire::Message{Reject{RejectCode::bad_state}});

    replies = raw_exchange(d, {wire::encode(wire::SessionInit{Bytes(80, 7)})});
    EXPECT_EQ(replies.at(0), wire::Message{Reject{RejectCode::malformed}});

    replies = raw_exchange(d, {from_hex("0000000177"), wire::encode(wire::RenewAck{})});
    ASSERT_EQ(replies.size(), 1u);
    EXPECT_EQ(replies[0], wire::Message{Reject{RejectCode::malformed}});

    // A fresh session, then a proof made of zeros.
    auto start = client::login_start(d.server().identity().keys.public_key, "example.com");
    replies = raw_exchange(d, {wire::encode(wire::SessionInit{start.sealed_k}), wire::encode(wire::LoginProve{}),
                               wire::encode(wire::RenewRequest{})});
    ASSERT_EQ(replies.size(), 3u);
    EXPECT_TRUE(std::holds_alternative<wire::SessionAck>(replies[0]));
    EXPECT_EQ(replies[1], wire::Message{Reject{RejectCode::identity_or_proof}});
    EXPECT_EQ(replies[2], wire::Message{Reject{RejectCode::bad_state}});
    EXPECT_EQ(d.server().sessions().size(), 0u);
}

TEST(Endpoint, ConcurrentConnections) {
    Deployment d;
    for (int i = 0; i < 8; ++i) d.enroll("user" + std::to_string(i), "pw" + std::to_string(i));
    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            auto run = run_happy_path(d, "user" + std::to_string(i), "pw" + std::to_string(i), Backend::tcp);
            ok += run.sk_client == run.sk_server;
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok.load(), 8);
    EXPECT_EQ(d.server().events().logins_accepted.load(), 8u);
}

TEST(Harness, IdentityInterceptorIsTransparent) {
    Deployment a(seeded(5));
    Deployment b(seeded(5));
    a.enroll("alice", "pw");
    b.enroll("alice", "pw");
    auto plain = run_happy_path(a, "alice", "pw");
    auto intercepted = run_linked(
        Backend::in_process, b.server(), [&](Stream& s) { ClientFlow(s, b.client_context()).login("alice", "pw"); },
        [](Direction, const Bytes&) { return InterceptAction::pass(); });
    EXPECT_EQ(frames_of(plain.transcript), frames_of(intercepted));
}

TEST(Harness, SeededBackendsProduceIdenticalTranscripts) {
    Deployment a(seeded(11));
    Deployment b(seeded(11));
    a.enroll("alice", "pw", Backend::in_process);
    b.enroll("alice", "pw", Backend::tcp);
    auto ta = run_happy_path(a, "alice", "pw", Backend::in_process);
    auto tb = run_happy_path(b, "alice", "pw", Backend::tcp);
    ASSERT_EQ(ta.transcript.size(), 4u);
    EXPECT_EQ(frames_of(ta.transcript), frames_of(tb.transcript));

    Deployment c(seeded(12));
    c.enroll("alice", "pw");
    EXPECT_NE(frames_of(run_happy_path(c, "alice", "pw").transcript), frames_of(ta.transcript));
}

TEST(Harness, DropTearsDownLink) {
    Deployment d;
    d.enroll("alice", "pw");
    EXPECT_EQ(code_of([&] {
                  run_linked(
                      Backend::in_process, d.server(),
                      [&](Stream& s) { ClientFlow(s, d.client_context()).login("alice", "pw"); },
                      [](Direction dir, const Bytes& f) {
                          return dir == Direction::client_to_server && f[4] == 0x12 ? InterceptAction::drop()
                                                                                    : InterceptAction::pass();
                      });
              }),
              Errc::connection);
    EXPECT_EQ(d.server().events().logins_accepted.load(), 0u);
}

TEST(Harness, ReplayScenarios) {
    Deployment d;
    d.enroll("alice", "pw");
    auto run = run_happy_path(d, "alice", "pw");
    auto report = run_replay(d, run.transcript, 5);
    EXPECT_TRUE(report.rejected()) << report.line();
    auto inner = run_replay_within_session(d, "alice", "pw");
    EXPECT_TRUE(inner.rejected()) << inner.line();
}

TEST(Harness, SampledBitflips) {
    Deployment d;
    d.enroll("alice", "pw");
    for (auto target : {FlipTarget::login_prove, FlipTarget::login_challenge, FlipTarget::renew_request}) {
        for (std::size_t bit : {std::size_t{0}, std::size_t{7}, std::size_t{255}, std::size_t{256},
                                payload_bits(target) - 1}) {
            auto r = run_bitflip(d, "alice", "pw", target, bit);
            EXPECT_TRUE(r.rejected()) << r.line();
        }
    }
    // The account still works after every refused renewal.
    EXPECT_NO_THROW(run_happy_path(d, "alice", "pw"));
}

TEST(Harness, MitmContained) {
    Deployment d;
    d.enroll("alice", "pw");
    auto r = run_mitm_forged_cert(d, "alice", "pw", 4);
    EXPECT_TRUE(r.rejected()) << r.line();
    EXPECT_NE(r.detail.find("exposed to the certificate-forging attacker in 4/4"), std::string::npos) << r.detail;
}

TEST(Harness, RdLeakProbe) {
    Deployment d;
    d.enroll("alice", "pw");
    auto run = run_happy_path(d, "alice", "pw");
    LeakProbeOptions opts;
    opts.attempts = 50;
    opts.plaintexts = {to_bytes(as_bytes("alice")), to_bytes(as_bytes("pw")), to_bytes(run.session.upk)};
    opts.files = {d.db().serialize(), d.store().serialize()};
    auto r = run_rd_leak_probe(d, protocol::id_digest("alice", "example.com"), signature_sample(run), opts);
    EXPECT_TRUE(r.rejected()) << r.line();

    opts.files.push_back("log: upk=" + to_hex(run.session.upk));
    EXPECT_FALSE(run_rd_leak_probe(d, protocol::id_digest("alice", "example.com"), signature_sample(run), opts)
                     .rejected());
}

TEST(Harness, Wordlist) {
    auto words = synthetic_wordlist(1000);
    EXPECT_EQ(words.size(), 1000u);
    EXPECT_EQ(std::set<std::string>(words.begin(), words.end()).size(), 1000u);
    EXPECT_EQ(words, synthetic_wordlist(1000));
}

TEST(Harness, DictionaryFindsOnlyPlantedSecret) {
    Deployment d;
    auto words = synthetic_wordlist(40);
    d.enroll("weak", words[17]);
    d.enroll("strong", "Xq9!vL2#mR7$tP4&");
    DictionaryOptions opts;
    opts.high_iterations = 2000;
    opts.timing_sample = 4;
    auto r = run_offline_dictionary(d.store(), words, opts, words[17]);
    ASSERT_EQ(r.matches.size(), 1u);
    EXPECT_EQ(r.matches[0].first, protocol::id_digest("weak", "example.com"));
    EXPECT_EQ(r.matches[0].second, words[17]);
    EXPECT_TRUE(r.report.rejected()) << r.report.line();
    EXPECT_GT(r.ratio, 1.0);
}
