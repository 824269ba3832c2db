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

#include "strongauth/harness.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "strongauth/error.hpp"

namespace strongauth::harness {

namespace {

constexpr std::size_t kPayloadOffset = wire::kHeaderSize + 1;

bool is_type(const Bytes& frame, wire::MsgType type) {
    return frame.size() > wire::kHeaderSize && frame[wire::kHeaderSize] == static_cast<std::uint8_t>(type);
}

struct Link {
    std::unique_ptr<Stream> client_end;
    std::unique_ptr<Stream> relay_client_side;
    std::unique_ptr<Stream> relay_server_side;
    std::unique_ptr<Stream> server_end;
};

Link make_link(Backend backend) {
    Link link;
    if (backend == Backend::in_process) {
        std::tie(link.client_end, link.relay_client_side) = make_pipe_pair();
        std::tie(link.relay_server_side, link.server_end) = make_pipe_pair();
        return link;
    }
    TcpListener server_listener({"127.0.0.1", 0});
    TcpListener relay_listener({"127.0.0.1", 0});
    link.client_end = tcp_connect({"127.0.0.1", relay_listener.port()});
    link.relay_client_side = relay_listener.accept(5000);
    link.relay_server_side = tcp_connect({"127.0.0.1", server_listener.port()});
    link.server_end = server_listener.accept(5000);
    if (!link.relay_client_side || !link.server_end) throw Error(Errc::connection, "loopback accept timed out");
    return link;
}

std::unique_ptr<Rng> make_rng([[maybe_unused]] const DeploymentOptions& options,
                              [[maybe_unused]] std::uint64_t role) {
#ifdef STRONGAUTH_TEST_HOOKS
    if (options.seed) {
        ByteWriter w;
        w.raw(as_bytes("strongauth-deployment")).u32be(static_cast<std::uint32_t>(*options.seed >> 32));
        w.u32be(static_cast<std::uint32_t>(*options.seed)).u32be(static_cast<std::uint32_t>(role));
        return std::make_unique<SeededRng>(w.bytes());
    }
#endif
    return std::make_unique<SystemRng>();
}

struct EventSnapshot {
    std::size_t logins_accepted;
    std::size_t renewals_accepted;

    static EventSnapshot of(ServerEvents& e) { return {e.logins_accepted.load(), e.renewals_accepted.load()}; }
};

Bytes flip_payload_bit(const Bytes& frame, std::size_t bit) {
    Bytes out = frame;
    out.at(kPayloadOffset + bit / 8) ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
    return out;
}

}  // namespace

std::vector<std::pair<Direction, Bytes>> frames_of(const Transcript& t) {
    std::vector<std::pair<Direction, Bytes>> out;
    out.reserve(t.size());
    for (const auto& e : t) out.emplace_back(e.direction, e.frame);
    return out;
}

Transcript run_linked(Backend backend, ServerEndpoint& server, const std::function<void(Stream&)>& client,
                      const Interceptor& interceptor) {
    auto link = make_link(backend);
    Transcript transcript;
    std::mutex transcript_mutex;

    auto teardown = [&] {
        link.relay_client_side->close();
        link.relay_server_side->close();
    };

    auto pump = [&](Stream& from, Stream& to, Direction dir) {
        auto deliver = [&](const Bytes& frame) {
            {
                std::lock_guard lock(transcript_mutex);
                transcript.push_back({dir, frame, std::chrono::steady_clock::now()});
            }
            try {
                to.write_all(frame);
            } catch (const Error&) {
            }
        };
        for (;;) {
            std::optional<Bytes> frame;
            try {
                frame = wire::read_frame_bytes_or_eof(from);
            } catch (const Error&) {
                break;
            }
            if (!frame) break;
            auto action = interceptor ? interceptor(dir, *frame) : InterceptAction::pass();
            if (action.kind == InterceptAction::Kind::drop) {
                teardown();
                break;
            }
            deliver(action.kind == InterceptAction::Kind::modify ? action.bytes : *frame);
            if (action.kind == InterceptAction::Kind::inject) deliver(action.bytes);
        }
        to.close();
    };

    std::exception_ptr server_error;
    std::thread server_thread([&] {
        try {
            server.serve(*link.server_end);
        } catch (...) {
            server_error = std::current_exception();
            link.server_end->close();
        }
    });
    std::thread up(pump, std::ref(*link.relay_client_side), std::ref(*link.relay_server_side),
                   Direction::client_to_server);
    std::thread down(pump, std::ref(*link.relay_server_side), std::ref(*link.relay_client_side),
                     Direction::server_to_client);

    std::exception_ptr client_error;
    try {
        client(*link.client_end);
    } catch (...) {
        client_error = std::current_exception();
    }
    link.client_end->close();
    up.join();
    server_thread.join();
    down.join();

    if (client_error) std::rethrow_exception(client_error);
    if (server_error) std::rethrow_exception(server_error);
    return transcript;
}

Deployment::Deployment(const DeploymentOptions& options)
    : options_(options), client_rng_(make_rng(options, 1)), server_rng_(make_rng(options, 2)) {
    authority_ = crypto::gen_signature_keypair(*server_rng_);
    server::ServerIdentity ident;
    ident.keys = crypto::gen_transport_keypair(*server_rng_);
    ident.domain = options_.domain;
    ident.certificate = Certificate::issue(authority_, options_.domain, ident.keys.public_key);
    server_ = std::make_unique<ServerEndpoint>(std::move(ident), db_, *server_rng_);
    server_->events().on_established = [this](const server::ServerLoginSession& s) {
        std::lock_guard lock(established_mutex_);
        established_.insert_or_assign(s.session_id, *s.sk);
    };
}

std::optional<SymKey32> Deployment::established_key(const wire::SessionId& session_id) const {
    std::lock_guard lock(established_mutex_);
    auto it = established_.find(session_id);
    if (it == established_.end()) return std::nullopt;
    return it->second;
}

ClientContext Deployment::client_context() {
    ClientContext ctx;
    ctx.config.domain = options_.domain;
    ctx.config.kdf_iterations = options_.kdf_iterations;
    ctx.config.kdf_policy = options_.kdf_policy;
    ctx.store = &store_;
    ctx.server_certificate = server_->identity().certificate;
    ctx.authority_public = authority_.public_key;
    ctx.rng = client_rng_.get();
    return ctx;
}

void Deployment::enroll(std::string_view id, std::string_view secret, Backend backend) {
    run_linked(backend, *server_, [&](Stream& s) { ClientFlow(s, client_context()).enroll(id, secret); });
}

std::string AttackReport::line() const {
    return "SCENARIO " + scenario + ": " + (rejected() ? "REJECTED" : "SUCCEEDED") + " " + detail;
}

HappyPathResult run_happy_path(Deployment& d, std::string_view id, std::string_view secret, Backend backend) {
    HappyPathResult result;
    result.transcript = run_linked(backend, d.server(), [&](Stream& s) {
        ClientFlow flow(s, d.client_context());
        result.sk_client = flow.login(id, secret);
        result.session = *flow.session();
    });
    std::optional<SymKey32> server_sk;
    for (const auto& e : result.transcript) {
        if (e.direction == Direction::server_to_client && is_type(e.frame, wire::MsgType::session_ack)) {
            server_sk = d.established_key(std::get<wire::SessionAck>(wire::decode(e.frame)).session_id);
        }
    }
    if (!server_sk) throw Error(Errc::state, "server did not establish a session key");
    result.sk_server = *server_sk;
    return result;
}

AttackReport run_replay(Deployment& d, const Transcript& transcript, std::size_t sessions) {
    std::vector<Bytes> client_frames;
    for (const auto& e : transcript) {
        if (e.direction == Direction::client_to_server) client_frames.push_back(e.frame);
    }
    auto& events = d.server().events();
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < sessions; ++i) {
        auto before = EventSnapshot::of(events);
        bool prove_refused = false;
        run_linked(Backend::in_process, d.server(), [&](Stream& s) {
            for (const auto& frame : client_frames) {
                s.write_all(frame);
                auto reply = wire::read_frame(s);
                if (is_type(frame, wire::MsgType::login_prove)) {
                    prove_refused = std::holds_alternative<wire::Reject>(reply);
                }
            }
        });
        auto after = EventSnapshot::of(events);
        if (prove_refused && after.logins_accepted == before.logins_accepted &&
            after.renewals_accepted == before.renewals_accepted) {
            ++rejected;
        }
    }
    AttackReport report;
    report.scenario = "replay";
    report.outcome = rejected == sessions ? Outcome::attack_rejected : Outcome::attack_succeeded;
    report.detail = std::to_string(rejected) + "/" + std::to_string(sessions) +
                    " replayed sessions refused at LoginProve";
    return report;
}

AttackReport run_replay_within_session(Deployment& d, std::string_view id, std::string_view secret) {
    auto& events = d.server().events();
    auto before = EventSnapshot::of(events);
    bool injected = false;
    auto transcript = run_linked(
        Backend::in_process, d.server(),
        [&](Stream& s) { ClientFlow(s, d.client_context()).login(id, secret); },
        [&](Direction dir, const Bytes& frame) {
            if (dir == Direction::client_to_server && !injected && is_type(frame, wire::MsgType::login_prove)) {
                injected = true;
                return InterceptAction::inject(frame);
            }
            return InterceptAction::pass();
        });
    auto after = EventSnapshot::of(events);
    bool bad_state_seen = false;
    for (const auto& e : transcript) {
        if (e.direction == Direction::server_to_client && is_type(e.frame, wire::MsgType::reject)) {
            bad_state_seen = wire::decode(e.frame) == wire::Message{wire::Reject{wire::RejectCode::bad_state}};
        }
    }
    AttackReport report;
    report.scenario = "replay-in-session";
    bool ok = injected && bad_state_seen && after.logins_accepted == before.logins_accepted + 1;
    report.outcome = ok ? Outcome::attack_rejected : Outcome::attack_succeeded;
    report.detail = ok ? "second LoginProve in an authenticated session refused as bad-state"
                       : "duplicate LoginProve was not refused";
    return report;
}

std::string_view name_of(FlipTarget t) noexcept {
    switch (t) {
        case FlipTarget::login_prove: return "LoginProve";
        case FlipTarget::login_challenge: return "LoginChallenge";
        case FlipTarget::renew_request: return "RenewRequest";
    }
    return "?";
}

std::size_t payload_bits(FlipTarget t) noexcept {
    switch (t) {
        case FlipTarget::login_prove: return (32 + 32 + 64) * 8;
        case FlipTarget::login_challenge: return (32 + 32) * 8;
        case FlipTarget::renew_request: return (32 + 32) * 8;
    }
    return 0;
}

AttackReport run_bitflip(Deployment& d, std::string_view id, std::string_view secret, FlipTarget target,
                         std::size_t bit, std::string_view new_secret) {
    auto type = target == FlipTarget::login_prove       ? wire::MsgType::login_prove
                : target == FlipTarget::login_challenge ? wire::MsgType::login_challenge
                                                        : wire::MsgType::renew_request;
    auto dir = target == FlipTarget::login_challenge ? Direction::server_to_client : Direction::client_to_server;
    auto& events = d.server().events();
    auto before = EventSnapshot::of(events);
    auto digest = protocol::id_digest(id, d.options().domain);
    auto db_before = d.db().find(digest);
    bool flipped = false;
    std::optional<Errc> client_error;
    bool client_completed = false;

    run_linked(
        Backend::in_process, d.server(),
        [&](Stream& s) {
            ClientFlow flow(s, d.client_context());
            try {
                flow.login(id, secret);
                if (target == FlipTarget::renew_request) flow.renew(new_secret);
                client_completed = true;
            } catch (const Error& e) {
                client_error = e.code();
            }
        },
        [&](Direction d_, const Bytes& frame) {
            if (d_ == dir && !flipped && is_type(frame, type)) {
                flipped = true;
                return InterceptAction::modify(flip_payload_bit(frame, bit));
            }
            return InterceptAction::pass();
        });

    auto after = EventSnapshot::of(events);
    bool refused = false;
    switch (target) {
        case FlipTarget::login_prove:
            refused = after.logins_accepted == before.logins_accepted && client_error == Errc::server_rejected;
            break;
        case FlipTarget::login_challenge:
            refused = !client_completed && client_error == Errc::server_rejected;
            break;
        case FlipTarget::renew_request:
            refused = after.renewals_accepted == before.renewals_accepted && client_error == Errc::server_rejected &&
                      d.db().find(digest) == db_before;
            break;
    }
    AttackReport report;
    report.scenario = "bitflip";
    report.outcome = flipped && refused ? Outcome::attack_rejected : Outcome::attack_succeeded;
    report.detail = std::string(name_of(target)) + " bit " + std::to_string(bit) +
                    (flipped ? (refused ? " refused" : " ACCEPTED") : " never sent");
    return report;
}

AttackReport run_bitflip_all(Deployment& d, std::string_view id, std::string_view secret, FlipTarget target) {
    auto bits = payload_bits(target);
    std::size_t refused = 0;
    std::vector<std::size_t> accepted;
    for (std::size_t bit = 0; bit < bits; ++bit) {
        if (run_bitflip(d, id, secret, target, bit).rejected()) {
            ++refused;
        } else {
            accepted.push_back(bit);
        }
    }
    AttackReport report;
    report.scenario = "bitflip-" + std::string(name_of(target));
    report.outcome = refused == bits ? Outcome::attack_rejected : Outcome::attack_succeeded;
    std::ostringstream detail;
    detail << refused << "/" << bits << " single-bit flips refused";
    if (!accepted.empty()) {
        detail << "; accepted bits:";
        for (std::size_t i = 0; i < std::min<std::size_t>(accepted.size(), 8); ++i) detail << ' ' << accepted[i];
    }
    report.detail = detail.str();
    return report;
}

AttackReport run_mitm_forged_cert(Deployment& d, std::string_view id, std::string_view secret, std::size_t trials) {
    auto& events = d.server().events();
    Rng& attacker_rng = system_rng();
    auto attacker_keys = crypto::gen_transport_keypair(attacker_rng);
    auto forged = Certificate::issue(d.authority(), d.options().domain, attacker_keys.public_key);
    const auto& real = d.server().identity();

    std::size_t contained = 0;
    std::size_t exposed = 0;
    std::size_t server_accepts = 0;
    std::size_t client_accepts = 0;

    for (std::size_t trial = 0; trial < trials; ++trial) {
        bool relay_same_secret = trial % 2 == 1;
        auto before = EventSnapshot::of(events);
        bool server_accepted = false;
        bool id_exposed = false;
        std::exception_ptr attacker_error;

        auto [client_end, attacker_end] = make_pipe_pair();
        std::thread attacker([&, attacker_stream = attacker_end.get()] {
            try {
                auto& victim = *attacker_stream;
                auto init = std::get<wire::SessionInit>(wire::read_frame(victim));
                auto premaster = to_block(crypto::key_transport_open(attacker_keys.private_key, init.sealed_k));

                auto [to_server, server_end] = make_pipe_pair();
                std::thread server_thread([&, s = server_end.get()] { d.server().serve(*s); });

                auto forwarded = relay_same_secret ? premaster : attacker_rng.block();
                wire::write_frame(*to_server,
                                  wire::SessionInit{crypto::key_transport_seal(real.keys.public_key, forwarded,
                                                                               attacker_rng)});
                auto server_ack = std::get<wire::SessionAck>(wire::read_frame(*to_server));

                wire::SessionId client_sid = server_ack.session_id;
                if (!relay_same_secret) attacker_rng.fill(client_sid);
                wire::write_frame(victim, wire::SessionAck{client_sid});
                auto victim_ss = protocol::derive_session_secret(premaster, client_sid, attacker_keys.public_key);

                auto prove = std::get<wire::LoginProve>(wire::read_frame(victim));
                if (auto leaked = protocol::IdentityBlock::from_block(prove.d ^ crypto::hash(victim_ss))) {
                    id_exposed = leaked->id() == id;
                }

                wire::write_frame(*to_server, prove);
                auto verdict = wire::read_frame(*to_server);
                server_accepted = std::holds_alternative<wire::LoginChallenge>(verdict);
                to_server->close();
                server_thread.join();

                // Best effort at a server answer without UPK or RB.
                auto rw = attacker_rng.block();
                auto guessed_upk = attacker_rng.block();
                auto guessed_rb = attacker_rng.block();
                wire::LoginChallenge fake;
                fake.g = rw ^ victim_ss ^ guessed_upk;
                fake.m = protocol::challenge_digest(guessed_rb, rw, victim_ss, guessed_upk);
                wire::write_frame(victim, fake);
                victim.close();
            } catch (...) {
                attacker_error = std::current_exception();
                attacker_stream->close();
            }
        });

        auto ctx = d.client_context();
        ctx.server_certificate = forged;
        bool client_accepted = false;
        try {
            ClientFlow(*client_end, ctx).login(id, secret);
            client_accepted = true;
        } catch (const Error& e) {
            if (e.code() != Errc::server_rejected) {
                client_end->close();
                attacker.join();
                throw;
            }
        }
        client_end->close();
        attacker.join();
        if (attacker_error) std::rethrow_exception(attacker_error);

        auto after = EventSnapshot::of(events);
        server_accepted = server_accepted || after.logins_accepted != before.logins_accepted;
        server_accepts += server_accepted;
        client_accepts += client_accepted;
        exposed += id_exposed;
        if (!server_accepted && !client_accepted) ++contained;
    }

    AttackReport report;
    report.scenario = "mitm";
    report.outcome = contained == trials ? Outcome::attack_rejected : Outcome::attack_succeeded;
    std::ostringstream detail;
    detail << contained << "/" << trials << " trials contained (server accepted " << server_accepts
           << " relayed proofs, client accepted " << client_accepts << " forged challenges); identity exposed to "
           << "the certificate-forging attacker in " << exposed << "/" << trials
           << " trials, expected once SS is compromised";
    report.detail = detail.str();
    return report;
}

SignatureSample signature_sample(const HappyPathResult& run) {
    const auto& s = run.session;
    if (!s.ss || !s.identity) throw Error(Errc::state, "run has no completed proof");
    SignatureSample sample;
    sample.digest = protocol::proof_digest(*s.identity, s.domain, s.upk, s.rb, *s.ss);
    for (const auto& e : run.transcript) {
        if (e.direction == Direction::client_to_server && is_type(e.frame, wire::MsgType::login_prove)) {
            sample.signature = std::get<wire::LoginProve>(wire::decode(e.frame)).e;
            return sample;
        }
    }
    throw Error(Errc::state, "transcript has no LoginProve");
}

AttackReport run_rd_leak_probe(Deployment& d, const Digest32& b, const SignatureSample& sample,
                               const LeakProbeOptions& options) {
    auto record = d.db().find(b);
    if (!record) throw Error(Errc::unknown_identity, "probe target is not enrolled");
    const auto& ssk = d.server().identity().keys.private_key;

    std::size_t accepts = 0;
    std::size_t tried = 0;
    Rng& rng = system_rng();
    while (tried < options.attempts) {
        auto guess = rng.block();
        if (guess == ssk) continue;
        ++tried;
        auto candidate = server::recover_record_secrets(*record, guess);
        if (crypto::verify(candidate.upk, sample.digest, sample.signature)) ++accepts;
    }
    bool control = crypto::verify(server::recover_record_secrets(*record, ssk).upk, sample.digest, sample.signature);
    if (!control) throw Error(Errc::state, "control: the real SSK did not recover a verifying key");

    std::size_t leaks = 0;
    for (const auto& file : options.files) {
        for (const auto& plain : options.plaintexts) leaks += protocol::leaks_substring(as_bytes(file), plain);
    }

    AttackReport report;
    report.scenario = "rdleak";
    report.outcome = accepts == 0 && leaks == 0 ? Outcome::attack_rejected : Outcome::attack_succeeded;
    report.detail = std::to_string(accepts) + "/" + std::to_string(tried) +
                    " guessed SSKs produced a verifying key; control SSK verifies; " + std::to_string(leaks) +
                    " plaintext substrings found in " + std::to_string(options.files.size()) + " files";
    return report;
}

DictionaryResult run_offline_dictionary(const client::CredentialStore& store, const std::vector<std::string>& words,
                                        const DictionaryOptions& options, std::string_view expected_word) {
    auto try_word = [](const client::CredentialRecord& rec, const std::string& word, std::uint32_t iterations,
                       crypto::KdfPolicy policy) {
        auto key = crypto::kdf(word, rec.salt, iterations, policy);
        try {
            crypto::aead_open(key, rec.a1);
            return true;
        } catch (const Error& e) {
            if (e.code() != Errc::auth_failure) throw;
            return false;
        }
    };

    DictionaryResult result;
    for (const auto& [digest, rec] : store.records()) {
        for (const auto& word : words) {
            if (try_word(rec, word, options.iterations, options.policy)) result.matches.emplace_back(digest, word);
        }
    }

    // Timing: per-guess cost at each setting, best of several rounds.
    if (!store.records().empty() && !words.empty()) {
        const auto& rec = store.records().begin()->second;
        auto sample = std::min(options.timing_sample, words.size());
        auto time_guesses = [&](std::uint32_t iterations, std::size_t reps) {
            auto start = std::chrono::steady_clock::now();
            for (std::size_t r = 0; r < reps; ++r) {
                for (std::size_t i = 0; i < sample; ++i) try_word(rec, words[i], iterations, options.policy);
            }
            std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            return elapsed.count() / static_cast<double>(reps * sample);
        };
        double low = 1e300;
        double high = 1e300;
        for (int round = 0; round < 5; ++round) low = std::min(low, time_guesses(options.low_iterations, 10));
        for (int round = 0; round < 2; ++round) high = std::min(high, time_guesses(options.high_iterations, 1));
        result.low_iterations = options.low_iterations;
        result.high_iterations = options.high_iterations;
        result.seconds_per_guess_low = low;
        result.seconds_per_guess_high = high;
        result.ratio = low > 0 ? high / low : 0;
    }

    std::size_t unexpected = 0;
    bool control_opened = false;
    for (const auto& [digest, word] : result.matches) {
        if (word == expected_word && !control_opened) {
            control_opened = true;
        } else {
            ++unexpected;
        }
    }
    if (!control_opened) throw Error(Errc::state, "control: the planted secret did not open its record");

    std::ostringstream detail;
    detail << result.matches.size() << " of " << words.size() * store.size()
           << " guesses opened a record (planted control only: " << (unexpected == 0 ? "yes" : "no")
           << "); per-guess cost " << result.seconds_per_guess_low * 1e3 << " ms at " << result.low_iterations
           << " iterations, " << result.seconds_per_guess_high * 1e3 << " ms at " << result.high_iterations
           << " (ratio " << result.ratio << ")";
    result.report.scenario = "dictionary";
    result.report.outcome = unexpected == 0 ? Outcome::attack_rejected : Outcome::attack_succeeded;
    result.report.detail = detail.str();
    return result;
}

std::vector<std::string> synthetic_wordlist(std::size_t count) {
    static constexpr std::string_view stems[] = {"sun", "moon", "star", "river", "stone", "tiger", "maple", "cloud",
                                                 "amber", "delta", "ember", "frost", "harbor", "ivory", "jade",
                                                 "kestrel", "lumen", "meadow", "nectar", "orchid"};
    std::vector<std::string> words;
    words.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto stem = stems[i % std::size(stems)];
        words.push_back(std::string(stem) + std::to_string(1970 + i / std::size(stems)));
    }
    return words;
}

}  // namespace strongauth::harness
