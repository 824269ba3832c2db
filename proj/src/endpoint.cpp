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

#include "strongauth/endpoint.hpp"

#include "strongauth/error.hpp"

namespace strongauth {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void ServerEndpoint::serve(Stream& stream) {
    std::shared_ptr<server::ServerLoginSession> current;
    auto drop_current = [&] {
        if (current) sessions_.erase(current->session_id);
        current.reset();
    };
    auto reject = [&](wire::RejectCode code) { wire::write_frame(stream, wire::Reject{code}); };

    try {
        for (;;) {
            std::optional<wire::Message> msg;
            try {
                auto raw = wire::read_frame_bytes_or_eof(stream);
                if (!raw) break;
                msg = wire::decode(*raw);
            } catch (const Error& e) {
                if (e.code() != Errc::malformed_message) throw;
                ++events_.malformed;
                reject(wire::RejectCode::malformed);
                break;
            }

            std::visit(
                Overloaded{
                    [&](const wire::SessionInit& m) {
                        Bytes opened;
                        try {
                            opened = crypto::key_transport_open(identity_.keys.private_key, m.sealed_k);
                        } catch (const Error& e) {
                            if (e.code() != Errc::open_failure) throw;
                            ++events_.malformed;
                            reject(wire::RejectCode::malformed);
                            return;
                        }
                        if (opened.size() == 32) {
                            drop_current();
                            current = std::make_shared<server::ServerLoginSession>(
                                server::start_session(to_block(opened), identity_, rng_));
                            secure_wipe(opened);
                            sessions_.insert(current);
                            wire::write_frame(stream, wire::SessionAck{current->session_id});
                            return;
                        }
                        // Enrollment travels sealed to the server key.
                        std::optional<wire::Message> inner;
                        try {
                            inner = wire::decode(opened);
                        } catch (const Error& e) {
                            if (e.code() != Errc::malformed_message) throw;
                        }
                        const auto* req = inner ? std::get_if<wire::RegisterRequest>(&*inner) : nullptr;
                        if (req == nullptr) {
                            ++events_.malformed;
                            reject(wire::RejectCode::malformed);
                            return;
                        }
                        try {
                            server::handle_register(*req, db_, identity_, rng_);
                        } catch (const Error& e) {
                            if (e.code() != Errc::already_registered) throw;
                            reject(wire::RejectCode::identity_or_proof);
                            return;
                        }
                        ++events_.registrations;
                        wire::write_frame(stream, wire::RegisterAck{});
                    },
                    [&](const wire::LoginProve& m) {
                        if (!current || current->state != server::SessionState::awaiting_prove) {
                            ++events_.bad_state;
                            reject(wire::RejectCode::bad_state);
                            return;
                        }
                        auto verdict = server::verify_login(*current, m, db_, identity_);
                        if (verdict != server::LoginVerdict::accepted) {
                            ++events_.logins_rejected;
                            reject(wire::RejectCode::identity_or_proof);
                            return;
                        }
                        auto challenge = server::challenge_response(*current, identity_, rng_);
                        ++events_.logins_accepted;
                        if (events_.on_established) events_.on_established(*current);
                        wire::write_frame(stream, challenge);
                    },
                    [&](const wire::RenewRequest& m) {
                        if (!current || current->state != server::SessionState::awaiting_renewal_or_traffic) {
                            ++events_.bad_state;
                            reject(wire::RejectCode::bad_state);
                            return;
                        }
                        if (!server::handle_renewal(*current, m, db_, identity_, rng_)) {
                            ++events_.renewals_rejected;
                            reject(wire::RejectCode::identity_or_proof);
                            return;
                        }
                        ++events_.renewals_accepted;
                        wire::write_frame(stream, wire::RenewAck{});
                    },
                    [&](const auto&) {
                        // Includes plaintext RegisterRequest, which must arrive sealed.
                        ++events_.bad_state;
                        reject(wire::RejectCode::bad_state);
                    },
                },
                *msg);
        }
    } catch (const Error& e) {
        // The peer went away mid-exchange.
        if (e.code() != Errc::connection) {
            drop_current();
            stream.close();
            throw;
        }
    }
    drop_current();
    stream.close();
}

wire::Message ClientFlow::exchange(const wire::Message& m) {
    wire::write_frame(stream_, m);
    return wire::read_frame(stream_);
}

namespace {

[[noreturn]] void rejected_by_server(const wire::Message& reply, const char* during) {
    std::string what = std::string("server refused ") + during;
    if (const auto* r = std::get_if<wire::Reject>(&reply)) {
        what += " (reject code " + std::to_string(static_cast<int>(r->code)) + ")";
    } else {
        what += " (unexpected " + std::string(wire::name_of(wire::type_of(reply))) + ")";
    }
    throw Error(Errc::server_rejected, what);
}

}  // namespace

void ClientFlow::enroll(std::string_view id, std::string_view secret) {
    check_certificate(ctx_.server_certificate, ctx_.authority_public, ctx_.config.domain);
    auto req = client::register_user(id, secret, ctx_.config, *ctx_.store, *ctx_.rng);
    auto digest = protocol::id_digest(id, ctx_.config.domain);
    try {
        auto sealed = crypto::key_transport_seal(ctx_.server_certificate.spk, wire::encode(req), *ctx_.rng);
        auto reply = exchange(wire::SessionInit{std::move(sealed)});
        if (!std::holds_alternative<wire::RegisterAck>(reply)) rejected_by_server(reply, "registration");
    } catch (...) {
        ctx_.store->erase(digest);
        throw;
    }
}

SymKey32 ClientFlow::login(std::string_view id, std::string_view secret) {
    check_certificate(ctx_.server_certificate, ctx_.authority_public, ctx_.config.domain);
    session_.reset();
    auto start = client::login_start(ctx_.server_certificate.spk, ctx_.config.domain, *ctx_.rng);
    auto reply = exchange(wire::SessionInit{start.sealed_k});
    const auto* ack = std::get_if<wire::SessionAck>(&reply);
    if (ack == nullptr) rejected_by_server(reply, "session");
    auto session = std::move(start.session);
    client::bind_session(session, ack->session_id);

    auto prove = client::login_prove(session, id, secret, *ctx_.store, ctx_.config, *ctx_.rng);
    reply = exchange(prove);
    const auto* challenge = std::get_if<wire::LoginChallenge>(&reply);
    if (challenge == nullptr) rejected_by_server(reply, "login");
    client::login_verify_server(session, *challenge);
    auto sk = client::derive_session_key(session);
    session_ = std::move(session);
    return sk;
}

void ClientFlow::renew(std::string_view new_secret) {
    if (!session_ || !session_->sk) throw Error(Errc::state, "renewal requires a completed login");
    auto outcome = client::renew(*session_, new_secret, *ctx_.store, ctx_.config, *ctx_.rng);
    try {
        auto reply = exchange(outcome.request);
        if (!std::holds_alternative<wire::RenewAck>(reply)) rejected_by_server(reply, "renewal");
    } catch (...) {
        ctx_.store->put(outcome.previous);
        throw;
    }
    session_->upk = outcome.new_upk;
}

}  // namespace strongauth
