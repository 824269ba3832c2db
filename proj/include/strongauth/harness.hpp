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

// Attack harness. Every scenario drives the real client and server code over
// a relay that sees each frame in both directions and may rewrite it.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "strongauth/endpoint.hpp"

namespace strongauth::harness {

enum class Direction { client_to_server, server_to_client };
enum class Backend { in_process, tcp };

struct TranscriptEntry {
    Direction direction;
    Bytes frame;
    std::chrono::steady_clock::time_point at;
};

/// Frames as delivered, in delivery order.
using Transcript = std::vector<TranscriptEntry>;

/// Frames of a transcript with timestamps stripped, for byte comparison.
std::vector<std::pair<Direction, Bytes>> frames_of(const Transcript& t);

struct InterceptAction {
    enum class Kind {
        pass,
        modify,  // deliver `bytes` instead of the frame
        drop,    // discard the frame and tear the link down
        inject,  // deliver the frame, then `bytes` as an extra frame
    };
    Kind kind = Kind::pass;
    Bytes bytes;

    static InterceptAction pass() { return {}; }
    static InterceptAction modify(Bytes b) { return {Kind::modify, std::move(b)}; }
    static InterceptAction drop() { return {Kind::drop, {}}; }
    static InterceptAction inject(Bytes b) { return {Kind::inject, std::move(b)}; }
};

/// Called once per frame with its direction and raw bytes.
using Interceptor = std::function<InterceptAction(Direction, const Bytes&)>;

/// Connects `client` to `server` through an intercepting relay over the
/// chosen backend and runs until the client function returns and the server
/// has finished with the connection. Exceptions from `client` propagate
/// after the link is torn down.
Transcript run_linked(Backend backend, ServerEndpoint& server, const std::function<void(Stream&)>& client,
                      const Interceptor& interceptor = {});

struct DeploymentOptions {
    std::string domain = "example.com";
    std::uint32_t kdf_iterations = crypto::kMinKdfIterations;
    crypto::KdfPolicy kdf_policy = crypto::KdfPolicy::production;
#ifdef STRONGAUTH_TEST_HOOKS
    /// Drives every random draw of both parties from this seed.
    std::optional<std::uint64_t> seed;
#endif
};

/// A self-contained server, client store and test certificate authority.
/// The authority's private key is kept so scenarios can model its compromise.
class Deployment {
public:
    explicit Deployment(const DeploymentOptions& options = {});
    Deployment(const Deployment&) = delete;
    Deployment& operator=(const Deployment&) = delete;

    const DeploymentOptions& options() const noexcept { return options_; }
    Rng& client_rng() noexcept { return *client_rng_; }
    Rng& server_rng() noexcept { return *server_rng_; }
    const crypto::SignatureKeyPair& authority() const noexcept { return authority_; }
    ServerEndpoint& server() noexcept { return *server_; }
    server::RegistrationDB& db() noexcept { return db_; }
    client::CredentialStore& store() noexcept { return store_; }

    /// Context for an honest client that pins this deployment's authority.
    ClientContext client_context();

    /// Honest enrollment over the given backend.
    void enroll(std::string_view id, std::string_view secret, Backend backend = Backend::in_process);

    /// SK the server derived for a session, if it got that far.
    std::optional<SymKey32> established_key(const wire::SessionId& session_id) const;

private:
    DeploymentOptions options_;
    std::unique_ptr<Rng> client_rng_;
    std::unique_ptr<Rng> server_rng_;
    crypto::SignatureKeyPair authority_;
    server::RegistrationDB db_;
    client::CredentialStore store_;
    std::unique_ptr<ServerEndpoint> server_;
    mutable std::mutex established_mutex_;
    std::map<wire::SessionId, SymKey32> established_;
};

enum class Outcome { attack_rejected, attack_succeeded };

struct AttackReport {
    std::string scenario;
    Outcome outcome = Outcome::attack_rejected;
    std::string detail;

    bool rejected() const noexcept { return outcome == Outcome::attack_rejected; }
    /// "SCENARIO <name>: REJECTED|SUCCEEDED <detail>"
    std::string line() const;
};

struct HappyPathResult {
    SymKey32 sk_client{};
    SymKey32 sk_server{};
    Transcript transcript;
    client::ClientLoginSession session;
};

/// Honest login of an enrolled user. Throws on any rejection.
HappyPathResult run_happy_path(Deployment& d, std::string_view id, std::string_view secret,
                               Backend backend = Backend::in_process);

/// Replays the client frames of `transcript` against `sessions` fresh
/// server sessions, one connection each.
AttackReport run_replay(Deployment& d, const Transcript& transcript, std::size_t sessions = 1);

/// Honest login where the relay re-sends LoginProve inside the same session.
AttackReport run_replay_within_session(Deployment& d, std::string_view id, std::string_view secret);

enum class FlipTarget { login_prove, login_challenge, renew_request };
std::string_view name_of(FlipTarget t) noexcept;
/// Payload size in bits for each target.
std::size_t payload_bits(FlipTarget t) noexcept;

/// Logs in (and for renew_request, renews to `new_secret`) with one payload
/// bit of the target message flipped in flight.
AttackReport run_bitflip(Deployment& d, std::string_view id, std::string_view secret, FlipTarget target,
                         std::size_t bit, std::string_view new_secret = "renewed-secret");

/// Runs every bit position of the target message and summarises.
AttackReport run_bitflip_all(Deployment& d, std::string_view id, std::string_view secret, FlipTarget target);

/// An attacker holding a certificate for its own transport key, issued by
/// the (compromised) authority, sits between client and server.
/// Odd trials relay the client's SessionInit secret to the server unchanged;
/// even trials open the server session with a secret of the attacker's choice.
AttackReport run_mitm_forged_cert(Deployment& d, std::string_view id, std::string_view secret,
                                  std::size_t trials = 1);

struct SignatureSample {
    Digest32 digest{};
    SignatureValue signature{};
};

/// Digest and signature of the LoginProve from an honest run.
SignatureSample signature_sample(const HappyPathResult& run);

struct LeakProbeOptions {
    std::size_t attempts = 1000;
    /// Plaintexts that must not appear in the scanned files.
    std::vector<Bytes> plaintexts;
    /// Files to scan (serialized RD and CS contents).
    std::vector<std::string> files;
};

/// With the database but not SSK, guesses SSKs and tests each recovered UPK
/// against a known-good signature; also scans files for plaintext leaks.
/// The real SSK is tried as a control.
AttackReport run_rd_leak_probe(Deployment& d, const Digest32& b, const SignatureSample& sample,
                               const LeakProbeOptions& options);

struct DictionaryResult {
    /// (record id digest, word) for every word that opened a record.
    std::vector<std::pair<Digest32, std::string>> matches;
    std::uint32_t low_iterations = 0;
    std::uint32_t high_iterations = 0;
    double seconds_per_guess_low = 0;
    double seconds_per_guess_high = 0;
    double ratio = 0;
    AttackReport report;
};

struct DictionaryOptions {
    std::uint32_t iterations = crypto::kMinKdfIterations;  // the store's setting
    crypto::KdfPolicy policy = crypto::KdfPolicy::production;
    std::uint32_t low_iterations = 1000;
    std::uint32_t high_iterations = 100000;
    /// Words timed at each setting (timing only; the full list is always tried).
    std::size_t timing_sample = 16;
};

/// Offline guessing against a stolen credential store.
/// `expected_word` is the planted control secret; any other match, or the
/// control failing to open, counts as unexpected.
DictionaryResult run_offline_dictionary(const client::CredentialStore& store, const std::vector<std::string>& words,
                                        const DictionaryOptions& options, std::string_view expected_word);

/// Builds the deterministic 1000-word list used by the dictionary scenario.
std::vector<std::string> synthetic_wordlist(std::size_t count = 1000);

}  // namespace strongauth::harness
