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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "strongauth/error.hpp"
#include "strongauth/files.hpp"
#include "strongauth/harness.hpp"
#include "support.hpp"

using namespace strongauth;
using namespace strongauth::harness;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string random_secret(std::mt19937_64& g) {
    static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789!#%&*";
    std::string s(8 + g() % 16, ' ');
    for (auto& c : s) c = alphabet[g() % alphabet.size()];
    return s;
}

Verdict completeness() {
    auto start = std::chrono::steady_clock::now();
    std::mt19937_64 g(1001);
    Deployment d;
    std::set<std::string> used;
    std::size_t ok = 0;
    const std::size_t runs = 200;
    std::string first_failure;
    for (std::size_t i = 0; i < runs; ++i) {
        std::string id;
        do id = test_support::random_identity(g);
        while (!used.insert(id).second);
        auto secret = random_secret(g);
        auto new_secret = random_secret(g);
        try {
            d.enroll(id, secret);
            SymKey32 first_client{};
            auto transcript = run_linked(Backend::in_process, d.server(), [&](Stream& s) {
                ClientFlow flow(s, d.client_context());
                first_client = flow.login(id, secret);
                flow.renew(new_secret);
            });
            std::optional<SymKey32> first_server;
            for (const auto& e : transcript) {
                auto m = wire::decode(e.frame);
                if (auto* ack = std::get_if<wire::SessionAck>(&m)) first_server = d.established_key(ack->session_id);
            }
            auto second = run_happy_path(d, id, new_secret);
            if (first_server == first_client && second.sk_client == second.sk_server &&
                first_client != second.sk_client) {
                ++ok;
            } else if (first_failure.empty()) {
                first_failure = "SK mismatch for run " + std::to_string(i);
            }
        } catch (const std::exception& e) {
            if (first_failure.empty()) first_failure = "run " + std::to_string(i) + ": " + e.what();
        }
    }
    auto elapsed = seconds_since(start);
    std::ostringstream detail;
    detail << ok << "/" << runs << " register/login/renew/login runs with matching SKs in " << elapsed << " s";
    if (!first_failure.empty()) detail << "; " << first_failure;
    return {ok == runs && elapsed < 60.0, detail.str()};
}

Verdict tamper() {
    Deployment d;
    d.enroll("alice", "correct horse");
    std::size_t total = 0;
    bool all = true;
    std::ostringstream detail;
    for (auto target : {FlipTarget::login_prove, FlipTarget::login_challenge, FlipTarget::renew_request}) {
        auto r = run_bitflip_all(d, "alice", "correct horse", target);
        total += payload_bits(target);
        all = all && r.rejected();
        detail << r.detail << " [" << name_of(target) << "]; ";
    }
    detail << "total positions " << total;
    return {all && total == 2048, detail.str()};
}

Verdict replay() {
    Deployment d;
    d.enroll("alice", "pw-alice");
    auto run = run_happy_path(d, "alice", "pw-alice");
    auto r = run_replay(d, run.transcript, 100);
    return {r.rejected() && r.detail.rfind("100/100", 0) == 0, r.detail};
}

Verdict mitm() {
    Deployment d;
    d.enroll("alice", "pw-alice");
    auto r = run_mitm_forged_cert(d, "alice", "pw-alice", 100);
    bool documented = r.detail.find("identity exposed") != std::string::npos;
    return {r.rejected() && documented, r.detail};
}

Verdict verifier_leak() {
    auto dir = fs::temp_directory_path() / ("strongauth-acceptance-" + to_hex(system_rng().bytes(6)));
    fs::create_directories(dir);
    Deployment d;
    std::mt19937_64 g(55);
    std::vector<Bytes> plaintexts;
    std::optional<HappyPathResult> sample_run;
    std::string sample_id;
    for (int i = 0; i < 20; ++i) {
        auto id = "member" + std::to_string(i) + "@example.com";
        auto secret = random_secret(g);
        d.enroll(id, secret);
        auto run = run_happy_path(d, id, secret);
        plaintexts.push_back(to_bytes(as_bytes(id)));
        plaintexts.push_back(to_bytes(as_bytes(secret)));
        plaintexts.push_back(to_bytes(run.session.usk));
        plaintexts.push_back(to_bytes(run.session.upk));
        if (!sample_run) {
            sample_run = std::move(run);
            sample_id = id;
        }
    }
    write_text_file_atomic(dir / "rd.db", d.db().serialize());
    d.store().save_to(dir / "cs.store");

    LeakProbeOptions opts;
    opts.attempts = 1000;
    opts.plaintexts = plaintexts;
    opts.files = {read_text_file(dir / "rd.db"), read_text_file(dir / "cs.store")};
    Verdict v;
    try {
        auto r = run_rd_leak_probe(d, protocol::id_digest(sample_id, "example.com"), signature_sample(*sample_run),
                                   opts);
        v = {r.rejected(), r.detail + " (" + std::to_string(plaintexts.size()) + " plaintexts)"};
    } catch (const std::exception& e) {
        v = {false, e.what()};
    }
    fs::remove_all(dir);
    return v;
}

Verdict dictionary() {
    auto words = synthetic_wordlist(1000);
    Deployment d;
    d.enroll("weak-user", words[613]);
    d.enroll("strong-user", "k7#Vq!2mZr$9wLp&");
    DictionaryOptions opts;
    opts.iterations = d.options().kdf_iterations;
    try {
        auto r = run_offline_dictionary(d.store(), words, opts, words[613]);
        bool only_planted = r.matches.size() == 1 && r.matches[0].second == words[613] &&
                            r.matches[0].first == protocol::id_digest("weak-user", "example.com");
        bool ratio_ok = r.ratio >= 50.0 && r.ratio <= 200.0;
        return {only_planted && ratio_ok && r.report.rejected(), r.report.detail};
    } catch (const std::exception& e) {
        return {false, e.what()};
    }
}

Verdict unlinkability() {
    Deployment d;
    d.enroll("alice", "pw-alice");
    std::set<Block32> blocks;
    std::set<SignatureValue> signatures;
    std::set<Bytes> frames;
    std::size_t block_values = 0;
    std::size_t frame_count = 0;
    const int logins = 100;
    for (int i = 0; i < logins; ++i) {
        auto run = run_happy_path(d, "alice", "pw-alice");
        for (const auto& e : run.transcript) {
            frames.insert(e.frame);
            ++frame_count;
            auto m = wire::decode(e.frame);
            if (auto* p = std::get_if<wire::LoginProve>(&m)) {
                blocks.insert(p->d);
                blocks.insert(p->f);
                signatures.insert(p->e);
                block_values += 2;
            } else if (auto* c = std::get_if<wire::LoginChallenge>(&m)) {
                blocks.insert(c->g);
                blocks.insert(c->m);
                block_values += 2;
            }
        }
    }
    bool distinct = blocks.size() == block_values && signatures.size() == static_cast<std::size_t>(logins) &&
                    frames.size() == frame_count && block_values == 4u * logins;
    std::ostringstream detail;
    detail << blocks.size() << "/" << block_values << " distinct D/F/G/M values, " << signatures.size() << "/" << logins
           << " distinct E, " << frames.size() << "/" << frame_count << " distinct frames";
    return {distinct, detail.str()};
}

Verdict wire_robustness() {
    std::mt19937_64 g(2024);
    std::size_t malformed = 0;
    std::size_t canonical = 0;
    std::size_t bad = 0;
    const std::size_t inputs = 100000;
    for (std::size_t i = 0; i < inputs; ++i) {
        auto frame = test_support::mutated_frame(g);
        try {
            auto m = wire::decode(frame);
            if (wire::encode(m) == frame) {
                ++canonical;
            } else {
                ++bad;
            }
        } catch (const Error& e) {
            if (e.code() == Errc::malformed_message) {
                ++malformed;
            } else {
                ++bad;
            }
        } catch (...) {
            ++bad;
        }
    }
    std::size_t roundtrips = 0;
    const std::size_t generated = 10000;
    for (std::size_t i = 0; i < generated; ++i) {
        auto m = test_support::random_message(g);
        try {
            roundtrips += wire::decode(wire::encode(m)) == m;
        } catch (...) {
        }
    }
    std::ostringstream detail;
    detail << inputs << " mutated frames: " << malformed << " malformed, " << canonical << " canonical, " << bad
           << " mishandled; " << roundtrips << "/" << generated << " generated messages round-trip";
    return {bad == 0 && malformed + canonical == inputs && roundtrips == generated, detail.str()};
}

Verdict interop() {
    DeploymentOptions options;
    options.seed = 0x5eed;
    Deployment in_process(options);
    Deployment tcp(options);
    in_process.enroll("alice", "pw-alice", Backend::in_process);
    tcp.enroll("alice", "pw-alice", Backend::tcp);
    auto a = run_happy_path(in_process, "alice", "pw-alice", Backend::in_process);
    auto b = run_happy_path(tcp, "alice", "pw-alice", Backend::tcp);
    auto fa = frames_of(a.transcript);
    auto fb = frames_of(b.transcript);
    std::size_t bytes = 0;
    for (const auto& [dir, f] : fa) bytes += f.size();
    std::ostringstream detail;
    detail << fa.size() << " vs " << fb.size() << " frames, " << bytes << " bytes, "
           << (fa == fb ? "byte-identical" : "DIFFERENT");
    return {fa == fb && !fa.empty() && a.sk_client == b.sk_client, detail.str()};
}

Verdict conformance() {
    std::ifstream in(STRONGAUTH_FIXTURE_DIR "/kdf_hash_vectors.txt");
    if (!in) return {false, "fixture file missing"};
    std::size_t hashes = 0, kdfs = 0, mismatches = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string kind;
        fields >> kind;
        if (kind == "sha256") {
            std::string input, digest;
            fields >> input >> digest;
            ++hashes;
            mismatches += to_hex(crypto::hash(input == "-" ? Bytes{} : from_hex(input))) != digest;
        } else if (kind == "pbkdf2") {
            std::string secret, salt, key;
            std::uint32_t iterations = 0;
            fields >> secret >> salt >> iterations >> key;
            ++kdfs;
            auto derived = crypto::kdf(to_string(from_hex(secret)), crypto::SaltValue::from(from_hex(salt)), iterations);
            mismatches += to_hex(derived) != key;
        }
    }
    std::ostringstream detail;
    detail << hashes << " SHA-256 and " << kdfs << " PBKDF2-HMAC-SHA-256 vectors, " << mismatches << " mismatches";
    return {mismatches == 0 && hashes > 0 && kdfs > 0, detail.str()};
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        std::function<Verdict()> run;
    };
    const Criterion criteria[] = {
        {1, "completeness", completeness},
        {2, "tamper-rejection", tamper},
        {3, "replay-rejection", replay},
        {4, "mitm-containment", mitm},
        {5, "verifier-leak", verifier_leak},
        {6, "offline-dictionary", dictionary},
        {7, "unlinkability", unlinkability},
        {8, "wire-robustness", wire_robustness},
        {9, "backend-interop", interop},
        {10, "kdf-hash-conformance", conformance},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        failures += !v.pass;
        std::cout << "ACCEPTANCE " << c.number << " " << c.name << ": " << (v.pass ? "PASS" : "FAIL") << " "
                  << v.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
