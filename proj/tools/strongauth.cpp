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

// strongauth: server, client and attack-harness front end.

#include <termios.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <list>
#include <memory>
#include <sstream>
#include <thread>

#include "strongauth/error.hpp"
#include "strongauth/files.hpp"
#include "strongauth/harness.hpp"

namespace fs = std::filesystem;
using namespace strongauth;

namespace {

enum Exit : int {
    kOk = 0,
    kWrongSecret = 1,
    kUnknownIdentity = 2,
    kServerRejected = 3,
    kTransport = 4,
    kAttackSucceeded = 5,
    kUsage = 64,
    kDataError = 65,
    kNoInput = 66,
};

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::wrong_secret: return kWrongSecret;
        case Errc::unknown_identity: return kUnknownIdentity;
        case Errc::server_rejected:
        case Errc::certificate: return kServerRejected;
        case Errc::connection: return kTransport;
        case Errc::parse:
        case Errc::malformed_message: return kDataError;
        case Errc::io: return kNoInput;
        default: return kUsage;
    }
}

struct Options {
    std::string store = "strongauth.store";
    std::string db = "strongauth.db";
    std::string server = "127.0.0.1:7443";
    std::string listen = "127.0.0.1:7443";
    std::string key;
    std::string cert;
    std::string ca;
    std::string domain = "example.com";
    std::uint32_t iterations = crypto::kDefaultKdfIterations;
    bool iterations_set = false;
    std::string wordlist;
    std::string seed;
    std::string id;
    std::string file;
    std::string scenario;
};

crypto::KdfPolicy kdf_policy() {
#ifdef STRONGAUTH_TEST_HOOKS
    return crypto::KdfPolicy::allow_weak_for_tests;
#else
    return crypto::KdfPolicy::production;
#endif
}

std::unique_ptr<Rng> make_rng([[maybe_unused]] const Options& o) {
#ifdef STRONGAUTH_TEST_HOOKS
    if (!o.seed.empty()) return std::make_unique<SeededRng>(from_hex(o.seed));
#endif
    return std::make_unique<SystemRng>();
}

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw Error(Errc::usage, std::string(flag) + " is required");
    if (!fs::exists(path)) throw Error(Errc::io, path + ": no such file");
}

/// Reads a secret without echo from the terminal, or one line from a pipe.
/// Test builds also take it from the environment.
std::string read_secret(const char* prompt, [[maybe_unused]] const char* env_name) {
#ifdef STRONGAUTH_TEST_HOOKS
    if (const char* v = std::getenv(env_name)) return v;
#endif
    std::string secret;
    if (::isatty(STDIN_FILENO)) {
        std::cerr << prompt << std::flush;
        termios saved{};
        ::tcgetattr(STDIN_FILENO, &saved);
        termios silent = saved;
        silent.c_lflag &= ~static_cast<tcflag_t>(ECHO);
        ::tcsetattr(STDIN_FILENO, TCSAFLUSH, &silent);
        std::getline(std::cin, secret);
        ::tcsetattr(STDIN_FILENO, TCSAFLUSH, &saved);
        std::cerr << "\n";
    } else {
        std::getline(std::cin, secret);
    }
    if (!secret.empty() && secret.back() == '\r') secret.pop_back();
    if (secret.empty()) throw Error(Errc::validation, "no secret given");
    return secret;
}

Block32 read_authority(const std::string& path) {
    require_file(path, "--ca");
    auto text = read_text_file(path);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    auto raw = from_hex(text);
    if (raw.size() != 32) throw Error(Errc::parse, path + ": authority key must be 32 bytes of hex");
    return to_block(raw);
}

// --- client commands ---------------------------------------------------------

struct ClientSetup {
    std::unique_ptr<Rng> rng;
    client::CredentialStore store;
    ClientContext ctx;
    HostPort server;
};

ClientSetup client_setup(const Options& o) {
    protocol::validate_identity(o.id, o.domain);
    require_file(o.cert, "--cert");
    ClientSetup s;
    s.server = HostPort::parse(o.server);
    s.store = client::CredentialStore::open(o.store);
    s.rng = make_rng(o);
    s.ctx.config = {o.domain, o.iterations, kdf_policy()};
    s.ctx.server_certificate = Certificate::parse(read_text_file(o.cert));
    s.ctx.authority_public = read_authority(o.ca);
    s.ctx.rng = s.rng.get();
    check_certificate(s.ctx.server_certificate, s.ctx.authority_public, o.domain);
    return s;
}

int cmd_register(const Options& o) {
    auto s = client_setup(o);
    s.ctx.store = &s.store;
    auto secret = read_secret("Secret: ", "STRONGAUTH_SECRET");
    auto conn = tcp_connect(s.server);
    ClientFlow(*conn, s.ctx).enroll(o.id, secret);
    s.store.save();
    std::cout << "registered\n";
    return kOk;
}

int cmd_login(const Options& o) {
    auto s = client_setup(o);
    s.ctx.store = &s.store;
    auto secret = read_secret("Secret: ", "STRONGAUTH_SECRET");
    auto conn = tcp_connect(s.server);
    auto sk = ClientFlow(*conn, s.ctx).login(o.id, secret);
    std::cout << "authenticated " << protocol::fingerprint(sk) << "\n";
    return kOk;
}

int cmd_renew(const Options& o) {
    auto s = client_setup(o);
    s.ctx.store = &s.store;
    auto secret = read_secret("Current secret: ", "STRONGAUTH_SECRET");
    auto new_secret = read_secret("New secret: ", "STRONGAUTH_NEW_SECRET");
    auto conn = tcp_connect(s.server);
    ClientFlow flow(*conn, s.ctx);
    flow.login(o.id, secret);
    flow.renew(new_secret);
    s.store.save();
    std::cout << "renewed\n";
    return kOk;
}

int cmd_export(const Options& o) {
    require_file(o.store, "--store");
    client::export_store(client::CredentialStore::open(o.store), o.file);
    std::cout << "exported\n";
    return kOk;
}

int cmd_import(const Options& o) {
    require_file(o.file, "FILE");
    auto imported = client::import_store(o.file);
    auto store = client::CredentialStore::open(o.store);
    for (const auto& [digest, record] : imported.records()) store.put(record);
    store.save();
    std::cout << "imported " << imported.size() << " records\n";
    return kOk;
}

// --- server ------------------------------------------------------------------

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

int cmd_keygen(const Options& o) {
    if (o.key.empty() || o.cert.empty() || o.ca.empty()) {
        throw Error(Errc::usage, "keygen needs --key, --cert and --ca output paths");
    }
    auto rng = make_rng(o);
    auto authority = crypto::gen_signature_keypair(*rng);
    auto keys = crypto::gen_transport_keypair(*rng);
    write_text_file_atomic(o.key, server::ServerIdentity::serialize_keys(keys));
    fs::permissions(o.key, fs::perms::owner_read | fs::perms::owner_write);
    write_text_file_atomic(o.cert, Certificate::issue(authority, o.domain, keys.public_key).serialize());
    write_text_file_atomic(o.ca, to_hex(authority.public_key) + "\n");
    secure_wipe(authority.private_key);
    secure_wipe(keys.private_key);
    std::cout << "wrote " << o.key << ", " << o.cert << ", " << o.ca << "\n";
    return kOk;
}

int cmd_serve(const Options& o) {
    require_file(o.key, "--key");
    require_file(o.cert, "--cert");
    auto identity = server::ServerIdentity::load(o.key, o.cert, o.domain);
    auto rng = std::shared_ptr<Rng>(make_rng(o));
    auto db = std::make_shared<server::RegistrationDB>(server::RegistrationDB::open(o.db));
    auto endpoint = std::make_shared<ServerEndpoint>(std::move(identity), *db, *rng);
    TcpListener listener(HostPort::parse(o.listen));

    struct sigaction sa {};
    sa.sa_handler = on_signal;
    ::sigemptyset(&sa.sa_mask);
    ::sigaction(SIGINT, &sa, nullptr);
    ::sigaction(SIGTERM, &sa, nullptr);

    std::cout << "listening on " << HostPort{HostPort::parse(o.listen).host, listener.port()}.to_string() << std::endl;

    struct Worker {
        std::thread thread;
        std::shared_ptr<std::atomic<bool>> done;
    };
    std::list<Worker> workers;
    auto reap = [&] {
        for (auto it = workers.begin(); it != workers.end();) {
            if (*it->done) {
                it->thread.join();
                it = workers.erase(it);
            } else {
                ++it;
            }
        }
    };

    while (!g_stop) {
        auto conn = listener.accept(200);
        reap();
        if (!conn) continue;
        auto done = std::make_shared<std::atomic<bool>>(false);
        std::shared_ptr<Stream> stream(std::move(conn));
        workers.push_back({std::thread([endpoint, db, rng, stream, done] {
                               try {
                                   endpoint->serve(*stream);
                               } catch (const std::exception& e) {
                                   std::cerr << "connection error: " << e.what() << "\n";
                               }
                               *done = true;
                           }),
                           done});
    }

    std::cerr << "shutting down\n";
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (!workers.empty() && std::chrono::steady_clock::now() < deadline) {
        reap();
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    // Stragglers keep the shared state alive; every db write is already on disk.
    for (auto& w : workers) w.thread.detach();
    return kOk;
}

// --- attack scenarios ---------------------------------------------------------

harness::DeploymentOptions deployment_options(const Options& o) {
    harness::DeploymentOptions d;
    d.domain = o.domain;
    d.kdf_iterations = o.iterations_set ? o.iterations : crypto::kMinKdfIterations;
    d.kdf_policy = kdf_policy();
#ifdef STRONGAUTH_TEST_HOOKS
    if (!o.seed.empty()) {
        auto raw = from_hex(o.seed);
        std::uint64_t seed = 0;
        for (auto b : raw) seed = (seed << 8) | b;
        d.seed = seed;
    }
#endif
    return d;
}

std::vector<std::string> load_wordlist(const std::string& path) {
    require_file(path, "--wordlist");
    std::vector<std::string> words;
    std::istringstream in(read_text_file(path));
    std::string w;
    while (std::getline(in, w)) {
        if (!w.empty() && w.back() == '\r') w.pop_back();
        if (!w.empty()) words.push_back(w);
    }
    if (words.empty()) throw Error(Errc::parse, path + ": wordlist is empty");
    return words;
}

int cmd_attack(const Options& o) {
    using namespace harness;
    static const char* kVictimSecret = "victim-secret-0451";
    std::vector<AttackReport> reports;
    auto opts = deployment_options(o);

    if (o.scenario == "replay") {
        Deployment d(opts);
        d.enroll("victim", kVictimSecret);
        auto run = run_happy_path(d, "victim", kVictimSecret);
        reports.push_back(run_replay(d, run.transcript, 100));
        reports.push_back(run_replay_within_session(d, "victim", kVictimSecret));
    } else if (o.scenario == "bitflip") {
        Deployment d(opts);
        d.enroll("victim", kVictimSecret);
        std::size_t refused = 0;
        std::size_t total = 0;
        for (auto target : {FlipTarget::login_prove, FlipTarget::login_challenge, FlipTarget::renew_request}) {
            auto r = run_bitflip_all(d, "victim", kVictimSecret, target);
            total += payload_bits(target);
            if (r.rejected()) refused += payload_bits(target);
            reports.push_back(r);
        }
        AttackReport summary;
        summary.scenario = "bitflip";
        summary.outcome = refused == total ? Outcome::attack_rejected : Outcome::attack_succeeded;
        summary.detail = std::to_string(refused) + "/" + std::to_string(total) + " positions refused";
        reports.push_back(summary);
    } else if (o.scenario == "mitm") {
        Deployment d(opts);
        d.enroll("victim", kVictimSecret);
        reports.push_back(run_mitm_forged_cert(d, "victim", kVictimSecret, 100));
    } else if (o.scenario == "rdleak") {
        Deployment d(opts);
        std::vector<Bytes> plaintexts;
        std::optional<HappyPathResult> sample;
        for (int i = 0; i < 10; ++i) {
            auto id = "member" + std::to_string(i);
            auto secret = std::string(kVictimSecret) + "-" + std::to_string(i);
            d.enroll(id, secret);
            auto run = run_happy_path(d, id, secret);
            for (ByteView p : {as_bytes(id), as_bytes(secret), ByteView(run.session.usk), ByteView(run.session.upk)}) {
                plaintexts.push_back(to_bytes(p));
            }
            if (!sample) sample = std::move(run);
        }
        LeakProbeOptions probe;
        probe.plaintexts = std::move(plaintexts);
        probe.files = {d.db().serialize(), d.store().serialize()};
        reports.push_back(
            run_rd_leak_probe(d, protocol::id_digest("member0", o.domain), signature_sample(*sample), probe));
    } else if (o.scenario == "dictionary") {
        auto words = o.wordlist.empty() ? synthetic_wordlist(1000) : load_wordlist(o.wordlist);
        const auto& planted = words[words.size() / 2];
        Deployment d(opts);
        d.enroll("weak", planted);
        d.enroll("strong", to_hex(system_rng().bytes(12)));
        DictionaryOptions dopts;
        dopts.iterations = opts.kdf_iterations;
        dopts.policy = opts.kdf_policy;
        reports.push_back(run_offline_dictionary(d.store(), words, dopts, planted).report);
    } else {
        throw Error(Errc::usage, "unknown scenario '" + o.scenario + "'");
    }

    bool all_rejected = true;
    for (const auto& r : reports) {
        std::cout << r.line() << "\n";
        all_rejected = all_rejected && r.rejected();
    }
    return all_rejected ? kOk : kAttackSucceeded;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mutual authentication with a masked verifier table"};
    app.require_subcommand(1);
    Options o;

    auto add_client_flags = [&](CLI::App* sub) {
        sub->add_option("id", o.id, "Identity (1..31 bytes of UTF-8)")->required();
        sub->add_option("--store", o.store, "Credential store file")->capture_default_str();
        sub->add_option("--server", o.server, "Server address HOST:PORT")->capture_default_str();
        sub->add_option("--cert", o.cert, "Server certificate file")->required();
        sub->add_option("--ca", o.ca, "Pinned authority public key file")->required();
        sub->add_option("--domain", o.domain, "Server domain")->capture_default_str();
        sub->add_option("--iterations", o.iterations, "KDF iterations")->capture_default_str();
    };
    auto add_seed = [&]([[maybe_unused]] CLI::App* sub) {
#ifdef STRONGAUTH_TEST_HOOKS
        sub->add_option("--seed", o.seed, "Deterministic randomness (test builds only)");
#endif
    };

    auto* keygen = app.add_subcommand("keygen", "Create a server key, its certificate and an authority key");
    keygen->add_option("--key", o.key, "Server key output")->required();
    keygen->add_option("--cert", o.cert, "Certificate output")->required();
    keygen->add_option("--ca", o.ca, "Authority public key output")->required();
    keygen->add_option("--domain", o.domain, "Domain to certify")->capture_default_str();
    add_seed(keygen);

    auto* serve = app.add_subcommand("serve", "Run the authentication server");
    serve->add_option("--listen", o.listen, "Listen address HOST:PORT (port 0 picks one)")->capture_default_str();
    serve->add_option("--key", o.key, "Server key file")->required();
    serve->add_option("--cert", o.cert, "Server certificate file")->required();
    serve->add_option("--db", o.db, "Registration database file")->capture_default_str();
    serve->add_option("--domain", o.domain, "Server domain")->capture_default_str();
    add_seed(serve);

    auto* reg = app.add_subcommand("register", "Enroll an identity");
    add_client_flags(reg);
    add_seed(reg);
    auto* login = app.add_subcommand("login", "Authenticate and print the session key fingerprint");
    add_client_flags(login);
    add_seed(login);
    auto* renew = app.add_subcommand("renew", "Log in and replace the credential under a new secret");
    add_client_flags(renew);
    add_seed(renew);

    auto* exp = app.add_subcommand("export", "Back up the credential store");
    exp->add_option("file", o.file, "Destination file")->required();
    exp->add_option("--store", o.store, "Credential store file")->capture_default_str();
    auto* imp = app.add_subcommand("import", "Merge a backup into the credential store");
    imp->add_option("file", o.file, "Backup file")->required();
    imp->add_option("--store", o.store, "Credential store file")->capture_default_str();

    auto* attack = app.add_subcommand("attack", "Run an attack scenario against an in-process deployment");
    attack->add_option("scenario", o.scenario, "replay | bitflip | mitm | rdleak | dictionary")->required();
    attack->add_option("--domain", o.domain, "Deployment domain")->capture_default_str();
    auto* iters = attack->add_option("--iterations", o.iterations, "KDF iterations of the deployment's store");
    attack->add_option("--wordlist", o.wordlist, "Word list for the dictionary scenario");
    add_seed(attack);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kOk : kUsage;
    }
    o.iterations_set = iters->count() > 0;

    if (!o.seed.empty()) {
        try {
            if (from_hex(o.seed).empty()) throw Error(Errc::parse, "empty");
        } catch (const Error&) {
            std::cerr << "strongauth: --seed must be non-empty hex\n";
            return kUsage;
        }
    }

    try {
        if (*keygen) return cmd_keygen(o);
        if (*serve) return cmd_serve(o);
        if (*reg) return cmd_register(o);
        if (*login) return cmd_login(o);
        if (*renew) return cmd_renew(o);
        if (*exp) return cmd_export(o);
        if (*imp) return cmd_import(o);
        if (*attack) return cmd_attack(o);
    } catch (const Error& e) {
        std::cerr << "strongauth: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "strongauth: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
