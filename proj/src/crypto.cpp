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

#include "strongauth/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <memory>

#include "strongauth/error.hpp"

namespace strongauth::crypto {

namespace {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const noexcept { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* p) const noexcept { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* p) const noexcept { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* p) const noexcept { EVP_CIPHER_CTX_free(p); }
};

using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

[[noreturn]] void fail(const char* what) { throw Error(Errc::io, std::string("libcrypto: ") + what); }

PkeyPtr raw_private(int type, const Block32& key) {
    PkeyPtr p(EVP_PKEY_new_raw_private_key(type, nullptr, key.data(), key.size()));
    if (!p) fail("cannot load private key");
    return p;
}

Block32 raw_public_of(EVP_PKEY* p) {
    Block32 out;
    std::size_t len = out.size();
    if (EVP_PKEY_get_raw_public_key(p, out.data(), &len) != 1 || len != out.size()) {
        fail("cannot export public key");
    }
    return out;
}

using GcmNonce = std::array<std::uint8_t, kAeadNonceSize>;
using GcmTag = std::array<std::uint8_t, kAeadTagSize>;

void gcm_seal(const SymKey32& key, const GcmNonce& nonce, ByteView aad, ByteView plaintext,
              Bytes& ciphertext, GcmTag& tag) {
    CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("cipher context");
    int len = 0;
    ciphertext.resize(plaintext.size());
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1) {
        fail("gcm init");
    }
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
        fail("gcm aad");
    }
    if (!plaintext.empty() && EVP_EncryptUpdate(ctx.get(), ciphertext.data(), &len, plaintext.data(),
                                                static_cast<int>(plaintext.size())) != 1) {
        fail("gcm encrypt");
    }
    if (EVP_EncryptFinal_ex(ctx.get(), nullptr, &len) != 1) fail("gcm final");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(tag.size()), tag.data()) != 1) {
        fail("gcm tag");
    }
}

bool gcm_open(const SymKey32& key, const GcmNonce& nonce, ByteView aad, ByteView ciphertext,
              const GcmTag& tag, Bytes& plaintext) {
    CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("cipher context");
    int len = 0;
    plaintext.resize(ciphertext.size());
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1) {
        fail("gcm init");
    }
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
        return false;
    }
    if (!ciphertext.empty() && EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len, ciphertext.data(),
                                                 static_cast<int>(ciphertext.size())) != 1) {
        return false;
    }
    GcmTag expected = tag;
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(expected.size()),
                            expected.data()) != 1) {
        return false;
    }
    if (EVP_DecryptFinal_ex(ctx.get(), nullptr, &len) != 1) {
        secure_wipe(plaintext);
        plaintext.clear();
        return false;
    }
    return true;
}

SymKey32 transport_key(const Block32& shared, const Block32& ephemeral_public, const Block32& spk) {
    return hash(ByteWriter{}
                    .raw(as_bytes("strongauth-key-transport"))
                    .raw(shared)
                    .raw(ephemeral_public)
                    .raw(spk)
                    .bytes());
}

// Fails (returns false) on low-order peer points, which yield an all-zero secret.
bool x25519(const Block32& private_key, const Block32& peer_public, Block32& shared) {
    auto priv = raw_private(EVP_PKEY_X25519, private_key);
    PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(), peer_public.size()));
    if (!peer) return false;
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(priv.get(), nullptr));
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1) fail("derive init");
    if (EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1) return false;
    std::size_t len = shared.size();
    if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != shared.size()) return false;
    Block32 zero{};
    return !equal_ct(shared, zero);
}

}  // namespace

SaltValue SaltValue::generate(Rng& rng) { return SaltValue{rng.bytes(kSaltSize)}; }

SaltValue SaltValue::from(ByteView v) {
    if (v.size() < kSaltSize) throw Error(Errc::validation, "salt shorter than 64 bits");
    return SaltValue{to_bytes(v)};
}

Bytes SealedBlob::serialize() const {
    return ByteWriter{}.raw(nonce).raw(ciphertext).raw(tag).bytes();
}

SealedBlob SealedBlob::parse(ByteView v) {
    if (v.size() < kAeadNonceSize + kAeadTagSize) throw Error(Errc::parse, "sealed blob too short");
    SealedBlob blob;
    std::copy_n(v.begin(), kAeadNonceSize, blob.nonce.begin());
    blob.ciphertext.assign(v.begin() + kAeadNonceSize, v.end() - kAeadTagSize);
    std::copy(v.end() - kAeadTagSize, v.end(), blob.tag.begin());
    return blob;
}

Digest32 hash(ByteView data) {
    Digest32 out;
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
        fail("sha256");
    }
    return out;
}

SymKey32 kdf(std::string_view secret, const SaltValue& salt, std::uint32_t iterations, KdfPolicy policy) {
    if (iterations == 0 || (iterations < kMinKdfIterations && policy == KdfPolicy::production)) {
        throw Error(Errc::configuration, "kdf iteration count " + std::to_string(iterations) +
                                             " is below the minimum of " + std::to_string(kMinKdfIterations));
    }
    if (salt.bytes.size() < kSaltSize) throw Error(Errc::validation, "salt shorter than 64 bits");
    SymKey32 out;
    if (PKCS5_PBKDF2_HMAC(secret.data(), static_cast<int>(secret.size()), salt.bytes.data(),
                          static_cast<int>(salt.bytes.size()), static_cast<int>(iterations), EVP_sha256(),
                          static_cast<int>(out.size()), out.data()) != 1) {
        fail("pbkdf2");
    }
    return out;
}

SealedBlob aead_seal(const SymKey32& key, ByteView plaintext, Rng& rng) {
    SealedBlob blob;
    rng.fill(blob.nonce);
    gcm_seal(key, blob.nonce, {}, plaintext, blob.ciphertext, blob.tag);
    return blob;
}

Bytes aead_open(const SymKey32& key, const SealedBlob& blob) {
    Bytes plaintext;
    if (!gcm_open(key, blob.nonce, {}, blob.ciphertext, blob.tag, plaintext)) {
        throw Error(Errc::auth_failure, "authenticated decryption failed");
    }
    return plaintext;
}

SignatureKeyPair gen_signature_keypair(Rng& rng) {
    SignatureKeyPair kp;
    rng.fill(kp.private_key);
    kp.public_key = signature_public_key(kp.private_key);
    return kp;
}

Block32 signature_public_key(const Block32& private_key) {
    auto p = raw_private(EVP_PKEY_ED25519, private_key);
    return raw_public_of(p.get());
}

SignatureValue sign(const Block32& private_key, const Digest32& digest) {
    auto p = raw_private(EVP_PKEY_ED25519, private_key);
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, p.get()) != 1) fail("sign init");
    SignatureValue sig;
    std::size_t len = sig.size();
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, digest.data(), digest.size()) != 1 || len != sig.size()) {
        fail("sign");
    }
    return sig;
}

bool verify(const Block32& public_key, const Digest32& digest, const SignatureValue& sig) noexcept {
    PkeyPtr p(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(), public_key.size()));
    if (!p) return false;
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, p.get()) != 1) return false;
    return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), digest.data(), digest.size()) == 1;
}

TransportKeyPair gen_transport_keypair(Rng& rng) {
    TransportKeyPair kp;
    rng.fill(kp.private_key);
    kp.public_key = transport_public_key(kp.private_key);
    return kp;
}

Block32 transport_public_key(const Block32& private_key) {
    auto p = raw_private(EVP_PKEY_X25519, private_key);
    return raw_public_of(p.get());
}

Bytes key_transport_seal(const Block32& spk, ByteView payload, Rng& rng) {
    if (payload.size() > kMaxTransportPayload) {
        throw Error(Errc::usage, "key transport payload exceeds " + std::to_string(kMaxTransportPayload) + " bytes");
    }
    auto ephemeral = gen_transport_keypair(rng);
    Block32 shared;
    if (!x25519(ephemeral.private_key, spk, shared)) throw Error(Errc::usage, "invalid transport public key");
    auto key = transport_key(shared, ephemeral.public_key, spk);
    secure_wipe(shared);
    secure_wipe(ephemeral.private_key);

    GcmNonce nonce;
    rng.fill(nonce);
    Bytes ciphertext;
    GcmTag tag;
    gcm_seal(key, nonce, ephemeral.public_key, payload, ciphertext, tag);
    secure_wipe(key);
    return ByteWriter{}.raw(ephemeral.public_key).raw(nonce).raw(ciphertext).raw(tag).bytes();
}

Bytes key_transport_open(const Block32& ssk, ByteView sealed) {
    if (sealed.size() < kTransportOverhead) throw Error(Errc::open_failure, "sealed key too short");
    auto ephemeral_public = to_block(sealed.first(32));
    auto blob = SealedBlob::parse(sealed.subspan(32));
    Block32 shared;
    if (!x25519(ssk, ephemeral_public, shared)) throw Error(Errc::open_failure, "key agreement failed");
    auto key = transport_key(shared, ephemeral_public, transport_public_key(ssk));
    secure_wipe(shared);
    Bytes plaintext;
    bool ok = gcm_open(key, blob.nonce, ephemeral_public, blob.ciphertext, blob.tag, plaintext);
    secure_wipe(key);
    if (!ok) throw Error(Errc::open_failure, "sealed key failed authentication");
    return plaintext;
}

Bytes gen_random(std::size_t length, Rng& rng) { return rng.bytes(length); }

Bytes xor_bytes(ByteView a, ByteView b) {
    if (a.size() != b.size()) {
        throw Error(Errc::usage, "xor operands differ in length (" + std::to_string(a.size()) + " vs " +
                                     std::to_string(b.size()) + ")");
    }
    Bytes out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

Bytes mask_expand(ByteView seed, std::size_t length) {
    Bytes out;
    out.reserve(length + 32);
    for (std::uint32_t counter = 0; out.size() < length; ++counter) {
        auto block = hash(ByteWriter{}.raw(seed).u32be(counter).bytes());
        out.insert(out.end(), block.begin(), block.end());
    }
    out.resize(length);
    return out;
}

bool equal_ct(ByteView a, ByteView b) noexcept {
    if (a.size() != b.size()) return false;
    return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace strongauth::crypto
