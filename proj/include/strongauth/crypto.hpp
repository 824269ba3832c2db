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

// Cryptographic primitives consumed by the protocol. The default (and only)
// suite is
//
//   hash           SHA-256
//   kdf            PBKDF2-HMAC-SHA-256, 100000 iterations, floor 1000
//   aead           AES-256-GCM, 12-byte nonce stored in front, 16-byte tag
//   signature      Ed25519
//   key transport  X25519 ephemeral agreement + AES-256-GCM
//
// Every key encoding is 32 bytes so the XOR masks line up without padding.

#include <cstdint>
#include <string_view>

#include "strongauth/bytes.hpp"
#include "strongauth/random.hpp"

namespace strongauth::crypto {

inline constexpr std::uint32_t kDefaultKdfIterations = 100000;
inline constexpr std::uint32_t kMinKdfIterations = 1000;
inline constexpr std::size_t kSaltSize = 8;
inline constexpr std::size_t kAeadNonceSize = 12;
inline constexpr std::size_t kAeadTagSize = 16;
inline constexpr std::size_t kMaxTransportPayload = 4096;
/// ephemeral public key + nonce + tag
inline constexpr std::size_t kTransportOverhead = 32 + kAeadNonceSize + kAeadTagSize;

struct SaltValue {
    Bytes bytes;

    static SaltValue generate(Rng& rng = system_rng());
    /// Throws Errc::validation when shorter than 64 bits.
    static SaltValue from(ByteView v);

    friend bool operator==(const SaltValue&, const SaltValue&) = default;
};

/// nonce(12) || ciphertext || tag(16) when serialized.
struct SealedBlob {
    std::array<std::uint8_t, kAeadNonceSize> nonce{};
    Bytes ciphertext;
    std::array<std::uint8_t, kAeadTagSize> tag{};

    Bytes serialize() const;
    /// Throws Errc::parse when shorter than nonce + tag.
    static SealedBlob parse(ByteView v);

    friend bool operator==(const SealedBlob&, const SealedBlob&) = default;
};

struct SignatureKeyPair {
    Block32 private_key;  // Ed25519 seed
    Block32 public_key;
};

struct TransportKeyPair {
    Block32 private_key;  // X25519 scalar
    Block32 public_key;
};

enum class KdfPolicy { production, allow_weak_for_tests };

Digest32 hash(ByteView data);

SymKey32 kdf(std::string_view secret, const SaltValue& salt, std::uint32_t iterations,
             KdfPolicy policy = KdfPolicy::production);

SealedBlob aead_seal(const SymKey32& key, ByteView plaintext, Rng& rng = system_rng());
/// Throws Errc::auth_failure on a wrong key or any modification.
Bytes aead_open(const SymKey32& key, const SealedBlob& blob);

SignatureKeyPair gen_signature_keypair(Rng& rng = system_rng());
Block32 signature_public_key(const Block32& private_key);
SignatureValue sign(const Block32& private_key, const Digest32& digest);
/// Malformed public keys verify as false.
bool verify(const Block32& public_key, const Digest32& digest, const SignatureValue& sig) noexcept;

TransportKeyPair gen_transport_keypair(Rng& rng = system_rng());
Block32 transport_public_key(const Block32& private_key);
/// Output layout: ephemeral public(32) || nonce(12) || ciphertext || tag(16).
Bytes key_transport_seal(const Block32& spk, ByteView payload, Rng& rng = system_rng());
/// Throws Errc::open_failure on a wrong key or tampered bytes.
Bytes key_transport_open(const Block32& ssk, ByteView sealed);

Bytes gen_random(std::size_t length, Rng& rng = system_rng());

/// Throws Errc::usage on length mismatch.
Bytes xor_bytes(ByteView a, ByteView b);

/// hash(seed || 0u32be) || hash(seed || 1u32be) || ... truncated to `length`.
Bytes mask_expand(ByteView seed, std::size_t length);

/// Compare without early exit.
bool equal_ct(ByteView a, ByteView b) noexcept;

}  // namespace strongauth::crypto
