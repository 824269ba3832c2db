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

#include <cstdint>
#include <mutex>

#include "strongauth/bytes.hpp"

namespace strongauth {

/// Source of every random byte the protocol consumes: SS, RB, RW, salts,
/// AEAD nonces, key material and session ids. Each protocol party owns one,
/// so tests can drive client and server from independent seeds.
class Rng {
public:
    virtual ~Rng() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    Bytes bytes(std::size_t length) {
        Bytes out(length);
        fill(out);
        return out;
    }
    Block32 block() {
        Block32 out;
        fill(out);
        return out;
    }
};

/// OpenSSL's CSPRNG. Thread safe.
class SystemRng final : public Rng {
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Process-wide system generator.
Rng& system_rng();

#ifdef STRONGAUTH_TEST_HOOKS
/// Deterministic stream SHA-256(seed || counter) for reproducible transcripts.
/// Compiled only into test builds.
class SeededRng final : public Rng {
public:
    explicit SeededRng(ByteView seed);
    explicit SeededRng(std::uint64_t seed);

    void fill(std::span<std::uint8_t> out) override;

private:
    std::mutex mutex_;
    Bytes seed_;
    std::uint32_t counter_ = 0;
    Block32 pool_{};
    std::size_t pool_used_ = pool_.size();
};
#endif

}  // namespace strongauth
