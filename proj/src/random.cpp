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

#include "strongauth/random.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <climits>

#include "strongauth/crypto.hpp"
#include "strongauth/error.hpp"

namespace strongauth {

void SystemRng::fill(std::span<std::uint8_t> out) {
    // RAND_bytes takes an int length.
    while (!out.empty()) {
        auto chunk = std::min<std::size_t>(out.size(), INT_MAX);
        if (RAND_bytes(out.data(), static_cast<int>(chunk)) != 1) {
            throw Error(Errc::io, "system randomness source failed");
        }
        out = out.subspan(chunk);
    }
}

Rng& system_rng() {
    static SystemRng rng;
    return rng;
}

#ifdef STRONGAUTH_TEST_HOOKS
SeededRng::SeededRng(ByteView seed) : seed_(seed.begin(), seed.end()) {}

SeededRng::SeededRng(std::uint64_t seed) {
    ByteWriter w;
    w.u32be(static_cast<std::uint32_t>(seed >> 32)).u32be(static_cast<std::uint32_t>(seed));
    seed_ = std::move(w).bytes();
}

void SeededRng::fill(std::span<std::uint8_t> out) {
    std::lock_guard lock(mutex_);
    for (auto& b : out) {
        if (pool_used_ == pool_.size()) {
            pool_ = crypto::hash(ByteWriter{}.raw(seed_).u32be(counter_++).bytes());
            pool_used_ = 0;
        }
        b = pool_[pool_used_++];
    }
}
#endif

}  // namespace strongauth
