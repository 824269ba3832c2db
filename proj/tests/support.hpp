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

// Shared helpers for the unit and acceptance tests.

#include <random>
#include <string>

#include "strongauth/wire.hpp"

namespace strongauth::test_support {

inline Block32 random_block(std::mt19937_64& g) {
    Block32 out;
    for (auto& b : out) b = static_cast<std::uint8_t>(g());
    return out;
}

/// ASCII or multi-byte UTF-8 identity of 1..31 bytes.
inline std::string random_identity(std::mt19937_64& g) {
    static constexpr std::string_view pieces[] = {"a", "z", "7", ".", "_", "\xc3\xa9", "\xe2\x82\xac",
                                                  "\xf0\x9f\x94\x91", "user", "@"};
    std::string id;
    auto target = 1 + g() % wire::kMaxIdentityLength;
    while (id.size() < target) {
        auto piece = pieces[g() % std::size(pieces)];
        if (id.size() + piece.size() > wire::kMaxIdentityLength) break;
        id += piece;
    }
    if (id.empty()) id = "u";
    return id;
}

inline wire::Message random_message(std::mt19937_64& g) {
    switch (g() % 9) {
        case 0: return wire::RegisterRequest{random_identity(g), random_block(g)};
        case 1: return wire::RegisterAck{};
        case 2: {
            Bytes sealed(g() % 200);
            for (auto& b : sealed) b = static_cast<std::uint8_t>(g());
            return wire::SessionInit{sealed};
        }
        case 3: {
            wire::SessionAck m;
            for (auto& b : m.session_id) b = static_cast<std::uint8_t>(g());
            return m;
        }
        case 4: {
            wire::LoginProve m{random_block(g), random_block(g), {}};
            for (auto& b : m.e) b = static_cast<std::uint8_t>(g());
            return m;
        }
        case 5: return wire::LoginChallenge{random_block(g), random_block(g)};
        case 6: return wire::Reject{static_cast<wire::RejectCode>(1 + g() % 3)};
        case 7: return wire::RenewRequest{random_block(g), random_block(g)};
        default: return wire::RenewAck{};
    }
}

/// Either pure noise or a valid frame with one to four random edits.
inline Bytes mutated_frame(std::mt19937_64& g) {
    if (g() % 8 == 0) {
        Bytes noise(g() % 80);
        for (auto& b : noise) b = static_cast<std::uint8_t>(g());
        return noise;
    }
    Bytes frame = wire::encode(random_message(g));
    auto edits = 1 + g() % 4;
    for (std::size_t i = 0; i < edits; ++i) {
        switch (g() % 6) {
            case 0:
                if (!frame.empty()) frame[g() % frame.size()] ^= static_cast<std::uint8_t>(1u << (g() % 8));
                break;
            case 1:
                if (!frame.empty()) frame[g() % frame.size()] = static_cast<std::uint8_t>(g());
                break;
            case 2:
                if (!frame.empty()) frame.resize(g() % frame.size());
                break;
            case 3: frame.push_back(static_cast<std::uint8_t>(g())); break;
            case 4:
                if (frame.size() > wire::kHeaderSize) frame[wire::kHeaderSize] = static_cast<std::uint8_t>(g());
                break;
            default:
                if (frame.size() >= wire::kHeaderSize) frame[3] = static_cast<std::uint8_t>(frame[3] + (g() % 5) - 2);
                break;
        }
    }
    return frame;
}

}  // namespace strongauth::test_support
