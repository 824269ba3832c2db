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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strongauth {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Every operand of the protocol's XOR algebra is a 32-byte block: hash
/// outputs, public keys, session keys, nonces and the identity block.
using Block32 = std::array<std::uint8_t, 32>;

using Digest32 = Block32;
using SymKey32 = Block32;
using Nonce32 = Block32;

using SignatureValue = std::array<std::uint8_t, 64>;

inline ByteView as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(ByteView v) { return Bytes(v.begin(), v.end()); }

inline std::string to_string(ByteView v) { return std::string(v.begin(), v.end()); }

/// Throws Errc::usage if `v` is not exactly 32 bytes.
Block32 to_block(ByteView v);

/// Componentwise XOR of two equal-length blocks.
Block32 operator^(const Block32& a, const Block32& b) noexcept;

std::string to_hex(ByteView v);
/// Lowercase or uppercase input accepted; throws Errc::parse on odd length or
/// non-hex characters.
Bytes from_hex(std::string_view hex);

/// Strict UTF-8 check: rejects overlongs, surrogates and code points past U+10FFFF.
bool valid_utf8(ByteView v) noexcept;

/// Overwrites the buffer in a way the optimizer will not elide.
void secure_wipe(std::span<std::uint8_t> buf) noexcept;

/// Concatenates heterogeneous byte sources. Used to build hash preimages.
class ByteWriter {
public:
    ByteWriter& raw(ByteView v) {
        out_.insert(out_.end(), v.begin(), v.end());
        return *this;
    }
    ByteWriter& u8(std::uint8_t v) {
        out_.push_back(v);
        return *this;
    }
    ByteWriter& u16be(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
        return *this;
    }
    ByteWriter& u32be(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
        return *this;
    }
    /// 2-byte big-endian length prefix followed by the bytes.
    ByteWriter& prefixed16(ByteView v);

    const Bytes& bytes() const& noexcept { return out_; }
    Bytes bytes() && noexcept { return std::move(out_); }

private:
    Bytes out_;
};

}  // namespace strongauth
