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

#include "strongauth/bytes.hpp"

#include <openssl/crypto.h>

#include "strongauth/error.hpp"

namespace strongauth {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::usage: return "usage";
        case Errc::validation: return "validation";
        case Errc::configuration: return "configuration";
        case Errc::auth_failure: return "auth-failure";
        case Errc::open_failure: return "open-failure";
        case Errc::wrong_secret: return "wrong-secret";
        case Errc::unknown_identity: return "unknown-identity";
        case Errc::already_registered: return "already-registered";
        case Errc::server_rejected: return "server-rejected";
        case Errc::state: return "state";
        case Errc::malformed_message: return "malformed-message";
        case Errc::connection: return "connection";
        case Errc::parse: return "parse";
        case Errc::io: return "io";
        case Errc::certificate: return "certificate";
    }
    return "unknown";
}

Block32 to_block(ByteView v) {
    if (v.size() != 32) {
        throw Error(Errc::usage, "expected 32 bytes, got " + std::to_string(v.size()));
    }
    Block32 out;
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

Block32 operator^(const Block32& a, const Block32& b) noexcept {
    Block32 out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

std::string to_hex(ByteView v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(v.size() * 2);
    for (auto b : v) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace {

int hex_value(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw Error(Errc::parse, "odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::parse, "invalid hex character");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

bool valid_utf8(ByteView v) noexcept {
    std::size_t i = 0;
    while (i < v.size()) {
        std::uint8_t b = v[i];
        std::size_t extra;
        std::uint32_t cp;
        if (b < 0x80) {
            ++i;
            continue;
        } else if ((b & 0xe0) == 0xc0) {
            extra = 1;
            cp = b & 0x1f;
        } else if ((b & 0xf0) == 0xe0) {
            extra = 2;
            cp = b & 0x0f;
        } else if ((b & 0xf8) == 0xf0) {
            extra = 3;
            cp = b & 0x07;
        } else {
            return false;
        }
        if (v.size() - i <= extra) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((v[i + k] & 0xc0) != 0x80) return false;
            cp = (cp << 6) | (v[i + k] & 0x3f);
        }
        static constexpr std::uint32_t min_for_len[] = {0, 0x80, 0x800, 0x10000};
        if (cp < min_for_len[extra] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
        i += extra + 1;
    }
    return true;
}

void secure_wipe(std::span<std::uint8_t> buf) noexcept {
    OPENSSL_cleanse(buf.data(), buf.size());
}

ByteWriter& ByteWriter::prefixed16(ByteView v) {
    if (v.size() > 0xffff) throw Error(Errc::usage, "field longer than 65535 bytes");
    u16be(static_cast<std::uint16_t>(v.size()));
    return raw(v);
}

}  // namespace strongauth
