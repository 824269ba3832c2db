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

#include "strongauth/protocol.hpp"

#include <algorithm>
#include <string_view>

#include "strongauth/error.hpp"

namespace strongauth::protocol {

IdentityBlock IdentityBlock::encode(std::string_view id) {
    if (id.empty()) throw Error(Errc::validation, "identity must not be empty");
    if (id.size() > kMaxIdentityBytes) throw Error(Errc::validation, "identity longer than 31 bytes");
    if (!valid_utf8(as_bytes(id))) throw Error(Errc::validation, "identity is not valid UTF-8");
    Block32 b{};
    b[0] = static_cast<std::uint8_t>(id.size());
    std::copy(id.begin(), id.end(), b.begin() + 1);
    return IdentityBlock(b);
}

std::optional<IdentityBlock> IdentityBlock::from_block(const Block32& block) {
    std::size_t len = block[0];
    if (len == 0 || len > kMaxIdentityBytes) return std::nullopt;
    if (!std::all_of(block.begin() + 1 + static_cast<std::ptrdiff_t>(len), block.end(),
                     [](std::uint8_t b) { return b == 0; })) {
        return std::nullopt;
    }
    if (!valid_utf8(ByteView(block).subspan(1, len))) return std::nullopt;
    return IdentityBlock(block);
}

std::string IdentityBlock::id() const { return to_string(ByteView(block_).subspan(1, block_[0])); }

void validate_identity(std::string_view id, std::string_view domain) {
    if (id.empty()) throw Error(Errc::validation, "identity must not be empty");
    if (id.size() > kMaxIdentityBytes) throw Error(Errc::validation, "identity longer than 31 bytes");
    if (!valid_utf8(as_bytes(id))) throw Error(Errc::validation, "identity is not valid UTF-8");
    if (domain.empty()) throw Error(Errc::validation, "domain must not be empty");
}

Digest32 id_digest(std::string_view id, std::string_view domain) {
    validate_identity(id, domain);
    return crypto::hash(ByteWriter{}.raw(as_bytes(id)).u8(0x00).raw(as_bytes(domain)).bytes());
}

SymKey32 derive_session_secret(const Block32& premaster, ByteView session_id, const Block32& spk) {
    return crypto::hash(ByteWriter{}
                            .raw(as_bytes("strongauth-session-secret"))
                            .raw(premaster)
                            .raw(session_id)
                            .raw(spk)
                            .bytes());
}

Digest32 proof_digest(const IdentityBlock& id, std::string_view domain, const Block32& upk, const Nonce32& rb,
                      const SymKey32& ss) {
    return crypto::hash(
        ByteWriter{}.raw(id.block()).prefixed16(as_bytes(domain)).raw(upk).raw(rb).raw(ss).bytes());
}

Digest32 challenge_digest(const Nonce32& rb, const Nonce32& rw, const SymKey32& ss, const Block32& upk) {
    return crypto::hash(ByteWriter{}.raw(rb).raw(rw).raw(ss).raw(upk).bytes());
}

SymKey32 session_key(const IdentityBlock& id, std::string_view domain, const Block32& upk, const Nonce32& rb,
                     const Nonce32& rw, const SymKey32& ss) {
    return crypto::hash(
        ByteWriter{}.raw(id.block()).prefixed16(as_bytes(domain)).raw(upk).raw(rb).raw(rw).raw(ss).bytes());
}

Digest32 renewal_digest(const SymKey32& sk, const Block32& upk, const Block32& upk_new) {
    return crypto::hash(ByteWriter{}.raw(sk).raw(upk).raw(upk_new).bytes());
}

std::string fingerprint(const SymKey32& sk) {
    auto h = crypto::hash(sk);
    return to_hex(ByteView(h).first(8));
}

bool leaks_substring(ByteView haystack, ByteView secret, std::size_t min_len) {
    if (secret.size() < min_len || haystack.size() < min_len) return false;
    auto hex = to_hex(secret);
    auto hex_bytes = as_bytes(hex);
    for (std::size_t i = 0; i + min_len <= secret.size(); ++i) {
        auto window = secret.subspan(i, min_len);
        if (std::search(haystack.begin(), haystack.end(), window.begin(), window.end()) != haystack.end()) {
            return true;
        }
        // Hex windows aligned to the start of a byte.
        auto hex_window = hex_bytes.subspan(2 * i, 2 * min_len);
        if (std::search(haystack.begin(), haystack.end(), hex_window.begin(), hex_window.end()) != haystack.end()) {
            return true;
        }
    }
    return false;
}

}  // namespace strongauth::protocol
