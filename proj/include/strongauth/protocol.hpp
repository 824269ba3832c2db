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

// Hash preimages and fixed-width encodings shared by both protocol roles.
// Both sides must build these byte-for-byte identically, so they live in one
// place.
//
// Field layout inside every preimage: 32- and 64-byte fields are raw; the
// domain is the only variable-width field and carries a 2-byte big-endian
// length prefix.

#include <optional>
#include <string>
#include <string_view>

#include "strongauth/bytes.hpp"
#include "strongauth/crypto.hpp"

namespace strongauth::protocol {

inline constexpr std::size_t kMaxIdentityBytes = 31;

/// length(1) || utf8(id) || zero padding, 32 bytes total.
class IdentityBlock {
public:
    /// Throws Errc::validation on empty, oversize or non-UTF-8 identities.
    static IdentityBlock encode(std::string_view id);
    /// nullopt on a bad length byte, nonzero padding or invalid UTF-8.
    static std::optional<IdentityBlock> from_block(const Block32& block);

    const Block32& block() const noexcept { return block_; }
    std::string id() const;

    friend bool operator==(const IdentityBlock&, const IdentityBlock&) = default;

private:
    explicit IdentityBlock(const Block32& b) : block_(b) {}
    Block32 block_{};
};

/// Throws Errc::validation on an empty or oversize id, or an empty domain.
void validate_identity(std::string_view id, std::string_view domain);

/// H(utf8(id) || 0x00 || utf8(domain)); the record key on both sides.
Digest32 id_digest(std::string_view id, std::string_view domain);

/// Session secret both sides use as SS once the server has answered
/// SessionInit: H(label || premaster || session_id || spk). The session id
/// makes every server session fresh and the spk binds SS to the key the
/// client actually encrypted to.
SymKey32 derive_session_secret(const Block32& premaster, ByteView session_id, const Block32& spk);

/// Signed digest of the login proof, field order ID, d, UPK, RB, SS.
Digest32 proof_digest(const IdentityBlock& id, std::string_view domain, const Block32& upk, const Nonce32& rb,
                      const SymKey32& ss);

/// M = H(RB || RW || SS || UPK).
Digest32 challenge_digest(const Nonce32& rb, const Nonce32& rw, const SymKey32& ss, const Block32& upk);

/// SK = H(ID || d || UPK || RB || RW || SS).
SymKey32 session_key(const IdentityBlock& id, std::string_view domain, const Block32& upk, const Nonce32& rb,
                     const Nonce32& rw, const SymKey32& ss);

/// Y = H(SK || UPK || UPK').
Digest32 renewal_digest(const SymKey32& sk, const Block32& upk, const Block32& upk_new);

/// First 8 bytes of H(SK), hex. The only form in which SK is ever displayed.
std::string fingerprint(const SymKey32& sk);

/// Scans `haystack` for any `min_len`-byte window of `secret`, both raw and as
/// lowercase hex. Secrets shorter than `min_len` never match.
bool leaks_substring(ByteView haystack, ByteView secret, std::size_t min_len = 8);

}  // namespace strongauth::protocol
