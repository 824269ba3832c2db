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

#include <string>

#include "strongauth/bytes.hpp"
#include "strongauth/crypto.hpp"

namespace strongauth {

/// A minimal server certificate: an authority's Ed25519 signature binding a
/// domain name to a transport public key. Stands in for the HTTPS server
/// authentication the protocol assumes.
struct Certificate {
    std::string domain;
    Block32 spk{};
    SignatureValue signature{};

    static Certificate issue(const crypto::SignatureKeyPair& authority, std::string domain, const Block32& spk);

    /// True iff the signature verifies under `authority_public`.
    bool verify(const Block32& authority_public) const noexcept;

    /// "domain:spk_hex:sig_hex\n"
    std::string serialize() const;
    static Certificate parse(std::string_view text);

    friend bool operator==(const Certificate&, const Certificate&) = default;
};

/// Throws Errc::certificate unless `cert` verifies under the pinned authority
/// and names `domain`.
void check_certificate(const Certificate& cert, const Block32& authority_public, std::string_view domain);

}  // namespace strongauth
