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

#include "strongauth/certificate.hpp"

#include "strongauth/error.hpp"

namespace strongauth {

namespace {

Digest32 certificate_digest(std::string_view domain, const Block32& spk) {
    return crypto::hash(
        ByteWriter{}.raw(as_bytes("strongauth-certificate")).prefixed16(as_bytes(domain)).raw(spk).bytes());
}

}  // namespace

Certificate Certificate::issue(const crypto::SignatureKeyPair& authority, std::string domain, const Block32& spk) {
    Certificate cert;
    cert.signature = crypto::sign(authority.private_key, certificate_digest(domain, spk));
    cert.domain = std::move(domain);
    cert.spk = spk;
    return cert;
}

bool Certificate::verify(const Block32& authority_public) const noexcept {
    try {
        return crypto::verify(authority_public, certificate_digest(domain, spk), signature);
    } catch (...) {
        return false;
    }
}

std::string Certificate::serialize() const {
    return domain + ":" + to_hex(spk) + ":" + to_hex(signature) + "\n";
}

Certificate Certificate::parse(std::string_view text) {
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
    auto first = text.find(':');
    auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
    if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos) {
        throw Error(Errc::certificate, "certificate must be domain:spk:signature");
    }
    Certificate cert;
    cert.domain = std::string(text.substr(0, first));
    auto spk = from_hex(text.substr(first + 1, second - first - 1));
    auto sig = from_hex(text.substr(second + 1));
    if (cert.domain.empty() || spk.size() != cert.spk.size() || sig.size() != cert.signature.size()) {
        throw Error(Errc::certificate, "certificate fields have the wrong size");
    }
    std::copy(spk.begin(), spk.end(), cert.spk.begin());
    std::copy(sig.begin(), sig.end(), cert.signature.begin());
    return cert;
}

void check_certificate(const Certificate& cert, const Block32& authority_public, std::string_view domain) {
    if (!cert.verify(authority_public)) throw Error(Errc::certificate, "server certificate does not verify");
    if (cert.domain != domain) {
        throw Error(Errc::certificate, "certificate is for '" + cert.domain + "', expected '" + std::string(domain) + "'");
    }
}

}  // namespace strongauth
