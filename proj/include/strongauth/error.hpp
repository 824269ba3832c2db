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

#include <stdexcept>
#include <string>
#include <string_view>

namespace strongauth {

enum class Errc {
    usage,              // caller violated a precondition (length mismatch etc.)
    validation,         // bad user input: empty secret, oversize identity
    configuration,      // e.g. KDF iterations below the floor
    auth_failure,       // AEAD open failed
    open_failure,       // key transport open failed
    wrong_secret,
    unknown_identity,
    already_registered,
    server_rejected,
    state,
    malformed_message,
    connection,
    parse,
    io,
    certificate,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Raised by the credential-store and registration-database parsers.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(Errc::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace strongauth
