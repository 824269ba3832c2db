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

// Wire format. Every frame is
//
//   length   u32 big-endian, counts the type byte plus payload, 1..65536
//   type     u8
//   payload
//
// with payloads
//
//   0x01 RegisterRequest  idlen u8 (1..31) | id utf8 | upk 32
//   0x02 RegisterAck      -
//   0x10 SessionInit      len u16 | sealed_k
//   0x11 SessionAck       session_id 16
//   0x12 LoginProve       d 32 | f 32 | e 64
//   0x13 LoginChallenge   g 32 | m 32
//   0x14 Reject           code u8 (1..3)
//   0x20 RenewRequest     x 32 | y 32
//   0x21 RenewAck         -
//
// Each message has exactly one encoding; decode refuses anything else.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "strongauth/bytes.hpp"
#include "strongauth/transport.hpp"

namespace strongauth::wire {

inline constexpr std::size_t kHeaderSize = 4;
inline constexpr std::size_t kMaxFrameLength = 65536;
inline constexpr std::size_t kMaxIdentityLength = 31;

using SessionId = std::array<std::uint8_t, 16>;

enum class MsgType : std::uint8_t {
    register_request = 0x01,
    register_ack = 0x02,
    session_init = 0x10,
    session_ack = 0x11,
    login_prove = 0x12,
    login_challenge = 0x13,
    reject = 0x14,
    renew_request = 0x20,
    renew_ack = 0x21,
};

enum class RejectCode : std::uint8_t {
    identity_or_proof = 0x01,  // unknown identity and bad proof are deliberately merged
    bad_state = 0x02,
    malformed = 0x03,
};

struct RegisterRequest {
    std::string id;
    Block32 upk{};
    friend bool operator==(const RegisterRequest&, const RegisterRequest&) = default;
};
struct RegisterAck {
    friend bool operator==(const RegisterAck&, const RegisterAck&) = default;
};
struct SessionInit {
    Bytes sealed_k;
    friend bool operator==(const SessionInit&, const SessionInit&) = default;
};
struct SessionAck {
    SessionId session_id{};
    friend bool operator==(const SessionAck&, const SessionAck&) = default;
};
struct LoginProve {
    Block32 d{};
    Block32 f{};
    SignatureValue e{};
    friend bool operator==(const LoginProve&, const LoginProve&) = default;
};
struct LoginChallenge {
    Block32 g{};
    Block32 m{};
    friend bool operator==(const LoginChallenge&, const LoginChallenge&) = default;
};
struct Reject {
    RejectCode code = RejectCode::malformed;
    friend bool operator==(const Reject&, const Reject&) = default;
};
struct RenewRequest {
    Block32 x{};
    Block32 y{};
    friend bool operator==(const RenewRequest&, const RenewRequest&) = default;
};
struct RenewAck {
    friend bool operator==(const RenewAck&, const RenewAck&) = default;
};

using Message = std::variant<RegisterRequest, RegisterAck, SessionInit, SessionAck, LoginProve, LoginChallenge,
                             Reject, RenewRequest, RenewAck>;

MsgType type_of(const Message& m) noexcept;
std::string_view name_of(MsgType t) noexcept;

/// Full frame including the length header. Throws Errc::usage when a field
/// violates its length invariant.
Bytes encode(const Message& m);

/// Throws Errc::malformed_message on anything but a canonical frame.
Message decode(ByteView frame);

/// Reads one frame's bytes without interpreting the payload. Throws
/// Errc::connection if the stream ends mid-frame (or before it begins) and
/// Errc::malformed_message if the announced length is 0 or above the cap.
Bytes read_frame_bytes(Stream& stream);
/// As read_frame_bytes, but a stream that ends cleanly before the first
/// header byte yields nullopt.
std::optional<Bytes> read_frame_bytes_or_eof(Stream& stream);

Message read_frame(Stream& stream);
void write_frame(Stream& stream, const Message& m);

}  // namespace strongauth::wire
