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

#include "strongauth/wire.hpp"

#include "strongauth/error.hpp"

namespace strongauth::wire {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::malformed_message, what); }

class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16be() {
        auto b = take(2);
        return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
    }
    ByteView take(std::size_t n) {
        if (data_.size() - pos_ < n) malformed("payload truncated");
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    template <std::size_t N>
    std::array<std::uint8_t, N> fixed() {
        auto b = take(N);
        std::array<std::uint8_t, N> out;
        std::copy(b.begin(), b.end(), out.begin());
        return out;
    }
    void finish() const {
        if (pos_ != data_.size()) malformed("trailing bytes after payload");
    }

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

struct PayloadEncoder {
    ByteWriter& w;

    void operator()(const RegisterRequest& m) const {
        if (m.id.empty() || m.id.size() > kMaxIdentityLength) {
            throw Error(Errc::usage, "identity must be 1..31 bytes");
        }
        w.u8(static_cast<std::uint8_t>(m.id.size())).raw(as_bytes(m.id)).raw(m.upk);
    }
    void operator()(const RegisterAck&) const {}
    void operator()(const SessionInit& m) const {
        if (m.sealed_k.size() > kMaxFrameLength - 3) throw Error(Errc::usage, "sealed key too large for a frame");
        w.prefixed16(m.sealed_k);
    }
    void operator()(const SessionAck& m) const { w.raw(m.session_id); }
    void operator()(const LoginProve& m) const { w.raw(m.d).raw(m.f).raw(m.e); }
    void operator()(const LoginChallenge& m) const { w.raw(m.g).raw(m.m); }
    void operator()(const Reject& m) const { w.u8(static_cast<std::uint8_t>(m.code)); }
    void operator()(const RenewRequest& m) const { w.raw(m.x).raw(m.y); }
    void operator()(const RenewAck&) const {}
};

}  // namespace

MsgType type_of(const Message& m) noexcept {
    struct Visitor {
        MsgType operator()(const RegisterRequest&) const { return MsgType::register_request; }
        MsgType operator()(const RegisterAck&) const { return MsgType::register_ack; }
        MsgType operator()(const SessionInit&) const { return MsgType::session_init; }
        MsgType operator()(const SessionAck&) const { return MsgType::session_ack; }
        MsgType operator()(const LoginProve&) const { return MsgType::login_prove; }
        MsgType operator()(const LoginChallenge&) const { return MsgType::login_challenge; }
        MsgType operator()(const Reject&) const { return MsgType::reject; }
        MsgType operator()(const RenewRequest&) const { return MsgType::renew_request; }
        MsgType operator()(const RenewAck&) const { return MsgType::renew_ack; }
    };
    return std::visit(Visitor{}, m);
}

std::string_view name_of(MsgType t) noexcept {
    switch (t) {
        case MsgType::register_request: return "RegisterRequest";
        case MsgType::register_ack: return "RegisterAck";
        case MsgType::session_init: return "SessionInit";
        case MsgType::session_ack: return "SessionAck";
        case MsgType::login_prove: return "LoginProve";
        case MsgType::login_challenge: return "LoginChallenge";
        case MsgType::reject: return "Reject";
        case MsgType::renew_request: return "RenewRequest";
        case MsgType::renew_ack: return "RenewAck";
    }
    return "Unknown";
}

Bytes encode(const Message& m) {
    ByteWriter payload;
    std::visit(PayloadEncoder{payload}, m);
    const auto& body = payload.bytes();
    ByteWriter frame;
    frame.u32be(static_cast<std::uint32_t>(body.size() + 1)).u8(static_cast<std::uint8_t>(type_of(m))).raw(body);
    return std::move(frame).bytes();
}

Message decode(ByteView frame) {
    if (frame.size() < kHeaderSize + 1) malformed("frame shorter than header and type byte");
    std::uint32_t length = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                           (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
    if (length == 0 || length > kMaxFrameLength) malformed("frame length out of range");
    if (length != frame.size() - kHeaderSize) malformed("frame length does not match frame size");

    auto type = frame[kHeaderSize];
    Reader r(frame.subspan(kHeaderSize + 1));
    Message out;
    switch (static_cast<MsgType>(type)) {
        case MsgType::register_request: {
            auto idlen = r.u8();
            if (idlen == 0 || idlen > kMaxIdentityLength) malformed("identity length out of range");
            auto id = r.take(idlen);
            if (!valid_utf8(id)) malformed("identity is not valid UTF-8");
            out = RegisterRequest{to_string(id), r.fixed<32>()};
            break;
        }
        case MsgType::register_ack: out = RegisterAck{}; break;
        case MsgType::session_init: {
            auto len = r.u16be();
            out = SessionInit{to_bytes(r.take(len))};
            break;
        }
        case MsgType::session_ack: out = SessionAck{r.fixed<16>()}; break;
        case MsgType::login_prove: {
            LoginProve m;
            m.d = r.fixed<32>();
            m.f = r.fixed<32>();
            m.e = r.fixed<64>();
            out = m;
            break;
        }
        case MsgType::login_challenge: {
            LoginChallenge m;
            m.g = r.fixed<32>();
            m.m = r.fixed<32>();
            out = m;
            break;
        }
        case MsgType::reject: {
            auto code = r.u8();
            if (code < 0x01 || code > 0x03) malformed("unknown reject code");
            out = Reject{static_cast<RejectCode>(code)};
            break;
        }
        case MsgType::renew_request: {
            RenewRequest m;
            m.x = r.fixed<32>();
            m.y = r.fixed<32>();
            out = m;
            break;
        }
        case MsgType::renew_ack: out = RenewAck{}; break;
        default: malformed("unknown message type 0x" + to_hex(frame.subspan(kHeaderSize, 1)));
    }
    r.finish();
    return out;
}

std::optional<Bytes> read_frame_bytes_or_eof(Stream& stream) {
    Bytes frame(kHeaderSize);
    auto first = stream.read_some(frame);
    if (first == 0) return std::nullopt;
    stream.read_exact(std::span(frame).subspan(first));
    std::uint32_t length = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                           (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
    if (length == 0 || length > kMaxFrameLength) malformed("frame length out of range");
    frame.resize(kHeaderSize + length);
    stream.read_exact(std::span(frame).subspan(kHeaderSize));
    return frame;
}

Bytes read_frame_bytes(Stream& stream) {
    auto frame = read_frame_bytes_or_eof(stream);
    if (!frame) throw Error(Errc::connection, "stream closed before a frame arrived");
    return std::move(*frame);
}

Message read_frame(Stream& stream) { return decode(read_frame_bytes(stream)); }

void write_frame(Stream& stream, const Message& m) { stream.write_all(encode(m)); }

}  // namespace strongauth::wire
