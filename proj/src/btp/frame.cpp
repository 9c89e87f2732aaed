#include "ilpsim/btp/frame.hpp"

#include <stdexcept>

namespace ilp::btp {

const char* type_name(FrameType t)
{
    switch (t) {
    case FrameType::Response: return "TYPE_RESPONSE";
    case FrameType::Error: return "TYPE_ERROR";
    case FrameType::Message: return "TYPE_MESSAGE";
    }
    return "?";
}

Bytes encode_frame(const BtpFrame& f)
{
    ByteWriter body;
    body.put_var_uint(f.entries.size());
    for (const auto& e : f.entries) {
        if (e.name.empty() || e.name.size() > 255)
            throw std::invalid_argument("protocol name must be 1-255 bytes");
        if (e.content_type > 2) throw std::invalid_argument("content type must be 0, 1 or 2");
        body.put_u8(static_cast<std::uint8_t>(e.name.size()));
        body.put_bytes(as_bytes(e.name));
        body.put_u8(e.content_type);
        body.put_var_octets(e.data);
    }
    ByteWriter w;
    w.put_u8(static_cast<std::uint8_t>(f.type));
    w.put_uint_be(f.request_id, 4);
    w.put_var_octets(body.bytes());
    return std::move(w).take();
}

BtpFrame decode_frame(ByteView bytes, std::size_t base)
{
    ByteReader outer(bytes, base);
    const auto type_at = outer.offset();
    auto type = outer.read_u8();
    if (type != 1 && type != 2 && type != 6)
        throw DecodeError(DecodeErrc::UnknownFrameType, type_at, "frame type " + std::to_string(type));
    BtpFrame f;
    f.type = static_cast<FrameType>(type);
    f.request_id = static_cast<std::uint32_t>(outer.read_uint_be(4));
    auto declared = outer.read_length_prefix();
    if (outer.remaining() < declared)
        throw DecodeError(DecodeErrc::Truncated, outer.offset(),
                          "body declares " + std::to_string(declared) + " bytes, " +
                              std::to_string(outer.remaining()) + " available");
    const auto body_at = outer.offset();
    ByteReader r(outer.read_bytes(declared), body_at);
    outer.expect_end("frame");

    auto count = r.read_var_uint();
    for (std::uint64_t i = 0; i < count; ++i) {
        ProtocolEntry e;
        const auto name_at = r.offset();
        auto name_len = r.read_u8();
        if (name_len == 0) throw DecodeError(DecodeErrc::InvalidField, name_at, "empty protocol name");
        e.name = to_string(r.read_bytes(name_len));
        const auto ct_at = r.offset();
        e.content_type = r.read_u8();
        if (e.content_type > 2)
            throw DecodeError(DecodeErrc::InvalidField, ct_at,
                              "content type " + std::to_string(e.content_type));
        auto data = r.read_var_octets();
        e.data.assign(data.begin(), data.end());
        f.entries.push_back(std::move(e));
    }
    r.expect_end("frame body");
    return f;
}

const ProtocolEntry* find_entry(const std::vector<ProtocolEntry>& entries, std::string_view name)
{
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

}  // namespace ilp::btp
