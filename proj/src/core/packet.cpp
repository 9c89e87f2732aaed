#include "ilpsim/core/packet.hpp"

#include "ilpsim/core/crypto.hpp"

namespace ilp {

Condition condition_from_fulfillment(const Fulfillment& f)
{
    return Condition{sha256(f.bytes)};
}

bool fulfills(const Fulfillment& f, const Condition& c) { return condition_from_fulfillment(f) == c; }

ErrorCode::ErrorCode(std::string_view code)
{
    if (!is_valid(code)) throw std::invalid_argument("invalid ILP error code \"" + std::string(code) + "\"");
    chars_ = {code[0], code[1], code[2]};
}

bool ErrorCode::is_valid(std::string_view code) noexcept
{
    return code.size() == 3 && (code[0] == 'F' || code[0] == 'T' || code[0] == 'R') && code[1] >= '0' &&
           code[1] <= '9' && code[2] >= '0' && code[2] <= '9';
}

PacketType packet_type(const IlpPacket& p)
{
    switch (p.index()) {
    case 0: return PacketType::Prepare;
    case 1: return PacketType::Fulfill;
    default: return PacketType::Reject;
    }
}

const char* type_name(PacketType t)
{
    switch (t) {
    case PacketType::Prepare: return "ilp_prepare";
    case PacketType::Fulfill: return "ilp_fulfill";
    case PacketType::Reject: return "ilp_reject";
    }
    return "?";
}

namespace {

void check_data(const Bytes& data)
{
    if (data.size() > kMaxDataLength)
        throw std::length_error("data field of " + std::to_string(data.size()) + " bytes exceeds " +
                                std::to_string(kMaxDataLength));
}

Bytes envelope(PacketType type, const Bytes& contents)
{
    ByteWriter w;
    w.put_u8(static_cast<std::uint8_t>(type));
    w.put_var_octets(contents);
    return std::move(w).take();
}

IlpAddress read_address(ByteReader& r, const char* field)
{
    const auto at = r.offset();
    auto raw = to_string(r.read_var_octets());
    try {
        return IlpAddress::parse(raw);
    } catch (const MalformedAddress& e) {
        throw DecodeError(DecodeErrc::InvalidField, at, std::string(field) + ": " + e.what());
    }
}

Bytes read_data(ByteReader& r)
{
    const auto at = r.offset();
    auto v = r.read_var_octets();
    if (v.size() > kMaxDataLength)
        throw DecodeError(DecodeErrc::InvalidField, at, "data field exceeds 32767 bytes");
    return {v.begin(), v.end()};
}

template <typename T>
T read_fixed32(ByteReader& r)
{
    T out;
    auto v = r.read_bytes(32);
    std::copy(v.begin(), v.end(), out.bytes.begin());
    return out;
}

PreparePacket decode_prepare(ByteReader& r)
{
    auto amount = r.read_uint_be(8);
    const auto expiry_at = r.offset();
    auto digits = to_string(r.read_bytes(17));
    auto expires = parse_expiry_digits(digits);
    if (!expires) throw DecodeError(DecodeErrc::BadExpiryDigits, expiry_at, "expiry \"" + digits + "\"");
    auto condition = read_fixed32<Condition>(r);
    auto destination = read_address(r, "destination");
    auto data = read_data(r);
    return PreparePacket{std::move(destination), amount, condition, *expires, std::move(data)};
}

FulfillPacket decode_fulfill(ByteReader& r)
{
    auto f = read_fixed32<Fulfillment>(r);
    return FulfillPacket{f, read_data(r)};
}

RejectPacket decode_reject(ByteReader& r)
{
    const auto code_at = r.offset();
    auto code = to_string(r.read_bytes(3));
    if (!ErrorCode::is_valid(code))
        throw DecodeError(DecodeErrc::InvalidField, code_at, "error code \"" + code + "\"");
    auto by = read_address(r, "triggered_by");
    auto message = to_string(r.read_var_octets());
    auto data = read_data(r);
    return RejectPacket{ErrorCode(code), std::move(by), std::move(message), std::move(data)};
}

}  // namespace

Bytes encode_packet(const PreparePacket& p)
{
    check_data(p.data);
    ByteWriter w;
    w.put_uint_be(p.amount, 8);
    w.put_bytes(as_bytes(format_expiry_digits(p.expires_at)));
    w.put_bytes(p.condition.bytes);
    w.put_var_octets(as_bytes(p.destination.str()));
    w.put_var_octets(p.data);
    return envelope(PacketType::Prepare, w.bytes());
}

Bytes encode_packet(const FulfillPacket& p)
{
    check_data(p.data);
    ByteWriter w;
    w.put_bytes(p.fulfillment.bytes);
    w.put_var_octets(p.data);
    return envelope(PacketType::Fulfill, w.bytes());
}

Bytes encode_packet(const RejectPacket& p)
{
    check_data(p.data);
    ByteWriter w;
    w.put_bytes(as_bytes(p.code.str()));
    w.put_var_octets(as_bytes(p.triggered_by.str()));
    w.put_var_octets(as_bytes(p.message));
    w.put_var_octets(p.data);
    return envelope(PacketType::Reject, w.bytes());
}

Bytes encode_packet(const IlpPacket& p)
{
    return std::visit([](const auto& x) { return encode_packet(x); }, p);
}

Bytes encode_response(const IlpResponse& r)
{
    return std::visit([](const auto& x) { return encode_packet(x); }, r);
}

IlpPacket decode_packet(ByteView bytes, std::size_t base)
{
    ByteReader outer(bytes, base);
    const auto type_at = outer.offset();
    auto type = outer.read_u8();
    if (type != 12 && type != 13 && type != 14)
        throw DecodeError(DecodeErrc::UnknownType, type_at, "packet type " + std::to_string(type));
    auto declared = outer.read_length_prefix();
    if (outer.remaining() < declared)
        throw DecodeError(DecodeErrc::Truncated, outer.offset(),
                          "contents declare " + std::to_string(declared) + " bytes, " +
                              std::to_string(outer.remaining()) + " available");
    const auto contents_at = outer.offset();
    ByteReader r(outer.read_bytes(declared), contents_at);
    outer.expect_end("packet");

    IlpPacket out = [&]() -> IlpPacket {
        switch (static_cast<PacketType>(type)) {
        case PacketType::Prepare: return decode_prepare(r);
        case PacketType::Fulfill: return decode_fulfill(r);
        default: return decode_reject(r);
        }
    }();
    r.expect_end("packet contents");
    return out;
}

IlpResponse decode_response(ByteView bytes, std::size_t base)
{
    auto p = decode_packet(bytes, base);
    if (auto* f = std::get_if<FulfillPacket>(&p)) return std::move(*f);
    if (auto* r = std::get_if<RejectPacket>(&p)) return std::move(*r);
    throw DecodeError(DecodeErrc::UnknownType, base, "expected fulfill or reject, got prepare");
}

}  // namespace ilp
