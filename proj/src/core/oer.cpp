#include "ilpsim/core/oer.hpp"

namespace ilp {

const char* to_string(DecodeErrc e)
{
    switch (e) {
    case DecodeErrc::UnknownType: return "UnknownType";
    case DecodeErrc::UnknownFrameType: return "UnknownFrameType";
    case DecodeErrc::Truncated: return "Truncated";
    case DecodeErrc::LengthMismatch: return "LengthMismatch";
    case DecodeErrc::BadExpiryDigits: return "BadExpiryDigits";
    case DecodeErrc::InvalidField: return "InvalidField";
    }
    return "?";
}

DecodeError::DecodeError(DecodeErrc code, std::size_t offset, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + " at offset " + std::to_string(offset) +
                         ": " + detail),
      code_(code),
      offset_(offset)
{
}

void ByteWriter::put_uint_be(std::uint64_t v, std::size_t width)
{
    for (std::size_t i = width; i-- > 0;) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_length_prefix(std::size_t n)
{
    if (n < 0x80) {
        put_u8(static_cast<std::uint8_t>(n));
    } else if (n <= 0xFF) {
        put_u8(0x81);
        put_u8(static_cast<std::uint8_t>(n));
    } else if (n <= kMaxLengthPrefixValue) {
        put_u8(0x82);
        put_uint_be(n, 2);
    } else {
        throw std::length_error("length " + std::to_string(n) + " exceeds 2-byte length prefix");
    }
}

void ByteWriter::put_var_uint(std::uint64_t v)
{
    std::size_t width = 1;
    while (width < 8 && (v >> (8 * width)) != 0) ++width;
    put_length_prefix(width);
    put_uint_be(v, width);
}

void ByteReader::need(std::size_t n, const char* what) const
{
    if (remaining() < n)
        throw DecodeError(DecodeErrc::Truncated, offset(),
                          std::string(what) + " needs " + std::to_string(n) + " bytes, " +
                              std::to_string(remaining()) + " available");
}

std::uint8_t ByteReader::read_u8()
{
    need(1, "u8");
    return data_[pos_++];
}

std::uint64_t ByteReader::read_uint_be(std::size_t width)
{
    need(width, "integer");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = v << 8 | data_[pos_++];
    return v;
}

ByteView ByteReader::read_bytes(std::size_t n)
{
    need(n, "octets");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::size_t ByteReader::read_length_prefix()
{
    const auto at = offset();
    auto first = read_u8();
    if (first < 0x80) return first;
    const std::size_t width = first & 0x7f;
    if (width == 0 || width > 2)
        throw DecodeError(DecodeErrc::LengthMismatch, at,
                          "unsupported length-of-length " + std::to_string(width));
    auto v = static_cast<std::size_t>(read_uint_be(width));
    if ((width == 1 && v < 0x80) || (width == 2 && v <= 0xFF))
        throw DecodeError(DecodeErrc::LengthMismatch, at, "non-minimal length prefix");
    return v;
}

std::uint64_t ByteReader::read_var_uint()
{
    const auto at = offset();
    auto width = read_length_prefix();
    if (width == 0 || width > 8)
        throw DecodeError(DecodeErrc::LengthMismatch, at,
                          "variable uint width " + std::to_string(width));
    return read_uint_be(width);
}

void ByteReader::expect_end(const char* what) const
{
    if (!empty())
        throw DecodeError(DecodeErrc::LengthMismatch, offset(),
                          std::to_string(remaining()) + " trailing bytes after " + what);
}

}  // namespace ilp
