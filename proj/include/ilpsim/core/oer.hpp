#pragma once

// Variable-length prefixes shared by the ILP packet and BTP frame codecs.
//
//   n < 128        -> one byte n
//   n < 256        -> 0x81 n
//   n < 65536      -> 0x82 hi lo
//
// Longer prefixes are rejected; nothing this codec carries needs them.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "ilpsim/core/bytes.hpp"

namespace ilp {

enum class DecodeErrc {
    UnknownType,
    UnknownFrameType,
    Truncated,
    LengthMismatch,
    BadExpiryDigits,
    InvalidField,
};

const char* to_string(DecodeErrc e);

class DecodeError : public std::runtime_error {
public:
    DecodeError(DecodeErrc code, std::size_t offset, const std::string& detail);

    DecodeErrc code() const { return code_; }
    /// Byte offset (relative to the outermost buffer) where decoding failed.
    std::size_t offset() const { return offset_; }

private:
    DecodeErrc code_;
    std::size_t offset_;
};

inline constexpr std::size_t kMaxLengthPrefixValue = 0xFFFF;

class ByteWriter {
public:
    void put_u8(std::uint8_t v) { out_.push_back(v); }
    void put_uint_be(std::uint64_t v, std::size_t width);
    void put_bytes(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void put_length_prefix(std::size_t n);
    void put_var_octets(ByteView b)
    {
        put_length_prefix(b.size());
        put_bytes(b);
    }
    /// Minimal-width unsigned integer preceded by its byte count.
    void put_var_uint(std::uint64_t v);

    const Bytes& bytes() const& { return out_; }
    Bytes take() && { return std::move(out_); }

private:
    Bytes out_;
};

/// Cursor over an immutable buffer. `base` is added to every reported offset
/// so nested decoders report positions in the outer buffer.
class ByteReader {
public:
    explicit ByteReader(ByteView data, std::size_t base = 0) : data_(data), base_(base) {}

    std::uint8_t read_u8();
    std::uint64_t read_uint_be(std::size_t width);
    ByteView read_bytes(std::size_t n);
    std::size_t read_length_prefix();
    ByteView read_var_octets() { return read_bytes(read_length_prefix()); }
    std::uint64_t read_var_uint();

    std::size_t remaining() const { return data_.size() - pos_; }
    bool empty() const { return remaining() == 0; }
    /// Absolute offset of the cursor.
    std::size_t offset() const { return base_ + pos_; }
    ByteView rest() const { return data_.subspan(pos_); }

    void expect_end(const char* what) const;

private:
    void need(std::size_t n, const char* what) const;

    ByteView data_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

}  // namespace ilp
