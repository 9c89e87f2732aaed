#pragma once

// BTP frames.
//
//   frame_type (1) || request_id (u32 BE) || body length prefix || body
//   body  = entry count (var uint) || entries
//   entry = name length (1) || name || content_type (1) || data (var octets)

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ilpsim/core/bytes.hpp"
#include "ilpsim/core/oer.hpp"

namespace ilp::btp {

enum class ContentType : std::uint8_t { OctetStream = 0, TextPlainUtf8 = 1, ApplicationJson = 2 };

struct ProtocolEntry {
    std::string name;
    std::uint8_t content_type = 0;
    Bytes data;

    bool operator==(const ProtocolEntry&) const = default;

    static ProtocolEntry octets(std::string name, Bytes data)
    {
        return {std::move(name), static_cast<std::uint8_t>(ContentType::OctetStream), std::move(data)};
    }
    static ProtocolEntry text(std::string name, std::string_view text)
    {
        return {std::move(name), static_cast<std::uint8_t>(ContentType::TextPlainUtf8), to_bytes(text)};
    }
};

enum class FrameType : std::uint8_t { Response = 1, Error = 2, Message = 6 };

const char* type_name(FrameType t);

struct BtpFrame {
    FrameType type = FrameType::Message;
    std::uint32_t request_id = 0;
    std::vector<ProtocolEntry> entries;

    bool operator==(const BtpFrame&) const = default;
};

/// Throws std::invalid_argument on an invalid entry name or content type.
Bytes encode_frame(const BtpFrame& f);
/// Throws DecodeError.
BtpFrame decode_frame(ByteView bytes, std::size_t base = 0);

const ProtocolEntry* find_entry(const std::vector<ProtocolEntry>& entries, std::string_view name);

// Sub-protocol names carried in entries.
namespace proto {
inline constexpr const char* kIlp = "ilp";
inline constexpr const char* kAuth = "auth";
inline constexpr const char* kIldcp = "ildcp";
inline constexpr const char* kChannel = "channel";
inline constexpr const char* kChannelSignature = "channel_signature";
inline constexpr const char* kFundChannel = "fund_channel";
inline constexpr const char* kClaim = "claim";
inline constexpr const char* kCode = "code";
inline constexpr const char* kMessage = "message";
}  // namespace proto

}  // namespace ilp::btp
