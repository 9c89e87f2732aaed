#pragma once

// ILP v4 packets and their binary codec.
//
// Envelope:  type (1) || length prefix || contents
//
//   Prepare (12): amount u64 BE || expiry 17 ASCII digits || condition (32)
//                 || destination (var octets) || data (var octets)
//   Fulfill (13): fulfillment (32) || data (var octets)
//   Reject  (14): code (3 ASCII) || triggered_by (var octets)
//                 || message (var octets) || data (var octets)

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "ilpsim/core/address.hpp"
#include "ilpsim/core/bytes.hpp"
#include "ilpsim/core/oer.hpp"
#include "ilpsim/core/time.hpp"

namespace ilp {

inline constexpr std::size_t kMaxDataLength = 32767;

struct Condition {
    std::array<std::uint8_t, 32> bytes{};
    auto operator<=>(const Condition&) const = default;
};

struct Fulfillment {
    std::array<std::uint8_t, 32> bytes{};
    auto operator<=>(const Fulfillment&) const = default;
};

/// SHA-256 of the fulfillment preimage.
Condition condition_from_fulfillment(const Fulfillment& f);
bool fulfills(const Fulfillment& f, const Condition& c);

/// Three-character ILP error code: class letter F/T/R followed by two digits.
class ErrorCode {
public:
    /// Throws std::invalid_argument unless `code` matches [FTR][0-9][0-9].
    explicit ErrorCode(std::string_view code);
    static bool is_valid(std::string_view code) noexcept;

    std::string_view str() const { return {chars_.data(), 3}; }
    char error_class() const { return chars_[0]; }
    bool is_final() const { return chars_[0] == 'F'; }
    bool is_temporary() const { return chars_[0] == 'T'; }
    bool is_relative() const { return chars_[0] == 'R'; }

    auto operator<=>(const ErrorCode&) const = default;

private:
    std::array<char, 3> chars_{};
};

namespace codes {
inline const ErrorCode F00_BAD_REQUEST{"F00"};
inline const ErrorCode F01_INVALID_PACKET{"F01"};
inline const ErrorCode F02_UNREACHABLE{"F02"};
inline const ErrorCode F05_WRONG_CONDITION{"F05"};
inline const ErrorCode F06_UNEXPECTED_PAYMENT{"F06"};
inline const ErrorCode F08_AMOUNT_TOO_LARGE{"F08"};
inline const ErrorCode F99_APPLICATION_ERROR{"F99"};
inline const ErrorCode T00_INTERNAL_ERROR{"T00"};
inline const ErrorCode T01_PEER_UNREACHABLE{"T01"};
inline const ErrorCode T04_INSUFFICIENT_LIQUIDITY{"T04"};
inline const ErrorCode R00_TRANSFER_TIMED_OUT{"R00"};
}  // namespace codes

enum class PacketType : std::uint8_t { Prepare = 12, Fulfill = 13, Reject = 14 };

struct PreparePacket {
    IlpAddress destination;
    std::uint64_t amount = 0;
    Condition condition;
    Timestamp expires_at;
    Bytes data;

    bool operator==(const PreparePacket&) const = default;
};

struct FulfillPacket {
    Fulfillment fulfillment;
    Bytes data;

    bool operator==(const FulfillPacket&) const = default;
};

struct RejectPacket {
    ErrorCode code;
    IlpAddress triggered_by;
    std::string message;
    Bytes data;

    bool operator==(const RejectPacket&) const = default;
};

using IlpPacket = std::variant<PreparePacket, FulfillPacket, RejectPacket>;
using IlpResponse = std::variant<FulfillPacket, RejectPacket>;

PacketType packet_type(const IlpPacket& p);
const char* type_name(PacketType t);

Bytes encode_packet(const PreparePacket& p);
Bytes encode_packet(const FulfillPacket& p);
Bytes encode_packet(const RejectPacket& p);
Bytes encode_packet(const IlpPacket& p);
Bytes encode_response(const IlpResponse& r);

/// Throws DecodeError. `base` offsets error positions when the packet is
/// nested inside a larger buffer.
IlpPacket decode_packet(ByteView bytes, std::size_t base = 0);
/// Accepts only Fulfill or Reject.
IlpResponse decode_response(ByteView bytes, std::size_t base = 0);

}  // namespace ilp
