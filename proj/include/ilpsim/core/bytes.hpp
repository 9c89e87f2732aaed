#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ilp {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_string(ByteView b)
{
    return {reinterpret_cast<const char*>(b.data()), b.size()};
}

inline Bytes to_bytes(std::string_view s)
{
    auto v = as_bytes(s);
    return {v.begin(), v.end()};
}

/// Lowercase hex, no separators.
std::string to_hex(ByteView bytes);

/// Space separated lowercase byte pairs, as printed by node Buffer dumps.
std::string to_hex_spaced(ByteView bytes);

struct HexParseError : std::runtime_error {
    HexParseError(std::size_t offset, const std::string& what)
        : std::runtime_error(what), offset(offset) {}
    std::size_t offset;  // character offset into the input text
};

/// Accepts hex with arbitrary whitespace between byte pairs (and an optional
/// "<Buffer" ... ">" wrapper). A trailing "..." ellipsis ends the input.
Bytes from_hex(std::string_view text);

std::string base64_encode(ByteView bytes);
/// Throws std::invalid_argument on malformed input.
Bytes base64_decode(std::string_view text);
/// RFC 4648 url-safe alphabet, no padding.
std::string base64url_encode(ByteView bytes);

}  // namespace ilp
