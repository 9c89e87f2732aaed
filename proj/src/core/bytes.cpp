#include "ilpsim/core/bytes.hpp"

#include <openssl/evp.h>

#include <cctype>

namespace ilp {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

std::string to_hex(ByteView bytes)
{
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

std::string to_hex_spaced(ByteView bytes)
{
    std::string out;
    out.reserve(bytes.size() * 3);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (i) out.push_back(' ');
        out.push_back(kHexDigits[bytes[i] >> 4]);
        out.push_back(kHexDigits[bytes[i] & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view text)
{
    Bytes out;
    std::size_t i = 0;
    const auto n = text.size();
    auto skip_ws = [&] {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip_ws();
    if (text.substr(i).starts_with("<Buffer")) i += 7;
    while (true) {
        skip_ws();
        if (i >= n) break;
        if (text[i] == '>' || text.substr(i).starts_with("...")) break;
        int hi = hex_value(text[i]);
        if (hi < 0) throw HexParseError(i, "invalid hex digit at offset " + std::to_string(i));
        if (i + 1 >= n) throw HexParseError(i, "odd number of hex digits at offset " + std::to_string(i));
        int lo = hex_value(text[i + 1]);
        if (lo < 0)
            throw HexParseError(i + 1, "invalid hex digit at offset " + std::to_string(i + 1));
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
        i += 2;
    }
    return out;
}

std::string base64_encode(ByteView bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                            static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
    Bytes out(3 * text.size() / 4);
    int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                            static_cast<int>(text.size()));
    if (n < 0) throw std::invalid_argument("malformed base64");
    // EVP_DecodeBlock keeps the zero bytes produced by padding.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

std::string base64url_encode(ByteView bytes)
{
    auto s = base64_encode(bytes);
    while (!s.empty() && s.back() == '=') s.pop_back();
    for (auto& c : s) {
        if (c == '+') c = '-';
        else if (c == '/') c = '_';
    }
    return s;
}

}  // namespace ilp
