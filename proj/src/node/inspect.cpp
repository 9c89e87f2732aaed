#include "ilpsim/node/inspect.hpp"

#include <cctype>
#include <functional>
#include <sstream>

#include "ilpsim/core/oer.hpp"
#include "ilpsim/core/time.hpp"

namespace ilp::node {

using nlohmann::json;

std::optional<std::string> InspectorReport::find(std::string_view name) const
{
    for (const auto& [k, v] : fields)
        if (k == name) return v;
    for (const auto& n : nested)
        if (auto v = n.find(name)) return v;
    return std::nullopt;
}

std::vector<std::string> InspectorReport::find_all(std::string_view name) const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : fields)
        if (k == name) out.push_back(v);
    for (const auto& n : nested) {
        auto sub = n.find_all(name);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

bool InspectorReport::complete() const
{
    if (error) return false;
    for (const auto& n : nested)
        if (!n.complete()) return false;
    return true;
}

json InspectorReport::to_json() const
{
    json f = json::array();
    for (const auto& [k, v] : fields) f.push_back({{"name", k}, {"value", v}});
    json j = {{"layer", layer}, {"fields", std::move(f)}};
    if (!nested.empty()) {
        json n = json::array();
        for (const auto& r : nested) n.push_back(r.to_json());
        j["nested"] = std::move(n);
    }
    if (error) j["error"] = {{"message", *error}, {"offset", error_offset ? json(*error_offset) : json(nullptr)}};
    return j;
}

std::string InspectorReport::render(int indent) const
{
    std::ostringstream out;
    const std::string pad(indent, ' ');
    out << pad << "[" << layer << "]\n";
    for (const auto& [k, v] : fields) out << pad << "  " << k << ": " << v << "\n";
    for (const auto& n : nested) out << n.render(indent + 4);
    if (error) {
        out << pad << "  error";
        if (error_offset) out << " at offset " << *error_offset;
        out << ": " << *error << "\n";
    }
    return out.str();
}

namespace {

std::string hex_of(ByteView b) { return to_hex_spaced(b); }

// Text fields of a damaged dump may hold anything; keep reports printable.
std::string text_of(ByteView b)
{
    for (auto c : b)
        if ((c < 0x20 && c != '\t' && c != '\n' && c != '\r') || c > 0x7e) return "0x " + hex_of(b);
    return to_string(b);
}

const char* btp_type_string(int t)
{
    switch (t) {
    case 1: return "TYPE_RESPONSE";
    case 2: return "TYPE_ERROR";
    case 6: return "TYPE_MESSAGE";
    default: return "UNKNOWN";
    }
}

const char* ilp_type_string(int t)
{
    switch (t) {
    case 12: return "ilp_prepare";
    case 13: return "ilp_fulfill";
    case 14: return "ilp_reject";
    default: return "unknown";
    }
}

// Runs `body` and turns a DecodeError into the report's error.
void guarded(InspectorReport& r, const std::function<void()>& body)
{
    try {
        body();
    } catch (const DecodeError& e) {
        r.error = e.what();
        r.error_offset = e.offset();
    } catch (const std::exception& e) {
        r.error = e.what();
    }
}

// Reads a length-prefixed body; a short dump yields what is available and
// flags truncation afterwards.
struct Body {
    ByteView bytes;
    std::size_t at = 0;
    std::size_t declared = 0;
    bool truncated() const { return bytes.size() < declared; }
};

Body read_body(ByteReader& r)
{
    Body b;
    b.declared = r.read_length_prefix();
    b.at = r.offset();
    b.bytes = r.read_bytes(std::min(b.declared, r.remaining()));
    return b;
}

// Reads `n` bytes; when the dump stops early the available prefix is
// recorded as "<name>" with a "(truncated)" marker and decoding stops.
ByteView take(ByteReader& c, InspectorReport& r, const char* name, std::size_t n)
{
    if (c.remaining() >= n) return c.read_bytes(n);
    const auto at = c.offset();
    auto part = c.read_bytes(c.remaining());
    r.fields.emplace_back(name, hex_of(part) + " (truncated, " + std::to_string(part.size()) + " of " +
                                    std::to_string(n) + " bytes)");
    throw DecodeError(DecodeErrc::Truncated, at + part.size(), std::string(name) + " continues past the dump");
}

InspectorReport inspect_ilp(ByteView bytes, std::size_t base)
{
    InspectorReport r{"ilp", {}, {}, {}, {}};
    guarded(r, [&] {
        ByteReader outer(bytes, base);
        const int type = outer.read_u8();
        r.fields.emplace_back("type", std::to_string(type));
        r.fields.emplace_back("typeString", ilp_type_string(type));
        if (type < 12 || type > 14) throw DecodeError(DecodeErrc::UnknownType, base, "unknown ILP packet type");
        auto body = read_body(outer);
        r.fields.emplace_back("length", std::to_string(body.declared));
        ByteReader c(body.bytes, body.at);
        auto var_field = [&](const char* name, bool text) {
            auto v = take(c, r, name, c.read_length_prefix());
            r.fields.emplace_back(name, text ? text_of(v) : base64_encode(v));
        };
        if (type == 12) {
            r.fields.emplace_back("amount", std::to_string(ByteReader(take(c, r, "amount", 8)).read_uint_be(8)));
            const auto exp_at = c.offset();
            auto digits = to_string(take(c, r, "expiresAt", 17));
            auto ts = parse_expiry_digits(digits);
            if (!ts) throw DecodeError(DecodeErrc::BadExpiryDigits, exp_at, "bad expiry digits");
            r.fields.emplace_back("expiresAt", format_iso8601(*ts));
            r.fields.emplace_back("executionCondition", base64_encode(take(c, r, "executionCondition", 32)));
            var_field("destination", true);
            var_field("data", false);
        } else if (type == 13) {
            r.fields.emplace_back("fulfillment", hex_of(take(c, r, "fulfillment", 32)));
            r.fields.emplace_back("data", hex_of(take(c, r, "data", c.read_length_prefix())));
        } else {
            r.fields.emplace_back("code", text_of(take(c, r, "code", 3)));
            var_field("triggeredBy", true);
            var_field("message", true);
            var_field("data", false);
        }
        if (body.truncated())
            throw DecodeError(DecodeErrc::Truncated, body.at + body.bytes.size(), "packet continues past the dump");
        c.expect_end("ilp packet");
        outer.expect_end("ilp packet");
    });
    return r;
}

InspectorReport inspect_btp(ByteView bytes)
{
    InspectorReport r{"btp", {}, {}, {}, {}};
    guarded(r, [&] {
        ByteReader outer(bytes);
        const int type = outer.read_u8();
        r.fields.emplace_back("type", std::to_string(type));
        r.fields.emplace_back("typeString", btp_type_string(type));
        if (type != 1 && type != 2 && type != 6)
            throw DecodeError(DecodeErrc::UnknownFrameType, 0, "unknown BTP frame type");
        r.fields.emplace_back("requestId", std::to_string(outer.read_uint_be(4)));
        auto body = read_body(outer);
        r.fields.emplace_back("length", std::to_string(body.declared));
        ByteReader c(body.bytes, body.at);
        const auto count = c.read_var_uint();
        r.fields.emplace_back("protocolDataCount", std::to_string(count));
        for (std::uint64_t i = 0; i < count; ++i) {
            InspectorReport e{"entry", {}, {}, {}, {}};
            bool stop = false;
            guarded(e, [&] {
                auto name = text_of(c.read_bytes(c.read_u8()));
                e.fields.emplace_back("protocolName", name);
                r.fields.emplace_back("protocolName", name);
                const int ct = c.read_u8();
                e.fields.emplace_back("contentType", std::to_string(ct));
                const auto declared = c.read_length_prefix();
                const auto data_at = c.offset();
                auto data = c.read_bytes(std::min(declared, c.remaining()));
                e.fields.emplace_back("dataLength", std::to_string(declared));
                if (ct == 1 || ct == 2) e.fields.emplace_back("data", text_of(data));
                else e.fields.emplace_back("data", hex_of(data));
                if (name == "ilp" && !data.empty()) e.nested.push_back(inspect_ilp(data, data_at));
                if (data.size() < declared) {
                    stop = true;
                    throw DecodeError(DecodeErrc::Truncated, data_at + data.size(), "entry continues past the dump");
                }
            });
            if (e.error) stop = true;
            r.nested.push_back(std::move(e));
            if (stop) {
                r.error = "dump ends inside protocol data";
                r.error_offset = body.at + body.bytes.size();
                return;
            }
        }
        if (body.truncated())
            throw DecodeError(DecodeErrc::Truncated, body.at + body.bytes.size(), "frame continues past the dump");
        c.expect_end("btp frame");
        outer.expect_end("btp frame");
    });
    return r;
}

}  // namespace

InspectorReport inspect_bytes(ByteView bytes)
{
    if (bytes.empty()) return {"hex", {}, {}, std::string("no bytes"), std::size_t{0}};
    const int first = bytes[0];
    if (first >= 12 && first <= 14) return inspect_ilp(bytes, 0);
    return inspect_btp(bytes);
}

InspectorReport inspect_hex(std::string_view text)
{
    Bytes bytes;
    bool truncated = false;
    std::size_t i = 0;
    auto skip_word = [&](std::string_view w) {
        if (text.substr(i, w.size()) == w) {
            i += w.size();
            return true;
        }
        return false;
    };
    while (i < text.size()) {
        const unsigned char ch = text[i];
        if (std::isspace(ch) || ch == '<' || ch == '>' || ch == ',') {
            ++i;
            continue;
        }
        if (skip_word("Buffer") || skip_word("0x")) continue;
        if (skip_word("...") || skip_word("\xE2\x80\xA6")) {
            truncated = true;
            continue;
        }
        if (i + 1 < text.size() && std::isxdigit(ch) && std::isxdigit(static_cast<unsigned char>(text[i + 1]))) {
            bytes.push_back(static_cast<std::uint8_t>(std::stoi(std::string(text.substr(i, 2)), nullptr, 16)));
            i += 2;
            continue;
        }
        return {"hex", {}, {}, std::string("hex parse error"), i};
    }
    auto r = inspect_bytes(bytes);
    if (truncated) r.fields.emplace_back("dump", "truncated");
    return r;
}

}  // namespace ilp::node
