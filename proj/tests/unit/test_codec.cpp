#include "doctest.h"

#include <random>

#include "common.hpp"
#include "ilpsim/core/crypto.hpp"
#include "ilpsim/core/oer.hpp"

using namespace ilp;
using testutil::data_file;
using testutil::starts_with;

TEST_SUITE("codec")
{
TEST_CASE("logged prepare encodes to the dumped prefix")
{
    const Bytes dump = from_hex(data_file("ilp_prepare_dump.txt"));
    REQUIRE(dump.size() == 50);
    const Bytes wire = encode_packet(testutil::logged_prepare());
    CHECK(wire.size() == 3 + 221);
    CHECK(starts_with(wire, dump));
    CHECK(to_hex(ByteView(wire).first(7)) == "0c81dd00000000");
}

TEST_CASE("dumped prepare prefix decodes to the logged fields")
{
    // A full packet built from the log must decode back to the same fields,
    // and the first bytes are the dump itself.
    const Bytes wire = encode_packet(testutil::logged_prepare());
    auto pkt = std::get<PreparePacket>(decode_packet(wire));
    CHECK(pkt.amount == 2500000000ULL);
    CHECK(format_iso8601(pkt.expires_at) == "2019-06-19T09:43:01.509Z");
    CHECK(base64_encode(pkt.condition.bytes) == "RQQr4c2YaHGVUMXeSvIc8etOeW6Vy9j2WlDZYKIZUbM=");
    CHECK(pkt.destination.str().rfind("g.conn1.ilsp_clients.mduni.local.", 0) == 0);
    CHECK(pkt.data.size() == 61);

    const Bytes dump = from_hex(data_file("ilp_prepare_dump.txt"));
    CHECK_THROWS_AS(decode_packet(dump), DecodeError);
}

TEST_CASE("logged fulfill encodes to the dumped prefix")
{
    const Bytes dump = from_hex(data_file("ilp_fulfill_dump.txt"));
    const Bytes wire = encode_packet(testutil::logged_fulfill());
    CHECK(wire.size() == 2 + 94);
    CHECK(starts_with(wire, dump));
    auto f = std::get<FulfillPacket>(decode_packet(wire));
    CHECK(to_hex(ByteView(f.fulfillment.bytes).first(4)) == "78d3d33e");
}

TEST_CASE("expiry wire form is the 17 digit timestamp")
{
    auto t = *parse_iso8601("2019-06-19T09:43:01.509Z");
    CHECK(format_expiry_digits(t) == "20190619094301509");
    CHECK(parse_expiry_digits("20190619094301509") == t);
    CHECK_FALSE(parse_expiry_digits("2019061909430150"));
    CHECK_FALSE(parse_expiry_digits("20191319094301509"));
    CHECK_FALSE(parse_expiry_digits("20190230094301509"));
    CHECK_FALSE(parse_expiry_digits("2019061909430150x"));
}

TEST_CASE("sha256 of 32 zero bytes")
{
    std::array<std::uint8_t, 32> zero{};
    CHECK(to_hex(sha256(zero)) == "66687aadf862bd776c8fc18b8e9f8e20089714856ee233b3902a591d0d5f2925");
    Fulfillment f{};
    CHECK(to_hex(condition_from_fulfillment(f).bytes) == to_hex(sha256(zero)));
    CHECK(fulfills(f, condition_from_fulfillment(f)));
}

TEST_CASE("length prefixes")
{
    auto enc = [](std::size_t n) {
        ByteWriter w;
        w.put_length_prefix(n);
        return to_hex(w.bytes());
    };
    CHECK(enc(0) == "00");
    CHECK(enc(94) == "5e");
    CHECK(enc(127) == "7f");
    CHECK(enc(128) == "8180");
    CHECK(enc(221) == "81dd");
    CHECK(enc(256) == "820100");
    CHECK(enc(65535) == "82ffff");
    ByteWriter w;
    CHECK_THROWS(w.put_length_prefix(65536));

    for (std::size_t n : {0u, 1u, 127u, 128u, 255u, 256u, 1000u, 65535u}) {
        ByteWriter wr;
        wr.put_length_prefix(n);
        ByteReader r(wr.bytes());
        CHECK(r.read_length_prefix() == n);
        CHECK(r.empty());
    }
}

TEST_CASE("error codes")
{
    CHECK(ErrorCode::is_valid("F08"));
    CHECK(ErrorCode::is_valid("R00"));
    CHECK_FALSE(ErrorCode::is_valid("X00"));
    CHECK_FALSE(ErrorCode::is_valid("F0"));
    CHECK_FALSE(ErrorCode::is_valid("F0a"));
    CHECK_THROWS_AS(ErrorCode("T4"), std::invalid_argument);
    CHECK(codes::T04_INSUFFICIENT_LIQUIDITY.is_temporary());
}

TEST_CASE("decode errors carry offsets")
{
    SUBCASE("unknown type")
    {
        Bytes b{0x0b, 0x00};
        try {
            decode_packet(b);
            FAIL("expected DecodeError");
        } catch (const DecodeError& e) {
            CHECK(e.code() == DecodeErrc::UnknownType);
            CHECK(e.offset() == 0);
        }
    }
    SUBCASE("bad expiry digits")
    {
        Bytes wire = encode_packet(testutil::logged_prepare());
        wire[3 + 8 + 4] = 'x';
        try {
            decode_packet(wire);
            FAIL("expected DecodeError");
        } catch (const DecodeError& e) {
            CHECK(e.code() == DecodeErrc::BadExpiryDigits);
            CHECK(e.offset() == 11);
        }
    }
    SUBCASE("trailing bytes")
    {
        Bytes wire = encode_packet(testutil::logged_fulfill());
        wire.push_back(0);
        CHECK_THROWS_AS(decode_packet(wire), DecodeError);
    }
}

namespace {

std::string random_segment(std::mt19937_64& g)
{
    static const std::string chars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_~-";
    std::string s(1 + g() % 12, 'a');
    for (auto& c : s) c = chars[g() % chars.size()];
    return s;
}

IlpAddress random_address(std::mt19937_64& g)
{
    static const char* schemes[] = {"g", "private", "example", "peer", "self", "test", "local"};
    std::string a = schemes[g() % 7];
    const auto n = 1 + g() % 6;
    for (unsigned i = 0; i < n; ++i) a += "." + random_segment(g);
    return IlpAddress::parse(a);
}

Bytes random_bytes(std::mt19937_64& g, std::size_t max)
{
    Bytes b(g() % (max + 1));
    for (auto& x : b) x = static_cast<std::uint8_t>(g());
    return b;
}

Timestamp random_time(std::mt19937_64& g)
{
    // 1970 .. 9999
    return Timestamp{Duration{static_cast<std::int64_t>(g() % 253402300799999ULL)}};
}

}  // namespace

TEST_CASE("decode(encode(p)) == p for random packets")
{
    std::mt19937_64 g(20190619);
    for (int i = 0; i < 1500; ++i) {
        IlpPacket p = FulfillPacket{};
        switch (i % 3) {
        case 0: {
            PreparePacket x{random_address(g), 0, {}, {}, {}};
            x.amount = g();
            for (auto& b : x.condition.bytes) b = static_cast<std::uint8_t>(g());
            x.expires_at = random_time(g);
            x.data = random_bytes(g, i % 50 == 0 ? kMaxDataLength : 300);
            p = x;
            break;
        }
        case 1: {
            FulfillPacket x;
            for (auto& b : x.fulfillment.bytes) b = static_cast<std::uint8_t>(g());
            x.data = random_bytes(g, 300);
            p = x;
            break;
        }
        default: {
            static const char* cs[] = {"F00", "F02", "F08", "T00", "T04", "R00", "F99"};
            RejectPacket x{ErrorCode(cs[g() % 7]), random_address(g), random_segment(g), random_bytes(g, 300)};
            p = x;
            break;
        }
        }
        const Bytes wire = encode_packet(p);
        const IlpPacket back = decode_packet(wire);
        REQUIRE(back == p);
        CHECK(encode_packet(back) == wire);
    }
}

TEST_CASE("expiry survives encode/decode at millisecond precision")
{
    std::mt19937_64 g(7);
    for (int i = 0; i < 1000; ++i) {
        auto t = random_time(g);
        REQUIRE(parse_expiry_digits(format_expiry_digits(t)) == t);
        REQUIRE(parse_iso8601(format_iso8601(t)) == t);
    }
}

TEST_CASE("address prefix relation is a partial order")
{
    std::mt19937_64 g(11);
    for (int i = 0; i < 500; ++i) {
        auto a = random_address(g);
        auto b = a.with_suffix(random_segment(g));
        auto c = b.with_suffix(random_segment(g) + "." + random_segment(g));
        CHECK(a.is_prefix_of(a));
        CHECK(a.is_prefix_of(b));
        CHECK(b.is_prefix_of(c));
        CHECK(a.is_prefix_of(c));
        CHECK_FALSE(b.is_prefix_of(a));
        CHECK(b.suffix_of(c).size() > 0);
    }
    // Prefixes only match at segment boundaries.
    CHECK_FALSE(IlpAddress::parse("g.conn").is_prefix_of(IlpAddress::parse("g.conn1")));
}

TEST_CASE("malformed addresses")
{
    CHECK_FALSE(IlpAddress::is_valid(""));
    CHECK_FALSE(IlpAddress::is_valid("g."));
    CHECK_FALSE(IlpAddress::is_valid("g..a"));
    CHECK_FALSE(IlpAddress::is_valid("nope.a"));
    CHECK_FALSE(IlpAddress::is_valid("g.a b"));
    CHECK_FALSE(IlpAddress::is_valid("g." + std::string(1100, 'a')));
    CHECK(IlpAddress::is_valid("g"));
    CHECK_THROWS_AS(IlpAddress::parse("g..a"), MalformedAddress);
}
}
