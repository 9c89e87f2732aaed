#include "doctest.h"

#include <random>

#include "common.hpp"
#include "ilpsim/btp/frame.hpp"
#include "ilpsim/node/inspect.hpp"

using namespace ilp;
using namespace ilp::node;
using testutil::data_file;

TEST_SUITE("inspect")
{
TEST_CASE("prepare-carrying frame dump")
{
    auto r = inspect_hex(data_file("btp_prepare_dump.txt"));
    CHECK(r.layer == "btp");
    CHECK(r.find("type") == "6");
    CHECK(r.find("typeString") == "TYPE_MESSAGE");
    CHECK(r.find("requestId") == "530421608");
    CHECK(r.find_all("protocolName") == std::vector<std::string>{"ilp", "ilp"});
    CHECK(r.find("contentType") == "0");
    REQUIRE(r.nested.size() == 1);
    REQUIRE(r.nested[0].nested.size() == 1);
    const auto& ilp = r.nested[0].nested[0];
    CHECK(ilp.find("type") == "12");
    CHECK(ilp.find("typeString") == "ilp_prepare");
    CHECK(ilp.find("amount") == "2500000000");
    CHECK(ilp.find("expiresAt") == "2019-06-19T09:43:01.509Z");
    CHECK(ilp.find("executionCondition")->rfind("45 04 2b e1 cd 98", 0) == 0);
    CHECK_FALSE(r.complete());
    CHECK(r.find("dump") == "truncated");
}

TEST_CASE("prepare packet dump")
{
    auto r = inspect_hex(data_file("ilp_prepare_dump.txt"));
    CHECK(r.layer == "ilp");
    CHECK(r.find("type") == "12");
    CHECK(r.find("length") == "221");
    CHECK(r.find("amount") == "2500000000");
    CHECK(r.find("expiresAt") == "2019-06-19T09:43:01.509Z");
    CHECK(r.find("executionCondition")->find("22 of 32 bytes") != std::string::npos);
    REQUIRE(r.error_offset);
    CHECK(*r.error_offset == 50);
}

TEST_CASE("fulfill packet dump")
{
    auto r = inspect_hex(data_file("ilp_fulfill_dump.txt"));
    CHECK(r.find("type") == "13");
    CHECK(r.find("typeString") == "ilp_fulfill");
    CHECK(r.find("fulfillment") ==
          "78 d3 d3 3e 33 27 b9 44 a1 45 92 f8 d8 98 28 8c 96 e2 20 00 af 8f bd eb 0d a3 24 04 79 0f 9b 75");
    CHECK(r.find("data")->rfind("12 ef 89 a6", 0) == 0);
}

TEST_CASE("complete frames decode every field")
{
    btp::BtpFrame f{btp::FrameType::Message, 530421608,
                    {btp::ProtocolEntry::octets("ilp", encode_packet(testutil::logged_prepare()))}};
    auto r = inspect_bytes(encode_frame(f));
    CHECK(r.complete());
    CHECK(r.find("destination") ==
          "g.conn1.ilsp_clients.mduni.local.NL8f2khL-VmasfzfA-w_ds5F15J063Tn4oxDwoXTjGw.gHvuhB1r5GN0UQikoCGahPsj");
    CHECK(r.find("executionCondition") == "RQQr4c2YaHGVUMXeSvIc8etOeW6Vy9j2WlDZYKIZUbM=");
    CHECK(r.nested[0].nested[0].find("data") ==
          "YFwVZXQYK7pDTrprLcFOYbyt9qGQm+0APnOaBw5w5iUvvEggyB4Le0J8Bjbav7FKGyJ6Ih95xT8lss4BCQ==");

    btp::BtpFrame resp{btp::FrameType::Response, 1054375881,
                       {btp::ProtocolEntry::octets("ilp", encode_packet(testutil::logged_fulfill()))}};
    auto rr = inspect_bytes(encode_frame(resp));
    CHECK(rr.complete());
    CHECK(rr.find("type") == "1");
    CHECK(rr.find("requestId") == "1054375881");
    CHECK(rr.find("typeString") == "TYPE_RESPONSE");
    CHECK(rr.nested[0].nested[0].find("typeString") == "ilp_fulfill");

    btp::BtpFrame ch{btp::FrameType::Message, 1890145753,
                     {btp::ProtocolEntry::octets("channel", Bytes(32, 1)),
                      btp::ProtocolEntry::octets("channel_signature", Bytes(64, 2)),
                      btp::ProtocolEntry::text("fund_channel", "rpN3UPjYaErt4RW4gAiqucMCfL5nJJC4Yz")}};
    auto rc = inspect_bytes(encode_frame(ch));
    CHECK(rc.find_all("protocolName") ==
          std::vector<std::string>{"channel", "channel_signature", "fund_channel", "channel", "channel_signature",
                                   "fund_channel"});
    CHECK(rc.nested[2].find("data") == "rpN3UPjYaErt4RW4gAiqucMCfL5nJJC4Yz");
}

TEST_CASE("hex errors")
{
    auto r = inspect_hex("zz");
    CHECK(r.layer == "hex");
    CHECK(r.error == "hex parse error");
    CHECK(r.error_offset == 0);
    auto r2 = inspect_hex("0c 81 d");
    CHECK(r2.error_offset == 6);
    CHECK(inspect_hex("").error);
}

TEST_CASE("malformed input never throws")
{
    std::mt19937_64 g(3);
    const Bytes good = encode_frame(btp::BtpFrame{
        btp::FrameType::Message, 1, {btp::ProtocolEntry::octets("ilp", encode_packet(testutil::logged_prepare()))}});
    for (int i = 0; i < 3000; ++i) {
        Bytes b = good;
        if (i % 3 == 0) b.resize(g() % b.size());
        const auto flips = 1 + g() % 4;
        for (unsigned k = 0; k < flips && !b.empty(); ++k) b[g() % b.size()] = static_cast<std::uint8_t>(g());
        InspectorReport r;
        CHECK_NOTHROW(r = inspect_bytes(b));
        if (r.error_offset) CHECK(*r.error_offset <= b.size());
        CHECK_NOTHROW((void)r.to_json().dump());
        CHECK_NOTHROW((void)r.render());
    }
}
}
