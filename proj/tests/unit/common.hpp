#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ilpsim/core/packet.hpp"

namespace testutil {

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_file(const std::string& name) { return read_file(std::string(ILPSIM_TEST_DATA_DIR) + "/" + name); }

// The Prepare deserialized in the node logs, field for field.
inline ilp::PreparePacket logged_prepare()
{
    ilp::PreparePacket p{ilp::IlpAddress::parse("g.x"), 0, {}, {}, {}};
    p.amount = 2500000000ULL;
    p.expires_at = *ilp::parse_iso8601("2019-06-19T09:43:01.509Z");
    const auto cond = ilp::base64_decode("RQQr4c2YaHGVUMXeSvIc8etOeW6Vy9j2WlDZYKIZUbM=");
    std::copy(cond.begin(), cond.end(), p.condition.bytes.begin());
    p.destination = ilp::IlpAddress::parse(
        "g.conn1.ilsp_clients.mduni.local.NL8f2khL-VmasfzfA-w_ds5F15J063Tn4oxDwoXTjGw.gHvuhB1r5GN0UQikoCGahPsj");
    p.data = ilp::base64_decode(
        "YFwVZXQYK7pDTrprLcFOYbyt9qGQm+0APnOaBw5w5iUvvEggyB4Le0J8Bjbav7FKGyJ6Ih95xT8lss4BCQ==");
    return p;
}

// The logged Fulfill. Only the first 50 of its 61 data bytes were printed;
// the rest is zero filled.
inline ilp::FulfillPacket logged_fulfill()
{
    ilp::FulfillPacket f;
    const auto ful = ilp::from_hex("78d3d33e3327b944a14592f8d898288c96e22000af8fbdeb0da32404790f9b75");
    std::copy(ful.begin(), ful.end(), f.fulfillment.bytes.begin());
    f.data = ilp::from_hex("12ef89a679c1a5cc53efc60fc1608a7138b57270a8f754161c3065f5f19efd8feea6d063853649fdab5e18a6d94004d45a61");
    f.data.resize(61, 0);
    return f;
}

inline bool starts_with(const ilp::Bytes& whole, const ilp::Bytes& prefix)
{
    return whole.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), whole.begin());
}

}  // namespace testutil
