#include "doctest.h"

#include "ilpsim/btp/transport.hpp"
#include "ilpsim/connector/connector.hpp"
#include "ilpsim/spsp/spsp.hpp"
#include "ilpsim/stream/stream.hpp"

using namespace ilp;
using namespace ilp::stream;
using nlohmann::json;

namespace {

const Timestamp kStart = Timestamp{Duration{1'560'937'381'509}};

// alice and bob under one connector; bob runs a STREAM receiver.
struct Loopback {
    std::shared_ptr<EventLoop> loop = EventLoop::simulated(kStart);
    std::shared_ptr<EventLog> log = std::make_shared<EventLog>();
    std::shared_ptr<connector::Connector> conn;
    std::shared_ptr<connector::PluginClient> alice;
    std::shared_ptr<connector::PluginClient> bob;
    std::shared_ptr<StreamServer> server;

    Loopback()
    {
        json cfg = {{"name", "conn1"},
                    {"ilp_address", "g.conn1"},
                    {"accounts", {{"clients", {{"relation", "child"}, {"assetCode", "XRP"}, {"assetScale", 9}}}}}};
        conn = connector::Connector::create(connector::ConnectorConfig::from_json(cfg), loop, log,
                                           std::make_shared<connector::LedgerDirectory>());
        alice = attach("alice");
        bob = attach("bob");
        server = StreamServer::create(bob, std::make_shared<SeededRandom>(1), log, loop, "stream:bob");
    }

    std::shared_ptr<connector::PluginClient> attach(const std::string& name)
    {
        auto [x, y] = btp::make_memory_pair(loop);
        conn->accept_link("clients", y);
        auto c = connector::PluginClient::create(loop, x);
        std::optional<std::string> err = "pending";
        c->connect(name, "", [&](auto e) { err = e; });
        loop->run_until_idle();
        REQUIRE_FALSE(err);
        return c;
    }

    SendReport send(std::uint64_t amount, SendOptions opts, std::shared_ptr<StreamSender>* out = nullptr)
    {
        auto sender = StreamSender::create(loop, alice, server->generate_credentials(), opts, log, "stream:alice");
        if (out) *out = sender;
        std::optional<SendReport> rep;
        sender->send_money(amount, [&](const SendReport& r) { rep = r; });
        loop->run_until([&] { return rep.has_value(); });
        loop->run_until_idle();
        REQUIRE(rep);
        return *rep;
    }
};

}  // namespace

TEST_SUITE("stream")
{
TEST_CASE("frames seal and open")
{
    Secret s{};
    s[0] = 1;
    Frame f{42, flags::kProbe, {1, 2, 3, 4, 5}};
    Bytes sealed = seal_frame(s, f);
    CHECK(sealed[0] == kFrameVersion);
    auto back = open_frame(s, sealed);
    CHECK(back.sequence == 42);
    CHECK(back.flags == flags::kProbe);
    CHECK(back.payload == f.payload);
    // Payload bytes are not visible on the wire.
    CHECK(std::search(sealed.begin(), sealed.end(), f.payload.begin(), f.payload.end()) == sealed.end());
    CHECK_THROWS_AS(open_frame(s, ByteView(sealed).first(4)), DecodeError);
    sealed[0] = 9;
    CHECK_THROWS_AS(open_frame(s, sealed), DecodeError);
}

TEST_CASE("conditions derive from the secret")
{
    Secret a{}, b{};
    b[31] = 1;
    Bytes data{1, 2, 3};
    auto [fa, ca] = packet_condition(a, data);
    auto [fb, cb] = packet_condition(b, data);
    CHECK(fulfills(fa, ca));
    CHECK_FALSE(fulfills(fb, ca));
    CHECK(ca != cb);
}

TEST_CASE("payment reassembles exactly")
{
    Loopback lb;
    SendOptions o;
    o.max_packet_amount = 100;
    auto rep = lb.send(1000, o);
    CHECK(rep.ok());
    CHECK(rep.source_sent == 1000);
    CHECK(rep.delivered == 1000);
    CHECK(rep.packets_fulfilled == 10);
    CHECK(rep.probe_delivered == 1);
    CHECK(rep.min_window >= 1);
    CHECK(rep.max_window <= kMaxWindow);
    CHECK(lb.server->total_received() == 1000);
}

TEST_CASE("window grows but stays bounded")
{
    Loopback lb;
    SendOptions o;
    o.max_packet_amount = 1;
    auto rep = lb.send(500, o);
    CHECK(rep.ok());
    CHECK(rep.max_window == kMaxWindow);
    CHECK(rep.min_window >= 1);
}

TEST_CASE("duplicate prepares credit once")
{
    Loopback lb;
    auto creds = lb.server->generate_credentials();
    Frame f{7, 0, {}};
    ByteWriter w;
    w.put_uint_be(50, 8);
    f.payload = std::move(w).take();
    PreparePacket p{creds.destination, 0, {}, {}, {}};
    p.amount = 50;
    p.data = seal_frame(creds.shared_secret, f);
    p.condition = packet_condition(creds.shared_secret, p.data).second;
    p.expires_at = lb.loop->now() + Duration{30'000};
    auto r1 = lb.server->handle_incoming(p);
    auto r2 = lb.server->handle_incoming(p);
    CHECK(std::holds_alternative<FulfillPacket>(r1));
    CHECK(std::holds_alternative<FulfillPacket>(r2));
    CHECK(lb.server->total_received() == 50);

    // Wrong condition is rejected without credit.
    p.condition.bytes[0] ^= 1;
    CHECK(std::holds_alternative<RejectPacket>(lb.server->handle_incoming(p)));
    CHECK(lb.server->total_received() == 50);

    // Unknown connection token.
    p.destination = lb.bob->info().address.with_suffix("nope");
    CHECK(std::holds_alternative<RejectPacket>(lb.server->handle_incoming(p)));
}

TEST_CASE("killed sender leaves exactly the fulfilled prefix")
{
    Loopback lb;
    SendOptions o;
    o.max_packet_amount = 100;
    o.kill_after_packets = 3;
    auto rep = lb.send(1000, o);
    CHECK_FALSE(rep.ok());
    CHECK(rep.error == SendError::Killed);
    CHECK(lb.server->total_received() == rep.delivered);
    CHECK(rep.delivered == rep.source_sent);
    CHECK(rep.source_sent == 100 * rep.packets_fulfilled);
    CHECK(rep.packets_fulfilled >= 3);
}

TEST_CASE("unreachable receiver")
{
    Loopback lb;
    Credentials c = lb.server->generate_credentials();
    c.destination = IlpAddress::parse("g.elsewhere.x");
    SendOptions o;
    auto sender = StreamSender::create(lb.loop, lb.alice, c, o, lb.log, "stream:alice");
    std::optional<SendReport> rep;
    sender->send_money(10, [&](const SendReport& r) { rep = r; });
    lb.loop->run_until_idle();
    REQUIRE(rep);
    CHECK_FALSE(rep->ok());
    CHECK(rep->source_sent == 0);
}
}

TEST_SUITE("spsp")
{
TEST_CASE("payment pointers resolve as in the table")
{
    using spsp::resolve_pointer;
    CHECK(resolve_pointer("$example.com") == "https://example.com/.well-known/pay");
    CHECK(resolve_pointer("$example.com/invoices/12345") == "https://example.com/invoices/12345");
    CHECK(resolve_pointer("$bob.example.com") == "https://bob.example.com/.well-known/pay");
    CHECK(resolve_pointer("$example.com/bob") == "https://example.com/bob");
    CHECK(resolve_pointer("$example.com", spsp::Profile::Simulation) == "http://example.com/.well-known/pay");
    for (const char* bad : {"", "example.com", "$", "$/path", "$exa mple.com", "$a?b"})
        CHECK_THROWS_AS(resolve_pointer(bad), spsp::MalformedPointer);
}

TEST_CASE("query validates responses")
{
    spsp::InProcessWeb web;
    auto code = [&](const std::string& url) {
        try {
            spsp::query(url, web);
        } catch (const spsp::SpspError& e) {
            return std::optional(e.code());
        }
        return std::optional<spsp::SpspErrc>();
    };
    const std::string secret = base64_encode(Bytes(32, 1));
    web.mount("http://a.test/ok", [&] {
        return spsp::HttpResult{200, json{{"destination_account", "g.x.y"}, {"shared_secret", secret}}.dump()};
    });
    web.mount("http://a.test/404", [] { return spsp::HttpResult{404, "nope"}; });
    web.mount("http://a.test/html", [] { return spsp::HttpResult{200, "<html>"}; });
    web.mount("http://a.test/short", [] {
        return spsp::HttpResult{200, json{{"destination_account", "g.x"}, {"shared_secret", "AAAA"}}.dump()};
    });
    web.mount("http://a.test/addr", [&] {
        return spsp::HttpResult{200, json{{"destination_account", "nope"}, {"shared_secret", secret}}.dump()};
    });
    CHECK_FALSE(code("http://a.test/ok"));
    CHECK(spsp::query("http://a.test/ok", web).credentials().destination.str() == "g.x.y");
    CHECK(code("http://a.test/404") == spsp::SpspErrc::Unreachable);
    CHECK(code("http://a.test/missing") == spsp::SpspErrc::Unreachable);
    CHECK(code("http://a.test/html") == spsp::SpspErrc::BadResponse);
    CHECK(code("http://a.test/short") == spsp::SpspErrc::BadResponse);
    CHECK(code("http://a.test/addr") == spsp::SpspErrc::BadResponse);
}

TEST_CASE("credentials from a live server open a working connection")
{
    Loopback lb;
    spsp::SpspServer http(lb.server, "127.0.0.1", 0);
    const auto port = http.start();
    spsp::NetworkGetter net;
    const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/";
    auto resp = spsp::query(url, net);
    CHECK(resp.destination_account.rfind(lb.bob->info().address.str() + ".", 0) == 0);
    CHECK(base64_decode(resp.shared_secret).size() == 32);

    std::optional<spsp::PaymentReport> rep;
    std::optional<spsp::SpspError> err;
    SendOptions o;
    o.max_packet_amount = 40;
    spsp::pay(url, 100, lb.loop, lb.alice, net, o, lb.log, "stream:alice", [&](auto r, auto e) {
        rep = r;
        err = e;
    });
    lb.loop->run_until([&] { return rep || err; });
    lb.loop->run_until_idle();
    http.stop();
    REQUIRE(rep);
    CHECK(rep->stream.ok());
    CHECK(rep->stream.source_sent == 100);
    CHECK(rep->stream.delivered == 100);
    CHECK(lb.server->total_received() == 100);
}

TEST_CASE("production profile refuses plain http")
{
    Loopback lb;
    spsp::InProcessWeb web;
    std::optional<spsp::SpspError> err;
    spsp::pay("http://127.0.0.1:1/", 5, lb.loop, lb.alice, web, {}, lb.log, "stream:alice",
              [&](auto, auto e) { err = e; }, spsp::Profile::Production);
    lb.loop->run_until_idle();
    REQUIRE(err);
    CHECK(err->code() == spsp::SpspErrc::Unreachable);

    err.reset();
    spsp::pay("$$bad", 5, lb.loop, lb.alice, web, {}, lb.log, "stream:alice", [&](auto, auto e) { err = e; });
    lb.loop->run_until_idle();
    REQUIRE(err);
    CHECK(err->code() == spsp::SpspErrc::MalformedPointer);
}
}
