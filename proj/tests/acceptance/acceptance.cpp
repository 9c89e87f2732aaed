// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <regex>

#include <boost/multiprecision/cpp_int.hpp>

#include "../unit/common.hpp"
#include "ilpsim/btp/frame.hpp"
#include "ilpsim/btp/transport.hpp"
#include "ilpsim/connector/connector.hpp"
#include "ilpsim/harness/scenario.hpp"
#include "ilpsim/node/inspect.hpp"
#include "ilpsim/settlement/balance.hpp"
#include "ilpsim/spsp/spsp.hpp"

using namespace ilp;
using nlohmann::json;
using boost::multiprecision::cpp_int;

namespace {

// Runtime limits in seconds.
constexpr double kGoldenLimit = 1.0;
constexpr double kPointerLimit = 1.0;
constexpr double kExampleLimit = 5.0;
constexpr double kConservationLimit = 60.0;

constexpr int kExampleSeeds = 50;
constexpr int kCompatPairs = 1000;
constexpr int kConservationSeeds = 20;
constexpr double kDropRates[] = {0.0, 0.1, 0.5};
constexpr int kHtlaPayments = 200;

const Timestamp kStart = Timestamp{Duration{1'560'937'381'509}};

struct Outcome {
    bool pass = true;
    std::string detail;

    void expect(bool ok, const std::string& what)
    {
        if (ok) return;
        if (pass) detail = what;
        pass = false;
    }
};

harness::ScenarioSpec scenario(const std::string& name)
{
    return harness::ScenarioSpec::load(std::filesystem::path(ILPSIM_SCENARIO_DIR) / (name + ".json"));
}

Bytes dump_bytes(const std::string& file)
{
    static const std::regex byte_re("\\b[0-9a-f]{2}\\b");
    const auto text = testutil::data_file(file);
    std::string hex;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), byte_re); it != std::sregex_iterator(); ++it)
        hex += it->str();
    return from_hex(hex);
}

std::string str(const std::optional<std::string>& v) { return v.value_or("<missing>"); }

// 1. Golden wire vectors.
Outcome golden_vectors()
{
    Outcome o;
    const auto prepare = encode_packet(testutil::logged_prepare());
    const auto fulfill = encode_packet(testutil::logged_fulfill());
    const auto frame = encode_frame(btp::BtpFrame{btp::FrameType::Message, 530421608,
                                                  {btp::ProtocolEntry::octets("ilp", prepare)}});
    o.expect(testutil::starts_with(prepare, dump_bytes("ilp_prepare_dump.txt")), "prepare bytes differ from dump");
    o.expect(testutil::starts_with(fulfill, dump_bytes("ilp_fulfill_dump.txt")), "fulfill bytes differ from dump");
    o.expect(testutil::starts_with(frame, dump_bytes("btp_prepare_dump.txt")), "frame bytes differ from dump");

    auto ip = node::inspect_hex(testutil::data_file("ilp_prepare_dump.txt"));
    o.expect(ip.find("type") == "12", "prepare type " + str(ip.find("type")));
    o.expect(ip.find("amount") == "2500000000", "prepare amount " + str(ip.find("amount")));
    o.expect(ip.find("expiresAt") == "2019-06-19T09:43:01.509Z", "prepare expiry " + str(ip.find("expiresAt")));

    auto full = std::get<PreparePacket>(decode_packet(prepare));
    o.expect(base64_encode(full.condition.bytes) == "RQQr4c2YaHGVUMXeSvIc8etOeW6Vy9j2WlDZYKIZUbM=", "condition");
    o.expect(full.destination.str().rfind("g.conn1.ilsp_clients.mduni.local.", 0) == 0, "destination");

    auto ifu = node::inspect_hex(testutil::data_file("ilp_fulfill_dump.txt"));
    o.expect(ifu.find("type") == "13", "fulfill type " + str(ifu.find("type")));
    o.expect(ifu.find("fulfillment").value_or("").rfind("78 d3 d3 3e", 0) == 0, "fulfillment");

    auto ib = node::inspect_hex(testutil::data_file("btp_prepare_dump.txt"));
    o.expect(ib.find("type") == "6", "btp type " + str(ib.find("type")));
    o.expect(ib.find("requestId") == "530421608", "requestId " + str(ib.find("requestId")));
    o.expect(ib.find("protocolName") == "ilp", "protocolName " + str(ib.find("protocolName")));
    return o;
}

// 2. Payment pointer table.
Outcome pointer_table()
{
    Outcome o;
    const std::pair<const char*, const char*> rows[] = {
        {"$example.com", "https://example.com/.well-known/pay"},
        {"$example.com/invoices/12345", "https://example.com/invoices/12345"},
        {"$bob.example.com", "https://bob.example.com/.well-known/pay"},
        {"$example.com/bob", "https://example.com/bob"},
    };
    for (const auto& [ptr, url] : rows) {
        std::string got;
        try {
            got = spsp::resolve_pointer(ptr);
        } catch (const std::exception& e) {
            got = e.what();
        }
        o.expect(got == url, std::string(ptr) + " -> " + got);
    }
    return o;
}

// 3. One connector, two nodes: send 100 at rate 1.
Outcome single_connector_send()
{
    Outcome o;
    auto spec = scenario("xrp_single_connector");
    spec.actions = {{{"do", "start"}}, {{"do", "pay"}, {"id", "send"}, {"from", "alice"}, {"to", "$bob.example"}, {"amount", 100}}};
    int exact = 0;
    for (int seed = 1; seed <= kExampleSeeds; ++seed) {
        auto rep = harness::run_scenario(spec, {static_cast<std::uint64_t>(seed), std::nullopt});
        const auto* p = rep.payment("send");
        if (p && p->ok && p->delivered == 100 && p->received == 100u) ++exact;
    }
    o.expect(exact == kExampleSeeds, std::to_string(exact) + "/" + std::to_string(kExampleSeeds) + " exact");
    o.detail = o.pass ? std::to_string(exact) + " seeds delivered exactly 100" : o.detail;
    return o;
}

// 4. Policy 20 / -15 / 0: streaming 20 settles once, back to 0.
Outcome settlement_policy()
{
    Outcome o;
    using namespace settlement;
    const BalancePolicy pol{20, -15, 0};
    auto clock = std::make_shared<ManualClock>(kStart);
    ledger::Ledger led(ledger::LedgerConfig{"XRP", 0, "rGenesis", 1'000'000}, clock);
    auto key = ledger::key_from_secret("alice");
    led.create_and_fund("rAlice", key.public_key(), 1000);
    led.create_and_fund("rBob", ledger::key_from_secret("bob").public_key(), 0);
    auto ch = led.open_channel("rAlice", "rBob", 100, 3600, key.public_key());
    BilateralBalance alice("bob", pol), bob("alice", pol);
    alice.set_outgoing_channel(ch.id, 100, key);
    bob.set_incoming_channel(ch.id);

    // One fulfilled packet of 20 leaves Alice at -20, past her threshold.
    std::vector<ledger::Claim> claims;
    o.expect(bob.on_incoming_prepare(20), "prepare rejected");
    o.expect(bob.value() == 20 && alice.value() == 0, "bob's view before settling");
    auto out = alice.on_outgoing_fulfilled(20);
    if (out.claim) {
        claims.push_back(*out.claim);
        bob.receive_claim(*out.claim, led);
    }
    o.expect(claims.size() == 1, std::to_string(claims.size()) + " claims");
    if (!claims.empty()) o.expect(claims[0].cumulative_amount == 20, "cumulative " + std::to_string(claims[0].cumulative_amount));
    o.expect(alice.value() == 0 && bob.value() == 0,
             "balances " + std::to_string(alice.value()) + " / " + std::to_string(bob.value()));
    if (!claims.empty())
        o.expect(led.redeem_claim(claims[0]).credited == 20 && led.account("rBob")->balance == 20, "ledger credit");

    // The same 20 as unit packets settles once the threshold is crossed.
    BilateralBalance a2("bob", pol);
    auto ch2 = led.open_channel("rAlice", "rBob", 100, 3600, key.public_key());
    a2.set_outgoing_channel(ch2.id, 100, key);
    std::vector<std::uint64_t> cumulative;
    for (int i = 0; i < 20; ++i)
        if (auto c = a2.on_outgoing_fulfilled(1).claim) cumulative.push_back(c->cumulative_amount);
    o.expect(cumulative == std::vector<std::uint64_t>{15} && a2.value() == -5, "unit packets settle at the threshold");
    return o;
}

// Direction a owes b: walk the owed amount up one unit at a time. The pair
// works when a's settlement fires while b would still take another unit.
bool scan_direction(const settlement::BalancePolicy& a, const settlement::BalancePolicy& b)
{
    for (std::int64_t owed = 0;; ++owed) {
        const bool b_accepts_next = owed + 1 <= b.maximum;
        if (-owed <= a.settle_threshold) return b_accepts_next;
        if (!b_accepts_next) return false;
    }
}

bool exact_direction(const settlement::BalancePolicy& a, const settlement::BalancePolicy& b)
{
    return -cpp_int(a.settle_threshold) < cpp_int(b.maximum);
}

// 5. Peering compatibility against brute force.
Outcome peering_compat()
{
    Outcome o;
    using settlement::BalancePolicy;
    std::mt19937_64 g(4212);
    constexpr auto lo = std::numeric_limits<std::int64_t>::min();
    constexpr auto hi = std::numeric_limits<std::int64_t>::max();
    const std::int64_t edges[] = {lo, lo + 1, -1'000'000'000'000, -1, 0, 1, 1'000'000'000'000, hi - 1, hi};
    auto small = [&] {
        const auto max = static_cast<std::int64_t>(g() % 61);
        const auto thr = -static_cast<std::int64_t>(g() % 61);
        return BalancePolicy{max, thr, thr + static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(max - thr + 1))};
    };
    auto wide = [&] {
        std::int64_t x = static_cast<std::int64_t>(g()), y = static_cast<std::int64_t>(g());
        if (g() % 3 == 0) x = edges[g() % std::size(edges)];
        if (g() % 3 == 0) y = edges[g() % std::size(edges)];
        if (x > y) std::swap(x, y);
        return BalancePolicy{y, x, x};
    };
    int scanned = 0, disagreements = 0;
    for (int i = 0; i < kCompatPairs; ++i) {
        const bool use_scan = i % 2 == 0;
        const auto a = use_scan ? small() : wide();
        const auto b = use_scan ? small() : wide();
        const bool want = use_scan ? scan_direction(a, b) && scan_direction(b, a)
                                   : exact_direction(a, b) && exact_direction(b, a);
        scanned += use_scan;
        if (settlement::check_peering_compat(a, b) != want) {
            if (!disagreements++)
                o.expect(false, "disagree on {" + std::to_string(a.maximum) + "," + std::to_string(a.settle_threshold) +
                                    "} vs {" + std::to_string(b.maximum) + "," + std::to_string(b.settle_threshold) + "}");
        }
    }
    if (o.pass)
        o.detail = std::to_string(kCompatPairs) + " pairs agree (" + std::to_string(scanned) + " by unit scan)";
    return o;
}

// 6. Conservation over every shipped scenario, seed and drop rate.
Outcome conservation_matrix()
{
    Outcome o;
    int runs = 0;
    for (const char* name : {"xrp_single_connector", "xrp_eth_one_connector", "xrp_eth_two_connectors", "switch_swap"}) {
        const auto spec = scenario(name);
        for (double drop : kDropRates) {
            btp::FaultPlan plan;
            plan.drop_rate = drop;
            for (int seed = 1; seed <= kConservationSeeds; ++seed) {
                ++runs;
                auto rep = harness::run_scenario(spec, {static_cast<std::uint64_t>(seed), plan});
                const std::string tag = std::string(name) + " drop " + std::to_string(drop) + " seed " +
                                        std::to_string(seed);
                const auto* c = rep.check("conservation");
                o.expect(c && c->pass, tag + ": " + (c ? c->detail : "no check"));
                for (const auto& f : rep.failures)
                    o.expect(f.find("conservation") == std::string::npos, tag + ": " + f);
                for (const auto& [ledger, l] : rep.ledgers.items())
                    o.expect(l["total_supply"] == l["genesis"], tag + ": " + ledger + " supply");
            }
        }
    }
    if (o.pass) o.detail = std::to_string(runs) + " runs conserved";
    return o;
}

// 7. HTLA atomicity under faults.
Outcome htla_faults()
{
    Outcome o;
    btp::FaultPlan plan;
    plan.drop_rate = 0.2;
    plan.duplicate_rate = 0.1;
    plan.max_jitter = Duration{20};
    int payments = 0, fulfilled = 0, runs = 0;
    std::mt19937_64 g(77);
    while (payments < kHtlaPayments) {
        const bool two_hops = runs % 2 == 1;
        auto spec = scenario(two_hops ? "xrp_eth_two_connectors" : "xrp_single_connector");
        spec.actions = {{{"do", "start"}}};
        for (int i = 0; i < 10; ++i)
            spec.actions.push_back({{"do", "pay"},
                                    {"id", "p" + std::to_string(i)},
                                    {"from", "alice"},
                                    {"to", "$bob.example"},
                                    {"amount", 1'000'000 + g() % 50'000'000},
                                    {"max_packet_amount", 1'000'000 + g() % 5'000'000}});
        auto rep = harness::run_scenario(spec, {static_cast<std::uint64_t>(++runs), plan});
        payments += static_cast<int>(rep.payments.size());
        for (const auto& p : rep.payments) fulfilled += p.packets_fulfilled > 0;
        const auto* c = rep.check("htla");
        o.expect(c && c->pass, "run " + std::to_string(runs) + ": " + (c ? c->detail : "no check"));
    }
    if (o.pass)
        o.detail = std::to_string(payments) + " payments, " + std::to_string(fulfilled) +
                   " with fulfilled packets, 0 violations";
    return o;
}

// 8. F08 wins over T04.
Outcome middleware_order()
{
    Outcome o;
    auto loop = EventLoop::simulated(kStart);
    auto log = std::make_shared<EventLog>();
    json cfg = {{"name", "conn1"},
                {"ilp_address", "g.conn1"},
                {"accounts",
                 {{"clients",
                   {{"relation", "child"},
                    {"assetCode", "XRP"},
                    {"assetScale", 9},
                    {"maxPacketAmount", 10},
                    {"balance", {{"maximum", "5"}, {"settleThreshold", "-5"}, {"settleTo", "0"}}}}}}}};
    auto conn = connector::Connector::create(connector::ConnectorConfig::from_json(cfg), loop, log,
                                             std::make_shared<connector::LedgerDirectory>());
    auto attach = [&](const std::string& name) {
        auto [x, y] = btp::make_memory_pair(loop);
        conn->accept_link("clients", y);
        auto c = connector::PluginClient::create(loop, x);
        c->connect(name, "", [](auto) {});
        loop->run_until_idle();
        return c;
    };
    auto alice = attach("alice");
    auto bob = attach("bob");
    auto code = [&](std::uint64_t amount) {
        PreparePacket p{bob->info().address.with_suffix("x"), amount, {}, loop->now() + Duration{30'000}, {}};
        std::string out = "none";
        alice->send_prepare(p, [&](IlpResponse r) {
            out = std::holds_alternative<RejectPacket>(r) ? std::string(std::get<RejectPacket>(r).code.str()) : "fulfill";
        });
        loop->run_until_idle();
        return out;
    };
    const auto both = code(11);
    const auto trust_only = code(6);
    o.expect(both == "F08", "over both limits gave " + both);
    o.expect(trust_only == "T04", "over trust limit gave " + trust_only);
    return o;
}

// floor(amount * rate) with the rate read as an exact decimal string.
std::uint64_t oracle_convert(std::uint64_t amount, const std::string& rate, int from_scale, int to_scale)
{
    const auto dot = rate.find('.');
    const std::string digits = dot == std::string::npos ? rate : rate.substr(0, dot) + rate.substr(dot + 1);
    const int frac = dot == std::string::npos ? 0 : static_cast<int>(rate.size() - dot - 1);
    cpp_int num = cpp_int(amount) * cpp_int(digits);
    cpp_int den = boost::multiprecision::pow(cpp_int(10), frac);
    if (to_scale > from_scale) num *= boost::multiprecision::pow(cpp_int(10), to_scale - from_scale);
    else den *= boost::multiprecision::pow(cpp_int(10), from_scale - to_scale);
    return static_cast<std::uint64_t>(num / den);
}

// 9. Two-connector XRP -> ETH delivery against the composed oracle.
Outcome cross_currency()
{
    Outcome o;
    const auto base = scenario("xrp_eth_two_connectors");
    // Each hop on the path, in order: (rate, from scale, to scale).
    std::vector<std::tuple<std::string, int, int>> hops;
    for (const auto& c : base.connectors) {
        const auto rate = c.contains("rates") ? c["rates"].value("XRP/ETH", std::string("1")) : std::string("1");
        hops.emplace_back(rate, 9, 9);
    }
    std::string summary;
    for (auto [amount, packet] : {std::pair<std::uint64_t, std::uint64_t>{5'000'000'000, 100'000'000},
                                  {4'999'999'999, 99'999'999},
                                  {123'456'789, 777'777}}) {
        auto spec = base;
        spec.actions = {{{"do", "start"}},
                        {{"do", "pay"}, {"id", "x"}, {"from", "alice"}, {"to", "$bob.example"}, {"amount", amount},
                         {"max_packet_amount", packet}}};
        auto rep = harness::run_scenario(spec);
        const auto* p = rep.payment("x");
        if (!p || !p->ok) {
            o.expect(false, "payment failed: " + (p ? p->error : std::string("missing")));
            continue;
        }
        std::uint64_t want = p->source_sent;
        for (const auto& [rate, from, to] : hops) want = oracle_convert(want, rate, from, to);
        const auto got = p->received.value_or(0);
        const auto loss = static_cast<std::int64_t>(want) - static_cast<std::int64_t>(got);
        o.expect(p->source_sent == amount, "sent " + std::to_string(p->source_sent) + " of " + std::to_string(amount));
        o.expect(got == p->delivered, "receiver and sender disagree");
        o.expect(loss >= 0 && static_cast<std::uint64_t>(loss) <= p->packets_fulfilled,
                 std::to_string(amount) + ": got " + std::to_string(got) + ", oracle " + std::to_string(want) +
                     ", packets " + std::to_string(p->packets_fulfilled));
        summary += std::to_string(got) + "/" + std::to_string(want) + " (" + std::to_string(p->packets_fulfilled) +
                   " packets) ";
    }
    if (o.pass) o.detail = summary;
    return o;
}

// 10. Inspector parity.
Outcome inspector_parity()
{
    Outcome o;
    auto ib = node::inspect_hex(testutil::data_file("btp_prepare_dump.txt"));
    o.expect(ib.find("type") == "6", "btp type");
    o.expect(ib.find("requestId") == "530421608", "requestId");
    o.expect(ib.find_all("protocolName") == std::vector<std::string>{"ilp", "ilp"}, "protocolName list");
    o.expect(ib.find_all("amount") == std::vector<std::string>{"2500000000"}, "btp amount");
    o.expect(ib.find("expiresAt") == "2019-06-19T09:43:01.509Z", "btp expiresAt");

    auto ip = node::inspect_hex(testutil::data_file("ilp_prepare_dump.txt"));
    o.expect(ip.find("type") == "12", "ilp type");
    o.expect(ip.find("amount") == "2500000000", "ilp amount");
    o.expect(ip.find("expiresAt") == "2019-06-19T09:43:01.509Z", "ilp expiresAt");

    auto ifu = node::inspect_hex(testutil::data_file("ilp_fulfill_dump.txt"));
    o.expect(ifu.find("type") == "13", "fulfill type");

    // The dumps stop before the destination; a complete frame carries it.
    auto full = node::inspect_bytes(encode_frame(btp::BtpFrame{
        btp::FrameType::Message, 530421608,
        {btp::ProtocolEntry::octets("ilp", encode_packet(testutil::logged_prepare()))}}));
    o.expect(full.find("destination") ==
                 "g.conn1.ilsp_clients.mduni.local.NL8f2khL-VmasfzfA-w_ds5F15J063Tn4oxDwoXTjGw.gHvuhB1r5GN0UQikoCGahPsj",
             "destination " + str(full.find("destination")));
    return o;
}

}  // namespace

int main()
{
    logging::set_level(spdlog::level::err);
    struct Criterion {
        int id;
        const char* name;
        double limit;  // seconds, 0 for none
        std::function<Outcome()> run;
    };
    const Criterion all[] = {
        {1, "golden codec vectors", kGoldenLimit, golden_vectors},
        {2, "payment pointer table", kPointerLimit, pointer_table},
        {3, "single-connector send of 100", kExampleLimit, single_connector_send},
        {4, "settlement policy 20/-15/0", 0, settlement_policy},
        {5, "peering compatibility vs brute force", 0, peering_compat},
        {6, "conservation across scenarios and faults", kConservationLimit, conservation_matrix},
        {7, "HTLA atomicity under faults", 0, htla_faults},
        {8, "F08 before T04", 0, middleware_order},
        {9, "cross-currency delivery vs oracle", 0, cross_currency},
        {10, "inspector parity", 0, inspector_parity},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("threw: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit > 0 && secs >= c.limit) {
            if (out.pass) out.detail = "too slow";
            out.pass = false;
        }
        failed += !out.pass;
        std::printf("%s %2d %-42s %7.3fs%s  %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    c.limit > 0 ? (" (limit " + std::to_string(static_cast<int>(c.limit)) + "s)").c_str() : "",
                    out.detail.c_str());
    }
    return failed ? 1 : 0;
}
