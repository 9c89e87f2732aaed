#include "doctest.h"

#include "ilpsim/harness/scenario.hpp"

using namespace ilp;
using namespace ilp::harness;
using nlohmann::json;

namespace {

ScenarioSpec load(const std::string& name)
{
    return ScenarioSpec::load(std::filesystem::path(ILPSIM_SCENARIO_DIR) / (name + ".json"));
}

// The spec with its actions replaced.
ScenarioSpec with_actions(ScenarioSpec s, std::vector<json> actions)
{
    s.actions = std::move(actions);
    return s;
}

Event ev(const std::string& component, const std::string& kind, const std::string& packet,
         const std::string& detail = {})
{
    Event e;
    e.component = component;
    e.kind = kind;
    e.packet = packet;
    e.detail = detail;
    return e;
}

const char* const kScenarios[] = {"xrp_single_connector", "xrp_eth_one_connector", "xrp_eth_two_connectors",
                                  "switch_swap"};

}  // namespace

TEST_SUITE("harness")
{
TEST_CASE("shipped scenarios pass")
{
    for (const char* name : kScenarios) {
        CAPTURE(name);
        auto rep = run_scenario(load(name), RunOptions{3});
        CHECK(rep.failures.empty());
        for (const auto& c : rep.checks) {
            CAPTURE(c.name);
            CAPTURE(c.detail);
            CHECK(c.pass);
        }
        CHECK(rep.ok());
    }
}

TEST_CASE("runs are deterministic per seed")
{
    auto spec = load("xrp_eth_two_connectors");
    btp::FaultPlan lossy;
    lossy.drop_rate = 0.1;
    auto a = run_scenario(spec, RunOptions{11, lossy});
    auto b = run_scenario(spec, RunOptions{11, lossy});
    CHECK(a.to_json(false) == b.to_json(false));
    auto c = run_scenario(spec, RunOptions{12, lossy});
    CHECK(a.to_json(false)["event_digest"] != c.to_json(false)["event_digest"]);
}

TEST_CASE("report json")
{
    auto rep = run_scenario(load("xrp_single_connector"));
    auto j = rep.to_json(true);
    CHECK(json::parse(j.dump()) == j);
    CHECK(j["events"].size() == rep.events.size());
    CHECK(j["payments"].size() == rep.payments.size());
    REQUIRE(rep.payment("p1"));
    CHECK(rep.payment("p1")->delivered == 100);
    CHECK(rep.check("conservation"));
    CHECK_FALSE(rep.payment("nope"));
}

TEST_CASE("conservation detector")
{
    auto clock = std::make_shared<ManualClock>(Timestamp{Duration{0}});
    auto l = std::make_shared<ledger::Ledger>(ledger::LedgerConfig{"XRP", 6, "g", 1000}, clock);
    l->create_and_fund("a", ledger::key_from_secret("a").public_key(), 10);
    std::map<std::string, std::shared_ptr<ledger::Ledger>> m{{"xrp", l}};
    CHECK(check_conservation(m).pass);
    l->corrupt_balance_for_testing("a", 1);
    auto r = check_conservation(m);
    CHECK_FALSE(r.pass);
    CHECK(r.detail.find("xrp") != std::string::npos);
}

TEST_CASE("htla detector")
{
    const std::string c = "connector:g.c";
    std::vector<Event> good{ev(c, event::kPrepareIn, "aa"),        ev(c, event::kPrepareOut, "aa"),
                            ev("stream:b", event::kConditionMatch, "aa"), ev("stream:b", event::kReceiverCredit, "aa"),
                            ev(c, event::kFulfillVerified, "aa"),  ev(c, event::kDebitOutgoing, "aa"),
                            ev(c, event::kFulfillRelayed, "aa"),   ev("stream:a", event::kSenderFulfilled, "aa")};
    CHECK(check_htla(good).pass);

    auto early_debit = good;
    std::swap(early_debit[4], early_debit[5]);
    CHECK_FALSE(check_htla(early_debit).pass);

    auto blind_credit = good;
    blind_credit.erase(blind_credit.begin() + 2);
    CHECK_FALSE(check_htla(blind_credit).pass);

    auto early_relay = good;
    early_relay.erase(early_relay.begin() + 4);
    CHECK_FALSE(check_htla(early_relay).pass);

    auto no_debit = good;
    no_debit.erase(no_debit.begin() + 5);
    CHECK_FALSE(check_htla(no_debit).pass);
}

TEST_CASE("locality detector")
{
    std::set<std::pair<std::string, std::string>> pairs{{"rA", "rC"}, {"rC", "rA"}, {"rC", "rB"}, {"rB", "rC"}};
    std::vector<Event> ok{ev("n", event::kChannelOpened, "", "payer=rA payee=rC"),
                          ev("n", event::kClaimSigned, "", "payer=rC payee=rB")};
    CHECK(check_locality(ok, pairs).pass);
    ok.push_back(ev("n", event::kClaimSigned, "", "payer=rA payee=rB"));
    CHECK_FALSE(check_locality(ok, pairs).pass);
}

TEST_CASE("a killed payment leaves a consistent world")
{
    auto spec = with_actions(load("xrp_single_connector"),
                             {{{"do", "start"}},
                              {{"do", "pay"},
                               {"id", "k"},
                               {"from", "alice"},
                               {"to", "$bob.example"},
                               {"amount", 1000},
                               {"max_packet_amount", 100},
                               {"kill_after_packets", 4}},
                              {{"do", "settle"}},
                              {{"do", "assert"}, {"check", "conservation"}}});
    auto rep = run_scenario(spec);
    CHECK(rep.ok());
    const auto* p = rep.payment("k");
    REQUIRE(p);
    CHECK_FALSE(p->ok);
    REQUIRE(p->received);
    // Packets in flight at the kill still complete; the sender's own node
    // pays for them, the dead sender never hears back.
    std::uint64_t paid = 0;
    for (const auto& e : rep.events)
        if (e.component == "node:alice" && e.kind == event::kDebitOutgoing) paid += e.amount;
    CHECK(*p->received == paid);
    CHECK(p->delivered <= *p->received);
    CHECK(*p->received < 1000);
    CHECK(*p->received % 100 == 0);
    CHECK(p->delivered == 100 * p->packets_fulfilled);
}

TEST_CASE("a cut link fails the payment without losing money")
{
    auto spec = load("xrp_eth_two_connectors");
    REQUIRE_FALSE(spec.links.empty());
    auto cut = with_actions(spec, {{{"do", "start"}},
                                   {{"do", "kill-link"}, {"link", spec.links[0].name}},
                                   {{"do", "pay"}, {"id", "x"}, {"from", spec.nodes[0].name},
                                    {"to", *spec.nodes[1].receiver}, {"amount", 1000}},
                                   {{"do", "assert"}, {"check", "payment_failed"}, {"payment", "x"}},
                                   {{"do", "assert"}, {"check", "conservation"}}});
    auto rep = run_scenario(cut);
    CHECK(rep.ok());
    REQUIRE(rep.payment("x"));
    CHECK(rep.payment("x")->delivered == 0);
}

TEST_CASE("missing rate surfaces in the payment error")
{
    auto spec = load("switch_swap");
    spec.connectors[0]["rates"] = json::object();
    auto rep = swap_scenario(spec, spec.nodes[0].name, spec.nodes[1].name, 1000, 100);
    const auto* p = rep.payment("swap");
    REQUIRE(p);
    CHECK_FALSE(p->ok);
    CHECK(p->delivered == 0);
    CHECK(p->error.find("no rate") != std::string::npos);
    CHECK(rep.check("conservation")->pass);
}

TEST_CASE("zero swap")
{
    auto spec = load("switch_swap");
    auto rep = swap_scenario(spec, spec.nodes[0].name, spec.nodes[1].name, 0, 100);
    REQUIRE(rep.payment("swap"));
    CHECK(rep.payment("swap")->source_sent == 0);
    CHECK(rep.payment("swap")->delivered == 0);
    CHECK(rep.check("conservation")->pass);
}

TEST_CASE("strict mode stops at the first failed assert")
{
    auto spec = with_actions(load("xrp_single_connector"),
                             {{{"do", "start"}},
                              {{"do", "pay"}, {"id", "p"}, {"from", "alice"}, {"to", "$bob.example"}, {"amount", 10}},
                              {{"do", "assert"}, {"check", "delivered"}, {"payment", "p"}, {"equals", 11}}});
    auto lenient = run_scenario(spec);
    CHECK_FALSE(lenient.ok());
    CHECK(lenient.failures.size() == 1);
    try {
        run_scenario(spec, RunOptions{1, std::nullopt, true});
        FAIL("expected ScenarioAssertFailed");
    } catch (const ScenarioAssertFailed& e) {
        CHECK(e.check_name == "delivered");
    }
}

TEST_CASE("lossless-only asserts are skipped under faults")
{
    btp::FaultPlan lossy;
    lossy.drop_rate = 0.5;
    auto rep = run_scenario(load("xrp_single_connector"), RunOptions{5, lossy});
    CHECK_FALSE(rep.skipped.empty());
    CHECK(rep.failures.empty());
    CHECK(rep.check("conservation")->pass);
    CHECK(rep.check("htla")->pass);
}

TEST_CASE("bad specs fail setup")
{
    auto j = json::parse(R"({"name":"x","ledgers":[],"connectors":[],"nodes":[],"actions":[{"nope":1}]})");
    CHECK_THROWS_AS(ScenarioSpec::from_json(j), SetupFailed);
    CHECK_THROWS_AS(ScenarioSpec::from_json(json::array()), SetupFailed);
    CHECK_THROWS_AS(ScenarioSpec::load("/nonexistent/scenario.json"), SetupFailed);

    auto spec = load("xrp_single_connector");
    spec.nodes[0].connector = "ghost";
    CHECK_THROWS_AS(run_scenario(spec), SetupFailed);
}

TEST_CASE("fault plan json")
{
    auto p = fault_plan_from_json({{"drop_rate", 0.25}, {"latency_ms", 7}});
    CHECK(p.drop_rate == doctest::Approx(0.25));
    CHECK_FALSE(p.lossless());
    CHECK(fault_plan_from_json(to_json(p)).drop_rate == doctest::Approx(0.25));
    CHECK(fault_plan_from_json(json::object()).lossless());
}
}
