#include "ilpsim/harness/scenario.hpp"

#include <fstream>
#include <sstream>

#include "ilpsim/connector/connector.hpp"
#include "ilpsim/ledger/service.hpp"
#include "ilpsim/node/node.hpp"
#include "ilpsim/spsp/spsp.hpp"
#include "ilpsim/stream/stream.hpp"

namespace ilp::harness {

using nlohmann::json;

namespace {

constexpr Timestamp kScenarioEpoch{Duration{1'560'937'381'509}};  // 2019-06-19T09:43:01.509Z

std::string require_string(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key) || !j[key].is_string()) throw SetupFailed(where + " needs string \"" + key + "\"");
    return j[key].get<std::string>();
}

std::uint64_t u64_of(const json& j, const char* key, std::uint64_t fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return connector::json_u64(j[key], key);
    } catch (const std::exception& e) {
        throw SetupFailed(e.what());
    }
}

// Parses "key=value" pairs out of an event detail string.
std::map<std::string, std::string> detail_fields(const std::string& detail)
{
    std::map<std::string, std::string> out;
    std::istringstream in(detail);
    std::string tok;
    while (in >> tok) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

}  // namespace

btp::FaultPlan fault_plan_from_json(const json& j)
{
    btp::FaultPlan p;
    if (!j.is_object()) throw SetupFailed("fault plan must be an object");
    p.drop_rate = j.value("drop_rate", 0.0);
    p.duplicate_rate = j.value("duplicate_rate", 0.0);
    p.latency = Duration{j.value("latency_ms", std::int64_t{1})};
    p.max_jitter = Duration{j.value("max_jitter_ms", std::int64_t{0})};
    if (p.drop_rate < 0 || p.drop_rate > 1 || p.duplicate_rate < 0 || p.duplicate_rate > 1)
        throw SetupFailed("fault rates must lie in [0, 1]");
    if (p.latency.count() < 0 || p.max_jitter.count() < 0) throw SetupFailed("fault delays must be >= 0");
    return p;
}

json to_json(const btp::FaultPlan& p)
{
    return {{"drop_rate", p.drop_rate},
            {"duplicate_rate", p.duplicate_rate},
            {"latency_ms", p.latency.count()},
            {"max_jitter_ms", p.max_jitter.count()}};
}

ScenarioSpec ScenarioSpec::from_json(const json& j)
{
    ScenarioSpec s;
    if (!j.is_object()) throw SetupFailed("scenario must be a JSON object");
    s.name = require_string(j, "name", "scenario");
    s.description = j.value("description", std::string{});
    for (const auto& l : j.value("ledgers", json::array())) s.ledgers.push_back(l);
    for (const auto& c : j.value("connectors", json::array())) s.connectors.push_back(c);
    for (const auto& n : j.value("nodes", json::array())) {
        NodeSpec ns;
        ns.name = require_string(n, "name", "node");
        ns.connector = require_string(n, "connector", "node " + ns.name);
        ns.account = require_string(n, "account", "node " + ns.name);
        if (!n.contains("config")) throw SetupFailed("node " + ns.name + " needs \"config\"");
        ns.config = n["config"];
        if (n.contains("receiver")) ns.receiver = require_string(n, "receiver", "node " + ns.name);
        s.nodes.push_back(std::move(ns));
    }
    for (const auto& l : j.value("links", json::array())) {
        LinkSpec ls;
        ls.dialer = require_string(l, "dialer", "link");
        ls.dialer_account = require_string(l, "dialer_account", "link");
        ls.listener = require_string(l, "listener", "link");
        ls.listener_account = require_string(l, "listener_account", "link");
        ls.name = l.value("name", ls.dialer + "-" + ls.listener);
        ls.auth_name = l.value("auth_name", ls.dialer);
        ls.token = l.value("token", std::string{});
        s.links.push_back(std::move(ls));
    }
    for (const auto& a : j.value("actions", json::array())) {
        if (!a.is_object() || !a.contains("do") || !a["do"].is_string())
            throw SetupFailed("every action needs a \"do\" verb");
        s.actions.push_back(a);
    }
    if (j.contains("faults")) s.faults = fault_plan_from_json(j["faults"]);
    return s;
}

ScenarioSpec ScenarioSpec::load(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw SetupFailed("cannot read " + file.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw SetupFailed(file.string() + ": " + e.what());
    }
}

json CheckResult::to_json() const { return {{"name", name}, {"pass", pass}, {"detail", detail}}; }

json PaymentResult::to_json() const
{
    json j = {{"id", id},
              {"from", from},
              {"to", to},
              {"amount", amount},
              {"source_sent", source_sent},
              {"delivered", delivered},
              {"received", received ? json(*received) : json(nullptr)},
              {"packets_fulfilled", packets_fulfilled},
              {"packets_rejected", packets_rejected},
              {"ok", ok}};
    if (!error.empty()) j["error"] = error;
    return j;
}

bool ScenarioReport::ok() const
{
    if (!failures.empty()) return false;
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const PaymentResult* ScenarioReport::payment(const std::string& id) const
{
    for (const auto& p : payments)
        if (p.id == id) return &p;
    return nullptr;
}

const CheckResult* ScenarioReport::check(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {
json event_json(const Event& e)
{
    return {{"at", format_iso8601(e.at)}, {"component", e.component}, {"kind", e.kind}, {"packet", e.packet},
            {"peer", e.peer}, {"amount", e.amount}, {"detail", e.detail}};
}
}  // namespace

json ScenarioReport::to_json(bool with_events) const
{
    json pays = json::array();
    for (const auto& p : payments) pays.push_back(p.to_json());
    json cks = json::array();
    for (const auto& c : checks) cks.push_back(c.to_json());
    json evs = json::array();
    for (const auto& e : events) evs.push_back(event_json(e));
    auto digest = to_hex(sha256(as_bytes(evs.dump())));
    json j = {{"scenario", scenario},
              {"seed", seed},
              {"faults", harness::to_json(faults)},
              {"ok", ok()},
              {"payments", std::move(pays)},
              {"ledgers", ledgers},
              {"balance_deltas", balance_deltas},
              {"connectors", connectors},
              {"checks", std::move(cks)},
              {"failures", failures},
              {"skipped", skipped},
              {"frames", {{"sent", frames_sent}, {"dropped", frames_dropped}, {"duplicated", frames_duplicated}}},
              {"event_count", events.size()},
              {"event_digest", digest}};
    if (with_events) j["events"] = std::move(evs);
    return j;
}

CheckResult check_conservation(const std::map<std::string, std::shared_ptr<ledger::Ledger>>& ledgers)
{
    CheckResult r{"conservation", true, {}};
    for (const auto& [name, l] : ledgers) {
        l->finalize_expired();
        auto total = l->total_supply();
        auto genesis = l->config().genesis_balance;
        if (total != genesis) {
            r.pass = false;
            r.detail += name + ": supply " + std::to_string(total) + " != genesis " + std::to_string(genesis) + "; ";
        }
    }
    if (r.pass) r.detail = std::to_string(ledgers.size()) + " ledgers conserved";
    return r;
}

CheckResult check_htla(const std::vector<Event>& events)
{
    CheckResult r{"htla", true, {}};
    using Key = std::pair<std::string, std::string>;  // component, packet
    std::map<Key, int> verified, debited, relayed;
    std::set<std::string> matched;  // component|packet of condition matches
    std::set<std::string> fulfilled_at_sender;
    std::map<std::string, std::set<std::string>> forwarded_by;  // packet -> components
    std::map<Key, int> debits_total;
    std::size_t violations = 0;
    auto violate = [&](const std::string& what) {
        if (violations++ < 5) r.detail += what + "; ";
        r.pass = false;
    };
    for (const auto& e : events) {
        if (e.packet.empty()) continue;
        Key k{e.component, e.packet};
        if (e.kind == event::kFulfillVerified) ++verified[k];
        else if (e.kind == event::kDebitOutgoing) {
            if (++debited[k] > verified[k]) violate(e.component + " debited " + e.packet.substr(0, 12) + " unverified");
            ++debits_total[k];
        } else if (e.kind == event::kFulfillRelayed) {
            if (++relayed[k] > verified[k])
                violate(e.component + " relayed fulfill " + e.packet.substr(0, 12) + " unverified");
        } else if (e.kind == event::kConditionMatch) {
            matched.insert(e.component + "|" + e.packet);
        } else if (e.kind == event::kReceiverCredit) {
            if (!matched.contains(e.component + "|" + e.packet))
                violate(e.component + " credited " + e.packet.substr(0, 12) + " without condition match");
        } else if (e.kind == event::kPrepareOut) {
            forwarded_by[e.packet].insert(e.component);
        } else if (e.kind == event::kSenderFulfilled) {
            fulfilled_at_sender.insert(e.packet);
        }
    }
    for (const auto& p : fulfilled_at_sender)
        for (const auto& c : forwarded_by[p])
            if (debits_total[{c, p}] == 0) violate(c + " forwarded fulfilled " + p.substr(0, 12) + " without debit");
    if (violations > 5) r.detail += std::to_string(violations) + " violations in total";
    if (r.pass)
        r.detail = std::to_string(fulfilled_at_sender.size()) + " fulfilled packets, " +
                   std::to_string(verified.size()) + " verified hop fulfillments";
    return r;
}

CheckResult check_locality(const std::vector<Event>& events, const std::set<std::pair<std::string, std::string>>& pairs)
{
    CheckResult r{"locality", true, {}};
    std::size_t seen = 0;
    for (const auto& e : events) {
        if (e.kind != event::kClaimSigned && e.kind != event::kChannelOpened) continue;
        auto f = detail_fields(e.detail);
        ++seen;
        if (!pairs.contains({f["payer"], f["payee"]})) {
            r.pass = false;
            r.detail += e.kind + " " + f["payer"] + "->" + f["payee"] + " is not a direct link; ";
        }
    }
    if (r.pass) r.detail = std::to_string(seen) + " channel events between direct peers";
    return r;
}

namespace {

// Links wired in memory. Node and connector links share the mutable fault
// plan; app links are always lossless.
struct Wire {
    std::shared_ptr<btp::Transport> a;
    std::shared_ptr<btp::Transport> b;
    void cut()
    {
        a->close();
        b->close();
    }
};

struct NodeRt {
    const NodeSpec* spec = nullptr;
    std::unique_ptr<node::UplinkNode> node;
    std::shared_ptr<connector::PluginClient> sender;
    std::shared_ptr<connector::PluginClient> receiver_link;
    std::shared_ptr<stream::StreamServer> receiver;
    std::unique_ptr<spsp::SpspServer> spsp;
    std::string receiver_url;
};

class World {
public:
    World(const ScenarioSpec& spec, const RunOptions& opts)
        : spec_(spec),
          opts_(opts),
          loop_(EventLoop::simulated(kScenarioEpoch)),
          log_(std::make_shared<EventLog>()),
          rng_(std::make_shared<SeededRandom>(opts.seed)),
          fault_rng_(std::make_shared<SeededRandom>(opts.seed * 0x9e3779b97f4a7c15ULL + 1)),
          plan_(std::make_shared<btp::FaultPlan>()),
          counters_(std::make_shared<btp::FaultCounters>()),
          directory_(std::make_shared<connector::LedgerDirectory>())
    {
        report_.scenario = spec.name;
        report_.seed = opts.seed;
        report_.faults = opts.faults.value_or(spec.faults.value_or(btp::FaultPlan{}));
    }

    ScenarioReport run()
    {
        build();
        for (const auto& a : spec_.actions) {
            try {
                act(a);
            } catch (const ScenarioAssertFailed&) {
                throw;
            } catch (const SetupFailed&) {
                throw;
            } catch (const std::exception& e) {
                report_.failures.push_back(a["do"].get<std::string>() + ": " + e.what());
            }
        }
        finish();
        return std::move(report_);
    }

    World(const World&) = delete;

    ~World()
    {
        for (auto& [_, n] : nodes_)
            if (n.spsp) web_.unmount(n.receiver_url);
    }

private:
    void build()
    {
        for (const auto& lj : spec_.ledgers) {
            ledger::LedgerBootstrap b;
            try {
                b = ledger::LedgerBootstrap::from_json(lj);
                auto l = b.instantiate(loop_);
                directory_->add(b.name, l);
                ledgers_[b.name] = l;
            } catch (const std::exception& e) {
                throw SetupFailed("ledger: " + std::string(e.what()));
            }
            for (const auto& a : b.accounts) funded_[b.name][a.id] = a.balance;
        }
        for (const auto& cj : spec_.connectors) {
            try {
                auto cfg = connector::ConnectorConfig::from_json(cj);
                auto name = cfg.name;
                if (connectors_.contains(name)) throw SetupFailed("duplicate connector " + name);
                connectors_[name] = connector::Connector::create(std::move(cfg), loop_, log_, directory_);
            } catch (const connector::ConfigError& e) {
                throw SetupFailed(std::string("connector: ") + e.what());
            }
        }
        for (const auto& ns : spec_.nodes) {
            if (nodes_.contains(ns.name)) throw SetupFailed("duplicate node " + ns.name);
            if (!connectors_.contains(ns.connector)) throw SetupFailed("node " + ns.name + ": unknown connector");
            NodeRt rt;
            rt.spec = &ns;
            try {
                auto cfg = node::UplinkConfig::from_json(ns.config);
                cfg.name = ns.name;
                rt.node = std::make_unique<node::UplinkNode>(std::move(cfg), loop_, log_, directory_);
            } catch (const connector::ConfigError& e) {
                throw SetupFailed("node " + ns.name + ": " + e.what());
            }
            nodes_.emplace(ns.name, std::move(rt));
        }
    }

    std::pair<std::shared_ptr<btp::Transport>, std::shared_ptr<btp::Transport>> lossy_pair()
    {
        return btp::make_memory_pair(loop_, std::shared_ptr<const btp::FaultPlan>(plan_), fault_rng_, counters_);
    }

    void expect_ok(const std::string& what, std::shared_ptr<std::optional<std::optional<std::string>>> result)
    {
        loop_->run_until_idle();
        if (!*result) throw SetupFailed(what + " did not complete");
        if (**result) throw SetupFailed(what + ": " + ***result);
    }

    static auto done_slot() { return std::make_shared<std::optional<std::optional<std::string>>>(); }

    void start()
    {
        if (started_) throw SetupFailed("start given twice");
        started_ = true;
        for (const auto& l : spec_.links) {
            auto d = connectors_.find(l.dialer);
            auto s = connectors_.find(l.listener);
            if (d == connectors_.end() || s == connectors_.end()) throw SetupFailed("link " + l.name + ": unknown connector");
            auto [x, y] = lossy_pair();
            wires_[l.name] = {x, y};
            s->second->accept_link(l.listener_account, y);
            auto slot = done_slot();
            d->second->dial_link(l.dialer_account, x, l.auth_name, l.token, [slot](auto err) { *slot = err; });
            expect_ok("link " + l.name, slot);
        }
        for (auto& [name, rt] : nodes_) {
            auto [x, y] = lossy_pair();
            wires_["node:" + name] = {x, y};
            connectors_.at(rt.spec->connector)->accept_link(rt.spec->account, y);
            auto slot = done_slot();
            rt.node->connect_parent(x, [slot](auto err) { *slot = err; });
            expect_ok("node " + name, slot);
        }
        for (auto& [name, rt] : nodes_) {
            rt.sender = attach_app(name, rt, "sender");
            if (!rt.spec->receiver) continue;
            rt.receiver_link = attach_app(name, rt, "receiver");
            rt.receiver = stream::StreamServer::create(rt.receiver_link, rng_, log_, loop_, "stream:" + name);
            rt.spsp = std::make_unique<spsp::SpspServer>(rt.receiver, "127.0.0.1", 0);
            rt.receiver_url = spsp::resolve_pointer(*rt.spec->receiver, spsp::Profile::Simulation);
            auto* srv = rt.spsp.get();
            web_.mount(rt.receiver_url, [srv] {
                try {
                    return srv->respond();
                } catch (const std::exception& e) {
                    return spsp::HttpResult{503, json{{"error", e.what()}}.dump()};
                }
            });
        }
        *plan_ = report_.faults;
    }

    std::shared_ptr<connector::PluginClient> attach_app(const std::string& node_name, NodeRt& rt,
                                                        const std::string& app)
    {
        auto [x, y] = btp::make_memory_pair(loop_);
        wires_["app:" + node_name + ":" + app] = {x, y};
        rt.node->attach_app(y);
        auto client = connector::PluginClient::create(loop_, x);
        auto slot = done_slot();
        client->connect(app, "", [slot](auto err) { *slot = err; });
        expect_ok("app " + app + " on " + node_name, slot);
        return client;
    }

    NodeRt& node(const json& a, const char* key)
    {
        auto name = require_string(a, key, a["do"].get<std::string>());
        auto it = nodes_.find(name);
        if (it == nodes_.end()) throw std::invalid_argument("unknown node " + name);
        return it->second;
    }

    void pay(const json& a)
    {
        if (!started_) throw std::logic_error("pay before start");
        auto& from = node(a, "from");
        PaymentResult pr;
        pr.id = a.value("id", "p" + std::to_string(report_.payments.size() + 1));
        pr.from = from.spec->name;
        pr.to = require_string(a, "to", "pay");
        pr.amount = u64_of(a, "amount", 0);

        stream::SendOptions so;
        so.max_packet_amount = u64_of(a, "max_packet_amount", so.max_packet_amount);
        if (a.contains("kill_after_packets")) so.kill_after_packets = u64_of(a, "kill_after_packets", 0);

        // Receiver ground truth: whichever node serves the pointer.
        NodeRt* target = nullptr;
        for (auto& [_, rt] : nodes_)
            if (rt.spec->receiver && *rt.spec->receiver == pr.to) target = &rt;
        const std::uint64_t before = target && target->receiver ? target->receiver->total_received() : 0;

        bool done = false;
        loop_->post([&] {
            spsp::pay(pr.to, pr.amount, loop_, from.sender, web_, so, log_, "stream:" + pr.from,
                      [&](std::optional<spsp::PaymentReport> rep, std::optional<spsp::SpspError> err) {
                          done = true;
                          if (err) {
                              pr.error = err->what();
                              return;
                          }
                          pr.source_sent = rep->stream.source_sent;
                          pr.delivered = rep->stream.delivered;
                          pr.packets_fulfilled = rep->stream.packets_fulfilled;
                          pr.packets_rejected = rep->stream.packets_rejected;
                          pr.ok = rep->stream.ok();
                          if (rep->stream.error)
                              pr.error = std::string(stream::to_string(*rep->stream.error)) + ": " +
                                         rep->stream.error_detail;
                      });
        });
        loop_->run_until([&] { return done; });
        loop_->run_until_idle();
        if (!done) pr.error = "payment did not finish";
        if (target && target->receiver) pr.received = target->receiver->total_received() - before;
        report_.payments.push_back(std::move(pr));
    }

    std::vector<std::shared_ptr<connector::Connector>> all_connectors(const json& a)
    {
        std::vector<std::shared_ptr<connector::Connector>> out;
        if (a.contains("node")) {
            out.push_back(node(a, "node").node->connector());
            return out;
        }
        if (a.contains("connector")) {
            auto name = require_string(a, "connector", "action");
            if (!connectors_.contains(name)) throw std::invalid_argument("unknown connector " + name);
            out.push_back(connectors_[name]);
            return out;
        }
        for (auto& [_, c] : connectors_) out.push_back(c);
        for (auto& [_, n] : nodes_) out.push_back(n.node->connector());
        return out;
    }

    void act(const json& a)
    {
        const auto verb = a["do"].get<std::string>();
        if (verb == "start") return start();
        if (verb == "pay") return pay(a);
        if (verb == "kill-link") {
            auto name = require_string(a, "link", "kill-link");
            auto it = wires_.find(name);
            if (it == wires_.end()) throw std::invalid_argument("unknown link " + name);
            it->second.cut();
            loop_->run_until_idle();
            return;
        }
        if (verb == "advance-clock") {
            loop_->advance(Duration{static_cast<std::int64_t>(u64_of(a, "ms", 0))});
            loop_->run_until_idle();
            return;
        }
        if (verb == "settle") {
            for (auto& c : all_connectors(a)) c->redeem_all();
            loop_->run_until_idle();
            return;
        }
        if (verb == "cleanup") {
            // Without a target only the nodes clean up, as a user would.
            if (!a.contains("node") && !a.contains("connector")) {
                for (auto& [_, n] : nodes_) n.node->cleanup();
            } else {
                for (auto& c : all_connectors(a)) c->cleanup();
            }
            loop_->run_until_idle();
            return;
        }
        if (verb == "assert") return assert_(a);
        throw std::invalid_argument("unknown action " + verb);
    }

    void fail(const std::string& check, const std::string& detail)
    {
        if (opts_.strict) throw ScenarioAssertFailed(check, detail);
        report_.failures.push_back("assert " + check + ": " + detail);
    }

    void assert_(const json& a)
    {
        const auto check = require_string(a, "check", "assert");
        if (a.value("lossless_only", false) && !report_.faults.lossless()) {
            report_.skipped.push_back(check + (a.contains("payment") ? " " + a["payment"].get<std::string>() : ""));
            return;
        }
        if (check == "conservation" || check == "htla" || check == "locality" || check == "neutrality") {
            auto r = run_check(check);
            if (!r.pass) fail(check, r.detail);
            return;
        }
        if (check == "delivered" || check == "received") {
            auto id = require_string(a, "payment", "assert");
            const auto* p = report_.payment(id);
            if (!p) return fail(check, "no payment " + id);
            const auto got = check == "delivered" ? p->delivered : p->received.value_or(0);
            const auto want = u64_of(a, "equals", 0);
            if (got != want) fail(check, id + " got " + std::to_string(got) + ", want " + std::to_string(want));
            return;
        }
        if (check == "payment_ok" || check == "payment_failed") {
            auto id = require_string(a, "payment", "assert");
            const auto* p = report_.payment(id);
            if (!p) return fail(check, "no payment " + id);
            if (p->ok != (check == "payment_ok")) fail(check, id + (p->ok ? " succeeded" : " failed: " + p->error));
            return;
        }
        if (check == "no_open_channels") {
            auto& n = node(a, "node");
            for (const auto& ch : n.node->info().value("channels", json::array()))
                if (ch.value("state", std::string{}) != "closed")
                    return fail(check, n.spec->name + " channel " + ch.value("channel_id", std::string{}) + " is " +
                                           ch.value("state", std::string{}));
            return;
        }
        throw std::invalid_argument("unknown check " + check);
    }

    std::set<std::pair<std::string, std::string>> direct_pairs() const
    {
        std::set<std::pair<std::string, std::string>> pairs;
        auto add = [&](const connector::AccountConfig* x, const connector::AccountConfig* y) {
            if (!x || !y || x->ledger_account.empty() || y->ledger_account.empty()) return;
            pairs.insert({x->ledger_account, y->ledger_account});
            pairs.insert({y->ledger_account, x->ledger_account});
        };
        for (const auto& l : spec_.links)
            add(connectors_.at(l.dialer)->config().account(l.dialer_account),
                connectors_.at(l.listener)->config().account(l.listener_account));
        for (const auto& [_, n] : nodes_)
            add(&n.node->config().parent, connectors_.at(n.spec->connector)->config().account(n.spec->account));
        return pairs;
    }

    CheckResult neutrality() const
    {
        CheckResult r{"neutrality", true, {}};
        std::size_t n = 0;
        auto scan = [&](const connector::Connector& c) {
            const auto& rates = c.config().rates;
            connector::RateBackend fair = rates;
            fair.set_spread(connector::Decimal{});
            for (const auto& f : c.forwards()) {
                ++n;
                std::uint64_t ideal = 0;
                try {
                    ideal = fair.convert(f.in_amount, f.from_asset, f.from_scale, f.to_asset, f.to_scale);
                } catch (const std::exception& e) {
                    r.pass = false;
                    r.detail += c.component() + ": " + e.what() + "; ";
                    continue;
                }
                // Never pays out more than the market value; without a spread
                // pays exactly that.
                if (f.out_amount > ideal || (rates.spread().is_zero() && f.out_amount != ideal)) {
                    r.pass = false;
                    r.detail += c.component() + " forwarded " + std::to_string(f.in_amount) + " as " +
                                std::to_string(f.out_amount) + " (fair " + std::to_string(ideal) + "); ";
                }
            }
        };
        for (const auto& [_, c] : connectors_) scan(*c);
        for (const auto& [_, nd] : nodes_) scan(*nd.node->connector());
        if (r.pass) r.detail = std::to_string(n) + " forwards at or below fair value";
        return r;
    }

    CheckResult run_check(const std::string& name)
    {
        if (name == "conservation") return check_conservation(ledgers_);
        if (name == "htla") return check_htla(log_->snapshot());
        if (name == "locality") return check_locality(log_->snapshot(), direct_pairs());
        return neutrality();
    }

    void finish()
    {
        loop_->run_until_idle();
        for (const char* c : {"conservation", "htla", "locality", "neutrality"}) report_.checks.push_back(run_check(c));
        for (const auto& [name, l] : ledgers_) {
            json accts = json::object();
            for (const auto& a : l->accounts()) accts[a.id] = a.balance;
            json chans = json::array();
            for (const auto& ch : l->channels()) chans.push_back(ledger::to_json(ch));
            report_.ledgers[name] = {{"genesis", l->config().genesis_balance},
                                     {"total_supply", l->total_supply()},
                                     {"accounts", std::move(accts)},
                                     {"channels", std::move(chans)}};
            json deltas = json::object();
            for (const auto& [id, funded] : funded_[name]) {
                auto acct = l->account(id);
                deltas[id] = static_cast<std::int64_t>(acct ? acct->balance : 0) - static_cast<std::int64_t>(funded);
            }
            report_.balance_deltas[name] = std::move(deltas);
        }
        for (const auto& [name, c] : connectors_)
            report_.connectors[name] = {{"balances", c->balances_json()}, {"forwards", c->forwards().size()}};
        for (const auto& [name, n] : nodes_) report_.connectors["node:" + name] = n.node->info();
        report_.events = log_->snapshot();
        report_.frames_sent = counters_->sent;
        report_.frames_dropped = counters_->dropped;
        report_.frames_duplicated = counters_->duplicated;
    }

    const ScenarioSpec& spec_;
    RunOptions opts_;
    std::shared_ptr<EventLoop> loop_;
    std::shared_ptr<EventLog> log_;
    std::shared_ptr<SeededRandom> rng_;
    std::shared_ptr<SeededRandom> fault_rng_;
    std::shared_ptr<btp::FaultPlan> plan_;
    std::shared_ptr<btp::FaultCounters> counters_;
    std::shared_ptr<connector::LedgerDirectory> directory_;
    spsp::InProcessWeb web_;
    std::map<std::string, std::shared_ptr<ledger::Ledger>> ledgers_;
    std::map<std::string, std::map<std::string, std::uint64_t>> funded_;
    std::map<std::string, std::shared_ptr<connector::Connector>> connectors_;
    std::map<std::string, NodeRt> nodes_;
    std::map<std::string, Wire> wires_;
    bool started_ = false;
    ScenarioReport report_;
};

}  // namespace

ScenarioReport run_scenario(const ScenarioSpec& spec, const RunOptions& opts)
{
    World w(spec, opts);
    return w.run();
}

ScenarioReport swap_scenario(const ScenarioSpec& topology, const std::string& src, const std::string& dst,
                             std::uint64_t amount, std::uint64_t max_packet_amount, const RunOptions& opts)
{
    ScenarioSpec s = topology;
    const NodeSpec* to = nullptr;
    for (const auto& n : s.nodes)
        if (n.name == dst) to = &n;
    if (!to || !to->receiver) throw SetupFailed("swap target " + dst + " serves no receiver");
    s.actions = {
        {{"do", "start"}},
        {{"do", "pay"}, {"id", "swap"}, {"from", src}, {"to", *to->receiver}, {"amount", amount},
         {"max_packet_amount", max_packet_amount}},
        {{"do", "settle"}},
        {{"do", "cleanup"}, {"node", src}},
        {{"do", "cleanup"}, {"node", dst}},
        {{"do", "advance-clock"}, {"ms", 3'601'000}},
        {{"do", "assert"}, {"check", "conservation"}},
    };
    return run_scenario(s, opts);
}

json swap_summary(const ScenarioSpec& topology, const ScenarioReport& report, const std::string& src,
                  const std::string& dst)
{
    json out = {{"src", src}, {"dst", dst}};
    for (const auto& n : topology.nodes) {
        if (n.name != src && n.name != dst) continue;
        auto cfg = node::UplinkConfig::from_json(n.config);
        const auto& p = cfg.parent;
        std::string ledger_name = p.ledger.value_or("");
        json side = {{"ledger", ledger_name}, {"account", p.ledger_account}, {"asset_code", p.asset_code}};
        if (report.balance_deltas.contains(ledger_name) && report.balance_deltas[ledger_name].contains(p.ledger_account))
            side["delta"] = report.balance_deltas[ledger_name][p.ledger_account];
        out[n.name == src ? "source" : "destination"] = std::move(side);
    }
    if (const auto* p = report.payment("swap")) out["payment"] = p->to_json();
    return out;
}

}  // namespace ilp::harness
