#include "ilpsim/connector/config.hpp"

#include "ilpsim/ledger/ledger.hpp"

#include <charconv>
#include <set>

namespace ilp::connector {

using nlohmann::json;

const char* to_string(Relation r)
{
    switch (r) {
    case Relation::Parent: return "parent";
    case Relation::Child: return "child";
    case Relation::Peer: return "peer";
    }
    return "?";
}

std::uint64_t json_u64(const json& v, const std::string& what)
{
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::uint64_t out = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec == std::errc{} && p == s.data() + s.size()) return out;
    }
    throw ConfigError(what + " must be a non-negative integer, got " + v.dump());
}

namespace {

void warn_unknown(const json& j, const std::set<std::string>& known, const std::string& where,
                  std::vector<std::string>& warnings)
{
    for (const auto& [k, _] : j.items())
        if (!known.contains(k)) warnings.push_back("unknown key " + where + "." + k + " ignored");
}

std::optional<std::string> first_string(const json& j, std::initializer_list<const char*> keys)
{
    for (const char* k : keys)
        if (j.contains(k) && j[k].is_string()) return j[k].get<std::string>();
    return std::nullopt;
}

std::uint16_t port_of(const json& v, const std::string& what)
{
    auto p = json_u64(v, what);
    if (p > 65535) throw ConfigError(what + " out of range");
    return static_cast<std::uint16_t>(p);
}

Duration ms_of(const json& v, const std::string& what) { return Duration(json_u64(v, what)); }

}  // namespace

AccountConfig AccountConfig::from_json(const std::string& id, const json& j, std::vector<std::string>& warnings)
{
    if (!j.is_object()) throw ConfigError("account " + id + " must be an object");
    if (!IlpAddress::is_valid_segment(id)) throw ConfigError("account id \"" + id + "\" is not an address segment");
    warn_unknown(j,
                 {"relation", "plugin", "assetCode", "assetScale", "balance", "options", "maxPacketAmount",
                  "sendRoutes", "receiveRoutes"},
                 "accounts." + id, warnings);
    AccountConfig a;
    a.id = id;
    const auto rel = j.value("relation", std::string{});
    if (rel == "parent") a.relation = Relation::Parent;
    else if (rel == "child") a.relation = Relation::Child;
    else if (rel == "peer") a.relation = Relation::Peer;
    else throw ConfigError("account " + id + ": relation must be parent, child or peer");
    if (!j.contains("assetCode") || !j["assetCode"].is_string())
        throw ConfigError("account " + id + ": assetCode is required");
    a.asset_code = j["assetCode"].get<std::string>();
    if (!j.contains("assetScale")) throw ConfigError("account " + id + ": assetScale is required");
    a.asset_scale = static_cast<int>(json_u64(j["assetScale"], id + ".assetScale"));
    if (a.asset_scale > 19) throw ConfigError("account " + id + ": assetScale must be <= 19");

    const json opts = j.value("options", json::object());
    warn_unknown(opts,
                 {"port", "listener", "server", "secret", "xrpSecret", "ethereumPrivateKey", "address", "peerAddress",
                  "ledger", "xrpServer", "rippledServer", "ethereumProvider", "currencyScale",
                  "outgoingChannelAmount", "minIncomingChannelAmount", "maxPacketAmount", "settleDelay",
                  "redeemEagerly", "role", "tokens", "balance", "getGasPrice"},
                 "accounts." + id + ".options", warnings);

    const json* balance = j.contains("balance") ? &j["balance"] : opts.contains("balance") ? &opts["balance"] : nullptr;
    if (balance) {
        try {
            std::vector<std::string> w;
            a.balance = settlement::BalancePolicy::from_json(*balance, &w);
            for (auto& s : w) warnings.push_back("account " + id + ": " + s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("account " + id + ": " + e.what());
        }
    }
    if (j.contains("maxPacketAmount")) a.max_packet_amount = json_u64(j["maxPacketAmount"], id + ".maxPacketAmount");
    if (opts.contains("maxPacketAmount"))
        a.max_packet_amount = json_u64(opts["maxPacketAmount"], id + ".options.maxPacketAmount");

    if (opts.contains("port")) a.listen_port = port_of(opts["port"], id + ".options.port");
    if (opts.contains("listener")) {
        const auto& l = opts["listener"];
        if (l.contains("port")) a.listen_port = port_of(l["port"], id + ".options.listener.port");
        if (l.contains("secret")) a.listen_secret = l["secret"].get<std::string>();
    }
    if (opts.contains("tokens"))
        for (const auto& [name, tok] : opts["tokens"].items()) a.tokens[name] = tok.get<std::string>();
    if (opts.contains("server")) a.server = opts["server"].get<std::string>();

    a.ledger = first_string(opts, {"ledger", "xrpServer", "rippledServer", "ethereumProvider"});
    a.ledger_account = first_string(opts, {"address"}).value_or(std::string{});
    a.ledger_secret = first_string(opts, {"secret", "xrpSecret", "ethereumPrivateKey"}).value_or(std::string{});
    a.peer_ledger_account = first_string(opts, {"peerAddress"});
    if (opts.contains("currencyScale"))
        a.ledger_scale = static_cast<int>(json_u64(opts["currencyScale"], id + ".options.currencyScale"));
    if (opts.contains("outgoingChannelAmount"))
        a.outgoing_channel_amount = json_u64(opts["outgoingChannelAmount"], id + ".options.outgoingChannelAmount");
    if (opts.contains("minIncomingChannelAmount"))
        a.min_incoming_channel_amount =
            json_u64(opts["minIncomingChannelAmount"], id + ".options.minIncomingChannelAmount");
    if (opts.contains("settleDelay"))
        a.settle_delay = static_cast<std::uint32_t>(json_u64(opts["settleDelay"], id + ".options.settleDelay"));
    a.redeem_eagerly = opts.value("redeemEagerly", false);

    if (a.listen_port && a.server) warnings.push_back("account " + id + " has both port and server; both are used");
    if (a.ledger && a.ledger_secret.empty()) throw ConfigError("account " + id + ": options.secret is required");
    if (a.ledger && a.ledger_account.empty()) {
        a.ledger_account = ledger::account_from_secret(a.ledger_secret);
        warnings.push_back("account " + id + ": no options.address, using " + a.ledger_account +
                           " derived from the secret");
    }
    return a;
}

const AccountConfig* ConnectorConfig::account(const std::string& id) const
{
    for (const auto& a : accounts)
        if (a.id == id) return &a;
    return nullptr;
}

ConnectorConfig ConnectorConfig::from_json(const json& input)
{
    ConnectorConfig c;
    json j = input;
    if (input.contains("env")) {
        const auto& env = input["env"];
        j = json::object();
        if (env.contains("CONNECTOR_ILP_ADDRESS")) j["ilp_address"] = env["CONNECTOR_ILP_ADDRESS"];
        if (env.contains("CONNECTOR_BACKEND")) j["backend"] = env["CONNECTOR_BACKEND"];
        if (env.contains("CONNECTOR_SPREAD")) j["spread"] = env["CONNECTOR_SPREAD"];
        if (env.contains("CONNECTOR_ADMIN_API_PORT")) j["admin_api_port"] = env["CONNECTOR_ADMIN_API_PORT"];
        if (env.contains("CONNECTOR_ACCOUNTS")) {
            const auto& acc = env["CONNECTOR_ACCOUNTS"];
            j["accounts"] = acc.is_string() ? json::parse(acc.get<std::string>()) : acc;
        }
        for (const char* k : {"name", "rates", "routes", "bind_address"})
            if (input.contains(k)) j[k] = input[k];
    }
    warn_unknown(j,
                 {"name", "ilp_address", "backend", "spread", "rates", "admin_api_port", "bind_address", "routes",
                  "min_message_window_ms", "expiry_decrement_ms", "accounts"},
                 "config", c.warnings);

    if (j.contains("ilp_address")) {
        try {
            c.ilp_address = IlpAddress::parse(j["ilp_address"].get<std::string>());
        } catch (const MalformedAddress& e) {
            throw ConfigError(std::string("ilp_address: ") + e.what());
        }
    }
    c.name = j.value("name", c.ilp_address ? c.ilp_address->str() : std::string{"connector"});

    const auto backend = j.value("backend", std::string{"one-to-one"});
    RateBackend::Kind kind;
    if (backend == "one-to-one") kind = RateBackend::Kind::OneToOne;
    else if (backend == "static") kind = RateBackend::Kind::StaticTable;
    else if (backend == "ecb-plus-coinmarketcap" || backend == "ecb") {
        c.warnings.push_back("backend " + backend + " replaced by the static rate table");
        kind = RateBackend::Kind::StaticTable;
    } else throw ConfigError("unknown backend " + backend);
    c.rates = RateBackend(kind, Decimal{});
    try {
        if (j.contains("spread")) {
            const auto& s = j["spread"];
            c.rates.set_spread(Decimal::parse(s.is_string() ? s.get<std::string>() : s.dump()));
        }
        const json rates = j.value("rates", json::object());
        for (const auto& [pair, rate] : rates.items()) {
            auto slash = pair.find('/');
            if (slash == std::string::npos) throw ConfigError("rate key must look like SRC/DST: " + pair);
            c.rates.set_rate(pair.substr(0, slash), pair.substr(slash + 1),
                             Decimal::parse(rate.is_string() ? rate.get<std::string>() : rate.dump()));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    if (j.contains("admin_api_port")) c.admin_port = port_of(j["admin_api_port"], "admin_api_port");
    c.bind_address = j.value("bind_address", c.bind_address);
    if (j.contains("min_message_window_ms")) c.min_message_window = ms_of(j["min_message_window_ms"], "min_message_window_ms");
    if (j.contains("expiry_decrement_ms")) c.expiry_decrement = ms_of(j["expiry_decrement_ms"], "expiry_decrement_ms");

    if (!j.contains("accounts") || !j["accounts"].is_object() || j["accounts"].empty())
        throw ConfigError("config needs a non-empty accounts object");
    int parents = 0;
    for (const auto& [id, acc] : j["accounts"].items()) {
        c.accounts.push_back(AccountConfig::from_json(id, acc, c.warnings));
        parents += c.accounts.back().relation == Relation::Parent;
    }
    if (parents > 1) throw ConfigError("at most one parent account is supported");
    if (!c.ilp_address && parents == 0) throw ConfigError("ilp_address is required without a parent account");

    for (const auto& r : j.value("routes", json::array())) {
        try {
            StaticRoute route{IlpAddress::parse(r.at("targetPrefix").get<std::string>()),
                              r.at("peerId").get<std::string>()};
            if (!c.account(route.account)) throw ConfigError("route to unknown account " + route.account);
            c.routes.push_back(std::move(route));
        } catch (const MalformedAddress& e) {
            throw ConfigError(std::string("route targetPrefix: ") + e.what());
        } catch (const json::exception& e) {
            throw ConfigError(std::string("route needs targetPrefix and peerId: ") + e.what());
        }
    }
    return c;
}

}  // namespace ilp::connector
