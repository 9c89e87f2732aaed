#include "ilpsim/ledger/service.hpp"

#include <httplib.h>

#include "ilpsim/core/event_log.hpp"

namespace ilp::ledger {

using nlohmann::json;

namespace {

PublicKey key_from_hex(const std::string& hex)
{
    PublicKey k{};
    if (hex.empty()) return k;
    auto raw = from_hex(hex);
    if (raw.size() != k.size()) throw std::invalid_argument("public key must be 32 bytes");
    std::copy(raw.begin(), raw.end(), k.begin());
    return k;
}

std::optional<LedgerErrc> errc_from_string(const std::string& s)
{
    for (int i = 0; i <= static_cast<int>(LedgerErrc::Unavailable); ++i) {
        auto e = static_cast<LedgerErrc>(i);
        if (s == to_string(e)) return e;
    }
    return std::nullopt;
}

std::uint64_t get_u64(const json& j, const char* key)
{
    const auto& v = j.at(key);
    if (v.is_string()) return std::stoull(v.get<std::string>());
    return v.get<std::uint64_t>();
}

}  // namespace

json to_json(const Account& a)
{
    return {{"account_id", a.id}, {"balance", a.balance}, {"public_key", to_hex(a.public_key)}};
}

Account account_from_json(const json& j)
{
    return Account{j.at("account_id").get<std::string>(), key_from_hex(j.value("public_key", "")),
                   get_u64(j, "balance")};
}

json to_json(const PaymentChannel& c)
{
    json j = {{"channel_id", c.id.hex()},
              {"account", c.account},
              {"destination", c.destination},
              {"amount", c.amount},
              {"balance", c.balance},
              {"public_key", to_hex(c.public_key)},
              {"settle_delay", c.settle_delay},
              {"state", to_string(c.state)}};
    j["close_after"] = c.close_after ? json(format_iso8601(*c.close_after)) : json(nullptr);
    return j;
}

PaymentChannel channel_from_json(const json& j)
{
    PaymentChannel c;
    c.id = ChannelId::from_hex(j.at("channel_id").get<std::string>());
    c.account = j.at("account").get<std::string>();
    c.destination = j.at("destination").get<std::string>();
    c.amount = get_u64(j, "amount");
    c.balance = get_u64(j, "balance");
    c.public_key = key_from_hex(j.value("public_key", ""));
    c.settle_delay = j.value("settle_delay", 0u);
    auto state = j.value("state", "open");
    c.state = state == "closed" ? ChannelState::Closed : state == "closing" ? ChannelState::Closing : ChannelState::Open;
    if (j.contains("close_after") && j["close_after"].is_string())
        c.close_after = parse_iso8601(j["close_after"].get<std::string>());
    return c;
}

LedgerBootstrap LedgerBootstrap::from_json(const json& j)
{
    LedgerBootstrap b;
    b.config.asset_code = j.at("asset_code").get<std::string>();
    b.name = j.value("name", std::string{});
    if (b.name.empty())
        for (char ch : b.config.asset_code) b.name.push_back(static_cast<char>(std::tolower(ch)));
    b.config.asset_scale = j.at("asset_scale").get<std::uint8_t>();
    b.config.genesis_account = j.value("genesis_account", std::string{"genesis"});
    b.config.genesis_balance = get_u64(j, "genesis_balance");
    b.port = j.value("port", std::uint16_t{0});
    for (const auto& a : j.value("accounts", json::array()))
        b.accounts.push_back({a.at("account_id").get<std::string>(), a.value("secret", std::string{}),
                              get_u64(a, "balance")});
    return b;
}

std::shared_ptr<Ledger> LedgerBootstrap::instantiate(std::shared_ptr<const Clock> clock) const
{
    auto ledger = std::make_shared<Ledger>(config, std::move(clock));
    for (const auto& a : accounts) {
        PublicKey key{};
        if (!a.secret.empty()) key = key_from_secret(a.secret).public_key();
        ledger->create_and_fund(a.id, key, a.balance);
    }
    return ledger;
}

LedgerServer::LedgerServer(std::shared_ptr<Ledger> ledger, std::string bind_address, std::uint16_t port)
    : ledger_(std::move(ledger)), bind_(std::move(bind_address)), port_(port)
{
}

LedgerServer::~LedgerServer() { stop(); }

std::uint16_t LedgerServer::start()
{
    server_ = std::make_unique<httplib::Server>();
    auto& srv = *server_;
    auto ledger = ledger_;

    // Every handler runs under this wrapper so ledger errors become JSON.
    auto guarded = [](auto fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                json out = fn(req);
                res.set_content(out.dump(), "application/json");
            } catch (const LedgerError& e) {
                res.status = e.code() == LedgerErrc::UnknownAccount || e.code() == LedgerErrc::UnknownChannel ? 404
                                                                                                              : 400;
                res.set_content(json{{"error", to_string(e.code())}, {"message", e.what()}}.dump(),
                                "application/json");
            } catch (const std::exception& e) {
                res.status = 400;
                res.set_content(json{{"error", "BadRequest"}, {"message", e.what()}}.dump(), "application/json");
            }
        };
    };

    srv.Get("/info", guarded([ledger](const httplib::Request&) {
                auto c = ledger->config();
                return json{{"asset_code", c.asset_code},
                            {"asset_scale", c.asset_scale},
                            {"genesis_account", c.genesis_account},
                            {"genesis_balance", c.genesis_balance},
                            {"total_supply", ledger->total_supply()}};
            }));
    srv.Get("/accounts", guarded([ledger](const httplib::Request&) {
                json out = json::array();
                for (const auto& a : ledger->accounts()) out.push_back(to_json(a));
                return out;
            }));
    srv.Get(R"(/accounts/([^/]+))", guarded([ledger](const httplib::Request& req) {
                auto id = req.matches[1].str();
                auto a = ledger->account(id);
                if (!a) throw LedgerError(LedgerErrc::UnknownAccount, id);
                return to_json(*a);
            }));
    srv.Post("/accounts", guarded([ledger](const httplib::Request& req) {
                 auto j = json::parse(req.body);
                 return to_json(ledger->create_and_fund(j.at("account_id").get<std::string>(),
                                                        key_from_hex(j.value("public_key", "")),
                                                        get_u64(j, "amount")));
             }));
    srv.Post("/transfer", guarded([ledger](const httplib::Request& req) {
                 auto j = json::parse(req.body);
                 return json{{"tx", ledger->transfer(j.at("source").get<std::string>(),
                                                     j.at("destination").get<std::string>(), get_u64(j, "amount"))}};
             }));
    srv.Get("/channels", guarded([ledger](const httplib::Request&) {
                json out = json::array();
                for (const auto& c : ledger->channels()) out.push_back(to_json(c));
                return out;
            }));
    srv.Get(R"(/channels/([0-9a-f]{64}))", guarded([ledger](const httplib::Request& req) {
                auto id = ChannelId::from_hex(req.matches[1].str());
                auto c = ledger->channel(id);
                if (!c) throw LedgerError(LedgerErrc::UnknownChannel, id.hex());
                return to_json(*c);
            }));
    srv.Post("/channels", guarded([ledger](const httplib::Request& req) {
                 auto j = json::parse(req.body);
                 return to_json(ledger->open_channel(j.at("account").get<std::string>(),
                                                     j.at("destination").get<std::string>(), get_u64(j, "amount"),
                                                     j.value("settle_delay", 0u),
                                                     key_from_hex(j.at("public_key").get<std::string>())));
             }));
    srv.Post(R"(/channels/([0-9a-f]{64})/fund)", guarded([ledger](const httplib::Request& req) {
                 auto j = json::parse(req.body);
                 return to_json(ledger->fund_channel(ChannelId::from_hex(req.matches[1].str()), get_u64(j, "amount")));
             }));
    srv.Post(R"(/channels/([0-9a-f]{64})/close)", guarded([ledger](const httplib::Request& req) {
                 auto j = json::parse(req.body);
                 auto r = ledger->close_channel(ChannelId::from_hex(req.matches[1].str()),
                                                j.at("initiator").get<std::string>());
                 json out = {{"state", to_string(r.state)}, {"payer_refunded", r.payer_refunded}};
                 out["close_after"] = r.close_after ? json(format_iso8601(*r.close_after)) : json(nullptr);
                 return out;
             }));
    srv.Post("/claims/verify", guarded([ledger](const httplib::Request& req) {
                 auto j = json::parse(req.body);
                 auto claim = Claim::decode(from_hex(j.at("claim").get<std::string>()));
                 return json{{"valid", ledger->verify_claim(claim)}};
             }));
    srv.Post("/claims/redeem", guarded([ledger](const httplib::Request& req) {
                 auto j = json::parse(req.body);
                 auto claim = Claim::decode(from_hex(j.at("claim").get<std::string>()));
                 auto r = ledger->redeem_claim(claim);
                 return json{{"credited", r.credited}, {"stale", r.stale}};
             }));

    int bound = port_ == 0 ? srv.bind_to_any_port(bind_) : (srv.bind_to_port(bind_, port_) ? port_ : -1);
    if (bound < 0) throw std::runtime_error("ledger: cannot bind " + bind_ + ":" + std::to_string(port_));
    port_ = static_cast<std::uint16_t>(bound);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    logging::get("ledger")->info("listening on {}:{}", bind_, port_);
    return port_;
}

void LedgerServer::stop()
{
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

RemoteLedger::RemoteLedger(std::string base_url)
{
    std::string_view u = base_url;
    for (std::string_view prefix : {"http://", "ws://"})
        if (u.starts_with(prefix)) u.remove_prefix(prefix.size());
    if (auto slash = u.find('/'); slash != std::string_view::npos) u = u.substr(0, slash);
    auto colon = u.rfind(':');
    if (colon == std::string_view::npos) {
        host_ = std::string(u);
    } else {
        host_ = std::string(u.substr(0, colon));
        port_ = std::stoi(std::string(u.substr(colon + 1)));
    }
    if (host_.empty()) throw LedgerError(LedgerErrc::InvalidConfig, "bad ledger url " + base_url);
}

std::optional<json> RemoteLedger::call(const std::string& method, const std::string& path, const json* body) const
{
    httplib::Client cli(host_, port_);
    cli.set_connection_timeout(5);
    cli.set_read_timeout(10);
    auto res = method == "GET" ? cli.Get(path) : cli.Post(path, body ? body->dump() : "{}", "application/json");
    if (!res)
        throw LedgerError(LedgerErrc::Unavailable,
                          host_ + ":" + std::to_string(port_) + path + ": " + httplib::to_string(res.error()));
    if (res->status == 200) return json::parse(res->body);
    auto err = json::parse(res->body, nullptr, false);
    if (err.is_object() && err.contains("error")) {
        auto code = errc_from_string(err["error"].get<std::string>());
        if (code == LedgerErrc::UnknownAccount || code == LedgerErrc::UnknownChannel) {
            if (method == "GET") return std::nullopt;
        }
        throw LedgerError(code.value_or(LedgerErrc::InvalidConfig), err.value("message", ""));
    }
    throw LedgerError(LedgerErrc::Unavailable, "HTTP " + std::to_string(res->status) + " from " + path);
}

LedgerConfig RemoteLedger::config() const
{
    auto j = *call("GET", "/info", nullptr);
    return LedgerConfig{j.at("asset_code").get<std::string>(), j.at("asset_scale").get<std::uint8_t>(),
                        j.at("genesis_account").get<std::string>(), get_u64(j, "genesis_balance")};
}

Account RemoteLedger::create_and_fund(const AccountId& id, const PublicKey& key, std::uint64_t amount)
{
    json body = {{"account_id", id}, {"public_key", to_hex(key)}, {"amount", amount}};
    return account_from_json(*call("POST", "/accounts", &body));
}

std::string RemoteLedger::transfer(const AccountId& src, const AccountId& dst, std::uint64_t amount)
{
    json body = {{"source", src}, {"destination", dst}, {"amount", amount}};
    return call("POST", "/transfer", &body)->at("tx").get<std::string>();
}

PaymentChannel RemoteLedger::open_channel(const AccountId& account, const AccountId& destination,
                                          std::uint64_t amount, std::uint32_t settle_delay,
                                          const PublicKey& public_key)
{
    json body = {{"account", account},
                 {"destination", destination},
                 {"amount", amount},
                 {"settle_delay", settle_delay},
                 {"public_key", to_hex(public_key)}};
    return channel_from_json(*call("POST", "/channels", &body));
}

PaymentChannel RemoteLedger::fund_channel(const ChannelId& id, std::uint64_t amount)
{
    json body = {{"amount", amount}};
    return channel_from_json(*call("POST", "/channels/" + id.hex() + "/fund", &body));
}

bool RemoteLedger::verify_claim(const Claim& claim) const
{
    json body = {{"claim", to_hex(claim.encode())}};
    auto r = call("POST", "/claims/verify", &body);
    if (!r) throw LedgerError(LedgerErrc::UnknownChannel, claim.channel_id.hex());
    return r->at("valid").get<bool>();
}

RedeemResult RemoteLedger::redeem_claim(const Claim& claim)
{
    json body = {{"claim", to_hex(claim.encode())}};
    auto r = call("POST", "/claims/redeem", &body);
    if (!r) throw LedgerError(LedgerErrc::UnknownChannel, claim.channel_id.hex());
    return RedeemResult{get_u64(*r, "credited"), r->at("stale").get<bool>()};
}

CloseResult RemoteLedger::close_channel(const ChannelId& id, const AccountId& initiator)
{
    json body = {{"initiator", initiator}};
    auto r = call("POST", "/channels/" + id.hex() + "/close", &body);
    if (!r) throw LedgerError(LedgerErrc::UnknownChannel, id.hex());
    CloseResult out;
    out.state = r->at("state") == "closing" ? ChannelState::Closing : ChannelState::Closed;
    out.payer_refunded = get_u64(*r, "payer_refunded");
    if ((*r)["close_after"].is_string()) out.close_after = parse_iso8601((*r)["close_after"].get<std::string>());
    return out;
}

std::optional<Account> RemoteLedger::account(const AccountId& id) const
{
    auto r = call("GET", "/accounts/" + id, nullptr);
    if (!r) return std::nullopt;
    return account_from_json(*r);
}

std::optional<PaymentChannel> RemoteLedger::channel(const ChannelId& id) const
{
    auto r = call("GET", "/channels/" + id.hex(), nullptr);
    if (!r) return std::nullopt;
    return channel_from_json(*r);
}

std::vector<Account> RemoteLedger::accounts() const
{
    std::vector<Account> out;
    const auto all = call("GET", "/accounts", nullptr);
    for (const auto& a : *all) out.push_back(account_from_json(a));
    return out;
}

std::vector<PaymentChannel> RemoteLedger::channels() const
{
    std::vector<PaymentChannel> out;
    const auto all = call("GET", "/channels", nullptr);
    for (const auto& c : *all) out.push_back(channel_from_json(c));
    return out;
}

}  // namespace ilp::ledger
