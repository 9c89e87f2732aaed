#include "ilpsim/node/node.hpp"

#include "ilpsim/ledger/service.hpp"

namespace ilp::node {

using connector::ConfigError;
using nlohmann::json;

UplinkConfig UplinkConfig::from_json(const json& j, const std::optional<std::string>& uplink)
{
    UplinkConfig c;
    if (!j.is_object() || !j.contains("uplinks") || !j["uplinks"].is_object() || j["uplinks"].empty())
        throw ConfigError("node config needs a non-empty \"uplinks\" object");
    const auto& ups = j["uplinks"];
    if (uplink) {
        if (!ups.contains(*uplink)) throw ConfigError("no uplink named " + *uplink);
        c.uplink = *uplink;
    } else {
        if (ups.size() > 1) throw ConfigError("several uplinks configured; pick one");
        c.uplink = ups.begin().key();
    }
    for (const auto& [k, _] : j.items())
        if (k != "uplinks" && k != "version" && k != "name" && k != "local_port" && k != "admin_api_port")
            c.warnings.push_back("unknown key " + k + " ignored");

    json acc = ups[c.uplink];
    if (!acc.contains("relation")) acc["relation"] = "parent";
    c.parent = connector::AccountConfig::from_json(c.uplink, acc, c.warnings);
    if (c.parent.relation != connector::Relation::Parent) throw ConfigError("an uplink must have relation parent");
    if (!c.parent.server) throw ConfigError("uplink " + c.uplink + " needs options.server");
    if (c.parent.ledger && c.parent.outgoing_channel_amount == 0) {
        // Ten regular ledger units when nothing is configured.
        std::uint64_t amount = 10;
        for (int i = 0; i < c.parent.ledger_scale.value_or(c.parent.asset_scale); ++i) amount *= 10;
        c.parent.outgoing_channel_amount = amount;
        c.warnings.push_back("uplink " + c.uplink + ": outgoingChannelAmount defaults to " + std::to_string(amount));
    }
    c.name = j.value("name", "node-" + c.uplink);
    if (j.contains("local_port")) {
        auto p = connector::json_u64(j["local_port"], "local_port");
        if (p > 65535) throw ConfigError("local_port out of range");
        c.local_port = static_cast<std::uint16_t>(p);
    }
    if (j.contains("admin_api_port")) {
        auto p = connector::json_u64(j["admin_api_port"], "admin_api_port");
        if (p > 65535) throw ConfigError("admin_api_port out of range");
        c.admin_port = static_cast<std::uint16_t>(p);
    }
    return c;
}

connector::ConnectorConfig UplinkConfig::connector_config() const
{
    connector::ConnectorConfig c;
    c.name = name;
    c.role = "node";
    c.adopt_parent_asset = true;
    c.admin_port = admin_port;
    c.warnings = warnings;
    c.accounts.push_back(parent);
    connector::AccountConfig local;
    local.id = UplinkNode::kLocalAccount;
    local.relation = connector::Relation::Child;
    local.asset_code = parent.asset_code;
    local.asset_scale = parent.asset_scale;
    local.listen_port = local_port;
    c.accounts.push_back(std::move(local));
    return c;
}

UplinkNode::UplinkNode(UplinkConfig cfg, std::shared_ptr<EventLoop> loop, std::shared_ptr<EventLog> log,
                       std::shared_ptr<connector::LedgerDirectory> ledgers)
    : cfg_(std::move(cfg)),
      loop_(loop),
      connector_(connector::Connector::create(cfg_.connector_config(), std::move(loop), std::move(log),
                                              std::move(ledgers)))
{
}

void UplinkNode::connect_parent(std::shared_ptr<btp::Transport> transport, connector::Connector::DoneHandler done)
{
    auto uri = btp::BtpUri::parse(*cfg_.parent.server);
    connector_->dial_link(cfg_.uplink, std::move(transport), uri.name, uri.token, std::move(done));
}

void UplinkNode::attach_app(std::shared_ptr<btp::Transport> transport)
{
    connector_->accept_link(kLocalAccount, std::move(transport));
}

void UplinkNode::start_network(connector::Connector::DoneHandler ready)
{
    connector_->start_network(std::move(ready));
}

std::optional<std::uint16_t> UplinkNode::local_port() const { return connector_->listen_port(kLocalAccount); }

json UplinkNode::info() const
{
    json j = {{"name", cfg_.name},
              {"uplink", cfg_.uplink},
              {"address", connector_->address() ? json(connector_->address()->str()) : json(nullptr)},
              {"connected", connector_->is_connected(cfg_.uplink)}};
    auto balances = connector_->balances_json();
    if (balances.contains(cfg_.uplink)) j["parent"] = balances[cfg_.uplink];
    auto l = connector_->ledger_for(cfg_.uplink);
    if (!l) return j;
    const auto& me = cfg_.parent.ledger_account;
    try {
        auto acct = l->account(me);
        j["ledger_account"] = {{"id", me}, {"balance", acct ? json(acct->balance) : json(nullptr)}};
        json chans = json::array();
        for (const auto& ch : l->channels())
            if (ch.account == me || ch.destination == me) {
                auto cj = ledger::to_json(ch);
                cj["direction"] = ch.account == me ? "outgoing" : "incoming";
                chans.push_back(std::move(cj));
            }
        j["channels"] = std::move(chans);
    } catch (const ledger::LedgerError& e) {
        j["ledger_error"] = e.what();
    }
    return j;
}

json UplinkNode::cleanup()
{
    json j = {{"closed", connector_->cleanup()}};
    j["after"] = info();
    return j;
}

}  // namespace ilp::node
