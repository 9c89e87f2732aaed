#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ilpsim/connector/connector.hpp"

namespace ilp::node {

inline constexpr std::uint16_t kDefaultLocalPort = 7768;

/// A home-router style uplink node read from a ".moneyd.json" shaped file:
///   { "uplinks": { "<name>": { relation, assetCode, assetScale, balance,
///                              options: { server, secret, address, ... } } },
///     "name", "local_port", "admin_api_port" }
struct UplinkConfig {
    std::string name;
    std::string uplink;  // key under "uplinks", also the parent account id
    connector::AccountConfig parent;
    std::uint16_t local_port = kDefaultLocalPort;
    std::optional<std::uint16_t> admin_port;
    std::vector<std::string> warnings;

    /// Picks `uplink` or the only entry. Throws connector::ConfigError.
    static UplinkConfig from_json(const nlohmann::json& j, const std::optional<std::string>& uplink = {});
    connector::ConnectorConfig connector_config() const;
};

/// Connector with one parent and a "local" child account for apps. Apps get
/// addresses "<node address>.local.<auth name>".
class UplinkNode {
public:
    static constexpr const char* kLocalAccount = "local";

    UplinkNode(UplinkConfig cfg, std::shared_ptr<EventLoop> loop, std::shared_ptr<EventLog> log,
               std::shared_ptr<connector::LedgerDirectory> ledgers);

    const UplinkConfig& config() const { return cfg_; }
    const std::shared_ptr<connector::Connector>& connector() const { return connector_; }

    /// Dials the parent over `transport` using the name and token of the
    /// configured server URI.
    void connect_parent(std::shared_ptr<btp::Transport> transport, connector::Connector::DoneHandler done);
    /// Serves a local app link.
    void attach_app(std::shared_ptr<btp::Transport> transport);
    /// TCP: dials the parent, then listens on the local port.
    void start_network(connector::Connector::DoneHandler ready);
    std::optional<std::uint16_t> local_port() const;

    std::string parent_live_id() const { return cfg_.uplink; }
    /// Balance with the parent and the node's ledger account with its channels.
    nlohmann::json info() const;
    nlohmann::json cleanup();

private:
    UplinkConfig cfg_;
    std::shared_ptr<EventLoop> loop_;
    std::shared_ptr<connector::Connector> connector_;
};

}  // namespace ilp::node
