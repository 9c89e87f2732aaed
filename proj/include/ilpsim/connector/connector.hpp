#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ilpsim/btp/endpoint.hpp"
#include "ilpsim/connector/config.hpp"
#include "ilpsim/connector/plugin.hpp"
#include "ilpsim/connector/routing.hpp"
#include "ilpsim/core/event_log.hpp"
#include "ilpsim/settlement/engine.hpp"

namespace ilp::connector {

/// Maps the ledger references found in account options to ledger handles:
/// registered names resolve to in-process ledgers, http:// and ws:// URLs to
/// the ledger HTTP API.
class LedgerDirectory {
public:
    void add(const std::string& name, std::shared_ptr<ledger::LedgerApi> ledger);
    /// Throws ConfigError for an unknown name.
    std::shared_ptr<ledger::LedgerApi> resolve(const std::string& ref);

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<ledger::LedgerApi>> ledgers_;
};

/// One packet the connector forwarded and saw fulfilled.
struct ForwardRecord {
    std::string from;
    std::string to;
    std::string from_asset;
    int from_scale = 0;
    std::string to_asset;
    int to_scale = 0;
    std::uint64_t in_amount = 0;
    std::uint64_t out_amount = 0;
};

struct DuplicateChild : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An ILP connector. Accounts come from the config; a child account turns
/// into one live sub-account per authenticated client ("<account>.<name>"),
/// every other account is live once its link is up.
///
/// All methods except the thread-safe snapshots must run on the loop.
class Connector : public std::enable_shared_from_this<Connector> {
public:
    using DoneHandler = std::function<void(std::optional<std::string> error)>;

    /// Throws ConfigError when an account's ledger cannot be resolved.
    static std::shared_ptr<Connector> create(ConnectorConfig cfg, std::shared_ptr<EventLoop> loop,
                                             std::shared_ptr<EventLog> log,
                                             std::shared_ptr<LedgerDirectory> ledgers);
    ~Connector();

    const ConnectorConfig& config() const { return cfg_; }
    const std::string& component() const { return component_; }
    const std::optional<IlpAddress>& address() const { return address_; }

    /// Serves one incoming link for `account_id` (server side of BTP).
    void accept_link(const std::string& account_id, std::shared_ptr<btp::Transport> transport);
    /// Dials out for `account_id`: authenticates, learns the address from a
    /// parent, then exchanges channel details.
    void dial_link(const std::string& account_id, std::shared_ptr<btp::Transport> transport,
                   const std::string& auth_name, const std::string& token, DoneHandler done);

    /// Opens TCP listeners and dials configured servers. `ready` fires once
    /// the parent link (if any) is up. Listener ports actually bound are
    /// returned by listen_port().
    void start_network(DoneHandler ready);
    std::optional<std::uint16_t> listen_port(const std::string& account_id) const;
    void stop();

    /// The forwarding pipeline. `from` is a live account id.
    void handle_prepare(const std::string& from, PreparePacket p, ResponseHandler done);

    RouteTable& routes() { return routes_; }
    const RouteTable& routes() const { return routes_; }
    std::vector<std::string> live_accounts() const;
    bool is_connected(const std::string& live_id) const;
    settlement::PeerSettlement* settlement(const std::string& live_id);
    const AccountConfig* account_config(const std::string& live_id) const;
    /// Ledger of a configured account, null when it does not settle.
    std::shared_ptr<ledger::LedgerApi> ledger_for(const std::string& account_id) const;

    std::vector<ForwardRecord> forwards() const;

    /// Redeems incoming claims and closes every channel.
    nlohmann::json cleanup();
    /// Redeems the best incoming claim on every account.
    std::uint64_t redeem_all();

    nlohmann::json accounts_json() const;
    nlohmann::json balances_json() const;
    nlohmann::json routes_json() const;
    nlohmann::json channels_json() const;

private:
    struct Live {
        std::string id;
        const AccountConfig* cfg = nullptr;
        std::optional<IlpAddress> address;  // children only
        std::shared_ptr<btp::BtpEndpoint> ep;
        std::unique_ptr<settlement::PeerSettlement> settlement;
    };

    Connector(ConnectorConfig cfg, std::shared_ptr<EventLoop> loop, std::shared_ptr<EventLog> log,
              std::shared_ptr<LedgerDirectory> ledgers);

    Live& make_live(const std::string& id, const AccountConfig& cfg);
    void bind_endpoint(Live& live, std::shared_ptr<btp::BtpEndpoint> ep);
    void on_authenticated(const AccountConfig& cfg, std::shared_ptr<btp::BtpEndpoint> ep);
    void on_message(const std::string& live_id, btp::Entries entries, btp::Responder responder);
    /// Throws ConfigError.
    void adopt_parent(const IldcpInfo& info);
    void exchange_channels(const std::string& live_id, DoneHandler done);
    void send_settlement(const std::string& live_id, btp::Entries entries);
    void dial_tcp(const AccountConfig& cfg, DoneHandler done, int attempt);
    IlpAddress self_address() const;
    void record(const char* kind, const PreparePacket& p, const std::string& peer, std::uint64_t amount,
                std::string detail = {});
    void finish_forward(const std::string& from, const std::string& to, const PreparePacket& in,
                        std::uint64_t out_amount, IlpResponse resp, const ResponseHandler& done);

    ConnectorConfig cfg_;
    std::string component_;
    std::shared_ptr<EventLoop> loop_;
    std::shared_ptr<EventLog> log_;
    std::shared_ptr<LedgerDirectory> ledgers_;
    std::map<std::string, std::shared_ptr<ledger::LedgerApi>> account_ledgers_;
    std::optional<IlpAddress> address_;
    RouteTable routes_;
    std::map<std::string, unsigned> scale_shift_;
    std::map<std::string, std::unique_ptr<Live>> live_;
    std::vector<std::shared_ptr<btp::BtpEndpoint>> pending_;  // links not yet authenticated
    std::map<std::string, std::unique_ptr<btp::TcpListener>> listeners_;

    mutable std::mutex stats_mu_;
    std::vector<ForwardRecord> forwards_;
    bool stopped_ = false;
};

}  // namespace ilp::connector
