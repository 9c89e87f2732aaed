#pragma once

// JSON mapping of ledger state, the ledger's HTTP API and a client for it.
//
//   GET  /info                      config + total supply
//   GET  /accounts[/<id>]           account_info
//   POST /accounts                  {account_id, public_key, amount}
//   POST /transfer                  {source, destination, amount}
//   GET  /channels[/<id>]
//   POST /channels                  {account, destination, amount, settle_delay, public_key}
//   POST /channels/<id>/fund        {amount}
//   POST /channels/<id>/close       {initiator}
//   POST /claims/verify|redeem      {claim: hex}
//
// Errors come back as 4xx with {"error": "<LedgerErrc>", "message": ...}.

#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "ilpsim/ledger/ledger.hpp"

namespace httplib {
class Server;
}

namespace ilp::ledger {

nlohmann::json to_json(const Account& a);
nlohmann::json to_json(const PaymentChannel& c);
PaymentChannel channel_from_json(const nlohmann::json& j);
Account account_from_json(const nlohmann::json& j);

/// Contents of a ledger bootstrap file.
struct LedgerBootstrap {
    struct Funded {
        AccountId id;
        std::string secret;  // optional; derives the account key
        std::uint64_t balance = 0;
    };
    std::string name;  // how connectors refer to this ledger, e.g. "xrp"
    LedgerConfig config;
    std::vector<Funded> accounts;
    std::uint16_t port = 0;

    /// Throws LedgerError(InvalidConfig) or nlohmann::json::exception.
    static LedgerBootstrap from_json(const nlohmann::json& j);
    /// Creates and funds the listed accounts.
    std::shared_ptr<Ledger> instantiate(std::shared_ptr<const Clock> clock) const;
};

class LedgerServer {
public:
    LedgerServer(std::shared_ptr<Ledger> ledger, std::string bind_address, std::uint16_t port);
    ~LedgerServer();
    LedgerServer(const LedgerServer&) = delete;
    LedgerServer& operator=(const LedgerServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free one.
    /// Throws std::runtime_error when binding fails.
    std::uint16_t start();
    void stop();

private:
    std::shared_ptr<Ledger> ledger_;
    std::string bind_;
    std::uint16_t port_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

/// LedgerApi over HTTP. Transport failures surface as LedgerError(Unavailable).
class RemoteLedger final : public LedgerApi {
public:
    /// `base_url` like "http://127.0.0.1:51233"; ws:// is treated as http://.
    explicit RemoteLedger(std::string base_url);

    LedgerConfig config() const override;
    Account create_and_fund(const AccountId& id, const PublicKey& key, std::uint64_t amount) override;
    std::string transfer(const AccountId& src, const AccountId& dst, std::uint64_t amount) override;
    PaymentChannel open_channel(const AccountId& account, const AccountId& destination, std::uint64_t amount,
                                std::uint32_t settle_delay, const PublicKey& public_key) override;
    PaymentChannel fund_channel(const ChannelId& id, std::uint64_t amount) override;
    bool verify_claim(const Claim& claim) const override;
    RedeemResult redeem_claim(const Claim& claim) override;
    CloseResult close_channel(const ChannelId& id, const AccountId& initiator) override;

    std::optional<Account> account(const AccountId& id) const override;
    std::optional<PaymentChannel> channel(const ChannelId& id) const override;
    std::vector<Account> accounts() const override;
    std::vector<PaymentChannel> channels() const override;

private:
    std::optional<nlohmann::json> call(const std::string& method, const std::string& path,
                                       const nlohmann::json* body) const;

    std::string host_;
    int port_ = 80;
};

}  // namespace ilp::ledger
