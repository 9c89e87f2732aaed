#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "ilpsim/btp/endpoint.hpp"
#include "ilpsim/core/event_log.hpp"
#include "ilpsim/ledger/ledger.hpp"
#include "ilpsim/settlement/balance.hpp"

namespace ilp::settlement {

struct SettlementConfig {
    std::shared_ptr<ledger::LedgerApi> ledger;  // null: account never settles
    ledger::AccountId own_account;
    std::string secret;  // channel signing key source
    std::optional<ledger::AccountId> peer_account;
    std::uint64_t outgoing_channel_amount = 0;  // ledger units, 0 = do not open
    std::uint64_t min_incoming_channel_amount = 0;
    std::uint32_t settle_delay = 3600;
    bool redeem_eagerly = false;
    unsigned scale_shift = 0;
};

/// Drives one peer's bilateral balance against the ledger: opens the
/// outgoing channel, signs claims when the balance crosses the threshold, and
/// verifies (and optionally redeems) the peer's claims.
///
/// Channel open travels as a BTP Message with entries
///   channel (32-byte id) | channel_signature (64) | fund_channel (payer account, text)
/// and claims as a single "claim" entry (channel id | cumulative u64 | signature).
class PeerSettlement {
public:
    using Sender = std::function<void(btp::Entries)>;

    PeerSettlement(std::string component, std::string peer_id, BalancePolicy policy, SettlementConfig cfg,
                   Sender send, std::shared_ptr<EventLog> log, std::shared_ptr<const Clock> clock);

    BilateralBalance& balance() { return balance_; }
    const BilateralBalance& balance() const { return balance_; }
    const SettlementConfig& config() const { return cfg_; }
    bool enabled() const { return cfg_.ledger != nullptr; }
    void set_sender(Sender send) { send_ = std::move(send); }
    /// Records the peer's ledger account learned over the link. Returns false
    /// when a different account is already known.
    bool set_peer_account(const ledger::AccountId& account);

    static bool is_channel_open(const btp::Entries& entries);
    static bool is_claim(const btp::Entries& entries);

    /// Opens the outgoing channel if one is configured and none exists yet and
    /// returns the entries announcing it. Throws ledger::LedgerError.
    std::optional<btp::Entries> open_outgoing_channel();
    /// Entries announcing an already open outgoing channel.
    std::optional<btp::Entries> outgoing_channel_entries() const;
    /// Checks a peer's announcement against the ledger and records the channel.
    /// Returns the refusal reason, if any.
    std::optional<std::string> accept_incoming_channel(const btp::Entries& entries);

    bool on_incoming_prepare(std::uint64_t amount) { return balance_.on_incoming_prepare(amount); }
    void rollback_incoming(std::uint64_t amount) { balance_.rollback_incoming(amount); }
    /// Debits the balance and sends a claim when settlement is due.
    void on_outgoing_fulfilled(std::uint64_t amount);
    /// Returns the refusal reason for a bad claim.
    std::optional<std::string> on_claim(const btp::Entries& entries);

    /// Adds escrow to the outgoing channel and retries deferred settlement.
    void top_up(std::uint64_t amount);

    struct CleanupReport {
        std::uint64_t redeemed = 0;
        bool incoming_closed = false;
        bool outgoing_closing = false;
    };
    /// Redeems the best incoming claim, closes the incoming channel as payee
    /// and starts closing the outgoing one as payer.
    CleanupReport cleanup();
    /// Redeems the best incoming claim not yet redeemed.
    std::uint64_t redeem();

    nlohmann::json status() const;

private:
    void settle(const SettleOutcome& outcome);
    void record(const char* kind, std::uint64_t amount, std::string detail);

    std::string component_;
    std::string peer_id_;
    SettlementConfig cfg_;
    SigningKey key_;
    BilateralBalance balance_;
    Sender send_;
    std::shared_ptr<EventLog> log_;
    std::shared_ptr<const Clock> clock_;
    std::uint64_t redeemed_to_ = 0;
    bool deferred_logged_ = false;
};

}  // namespace ilp::settlement
