#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ilpsim/ledger/ledger.hpp"

namespace ilp::settlement {

/// All three values are in the account's asset-scale units. Positive balance
/// means the peer owes us.
struct BalancePolicy {
    std::int64_t maximum = std::numeric_limits<std::int64_t>::max();
    std::int64_t settle_threshold = std::numeric_limits<std::int64_t>::min();
    std::int64_t settle_to = 0;

    static BalancePolicy unlimited() { return {}; }
    bool valid() const { return settle_threshold <= settle_to && settle_to <= maximum; }
    bool settles() const { return settle_threshold != std::numeric_limits<std::int64_t>::min(); }

    /// Reads {maximum, settleThreshold, settleTo} given as strings or numbers.
    /// A positive settleThreshold is negated and a warning appended.
    /// Throws std::invalid_argument.
    static BalancePolicy from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);
    nlohmann::json to_json() const;

    /// Same policy expressed at another asset scale (floor towards zero when
    /// shrinking).
    BalancePolicy rescaled(int from_scale, int to_scale) const;

    bool operator==(const BalancePolicy&) const = default;
};

/// -a.settle_threshold < b.maximum and -b.settle_threshold < a.maximum.
bool check_peering_compat(const BalancePolicy& a, const BalancePolicy& b);

enum class SettleErrc { InvalidClaim, ChannelExhausted, NoChannel };

class SettlementError : public std::runtime_error {
public:
    SettlementError(SettleErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    SettleErrc code() const { return code_; }

private:
    SettleErrc code_;
};

struct SettleOutcome {
    std::optional<ledger::Claim> claim;
    /// Settlement was due but the channel cannot cover it (or there is none).
    bool deferred = false;
    std::uint64_t ledger_amount = 0;  // increment in ledger units
};

/// Running account with one peer.
///
/// Amounts on the link are in account units; claims are in ledger units.
/// `scale_shift` = account scale - ledger scale (>= 0), so one ledger unit is
/// worth 10^scale_shift account units. Settlement only moves whole ledger
/// units, so the balance lands exactly on settle_to only when the shift is 0.
class BilateralBalance {
public:
    BilateralBalance(std::string peer_id, BalancePolicy policy, unsigned scale_shift = 0);

    const std::string& peer_id() const { return peer_id_; }
    std::int64_t value() const { return value_; }
    const BalancePolicy& policy() const { return policy_; }
    unsigned scale_shift() const { return shift_; }

    /// Accepts iff value + amount <= maximum; on accept the value moves.
    bool on_incoming_prepare(std::uint64_t amount);
    /// Undoes an accepted incoming Prepare that was rejected or expired.
    void rollback_incoming(std::uint64_t amount);

    void set_outgoing_channel(const ledger::ChannelId& id, std::uint64_t capacity, SigningKey key);
    void set_outgoing_capacity(std::uint64_t capacity) { out_capacity_ = capacity; }
    bool has_outgoing_channel() const { return out_channel_.has_value(); }
    const std::optional<ledger::ChannelId>& outgoing_channel() const { return out_channel_; }
    std::uint64_t outgoing_capacity() const { return out_capacity_; }
    std::uint64_t highest_signed_cumulative() const { return highest_signed_; }

    /// value -= amount, then settles if value <= settle_threshold.
    SettleOutcome on_outgoing_fulfilled(std::uint64_t amount);
    /// Settles if due; used again after a channel top-up.
    SettleOutcome try_settle();

    void set_incoming_channel(const ledger::ChannelId& id) { in_channel_ = id; }
    const std::optional<ledger::ChannelId>& incoming_channel() const { return in_channel_; }
    /// Verifies on the ledger and credits the cumulative increase. Returns the
    /// increase in ledger units (0 for a duplicate or older claim).
    /// Throws SettlementError(InvalidClaim).
    std::uint64_t receive_claim(const ledger::Claim& claim, const ledger::LedgerApi& ledger);
    const std::optional<ledger::Claim>& best_incoming_claim() const { return best_claim_; }
    std::uint64_t incoming_cumulative() const { return best_claim_ ? best_claim_->cumulative_amount : 0; }

    bool settlement_deferred() const { return deferred_; }

private:
    std::string peer_id_;
    BalancePolicy policy_;
    unsigned shift_;
    std::int64_t unit_;  // 10^shift
    std::int64_t value_ = 0;
    std::optional<ledger::ChannelId> out_channel_;
    std::optional<SigningKey> key_;
    std::uint64_t out_capacity_ = 0;
    std::uint64_t highest_signed_ = 0;
    std::optional<ledger::ChannelId> in_channel_;
    std::optional<ledger::Claim> best_claim_;
    bool deferred_ = false;
};

}  // namespace ilp::settlement
