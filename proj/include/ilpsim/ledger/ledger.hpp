#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilpsim/core/bytes.hpp"
#include "ilpsim/core/crypto.hpp"
#include "ilpsim/core/time.hpp"

namespace ilp::ledger {

using AccountId = std::string;

struct ChannelId {
    std::array<std::uint8_t, 32> bytes{};
    auto operator<=>(const ChannelId&) const = default;
    std::string hex() const { return to_hex(bytes); }
    /// Throws std::invalid_argument.
    static ChannelId from_hex(std::string_view hex);
};

struct LedgerConfig {
    std::string asset_code;
    std::uint8_t asset_scale = 0;
    AccountId genesis_account;
    std::uint64_t genesis_balance = 0;
};

struct Account {
    AccountId id;
    PublicKey public_key{};
    std::uint64_t balance = 0;
};

enum class ChannelState { Open, Closing, Closed };
const char* to_string(ChannelState s);

struct PaymentChannel {
    ChannelId id;
    AccountId account;      // payer
    AccountId destination;  // payee
    std::uint64_t amount = 0;   // escrowed size
    std::uint64_t balance = 0;  // already redeemed by the payee
    PublicKey public_key{};
    std::uint32_t settle_delay = 0;  // seconds
    ChannelState state = ChannelState::Open;
    std::optional<Timestamp> close_after;

    std::uint64_t escrow() const { return state == ChannelState::Closed ? 0 : amount - balance; }
};

/// Signed cumulative IOU against a channel. The signature covers
/// channel_id || cumulative_amount (u64 BE).
struct Claim {
    ChannelId channel_id;
    std::uint64_t cumulative_amount = 0;
    Signature signature{};

    static Bytes signed_payload(const ChannelId& id, std::uint64_t cumulative);
    static Claim sign(const ChannelId& id, std::uint64_t cumulative, const SigningKey& key);

    /// channel_id (32) || amount (8) || signature (64)
    Bytes encode() const;
    /// Throws std::invalid_argument on a wrong length.
    static Claim decode(ByteView bytes);
    bool operator==(const Claim&) const = default;
};

enum class LedgerErrc {
    DuplicateAccount,
    InsufficientGenesis,
    InsufficientFunds,
    UnknownAccount,
    UnknownChannel,
    InvalidClaim,
    AlreadyClosed,
    NotPermitted,
    InvalidConfig,
    Unavailable,
};

const char* to_string(LedgerErrc e);

class LedgerError : public std::runtime_error {
public:
    LedgerError(LedgerErrc code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code)
    {
    }
    LedgerErrc code() const { return code_; }

private:
    LedgerErrc code_;
};

/// Ed25519 key derived from an arbitrary secret string (SHA-256 of the text
/// is the seed), so wallet-style secrets from configs can be used directly.
SigningKey key_from_secret(std::string_view secret);
/// Account-style id for configs that only carry a secret: "0x" and the last
/// 20 bytes of SHA-256(public key), hex.
std::string account_from_secret(std::string_view secret);

struct RedeemResult {
    std::uint64_t credited = 0;
    /// Cumulative amount did not exceed what was already redeemed.
    bool stale = false;
};

struct CloseResult {
    ChannelState state = ChannelState::Closed;
    std::uint64_t payer_refunded = 0;
    std::optional<Timestamp> close_after;
};

/// Operations a settlement engine needs from a ledger, whether it lives in
/// this process or behind the ledger's HTTP API.
class LedgerApi {
public:
    virtual ~LedgerApi() = default;

    virtual LedgerConfig config() const = 0;
    virtual Account create_and_fund(const AccountId& id, const PublicKey& key, std::uint64_t amount) = 0;
    virtual std::string transfer(const AccountId& src, const AccountId& dst, std::uint64_t amount) = 0;
    virtual PaymentChannel open_channel(const AccountId& account, const AccountId& destination,
                                        std::uint64_t amount, std::uint32_t settle_delay,
                                        const PublicKey& public_key) = 0;
    /// Adds escrow to an open channel.
    virtual PaymentChannel fund_channel(const ChannelId& id, std::uint64_t amount) = 0;
    virtual bool verify_claim(const Claim& claim) const = 0;
    virtual RedeemResult redeem_claim(const Claim& claim) = 0;
    virtual CloseResult close_channel(const ChannelId& id, const AccountId& initiator) = 0;

    virtual std::optional<Account> account(const AccountId& id) const = 0;
    virtual std::optional<PaymentChannel> channel(const ChannelId& id) const = 0;
    virtual std::vector<Account> accounts() const = 0;
    virtual std::vector<PaymentChannel> channels() const = 0;
};

/// In-memory ledger. All funds originate in the genesis account; every
/// operation preserves sum(balances) + sum(open channel escrow).
class Ledger final : public LedgerApi {
public:
    /// Throws LedgerError(InvalidConfig).
    Ledger(LedgerConfig config, std::shared_ptr<const Clock> clock);

    LedgerConfig config() const override { return config_; }
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

    /// Completes payer-initiated closes whose settle delay has elapsed.
    /// Every public operation does this first.
    std::size_t finalize_expired();
    /// sum(account balances) + sum(channel escrow).
    std::uint64_t total_supply() const;
    bool conserved() const { return total_supply() == config_.genesis_balance; }

    /// Test hook: overwrite a balance without conservation bookkeeping.
    void corrupt_balance_for_testing(const AccountId& id, std::uint64_t balance);

private:
    void finalize_locked();
    Account& account_locked(const AccountId& id);
    PaymentChannel& channel_locked(const ChannelId& id);
    bool verify_locked(const Claim& claim) const;
    void finish_close_locked(PaymentChannel& ch);
    std::string next_tx_id();

    LedgerConfig config_;
    std::shared_ptr<const Clock> clock_;
    mutable std::recursive_mutex mu_;
    std::map<AccountId, Account> accounts_;
    std::map<ChannelId, PaymentChannel> channels_;
    std::uint64_t tx_counter_ = 0;
};

}  // namespace ilp::ledger
