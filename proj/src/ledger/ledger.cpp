#include "ilpsim/ledger/ledger.hpp"

#include "ilpsim/core/oer.hpp"

namespace ilp::ledger {

ChannelId ChannelId::from_hex(std::string_view hex)
{
    if (hex.size() != 64) throw std::invalid_argument("channel id must be 64 hex characters");
    auto raw = ilp::from_hex(hex);
    ChannelId id;
    std::copy(raw.begin(), raw.end(), id.bytes.begin());
    return id;
}

const char* to_string(ChannelState s)
{
    switch (s) {
    case ChannelState::Open: return "open";
    case ChannelState::Closing: return "closing";
    case ChannelState::Closed: return "closed";
    }
    return "?";
}

const char* to_string(LedgerErrc e)
{
    switch (e) {
    case LedgerErrc::DuplicateAccount: return "DuplicateAccount";
    case LedgerErrc::InsufficientGenesis: return "InsufficientGenesis";
    case LedgerErrc::InsufficientFunds: return "InsufficientFunds";
    case LedgerErrc::UnknownAccount: return "UnknownAccount";
    case LedgerErrc::UnknownChannel: return "UnknownChannel";
    case LedgerErrc::InvalidClaim: return "InvalidClaim";
    case LedgerErrc::AlreadyClosed: return "AlreadyClosed";
    case LedgerErrc::NotPermitted: return "NotPermitted";
    case LedgerErrc::InvalidConfig: return "InvalidConfig";
    case LedgerErrc::Unavailable: return "Unavailable";
    }
    return "?";
}

SigningKey key_from_secret(std::string_view secret)
{
    return SigningKey::from_seed(sha256(as_bytes(secret)));
}

std::string account_from_secret(std::string_view secret)
{
    auto d = sha256(key_from_secret(secret).public_key());
    return "0x" + to_hex(ByteView(d).subspan(12));
}

Bytes Claim::signed_payload(const ChannelId& id, std::uint64_t cumulative)
{
    ByteWriter w;
    w.put_bytes(id.bytes);
    w.put_uint_be(cumulative, 8);
    return std::move(w).take();
}

Claim Claim::sign(const ChannelId& id, std::uint64_t cumulative, const SigningKey& key)
{
    return Claim{id, cumulative, key.sign(signed_payload(id, cumulative))};
}

Bytes Claim::encode() const
{
    auto out = signed_payload(channel_id, cumulative_amount);
    out.insert(out.end(), signature.begin(), signature.end());
    return out;
}

Claim Claim::decode(ByteView bytes)
{
    if (bytes.size() != 104) throw std::invalid_argument("claim must be 104 bytes");
    Claim c;
    std::copy_n(bytes.begin(), 32, c.channel_id.bytes.begin());
    for (int i = 0; i < 8; ++i) c.cumulative_amount = c.cumulative_amount << 8 | bytes[32 + i];
    std::copy_n(bytes.begin() + 40, 64, c.signature.begin());
    return c;
}

Ledger::Ledger(LedgerConfig config, std::shared_ptr<const Clock> clock)
    : config_(std::move(config)), clock_(std::move(clock))
{
    if (config_.asset_scale > 19) throw LedgerError(LedgerErrc::InvalidConfig, "asset_scale must be <= 19");
    if (config_.genesis_balance == 0) throw LedgerError(LedgerErrc::InvalidConfig, "genesis_balance must be > 0");
    if (config_.genesis_account.empty()) throw LedgerError(LedgerErrc::InvalidConfig, "missing genesis account");
    accounts_.emplace(config_.genesis_account,
                      Account{config_.genesis_account, PublicKey{}, config_.genesis_balance});
}

std::string Ledger::next_tx_id()
{
    ByteWriter w;
    w.put_bytes(as_bytes(config_.asset_code));
    w.put_uint_be(++tx_counter_, 8);
    auto d = sha256(w.bytes());
    return to_hex(d).substr(0, 16);
}

Account& Ledger::account_locked(const AccountId& id)
{
    auto it = accounts_.find(id);
    if (it == accounts_.end()) throw LedgerError(LedgerErrc::UnknownAccount, id);
    return it->second;
}

PaymentChannel& Ledger::channel_locked(const ChannelId& id)
{
    auto it = channels_.find(id);
    if (it == channels_.end()) throw LedgerError(LedgerErrc::UnknownChannel, id.hex());
    return it->second;
}

Account Ledger::create_and_fund(const AccountId& id, const PublicKey& key, std::uint64_t amount)
{
    std::lock_guard lock(mu_);
    finalize_locked();
    if (accounts_.contains(id)) throw LedgerError(LedgerErrc::DuplicateAccount, id);
    auto& genesis = account_locked(config_.genesis_account);
    if (genesis.balance < amount)
        throw LedgerError(LedgerErrc::InsufficientGenesis,
                          "genesis holds " + std::to_string(genesis.balance) + ", asked " + std::to_string(amount));
    genesis.balance -= amount;
    auto [it, _] = accounts_.emplace(id, Account{id, key, amount});
    return it->second;
}

std::string Ledger::transfer(const AccountId& src, const AccountId& dst, std::uint64_t amount)
{
    std::lock_guard lock(mu_);
    finalize_locked();
    auto& from = account_locked(src);
    auto& to = account_locked(dst);
    if (from.balance < amount)
        throw LedgerError(LedgerErrc::InsufficientFunds,
                          src + " holds " + std::to_string(from.balance) + ", asked " + std::to_string(amount));
    from.balance -= amount;
    to.balance += amount;
    return next_tx_id();
}

PaymentChannel Ledger::open_channel(const AccountId& account, const AccountId& destination, std::uint64_t amount,
                                    std::uint32_t settle_delay, const PublicKey& public_key)
{
    std::lock_guard lock(mu_);
    finalize_locked();
    auto& payer = account_locked(account);
    account_locked(destination);
    if (payer.balance < amount)
        throw LedgerError(LedgerErrc::InsufficientFunds,
                          account + " holds " + std::to_string(payer.balance) + ", channel needs " +
                              std::to_string(amount));
    payer.balance -= amount;
    PaymentChannel ch;
    ByteWriter w;
    w.put_bytes(as_bytes(config_.asset_code));
    w.put_var_octets(as_bytes(account));
    w.put_var_octets(as_bytes(destination));
    w.put_uint_be(++tx_counter_, 8);
    ch.id.bytes = sha256(w.bytes());
    ch.account = account;
    ch.destination = destination;
    ch.amount = amount;
    ch.public_key = public_key;
    ch.settle_delay = settle_delay;
    channels_.emplace(ch.id, ch);
    return ch;
}

PaymentChannel Ledger::fund_channel(const ChannelId& id, std::uint64_t amount)
{
    std::lock_guard lock(mu_);
    finalize_locked();
    auto& ch = channel_locked(id);
    if (ch.state != ChannelState::Open) throw LedgerError(LedgerErrc::AlreadyClosed, id.hex());
    auto& payer = account_locked(ch.account);
    if (payer.balance < amount)
        throw LedgerError(LedgerErrc::InsufficientFunds, ch.account + " cannot fund " + std::to_string(amount));
    payer.balance -= amount;
    ch.amount += amount;
    return ch;
}

bool Ledger::verify_locked(const Claim& claim) const
{
    auto it = channels_.find(claim.channel_id);
    if (it == channels_.end()) throw LedgerError(LedgerErrc::UnknownChannel, claim.channel_id.hex());
    const auto& ch = it->second;
    if (claim.cumulative_amount > ch.amount) return false;
    return verify_signature(ch.public_key, Claim::signed_payload(claim.channel_id, claim.cumulative_amount),
                            claim.signature);
}

bool Ledger::verify_claim(const Claim& claim) const
{
    std::lock_guard lock(mu_);
    return verify_locked(claim);
}

RedeemResult Ledger::redeem_claim(const Claim& claim)
{
    std::lock_guard lock(mu_);
    finalize_locked();
    auto& ch = channel_locked(claim.channel_id);
    if (ch.state == ChannelState::Closed) throw LedgerError(LedgerErrc::AlreadyClosed, ch.id.hex());
    if (!verify_locked(claim)) throw LedgerError(LedgerErrc::InvalidClaim, "signature or amount rejected");
    if (claim.cumulative_amount <= ch.balance) return RedeemResult{0, true};
    auto delta = claim.cumulative_amount - ch.balance;
    account_locked(ch.destination).balance += delta;
    ch.balance = claim.cumulative_amount;
    return RedeemResult{delta, false};
}

void Ledger::finish_close_locked(PaymentChannel& ch)
{
    account_locked(ch.account).balance += ch.amount - ch.balance;
    ch.state = ChannelState::Closed;
}

CloseResult Ledger::close_channel(const ChannelId& id, const AccountId& initiator)
{
    std::lock_guard lock(mu_);
    finalize_locked();
    auto& ch = channel_locked(id);
    if (ch.state == ChannelState::Closed) throw LedgerError(LedgerErrc::AlreadyClosed, id.hex());
    if (initiator != ch.account && initiator != ch.destination)
        throw LedgerError(LedgerErrc::NotPermitted, initiator + " is not a party to channel " + id.hex());
    const auto refund = ch.amount - ch.balance;
    if (initiator == ch.destination || ch.settle_delay == 0) {
        finish_close_locked(ch);
        return CloseResult{ChannelState::Closed, refund, std::nullopt};
    }
    if (ch.state == ChannelState::Open) {
        ch.state = ChannelState::Closing;
        ch.close_after = clock_->now() + std::chrono::seconds(ch.settle_delay);
    }
    return CloseResult{ChannelState::Closing, 0, ch.close_after};
}

void Ledger::finalize_locked()
{
    const auto now = clock_->now();
    for (auto& [id, ch] : channels_)
        if (ch.state == ChannelState::Closing && ch.close_after && *ch.close_after <= now) finish_close_locked(ch);
}

std::size_t Ledger::finalize_expired()
{
    std::lock_guard lock(mu_);
    std::size_t before = 0;
    for (auto& [id, ch] : channels_) before += ch.state == ChannelState::Closing;
    finalize_locked();
    std::size_t after = 0;
    for (auto& [id, ch] : channels_) after += ch.state == ChannelState::Closing;
    return before - after;
}

std::optional<Account> Ledger::account(const AccountId& id) const
{
    std::lock_guard lock(mu_);
    const_cast<Ledger*>(this)->finalize_locked();
    auto it = accounts_.find(id);
    if (it == accounts_.end()) return std::nullopt;
    return it->second;
}

std::optional<PaymentChannel> Ledger::channel(const ChannelId& id) const
{
    std::lock_guard lock(mu_);
    const_cast<Ledger*>(this)->finalize_locked();
    auto it = channels_.find(id);
    if (it == channels_.end()) return std::nullopt;
    return it->second;
}

std::vector<Account> Ledger::accounts() const
{
    std::lock_guard lock(mu_);
    const_cast<Ledger*>(this)->finalize_locked();
    std::vector<Account> out;
    for (const auto& [id, a] : accounts_) out.push_back(a);
    return out;
}

std::vector<PaymentChannel> Ledger::channels() const
{
    std::lock_guard lock(mu_);
    const_cast<Ledger*>(this)->finalize_locked();
    std::vector<PaymentChannel> out;
    for (const auto& [id, c] : channels_) out.push_back(c);
    return out;
}

std::uint64_t Ledger::total_supply() const
{
    std::lock_guard lock(mu_);
    std::uint64_t sum = 0;
    for (const auto& [id, a] : accounts_) sum += a.balance;
    for (const auto& [id, c] : channels_) sum += c.escrow();
    return sum;
}

void Ledger::corrupt_balance_for_testing(const AccountId& id, std::uint64_t balance)
{
    std::lock_guard lock(mu_);
    account_locked(id).balance = balance;
}

}  // namespace ilp::ledger
