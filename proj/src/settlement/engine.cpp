#include "ilpsim/settlement/engine.hpp"

namespace ilp::settlement {

using btp::ProtocolEntry;
using nlohmann::json;

PeerSettlement::PeerSettlement(std::string component, std::string peer_id, BalancePolicy policy,
                               SettlementConfig cfg, Sender send, std::shared_ptr<EventLog> log,
                               std::shared_ptr<const Clock> clock)
    : component_(std::move(component)),
      peer_id_(std::move(peer_id)),
      cfg_(std::move(cfg)),
      key_(ledger::key_from_secret(cfg_.secret)),
      balance_(peer_id_, policy, cfg_.scale_shift),
      send_(std::move(send)),
      log_(std::move(log)),
      clock_(std::move(clock))
{
}

bool PeerSettlement::is_channel_open(const btp::Entries& entries)
{
    return btp::find_entry(entries, btp::proto::kChannel) != nullptr;
}

bool PeerSettlement::is_claim(const btp::Entries& entries)
{
    return btp::find_entry(entries, btp::proto::kClaim) != nullptr;
}

bool PeerSettlement::set_peer_account(const ledger::AccountId& account)
{
    if (cfg_.peer_account) return *cfg_.peer_account == account;
    cfg_.peer_account = account;
    return true;
}

void PeerSettlement::record(const char* kind, std::uint64_t amount, std::string detail)
{
    if (!log_) return;
    log_->record(Event{clock_->now(), component_, kind, "", peer_id_, amount, std::move(detail)});
}

std::optional<btp::Entries> PeerSettlement::outgoing_channel_entries() const
{
    const auto& id = balance_.outgoing_channel();
    if (!id) return std::nullopt;
    auto sig = key_.sign(id->bytes);
    return btp::Entries{ProtocolEntry::octets(btp::proto::kChannel, Bytes(id->bytes.begin(), id->bytes.end())),
                        ProtocolEntry::octets(btp::proto::kChannelSignature, Bytes(sig.begin(), sig.end())),
                        ProtocolEntry::text(btp::proto::kFundChannel, cfg_.own_account)};
}

std::optional<btp::Entries> PeerSettlement::open_outgoing_channel()
{
    if (!enabled() || cfg_.outgoing_channel_amount == 0 || !cfg_.peer_account) return outgoing_channel_entries();
    if (!balance_.has_outgoing_channel()) {
        auto ch = cfg_.ledger->open_channel(cfg_.own_account, *cfg_.peer_account, cfg_.outgoing_channel_amount,
                                            cfg_.settle_delay, key_.public_key());
        balance_.set_outgoing_channel(ch.id, ch.amount, key_);
        record(event::kChannelOpened, ch.amount,
               "channel=" + ch.id.hex() + " payer=" + ch.account + " payee=" + ch.destination);
    }
    return outgoing_channel_entries();
}

std::optional<std::string> PeerSettlement::accept_incoming_channel(const btp::Entries& entries)
{
    if (!enabled()) return "settlement is not configured for " + peer_id_;
    const auto* c = btp::find_entry(entries, btp::proto::kChannel);
    const auto* s = btp::find_entry(entries, btp::proto::kChannelSignature);
    const auto* f = btp::find_entry(entries, btp::proto::kFundChannel);
    if (!c || c->data.size() != 32) return "channel entry must carry a 32-byte id";
    if (!s || s->data.size() != 64) return "channel_signature entry must carry 64 bytes";
    ledger::ChannelId id;
    std::copy(c->data.begin(), c->data.end(), id.bytes.begin());
    if (balance_.incoming_channel()) {
        if (*balance_.incoming_channel() == id) return std::nullopt;
        return "an incoming channel is already registered";
    }
    std::optional<ledger::PaymentChannel> ch;
    try {
        ch = cfg_.ledger->channel(id);
    } catch (const ledger::LedgerError& e) {
        return std::string("ledger: ") + e.what();
    }
    if (!ch) return "unknown channel " + id.hex();
    if (ch->state != ledger::ChannelState::Open) return "channel is not open";
    if (ch->destination != cfg_.own_account) return "channel pays " + ch->destination + ", not " + cfg_.own_account;
    if (f && to_string(f->data) != ch->account) return "fund_channel account does not own the channel";
    if (cfg_.peer_account && *cfg_.peer_account != ch->account)
        return "channel payer " + ch->account + " is not the configured peer " + *cfg_.peer_account;
    if (ch->amount < cfg_.min_incoming_channel_amount)
        return "channel amount " + std::to_string(ch->amount) + " below minimum " +
               std::to_string(cfg_.min_incoming_channel_amount);
    Signature sig{};
    std::copy(s->data.begin(), s->data.end(), sig.begin());
    if (!verify_signature(ch->public_key, id.bytes, sig)) return "bad channel signature";
    if (!cfg_.peer_account) cfg_.peer_account = ch->account;
    balance_.set_incoming_channel(id);
    record(event::kChannelOpened, ch->amount,
           "channel=" + id.hex() + " payer=" + ch->account + " payee=" + ch->destination + " incoming");
    return std::nullopt;
}

void PeerSettlement::settle(const SettleOutcome& outcome)
{
    if (outcome.deferred) {
        if (!deferred_logged_)
            record(event::kSettlementDeferred, static_cast<std::uint64_t>(-balance_.value()),
                   balance_.has_outgoing_channel() ? "channel exhausted" : "no outgoing channel");
        deferred_logged_ = true;
        return;
    }
    if (!outcome.claim) return;
    deferred_logged_ = false;
    record(event::kClaimSigned, outcome.claim->cumulative_amount,
           "channel=" + outcome.claim->channel_id.hex() + " payer=" + cfg_.own_account +
               " payee=" + cfg_.peer_account.value_or("?") + " increment=" + std::to_string(outcome.ledger_amount));
    if (send_) send_({ProtocolEntry::octets(btp::proto::kClaim, outcome.claim->encode())});
}

void PeerSettlement::on_outgoing_fulfilled(std::uint64_t amount)
{
    auto outcome = balance_.on_outgoing_fulfilled(amount);
    if (!enabled()) return;
    settle(outcome);
}

std::optional<std::string> PeerSettlement::on_claim(const btp::Entries& entries)
{
    if (!enabled()) return "settlement is not configured for " + peer_id_;
    const auto* e = btp::find_entry(entries, btp::proto::kClaim);
    if (!e) return "missing claim entry";
    ledger::Claim claim;
    try {
        claim = ledger::Claim::decode(e->data);
    } catch (const std::exception& ex) {
        return ex.what();
    }
    std::uint64_t delta = 0;
    try {
        delta = balance_.receive_claim(claim, *cfg_.ledger);
    } catch (const SettlementError& ex) {
        return ex.what();
    }
    record(event::kClaimReceived, claim.cumulative_amount,
           "channel=" + claim.channel_id.hex() + " increment=" + std::to_string(delta));
    if (delta > 0 && cfg_.redeem_eagerly) redeem();
    return std::nullopt;
}

std::uint64_t PeerSettlement::redeem()
{
    const auto& best = balance_.best_incoming_claim();
    if (!enabled() || !best || best->cumulative_amount <= redeemed_to_) return 0;
    try {
        auto r = cfg_.ledger->redeem_claim(*best);
        redeemed_to_ = best->cumulative_amount;
        record(event::kClaimRedeemed, r.credited, "channel=" + best->channel_id.hex());
        return r.credited;
    } catch (const ledger::LedgerError& e) {
        logging::get(component_)->warn("redeem failed peer={} error={}", peer_id_, e.what());
        return 0;
    }
}

void PeerSettlement::top_up(std::uint64_t amount)
{
    const auto& id = balance_.outgoing_channel();
    if (!enabled() || !id) throw SettlementError(SettleErrc::NoChannel, "no outgoing channel to fund");
    auto ch = cfg_.ledger->fund_channel(*id, amount);
    balance_.set_outgoing_capacity(ch.amount);
    settle(balance_.try_settle());
}

PeerSettlement::CleanupReport PeerSettlement::cleanup()
{
    CleanupReport out;
    if (!enabled()) return out;
    out.redeemed = redeem();
    auto close = [&](const ledger::ChannelId& id, const char* role) {
        try {
            auto r = cfg_.ledger->close_channel(id, cfg_.own_account);
            record(event::kChannelClosed, r.payer_refunded,
                   "channel=" + id.hex() + " role=" + role + " state=" + ledger::to_string(r.state));
            return r.state;
        } catch (const ledger::LedgerError& e) {
            logging::get(component_)->warn("close failed peer={} channel={} error={}", peer_id_, id.hex(), e.what());
            return ledger::ChannelState::Open;
        }
    };
    if (const auto& in = balance_.incoming_channel())
        out.incoming_closed = close(*in, "payee") == ledger::ChannelState::Closed;
    if (const auto& o = balance_.outgoing_channel())
        out.outgoing_closing = close(*o, "payer") != ledger::ChannelState::Open;
    return out;
}

json PeerSettlement::status() const
{
    json j = {{"peer", peer_id_},
              {"balance", std::to_string(balance_.value())},
              {"policy", balance_.policy().to_json()},
              {"settlement_deferred", balance_.settlement_deferred()}};
    if (enabled()) {
        j["ledger_account"] = cfg_.own_account;
        j["peer_ledger_account"] = cfg_.peer_account ? json(*cfg_.peer_account) : json(nullptr);
    }
    if (const auto& o = balance_.outgoing_channel())
        j["outgoing_channel"] = {{"channel_id", o->hex()},
                                 {"capacity", balance_.outgoing_capacity()},
                                 {"signed", balance_.highest_signed_cumulative()}};
    if (const auto& in = balance_.incoming_channel())
        j["incoming_channel"] = {{"channel_id", in->hex()},
                                 {"claimed", balance_.incoming_cumulative()},
                                 {"redeemed", redeemed_to_}};
    return j;
}

}  // namespace ilp::settlement
