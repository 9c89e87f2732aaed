#include "ilpsim/settlement/balance.hpp"

#include <charconv>

namespace ilp::settlement {

using nlohmann::json;

namespace {

std::int64_t parse_amount(const json& v, const char* key)
{
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s == "-Infinity") return std::numeric_limits<std::int64_t>::min();
        if (s == "Infinity") return std::numeric_limits<std::int64_t>::max();
        std::int64_t out = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec == std::errc{} && p == s.data() + s.size()) return out;
    }
    throw std::invalid_argument(std::string("balance.") + key + " is not an integer: " + v.dump());
}

std::int64_t pow10(unsigned n)
{
    std::int64_t r = 1;
    while (n--) r *= 10;
    return r;
}

std::int64_t rescale_one(std::int64_t v, int from, int to)
{
    if (v == std::numeric_limits<std::int64_t>::min() || v == std::numeric_limits<std::int64_t>::max()) return v;
    if (to >= from) {
        __int128 r = static_cast<__int128>(v) * pow10(static_cast<unsigned>(to - from));
        if (r > std::numeric_limits<std::int64_t>::max()) return std::numeric_limits<std::int64_t>::max();
        if (r < std::numeric_limits<std::int64_t>::min()) return std::numeric_limits<std::int64_t>::min();
        return static_cast<std::int64_t>(r);
    }
    return v / pow10(static_cast<unsigned>(from - to));
}

}  // namespace

BalancePolicy BalancePolicy::from_json(const json& j, std::vector<std::string>* warnings)
{
    BalancePolicy p;
    if (j.contains("maximum")) p.maximum = parse_amount(j["maximum"], "maximum");
    if (j.contains("settleThreshold")) {
        p.settle_threshold = parse_amount(j["settleThreshold"], "settleThreshold");
        if (p.settle_threshold > 0) {
            if (warnings)
                warnings->push_back("settleThreshold " + std::to_string(p.settle_threshold) +
                                    " is positive; using " + std::to_string(-p.settle_threshold));
            p.settle_threshold = -p.settle_threshold;
        }
    }
    if (j.contains("settleTo")) p.settle_to = parse_amount(j["settleTo"], "settleTo");
    if (!p.valid())
        throw std::invalid_argument("balance policy needs settleThreshold <= settleTo <= maximum, got " +
                                    std::to_string(p.settle_threshold) + " / " + std::to_string(p.settle_to) +
                                    " / " + std::to_string(p.maximum));
    return p;
}

json BalancePolicy::to_json() const
{
    auto text = [](std::int64_t v) -> json {
        if (v == std::numeric_limits<std::int64_t>::min()) return "-Infinity";
        if (v == std::numeric_limits<std::int64_t>::max()) return "Infinity";
        return std::to_string(v);
    };
    return {{"maximum", text(maximum)}, {"settleThreshold", text(settle_threshold)}, {"settleTo", text(settle_to)}};
}

BalancePolicy BalancePolicy::rescaled(int from_scale, int to_scale) const
{
    return {rescale_one(maximum, from_scale, to_scale), rescale_one(settle_threshold, from_scale, to_scale),
            rescale_one(settle_to, from_scale, to_scale)};
}

bool check_peering_compat(const BalancePolicy& a, const BalancePolicy& b)
{
    auto neg = [](std::int64_t v) { return -static_cast<__int128>(v); };
    return neg(a.settle_threshold) < b.maximum && neg(b.settle_threshold) < a.maximum;
}

BilateralBalance::BilateralBalance(std::string peer_id, BalancePolicy policy, unsigned scale_shift)
    : peer_id_(std::move(peer_id)), policy_(policy), shift_(scale_shift), unit_(pow10(scale_shift))
{
    if (!policy_.valid()) throw std::invalid_argument("invalid balance policy for " + peer_id_);
    if (scale_shift > 18) throw std::invalid_argument("scale shift too large for " + peer_id_);
}

bool BilateralBalance::on_incoming_prepare(std::uint64_t amount)
{
    if (static_cast<__int128>(value_) + amount > policy_.maximum) return false;
    value_ += static_cast<std::int64_t>(amount);
    return true;
}

void BilateralBalance::rollback_incoming(std::uint64_t amount) { value_ -= static_cast<std::int64_t>(amount); }

void BilateralBalance::set_outgoing_channel(const ledger::ChannelId& id, std::uint64_t capacity, SigningKey key)
{
    out_channel_ = id;
    out_capacity_ = capacity;
    key_ = std::move(key);
    highest_signed_ = 0;
}

SettleOutcome BilateralBalance::on_outgoing_fulfilled(std::uint64_t amount)
{
    value_ -= static_cast<std::int64_t>(amount);
    return try_settle();
}

SettleOutcome BilateralBalance::try_settle()
{
    SettleOutcome out;
    if (!policy_.settles() || value_ > policy_.settle_threshold) {
        deferred_ = false;
        return out;
    }
    const auto owed = static_cast<__int128>(policy_.settle_to) - value_;
    const auto ledger_units = static_cast<std::uint64_t>(owed / unit_);
    if (ledger_units == 0) return out;
    if (!out_channel_ || static_cast<__int128>(highest_signed_) + ledger_units > out_capacity_) {
        deferred_ = true;
        out.deferred = true;
        return out;
    }
    highest_signed_ += ledger_units;
    value_ += static_cast<std::int64_t>(ledger_units) * unit_;
    deferred_ = false;
    out.claim = ledger::Claim::sign(*out_channel_, highest_signed_, *key_);
    out.ledger_amount = ledger_units;
    return out;
}

std::uint64_t BilateralBalance::receive_claim(const ledger::Claim& claim, const ledger::LedgerApi& ledger)
{
    if (!in_channel_ || claim.channel_id != *in_channel_)
        throw SettlementError(SettleErrc::InvalidClaim, "claim for unknown channel " + claim.channel_id.hex());
    bool ok = false;
    try {
        ok = ledger.verify_claim(claim);
    } catch (const ledger::LedgerError& e) {
        throw SettlementError(SettleErrc::InvalidClaim, e.what());
    }
    if (!ok) throw SettlementError(SettleErrc::InvalidClaim, "claim signature or amount rejected");
    const auto seen = incoming_cumulative();
    if (claim.cumulative_amount <= seen) return 0;
    const auto delta = claim.cumulative_amount - seen;
    value_ -= static_cast<std::int64_t>(delta) * unit_;
    best_claim_ = claim;
    return delta;
}

}  // namespace ilp::settlement
