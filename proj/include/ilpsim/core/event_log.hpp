#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "ilpsim/core/time.hpp"

namespace ilp {

/// One observable step in a packet's or settlement's life. Scenario checks
/// replay the log, so kinds are stable identifiers.
struct Event {
    Timestamp at;
    std::string component;  // e.g. "connector:g.conn1", "stream:bob"
    std::string kind;
    std::string packet;     // condition hex, empty for non-packet events
    std::string peer;
    std::uint64_t amount = 0;
    std::string detail;
};

namespace event {
inline constexpr const char* kPrepareIn = "prepare_in";
inline constexpr const char* kPrepareOut = "prepare_out";
inline constexpr const char* kFulfillVerified = "fulfill_verified";
inline constexpr const char* kFulfillInvalid = "fulfill_invalid";
inline constexpr const char* kDebitOutgoing = "debit_outgoing";
inline constexpr const char* kFulfillRelayed = "fulfill_relayed";
inline constexpr const char* kRejectRelayed = "reject_relayed";
inline constexpr const char* kRejectLocal = "reject_local";
inline constexpr const char* kConditionMatch = "condition_match";
inline constexpr const char* kReceiverCredit = "receiver_credit";
inline constexpr const char* kSenderFulfilled = "sender_fulfilled";
inline constexpr const char* kSenderRejected = "sender_rejected";
inline constexpr const char* kClaimSigned = "claim_signed";
inline constexpr const char* kClaimReceived = "claim_received";
inline constexpr const char* kClaimRedeemed = "claim_redeemed";
inline constexpr const char* kChannelOpened = "channel_opened";
inline constexpr const char* kChannelClosed = "channel_closed";
inline constexpr const char* kSettlementDeferred = "settlement_deferred";
}  // namespace event

class EventLog {
public:
    void record(Event e);
    std::vector<Event> snapshot() const;
    std::size_t size() const;
    void clear();

private:
    mutable std::mutex mu_;
    std::vector<Event> events_;
};

namespace logging {
/// Named logger with the "timestamp level component message key=value" layout.
std::shared_ptr<spdlog::logger> get(const std::string& component);
void set_level(spdlog::level::level_enum level);
}  // namespace logging

}  // namespace ilp
