#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ilpsim/btp/transport.hpp"
#include "ilpsim/core/event_log.hpp"
#include "ilpsim/ledger/ledger.hpp"

namespace ilp::harness {

struct SetupFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioAssertFailed : std::runtime_error {
    ScenarioAssertFailed(std::string check, const std::string& detail)
        : std::runtime_error(check + ": " + detail), check_name(std::move(check))
    {
    }
    std::string check_name;
};

/// An uplink node attached to a connector's child account.
struct NodeSpec {
    std::string name;
    std::string connector;
    std::string account;         // child account on the connector
    nlohmann::json config;       // ".moneyd.json" shaped
    std::optional<std::string> receiver;  // payment pointer served by this node
};

/// A link between two connectors: `dialer` authenticates to `listener`.
struct LinkSpec {
    std::string name;
    std::string dialer;
    std::string dialer_account;
    std::string listener;
    std::string listener_account;
    std::string auth_name;
    std::string token;
};

/// {"drop_rate", "duplicate_rate", "latency_ms", "max_jitter_ms"}
btp::FaultPlan fault_plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const btp::FaultPlan& p);

struct ScenarioSpec {
    std::string name;
    std::string description;
    std::vector<nlohmann::json> ledgers;     // ledger bootstrap documents
    std::vector<nlohmann::json> connectors;  // connector configs
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::vector<nlohmann::json> actions;     // {"do": ...}
    /// Applied to inter-node links once setup is complete.
    std::optional<btp::FaultPlan> faults;

    /// Throws SetupFailed.
    static ScenarioSpec from_json(const nlohmann::json& j);
    static ScenarioSpec load(const std::filesystem::path& file);
};

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;

    nlohmann::json to_json() const;
};

struct PaymentResult {
    std::string id;
    std::string from;
    std::string to;
    std::uint64_t amount = 0;
    std::uint64_t source_sent = 0;
    std::uint64_t delivered = 0;           // as the receiver reported to the sender
    std::optional<std::uint64_t> received;  // receiver's own total for this payment
    std::uint64_t packets_fulfilled = 0;
    std::uint64_t packets_rejected = 0;
    bool ok = false;
    std::string error;

    nlohmann::json to_json() const;
};

struct ScenarioReport {
    std::string scenario;
    std::uint64_t seed = 0;
    btp::FaultPlan faults;
    std::vector<PaymentResult> payments;
    nlohmann::json ledgers = nlohmann::json::object();   // per ledger: supply, accounts, channels
    nlohmann::json balance_deltas = nlohmann::json::object();  // final - funded, per ledger account
    nlohmann::json connectors = nlohmann::json::object();
    std::vector<CheckResult> checks;
    std::vector<std::string> failures;  // failed assertions and setup errors
    std::vector<std::string> skipped;   // lossless-only assertions under a lossy plan
    std::vector<Event> events;
    std::uint64_t frames_sent = 0;
    std::uint64_t frames_dropped = 0;
    std::uint64_t frames_duplicated = 0;

    bool ok() const;
    const PaymentResult* payment(const std::string& id) const;
    const CheckResult* check(const std::string& name) const;
    /// `with_events` false replaces the log with its count and digest.
    nlohmann::json to_json(bool with_events = true) const;
};

struct RunOptions {
    std::uint64_t seed = 1;
    /// Replaces the spec's fault plan.
    std::optional<btp::FaultPlan> faults;
    /// Throw ScenarioAssertFailed on the first failing assert action.
    bool strict = false;
};

/// Runs the actions in order on an in-process topology with a simulated
/// clock. Deterministic for a given (spec, seed). Throws SetupFailed.
ScenarioReport run_scenario(const ScenarioSpec& spec, const RunOptions& opts = {});

/// Streams `amount` from the owner's `src` node to the receiver of its
/// `dst` node, settles and closes both nodes' channels. The report carries
/// both nodes' ledger deltas under "swap".
ScenarioReport swap_scenario(const ScenarioSpec& topology, const std::string& src, const std::string& dst,
                             std::uint64_t amount, std::uint64_t max_packet_amount,
                             const RunOptions& opts = {});
nlohmann::json swap_summary(const ScenarioSpec& topology, const ScenarioReport& report, const std::string& src,
                            const std::string& dst);

// Invariant checks, usable on their own.

/// sum(balances) + escrow equals the genesis amount on every ledger.
CheckResult check_conservation(const std::map<std::string, std::shared_ptr<ledger::Ledger>>& ledgers);
/// Event-order atomicity: no hop pays upstream or debits without a verified
/// downstream fulfillment; no receiver credit without a condition match;
/// a fulfilled sender packet was debited at every hop that forwarded it.
CheckResult check_htla(const std::vector<Event>& events);
/// Every channel open and claim is between ledger accounts in `pairs`.
CheckResult check_locality(const std::vector<Event>& events,
                           const std::set<std::pair<std::string, std::string>>& pairs);

}  // namespace ilp::harness
