#pragma once

// A small STREAM: money split into Prepare packets whose conditions derive
// from a shared secret, a send window with AIMD backoff, and a receiver that
// fulfills and totals packets per connection.
//
// Data field of every packet:
//   version (1) || sequence u32 (4) || E(flags (1) || payload)
// where E xors with HMAC(secret, "enc" || sequence || block u32) blocks.
// Sender payload is the source amount (u64); the receiver answers with the
// amount it credited (u64) in the Fulfill data, or in the F99 data of a probe.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "ilpsim/connector/plugin.hpp"
#include "ilpsim/core/crypto.hpp"
#include "ilpsim/core/event_log.hpp"

namespace ilp::stream {

inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr unsigned kMaxWindow = 20;
inline constexpr unsigned kRetryBudget = 10;

namespace flags {
inline constexpr std::uint8_t kProbe = 0x01;
inline constexpr std::uint8_t kClose = 0x02;
}  // namespace flags

using Secret = std::array<std::uint8_t, 32>;

struct Credentials {
    IlpAddress destination;
    Secret shared_secret{};
};

/// fulfillment = HMAC-SHA256(secret, data); condition = SHA-256(fulfillment).
std::pair<Fulfillment, Condition> packet_condition(const Secret& secret, ByteView data);

struct Frame {
    std::uint32_t sequence = 0;
    std::uint8_t flags = 0;
    Bytes payload;
};
Bytes seal_frame(const Secret& secret, const Frame& f);
/// Throws DecodeError on a short buffer or unknown version.
Frame open_frame(const Secret& secret, ByteView data);

enum class ConnState { Open, Closing, Closed };
const char* to_string(ConnState s);

/// Receiving side. Attach it to an uplink and hand out credentials.
class StreamServer : public std::enable_shared_from_this<StreamServer> {
public:
    struct Connection {
        std::string token;
        Secret secret{};
        std::uint64_t total_received = 0;
        std::uint64_t packets = 0;
        ConnState state = ConnState::Open;
        std::map<std::uint32_t, std::uint64_t> credited;  // sequence -> amount
    };

    static std::shared_ptr<StreamServer> create(std::shared_ptr<connector::PluginClient> uplink,
                                                std::shared_ptr<RandomSource> rng, std::shared_ptr<EventLog> log,
                                                std::shared_ptr<const Clock> clock, std::string component);

    /// Precondition: the uplink is connected. Thread-safe.
    Credentials generate_credentials();
    std::optional<Secret> secret_for(const std::string& token) const;

    IlpResponse handle_incoming(const PreparePacket& p);

    std::uint64_t total_received() const;
    std::optional<Connection> connection(const std::string& token) const;
    std::size_t connection_count() const;

private:
    StreamServer(std::shared_ptr<connector::PluginClient> uplink, std::shared_ptr<RandomSource> rng,
                 std::shared_ptr<EventLog> log, std::shared_ptr<const Clock> clock, std::string component);
    void record(const char* kind, const PreparePacket& p, std::uint64_t amount, std::string detail = {});

    std::shared_ptr<connector::PluginClient> uplink_;
    std::shared_ptr<RandomSource> rng_;
    std::shared_ptr<EventLog> log_;
    std::shared_ptr<const Clock> clock_;
    std::string component_;
    mutable std::mutex mu_;
    std::map<std::string, Connection> conns_;
};

enum class SendError { Unreachable, Expired, Rejected, Killed };
const char* to_string(SendError e);

struct SendReport {
    std::uint64_t source_amount = 0;  // requested
    std::uint64_t source_sent = 0;    // fulfilled source units
    std::uint64_t delivered = 0;      // receiver units, as the receiver reported
    std::uint64_t packets_fulfilled = 0;
    std::uint64_t packets_rejected = 0;
    /// Receiver units per source unit from the probe; absent when not probed.
    std::optional<std::uint64_t> probe_delivered;
    std::optional<SendError> error;
    std::string error_detail;
    unsigned min_window = 1;
    unsigned max_window = 1;

    bool ok() const { return !error.has_value(); }
};

struct SendOptions {
    std::uint64_t max_packet_amount = 1'000'000;
    bool probe = true;
    bool close = true;
    Duration packet_expiry{30'000};
    Duration retry_delay{100};
    /// Hard-close the uplink after this many fulfilled packets (test hook).
    std::optional<std::uint64_t> kill_after_packets;
};

/// Sending side of one connection. Runs on the uplink's loop.
class StreamSender : public std::enable_shared_from_this<StreamSender> {
public:
    using DoneHandler = std::function<void(const SendReport&)>;

    static std::shared_ptr<StreamSender> create(std::shared_ptr<EventLoop> loop,
                                                std::shared_ptr<connector::PluginClient> uplink,
                                                Credentials creds, SendOptions opts,
                                                std::shared_ptr<EventLog> log, std::string component);

    void send_money(std::uint64_t amount, DoneHandler done);
    void kill();

    unsigned window() const { return window_; }
    bool finished() const { return finished_; }
    const SendReport& report() const { return report_; }

private:
    StreamSender(std::shared_ptr<EventLoop> loop, std::shared_ptr<connector::PluginClient> uplink,
                 Credentials creds, SendOptions opts, std::shared_ptr<EventLog> log, std::string component);

    PreparePacket make_packet(std::uint64_t amount, std::uint8_t frame_flags);
    void send_probe();
    void pump();
    void send_chunk(std::uint64_t amount);
    void on_chunk_result(std::uint64_t amount, const Condition& cond, IlpResponse resp);
    void finish(std::optional<SendError> err, std::string detail = {});
    void send_close();
    void complete();
    void record(const char* kind, const Condition& c, std::uint64_t amount, std::string detail = {});

    std::shared_ptr<EventLoop> loop_;
    std::shared_ptr<connector::PluginClient> uplink_;
    Credentials creds_;
    SendOptions opts_;
    std::shared_ptr<EventLog> log_;
    std::string component_;
    DoneHandler done_;

    SendReport report_;
    std::uint64_t unassigned_ = 0;
    std::uint64_t packet_size_ = 0;
    unsigned window_ = 1;
    unsigned in_flight_ = 0;
    unsigned failures_ = 0;
    bool retry_scheduled_ = false;
    std::uint32_t next_seq_ = 1;
    bool finished_ = false;
    bool completed_ = false;
};

}  // namespace ilp::stream
