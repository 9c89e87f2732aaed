#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "ilpsim/core/bytes.hpp"
#include "ilpsim/core/crypto.hpp"
#include "ilpsim/core/event_loop.hpp"

namespace ilp::btp {

/// Ordered, message-boundary-preserving duplex link. Handlers run on the
/// owning event loop.
class Transport {
public:
    using MessageHandler = std::function<void(Bytes)>;
    using CloseHandler = std::function<void()>;

    virtual ~Transport() = default;
    /// Returns false when the transport is already closed.
    virtual bool send(Bytes message) = 0;
    virtual void set_handlers(MessageHandler on_message, CloseHandler on_close) = 0;
    virtual void close() = 0;
    virtual bool is_open() const = 0;
};

/// Frame-level faults applied on the sending side of an in-memory link.
struct FaultPlan {
    double drop_rate = 0.0;
    double duplicate_rate = 0.0;
    Duration latency{1};
    /// Extra uniformly random delay in [0, max_jitter].
    Duration max_jitter{0};

    bool lossless() const { return drop_rate == 0.0 && duplicate_rate == 0.0; }
};

struct FaultCounters {
    std::atomic<std::uint64_t> sent{0};
    std::atomic<std::uint64_t> dropped{0};
    std::atomic<std::uint64_t> duplicated{0};
};

/// Creates two connected in-memory transports. Frames travel through the
/// loop with the plan's latency; `rng` decides drops, duplicates and jitter.
std::pair<std::shared_ptr<Transport>, std::shared_ptr<Transport>> make_memory_pair(
    std::shared_ptr<EventLoop> loop, FaultPlan plan = {}, std::shared_ptr<RandomSource> rng = nullptr,
    std::shared_ptr<FaultCounters> counters = nullptr);
/// Same, but the plan is read on every send so the owner can change it later.
std::pair<std::shared_ptr<Transport>, std::shared_ptr<Transport>> make_memory_pair(
    std::shared_ptr<EventLoop> loop, std::shared_ptr<const FaultPlan> plan,
    std::shared_ptr<RandomSource> rng = nullptr, std::shared_ptr<FaultCounters> counters = nullptr);

/// Length-prefixed (u32 BE) messages over a TCP socket. A reader thread posts
/// incoming messages to the loop.
class TcpTransport final : public Transport, public std::enable_shared_from_this<TcpTransport> {
public:
    static std::shared_ptr<TcpTransport> adopt(std::shared_ptr<EventLoop> loop, int fd);
    /// Throws std::runtime_error when the connection cannot be established.
    static std::shared_ptr<TcpTransport> connect(std::shared_ptr<EventLoop> loop, const std::string& host,
                                                 std::uint16_t port);
    ~TcpTransport() override;

    bool send(Bytes message) override;
    void set_handlers(MessageHandler on_message, CloseHandler on_close) override;
    void close() override;
    bool is_open() const override { return open_; }

private:
    TcpTransport(std::shared_ptr<EventLoop> loop, int fd);
    void start_reader();
    void reader_loop();

    std::shared_ptr<EventLoop> loop_;
    int fd_;
    std::atomic<bool> open_{true};
    std::mutex write_mu_;
    std::mutex handler_mu_;
    MessageHandler on_message_;
    CloseHandler on_close_;
    std::thread reader_;
};

class TcpListener {
public:
    using AcceptHandler = std::function<void(std::shared_ptr<Transport>)>;

    /// Binds immediately (port 0 picks a free port); throws on bind failure.
    TcpListener(std::shared_ptr<EventLoop> loop, const std::string& bind_address, std::uint16_t port,
                AcceptHandler on_accept);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    void close();

private:
    std::shared_ptr<EventLoop> loop_;
    int fd_ = -1;
    std::uint16_t port_ = 0;
    AcceptHandler on_accept_;
    std::atomic<bool> open_{true};
    std::shared_ptr<std::atomic<bool>> alive_ = std::make_shared<std::atomic<bool>>(true);
    std::thread thread_;
};

}  // namespace ilp::btp
