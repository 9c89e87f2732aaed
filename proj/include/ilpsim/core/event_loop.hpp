#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <unordered_set>
#include <vector>

#include "ilpsim/core/time.hpp"

namespace ilp {

/// Single-threaded task queue with timers. Every component of a process runs
/// its handlers on one loop, so per-account state needs no further locking.
///
/// In simulated mode time is virtual: it only moves when the loop jumps to the
/// next scheduled timer or when advance() is called. In realtime mode the
/// loop follows the system clock and is driven by run() on some thread.
class EventLoop final : public Clock {
public:
    using Task = std::function<void()>;
    using TimerId = std::uint64_t;

    static std::shared_ptr<EventLoop> simulated(Timestamp start);
    static std::shared_ptr<EventLoop> realtime();

    ~EventLoop() override;
    EventLoop(const EventLoop&) = delete;
    EventLoop& operator=(const EventLoop&) = delete;

    bool is_simulated() const { return simulated_; }
    Timestamp now() const override;

    /// Thread-safe.
    void post(Task task);
    TimerId post_at(Timestamp when, Task task);
    TimerId post_after(Duration delay, Task task) { return post_at(now() + delay, std::move(task)); }
    void cancel(TimerId id);

    // Simulated mode.
    /// Runs every queued task, jumping virtual time to each timer in turn.
    /// Returns the number of tasks executed. Stops after `max_tasks`.
    std::size_t run_until_idle(std::size_t max_tasks = 50'000'000);
    /// Runs tasks until `done()` holds or the queue drains.
    bool run_until(const std::function<bool()>& done, std::size_t max_tasks = 50'000'000);
    /// Runs everything due within `d`, then sets the clock to now + d.
    void advance(Duration d);

    // Realtime mode.
    void run();
    void start_thread();
    void stop();
    bool in_loop_thread() const { return std::this_thread::get_id() == loop_thread_.load(); }

    /// Runs `fn` on the loop and waits for the result. Calls directly when
    /// already on the loop thread or in simulated mode.
    template <typename F>
    auto invoke(F&& fn) -> decltype(fn())
    {
        if (simulated_ || in_loop_thread()) return fn();
        using R = decltype(fn());
        auto prom = std::make_shared<std::promise<R>>();
        auto fut = prom->get_future();
        post([prom, f = std::forward<F>(fn)]() mutable {
            try {
                if constexpr (std::is_void_v<R>) {
                    f();
                    prom->set_value();
                } else {
                    prom->set_value(f());
                }
            } catch (...) {
                prom->set_exception(std::current_exception());
            }
        });
        return fut.get();
    }

private:
    explicit EventLoop(bool simulated, Timestamp start);

    struct Entry {
        Timestamp when;
        std::uint64_t seq;
        TimerId id;
        Task task;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const
        {
            return a.when != b.when ? a.when > b.when : a.seq > b.seq;
        }
    };

    bool pop_next(Entry& out, bool jump_time, std::optional<Timestamp> limit);

    const bool simulated_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    std::unordered_set<TimerId> cancelled_;
    Timestamp sim_now_;
    std::uint64_t seq_ = 0;
    TimerId next_id_ = 1;
    bool stopping_ = false;
    std::atomic<std::thread::id> loop_thread_{};
    std::thread thread_;
};

}  // namespace ilp
