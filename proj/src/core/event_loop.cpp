#include "ilpsim/core/event_loop.hpp"

#include <stdexcept>

namespace ilp {

std::shared_ptr<EventLoop> EventLoop::simulated(Timestamp start)
{
    return std::shared_ptr<EventLoop>(new EventLoop(true, start));
}

std::shared_ptr<EventLoop> EventLoop::realtime()
{
    return std::shared_ptr<EventLoop>(new EventLoop(false, Timestamp{}));
}

EventLoop::EventLoop(bool simulated, Timestamp start) : simulated_(simulated), sim_now_(start) {}

EventLoop::~EventLoop() { stop(); }

Timestamp EventLoop::now() const
{
    if (simulated_) {
        std::lock_guard lock(mu_);
        return sim_now_;
    }
    return SystemClock{}.now();
}

void EventLoop::post(Task task) { post_at(now(), std::move(task)); }

EventLoop::TimerId EventLoop::post_at(Timestamp when, Task task)
{
    TimerId id;
    {
        std::lock_guard lock(mu_);
        id = next_id_++;
        queue_.push(Entry{when, seq_++, id, std::move(task)});
    }
    cv_.notify_one();
    return id;
}

void EventLoop::cancel(TimerId id)
{
    std::lock_guard lock(mu_);
    cancelled_.insert(id);
}

bool EventLoop::pop_next(Entry& out, bool jump_time, std::optional<Timestamp> limit)
{
    std::lock_guard lock(mu_);
    while (!queue_.empty()) {
        const auto& top = queue_.top();
        if (cancelled_.erase(top.id)) {
            queue_.pop();
            continue;
        }
        if (limit && top.when > *limit) return false;
        if (top.when > sim_now_) {
            if (!jump_time) return false;
            sim_now_ = top.when;
        }
        out = std::move(const_cast<Entry&>(top));
        queue_.pop();
        return true;
    }
    return false;
}

std::size_t EventLoop::run_until_idle(std::size_t max_tasks)
{
    if (!simulated_) throw std::logic_error("run_until_idle requires a simulated loop");
    std::size_t n = 0;
    Entry e;
    while (n < max_tasks && pop_next(e, true, std::nullopt)) {
        e.task();
        ++n;
    }
    return n;
}

bool EventLoop::run_until(const std::function<bool()>& done, std::size_t max_tasks)
{
    if (!simulated_) throw std::logic_error("run_until requires a simulated loop");
    std::size_t n = 0;
    Entry e;
    while (!done() && n < max_tasks && pop_next(e, true, std::nullopt)) {
        e.task();
        ++n;
    }
    return done();
}

void EventLoop::advance(Duration d)
{
    if (!simulated_) throw std::logic_error("advance requires a simulated loop");
    const auto target = now() + d;
    Entry e;
    while (pop_next(e, true, target)) e.task();
    std::lock_guard lock(mu_);
    if (sim_now_ < target) sim_now_ = target;
}

void EventLoop::run()
{
    if (simulated_) throw std::logic_error("run requires a realtime loop");
    loop_thread_ = std::this_thread::get_id();
    while (true) {
        Entry e;
        {
            std::unique_lock lock(mu_);
            while (true) {
                if (stopping_) return;
                while (!queue_.empty() && cancelled_.erase(queue_.top().id)) queue_.pop();
                if (queue_.empty()) {
                    cv_.wait(lock);
                    continue;
                }
                auto when = queue_.top().when;
                auto now = SystemClock{}.now();
                if (when <= now) break;
                cv_.wait_for(lock, when - now);
            }
            e = std::move(const_cast<Entry&>(queue_.top()));
            queue_.pop();
        }
        e.task();
    }
}

void EventLoop::start_thread()
{
    thread_ = std::thread([this] { run(); });
}

void EventLoop::stop()
{
    {
        std::lock_guard lock(mu_);
        stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

}  // namespace ilp
