#include "ilpsim/btp/transport.hpp"

namespace ilp::btp {

namespace {

class MemoryTransport final : public Transport, public std::enable_shared_from_this<MemoryTransport> {
public:
    MemoryTransport(std::shared_ptr<EventLoop> loop, std::shared_ptr<const FaultPlan> plan,
                    std::shared_ptr<RandomSource> rng,
                    std::shared_ptr<FaultCounters> counters)
        : loop_(std::move(loop)), plan_(std::move(plan)), rng_(std::move(rng)), counters_(std::move(counters))
    {
    }

    void connect(const std::shared_ptr<MemoryTransport>& peer) { peer_ = peer; }

    bool send(Bytes message) override
    {
        if (!open_) return false;
        auto peer = peer_.lock();
        if (!peer) return false;
        if (counters_) ++counters_->sent;
        const FaultPlan plan = *plan_;
        if (plan.drop_rate > 0 && rng_->uniform() < plan.drop_rate) {
            if (counters_) ++counters_->dropped;
            return true;
        }
        int copies = 1;
        if (plan.duplicate_rate > 0 && rng_->uniform() < plan.duplicate_rate) {
            copies = 2;
            if (counters_) ++counters_->duplicated;
        }
        for (int i = 0; i < copies; ++i) {
            auto delay = plan.latency;
            if (plan.max_jitter.count() > 0)
                delay += Duration(static_cast<Duration::rep>(rng_->uniform() *
                                                             static_cast<double>(plan.max_jitter.count() + 1)));
            std::weak_ptr<MemoryTransport> target = peer;
            loop_->post_after(delay, [target, message] {
                if (auto t = target.lock()) t->deliver(message);
            });
        }
        return true;
    }

    void set_handlers(MessageHandler on_message, CloseHandler on_close) override
    {
        on_message_ = std::move(on_message);
        on_close_ = std::move(on_close);
    }

    void close() override
    {
        if (!open_) return;
        open_ = false;
        if (auto peer = peer_.lock()) {
            std::weak_ptr<MemoryTransport> target = peer;
            loop_->post([target] {
                if (auto t = target.lock()) t->remote_closed();
            });
        }
        std::weak_ptr<MemoryTransport> self = weak_from_this();
        loop_->post([self] {
            if (auto t = self.lock()) t->notify_closed();
        });
    }

    bool is_open() const override { return open_; }

private:
    void deliver(const Bytes& message)
    {
        if (open_ && on_message_) on_message_(message);
    }

    void remote_closed()
    {
        if (!open_) return;
        open_ = false;
        notify_closed();
    }

    void notify_closed()
    {
        if (notified_) return;
        notified_ = true;
        if (on_close_) on_close_();
    }

    std::shared_ptr<EventLoop> loop_;
    std::shared_ptr<const FaultPlan> plan_;
    std::shared_ptr<RandomSource> rng_;
    std::shared_ptr<FaultCounters> counters_;
    std::weak_ptr<MemoryTransport> peer_;
    bool open_ = true;
    bool notified_ = false;
    MessageHandler on_message_;
    CloseHandler on_close_;
};

}  // namespace

std::pair<std::shared_ptr<Transport>, std::shared_ptr<Transport>> make_memory_pair(
    std::shared_ptr<EventLoop> loop, FaultPlan plan, std::shared_ptr<RandomSource> rng,
    std::shared_ptr<FaultCounters> counters)
{
    return make_memory_pair(std::move(loop), std::make_shared<const FaultPlan>(plan), std::move(rng),
                            std::move(counters));
}

std::pair<std::shared_ptr<Transport>, std::shared_ptr<Transport>> make_memory_pair(
    std::shared_ptr<EventLoop> loop, std::shared_ptr<const FaultPlan> plan, std::shared_ptr<RandomSource> rng,
    std::shared_ptr<FaultCounters> counters)
{
    if (!rng) rng = std::make_shared<SeededRandom>(0);
    auto a = std::make_shared<MemoryTransport>(loop, plan, rng, counters);
    auto b = std::make_shared<MemoryTransport>(loop, plan, rng, counters);
    a->connect(b);
    b->connect(a);
    return {a, b};
}

}  // namespace ilp::btp
