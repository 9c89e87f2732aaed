#include "ilpsim/core/event_log.hpp"

#include <atomic>

#include <spdlog/sinks/stdout_sinks.h>

namespace ilp {

void EventLog::record(Event e)
{
    std::lock_guard lock(mu_);
    events_.push_back(std::move(e));
}

std::vector<Event> EventLog::snapshot() const
{
    std::lock_guard lock(mu_);
    return events_;
}

std::size_t EventLog::size() const
{
    std::lock_guard lock(mu_);
    return events_.size();
}

void EventLog::clear()
{
    std::lock_guard lock(mu_);
    events_.clear();
}

namespace logging {

namespace {
std::atomic<spdlog::level::level_enum> g_level{spdlog::level::warn};
std::mutex g_mu;
}  // namespace

std::shared_ptr<spdlog::logger> get(const std::string& component)
{
    std::lock_guard lock(g_mu);
    if (auto existing = spdlog::get(component)) return existing;
    static auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto logger = std::make_shared<spdlog::logger>(component, sink);
    logger->set_pattern("%Y-%m-%dT%H:%M:%S.%eZ %l %n %v", spdlog::pattern_time_type::utc);
    logger->set_level(g_level.load());
    spdlog::register_logger(logger);
    return logger;
}

void set_level(spdlog::level::level_enum level)
{
    g_level = level;
    spdlog::set_level(level);
}

}  // namespace logging

}  // namespace ilp
