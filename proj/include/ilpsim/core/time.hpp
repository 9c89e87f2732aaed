#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace ilp {

using Duration = std::chrono::milliseconds;
/// UTC instant with millisecond precision.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// "YYYYMMDDHHmmssfff", the 17-digit wire form of packet expiry.
std::string format_expiry_digits(Timestamp t);
/// Returns nullopt unless `digits` is exactly 17 ASCII digits forming a valid
/// calendar date and time of day.
std::optional<Timestamp> parse_expiry_digits(std::string_view digits);

/// "2019-06-19T09:43:01.509Z"
std::string format_iso8601(Timestamp t);
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Something that tells the time. Ledgers, connectors and streams read time
/// only through this interface so simulations stay reproducible.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override
    {
        return std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now());
    }
};

/// Manually advanced clock for tests.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start) : now_(start) {}
    Timestamp now() const override { return now_; }
    void advance(Duration d) { now_ += d; }
    void set(Timestamp t) { now_ = t; }

private:
    Timestamp now_;
};

}  // namespace ilp
