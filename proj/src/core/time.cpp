#include "ilpsim/core/time.hpp"

#include <cstdio>

namespace ilp {

namespace {
struct Fields {
    int year, month, day, hour, minute, second, milli;
};

Fields split(Timestamp t)
{
    using namespace std::chrono;
    auto day_point = floor<days>(t);
    year_month_day ymd{day_point};
    auto ms = (t - day_point).count();
    return {static_cast<int>(ymd.year()),
            static_cast<int>(static_cast<unsigned>(ymd.month())),
            static_cast<int>(static_cast<unsigned>(ymd.day())),
            static_cast<int>(ms / 3'600'000),
            static_cast<int>(ms / 60'000 % 60),
            static_cast<int>(ms / 1000 % 60),
            static_cast<int>(ms % 1000)};
}

std::optional<Timestamp> join(const Fields& f)
{
    using namespace std::chrono;
    year_month_day ymd{year{f.year}, month{static_cast<unsigned>(f.month)},
                       day{static_cast<unsigned>(f.day)}};
    if (!ymd.ok() || f.hour > 23 || f.minute > 59 || f.second > 59) return std::nullopt;
    return Timestamp{sys_days{ymd}} + hours{f.hour} + minutes{f.minute} + seconds{f.second} +
           milliseconds{f.milli};
}

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out)
{
    out = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        out = out * 10 + (s[i] - '0');
    }
    return true;
}
}  // namespace

std::string format_expiry_digits(Timestamp t)
{
    auto f = split(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d%02d%02d%02d%02d%02d%03d", f.year, f.month, f.day, f.hour,
                  f.minute, f.second, f.milli);
    return buf;
}

std::optional<Timestamp> parse_expiry_digits(std::string_view s)
{
    if (s.size() != 17) return std::nullopt;
    Fields f{};
    if (!read_digits(s, 0, 4, f.year) || !read_digits(s, 4, 2, f.month) ||
        !read_digits(s, 6, 2, f.day) || !read_digits(s, 8, 2, f.hour) ||
        !read_digits(s, 10, 2, f.minute) || !read_digits(s, 12, 2, f.second) ||
        !read_digits(s, 14, 3, f.milli))
        return std::nullopt;
    return join(f);
}

std::string format_iso8601(Timestamp t)
{
    auto f = split(t);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", f.year, f.month, f.day,
                  f.hour, f.minute, f.second, f.milli);
    return buf;
}

std::optional<Timestamp> parse_iso8601(std::string_view s)
{
    // YYYY-MM-DDTHH:MM:SS[.mmm]Z
    if (s.size() != 20 && s.size() != 24) return std::nullopt;
    if (s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
        s.back() != 'Z')
        return std::nullopt;
    Fields f{};
    if (!read_digits(s, 0, 4, f.year) || !read_digits(s, 5, 2, f.month) ||
        !read_digits(s, 8, 2, f.day) || !read_digits(s, 11, 2, f.hour) ||
        !read_digits(s, 14, 2, f.minute) || !read_digits(s, 17, 2, f.second))
        return std::nullopt;
    if (s.size() == 24 && (s[19] != '.' || !read_digits(s, 20, 3, f.milli))) return std::nullopt;
    return join(f);
}

}  // namespace ilp
