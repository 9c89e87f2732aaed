#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace ilp::connector {

/// Non-negative exact decimal, value = digits / 10^exponent.
struct Decimal {
    boost::multiprecision::cpp_int digits = 0;
    unsigned exponent = 0;

    /// Accepts "1", "0.0062", "161.29". Throws std::invalid_argument.
    static Decimal parse(std::string_view text);
    static Decimal one() { return Decimal{1, 0}; }
    std::string str() const;
    bool is_zero() const { return digits == 0; }
    bool operator==(const Decimal& o) const;
};

struct NoRate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConversionOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exchange rates between assets plus the connector spread.
///
/// Rates are regular units of destination asset per regular unit of source
/// asset. The same asset code always converts at 1.
class RateBackend {
public:
    enum class Kind { OneToOne, StaticTable };

    RateBackend() = default;
    RateBackend(Kind kind, Decimal spread) : kind_(kind), spread_(std::move(spread)) {}

    /// Throws std::invalid_argument unless 0 <= spread < 1.
    void set_spread(Decimal spread);
    void set_rate(const std::string& from, const std::string& to, Decimal rate);

    Kind kind() const { return kind_; }
    const Decimal& spread() const { return spread_; }
    const std::map<std::pair<std::string, std::string>, Decimal>& table() const { return table_; }

    /// Throws NoRate.
    Decimal rate(const std::string& from, const std::string& to) const;

    /// floor(amount * 10^-src_scale * rate * (1 - spread) * 10^dst_scale).
    /// Throws NoRate or ConversionOverflow.
    std::uint64_t convert(std::uint64_t amount, const std::string& src_code, int src_scale,
                          const std::string& dst_code, int dst_scale) const;

private:
    Kind kind_ = Kind::OneToOne;
    Decimal spread_;
    std::map<std::pair<std::string, std::string>, Decimal> table_;
};

}  // namespace ilp::connector
