#include "ilpsim/connector/rates.hpp"

#include <cctype>

namespace ilp::connector {

using boost::multiprecision::cpp_int;

namespace {
cpp_int pow10(unsigned n)
{
    cpp_int r = 1;
    while (n--) r *= 10;
    return r;
}
}  // namespace

Decimal Decimal::parse(std::string_view text)
{
    if (text.empty()) throw std::invalid_argument("empty decimal");
    Decimal d;
    bool seen_point = false;
    bool any_digit = false;
    for (char c : text) {
        if (c == '.') {
            if (seen_point) throw std::invalid_argument("bad decimal \"" + std::string(text) + "\"");
            seen_point = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("bad decimal \"" + std::string(text) + "\"");
        any_digit = true;
        d.digits = d.digits * 10 + (c - '0');
        if (seen_point) ++d.exponent;
    }
    if (!any_digit) throw std::invalid_argument("bad decimal \"" + std::string(text) + "\"");
    return d;
}

std::string Decimal::str() const
{
    auto s = digits.str();
    if (exponent == 0) return s;
    if (s.size() <= exponent) s.insert(0, exponent - s.size() + 1, '0');
    s.insert(s.size() - exponent, 1, '.');
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
}

bool Decimal::operator==(const Decimal& o) const
{
    auto e = std::max(exponent, o.exponent);
    return digits * pow10(e - exponent) == o.digits * pow10(e - o.exponent);
}

void RateBackend::set_spread(Decimal spread)
{
    if (spread.digits >= pow10(spread.exponent)) throw std::invalid_argument("spread must be below 1");
    spread_ = std::move(spread);
}

void RateBackend::set_rate(const std::string& from, const std::string& to, Decimal rate)
{
    table_[{from, to}] = std::move(rate);
}

Decimal RateBackend::rate(const std::string& from, const std::string& to) const
{
    if (kind_ == Kind::OneToOne || from == to) return Decimal::one();
    auto it = table_.find({from, to});
    if (it == table_.end()) throw NoRate("no rate from " + from + " to " + to);
    return it->second;
}

std::uint64_t RateBackend::convert(std::uint64_t amount, const std::string& src_code, int src_scale,
                                   const std::string& dst_code, int dst_scale) const
{
    const auto r = rate(src_code, dst_code);
    cpp_int num = cpp_int(amount) * r.digits * (pow10(spread_.exponent) - spread_.digits);
    cpp_int den = pow10(r.exponent) * pow10(spread_.exponent);
    if (dst_scale >= src_scale)
        num *= pow10(static_cast<unsigned>(dst_scale - src_scale));
    else
        den *= pow10(static_cast<unsigned>(src_scale - dst_scale));
    cpp_int out = num / den;
    if (out > std::numeric_limits<std::uint64_t>::max())
        throw ConversionOverflow("converted amount exceeds 64 bits");
    return out.convert_to<std::uint64_t>();
}

}  // namespace ilp::connector
