#include "ilpsim/core/address.hpp"

#include <algorithm>
#include <array>

namespace ilp {

namespace {
bool segment_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '~' || c == '-';
}

std::string validate(std::string_view text)
{
    if (text.empty()) return "empty address";
    if (text.size() > IlpAddress::kMaxLength)
        return "address longer than " + std::to_string(IlpAddress::kMaxLength) + " bytes";
    std::size_t start = 0;
    while (true) {
        auto dot = text.find('.', start);
        auto seg = text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (seg.empty()) return "empty segment at offset " + std::to_string(start);
        for (std::size_t i = 0; i < seg.size(); ++i)
            if (!segment_char(seg[i]))
                return "illegal character at offset " + std::to_string(start + i);
        if (start == 0 && !is_known_scheme(seg)) return "unknown scheme '" + std::string(seg) + "'";
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return {};
}
}  // namespace

bool is_known_scheme(std::string_view scheme) noexcept
{
    static constexpr std::array<std::string_view, 7> kSchemes{"g",    "private", "example", "peer",
                                                              "self", "test",    "local"};
    return std::find(kSchemes.begin(), kSchemes.end(), scheme) != kSchemes.end();
}

IlpAddress IlpAddress::parse(std::string_view text)
{
    if (auto err = validate(text); !err.empty())
        throw MalformedAddress("malformed ILP address \"" + std::string(text) + "\": " + err);
    return IlpAddress(std::string(text));
}

bool IlpAddress::is_valid(std::string_view text) noexcept { return validate(text).empty(); }

bool IlpAddress::is_valid_segment(std::string_view segment) noexcept
{
    return !segment.empty() && std::all_of(segment.begin(), segment.end(), segment_char);
}

std::vector<std::string_view> IlpAddress::segments() const
{
    std::vector<std::string_view> out;
    std::string_view s = text_;
    std::size_t start = 0;
    while (true) {
        auto dot = s.find('.', start);
        if (dot == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, dot - start));
        start = dot + 1;
    }
}

std::size_t IlpAddress::segment_count() const
{
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.end(), '.'));
}

std::string_view IlpAddress::scheme() const
{
    std::string_view s = text_;
    return s.substr(0, s.find('.'));
}

bool IlpAddress::is_prefix_of(const IlpAddress& other) const
{
    const auto& o = other.text_;
    if (o.size() < text_.size() || o.compare(0, text_.size(), text_) != 0) return false;
    return o.size() == text_.size() || o[text_.size()] == '.';
}

IlpAddress IlpAddress::with_suffix(std::string_view segments) const
{
    return parse(text_ + "." + std::string(segments));
}

std::string_view IlpAddress::suffix_of(const IlpAddress& other) const
{
    std::string_view o = other.text_;
    if (o.size() == text_.size()) return {};
    return o.substr(text_.size() + 1);
}

}  // namespace ilp
