#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ilp {

struct MalformedAddress : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Hierarchical, dot-separated ILP address such as "g.conn1.ilsp_clients.mduni".
///
/// Segments are non-empty and drawn from [A-Za-z0-9_~-]; the rendered form is
/// at most 1023 bytes. The first segment is the allocation scheme.
class IlpAddress {
public:
    static constexpr std::size_t kMaxLength = 1023;

    /// Throws MalformedAddress.
    static IlpAddress parse(std::string_view text);
    static bool is_valid(std::string_view text) noexcept;
    static bool is_valid_segment(std::string_view segment) noexcept;

    const std::string& str() const { return text_; }
    std::vector<std::string_view> segments() const;
    std::size_t segment_count() const;
    std::string_view scheme() const;

    /// True iff this address's segments are a leading run of `other`'s.
    /// Reflexive: a.is_prefix_of(a).
    bool is_prefix_of(const IlpAddress& other) const;

    /// Appends one or more segments ("a" or "a.b"); throws MalformedAddress.
    IlpAddress with_suffix(std::string_view segments) const;

    /// Segments of `other` after this prefix, joined with dots. Empty when equal.
    /// Precondition: is_prefix_of(other).
    std::string_view suffix_of(const IlpAddress& other) const;

    auto operator<=>(const IlpAddress&) const = default;

private:
    explicit IlpAddress(std::string text) : text_(std::move(text)) {}
    std::string text_;
};

/// Scheme names accepted as a first segment.
bool is_known_scheme(std::string_view scheme) noexcept;

}  // namespace ilp
