#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ilpsim/core/bytes.hpp"

namespace ilp::node {

/// Field-by-field decode of a BTP frame or ILP packet. Decoding stops at the
/// first problem (a truncated dump, a bad field) and keeps what it had.
struct InspectorReport {
    std::string layer;  // "hex", "btp", "ilp" or "entry"
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<InspectorReport> nested;
    std::optional<std::string> error;
    std::optional<std::size_t> error_offset;

    /// First value of `name` here or in nested reports, depth first.
    std::optional<std::string> find(std::string_view name) const;
    /// Every value of `name` in this subtree.
    std::vector<std::string> find_all(std::string_view name) const;
    bool complete() const;

    nlohmann::json to_json() const;
    std::string render(int indent = 0) const;
};

/// Accepts plain hex ("06 1f 9d ...") as well as pasted log buffers
/// ("<Buffer 06 1f ... >"). A trailing "..." marks a truncated dump.
/// Never throws.
InspectorReport inspect_hex(std::string_view text);
InspectorReport inspect_bytes(ByteView bytes);

}  // namespace ilp::node
