#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "ilpsim/core/address.hpp"

namespace ilp::connector {

struct DuplicateRoute : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Longest-prefix routing at segment boundaries.
class RouteTable {
public:
    /// Throws DuplicateRoute when the prefix is already present.
    void insert(const IlpAddress& prefix, std::string next_hop);
    bool remove(const IlpAddress& prefix);
    void set_default(std::optional<std::string> next_hop) { default_ = std::move(next_hop); }

    std::optional<std::string> lookup(const IlpAddress& destination) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }
    const std::optional<std::string>& default_route() const { return default_; }
    bool empty() const { return entries_.empty() && !default_; }

private:
    std::map<std::string, std::string> entries_;  // prefix text -> account id
    std::optional<std::string> default_;
};

}  // namespace ilp::connector
