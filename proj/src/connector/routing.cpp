#include "ilpsim/connector/routing.hpp"

namespace ilp::connector {

void RouteTable::insert(const IlpAddress& prefix, std::string next_hop)
{
    if (!entries_.emplace(prefix.str(), std::move(next_hop)).second)
        throw DuplicateRoute("route for " + prefix.str() + " already exists");
}

bool RouteTable::remove(const IlpAddress& prefix) { return entries_.erase(prefix.str()) > 0; }

std::optional<std::string> RouteTable::lookup(const IlpAddress& destination) const
{
    std::string_view probe = destination.str();
    while (true) {
        if (auto it = entries_.find(std::string(probe)); it != entries_.end()) return it->second;
        auto dot = probe.rfind('.');
        if (dot == std::string_view::npos) break;
        probe = probe.substr(0, dot);
    }
    return default_;
}

}  // namespace ilp::connector
