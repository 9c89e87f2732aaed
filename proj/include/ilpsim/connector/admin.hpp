#pragma once

// Admin HTTP API of a running connector or node (JSON):
//
//   GET  /accounts   configured accounts and their live links
//   GET  /balances   bilateral balance and channel summary per live account
//   GET  /routes     own address, default route, prefix table
//   GET  /channels   channels with their ledger state
//   GET  /info       extra status supplied by the owner
//   POST /cleanup    redeem claims and close channels
//
// Handlers hop onto the connector's loop before touching its state.

#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "json.hpp"

#include "ilpsim/connector/connector.hpp"

namespace httplib {
class Server;
}

namespace ilp::connector {

class AdminServer {
public:
    using InfoFn = std::function<nlohmann::json()>;

    AdminServer(std::shared_ptr<Connector> connector, std::shared_ptr<EventLoop> loop, std::string bind_address,
                std::uint16_t port, InfoFn info = {}, InfoFn cleanup = {});
    ~AdminServer();
    AdminServer(const AdminServer&) = delete;
    AdminServer& operator=(const AdminServer&) = delete;

    /// Throws std::runtime_error when binding fails. Returns the bound port.
    std::uint16_t start();
    void stop();

private:
    std::shared_ptr<Connector> connector_;
    std::shared_ptr<EventLoop> loop_;
    std::string bind_;
    std::uint16_t port_;
    InfoFn info_;
    InfoFn cleanup_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

/// GET helper for the admin API; returns nullopt when unreachable.
std::optional<nlohmann::json> admin_get(const std::string& host, std::uint16_t port, const std::string& path);
std::optional<nlohmann::json> admin_post(const std::string& host, std::uint16_t port, const std::string& path);

}  // namespace ilp::connector
