#include "ilpsim/connector/admin.hpp"

#include <httplib.h>

namespace ilp::connector {

using nlohmann::json;

AdminServer::AdminServer(std::shared_ptr<Connector> connector, std::shared_ptr<EventLoop> loop,
                         std::string bind_address, std::uint16_t port, InfoFn info, InfoFn cleanup)
    : connector_(std::move(connector)),
      loop_(std::move(loop)),
      bind_(std::move(bind_address)),
      port_(port),
      info_(std::move(info)),
      cleanup_(std::move(cleanup))
{
}

AdminServer::~AdminServer() { stop(); }

std::uint16_t AdminServer::start()
{
    server_ = std::make_unique<httplib::Server>();
    auto& srv = *server_;
    auto on_loop = [this](auto fn) {
        return [this, fn](const httplib::Request&, httplib::Response& res) {
            try {
                json out = loop_->invoke(fn);
                res.set_content(out.dump(2), "application/json");
            } catch (const std::exception& e) {
                res.status = 500;
                res.set_content(json{{"error", "Internal"}, {"message", e.what()}}.dump(), "application/json");
            }
        };
    };
    auto c = connector_;
    srv.Get("/accounts", on_loop([c] { return c->accounts_json(); }));
    srv.Get("/balances", on_loop([c] { return c->balances_json(); }));
    srv.Get("/routes", on_loop([c] { return c->routes_json(); }));
    srv.Get("/channels", on_loop([c] { return c->channels_json(); }));
    auto info = info_;
    srv.Get("/info", on_loop([c, info] {
                json j = info ? info() : json::object();
                j["name"] = c->config().name;
                j["address"] = c->address() ? json(c->address()->str()) : json(nullptr);
                return j;
            }));
    auto cleanup = cleanup_;
    srv.Post("/cleanup", on_loop([c, cleanup] { return cleanup ? cleanup() : c->cleanup(); }));

    int bound = port_ == 0 ? srv.bind_to_any_port(bind_) : (srv.bind_to_port(bind_, port_) ? port_ : -1);
    if (bound < 0) throw std::runtime_error("admin: cannot bind " + bind_ + ":" + std::to_string(port_));
    port_ = static_cast<std::uint16_t>(bound);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    return port_;
}

void AdminServer::stop()
{
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

namespace {
std::optional<json> parse_result(const httplib::Result& res)
{
    if (!res || res->status >= 500) return std::nullopt;
    try {
        return json::parse(res->body);
    } catch (const json::exception&) {
        return std::nullopt;
    }
}
}  // namespace

std::optional<json> admin_get(const std::string& host, std::uint16_t port, const std::string& path)
{
    httplib::Client cli(host, port);
    cli.set_connection_timeout(2);
    return parse_result(cli.Get(path));
}

std::optional<json> admin_post(const std::string& host, std::uint16_t port, const std::string& path)
{
    httplib::Client cli(host, port);
    cli.set_connection_timeout(2);
    return parse_result(cli.Post(path, "", "application/json"));
}

}  // namespace ilp::connector
