#include "ilpsim/spsp/spsp.hpp"

#include <httplib.h>

namespace ilp::spsp {

using nlohmann::json;

std::string resolve_pointer(std::string_view pointer, Profile profile)
{
    if (!pointer.starts_with('$')) throw MalformedPointer("payment pointer must start with '$'");
    auto rest = pointer.substr(1);
    auto slash = rest.find('/');
    auto host = rest.substr(0, slash);
    auto path = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
    if (host.empty()) throw MalformedPointer("payment pointer has no host");
    for (char c : host)
        if (std::isspace(static_cast<unsigned char>(c)) || c == '$' || c == '?' || c == '#')
            throw MalformedPointer("invalid character in payment pointer host");
    if (path == "/") path = {};
    const char* scheme = profile == Profile::Production ? "https://" : "http://";
    return std::string(scheme) + std::string(host) + (path.empty() ? "/.well-known/pay" : std::string(path));
}

const char* to_string(SpspErrc e)
{
    switch (e) {
    case SpspErrc::Unreachable: return "Unreachable";
    case SpspErrc::BadResponse: return "BadResponse";
    case SpspErrc::MalformedPointer: return "MalformedPointer";
    case SpspErrc::PaymentFailed: return "PaymentFailed";
    }
    return "?";
}

json SpspResponse::to_json() const
{
    return {{"destination_account", destination_account}, {"shared_secret", shared_secret}};
}

SpspResponse SpspResponse::from_json(const json& j)
{
    if (!j.is_object() || !j.contains("destination_account") || !j["destination_account"].is_string())
        throw SpspError(SpspErrc::BadResponse, "missing destination_account");
    if (!j.contains("shared_secret") || !j["shared_secret"].is_string())
        throw SpspError(SpspErrc::BadResponse, "missing shared_secret");
    SpspResponse r{j["destination_account"].get<std::string>(), j["shared_secret"].get<std::string>()};
    if (!IlpAddress::is_valid(r.destination_account))
        throw SpspError(SpspErrc::BadResponse, "destination_account is not an ILP address");
    Bytes secret;
    try {
        secret = base64_decode(r.shared_secret);
    } catch (const std::exception&) {
        throw SpspError(SpspErrc::BadResponse, "shared_secret is not base64");
    }
    if (secret.size() != 32)
        throw SpspError(SpspErrc::BadResponse, "shared_secret decodes to " + std::to_string(secret.size()) + " bytes");
    return r;
}

stream::Credentials SpspResponse::credentials() const
{
    stream::Credentials c{IlpAddress::parse(destination_account), {}};
    auto s = base64_decode(shared_secret);
    std::copy(s.begin(), s.end(), c.shared_secret.begin());
    return c;
}

namespace {
struct Url {
    std::string scheme, host, path;
    int port = 0;
};

std::optional<Url> split_url(const std::string& url)
{
    Url u;
    auto sep = url.find("://");
    if (sep == std::string::npos) return std::nullopt;
    u.scheme = url.substr(0, sep);
    auto rest = url.substr(sep + 3);
    auto slash = rest.find('/');
    auto authority = rest.substr(0, slash);
    u.path = slash == std::string::npos ? "/" : rest.substr(slash);
    auto colon = authority.rfind(':');
    u.host = authority.substr(0, colon);
    u.port = u.scheme == "https" ? 443 : 80;
    if (colon != std::string::npos) {
        try {
            u.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    if (u.host.empty()) return std::nullopt;
    return u;
}
}  // namespace

std::optional<HttpResult> NetworkGetter::get(const std::string& url)
{
    auto u = split_url(url);
    if (!u || u->scheme != "http") return std::nullopt;
    httplib::Client cli(u->host, u->port);
    cli.set_connection_timeout(3);
    cli.set_read_timeout(5);
    auto res = cli.Get(u->path, {{"Accept", "application/spsp4+json, application/json"}});
    if (!res) return std::nullopt;
    return HttpResult{res->status, res->body};
}

std::string InProcessWeb::key(const std::string& url)
{
    auto sep = url.find("://");
    return sep == std::string::npos ? url : url.substr(sep + 3);
}

void InProcessWeb::mount(const std::string& url, Handler h)
{
    std::lock_guard lk(mu_);
    routes_[key(url)] = std::move(h);
}

void InProcessWeb::unmount(const std::string& url)
{
    std::lock_guard lk(mu_);
    routes_.erase(key(url));
}

std::optional<HttpResult> InProcessWeb::get(const std::string& url)
{
    Handler h;
    {
        std::lock_guard lk(mu_);
        auto k = key(url);
        auto it = routes_.find(k);
        if (it == routes_.end()) {
            // Host known but path unknown answers 404, like a real server.
            auto host = k.substr(0, k.find('/'));
            for (const auto& [r, _] : routes_)
                if (r.substr(0, r.find('/')) == host) return HttpResult{404, "{}"};
            return std::nullopt;
        }
        h = it->second;
    }
    return h();
}

SpspResponse query(const std::string& endpoint_url, HttpGetter& http)
{
    auto res = http.get(endpoint_url);
    if (!res) throw SpspError(SpspErrc::Unreachable, endpoint_url + " did not answer");
    if (res->status != 200)
        throw SpspError(SpspErrc::Unreachable, endpoint_url + " answered HTTP " + std::to_string(res->status));
    json j;
    try {
        j = json::parse(res->body);
    } catch (const json::exception& e) {
        throw SpspError(SpspErrc::BadResponse, std::string("body is not JSON: ") + e.what());
    }
    return SpspResponse::from_json(j);
}

SpspServer::SpspServer(std::shared_ptr<stream::StreamServer> receiver, std::string bind_address,
                       std::uint16_t port, std::string path)
    : receiver_(std::move(receiver)), bind_(std::move(bind_address)), port_(port), path_(std::move(path))
{
    if (!receiver_) throw std::logic_error("spsp server needs a connected receiver");
}

SpspServer::~SpspServer() { stop(); }

HttpResult SpspServer::respond()
{
    auto c = receiver_->generate_credentials();
    SpspResponse r{c.destination.str(), base64_encode(c.shared_secret)};
    return {200, r.to_json().dump()};
}

std::uint16_t SpspServer::start()
{
    server_ = std::make_unique<httplib::Server>();
    server_->Get(path_, [this](const httplib::Request&, httplib::Response& res) {
        try {
            auto r = respond();
            res.status = r.status;
            res.set_content(r.body, "application/spsp4+json");
        } catch (const std::exception& e) {
            res.status = 503;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
    });
    int bound = port_ == 0 ? server_->bind_to_any_port(bind_) : (server_->bind_to_port(bind_, port_) ? port_ : -1);
    if (bound < 0) throw std::runtime_error("BindFailure: cannot bind " + bind_ + ":" + std::to_string(port_));
    port_ = static_cast<std::uint16_t>(bound);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    return port_;
}

void SpspServer::stop()
{
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

json PaymentReport::to_json() const
{
    json j = {{"endpoint", endpoint},
              {"destination_account", destination_account},
              {"source_amount", stream.source_amount},
              {"source_sent", stream.source_sent},
              {"delivered", stream.delivered},
              {"packets_fulfilled", stream.packets_fulfilled},
              {"packets_rejected", stream.packets_rejected},
              {"ok", stream.ok()}};
    if (stream.probe_delivered) j["probe_delivered_per_unit"] = *stream.probe_delivered;
    if (stream.error) {
        j["error"] = stream::to_string(*stream.error);
        j["error_detail"] = stream.error_detail;
    }
    return j;
}

void pay(const std::string& pointer_or_url, std::uint64_t amount, std::shared_ptr<EventLoop> loop,
         std::shared_ptr<connector::PluginClient> uplink, HttpGetter& http, stream::SendOptions opts,
         std::shared_ptr<EventLog> log, std::string component,
         std::function<void(std::optional<PaymentReport>, std::optional<SpspError>)> done, Profile profile,
         std::shared_ptr<stream::StreamSender>* sender_out)
{
    PaymentReport report;
    SpspResponse resp;
    try {
        if (pointer_or_url.starts_with('$')) {
            try {
                report.endpoint = resolve_pointer(pointer_or_url, profile);
            } catch (const MalformedPointer& e) {
                throw SpspError(SpspErrc::MalformedPointer, e.what());
            }
        } else {
            report.endpoint = pointer_or_url;
        }
        if (profile == Profile::Production && report.endpoint.starts_with("http://"))
            throw SpspError(SpspErrc::Unreachable, "plain http endpoints are refused in the production profile");
        if (!uplink || !uplink->connected()) throw SpspError(SpspErrc::Unreachable, "uplink is not connected");
        resp = query(report.endpoint, http);
    } catch (const SpspError& e) {
        loop->post([done, e] { done(std::nullopt, e); });
        return;
    }
    report.destination_account = resp.destination_account;
    auto sender = stream::StreamSender::create(loop, uplink, resp.credentials(), std::move(opts), std::move(log),
                                               std::move(component));
    if (sender_out) *sender_out = sender;
    sender->send_money(amount, [done, report](const stream::SendReport& s) mutable {
        report.stream = s;
        done(report, std::nullopt);
    });
}

}  // namespace ilp::spsp
