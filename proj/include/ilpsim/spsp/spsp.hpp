#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "json.hpp"

#include "ilpsim/stream/stream.hpp"

namespace httplib {
class Server;
}

namespace ilp::spsp {

struct MalformedPointer : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Which scheme a payment pointer resolves to. Simulation allows plain http.
enum class Profile { Production, Simulation };

/// "$host[/path]" -> "https://host/path", with "/.well-known/pay" for an
/// empty path. Throws MalformedPointer.
std::string resolve_pointer(std::string_view pointer, Profile profile = Profile::Production);

struct SpspResponse {
    std::string destination_account;
    std::string shared_secret;  // base64, 32 bytes decoded

    nlohmann::json to_json() const;
    /// Throws SpspError(BadResponse).
    static SpspResponse from_json(const nlohmann::json& j);
    stream::Credentials credentials() const;
};

enum class SpspErrc { Unreachable, BadResponse, MalformedPointer, PaymentFailed };
const char* to_string(SpspErrc e);

class SpspError : public std::runtime_error {
public:
    SpspError(SpspErrc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }
    SpspErrc code() const { return code_; }

private:
    SpspErrc code_;
};

struct HttpResult {
    int status = 0;
    std::string body;
};

/// Fetches a URL. Returns nullopt when the host cannot be reached.
class HttpGetter {
public:
    virtual ~HttpGetter() = default;
    virtual std::optional<HttpResult> get(const std::string& url) = 0;
};

/// Real HTTP via cpp-httplib (http:// only).
class NetworkGetter final : public HttpGetter {
public:
    std::optional<HttpResult> get(const std::string& url) override;
};

/// In-process "internet" for simulations: URL prefix -> handler.
class InProcessWeb final : public HttpGetter {
public:
    using Handler = std::function<HttpResult()>;
    /// `url` like "https://example.com/bob"; exact match on scheme-less host+path.
    void mount(const std::string& url, Handler h);
    void unmount(const std::string& url);
    std::optional<HttpResult> get(const std::string& url) override;

private:
    static std::string key(const std::string& url);
    std::mutex mu_;
    std::map<std::string, Handler> routes_;
};

/// GET + validation. Throws SpspError.
SpspResponse query(const std::string& endpoint_url, HttpGetter& http);

/// HTTP endpoint handing out fresh STREAM credentials per GET.
class SpspServer {
public:
    SpspServer(std::shared_ptr<stream::StreamServer> receiver, std::string bind_address, std::uint16_t port,
               std::string path = "/");
    ~SpspServer();
    SpspServer(const SpspServer&) = delete;
    SpspServer& operator=(const SpspServer&) = delete;

    /// Throws std::runtime_error (BindFailure). Returns the bound port.
    std::uint16_t start();
    void stop();

    /// One response as served over HTTP; usable for in-process mounting.
    HttpResult respond();

private:
    std::shared_ptr<stream::StreamServer> receiver_;
    std::string bind_;
    std::uint16_t port_;
    std::string path_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

struct PaymentReport {
    std::string endpoint;
    std::string destination_account;
    stream::SendReport stream;

    nlohmann::json to_json() const;
};

/// Resolves (when given a pointer), queries and streams `amount` over
/// `uplink`. Runs on the uplink's loop; the query itself is synchronous.
void pay(const std::string& pointer_or_url, std::uint64_t amount, std::shared_ptr<EventLoop> loop,
         std::shared_ptr<connector::PluginClient> uplink, HttpGetter& http, stream::SendOptions opts,
         std::shared_ptr<EventLog> log, std::string component,
         std::function<void(std::optional<PaymentReport>, std::optional<SpspError>)> done,
         Profile profile = Profile::Simulation, std::shared_ptr<stream::StreamSender>* sender_out = nullptr);

}  // namespace ilp::spsp
