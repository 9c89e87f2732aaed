// ilpsim: run ledgers, connectors and uplink nodes, send payments, inspect
// packet dumps and run scripted scenarios.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ilpsim/connector/admin.hpp"
#include "ilpsim/connector/connector.hpp"
#include "ilpsim/harness/scenario.hpp"
#include "ilpsim/ledger/service.hpp"
#include "ilpsim/node/inspect.hpp"
#include "ilpsim/node/node.hpp"
#include "ilpsim/spsp/spsp.hpp"

#ifndef ILPSIM_SCENARIO_DIR
#define ILPSIM_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ilp;

namespace {

struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw RuntimeError(path + ": " + e.what());
    }
}

void print_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Blocks until SIGINT or SIGTERM.
void wait_for_signal()
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    int sig = 0;
    sigwait(&set, &sig);
}

void block_signals()
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

// Runs `start(done)` on the loop and waits for `done`.
void await_on_loop(const std::shared_ptr<EventLoop>& loop,
                   const std::function<void(std::function<void(std::optional<std::string>)>)>& start,
                   std::chrono::seconds timeout)
{
    auto prom = std::make_shared<std::promise<std::optional<std::string>>>();
    auto fut = prom->get_future();
    loop->post([start, prom] {
        auto fired = std::make_shared<bool>(false);
        start([prom, fired](std::optional<std::string> err) {
            if (*fired) return;
            *fired = true;
            prom->set_value(std::move(err));
        });
    });
    if (fut.wait_for(timeout) != std::future_status::ready) throw RuntimeError("timed out");
    if (auto err = fut.get()) throw RuntimeError(*err);
}

std::shared_ptr<connector::PluginClient> connect_app(const std::shared_ptr<EventLoop>& loop, const std::string& host,
                                                     std::uint16_t port, const std::string& name)
{
    std::shared_ptr<btp::TcpTransport> t;
    try {
        t = btp::TcpTransport::connect(loop, host, port);
    } catch (const std::exception& e) {
        throw RuntimeError("cannot reach node at " + host + ":" + std::to_string(port) + ": " + e.what());
    }
    auto client = loop->invoke([&] { return connector::PluginClient::create(loop, t); });
    await_on_loop(loop, [client, name](auto done) { client->connect(name, "", std::move(done)); },
                  std::chrono::seconds(10));
    return client;
}

fs::path find_scenario(const std::string& name)
{
    if (fs::exists(name)) return name;
    for (const fs::path dir : {fs::path("scenarios"), fs::path(ILPSIM_SCENARIO_DIR)}) {
        auto p = dir / (name + ".json");
        if (fs::exists(p)) return p;
    }
    throw RuntimeError("no scenario named " + name);
}

int cmd_ledger_start(const std::string& cfg_path, std::optional<std::uint16_t> port)
{
    auto boot = ledger::LedgerBootstrap::from_json(read_json(cfg_path));
    auto l = boot.instantiate(std::make_shared<SystemClock>());
    ledger::LedgerServer server(l, "127.0.0.1", port.value_or(boot.port));
    auto bound = server.start();
    std::cout << json{{"ledger", boot.name}, {"port", bound}, {"asset_code", boot.config.asset_code},
                      {"asset_scale", boot.config.asset_scale}}
                     .dump()
              << std::endl;
    wait_for_signal();
    server.stop();
    return 0;
}

int cmd_connector_start(const std::string& cfg_path)
{
    auto cfg = connector::ConnectorConfig::from_json(read_json(cfg_path));
    print_warnings(cfg.warnings);
    auto admin_port = cfg.admin_port;
    auto bind = cfg.bind_address;
    auto loop = EventLoop::realtime();
    loop->start_thread();
    auto conn = loop->invoke([&] {
        return connector::Connector::create(cfg, loop, std::make_shared<EventLog>(),
                                            std::make_shared<connector::LedgerDirectory>());
    });
    await_on_loop(loop, [conn](auto done) { conn->start_network(std::move(done)); }, std::chrono::seconds(60));
    std::unique_ptr<connector::AdminServer> admin;
    json ready = {{"connector", cfg.name}};
    for (const auto& a : cfg.accounts)
        if (auto p = loop->invoke([&] { return conn->listen_port(a.id); })) ready["ports"][a.id] = *p;
    if (admin_port) {
        admin = std::make_unique<connector::AdminServer>(conn, loop, bind, *admin_port);
        ready["admin_port"] = admin->start();
    }
    std::cout << ready.dump() << std::endl;
    wait_for_signal();
    if (admin) admin->stop();
    loop->invoke([&] { conn->stop(); });
    loop->stop();
    return 0;
}

int cmd_node_start(const std::string& cfg_path, const std::optional<std::string>& uplink,
                   std::optional<std::uint16_t> admin_port, std::optional<std::uint16_t> local_port)
{
    auto cfg = node::UplinkConfig::from_json(read_json(cfg_path), uplink);
    if (admin_port) cfg.admin_port = admin_port;
    if (local_port) cfg.local_port = *local_port;
    print_warnings(cfg.warnings);
    auto loop = EventLoop::realtime();
    loop->start_thread();
    auto node = loop->invoke([&] {
        return std::make_shared<node::UplinkNode>(cfg, loop, std::make_shared<EventLog>(),
                                                  std::make_shared<connector::LedgerDirectory>());
    });
    await_on_loop(loop, [node](auto done) { node->start_network(std::move(done)); }, std::chrono::seconds(60));
    std::unique_ptr<connector::AdminServer> admin;
    json ready = loop->invoke([&] { return node->info(); });
    ready["local_port"] = loop->invoke([&] { return node->local_port(); }).value_or(0);
    if (cfg.admin_port) {
        admin = std::make_unique<connector::AdminServer>(
            node->connector(), loop, "127.0.0.1", *cfg.admin_port, [node] { return node->info(); },
            [node] { return node->cleanup(); });
        ready["admin_port"] = admin->start();
    }
    std::cout << ready.dump() << std::endl;
    wait_for_signal();
    if (admin) admin->stop();
    loop->invoke([&] { node->connector()->stop(); });
    loop->stop();
    return 0;
}

int cmd_admin(const std::string& host, std::uint16_t port, const std::string& path, bool post)
{
    auto r = post ? connector::admin_post(host, port, path) : connector::admin_get(host, port, path);
    if (!r) throw RuntimeError("no admin API at " + host + ":" + std::to_string(port));
    std::cout << r->dump(2) << std::endl;
    return 0;
}

int cmd_spsp_serve(const std::string& host, std::uint16_t node_port, std::uint16_t port, const std::string& name)
{
    auto loop = EventLoop::realtime();
    loop->start_thread();
    auto uplink = connect_app(loop, host, node_port, name);
    auto receiver = loop->invoke([&] {
        return stream::StreamServer::create(uplink, std::make_shared<SystemRandom>(), std::make_shared<EventLog>(),
                                            loop, "stream:" + name);
    });
    spsp::SpspServer server(receiver, "127.0.0.1", port);
    auto bound = server.start();
    std::cout << json{{"endpoint", "http://127.0.0.1:" + std::to_string(bound) + "/"},
                      {"address", loop->invoke([&] { return uplink->info().address.str(); })}}
                     .dump()
              << std::endl;
    wait_for_signal();
    server.stop();
    std::cout << json{{"received", receiver->total_received()}}.dump() << std::endl;
    loop->stop();
    return 0;
}

int cmd_spsp_send(const std::string& host, std::uint16_t node_port, const std::string& receiver,
                  std::uint64_t amount, std::uint64_t max_packet, bool production)
{
    auto loop = EventLoop::realtime();
    loop->start_thread();
    auto uplink = connect_app(loop, host, node_port, "sender");
    spsp::NetworkGetter http;
    stream::SendOptions opts;
    opts.max_packet_amount = max_packet;
    auto prom = std::make_shared<std::promise<json>>();
    auto fut = prom->get_future();
    loop->post([&] {
        spsp::pay(receiver, amount, loop, uplink, http, opts, std::make_shared<EventLog>(), "stream:sender",
                  [prom](std::optional<spsp::PaymentReport> rep, std::optional<spsp::SpspError> err) {
                      if (err) prom->set_value(json{{"ok", false}, {"error", err->what()}});
                      else prom->set_value(rep->to_json());
                  },
                  production ? spsp::Profile::Production : spsp::Profile::Simulation);
    });
    if (fut.wait_for(std::chrono::minutes(5)) != std::future_status::ready) throw RuntimeError("payment timed out");
    auto rep = fut.get();
    std::cout << rep.dump(2) << std::endl;
    loop->invoke([&] { uplink->close(); });
    loop->stop();
    return rep.value("ok", false) ? 0 : 1;
}

int cmd_inspect(const std::string& file, bool as_json)
{
    std::string text;
    if (file == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        text = ss.str();
    } else {
        std::ifstream in(file);
        if (!in) throw RuntimeError("cannot read " + file);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    auto r = node::inspect_hex(text);
    if (as_json) std::cout << r.to_json().dump(2) << std::endl;
    else std::cout << r.render();
    // A truncated dump is an expected outcome; only unreadable hex fails.
    return r.layer == "hex" ? 1 : 0;
}

int cmd_scenario_run(const std::string& name, std::uint64_t seed, const std::optional<std::string>& faults,
                     bool events, const std::optional<std::string>& out)
{
    auto spec = harness::ScenarioSpec::load(find_scenario(name));
    harness::RunOptions opts;
    opts.seed = seed;
    if (faults) opts.faults = harness::fault_plan_from_json(read_json(*faults));
    auto report = harness::run_scenario(spec, opts);
    auto j = report.to_json(events);
    if (out) {
        std::ofstream f(*out);
        if (!f) throw RuntimeError("cannot write " + *out);
        f << j.dump(2) << "\n";
        json brief = {{"scenario", report.scenario}, {"ok", report.ok()}, {"report", *out}};
        std::cout << brief.dump() << std::endl;
    } else {
        std::cout << j.dump(2) << std::endl;
    }
    return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Interledger simulator: ledgers, connectors, uplink nodes, STREAM/SPSP payments"};
    app.require_subcommand(1);
    bool debug = false;
    app.add_flag("--debug", debug, "Verbose component logs on stderr");

    std::function<int()> action;

    auto* ledger = app.add_subcommand("ledger", "Simulated ledger")->require_subcommand(1);
    {
        auto* start = ledger->add_subcommand("start", "Serve a ledger over HTTP");
        static std::string cfg;
        static std::optional<std::uint16_t> port;
        start->add_option("config", cfg, "Ledger bootstrap JSON")->required()->check(CLI::ExistingFile);
        start->add_option("--port", port, "Listen port (overrides the file)");
        start->callback([&] { action = [] { return cmd_ledger_start(cfg, port); }; });
    }

    auto* conn = app.add_subcommand("connector", "ILP connector")->require_subcommand(1);
    {
        auto* start = conn->add_subcommand("start", "Run a connector");
        static std::string cfg;
        start->add_option("config", cfg, "Connector JSON")->required()->check(CLI::ExistingFile);
        start->callback([&] { action = [] { return cmd_connector_start(cfg); }; });
    }

    auto* node = app.add_subcommand("node", "Uplink node (home router)")->require_subcommand(1);
    {
        static std::string cfg, host = "127.0.0.1";
        static std::optional<std::string> uplink;
        static std::optional<std::uint16_t> admin_port, local_port;
        static std::uint16_t query_port = 7769;
        auto* start = node->add_subcommand("start", "Connect to the parent and serve local apps");
        start->add_option("config", cfg, "moneyd-style JSON")->required()->check(CLI::ExistingFile);
        start->add_option("--uplink", uplink, "Uplink to use when the file has several");
        start->add_option("--admin-api-port", admin_port, "Admin HTTP port");
        start->add_option("--local-port", local_port, "Port for local apps (default 7768)");
        start->callback([&] { action = [] { return cmd_node_start(cfg, uplink, admin_port, local_port); }; });

        auto* info = node->add_subcommand("info", "Ledger balance and channels of a running node");
        info->add_option("--admin-api-port", query_port, "Admin HTTP port of the node")->capture_default_str();
        info->add_option("--host", host)->capture_default_str();
        info->callback([&] { action = [] { return cmd_admin(host, query_port, "/info", false); }; });

        auto* cleanup = node->add_subcommand("cleanup", "Redeem claims and close the node's channels");
        cleanup->add_option("--admin-api-port", query_port, "Admin HTTP port of the node")->capture_default_str();
        cleanup->add_option("--host", host)->capture_default_str();
        cleanup->callback([&] { action = [] { return cmd_admin(host, query_port, "/cleanup", true); }; });
    }

    auto* sp = app.add_subcommand("spsp", "SPSP receiver and sender")->require_subcommand(1);
    {
        static std::string host = "127.0.0.1", receiver, name = "receiver";
        static std::uint16_t node_port = node::kDefaultLocalPort, port = 0;
        static std::uint64_t amount = 0, max_packet = 1'000'000;
        static bool production = false;
        auto* serve = sp->add_subcommand("serve", "Serve SPSP credentials for a STREAM receiver");
        serve->add_option("--port", port, "HTTP port")->required();
        serve->add_option("--node-port", node_port, "Local port of the uplink node")->capture_default_str();
        serve->add_option("--host", host)->capture_default_str();
        serve->add_option("--name", name, "Auth name towards the node")->capture_default_str();
        serve->callback([&] { action = [] { return cmd_spsp_serve(host, node_port, port, name); }; });

        auto* send = sp->add_subcommand("send", "Pay a payment pointer or SPSP URL");
        send->add_option("--receiver", receiver, "Payment pointer or URL")->required();
        send->add_option("--amount", amount, "Source amount")->required();
        send->add_option("--node-port", node_port, "Local port of the uplink node")->capture_default_str();
        send->add_option("--host", host)->capture_default_str();
        send->add_option("--max-packet", max_packet, "Largest packet")->capture_default_str();
        send->add_flag("--production", production, "Resolve pointers to https and refuse plain http");
        send->callback(
            [&] { action = [] { return cmd_spsp_send(host, node_port, receiver, amount, max_packet, production); }; });
    }

    {
        static std::string file;
        static bool as_json = false;
        auto* inspect = app.add_subcommand("inspect", "Decode a BTP/ILP hex dump ('-' reads stdin)");
        inspect->add_option("hexfile", file)->required();
        inspect->add_flag("--json", as_json);
        inspect->callback([&] { action = [] { return cmd_inspect(file, as_json); }; });
    }

    auto* sc = app.add_subcommand("scenario", "Scripted topologies")->require_subcommand(1);
    {
        static std::string name;
        static std::uint64_t seed = 1;
        static std::optional<std::string> faults, out;
        static bool events = false;
        auto* run = sc->add_subcommand("run", "Run a scenario and print its report");
        run->add_option("name", name, "Scenario name or JSON file")->required();
        run->add_option("--seed", seed)->capture_default_str();
        run->add_option("--faults", faults, "Fault plan JSON for inter-node links");
        run->add_flag("--events", events, "Include the full event log");
        run->add_option("--out", out, "Write the report to a file");
        run->callback([&] { action = [] { return cmd_scenario_run(name, seed, faults, events, out); }; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    logging::set_level(debug ? spdlog::level::debug : spdlog::level::warn);
    block_signals();
    try {
        return action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
