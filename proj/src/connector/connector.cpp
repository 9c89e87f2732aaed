#include "ilpsim/connector/connector.hpp"

#include <algorithm>

#include "ilpsim/ledger/service.hpp"

namespace ilp::connector {

using btp::ProtocolEntry;
using nlohmann::json;

namespace {
constexpr Duration kControlTimeout{10'000};
constexpr int kDialAttempts = 30;
}  // namespace

void LedgerDirectory::add(const std::string& name, std::shared_ptr<ledger::LedgerApi> ledger)
{
    std::lock_guard lk(mu_);
    ledgers_[name] = std::move(ledger);
}

std::shared_ptr<ledger::LedgerApi> LedgerDirectory::resolve(const std::string& ref)
{
    std::lock_guard lk(mu_);
    if (auto it = ledgers_.find(ref); it != ledgers_.end()) return it->second;
    if (ref.starts_with("http://") || ref.starts_with("ws://")) {
        auto remote = std::make_shared<ledger::RemoteLedger>(ref);
        ledgers_[ref] = remote;
        return remote;
    }
    throw ConfigError("unknown ledger \"" + ref + "\"");
}

std::shared_ptr<Connector> Connector::create(ConnectorConfig cfg, std::shared_ptr<EventLoop> loop,
                                             std::shared_ptr<EventLog> log, std::shared_ptr<LedgerDirectory> ledgers)
{
    return std::shared_ptr<Connector>(new Connector(std::move(cfg), std::move(loop), std::move(log), std::move(ledgers)));
}

Connector::Connector(ConnectorConfig cfg, std::shared_ptr<EventLoop> loop, std::shared_ptr<EventLog> log,
                     std::shared_ptr<LedgerDirectory> ledgers)
    : cfg_(std::move(cfg)),
      component_(cfg_.role + ":" + cfg_.name),
      loop_(std::move(loop)),
      log_(std::move(log)),
      ledgers_(std::move(ledgers)),
      address_(cfg_.ilp_address)
{
    auto lg = logging::get(component_);
    for (const auto& w : cfg_.warnings) lg->warn("{}", w);
    for (const auto& a : cfg_.accounts) {
        if (a.ledger) {
            if (!ledgers_) throw ConfigError("account " + a.id + " names a ledger but no ledger directory is set");
            auto l = ledgers_->resolve(*a.ledger);
            const int ledger_scale = a.ledger_scale.value_or(l->config().asset_scale);
            if (ledger_scale > a.asset_scale)
                throw ConfigError("account " + a.id + ": ledger scale " + std::to_string(ledger_scale) +
                                  " exceeds assetScale " + std::to_string(a.asset_scale));
            account_ledgers_[a.id] = std::move(l);
            scale_shift_[a.id] = static_cast<unsigned>(a.asset_scale - ledger_scale);
        }
        if (a.relation == Relation::Parent) routes_.set_default(a.id);
        if (a.relation != Relation::Child && !a.balance.valid())
            throw ConfigError("account " + a.id + ": balance needs settleThreshold <= settleTo <= maximum");
    }
    for (const auto& r : cfg_.routes) routes_.insert(r.prefix, r.account);
}

Connector::~Connector()
{
    for (auto& [_, l] : listeners_) l->close();
}

IlpAddress Connector::self_address() const
{
    static const IlpAddress unassigned = IlpAddress::parse("self.connector");
    return address_ ? *address_ : unassigned;
}

void Connector::record(const char* kind, const PreparePacket& p, const std::string& peer, std::uint64_t amount,
                       std::string detail)
{
    if (!log_) return;
    log_->record(Event{loop_->now(), component_, kind, to_hex(p.condition.bytes), peer, amount, std::move(detail)});
}

Connector::Live& Connector::make_live(const std::string& id, const AccountConfig& cfg)
{
    if (auto it = live_.find(id); it != live_.end()) return *it->second;
    auto live = std::make_unique<Live>();
    live->id = id;
    live->cfg = &cfg;
    settlement::SettlementConfig s;
    if (auto it = account_ledgers_.find(cfg.id); it != account_ledgers_.end()) {
        s.ledger = it->second;
        s.own_account = cfg.ledger_account;
        s.secret = cfg.ledger_secret;
        if (cfg.relation != Relation::Child) s.peer_account = cfg.peer_ledger_account;
        s.outgoing_channel_amount = cfg.outgoing_channel_amount;
        s.min_incoming_channel_amount = cfg.min_incoming_channel_amount;
        s.settle_delay = cfg.settle_delay;
        s.redeem_eagerly = cfg.redeem_eagerly;
        s.scale_shift = scale_shift_.at(cfg.id);
    }
    std::weak_ptr<Connector> self = weak_from_this();
    live->settlement = std::make_unique<settlement::PeerSettlement>(
        component_, id, cfg.balance, std::move(s),
        [self, id](btp::Entries e) {
            if (auto c = self.lock()) c->send_settlement(id, std::move(e));
        },
        log_, loop_);
    auto& ref = *live;
    live_.emplace(id, std::move(live));
    return ref;
}

void Connector::bind_endpoint(Live& live, std::shared_ptr<btp::BtpEndpoint> ep)
{
    std::weak_ptr<Connector> self = weak_from_this();
    const std::string id = live.id;
    ep->set_message_handler([self, id](btp::Entries entries, btp::Responder responder) {
        if (auto c = self.lock()) c->on_message(id, std::move(entries), std::move(responder));
    });
    std::weak_ptr<btp::BtpEndpoint> weak_ep = ep;
    ep->set_close_handler([self, id, weak_ep] {
        auto c = self.lock();
        if (!c) return;
        logging::get(c->component_)->info("link closed account={}", id);
        auto it = c->live_.find(id);
        if (it != c->live_.end() && it->second->ep == weak_ep.lock()) it->second->ep.reset();
    });
    live.ep = std::move(ep);
    std::erase(pending_, live.ep);
}

void Connector::accept_link(const std::string& account_id, std::shared_ptr<btp::Transport> transport)
{
    const auto* cfg = cfg_.account(account_id);
    if (!cfg) throw ConfigError("no account " + account_id);
    if (stopped_) {
        transport->close();
        return;
    }
    auto ep = btp::BtpEndpoint::create(loop_, std::move(transport), btp::BtpEndpoint::Role::Server);
    btp::AuthTable table;
    table.tokens = cfg->tokens;
    table.any_name_token = cfg->listen_secret;
    table.accept_anything = cfg->tokens.empty() && !cfg->listen_secret;
    pending_.push_back(ep);
    std::weak_ptr<Connector> self = weak_from_this();
    std::weak_ptr<btp::BtpEndpoint> weak_ep = ep;
    ep->expect_auth(std::move(table), [self, cfg, weak_ep](const std::optional<btp::LinkError>& err) {
        auto c = self.lock();
        auto e = weak_ep.lock();
        if (!c || !e) return;
        if (err) {
            logging::get(c->component_)->warn("auth failed account={} error={}", cfg->id, err->message);
            std::erase(c->pending_, e);
            return;
        }
        c->on_authenticated(*cfg, e);
    });
}

void Connector::on_authenticated(const AccountConfig& cfg, std::shared_ptr<btp::BtpEndpoint> ep)
{
    auto lg = logging::get(component_);
    auto refuse = [&](const std::string& why) {
        lg->warn("refusing link account={} name={} reason={}", cfg.id, ep->peer_auth_name(), why);
        std::erase(pending_, ep);
        ep->close();
    };
    std::string id = cfg.id;
    std::optional<IlpAddress> child_address;
    if (cfg.relation == Relation::Child) {
        const auto& name = ep->peer_auth_name();
        if (!IlpAddress::is_valid_segment(name)) return refuse("auth name is not an address segment");
        if (!address_) return refuse("own address not known yet");
        id = cfg.id + "." + name;
        child_address = address_->with_suffix(id);
    }
    if (auto it = live_.find(id); it != live_.end() && it->second->ep && it->second->ep->authenticated())
        return refuse(cfg.relation == Relation::Child ? "DuplicateChild" : "account already connected");
    auto& live = make_live(id, cfg);
    if (child_address && !live.address) {
        live.address = child_address;
        try {
            routes_.insert(*child_address, id);
        } catch (const DuplicateRoute&) {
            return refuse("DuplicateChild");
        }
    }
    bind_endpoint(live, std::move(ep));
    lg->info("link up account={} relation={}{}", id, to_string(cfg.relation),
             live.address ? " address=" + live.address->str() : std::string{});
}

void Connector::dial_link(const std::string& account_id, std::shared_ptr<btp::Transport> transport,
                          const std::string& auth_name, const std::string& token, DoneHandler done)
{
    const auto* cfg = cfg_.account(account_id);
    if (!cfg) throw ConfigError("no account " + account_id);
    if (cfg->relation == Relation::Child) throw ConfigError("child accounts accept links, they do not dial");
    auto ep = btp::BtpEndpoint::create(loop_, std::move(transport), btp::BtpEndpoint::Role::Client);
    pending_.push_back(ep);
    std::weak_ptr<Connector> self = weak_from_this();
    std::weak_ptr<btp::BtpEndpoint> weak_ep = ep;
    ep->authenticate(auth_name, token, kControlTimeout, [self, cfg, weak_ep, done](const std::optional<btp::LinkError>& err) {
        auto c = self.lock();
        auto e = weak_ep.lock();
        if (!c || !e) return;
        if (err) {
            std::erase(c->pending_, e);
            done(std::string("AuthFailed: ") + err->message);
            return;
        }
        auto proceed = [self, cfg, weak_ep, done] {
            auto c = self.lock();
            auto e = weak_ep.lock();
            if (!c || !e) return;
            auto& live = c->make_live(cfg->id, *cfg);
            c->bind_endpoint(live, e);
            logging::get(c->component_)->info("link up account={} relation={}", cfg->id, to_string(cfg->relation));
            c->exchange_channels(cfg->id, done);
        };
        if (cfg->relation != Relation::Parent || c->cfg_.ilp_address) {
            proceed();
            return;
        }
        e->request({ProtocolEntry::octets(btp::proto::kIldcp, {})}, kControlTimeout,
                   [self, weak_ep, done, proceed](btp::Result<btp::Entries> r) {
                       auto c = self.lock();
                       if (!c) return;
                       auto fail = [&](const std::string& why) {
                           if (auto e = weak_ep.lock()) {
                               std::erase(c->pending_, e);
                               e->close();
                           }
                           done("ildcp: " + why);
                       };
                       if (!r) return fail(r.error().message);
                       const auto* entry = btp::find_entry(r.value(), btp::proto::kIldcp);
                       if (!entry) return fail("response without ildcp entry");
                       try {
                           c->adopt_parent(decode_ildcp(entry->data));
                       } catch (const std::exception& ex) {
                           return fail(ex.what());
                       }
                       proceed();
                   });
    });
}

void Connector::adopt_parent(const IldcpInfo& info)
{
    auto lg = logging::get(component_);
    for (auto& a : cfg_.accounts) {
        if (a.relation == Relation::Parent && a.asset_code != info.asset_code)
            lg->warn("parent asset {} differs from configured {}", info.asset_code, a.asset_code);
        if (!cfg_.adopt_parent_asset) continue;
        if (a.asset_code == info.asset_code && a.asset_scale == info.asset_scale) continue;
        lg->warn("account {} takes the parent asset {} scale {} (configured {} scale {})", a.id, info.asset_code,
                 info.asset_scale, a.asset_code, a.asset_scale);
        a.balance = a.balance.rescaled(a.asset_scale, info.asset_scale);
        a.asset_code = info.asset_code;
        a.asset_scale = info.asset_scale;
        if (auto it = account_ledgers_.find(a.id); it != account_ledgers_.end()) {
            const int ledger_scale = a.ledger_scale.value_or(it->second->config().asset_scale);
            if (ledger_scale > a.asset_scale)
                throw ConfigError("account " + a.id + ": ledger scale exceeds the parent's asset scale");
            scale_shift_[a.id] = static_cast<unsigned>(a.asset_scale - ledger_scale);
        }
    }
    address_ = info.address;
    lg->info("address assigned address={}", info.address.str());
}

void Connector::exchange_channels(const std::string& live_id, DoneHandler done)
{
    auto& live = *live_.at(live_id);
    auto* s = live.settlement.get();
    if (!s->enabled() || !live.ep) {
        done(std::nullopt);
        return;
    }
    std::weak_ptr<Connector> self = weak_from_this();
    auto open_own = [self, live_id, done] {
        auto c = self.lock();
        if (!c) return;
        auto& l = *c->live_.at(live_id);
        std::optional<btp::Entries> entries;
        try {
            if (l.settlement->config().peer_account) entries = l.settlement->open_outgoing_channel();
        } catch (const ledger::LedgerError& e) {
            done(std::string("ChannelOpenFailed: ") + e.what());
            return;
        }
        if (!entries || !l.ep) {
            done(std::nullopt);
            return;
        }
        l.ep->request(std::move(*entries), kControlTimeout, [done](btp::Result<btp::Entries> r) {
            if (!r) done("ChannelOpenFailed: peer refused channel: " + r.error().message);
            else done(std::nullopt);
        });
    };
    live.ep->request({ProtocolEntry::text(btp::proto::kFundChannel, s->config().own_account)}, kControlTimeout,
                     [self, live_id, done, open_own](btp::Result<btp::Entries> r) {
                         auto c = self.lock();
                         if (!c) return;
                         auto lg = logging::get(c->component_);
                         auto& l = *c->live_.at(live_id);
                         if (!r) {
                             if (r.error().code == btp::LinkErrc::PeerError) {
                                 lg->warn("peer does not settle account={} reason={}", live_id, r.error().message);
                                 done(std::nullopt);
                             } else {
                                 done("channel exchange: " + r.error().message);
                             }
                             return;
                         }
                         if (const auto* f = btp::find_entry(r.value(), btp::proto::kFundChannel)) {
                             if (!l.settlement->set_peer_account(ilp::to_string(f->data)))
                                 lg->warn("peer ledger account {} differs from configured {}", ilp::to_string(f->data),
                                          l.settlement->config().peer_account.value_or(""));
                         }
                         if (settlement::PeerSettlement::is_channel_open(r.value())) {
                             if (auto why = l.settlement->accept_incoming_channel(r.value()))
                                 lg->warn("refused peer channel account={} reason={}", live_id, *why);
                         }
                         open_own();
                     });
}

void Connector::send_settlement(const std::string& live_id, btp::Entries entries)
{
    auto it = live_.find(live_id);
    if (it == live_.end() || !it->second->ep) {
        logging::get(component_)->warn("settlement message dropped, link down account={}", live_id);
        return;
    }
    std::weak_ptr<Connector> self = weak_from_this();
    it->second->ep->request(std::move(entries), kControlTimeout, [self, live_id](btp::Result<btp::Entries> r) {
        auto c = self.lock();
        if (c && !r) logging::get(c->component_)->warn("settlement message failed account={} error={}", live_id, r.error().message);
    });
}

void Connector::on_message(const std::string& live_id, btp::Entries entries, btp::Responder responder)
{
    auto it = live_.find(live_id);
    if (it == live_.end()) {
        responder.fail("T00", "unknown account");
        return;
    }
    auto& live = *it->second;
    std::weak_ptr<Connector> self = weak_from_this();
    if (dispatch_ilp_message(entries, responder, self_address(), [self, live_id](PreparePacket p, ResponseHandler reply) {
            if (auto c = self.lock()) c->handle_prepare(live_id, std::move(p), std::move(reply));
        }))
        return;
    auto* s = live.settlement.get();
    if (btp::find_entry(entries, btp::proto::kIldcp)) {
        if (live.cfg->relation != Relation::Child || !live.address) {
            responder.fail("NotAChild", "address configuration is only served to child accounts");
            return;
        }
        responder.respond({ProtocolEntry::octets(
            btp::proto::kIldcp, encode_ildcp({*live.address, live.cfg->asset_scale, live.cfg->asset_code}))});
        return;
    }
    if (settlement::PeerSettlement::is_channel_open(entries)) {
        if (auto why = s->accept_incoming_channel(entries)) responder.fail("ChannelRefused", *why);
        else responder.respond({});
        return;
    }
    if (const auto* f = btp::find_entry(entries, btp::proto::kFundChannel)) {
        if (!s->enabled()) {
            responder.fail("NoSettlement", "account " + live.cfg->id + " does not settle");
            return;
        }
        if (!s->set_peer_account(ilp::to_string(f->data))) {
            responder.fail("ChannelRefused", "expected ledger account " + s->config().peer_account.value_or(""));
            return;
        }
        btp::Entries out{ProtocolEntry::text(btp::proto::kFundChannel, s->config().own_account)};
        try {
            if (auto own = s->open_outgoing_channel())
                for (auto& e : *own)
                    if (e.name != btp::proto::kFundChannel) out.push_back(std::move(e));
        } catch (const ledger::LedgerError& e) {
            logging::get(component_)->warn("could not open channel account={} error={}", live_id, e.what());
        }
        responder.respond(std::move(out));
        return;
    }
    if (settlement::PeerSettlement::is_claim(entries)) {
        if (auto why = s->on_claim(entries)) responder.fail("InvalidClaim", *why);
        else responder.respond({});
        return;
    }
    responder.fail("UnsupportedProtocol", "no handler for this message");
}

void Connector::handle_prepare(const std::string& from, PreparePacket p, ResponseHandler done)
{
    const auto self = self_address();
    auto lg = logging::get(component_);
    auto it = live_.find(from);
    if (it == live_.end()) {
        done(local_reject(codes::T00_INTERNAL_ERROR, self, "unknown source account"));
        return;
    }
    auto& src = *it->second;
    record(event::kPrepareIn, p, from, p.amount, p.destination.str());
    bool balance_held = false;
    auto reject = [&](const ErrorCode& code, std::string msg, Bytes data = {}) {
        if (balance_held) src.settlement->rollback_incoming(p.amount);
        record(event::kRejectLocal, p, from, p.amount, std::string(code.str()) + " " + msg);
        lg->debug("reject code={} from={} dest={} reason={}", code.str(), from, p.destination.str(), msg);
        done(local_reject(code, self, std::move(msg), std::move(data)));
    };

    const auto now = loop_->now();
    if (!(now + cfg_.min_message_window < p.expires_at)) return reject(codes::R00_TRANSFER_TIMED_OUT, "expired");
    if (src.cfg->max_packet_amount && p.amount > *src.cfg->max_packet_amount) {
        ByteWriter w;
        w.put_uint_be(p.amount, 8);
        w.put_uint_be(*src.cfg->max_packet_amount, 8);
        return reject(codes::F08_AMOUNT_TOO_LARGE,
                      "amount " + std::to_string(p.amount) + " exceeds maximum " +
                          std::to_string(*src.cfg->max_packet_amount),
                      std::move(w).take());
    }
    if (!src.settlement->on_incoming_prepare(p.amount))
        return reject(codes::T04_INSUFFICIENT_LIQUIDITY, "exceeds maximum balance of " + from);
    balance_held = true;

    if (address_ && p.destination == *address_) return reject(codes::F02_UNREACHABLE, "no local service");
    auto next = routes_.lookup(p.destination);
    if (!next) return reject(codes::F02_UNREACHABLE, "no route to " + p.destination.str());
    if (*next == from) return reject(codes::F02_UNREACHABLE, "route leads back to the source");
    auto dst_it = live_.find(*next);
    if (dst_it == live_.end() || !dst_it->second->ep || !dst_it->second->ep->authenticated())
        return reject(codes::T01_PEER_UNREACHABLE, "next hop " + *next + " is not connected");
    auto& dst = *dst_it->second;

    std::uint64_t out_amount = 0;
    try {
        out_amount = cfg_.rates.convert(p.amount, src.cfg->asset_code, src.cfg->asset_scale, dst.cfg->asset_code,
                                        dst.cfg->asset_scale);
    } catch (const NoRate& e) {
        return reject(codes::F02_UNREACHABLE, std::string("no rate: ") + e.what());
    } catch (const ConversionOverflow& e) {
        return reject(codes::F08_AMOUNT_TOO_LARGE, e.what());
    }
    PreparePacket out = p;
    out.amount = out_amount;
    out.expires_at = p.expires_at - cfg_.expiry_decrement;
    if (out.expires_at <= now) return reject(codes::R00_TRANSFER_TIMED_OUT, "no time left for the next hop");

    record(event::kPrepareOut, out, dst.id, out_amount);
    std::weak_ptr<Connector> weak = weak_from_this();
    send_prepare_over(*dst.ep, loop_, out, self,
                      [weak, from, to = dst.id, in = std::move(p), out_amount, done](IlpResponse resp) {
                          if (auto c = weak.lock()) c->finish_forward(from, to, in, out_amount, std::move(resp), done);
                      });
}

void Connector::finish_forward(const std::string& from, const std::string& to, const PreparePacket& in,
                               std::uint64_t out_amount, IlpResponse resp, const ResponseHandler& done)
{
    auto& src = *live_.at(from);
    auto& dst = *live_.at(to);
    if (auto* f = std::get_if<FulfillPacket>(&resp)) {
        if (!fulfills(f->fulfillment, in.condition)) {
            record(event::kFulfillInvalid, in, to, out_amount);
            src.settlement->rollback_incoming(in.amount);
            record(event::kRejectLocal, in, from, in.amount, "F05 fulfillment does not match");
            done(local_reject(codes::F05_WRONG_CONDITION, self_address(), "fulfillment does not match condition"));
            return;
        }
        record(event::kFulfillVerified, in, to, out_amount);
        dst.settlement->on_outgoing_fulfilled(out_amount);
        record(event::kDebitOutgoing, in, to, out_amount);
        {
            std::lock_guard lk(stats_mu_);
            forwards_.push_back({from, to, src.cfg->asset_code, src.cfg->asset_scale, dst.cfg->asset_code,
                                 dst.cfg->asset_scale, in.amount, out_amount});
        }
        record(event::kFulfillRelayed, in, from, in.amount);
        done(std::move(resp));
        return;
    }
    auto& r = std::get<RejectPacket>(resp);
    src.settlement->rollback_incoming(in.amount);
    const bool local = r.triggered_by == self_address();
    record(local ? event::kRejectLocal : event::kRejectRelayed, in, from, in.amount,
           std::string(r.code.str()) + " " + r.message);
    done(std::move(resp));
}

void Connector::start_network(DoneHandler ready)
{
    std::weak_ptr<Connector> self = weak_from_this();
    bool has_parent = false;
    for (const auto& a : cfg_.accounts) {
        if (a.listen_port) {
            const std::string id = a.id;
            listeners_[id] = std::make_unique<btp::TcpListener>(
                loop_, cfg_.bind_address, *a.listen_port, [self, id](std::shared_ptr<btp::Transport> t) {
                    if (auto c = self.lock()) c->accept_link(id, std::move(t));
                });
            logging::get(component_)->info("listening account={} port={}", id, listeners_[id]->port());
        }
        if (a.server && a.relation != Relation::Child) {
            if (a.relation == Relation::Parent) {
                has_parent = true;
                dial_tcp(a, ready, 0);
            } else {
                const std::string id = a.id;
                dial_tcp(a, [self, id](std::optional<std::string> err) {
                    auto c = self.lock();
                    if (c && err) logging::get(c->component_)->error("link failed account={} error={}", id, *err);
                }, 0);
            }
        }
    }
    if (!has_parent) loop_->post([ready] { ready(std::nullopt); });
}

void Connector::dial_tcp(const AccountConfig& cfg, DoneHandler done, int attempt)
{
    btp::BtpUri uri;
    try {
        uri = btp::BtpUri::parse(*cfg.server);
    } catch (const std::invalid_argument& e) {
        done(std::string("bad server uri: ") + e.what());
        return;
    }
    std::shared_ptr<btp::Transport> t;
    try {
        t = btp::TcpTransport::connect(loop_, uri.host, uri.port);
    } catch (const std::exception& e) {
        if (attempt + 1 >= kDialAttempts || stopped_) {
            done(std::string("connect failed: ") + e.what());
            return;
        }
        logging::get(component_)->warn("connect failed account={} attempt={} error={}", cfg.id, attempt + 1, e.what());
        std::weak_ptr<Connector> self = weak_from_this();
        const AccountConfig* pc = &cfg;
        loop_->post_after(Duration(1000), [self, pc, done, attempt] {
            if (auto c = self.lock()) c->dial_tcp(*pc, done, attempt + 1);
        });
        return;
    }
    dial_link(cfg.id, std::move(t), uri.name, uri.token, std::move(done));
}

std::optional<std::uint16_t> Connector::listen_port(const std::string& account_id) const
{
    auto it = listeners_.find(account_id);
    if (it == listeners_.end()) return std::nullopt;
    return it->second->port();
}

void Connector::stop()
{
    stopped_ = true;
    for (auto& [_, l] : listeners_) l->close();
    for (auto& [_, live] : live_)
        if (live->ep) live->ep->close();
    for (auto& ep : std::vector(pending_)) ep->close();
    pending_.clear();
}

std::vector<std::string> Connector::live_accounts() const
{
    std::vector<std::string> out;
    for (const auto& [id, _] : live_) out.push_back(id);
    return out;
}

bool Connector::is_connected(const std::string& live_id) const
{
    auto it = live_.find(live_id);
    return it != live_.end() && it->second->ep && it->second->ep->authenticated();
}

settlement::PeerSettlement* Connector::settlement(const std::string& live_id)
{
    auto it = live_.find(live_id);
    return it == live_.end() ? nullptr : it->second->settlement.get();
}

const AccountConfig* Connector::account_config(const std::string& live_id) const
{
    auto it = live_.find(live_id);
    return it == live_.end() ? nullptr : it->second->cfg;
}

std::shared_ptr<ledger::LedgerApi> Connector::ledger_for(const std::string& account_id) const
{
    auto it = account_ledgers_.find(account_id);
    return it == account_ledgers_.end() ? nullptr : it->second;
}

std::vector<ForwardRecord> Connector::forwards() const
{
    std::lock_guard lk(stats_mu_);
    return forwards_;
}

json Connector::cleanup()
{
    json out = json::object();
    for (auto& [id, live] : live_) {
        if (!live->settlement->enabled()) continue;
        auto r = live->settlement->cleanup();
        out[id] = {{"redeemed", r.redeemed}, {"incoming_closed", r.incoming_closed}, {"outgoing_closing", r.outgoing_closing}};
    }
    return out;
}

std::uint64_t Connector::redeem_all()
{
    std::uint64_t total = 0;
    for (auto& [_, live] : live_) total += live->settlement->redeem();
    return total;
}

json Connector::accounts_json() const
{
    json out = json::array();
    for (const auto& a : cfg_.accounts) {
        json j = {{"id", a.id},
                  {"relation", to_string(a.relation)},
                  {"asset_code", a.asset_code},
                  {"asset_scale", a.asset_scale}};
        if (a.max_packet_amount) j["max_packet_amount"] = *a.max_packet_amount;
        if (a.ledger) j["ledger"] = *a.ledger;
        json live = json::array();
        for (const auto& [id, l] : live_) {
            if (l->cfg != &a) continue;
            json lj = {{"id", id}, {"connected", is_connected(id)}};
            if (l->address) lj["address"] = l->address->str();
            live.push_back(std::move(lj));
        }
        j["live"] = std::move(live);
        out.push_back(std::move(j));
    }
    return out;
}

json Connector::balances_json() const
{
    json out = json::object();
    for (const auto& [id, l] : live_) out[id] = l->settlement->status();
    return out;
}

json Connector::routes_json() const
{
    json entries = json::object();
    for (const auto& [prefix, acct] : routes_.entries()) entries[prefix] = acct;
    return {{"own_address", address_ ? json(address_->str()) : json(nullptr)},
            {"default", routes_.default_route() ? json(*routes_.default_route()) : json(nullptr)},
            {"entries", std::move(entries)}};
}

json Connector::channels_json() const
{
    json out = json::array();
    for (const auto& [id, l] : live_) {
        const auto& s = *l->settlement;
        if (!s.enabled()) continue;
        auto add = [&](const std::optional<ledger::ChannelId>& ch, const char* direction) {
            if (!ch) return;
            json j = {{"account", id}, {"direction", direction}, {"channel_id", ch->hex()}};
            try {
                if (auto c = s.config().ledger->channel(*ch)) j["ledger"] = ledger::to_json(*c);
            } catch (const ledger::LedgerError& e) {
                j["ledger_error"] = e.what();
            }
            out.push_back(std::move(j));
        };
        add(s.balance().outgoing_channel(), "outgoing");
        add(s.balance().incoming_channel(), "incoming");
    }
    return out;
}

}  // namespace ilp::connector
