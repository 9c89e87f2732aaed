#include "ilpsim/btp/endpoint.hpp"

#include <charconv>

#include "ilpsim/core/event_log.hpp"

namespace ilp::btp {

namespace {
constexpr std::size_t kRecentWindow = 4096;
}

const char* to_string(LinkErrc e)
{
    switch (e) {
    case LinkErrc::Timeout: return "Timeout";
    case LinkErrc::LinkClosed: return "LinkClosed";
    case LinkErrc::PeerError: return "PeerError";
    case LinkErrc::AuthFailed: return "AuthFailed";
    case LinkErrc::NotAuthenticated: return "NotAuthenticated";
    }
    return "?";
}

bool AuthTable::check(const std::string& name, const std::string& token) const
{
    if (accept_anything) return true;
    if (auto it = tokens.find(name); it != tokens.end()) return it->second == token;
    return any_name_token && *any_name_token == token;
}

void Responder::respond(Entries entries) const
{
    if (std::exchange(*done_, true)) return;
    if (auto ep = ep_.lock()) ep->send_frame(BtpFrame{FrameType::Response, request_id_, std::move(entries)});
}

void Responder::fail(const std::string& code, const std::string& message) const
{
    if (std::exchange(*done_, true)) return;
    if (auto ep = ep_.lock()) ep->send_error(request_id_, code, message);
}

std::shared_ptr<BtpEndpoint> BtpEndpoint::create(std::shared_ptr<EventLoop> loop,
                                                 std::shared_ptr<Transport> transport, Role role,
                                                 std::uint32_t first_request_id)
{
    auto ep = std::shared_ptr<BtpEndpoint>(
        new BtpEndpoint(std::move(loop), std::move(transport), role, first_request_id));
    ep->attach();
    return ep;
}

BtpEndpoint::BtpEndpoint(std::shared_ptr<EventLoop> loop, std::shared_ptr<Transport> transport, Role role,
                         std::uint32_t first_request_id)
    : loop_(std::move(loop)), transport_(std::move(transport)), role_(role), next_id_(first_request_id)
{
}

void BtpEndpoint::attach()
{
    std::weak_ptr<BtpEndpoint> self = weak_from_this();
    transport_->set_handlers(
        [self](Bytes raw) {
            if (auto ep = self.lock()) ep->on_frame(std::move(raw));
        },
        [self] {
            if (auto ep = self.lock()) ep->on_transport_closed();
        });
}

void BtpEndpoint::authenticate(const std::string& name, const std::string& token, Duration timeout,
                               AuthHandler done)
{
    Bytes payload = to_bytes(name);
    payload.push_back(0);
    auto t = as_bytes(token);
    payload.insert(payload.end(), t.begin(), t.end());
    std::weak_ptr<BtpEndpoint> self = weak_from_this();
    send_request({ProtocolEntry::octets(proto::kAuth, std::move(payload))}, timeout,
                 [self, name, done = std::move(done)](Result<Entries> r) {
                     auto ep = self.lock();
                     if (!ep) return;
                     if (r.ok()) {
                         ep->state_ = State::Authenticated;
                         ep->peer_name_ = name;
                         done(std::nullopt);
                         return;
                     }
                     auto err = r.error();
                     if (err.code == LinkErrc::PeerError) err.code = LinkErrc::AuthFailed;
                     done(err);
                 });
}

void BtpEndpoint::expect_auth(AuthTable table, AuthHandler done)
{
    auth_table_ = std::move(table);
    on_auth_ = std::move(done);
}

void BtpEndpoint::request(Entries entries, Duration timeout, RequestCallback done)
{
    if (state_ == State::Closed || !transport_->is_open()) {
        loop_->post([done = std::move(done)] { done(LinkError{LinkErrc::LinkClosed, "link closed"}); });
        return;
    }
    if (state_ != State::Authenticated) {
        loop_->post([done = std::move(done)] {
            done(LinkError{LinkErrc::NotAuthenticated, "link not authenticated"});
        });
        return;
    }
    send_request(std::move(entries), timeout, std::move(done));
}

std::uint32_t BtpEndpoint::next_request_id()
{
    while (true) {
        auto id = next_id_++;
        if (!pending_.contains(id)) return id;
    }
}

void BtpEndpoint::send_request(Entries entries, Duration timeout, RequestCallback done)
{
    if (state_ == State::Closed) {
        loop_->post([done = std::move(done)] { done(LinkError{LinkErrc::LinkClosed, "link closed"}); });
        return;
    }
    auto id = next_request_id();
    std::weak_ptr<BtpEndpoint> self = weak_from_this();
    auto timer = loop_->post_after(timeout, [self, id] {
        auto ep = self.lock();
        if (!ep) return;
        auto it = ep->pending_.find(id);
        if (it == ep->pending_.end()) return;
        auto cb = std::move(it->second.done);
        ep->pending_.erase(it);
        cb(LinkError{LinkErrc::Timeout, "request " + std::to_string(id) + " timed out"});
    });
    pending_.emplace(id, Pending{std::move(done), timer});
    send_frame(BtpFrame{FrameType::Message, id, std::move(entries)});
}

void BtpEndpoint::send_frame(const BtpFrame& f)
{
    if (state_ == State::Closed) return;
    transport_->send(encode_frame(f));
}

void BtpEndpoint::send_error(std::uint32_t request_id, const std::string& code, const std::string& message)
{
    send_frame(BtpFrame{FrameType::Error,
                        request_id,
                        {ProtocolEntry::text(proto::kCode, code), ProtocolEntry::text(proto::kMessage, message)}});
}

bool BtpEndpoint::seen_before(std::uint32_t request_id)
{
    if (!recent_incoming_.insert(request_id).second) return true;
    recent_order_.push_back(request_id);
    if (recent_order_.size() > kRecentWindow) {
        recent_incoming_.erase(recent_order_.front());
        recent_order_.pop_front();
    }
    return false;
}

void BtpEndpoint::on_frame(Bytes raw)
{
    if (state_ == State::Closed) return;
    BtpFrame f;
    try {
        f = decode_frame(raw);
    } catch (const DecodeError& e) {
        logging::get("btp")->warn("dropping undecodable frame: {}", e.what());
        return;
    }
    if (f.type == FrameType::Message) {
        handle_message(f);
        return;
    }
    auto it = pending_.find(f.request_id);
    if (it == pending_.end()) return;  // late or duplicated response
    auto pending = std::move(it->second);
    pending_.erase(it);
    loop_->cancel(pending.timer);
    if (f.type == FrameType::Response) {
        pending.done(std::move(f.entries));
        return;
    }
    std::string code, message;
    if (auto* c = find_entry(f.entries, proto::kCode)) code = ilp::to_string(c->data);
    if (auto* m = find_entry(f.entries, proto::kMessage)) message = ilp::to_string(m->data);
    pending.done(LinkError{LinkErrc::PeerError, code + (message.empty() ? "" : ": " + message)});
}

void BtpEndpoint::handle_message(const BtpFrame& f)
{
    if (seen_before(f.request_id)) return;
    const bool has_auth = find_entry(f.entries, proto::kAuth) != nullptr;
    if (state_ == State::AwaitingAuth) {
        if (role_ == Role::Server && has_auth) {
            handle_auth(f);
        } else {
            send_error(f.request_id, "NotAuthenticated", "authenticate first");
        }
        return;
    }
    if (has_auth) {
        send_error(f.request_id, "ProtocolViolation", "link already authenticated");
        return;
    }
    if (!on_message_) {
        send_error(f.request_id, "NoHandler", "no message handler");
        return;
    }
    on_message_(f.entries, Responder(weak_from_this(), f.request_id));
}

void BtpEndpoint::handle_auth(const BtpFrame& f)
{
    const auto& data = find_entry(f.entries, proto::kAuth)->data;
    auto sep = std::find(data.begin(), data.end(), std::uint8_t{0});
    std::string name(data.begin(), sep);
    std::string token = sep == data.end() ? std::string{} : std::string(sep + 1, data.end());
    if (sep == data.end() || !auth_table_.check(name, token)) {
        send_error(f.request_id, "AuthFailed", "unknown name or wrong token");
        if (on_auth_) on_auth_(LinkError{LinkErrc::AuthFailed, "peer '" + name + "' failed authentication"});
        close();
        return;
    }
    state_ = State::Authenticated;
    peer_name_ = name;
    send_frame(BtpFrame{FrameType::Response, f.request_id, {}});
    if (on_auth_) on_auth_(std::nullopt);
}

void BtpEndpoint::close()
{
    if (state_ == State::Closed) return;
    state_ = State::Closed;
    transport_->close();
    auto pending = std::move(pending_);
    pending_.clear();
    for (auto& [id, p] : pending) {
        loop_->cancel(p.timer);
        auto cb = std::move(p.done);
        loop_->post([cb = std::move(cb)] { cb(LinkError{LinkErrc::LinkClosed, "link closed"}); });
    }
    if (auto h = std::exchange(on_close_, nullptr)) loop_->post(std::move(h));
}

void BtpEndpoint::on_transport_closed() { close(); }

BtpUri BtpUri::parse(std::string_view uri)
{
    auto fail = [&](const char* why) {
        return std::invalid_argument("bad BTP URI \"" + std::string(uri) + "\": " + why);
    };
    BtpUri out;
    auto scheme_end = uri.find("://");
    if (scheme_end == std::string_view::npos) throw fail("missing scheme");
    out.scheme = std::string(uri.substr(0, scheme_end));
    if (out.scheme != "btp+ws" && out.scheme != "btp+wss" && out.scheme != "btp+tcp")
        throw fail("scheme must be btp+ws, btp+wss or btp+tcp");
    auto rest = uri.substr(scheme_end + 3);
    if (auto at = rest.rfind('@'); at != std::string_view::npos) {
        auto cred = rest.substr(0, at);
        auto colon = cred.find(':');
        if (colon == std::string_view::npos) throw fail("credentials must be name:token");
        out.name = std::string(cred.substr(0, colon));
        out.token = std::string(cred.substr(colon + 1));
        rest = rest.substr(at + 1);
    }
    if (auto slash = rest.find('/'); slash != std::string_view::npos) rest = rest.substr(0, slash);
    auto colon = rest.rfind(':');
    if (colon == std::string_view::npos) throw fail("missing port");
    out.host = std::string(rest.substr(0, colon));
    auto port_text = rest.substr(colon + 1);
    unsigned port = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0 || port > 65535)
        throw fail("bad port");
    if (out.host.empty()) throw fail("missing host");
    out.port = static_cast<std::uint16_t>(port);
    return out;
}

std::string BtpUri::str() const
{
    return scheme + "://" + name + ":" + token + "@" + host + ":" + std::to_string(port);
}

}  // namespace ilp::btp
