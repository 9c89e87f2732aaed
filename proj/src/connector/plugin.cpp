#include "ilpsim/connector/plugin.hpp"

#include "ilpsim/core/event_log.hpp"

namespace ilp::connector {

namespace {
constexpr Duration kAuthTimeout{10'000};
const IlpAddress& unassigned()
{
    static const IlpAddress a = IlpAddress::parse("self.unassigned");
    return a;
}
}  // namespace

Bytes encode_ildcp(const IldcpInfo& info)
{
    ByteWriter w;
    w.put_var_octets(as_bytes(info.address.str()));
    w.put_u8(static_cast<std::uint8_t>(info.asset_scale));
    w.put_var_octets(as_bytes(info.asset_code));
    return std::move(w).take();
}

IldcpInfo decode_ildcp(ByteView bytes)
{
    ByteReader r(bytes);
    IldcpInfo info{IlpAddress::parse(to_string(r.read_var_octets())), 0, {}};
    info.asset_scale = r.read_u8();
    info.asset_code = to_string(r.read_var_octets());
    r.expect_end("ildcp");
    return info;
}

RejectPacket local_reject(const ErrorCode& code, const IlpAddress& self, std::string message, Bytes data)
{
    return RejectPacket{code, self, std::move(message), std::move(data)};
}

void send_prepare_over(btp::BtpEndpoint& ep, std::shared_ptr<EventLoop> loop, const PreparePacket& p,
                       const IlpAddress& self, ResponseHandler done)
{
    const auto now = loop->now();
    if (p.expires_at <= now) {
        loop->post([done, self] { done(local_reject(codes::R00_TRANSFER_TIMED_OUT, self, "expired before sending")); });
        return;
    }
    const auto timeout = std::chrono::duration_cast<Duration>(p.expires_at - now);
    ep.request({btp::ProtocolEntry::octets(btp::proto::kIlp, encode_packet(p))}, timeout,
               [done = std::move(done), self](btp::Result<btp::Entries> r) {
                   if (!r) {
                       const auto& err = r.error();
                       if (err.code == btp::LinkErrc::Timeout)
                           done(local_reject(codes::R00_TRANSFER_TIMED_OUT, self, "no response before expiry"));
                       else
                           done(local_reject(codes::T01_PEER_UNREACHABLE, self, err.message));
                       return;
                   }
                   const auto* e = btp::find_entry(r.value(), btp::proto::kIlp);
                   if (!e) {
                       done(local_reject(codes::T00_INTERNAL_ERROR, self, "response without ilp entry"));
                       return;
                   }
                   try {
                       done(decode_response(e->data));
                   } catch (const std::exception& ex) {
                       done(local_reject(codes::T00_INTERNAL_ERROR, self,
                                         std::string("undecodable response: ") + ex.what()));
                   }
               });
}

bool dispatch_ilp_message(const btp::Entries& entries, const btp::Responder& responder, const IlpAddress& self,
                          const PrepareHandler& handler)
{
    const auto* e = btp::find_entry(entries, btp::proto::kIlp);
    if (!e) return false;
    auto reply = [responder](const IlpResponse& resp) {
        responder.respond({btp::ProtocolEntry::octets(btp::proto::kIlp, encode_response(resp))});
    };
    std::optional<PreparePacket> prepare;
    try {
        auto packet = decode_packet(e->data);
        if (!std::holds_alternative<PreparePacket>(packet)) {
            reply(local_reject(codes::F01_INVALID_PACKET, self, "expected ilp_prepare"));
            return true;
        }
        prepare = std::move(std::get<PreparePacket>(packet));
    } catch (const std::exception& ex) {
        reply(local_reject(codes::F01_INVALID_PACKET, self, ex.what()));
        return true;
    }
    if (!handler) {
        reply(local_reject(codes::F02_UNREACHABLE, self, "no receiver"));
        return true;
    }
    handler(std::move(*prepare), reply);
    return true;
}

std::shared_ptr<PluginClient> PluginClient::create(std::shared_ptr<EventLoop> loop,
                                                   std::shared_ptr<btp::Transport> transport)
{
    auto ep = btp::BtpEndpoint::create(loop, std::move(transport), btp::BtpEndpoint::Role::Client);
    auto pc = std::shared_ptr<PluginClient>(new PluginClient(std::move(loop), std::move(ep)));
    std::weak_ptr<PluginClient> self = pc;
    pc->ep_->set_message_handler([self](btp::Entries entries, btp::Responder responder) {
        auto p = self.lock();
        if (!p) return;
        const auto& addr = p->info_ ? p->info_->address : unassigned();
        if (!dispatch_ilp_message(entries, responder, addr, p->handler_))
            responder.fail("UnsupportedProtocol", "client accepts only ilp messages");
    });
    return pc;
}

void PluginClient::connect(const std::string& name, const std::string& token, DoneHandler done)
{
    std::weak_ptr<PluginClient> self = weak_from_this();
    ep_->authenticate(name, token, kAuthTimeout, [self, done](const std::optional<btp::LinkError>& err) {
        auto p = self.lock();
        if (!p) return;
        if (err) {
            done(std::string(btp::to_string(err->code)) + ": " + err->message);
            return;
        }
        p->ep_->request({btp::ProtocolEntry::octets(btp::proto::kIldcp, {})}, kAuthTimeout,
                        [self, done](btp::Result<btp::Entries> r) {
                            auto p = self.lock();
                            if (!p) return;
                            if (!r) {
                                done("ildcp: " + r.error().message);
                                return;
                            }
                            const auto* e = btp::find_entry(r.value(), btp::proto::kIldcp);
                            if (!e) {
                                done("ildcp: response without ildcp entry");
                                return;
                            }
                            try {
                                p->info_ = decode_ildcp(e->data);
                            } catch (const std::exception& ex) {
                                done(std::string("ildcp: ") + ex.what());
                                return;
                            }
                            done(std::nullopt);
                        });
    });
}

void PluginClient::send_prepare(const PreparePacket& p, ResponseHandler done)
{
    send_prepare_over(*ep_, loop_, p, info_ ? info_->address : unassigned(), std::move(done));
}

}  // namespace ilp::connector
