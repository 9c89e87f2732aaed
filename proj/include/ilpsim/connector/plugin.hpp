#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "ilpsim/btp/endpoint.hpp"
#include "ilpsim/core/packet.hpp"

namespace ilp::connector {

/// Address and asset the parent assigns to a child, carried in the "ildcp"
/// entry: address (var octets) || asset scale (u8) || asset code (var octets).
struct IldcpInfo {
    IlpAddress address;
    int asset_scale = 0;
    std::string asset_code;
};

Bytes encode_ildcp(const IldcpInfo& info);
/// Throws DecodeError or MalformedAddress.
IldcpInfo decode_ildcp(ByteView bytes);

using ResponseHandler = std::function<void(IlpResponse)>;
using PrepareHandler = std::function<void(PreparePacket, ResponseHandler)>;

/// A Reject generated at this hop.
RejectPacket local_reject(const ErrorCode& code, const IlpAddress& self, std::string message, Bytes data = {});

/// Sends a Prepare as a BTP "ilp" request and delivers the Fulfill/Reject.
/// Link failures become local rejects: timeout -> R00, anything else -> T01.
void send_prepare_over(btp::BtpEndpoint& ep, std::shared_ptr<EventLoop> loop, const PreparePacket& p,
                       const IlpAddress& self, ResponseHandler done);

/// Answers BTP "ilp" Messages by decoding the Prepare and calling `handler`.
/// Undecodable packets are rejected with F01. Returns false when the
/// Message carries no "ilp" entry.
bool dispatch_ilp_message(const btp::Entries& entries, const btp::Responder& responder, const IlpAddress& self,
                          const PrepareHandler& handler);

/// Application side of a child link: authenticates, learns its address via
/// ILDCP, then sends and receives ILP packets.
class PluginClient : public std::enable_shared_from_this<PluginClient> {
public:
    using DoneHandler = std::function<void(std::optional<std::string> error)>;

    static std::shared_ptr<PluginClient> create(std::shared_ptr<EventLoop> loop,
                                                std::shared_ptr<btp::Transport> transport);

    void connect(const std::string& name, const std::string& token, DoneHandler done);
    bool connected() const { return info_.has_value() && ep_->authenticated(); }
    /// Precondition: connected().
    const IldcpInfo& info() const { return *info_; }

    void send_prepare(const PreparePacket& p, ResponseHandler done);
    void set_prepare_handler(PrepareHandler h) { handler_ = std::move(h); }
    void close() { ep_->close(); }

private:
    PluginClient(std::shared_ptr<EventLoop> loop, std::shared_ptr<btp::BtpEndpoint> ep)
        : loop_(std::move(loop)), ep_(std::move(ep))
    {
    }

    std::shared_ptr<EventLoop> loop_;
    std::shared_ptr<btp::BtpEndpoint> ep_;
    std::optional<IldcpInfo> info_;
    PrepareHandler handler_;
};

}  // namespace ilp::connector
