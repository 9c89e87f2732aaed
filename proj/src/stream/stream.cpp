#include "ilpsim/stream/stream.hpp"

#include <algorithm>

#include "ilpsim/core/oer.hpp"

namespace ilp::stream {

std::pair<Fulfillment, Condition> packet_condition(const Secret& secret, ByteView data)
{
    Fulfillment f;
    f.bytes = hmac_sha256(secret, data);
    return {f, condition_from_fulfillment(f)};
}

namespace {

void apply_keystream(const Secret& secret, std::uint32_t seq, std::span<std::uint8_t> buf)
{
    for (std::size_t off = 0, block = 0; off < buf.size(); off += 32, ++block) {
        ByteWriter w;
        w.put_bytes(as_bytes("enc"));
        w.put_uint_be(seq, 4);
        w.put_uint_be(block, 4);
        auto ks = hmac_sha256(secret, w.bytes());
        for (std::size_t i = 0; i < 32 && off + i < buf.size(); ++i) buf[off + i] ^= ks[i];
    }
}

Bytes u64_payload(std::uint64_t v)
{
    ByteWriter w;
    w.put_uint_be(v, 8);
    return std::move(w).take();
}

std::optional<std::uint64_t> read_u64_payload(const Frame& f)
{
    if (f.payload.size() != 8) return std::nullopt;
    ByteReader r(f.payload);
    return r.read_uint_be(8);
}

}  // namespace

Bytes seal_frame(const Secret& secret, const Frame& f)
{
    Bytes body;
    body.push_back(f.flags);
    body.insert(body.end(), f.payload.begin(), f.payload.end());
    apply_keystream(secret, f.sequence, body);
    ByteWriter w;
    w.put_u8(kFrameVersion);
    w.put_uint_be(f.sequence, 4);
    w.put_bytes(body);
    return std::move(w).take();
}

Frame open_frame(const Secret& secret, ByteView data)
{
    ByteReader r(data);
    if (r.read_u8() != kFrameVersion) throw DecodeError(DecodeErrc::InvalidField, 0, "unknown stream frame version");
    Frame f;
    f.sequence = static_cast<std::uint32_t>(r.read_uint_be(4));
    auto rest = r.rest();
    if (rest.empty()) throw DecodeError(DecodeErrc::Truncated, r.offset(), "stream frame without flags");
    Bytes body(rest.begin(), rest.end());
    apply_keystream(secret, f.sequence, body);
    f.flags = body[0];
    f.payload.assign(body.begin() + 1, body.end());
    return f;
}

const char* to_string(ConnState s)
{
    switch (s) {
    case ConnState::Open: return "open";
    case ConnState::Closing: return "closing";
    case ConnState::Closed: return "closed";
    }
    return "?";
}

const char* to_string(SendError e)
{
    switch (e) {
    case SendError::Unreachable: return "Unreachable";
    case SendError::Expired: return "Expired";
    case SendError::Rejected: return "Rejected";
    case SendError::Killed: return "Killed";
    }
    return "?";
}

// ---- server ----------------------------------------------------------------

std::shared_ptr<StreamServer> StreamServer::create(std::shared_ptr<connector::PluginClient> uplink,
                                                   std::shared_ptr<RandomSource> rng, std::shared_ptr<EventLog> log,
                                                   std::shared_ptr<const Clock> clock, std::string component)
{
    auto s = std::shared_ptr<StreamServer>(
        new StreamServer(uplink, std::move(rng), std::move(log), std::move(clock), std::move(component)));
    std::weak_ptr<StreamServer> weak = s;
    uplink->set_prepare_handler([weak](PreparePacket p, connector::ResponseHandler reply) {
        if (auto self = weak.lock()) reply(self->handle_incoming(p));
        else reply(connector::local_reject(codes::F02_UNREACHABLE, p.destination, "receiver gone"));
    });
    return s;
}

StreamServer::StreamServer(std::shared_ptr<connector::PluginClient> uplink, std::shared_ptr<RandomSource> rng,
                           std::shared_ptr<EventLog> log, std::shared_ptr<const Clock> clock, std::string component)
    : uplink_(std::move(uplink)),
      rng_(std::move(rng)),
      log_(std::move(log)),
      clock_(std::move(clock)),
      component_(std::move(component))
{
}

Credentials StreamServer::generate_credentials()
{
    if (!uplink_->connected()) throw std::logic_error("stream server uplink is not connected");
    std::lock_guard lk(mu_);
    Connection c;
    do {
        c.token = base64url_encode(rng_->bytes<18>());
    } while (conns_.contains(c.token));
    c.secret = rng_->bytes<32>();
    Credentials out{uplink_->info().address.with_suffix(c.token), c.secret};
    conns_.emplace(c.token, std::move(c));
    return out;
}

std::optional<Secret> StreamServer::secret_for(const std::string& token) const
{
    std::lock_guard lk(mu_);
    auto it = conns_.find(token);
    if (it == conns_.end()) return std::nullopt;
    return it->second.secret;
}

void StreamServer::record(const char* kind, const PreparePacket& p, std::uint64_t amount, std::string detail)
{
    if (!log_) return;
    log_->record(Event{clock_->now(), component_, kind, to_hex(p.condition.bytes), "", amount, std::move(detail)});
}

IlpResponse StreamServer::handle_incoming(const PreparePacket& p)
{
    const auto& base = uplink_->info().address;
    if (!base.is_prefix_of(p.destination) || p.destination == base)
        return connector::local_reject(codes::F02_UNREACHABLE, base, "not addressed to this receiver");
    auto suffix = base.suffix_of(p.destination);
    std::string token(suffix.substr(0, suffix.find('.')));

    std::lock_guard lk(mu_);
    auto it = conns_.find(token);
    if (it == conns_.end()) return connector::local_reject(codes::F06_UNEXPECTED_PAYMENT, base, "unknown connection");
    auto& c = it->second;
    auto [fulfillment, condition] = packet_condition(c.secret, p.data);
    if (condition != p.condition)
        return connector::local_reject(codes::F05_WRONG_CONDITION, base, "condition does not match");
    record(event::kConditionMatch, p, p.amount, token);

    Frame f;
    try {
        f = open_frame(c.secret, p.data);
    } catch (const DecodeError& e) {
        return connector::local_reject(codes::F01_INVALID_PACKET, base, e.what());
    }
    if (f.flags & flags::kProbe)
        return connector::local_reject(codes::F99_APPLICATION_ERROR, base, "probe",
                                       seal_frame(c.secret, {f.sequence, 0, u64_payload(p.amount)}));
    if (c.state == ConnState::Closed)
        return connector::local_reject(codes::F99_APPLICATION_ERROR, base, "connection closed");
    if (!c.credited.contains(f.sequence)) {
        c.credited.emplace(f.sequence, p.amount);
        if (p.amount > 0) {
            c.total_received += p.amount;
            ++c.packets;
            record(event::kReceiverCredit, p, p.amount, token);
        }
    }
    if (f.flags & flags::kClose) c.state = ConnState::Closed;
    return FulfillPacket{fulfillment, seal_frame(c.secret, {f.sequence, 0, u64_payload(c.credited[f.sequence])})};
}

std::uint64_t StreamServer::total_received() const
{
    std::lock_guard lk(mu_);
    std::uint64_t t = 0;
    for (const auto& [_, c] : conns_) t += c.total_received;
    return t;
}

std::optional<StreamServer::Connection> StreamServer::connection(const std::string& token) const
{
    std::lock_guard lk(mu_);
    auto it = conns_.find(token);
    if (it == conns_.end()) return std::nullopt;
    return it->second;
}

std::size_t StreamServer::connection_count() const
{
    std::lock_guard lk(mu_);
    return conns_.size();
}

// ---- sender ----------------------------------------------------------------

std::shared_ptr<StreamSender> StreamSender::create(std::shared_ptr<EventLoop> loop,
                                                   std::shared_ptr<connector::PluginClient> uplink, Credentials creds,
                                                   SendOptions opts, std::shared_ptr<EventLog> log,
                                                   std::string component)
{
    return std::shared_ptr<StreamSender>(new StreamSender(std::move(loop), std::move(uplink), std::move(creds),
                                                          std::move(opts), std::move(log), std::move(component)));
}

StreamSender::StreamSender(std::shared_ptr<EventLoop> loop, std::shared_ptr<connector::PluginClient> uplink,
                           Credentials creds, SendOptions opts, std::shared_ptr<EventLog> log, std::string component)
    : loop_(std::move(loop)),
      uplink_(std::move(uplink)),
      creds_(std::move(creds)),
      opts_(std::move(opts)),
      log_(std::move(log)),
      component_(std::move(component))
{
}

void StreamSender::record(const char* kind, const Condition& c, std::uint64_t amount, std::string detail)
{
    if (!log_) return;
    log_->record(Event{loop_->now(), component_, kind, to_hex(c.bytes), "", amount, std::move(detail)});
}

PreparePacket StreamSender::make_packet(std::uint64_t amount, std::uint8_t frame_flags)
{
    auto data = seal_frame(creds_.shared_secret, {next_seq_++, frame_flags, u64_payload(amount)});
    auto [_, condition] = packet_condition(creds_.shared_secret, data);
    return PreparePacket{creds_.destination, amount, condition, loop_->now() + opts_.packet_expiry, std::move(data)};
}

void StreamSender::send_money(std::uint64_t amount, DoneHandler done)
{
    done_ = std::move(done);
    report_.source_amount = amount;
    unassigned_ = amount;
    packet_size_ = std::max<std::uint64_t>(1, opts_.max_packet_amount);
    if (amount == 0) {
        finished_ = true;
        auto self = shared_from_this();
        loop_->post([self] { self->complete(); });
        return;
    }
    if (opts_.probe) send_probe();
    else pump();
}

void StreamSender::send_probe()
{
    auto p = make_packet(1, flags::kProbe);
    auto self = shared_from_this();
    uplink_->send_prepare(p, [self](IlpResponse resp) {
        if (self->finished_) return self->complete();
        if (auto* r = std::get_if<RejectPacket>(&resp)) {
            if (r->code == codes::F99_APPLICATION_ERROR) {
                try {
                    self->report_.probe_delivered = read_u64_payload(open_frame(self->creds_.shared_secret, r->data));
                } catch (const DecodeError&) {
                }
            } else if (r->code == codes::F02_UNREACHABLE) {
                return self->finish(SendError::Unreachable, r->message);
            }
        }
        self->pump();
    });
}

void StreamSender::pump()
{
    if (finished_ || retry_scheduled_) return;
    while (!finished_ && in_flight_ < window_ && unassigned_ > 0) {
        auto amt = std::min(packet_size_, unassigned_);
        unassigned_ -= amt;
        send_chunk(amt);
    }
    if (!finished_ && in_flight_ == 0 && unassigned_ == 0) finish(std::nullopt);
}

void StreamSender::send_chunk(std::uint64_t amount)
{
    ++in_flight_;
    auto p = make_packet(amount, 0);
    auto self = shared_from_this();
    auto cond = p.condition;
    uplink_->send_prepare(p, [self, amount, cond](IlpResponse resp) {
        self->on_chunk_result(amount, cond, std::move(resp));
    });
}

void StreamSender::on_chunk_result(std::uint64_t amount, const Condition& cond, IlpResponse resp)
{
    --in_flight_;
    if (auto* f = std::get_if<FulfillPacket>(&resp)) {
        report_.source_sent += amount;
        ++report_.packets_fulfilled;
        try {
            report_.delivered += read_u64_payload(open_frame(creds_.shared_secret, f->data)).value_or(0);
        } catch (const DecodeError&) {
        }
        record(event::kSenderFulfilled, cond, amount);
        if (!finished_) {
            window_ = std::min(window_ + 1, kMaxWindow);
            failures_ = 0;
            if (opts_.kill_after_packets && report_.packets_fulfilled >= *opts_.kill_after_packets) kill();
        }
    } else {
        const auto& r = std::get<RejectPacket>(resp);
        ++report_.packets_rejected;
        record(event::kSenderRejected, cond, amount, std::string(r.code.str()));
        if (!finished_) {
            unassigned_ += amount;
            ++failures_;
            if (r.code == codes::F08_AMOUNT_TOO_LARGE) {
                packet_size_ = std::max<std::uint64_t>(1, std::min(packet_size_, amount) / 2);
            } else if (r.code == codes::F02_UNREACHABLE) {
                finish(SendError::Unreachable, r.message);
            } else if (r.code.is_final()) {
                finish(SendError::Rejected, std::string(r.code.str()) + " " + r.message);
            } else if (r.code.is_temporary()) {
                window_ = std::max(1u, window_ / 2);
            }
            if (!finished_ && failures_ >= kRetryBudget)
                finish(r.code.is_relative() ? SendError::Expired : SendError::Rejected,
                       std::to_string(failures_) + " consecutive failures, last " + std::string(r.code.str()));
            if (!finished_ && !retry_scheduled_) {
                retry_scheduled_ = true;
                auto self = shared_from_this();
                loop_->post_after(opts_.retry_delay, [self] {
                    self->retry_scheduled_ = false;
                    self->pump();
                });
            }
        }
    }
    report_.min_window = std::min(report_.min_window, window_);
    report_.max_window = std::max(report_.max_window, window_);
    if (finished_) {
        if (in_flight_ == 0) complete();
        return;
    }
    pump();
}

void StreamSender::finish(std::optional<SendError> err, std::string detail)
{
    if (finished_) return;
    finished_ = true;
    report_.error = err;
    report_.error_detail = std::move(detail);
    if (in_flight_ > 0) return;
    if (!err && opts_.close) send_close();
    else complete();
}

void StreamSender::send_close()
{
    ++in_flight_;
    auto p = make_packet(0, flags::kClose);
    auto self = shared_from_this();
    uplink_->send_prepare(p, [self](IlpResponse) {
        --self->in_flight_;
        self->complete();
    });
}

void StreamSender::kill()
{
    if (completed_) return;
    finished_ = true;
    report_.error = SendError::Killed;
    report_.error_detail = "uplink closed";
    uplink_->close();
    if (in_flight_ == 0) {
        auto self = shared_from_this();
        loop_->post([self] { self->complete(); });
    }
}

void StreamSender::complete()
{
    if (completed_ || in_flight_ > 0) return;
    completed_ = true;
    if (done_) done_(report_);
}

}  // namespace ilp::stream
