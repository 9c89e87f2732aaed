#include "ilpsim/btp/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace ilp::btp {

namespace {
constexpr std::size_t kMaxMessage = 1 << 20;

bool read_full(int fd, std::uint8_t* buf, std::size_t n)
{
    while (n > 0) {
        auto r = ::recv(fd, buf, n, 0);
        if (r < 0 && errno == EINTR) continue;
        if (r <= 0) return false;
        buf += r;
        n -= static_cast<std::size_t>(r);
    }
    return true;
}

bool write_full(int fd, const std::uint8_t* buf, std::size_t n)
{
    while (n > 0) {
        auto w = ::send(fd, buf, n, MSG_NOSIGNAL);
        if (w < 0 && errno == EINTR) continue;
        if (w <= 0) return false;
        buf += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}
}  // namespace

TcpTransport::TcpTransport(std::shared_ptr<EventLoop> loop, int fd) : loop_(std::move(loop)), fd_(fd)
{
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

std::shared_ptr<TcpTransport> TcpTransport::adopt(std::shared_ptr<EventLoop> loop, int fd)
{
    // The reader starts once handlers are installed so no frame is lost.
    return std::shared_ptr<TcpTransport>(new TcpTransport(std::move(loop), fd));
}

std::shared_ptr<TcpTransport> TcpTransport::connect(std::shared_ptr<EventLoop> loop, const std::string& host,
                                                    std::uint16_t port)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
        throw std::runtime_error("cannot resolve " + host);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
    }
    if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
        auto err = errno;
        ::freeaddrinfo(res);
        ::close(fd);
        throw std::runtime_error("connect " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
    }
    ::freeaddrinfo(res);
    return adopt(std::move(loop), fd);
}

TcpTransport::~TcpTransport()
{
    open_ = false;
    ::shutdown(fd_, SHUT_RDWR);
    if (reader_.joinable()) {
        if (reader_.get_id() == std::this_thread::get_id())
            reader_.detach();
        else
            reader_.join();
    }
    ::close(fd_);
}

void TcpTransport::start_reader()
{
    reader_ = std::thread([this] { reader_loop(); });
}

void TcpTransport::reader_loop()
{
    std::weak_ptr<TcpTransport> self = weak_from_this();
    while (open_) {
        std::uint8_t hdr[4];
        if (!read_full(fd_, hdr, 4)) break;
        std::size_t len = std::size_t{hdr[0]} << 24 | std::size_t{hdr[1]} << 16 | std::size_t{hdr[2]} << 8 | hdr[3];
        if (len > kMaxMessage) break;
        Bytes msg(len);
        if (!read_full(fd_, msg.data(), len)) break;
        loop_->post([self, msg = std::move(msg)]() mutable {
            auto t = self.lock();
            if (!t) return;
            MessageHandler h;
            {
                std::lock_guard lock(t->handler_mu_);
                h = t->on_message_;
            }
            if (h && t->open_) h(std::move(msg));
        });
    }
    open_ = false;
    loop_->post([self] {
        auto t = self.lock();
        if (!t) return;
        CloseHandler h;
        {
            std::lock_guard lock(t->handler_mu_);
            h = std::exchange(t->on_close_, nullptr);
        }
        if (h) h();
    });
}

bool TcpTransport::send(Bytes message)
{
    if (!open_) return false;
    std::uint8_t hdr[4] = {static_cast<std::uint8_t>(message.size() >> 24),
                           static_cast<std::uint8_t>(message.size() >> 16),
                           static_cast<std::uint8_t>(message.size() >> 8),
                           static_cast<std::uint8_t>(message.size())};
    std::lock_guard lock(write_mu_);
    return write_full(fd_, hdr, 4) && write_full(fd_, message.data(), message.size());
}

void TcpTransport::set_handlers(MessageHandler on_message, CloseHandler on_close)
{
    {
        std::lock_guard lock(handler_mu_);
        on_message_ = std::move(on_message);
        on_close_ = std::move(on_close);
    }
    if (!reader_.joinable()) start_reader();
}

void TcpTransport::close()
{
    open_ = false;
    ::shutdown(fd_, SHUT_RDWR);
}

TcpListener::TcpListener(std::shared_ptr<EventLoop> loop, const std::string& bind_address, std::uint16_t port,
                         AcceptHandler on_accept)
    : loop_(std::move(loop)), on_accept_(std::move(on_accept))
{
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw std::runtime_error("bad bind address " + bind_address);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 64) != 0) {
        auto err = errno;
        ::close(fd_);
        throw std::runtime_error("bind " + bind_address + ":" + std::to_string(port) + ": " +
                                 std::strerror(err));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] {
        while (open_) {
            int c = ::accept(fd_, nullptr, nullptr);
            if (c < 0) {
                if (errno == EINTR) continue;
                break;
            }
            auto t = TcpTransport::adopt(loop_, c);
            loop_->post([alive = alive_, handler = on_accept_, t] {
                if (*alive) handler(t);
            });
        }
    });
}

TcpListener::~TcpListener()
{
    close();
    if (thread_.joinable()) thread_.join();
}

void TcpListener::close()
{
    *alive_ = false;
    if (!open_.exchange(false)) return;
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
}

}  // namespace ilp::btp
