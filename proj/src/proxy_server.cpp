#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "circulate/net.hpp"

namespace circulate {

using nlohmann::json;
using wire::Message;
using wire::Op;

namespace net {

void write_frame(int fd, const std::vector<std::uint8_t>& payload) {
    std::uint8_t len[8];
    std::uint64_t n = payload.size();
    for (int i = 0; i < 8; ++i) len[i] = static_cast<std::uint8_t>(n >> (8 * (7 - i)));
    auto write_full = [&](const std::uint8_t* p, std::size_t count) {
        while (count > 0) {
            ssize_t w = ::send(fd, p, count, MSG_NOSIGNAL);
            if (w <= 0) throw std::runtime_error("socket write failed");
            p += w;
            count -= static_cast<std::size_t>(w);
        }
    };
    write_full(len, 8);
    write_full(payload.data(), payload.size());
}

std::vector<std::uint8_t> read_frame(int fd) {
    auto read_full = [&](std::uint8_t* p, std::size_t count) {
        while (count > 0) {
            ssize_t r = ::recv(fd, p, count, 0);
            if (r == 0) throw std::runtime_error("connection closed");
            if (r < 0) throw std::runtime_error("socket read failed");
            p += r;
            count -= static_cast<std::size_t>(r);
        }
    };
    std::uint8_t len[8];
    read_full(len, 8);
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n = (n << 8) | len[i];
    if (n > (1ULL << 33))
        throw std::runtime_error("frame too large");
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(n));
    read_full(payload.data(), payload.size());
    return payload;
}

int connect_tcp(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0)
        throw std::runtime_error("cannot resolve " + host);
    int fd = -1;
    for (addrinfo* a = res; a; a = a->ai_next) {
        fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0)
        throw std::runtime_error("cannot connect to " + host + ":" +
                                 std::to_string(port));
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return fd;
}

}  // namespace net

ProxyServer::ProxyServer(Proxy& proxy, int port) : proxy_(proxy) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("cannot create listen socket");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(listen_fd_);
        throw std::runtime_error("cannot bind port " + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    if (::listen(listen_fd_, 64) != 0) {
        ::close(listen_fd_);
        throw std::runtime_error("cannot listen");
    }
    accept_thread_ = std::thread([this] { accept_loop(); });
}

ProxyServer::~ProxyServer() { stop(); }

void ProxyServer::stop() {
    bool expected = false;
    if (!stopping_.compare_exchange_strong(expected, true)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard lock(conn_mu_);
    for (auto& t : connections_)
        if (t.joinable()) t.join();
}

void ProxyServer::accept_loop() {
    while (!stopping_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (stopping_) return;
            continue;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        std::lock_guard lock(conn_mu_);
        connections_.emplace_back([this, fd] { serve(fd); });
    }
}

void ProxyServer::serve(int fd) {
    for (;;) {
        Message request;
        try {
            auto payload = net::read_frame(fd);
            request = wire::decode(payload.data(), payload.size(), false);
        } catch (...) {
            break;  // peer closed or sent garbage: drop the connection
        }
        Message response = dispatch(request);
        response.op = request.op;
        response.correlation = request.correlation;
        try {
            net::write_frame(fd, wire::encode(response, true));
        } catch (...) {
            break;
        }
    }
    ::close(fd);
}

namespace {

std::vector<std::string> ids_of(const json& body, const char* key = "ids") {
    std::vector<std::string> ids;
    for (const auto& id : body.at(key)) ids.push_back(id.get<std::string>());
    return ids;
}

}  // namespace

wire::Message ProxyServer::dispatch(const Message& rq) {
    Message rs;
    try {
        switch (rq.op) {
            case Op::Invoke: {
                std::string id = proxy_.invoke(
                    rq.body.at("service").get<std::string>(),
                    rq.body.at("op").get<std::string>(), ids_of(rq.body, "params"),
                    rq.body.value("size_hint", Bytes{0}));
                rs.body = {{"id", id}, {"size", proxy_.size_of(id)}};
                break;
            }
            case Op::Upload: {
                rs.body = {{"ids", proxy_.upload(rq.blobs)}};
                break;
            }
            case Op::Deliver: {
                auto ids = ids_of(rq.body);
                auto blobs = proxy_.return_data(ids);
                std::vector<std::pair<std::string, Blob>> batch;
                for (std::size_t i = 0; i < ids.size(); ++i)
                    batch.emplace_back(ids[i], std::move(blobs[i]));
                try {
                    ProxyClient recipient(rq.body.at("host").get<std::string>(),
                                          rq.body.at("port").get<int>());
                    rs.body = {{"ok", recipient.stage(batch)}};
                } catch (const ProxyError&) {
                    throw;
                } catch (const std::exception& e) {
                    throw ProxyError(ErrorKind::ServiceInvocationError, e.what());
                }
                break;
            }
            case Op::Stage: {
                auto ids = ids_of(rq.body);
                if (ids.size() != rq.blobs.size())
                    throw ProxyError(ErrorKind::InvocationParameterError,
                                     "stage id/payload count mismatch");
                std::vector<std::pair<std::string, Blob>> batch;
                for (std::size_t i = 0; i < ids.size(); ++i)
                    batch.emplace_back(ids[i], rq.blobs[i]);
                rs.body = {{"ok", proxy_.stage(batch)}};
                break;
            }
            case Op::ReturnData: {
                rs.blobs = proxy_.return_data(ids_of(rq.body));
                json sizes = json::array();
                for (const Blob& b : rs.blobs) sizes.push_back(b.size());
                rs.body = {{"sizes", sizes}};
                break;
            }
            case Op::FlushTempData: {
                rs.body = {{"ok", proxy_.flush_temp_data(ids_of(rq.body))}};
                break;
            }
            case Op::AddService: {
                ServiceBehavior b;
                double delay = 0.0;
                b.spec = wire::spec_from_json(rq.body.at("spec"), &delay);
                b.synthetic_compute_delay_ms = delay;
                proxy_.add_service(b);
                break;
            }
            case Op::RemoveService: {
                proxy_.remove_service(rq.body.at("service").get<std::string>());
                break;
            }
            case Op::ListServices: {
                rs.body = {{"services", proxy_.list_services()}};
                break;
            }
            case Op::ListOperations: {
                rs.body = {{"operations", proxy_.list_operations(
                                              rq.body.at("service").get<std::string>())}};
                break;
            }
            case Op::ListOpParameters: {
                rs.body = {{"parameters",
                            proxy_.list_op_parameters(
                                rq.body.at("service").get<std::string>(),
                                rq.body.at("op").get<std::string>())}};
                break;
            }
            case Op::ListOpReturnType: {
                rs.body = {{"return_type",
                            proxy_.list_op_return_type(
                                rq.body.at("service").get<std::string>(),
                                rq.body.at("op").get<std::string>())}};
                break;
            }
        }
    } catch (const ProxyError& e) {
        rs.status = static_cast<std::uint8_t>(e.kind);
        rs.body = {{"detail", e.what()}};
        rs.blobs.clear();
    } catch (const std::exception& e) {
        rs.status = static_cast<std::uint8_t>(ErrorKind::ServiceInvocationError);
        rs.body = {{"detail", e.what()}};
        rs.blobs.clear();
    }
    return rs;
}

}  // namespace circulate
