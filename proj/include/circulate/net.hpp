#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "circulate/proxy.hpp"
#include "circulate/wire.hpp"

namespace circulate {

namespace net {
/// Blocking, length-prefixed frame I/O over a connected socket.
void write_frame(int fd, const std::vector<std::uint8_t>& payload);
std::vector<std::uint8_t> read_frame(int fd);
int connect_tcp(const std::string& host, int port);
}  // namespace net

/// TCP front end for a Proxy: accepts connections and serves wire-protocol
/// frames until stopped. Each connection gets its own thread; FIFO admission
/// of invokes is still enforced by the proxy's worker queue.
class ProxyServer {
public:
    /// port 0 binds an ephemeral port; see port().
    ProxyServer(Proxy& proxy, int port = 0);
    ~ProxyServer();

    int port() const { return port_; }
    void stop();

private:
    void accept_loop();
    void serve(int fd);
    wire::Message dispatch(const wire::Message& request);

    Proxy& proxy_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::vector<std::thread> connections_;
};

/// Client side of the wire protocol; one persistent connection per instance.
/// Error responses re-throw as ProxyError with the original kind.
class ProxyClient {
public:
    ProxyClient(const std::string& host, int port);
    ~ProxyClient();

    ProxyClient(const ProxyClient&) = delete;
    ProxyClient& operator=(const ProxyClient&) = delete;

    std::string invoke(const std::string& service_id, const std::string& op,
                       const std::vector<std::string>& param_ids,
                       Bytes size_hint = 0);
    /// invoke plus the result size reported in the response, so callers can
    /// track sizes without ever pulling the payload.
    std::pair<std::string, Bytes> invoke_sized(const std::string& service_id,
                                               const std::string& op,
                                               const std::vector<std::string>& param_ids,
                                               Bytes size_hint = 0);
    std::vector<std::string> upload(const std::vector<Blob>& payloads);
    bool deliver(const std::string& recipient_host, int recipient_port,
                 const std::vector<std::string>& ids);
    bool stage(const std::vector<std::pair<std::string, Blob>>& batch);
    std::vector<Blob> return_data(const std::vector<std::string>& ids);
    bool flush_temp_data(const std::vector<std::string>& ids);
    void add_service(const ServiceBehavior& behavior);
    void remove_service(const std::string& service_id);
    std::vector<std::string> list_services();
    std::vector<std::string> list_operations(const std::string& service_id);
    std::vector<std::string> list_op_parameters(const std::string& service_id,
                                                const std::string& op);
    std::string list_op_return_type(const std::string& service_id,
                                    const std::string& op);

private:
    wire::Message call(wire::Message request);

    int fd_ = -1;
    std::mutex mu_;  // one in-flight request per connection
};

}  // namespace circulate
