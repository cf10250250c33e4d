#include <unistd.h>

#include "circulate/net.hpp"

namespace circulate {

using nlohmann::json;
using wire::Message;
using wire::Op;

ProxyClient::ProxyClient(const std::string& host, int port)
    : fd_(net::connect_tcp(host, port)) {}

ProxyClient::~ProxyClient() {
    if (fd_ >= 0) ::close(fd_);
}

Message ProxyClient::call(Message request) {
    std::lock_guard lock(mu_);
    request.correlation = wire::fresh_correlation_id();
    net::write_frame(fd_, wire::encode(request, false));
    auto payload = net::read_frame(fd_);
    Message response = wire::decode(payload.data(), payload.size(), true);
    if (response.correlation != request.correlation)
        throw std::runtime_error("correlation id mismatch");
    if (response.status != 0)
        throw ProxyError(static_cast<ErrorKind>(response.status),
                         response.body.value("detail", "remote proxy error"));
    return response;
}

std::string ProxyClient::invoke(const std::string& service_id, const std::string& op,
                                const std::vector<std::string>& param_ids,
                                Bytes size_hint) {
    Message rq;
    rq.op = Op::Invoke;
    rq.body = {{"service", service_id},
               {"op", op},
               {"params", param_ids},
               {"size_hint", size_hint}};
    return call(std::move(rq)).body.at("id").get<std::string>();
}

std::pair<std::string, Bytes> ProxyClient::invoke_sized(
    const std::string& service_id, const std::string& op,
    const std::vector<std::string>& param_ids, Bytes size_hint) {
    Message rq;
    rq.op = Op::Invoke;
    rq.body = {{"service", service_id},
               {"op", op},
               {"params", param_ids},
               {"size_hint", size_hint}};
    Message rs = call(std::move(rq));
    return {rs.body.at("id").get<std::string>(), rs.body.at("size").get<Bytes>()};
}

std::vector<std::string> ProxyClient::upload(const std::vector<Blob>& payloads) {
    Message rq;
    rq.op = Op::Upload;
    rq.blobs = payloads;
    return call(std::move(rq)).body.at("ids").get<std::vector<std::string>>();
}

bool ProxyClient::deliver(const std::string& recipient_host, int recipient_port,
                          const std::vector<std::string>& ids) {
    Message rq;
    rq.op = Op::Deliver;
    rq.body = {{"host", recipient_host}, {"port", recipient_port}, {"ids", ids}};
    return call(std::move(rq)).body.at("ok").get<bool>();
}

bool ProxyClient::stage(const std::vector<std::pair<std::string, Blob>>& batch) {
    Message rq;
    rq.op = Op::Stage;
    json ids = json::array();
    for (const auto& [id, payload] : batch) {
        ids.push_back(id);
        rq.blobs.push_back(payload);
    }
    rq.body = {{"ids", ids}};
    return call(std::move(rq)).body.at("ok").get<bool>();
}

std::vector<Blob> ProxyClient::return_data(const std::vector<std::string>& ids) {
    Message rq;
    rq.op = Op::ReturnData;
    rq.body = {{"ids", ids}};
    return call(std::move(rq)).blobs;
}

bool ProxyClient::flush_temp_data(const std::vector<std::string>& ids) {
    Message rq;
    rq.op = Op::FlushTempData;
    rq.body = {{"ids", ids}};
    return call(std::move(rq)).body.at("ok").get<bool>();
}

void ProxyClient::add_service(const ServiceBehavior& behavior) {
    Message rq;
    rq.op = Op::AddService;
    rq.body = {{"spec", wire::spec_to_json(behavior.spec,
                                           behavior.synthetic_compute_delay_ms)}};
    call(std::move(rq));
}

void ProxyClient::remove_service(const std::string& service_id) {
    Message rq;
    rq.op = Op::RemoveService;
    rq.body = {{"service", service_id}};
    call(std::move(rq));
}

std::vector<std::string> ProxyClient::list_services() {
    Message rq;
    rq.op = Op::ListServices;
    return call(std::move(rq)).body.at("services").get<std::vector<std::string>>();
}

std::vector<std::string> ProxyClient::list_operations(const std::string& service_id) {
    Message rq;
    rq.op = Op::ListOperations;
    rq.body = {{"service", service_id}};
    return call(std::move(rq)).body.at("operations").get<std::vector<std::string>>();
}

std::vector<std::string> ProxyClient::list_op_parameters(const std::string& service_id,
                                                         const std::string& op) {
    Message rq;
    rq.op = Op::ListOpParameters;
    rq.body = {{"service", service_id}, {"op", op}};
    return call(std::move(rq)).body.at("parameters").get<std::vector<std::string>>();
}

std::string ProxyClient::list_op_return_type(const std::string& service_id,
                                             const std::string& op) {
    Message rq;
    rq.op = Op::ListOpReturnType;
    rq.body = {{"service", service_id}, {"op", op}};
    return call(std::move(rq)).body.at("return_type").get<std::string>();
}

}  // namespace circulate
