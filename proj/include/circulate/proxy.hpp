#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "circulate/services.hpp"
#include "circulate/types.hpp"

namespace circulate {

enum class ErrorKind : std::uint8_t {
    InvocationParameterError = 1,
    VariableNotFoundError = 2,
    ServiceInvocationError = 3,
    ProxyAdminError = 4,
};

const char* to_string(ErrorKind k);

/// The proxy's error surface. Only ServiceInvocationError is retryable.
struct ProxyError : std::runtime_error {
    ErrorKind kind;
    ProxyError(ErrorKind k, const std::string& detail)
        : std::runtime_error(detail), kind(k) {}
};

/// Fresh 128-bit random id in canonical 8-4-4-4-12 hex form.
std::string make_uuid();

struct ProxyOptions {
    int worker_limit = 4;
    Bytes disk_quota = 0;  // 0 = unlimited
};

/// A Circulate proxy: service gateway plus disk-backed blob store. Invokes
/// are executed by a bounded worker pool with strict FIFO admission; every
/// other operation runs inline on the caller's thread. Blobs persist one
/// file per UUID under the spool directory and survive restarts.
class Proxy {
public:
    Proxy(std::filesystem::path spool_dir, ProxyOptions options = {});
    ~Proxy();

    Proxy(const Proxy&) = delete;
    Proxy& operator=(const Proxy&) = delete;

    // --- service registry ---
    void add_service(const ServiceBehavior& behavior);
    void remove_service(const std::string& service_id);
    std::vector<std::string> list_services() const;
    std::vector<std::string> list_operations(const std::string& service_id) const;
    std::vector<std::string> list_op_parameters(const std::string& service_id,
                                                const std::string& op) const;
    std::string list_op_return_type(const std::string& service_id,
                                    const std::string& op) const;

    // --- data plane ---
    std::vector<std::string> upload(const std::vector<Blob>& payloads);
    std::string invoke(const std::string& service_id, const std::string& op,
                       const std::vector<std::string>& param_ids,
                       Bytes size_hint = 0);
    std::future<std::string> invoke_async(const std::string& service_id,
                                          const std::string& op,
                                          const std::vector<std::string>& param_ids,
                                          Bytes size_hint = 0);
    bool deliver(Proxy& recipient, const std::vector<std::string>& ids);
    bool stage(const std::vector<std::pair<std::string, Blob>>& batch);
    std::vector<Blob> return_data(const std::vector<std::string>& ids);
    bool flush_temp_data(const std::vector<std::string>& ids);

    // --- introspection ---
    bool has(const std::string& id) const;
    Bytes size_of(const std::string& id) const;
    std::size_t stored_count() const;
    const std::filesystem::path& spool() const { return spool_; }
    /// ids in the order their invokes finished; used to assert FIFO order.
    std::vector<std::string> completion_log() const;

private:
    struct Task {
        std::function<std::string()> work;
        std::promise<std::string> done;
    };

    std::string run_invoke(const std::string& service_id, const std::string& op,
                           const std::vector<std::string>& param_ids,
                           Bytes size_hint);
    std::string persist(Blob payload);  // returns fresh uuid
    void persist_as(const std::string& id, const Blob& payload);
    Blob read_blob(const std::string& id) const;
    std::filesystem::path blob_path(const std::string& id) const;
    void worker_loop();

    std::filesystem::path spool_;
    ProxyOptions options_;

    mutable std::mutex mu_;
    std::map<std::string, ServiceBehavior> registry_;
    std::map<std::string, Bytes> store_;  // id -> size; payload lives on disk
    Bytes stored_bytes_ = 0;
    std::vector<std::string> completion_log_;

    std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::deque<Task> queue_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

}  // namespace circulate
