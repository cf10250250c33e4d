#include "circulate/proxy.hpp"

#include <fstream>
#include <random>

namespace circulate {

namespace fs = std::filesystem;

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvocationParameterError: return "InvocationParameterError";
        case ErrorKind::VariableNotFoundError: return "VariableNotFoundError";
        case ErrorKind::ServiceInvocationError: return "ServiceInvocationError";
        case ErrorKind::ProxyAdminError: return "ProxyAdminError";
    }
    return "?";
}

std::string make_uuid() {
    static std::mutex mu;
    static std::mt19937_64 rng{std::random_device{}()};
    std::uint64_t hi, lo;
    {
        std::lock_guard lock(mu);
        hi = rng();
        lo = rng();
    }
    // RFC 4122 version/variant bits
    hi = (hi & ~0xf000ULL) | 0x4000ULL;
    lo = (lo & ~(3ULL << 62)) | (1ULL << 63);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(36);
    auto emit = [&](std::uint64_t w, int nibbles) {
        for (int i = nibbles - 1; i >= 0; --i) out.push_back(hex[(w >> (4 * i)) & 0xf]);
    };
    emit(hi >> 32, 8); out.push_back('-');
    emit(hi >> 16, 4); out.push_back('-');
    emit(hi, 4); out.push_back('-');
    emit(lo >> 48, 4); out.push_back('-');
    emit(lo, 12);
    return out;
}

Proxy::Proxy(fs::path spool_dir, ProxyOptions options)
    : spool_(std::move(spool_dir)), options_(options) {
    if (options_.worker_limit < 1)
        throw std::invalid_argument("worker_limit must be positive");
    fs::create_directories(spool_);
    // crash recovery: anything already spooled is a live blob
    for (const auto& e : fs::directory_iterator(spool_)) {
        if (!e.is_regular_file() || e.path().extension() != ".blob") continue;
        Bytes n = static_cast<Bytes>(e.file_size());
        store_[e.path().stem().string()] = n;
        stored_bytes_ += n;
    }
    for (int i = 0; i < options_.worker_limit; ++i)
        workers_.emplace_back([this] { worker_loop(); });
}

Proxy::~Proxy() {
    {
        std::lock_guard lock(queue_mu_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    for (auto& w : workers_) w.join();
}

void Proxy::worker_loop() {
    for (;;) {
        Task task;
        {
            std::unique_lock lock(queue_mu_);
            queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            task = std::move(queue_.front());
            queue_.pop_front();
        }
        try {
            task.done.set_value(task.work());
        } catch (...) {
            task.done.set_exception(std::current_exception());
        }
    }
}

// --- registry ----------------------------------------------------------------

void Proxy::add_service(const ServiceBehavior& behavior) {
    std::lock_guard lock(mu_);
    const std::string& id = behavior.spec.service_id;
    if (registry_.count(id))
        throw ProxyError(ErrorKind::ProxyAdminError,
                         "service '" + id + "' already maintained by the proxy");
    registry_[id] = behavior;
}

void Proxy::remove_service(const std::string& service_id) {
    std::lock_guard lock(mu_);
    if (!registry_.erase(service_id))
        throw ProxyError(ErrorKind::VariableNotFoundError,
                         "service '" + service_id + "' is not maintained");
}

std::vector<std::string> Proxy::list_services() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, b] : registry_) out.push_back(id);
    return out;
}

std::vector<std::string> Proxy::list_operations(const std::string& service_id) const {
    std::lock_guard lock(mu_);
    auto it = registry_.find(service_id);
    if (it == registry_.end())
        throw ProxyError(ErrorKind::VariableNotFoundError,
                         "service '" + service_id + "' is not maintained");
    std::vector<std::string> out;
    for (const auto& op : it->second.spec.operations) out.push_back(op.name);
    return out;
}

std::vector<std::string> Proxy::list_op_parameters(const std::string& service_id,
                                                   const std::string& op) const {
    std::lock_guard lock(mu_);
    auto it = registry_.find(service_id);
    if (it == registry_.end())
        throw ProxyError(ErrorKind::VariableNotFoundError,
                         "service '" + service_id + "' is not maintained");
    const OperationSpec* spec = it->second.spec.find_op(op);
    if (!spec)
        throw ProxyError(ErrorKind::VariableNotFoundError,
                         "operation '" + op + "' is not maintained");
    if (spec->arity < 0) return {"blob..."};
    return std::vector<std::string>(static_cast<std::size_t>(spec->arity), "blob");
}

std::string Proxy::list_op_return_type(const std::string& service_id,
                                       const std::string& op) const {
    list_op_parameters(service_id, op);  // same validation
    return "blob";
}

// --- blob persistence --------------------------------------------------------

fs::path Proxy::blob_path(const std::string& id) const {
    return spool_ / (id + ".blob");
}

void Proxy::persist_as(const std::string& id, const Blob& payload) {
    std::ofstream out(blob_path(id), std::ios::binary | std::ios::trunc);
    if (!out ||
        !out.write(reinterpret_cast<const char*>(payload.data()),
                   static_cast<std::streamsize>(payload.size())))
        throw ProxyError(ErrorKind::ServiceInvocationError,
                         "cannot persist blob " + id);
}

std::string Proxy::persist(Blob payload) {
    Bytes n = static_cast<Bytes>(payload.size());
    {
        std::lock_guard lock(mu_);
        if (options_.disk_quota > 0 && stored_bytes_ + n > options_.disk_quota)
            throw ProxyError(ErrorKind::ServiceInvocationError,
                             "spool quota exceeded");
        stored_bytes_ += n;
    }
    std::string id = make_uuid();
    persist_as(id, payload);
    std::lock_guard lock(mu_);
    store_[id] = n;
    return id;
}

Blob Proxy::read_blob(const std::string& id) const {
    std::ifstream in(blob_path(id), std::ios::binary);
    if (!in)
        throw ProxyError(ErrorKind::ServiceInvocationError,
                         "blob file missing for " + id);
    Blob out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

// --- data plane --------------------------------------------------------------

std::vector<std::string> Proxy::upload(const std::vector<Blob>& payloads) {
    if (payloads.empty())
        throw ProxyError(ErrorKind::InvocationParameterError,
                         "upload requires at least one payload");
    std::vector<std::string> ids;
    ids.reserve(payloads.size());
    for (const Blob& p : payloads) ids.push_back(persist(p));
    return ids;
}

std::string Proxy::run_invoke(const std::string& service_id, const std::string& op,
                              const std::vector<std::string>& param_ids,
                              Bytes size_hint) {
    ServiceBehavior behavior;
    {
        std::lock_guard lock(mu_);
        auto it = registry_.find(service_id);
        if (it == registry_.end())
            throw ProxyError(ErrorKind::InvocationParameterError,
                             "service '" + service_id + "' is not maintained");
        behavior = it->second;
        for (const auto& id : param_ids)
            if (!store_.count(id))
                throw ProxyError(ErrorKind::VariableNotFoundError,
                                 "no data stored under " + id);
    }
    const OperationSpec* spec = behavior.spec.find_op(op);
    if (!spec)
        throw ProxyError(ErrorKind::InvocationParameterError,
                         "service '" + service_id + "' has no operation '" + op + "'");
    if (spec->arity >= 0 &&
        static_cast<std::size_t>(spec->arity) != param_ids.size())
        throw ProxyError(ErrorKind::InvocationParameterError,
                         "operation '" + op + "' expects " +
                             std::to_string(spec->arity) + " parameters, got " +
                             std::to_string(param_ids.size()));

    std::vector<Blob> inputs;
    inputs.reserve(param_ids.size());
    for (const auto& id : param_ids) inputs.push_back(read_blob(id));
    std::vector<const Blob*> ptrs;
    for (const Blob& b : inputs) ptrs.push_back(&b);

    Blob result;
    try {
        result = apply(behavior, op, ptrs, size_hint);
    } catch (const ProxyError&) {
        throw;
    } catch (const std::exception& e) {
        throw ProxyError(ErrorKind::ServiceInvocationError, e.what());
    }
    std::string id = persist(std::move(result));
    std::lock_guard lock(mu_);
    completion_log_.push_back(id);
    return id;
}

std::future<std::string> Proxy::invoke_async(const std::string& service_id,
                                             const std::string& op,
                                             const std::vector<std::string>& param_ids,
                                             Bytes size_hint) {
    Task task;
    task.work = [this, service_id, op, param_ids, size_hint] {
        return run_invoke(service_id, op, param_ids, size_hint);
    };
    std::future<std::string> fut = task.done.get_future();
    {
        std::lock_guard lock(queue_mu_);
        if (stopping_) throw std::runtime_error("proxy is shutting down");
        queue_.push_back(std::move(task));
    }
    queue_cv_.notify_one();
    return fut;
}

std::string Proxy::invoke(const std::string& service_id, const std::string& op,
                          const std::vector<std::string>& param_ids,
                          Bytes size_hint) {
    return invoke_async(service_id, op, param_ids, size_hint).get();
}

bool Proxy::deliver(Proxy& recipient, const std::vector<std::string>& ids) {
    std::vector<std::pair<std::string, Blob>> batch;
    {
        std::lock_guard lock(mu_);
        for (const auto& id : ids)
            if (!store_.count(id))
                throw ProxyError(ErrorKind::VariableNotFoundError,
                                 "no data stored under " + id);
    }
    for (const auto& id : ids) batch.emplace_back(id, read_blob(id));
    try {
        return recipient.stage(batch);
    } catch (const ProxyError&) {
        throw;
    } catch (const std::exception& e) {
        throw ProxyError(ErrorKind::ServiceInvocationError, e.what());
    }
}

bool Proxy::stage(const std::vector<std::pair<std::string, Blob>>& batch) {
    // idempotent for byte-identical re-delivery; conflicting content is refused
    for (const auto& [id, payload] : batch) {
        bool known;
        {
            std::lock_guard lock(mu_);
            known = store_.count(id) > 0;
        }
        if (known) {
            Blob existing = read_blob(id);
            if (existing != payload)
                throw ProxyError(ErrorKind::ServiceInvocationError,
                                 "id " + id + " already bound to different data");
            continue;
        }
        Bytes n = static_cast<Bytes>(payload.size());
        {
            std::lock_guard lock(mu_);
            if (options_.disk_quota > 0 && stored_bytes_ + n > options_.disk_quota)
                throw ProxyError(ErrorKind::ServiceInvocationError,
                                 "spool quota exceeded");
            stored_bytes_ += n;
        }
        persist_as(id, payload);
        std::lock_guard lock(mu_);
        store_[id] = n;
    }
    return true;
}

std::vector<Blob> Proxy::return_data(const std::vector<std::string>& ids) {
    {
        std::lock_guard lock(mu_);
        for (const auto& id : ids)
            if (!store_.count(id))
                throw ProxyError(ErrorKind::VariableNotFoundError,
                                 "no data stored under " + id);
    }
    std::vector<Blob> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(read_blob(id));
    return out;
}

bool Proxy::flush_temp_data(const std::vector<std::string>& ids) {
    std::lock_guard lock(mu_);
    // all-or-nothing: validate every id before deleting any
    for (const auto& id : ids)
        if (!store_.count(id))
            throw ProxyError(ErrorKind::VariableNotFoundError,
                             "no data stored under " + id);
    for (const auto& id : ids) {
        stored_bytes_ -= store_[id];
        store_.erase(id);
        std::error_code ec;
        fs::remove(blob_path(id), ec);
    }
    return true;
}

// --- introspection -----------------------------------------------------------

bool Proxy::has(const std::string& id) const {
    std::lock_guard lock(mu_);
    return store_.count(id) > 0;
}

Bytes Proxy::size_of(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = store_.find(id);
    if (it == store_.end())
        throw ProxyError(ErrorKind::VariableNotFoundError,
                         "no data stored under " + id);
    return it->second;
}

std::size_t Proxy::stored_count() const {
    std::lock_guard lock(mu_);
    return store_.size();
}

std::vector<std::string> Proxy::completion_log() const {
    std::lock_guard lock(mu_);
    return completion_log_;
}

}  // namespace circulate
