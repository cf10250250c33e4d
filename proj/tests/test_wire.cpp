#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "circulate/net.hpp"

using namespace circulate;
namespace fs = std::filesystem;

namespace {

struct SpoolDir {
    fs::path path;
    explicit SpoolDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("circulate-wire-" + tag + "-" + make_uuid())) {}
    ~SpoolDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

ServiceBehavior behavior(const std::string& id, const std::string& op, int arity,
                         TransformSpec t) {
    ServiceBehavior b;
    b.spec.service_id = id;
    b.spec.operations.push_back({op, arity, t});
    return b;
}

Blob bytes_of(const std::string& s) { return Blob(s.begin(), s.end()); }

}  // namespace

TEST_CASE("frame round-trip") {
    wire::Message m;
    m.op = wire::Op::Stage;
    m.correlation = wire::fresh_correlation_id();
    m.body = {{"ids", {"a", "b"}}};
    m.blobs = {bytes_of("hello"), generate_payload(3, 4096), Blob{}};

    for (bool as_response : {false, true}) {
        wire::Message src = m;
        if (as_response) src.status = 3;
        auto encoded = wire::encode(src, as_response);
        wire::Message back = wire::decode(encoded.data(), encoded.size(), as_response);
        CHECK(back.version == wire::kVersion);
        CHECK(back.op == src.op);
        CHECK(back.correlation == src.correlation);
        CHECK(back.status == (as_response ? 3 : 0));
        CHECK(back.body == src.body);
        REQUIRE(back.blobs.size() == 3);
        CHECK(back.blobs[0] == src.blobs[0]);
        CHECK(back.blobs[1] == src.blobs[1]);
        CHECK(back.blobs[2].empty());
    }
}

TEST_CASE("frame layout is the documented byte sequence") {
    wire::Message m;
    m.op = wire::Op::Upload;
    m.correlation.fill(0xab);
    m.body = nlohmann::json::object();
    m.blobs = {bytes_of("xy")};
    auto bytes = wire::encode(m, false);
    // version, opcode, 16-byte correlation id
    REQUIRE(bytes.size() == 1 + 1 + 16 + 4 + 2 + 8 + 2);
    CHECK(bytes[0] == 1);
    CHECK(bytes[1] == 2);
    for (int i = 2; i < 18; ++i) CHECK(bytes[static_cast<std::size_t>(i)] == 0xab);
    // u32 be json length = 2 ("{}")
    CHECK(bytes[18] == 0);
    CHECK(bytes[21] == 2);
    CHECK(bytes[22] == '{');
    CHECK(bytes[23] == '}');
    // u64 be blob length = 2
    CHECK(bytes[31] == 2);
    CHECK(bytes[32] == 'x');
    CHECK(bytes[33] == 'y');
}

TEST_CASE("decode rejects bad version, opcode and truncation") {
    wire::Message m;
    m.op = wire::Op::Invoke;
    auto good = wire::encode(m, false);
    auto bad_version = good;
    bad_version[0] = 9;
    CHECK_THROWS(wire::decode(bad_version.data(), bad_version.size(), false));
    auto bad_op = good;
    bad_op[1] = 13;
    CHECK_THROWS(wire::decode(bad_op.data(), bad_op.size(), false));
    CHECK_THROWS(wire::decode(good.data(), good.size() / 2, false));
}

TEST_CASE("service spec json round-trip") {
    ServiceBehavior b = behavior("svc", "op1", 2, TransformSpec::ratio(7, 40));
    b.spec.operations.push_back({"op2", -1, TransformSpec::ratio_of_concat(1, 5)});
    b.spec.host_node = "hostX";
    b.synthetic_compute_delay_ms = 2.5;
    double delay = 0.0;
    ServiceSpec back = wire::spec_from_json(
        wire::spec_to_json(b.spec, b.synthetic_compute_delay_ms), &delay);
    CHECK(back.service_id == "svc");
    CHECK(back.host_node == "hostX");
    CHECK(delay == 2.5);
    REQUIRE(back.operations.size() == 2);
    CHECK(back.operations[0].transform.ratio_num == 7);
    CHECK(back.operations[0].transform.ratio_den == 40);
    CHECK(back.operations[1].arity == -1);
    CHECK(back.operations[1].transform.kind == TransformKind::RatioOfConcat);
}

TEST_CASE("client/server: full operation surface over TCP") {
    SpoolDir dir("server");
    Proxy proxy(dir.path);
    ProxyServer server(proxy);
    ProxyClient client("127.0.0.1", server.port());

    // admin + queries
    ServiceBehavior dual = behavior("dual", "first", 1, TransformSpec::identity());
    dual.spec.operations.push_back({"second", 2, TransformSpec::ratio_of_concat(1, 2)});
    client.add_service(dual);
    CHECK(client.list_services() == std::vector<std::string>{"dual"});
    CHECK(client.list_operations("dual") ==
          std::vector<std::string>{"first", "second"});
    CHECK(client.list_op_parameters("dual", "second").size() == 2);
    CHECK(client.list_op_return_type("dual", "first") == "blob");

    // upload / invoke / return_data
    Blob payload = generate_payload(5, 10000);
    auto ids = client.upload({payload, bytes_of("abc")});
    REQUIRE(ids.size() == 2);
    CHECK(client.return_data({ids[1], ids[0]})[0] == bytes_of("abc"));
    auto [rid, rsize] = client.invoke_sized("dual", "first", {ids[0]});
    CHECK(rsize == 10000);
    CHECK(content_hash(client.return_data({rid})[0]) != content_hash(payload));

    // flush
    CHECK(client.flush_temp_data({ids[0], ids[1], rid}));
    try {
        client.return_data({rid});
        FAIL("expected ProxyError");
    } catch (const ProxyError& e) {
        CHECK(e.kind == ErrorKind::VariableNotFoundError);
    }

    client.remove_service("dual");
    CHECK(client.list_services().empty());
}

TEST_CASE("error kinds survive the wire") {
    SpoolDir dir("errors");
    Proxy proxy(dir.path);
    ProxyServer server(proxy);
    ProxyClient client("127.0.0.1", server.port());
    client.add_service(behavior("seq", "grow", 1, TransformSpec::ratio(6, 5)));

    auto kind_of = [&](auto&& fn) {
        try {
            fn();
        } catch (const ProxyError& e) {
            return e.kind;
        }
        return ErrorKind{};
    };
    CHECK(kind_of([&] { client.invoke("nope", "x", {}); }) ==
          ErrorKind::InvocationParameterError);
    CHECK(kind_of([&] { client.invoke("seq", "grow", {"missing"}); }) ==
          ErrorKind::VariableNotFoundError);
    CHECK(kind_of([&] {
        client.add_service(behavior("seq", "grow", 1, TransformSpec::identity()));
    }) == ErrorKind::ProxyAdminError);
    CHECK(kind_of([&] { client.remove_service("ghost"); }) ==
          ErrorKind::VariableNotFoundError);
    CHECK(kind_of([&] { client.list_operations("ghost"); }) ==
          ErrorKind::VariableNotFoundError);
}

TEST_CASE("stage over the wire and proxy-to-proxy deliver") {
    SpoolDir d1("net-src"), d2("net-dst");
    Proxy src(d1.path), dst(d2.path);
    ProxyServer s1(src), s2(dst);
    ProxyClient c1("127.0.0.1", s1.port());
    ProxyClient c2("127.0.0.1", s2.port());

    std::string staged = make_uuid();
    CHECK(c2.stage({{staged, bytes_of("direct")}}));
    CHECK(c2.stage({{staged, bytes_of("direct")}}));  // idempotent re-send
    CHECK(dst.stored_count() == 1);

    std::vector<Blob> blobs = {generate_payload(1, 5000), generate_payload(2, 6000)};
    auto ids = c1.upload(blobs);
    CHECK(c1.deliver("127.0.0.1", s2.port(), ids));
    auto back = c2.return_data(ids);
    CHECK(content_hash(back[0]) == content_hash(blobs[0]));
    CHECK(content_hash(back[1]) == content_hash(blobs[1]));
    CHECK(src.stored_count() == 2);  // sender keeps its copies

    try {
        c1.deliver("127.0.0.1", 1, {ids[0]});  // unreachable recipient
        FAIL("expected ProxyError");
    } catch (const ProxyError& e) {
        CHECK(e.kind == ErrorKind::ServiceInvocationError);
    }
}

TEST_CASE("concurrent clients share one server") {
    SpoolDir dir("multi");
    Proxy proxy(dir.path);
    ProxyServer server(proxy);
    proxy.add_service(behavior("id", "copy", 1, TransformSpec::identity()));

    std::vector<std::thread> threads;
    std::atomic<int> failures{0};
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            try {
                ProxyClient client("127.0.0.1", server.port());
                for (int i = 0; i < 10; ++i) {
                    Blob b = generate_payload(static_cast<std::uint64_t>(t * 100 + i),
                                              1000 + t);
                    auto ids = client.upload({b});
                    std::string out = client.invoke("id", "copy", ids);
                    if (client.return_data({out})[0].size() != b.size()) ++failures;
                }
            } catch (...) {
                ++failures;
            }
        });
    for (auto& th : threads) th.join();
    CHECK(failures == 0);
}
