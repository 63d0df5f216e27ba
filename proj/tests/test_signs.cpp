#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "doctest.h"

#include "oracle.hpp"
#include "twistrank/error.hpp"
#include "twistrank/signs.hpp"

using namespace twistrank;
namespace fs = std::filesystem;

namespace {

const BaseCurveData kBase = make_base_data(1728, -1);

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("twistrank_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    return dir;
}

/// Serves GET /curve?A=..&B=.. on an ephemeral port for the lifetime of the object.
class FakeDatabase {
public:
    FakeDatabase() {
        server_.Get("/curve", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            const auto A = req.get_param_value("A");
            const auto B = req.get_param_value("B");
            if (A == "0" && B == "2") {
                res.set_content(R"({"data":[{"conductor":1728,"root_number":-1}]})", "application/json");
            } else if (A == "0" && B == "3") {
                res.set_content(R"({"conductor":3888,"root_number":1})", "application/json");
            } else if (A == "0" && B == "5") {
                res.status = 500;
            } else if (A == "0" && B == "7") {
                res.set_content("not json", "text/plain");
            } else {
                res.status = 404;
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeDatabase() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/curve"; }

    std::atomic<int> hits{0};

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST_CASE("base data of y^2 = x^3 + 2 agrees with PARI/GP") {
    std::ifstream in(oracle::fixture_path("base_curve.csv"));
    csv::next_line(in);
    const auto f = csv::split(*csv::next_line(in));
    CHECK(csv::parse_int<u64>(f[2]) == kBase.N_E);
    CHECK(csv::parse_int<int>(f[3]) == kBase.omega_E);
    CHECK(code_of([] { make_base_data(0, 1); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_base_data(11, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("root numbers of twists agree with PARI/GP where defined") {
    std::size_t compared = 0;
    for (const auto& [d, w] : oracle::root_number_fixtures()) {
        const auto ours = root_number(d, kBase);
        const bool defined = gcd(static_cast<u64>(std::llabs(fundamental_discriminant(d))), kBase.N_E) == 1;
        CHECK(ours.has_value() == defined);
        if (ours) {
            CHECK(*ours == w);
            ++compared;
        }
    }
    CHECK(compared > 100);
}

TEST_CASE("root number is constant on classes mod 4 N_E") {
    const u64 q = sign_modulus(kBase);
    CHECK(q == 6912);
    std::map<u64, int> seen;
    SquarefreeTester sf;
    for (u64 d = 2; d <= 100000; ++d) {
        if (!sf(d)) continue;
        const auto s = root_number(d, kBase);
        if (!s) continue;
        const auto [it, fresh] = seen.emplace(d % q, *s);
        REQUIRE(it->second == *s);
    }
    bool plus = false, minus = false;
    for (const auto& [a, s] : seen) {
        const auto cs = class_sign(a, kBase);
        CHECK(cs.sign == s);
        CHECK(cs.constant);
        CHECK(cs.representative % q == a);
        (s > 0 ? plus : minus) = true;
    }
    CHECK(plus);
    CHECK(minus);
    CHECK(code_of([] { class_sign(2, kBase); }) == ErrorCode::NotCoprime);
    CHECK(code_of([] { class_sign(3 + 6912, kBase); }) == ErrorCode::NotCoprime);
    CHECK(code_of([] { class_sign(7, kBase); }) == ErrorCode::NoValidRepresentative);
}

TEST_CASE("response parsing") {
    const auto a = parse_base_data_json(R"({"conductor": 11, "root_number": 1})", DataSource::remote);
    CHECK(a.N_E == 11);
    CHECK(a.omega_E == 1);
    CHECK(a.source == DataSource::remote);
    const auto b = parse_base_data_json(R"({"data":[{"conductor": 37, "root_number": -1}]})", DataSource::cache);
    CHECK(b.N_E == 37);
    CHECK(b.omega_E == -1);
    CHECK(code_of([] { parse_base_data_json("{", DataSource::remote); }) == ErrorCode::CurveNotFound);
    CHECK(code_of([] { parse_base_data_json(R"({"data":[]})", DataSource::remote); }) == ErrorCode::CurveNotFound);
    CHECK(code_of([] { parse_base_data_json(R"({"conductor":"x","root_number":1})", DataSource::remote); }) ==
          ErrorCode::CurveNotFound);
}

TEST_CASE("fetch order: config, cache, network") {
    FakeDatabase db;
    const fs::path dir = fresh_dir("fetch");
    FetchOptions opts;
    opts.base_url = db.url();
    opts.cache_dir = dir;

    SUBCASE("explicit values win") {
        FetchOptions o = opts;
        o.config = make_base_data(99, 1);
        const auto got = fetch_base_data(0, 2, o);
        CHECK(got.N_E == 99);
        CHECK(got.source == DataSource::config);
        CHECK(db.hits == 0);
    }
    SUBCASE("remote, then cache") {
        const auto first = fetch_base_data(0, 2, opts);
        CHECK(first.N_E == 1728);
        CHECK(first.omega_E == -1);
        CHECK(first.source == DataSource::remote);
        CHECK(fs::exists(cache_path(dir, 0, 2)));
        const auto second = fetch_base_data(0, 2, opts);
        CHECK(second.source == DataSource::cache);
        CHECK(second.N_E == 1728);
        CHECK(db.hits == 1);
        FetchOptions off = opts;
        off.offline = true;
        off.base_url.clear();
        CHECK(fetch_base_data(0, 2, off).source == DataSource::cache);
        CHECK(fetch_base_data(0, 3, opts).N_E == 3888);
    }
    SUBCASE("concurrent cold fetches hit the server once") {
        std::vector<std::thread> pool;
        std::atomic<int> ok{0};
        for (int i = 0; i < 8; ++i) {
            pool.emplace_back([&] {
                if (fetch_base_data(0, 2, opts).N_E == 1728) ++ok;
            });
        }
        for (auto& t : pool) t.join();
        CHECK(ok == 8);
        CHECK(db.hits == 1);
    }
    SUBCASE("failures") {
        FetchOptions off = opts;
        off.offline = true;
        CHECK(code_of([&] { fetch_base_data(0, 2, off); }) == ErrorCode::CacheMiss);
        CHECK(code_of([&] { fetch_base_data(1, 1, opts); }) == ErrorCode::CurveNotFound);
        CHECK(code_of([&] { fetch_base_data(0, 5, opts); }) == ErrorCode::NetworkUnavailable);
        CHECK(code_of([&] { fetch_base_data(0, 7, opts); }) == ErrorCode::CurveNotFound);
        FetchOptions none = opts;
        none.base_url.clear();
        CHECK(code_of([&] { fetch_base_data(0, 2, none); }) == ErrorCode::NetworkUnavailable);
        FetchOptions dead = opts;
        dead.base_url = "http://127.0.0.1:1/curve";
        dead.timeout_seconds = 2;
        CHECK(code_of([&] { fetch_base_data(0, 2, dead); }) == ErrorCode::NetworkUnavailable);
        CHECK_FALSE(fs::exists(cache_path(dir, 0, 2)));
    }
    fs::remove_all(dir);
}

TEST_CASE("cache file naming") {
    CHECK(cache_path("/tmp/c", 0, 2) == fs::path("/tmp/c/curve_0_2.json"));
    CHECK(cache_path("/tmp/c", -7, 11) == fs::path("/tmp/c/curve_-7_11.json"));
    CHECK(to_string(DataSource::remote) == "remote");
}
