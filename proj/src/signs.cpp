#include "twistrank/signs.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include "twistrank/error.hpp"

namespace twistrank {

namespace {

constexpr u64 kRepresentativeLimit = 1000000;

std::mutex& key_mutex(const std::string& key) {
    static std::mutex registry_guard;
    static std::map<std::string, std::unique_ptr<std::mutex>> registry;
    std::lock_guard lock(registry_guard);
    auto& slot = registry[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

void write_cache(const std::filesystem::path& path, i64 A, i64 B, const BaseCurveData& data) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create cache dir " + path.parent_path().string());
    const nlohmann::json j = {{"A", A}, {"B", B}, {"conductor", data.N_E}, {"root_number", data.omega_E}};
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out << j.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot move cache file into place");
}

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidArgument, "base URL needs a scheme");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string_view to_string(DataSource source) {
    switch (source) {
        case DataSource::config: return "config";
        case DataSource::remote: return "remote";
        case DataSource::cache: return "cache";
    }
    return "config";
}

BaseCurveData make_base_data(u64 N_E, int omega_E, DataSource source) {
    if (N_E < 1) throw Error(ErrorCode::InvalidArgument, "conductor must be positive");
    if (omega_E != 1 && omega_E != -1) throw Error(ErrorCode::InvalidArgument, "root number must be +1 or -1");
    return {N_E, omega_E, source};
}

std::optional<int> root_number(u64 d, const BaseCurveData& base) {
    const i64 D = fundamental_discriminant(d);
    if (gcd(static_cast<u64>(D), base.N_E) != 1) return std::nullopt;
    return kronecker(D, -static_cast<i64>(base.N_E)) * base.omega_E;
}

ClassSign class_sign(u64 a, const BaseCurveData& base, std::size_t check_count) {
    const u64 q = sign_modulus(base);
    a %= q;
    if (gcd(a, q) != 1) throw Error(ErrorCode::NotCoprime, "class must be invertible mod 4 N_E");
    ClassSign result;
    const SquarefreeTester squarefree;
    for (u64 d = a; d <= kRepresentativeLimit && result.checked < check_count; d += q) {
        if (d <= 1 || !squarefree(d)) continue;
        const auto s = root_number(d, base);
        if (!s) continue;
        if (result.checked == 0) {
            result.sign = *s;
            result.representative = d;
        } else if (*s != result.sign) {
            result.constant = false;
        }
        ++result.checked;
    }
    if (result.checked == 0) {
        throw Error(ErrorCode::NoValidRepresentative, "class " + std::to_string(a) + " mod " + std::to_string(q));
    }
    return result;
}

FetchOptions fetch_options_from_env() {
    FetchOptions opts;
    if (const char* url = std::getenv("TWISTRANK_BASE_URL")) opts.base_url = url;
    if (const char* dir = std::getenv("TWISTRANK_CACHE_DIR")) opts.cache_dir = dir;
    return opts;
}

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, i64 A, i64 B) {
    return cache_dir / ("curve_" + std::to_string(A) + "_" + std::to_string(B) + ".json");
}

BaseCurveData parse_base_data_json(const std::string& body, DataSource source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CurveNotFound, std::string("unparseable response: ") + e.what());
    }
    if (j.is_object() && j.contains("data")) {
        const auto& data = j["data"];
        if (!data.is_array() || data.empty()) throw Error(ErrorCode::CurveNotFound, "empty result set");
        j = data[0];
    }
    if (!j.is_object() || !j.contains("conductor") || !j.contains("root_number")) {
        throw Error(ErrorCode::CurveNotFound, "response lacks conductor/root_number");
    }
    try {
        return make_base_data(j["conductor"].get<u64>(), j["root_number"].get<int>(), source);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CurveNotFound, std::string("bad field types: ") + e.what());
    }
}

BaseCurveData fetch_base_data(i64 A, i64 B, const FetchOptions& opts) {
    if (opts.config) {
        BaseCurveData data = *opts.config;
        data.source = DataSource::config;
        return data;
    }
    const bool caching = !opts.cache_dir.empty();
    const auto path = caching ? cache_path(opts.cache_dir, A, B) : std::filesystem::path{};
    std::unique_lock<std::mutex> flight;
    if (caching) flight = std::unique_lock(key_mutex(path.string()));

    if (caching && std::filesystem::exists(path)) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_base_data_json(ss.str(), DataSource::cache);
    }
    if (opts.offline) throw Error(ErrorCode::CacheMiss, "offline and no cached data for this curve");
    if (opts.base_url.empty()) throw Error(ErrorCode::NetworkUnavailable, "no base URL configured");

    const Url url = split_url(opts.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(opts.timeout_seconds, 0);
    client.set_read_timeout(opts.timeout_seconds, 0);
    client.set_follow_location(true);
    const httplib::Params params{{"A", std::to_string(A)}, {"B", std::to_string(B)}};
    const auto res = client.Get(url.path, params, httplib::Headers{});
    if (!res) throw Error(ErrorCode::NetworkUnavailable, "request failed: " + httplib::to_string(res.error()));
    if (res->status == 404) throw Error(ErrorCode::CurveNotFound, "no curve with these coefficients");
    if (res->status != 200) {
        throw Error(ErrorCode::NetworkUnavailable, "HTTP status " + std::to_string(res->status));
    }
    BaseCurveData data = parse_base_data_json(res->body, DataSource::remote);
    if (caching) write_cache(path, A, B, data);
    return data;
}

}  // namespace twistrank
