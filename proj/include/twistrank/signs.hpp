#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "twistrank/arith.hpp"

namespace twistrank {

enum class DataSource { config, remote, cache };

std::string_view to_string(DataSource source);

/// Conductor and root number of the base curve. Both are taken as inputs.
struct BaseCurveData {
    u64 N_E = 1;
    int omega_E = 1;
    DataSource source = DataSource::config;
};

BaseCurveData make_base_data(u64 N_E, int omega_E, DataSource source = DataSource::config);

/// omega(E_d) = chi_D(-N_E) omega(E) when gcd(D, N_E) = 1, with D the
/// discriminant of Q(sqrt d). Returns nullopt when that gcd exceeds 1.
std::optional<int> root_number(u64 d, const BaseCurveData& base);

inline u64 sign_modulus(const BaseCurveData& base) { return 4 * base.N_E; }

struct ClassSign {
    int sign = 0;
    u64 representative = 0;  // least square-free d > 1 in the class with a defined sign
    std::size_t checked = 0;  // representatives compared for constancy
    bool constant = true;
};

/// Common root number of square-free d = a mod 4 N_E. Throws NotCoprime for
/// a not invertible and NoValidRepresentative when no d <= 10^6 in the class
/// has gcd(D, N_E) = 1.
ClassSign class_sign(u64 a, const BaseCurveData& base, std::size_t check_count = 50);

struct FetchOptions {
    /// Endpoint answering GET <base_url>?A=<A>&B=<B> with a JSON object
    /// holding `conductor` and `root_number`. Empty disables the network.
    std::string base_url;
    std::filesystem::path cache_dir;
    bool offline = false;
    /// Explicit values win over cache and network.
    std::optional<BaseCurveData> config;
    int timeout_seconds = 10;
};

/// Fills base_url and cache_dir from TWISTRANK_BASE_URL and
/// TWISTRANK_CACHE_DIR when set.
FetchOptions fetch_options_from_env();

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, i64 A, i64 B);

BaseCurveData fetch_base_data(i64 A, i64 B, const FetchOptions& opts);

/// Parses a response body; accepts the bare object or {"data": [object]}.
BaseCurveData parse_base_data_json(const std::string& body, DataSource source);

}  // namespace twistrank
