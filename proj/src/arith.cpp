#include "twistrank/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "twistrank/error.hpp"

namespace twistrank {

namespace {

constexpr std::uint32_t kTrialBound = 1000;

const std::vector<std::uint32_t>& small_primes() {
    static const std::vector<std::uint32_t> primes = primes_up_to(kTrialBound);
    return primes;
}

bool miller_rabin_witness(u64 n, u64 a, u64 d, int s) {
    u64 x = powmod(a % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) return false;
    for (int r = 1; r < s; ++r) {
        x = mulmod(x, x, n);
        if (x == n - 1) return false;
    }
    return true;
}

u64 brent_rho(u64 n, std::mt19937_64& rng) {
    if (n % 2 == 0) return 2;
    for (;;) {
        const u64 c = rng() % (n - 1) + 1;
        u64 y = rng() % n;
        const u64 m = 128;
        u64 g = 1, r = 1, q = 1, x = 0, ys = 0;
        auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
        do {
            x = y;
            for (u64 i = 0; i < r; ++i) y = f(y);
            u64 k = 0;
            do {
                ys = y;
                for (u64 i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                g = gcd(q, n);
                k += m;
            } while (k < r && g == 1);
            r *= 2;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                g = gcd(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n) return g;
        // unlucky constant: retry with a fresh one
    }
}

void split_into(u64 n, std::mt19937_64& rng, std::vector<u64>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    const u64 f = brent_rho(n, rng);
    split_into(f, rng, out);
    split_into(n / f, rng, out);
}

int jacobi(u64 a, u64 n) {
    // n odd and positive
    a %= n;
    int t = 1;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            const u64 r = n % 8;
            if (r == 3 || r == 5) t = -t;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) t = -t;
        a %= n;
    }
    return n == 1 ? t : 0;
}

}  // namespace

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>((static_cast<u128>(a) * b) % m); }

u64 powmod(u64 base, u64 exp, u64 m) {
    if (m == 1) return 0;
    u64 result = 1;
    base %= m;
    while (exp) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

u64 gcd(u64 a, u64 b) { return std::gcd(a, b); }

bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++s;
    }
    // Bases known to be deterministic below 2^64 (Sinclair).
    for (u64 a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
        if (a % n == 0) continue;
        if (miller_rabin_witness(n, a, d, s)) return false;
    }
    return true;
}

Factorization factorize(u64 n, u64 seed) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "factorize(0)");
    Factorization result;
    for (std::uint32_t p : small_primes()) {
        if (static_cast<u64>(p) * p > n) break;
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            result.push_back({p, e});
        }
    }
    if (n == 1) return result;
    std::vector<u64> parts;
    std::mt19937_64 rng(seed);
    split_into(n, rng, parts);
    std::sort(parts.begin(), parts.end());
    for (u64 p : parts) {
        if (!result.empty() && result.back().p == p) {
            ++result.back().e;
        } else {
            result.push_back({p, 1});
        }
    }
    return result;
}

u64 unfactor(std::span<const PrimePower> f) {
    u64 n = 1;
    for (const auto& [p, e] : f) {
        for (int i = 0; i < e; ++i) n *= p;
    }
    return n;
}

int mobius(u64 n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "mobius(0)");
    const auto f = factorize(n);
    for (const auto& pe : f) {
        if (pe.e > 1) return 0;
    }
    return f.size() % 2 == 0 ? 1 : -1;
}

bool is_squarefree(u64 n) { return mobius(n) != 0; }

u64 euler_phi(u64 n) {
    u64 phi = n;
    for (const auto& pe : factorize(n)) phi = phi / pe.p * (pe.p - 1);
    return phi;
}

mpq_class phi_star(u64 n) {
    mpz_class num = 1, den = 1;
    for (const auto& pe : factorize(n)) {
        num *= static_cast<unsigned long>(pe.p - 1);
        den *= static_cast<unsigned long>(pe.p);
    }
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

int kronecker(i64 a, i64 n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int sign = 1;
    u64 m;
    if (n < 0) {
        if (a < 0) sign = -1;
        m = static_cast<u64>(-(n + 1)) + 1;
    } else {
        m = static_cast<u64>(n);
    }
    int v = 0;
    while (m % 2 == 0) {
        m /= 2;
        ++v;
    }
    if (v > 0) {
        if (a % 2 == 0) return 0;
        if (v % 2 == 1) {
            const i64 r = ((a % 8) + 8) % 8;
            if (r == 3 || r == 5) sign = -sign;
        }
    }
    if (m == 1) return sign;
    // reduce a into [0, m)
    const i128 red = ((static_cast<i128>(a) % static_cast<i128>(m)) + m) % m;
    return sign * jacobi(static_cast<u64>(red), m);
}

i64 fundamental_discriminant(u64 d) {
    if (d == 0 || !is_squarefree(d)) throw Error(ErrorCode::NotSquarefree, "d = " + std::to_string(d));
    if (d == 1) return 1;
    return d % 4 == 1 ? static_cast<i64>(d) : 4 * static_cast<i64>(d);
}

int valuation(const mpz_class& n, u64 p) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "valuation of zero");
    mpz_class m = abs(n);
    const mpz_class pp = static_cast<unsigned long>(p);
    int v = 0;
    while (mpz_divisible_p(m.get_mpz_t(), pp.get_mpz_t())) {
        m /= pp;
        ++v;
    }
    return v;
}

int valuation(u64 n, u64 p) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "valuation of zero");
    int v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

std::vector<std::uint32_t> primes_up_to(std::uint32_t limit) {
    std::vector<std::uint32_t> primes;
    if (limit < 2) return primes;
    std::vector<bool> composite(limit + 1, false);
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        primes.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return primes;
}

SquarefreeTester::SquarefreeTester() : primes_(primes_up_to(10000)) {}

bool SquarefreeTester::operator()(u64 n) const {
    if (n == 0) return false;
    for (std::uint32_t p : primes_) {
        const u64 sq = static_cast<u64>(p) * p;
        if (sq > n) return true;
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return false;
        }
    }
    // every prime factor left exceeds 10^4, so a square needs n > 10^8
    if (n <= 100000000ULL) return true;
    return is_squarefree(n);
}

SpfTable::SpfTable(std::uint32_t limit) : spf_(static_cast<std::size_t>(limit) + 1, 0) {
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (spf_[i] != 0) continue;
        for (std::uint64_t j = i; j <= limit; j += i) {
            if (spf_[j] == 0) spf_[j] = static_cast<std::uint32_t>(i);
        }
    }
}

Factorization SpfTable::factor(std::uint32_t n) const {
    Factorization f;
    while (n > 1) {
        const std::uint32_t p = spf_[n];
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.push_back({p, e});
    }
    return f;
}

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::SingularCurve: return "SingularCurve";
        case ErrorCode::ReducibleCubic: return "ReducibleCubic";
        case ErrorCode::NonPositiveTwist: return "NonPositiveTwist";
        case ErrorCode::PointNotOnCurve: return "PointNotOnCurve";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::NotSquarefree: return "NotSquarefree";
        case ErrorCode::NotCoprime: return "NotCoprime";
        case ErrorCode::BadResidues: return "BadResidues";
        case ErrorCode::EmptyFamily: return "EmptyFamily";
        case ErrorCode::MissingBaseData: return "MissingBaseData";
        case ErrorCode::NetworkUnavailable: return "NetworkUnavailable";
        case ErrorCode::CurveNotFound: return "CurveNotFound";
        case ErrorCode::CacheMiss: return "CacheMiss";
        case ErrorCode::NoValidRepresentative: return "NoValidRepresentative";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace twistrank
