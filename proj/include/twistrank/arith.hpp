#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

namespace twistrank {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

struct PrimePower {
    u64 p;
    int e;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Prime-exponent list sorted by p. The empty list factors 1.
using Factorization = std::vector<PrimePower>;

u64 mulmod(u64 a, u64 b, u64 m);
u64 powmod(u64 base, u64 exp, u64 m);
u64 gcd(u64 a, u64 b);

/// Deterministic Miller-Rabin for the full 64-bit range.
bool is_prime(u64 n);

/// Complete factorization: trial division, then Brent-Pollard rho with a
/// seeded generator for the remaining composite cofactors.
Factorization factorize(u64 n, u64 seed = 0x243f6a8885a308d3ULL);

u64 unfactor(std::span<const PrimePower> f);

int mobius(u64 n);
bool is_squarefree(u64 n);

u64 euler_phi(u64 n);

/// phi(n)/n as an exact rational.
mpq_class phi_star(u64 n);

/// Kronecker symbol (a|n), including the conventions at n = 0, n = -1 and 2.
int kronecker(i64 a, i64 n);

/// Discriminant of Q(sqrt(d)) for square-free d >= 1; 1 for d = 1.
i64 fundamental_discriminant(u64 d);

/// p-adic valuation of a nonzero integer.
int valuation(const mpz_class& n, u64 p);
int valuation(u64 n, u64 p);

std::vector<std::uint32_t> primes_up_to(std::uint32_t limit);

/// Bulk square-free tester: divides out p^2 for every prime p <= 10^4 first
/// and only factors the cofactor when it can still hide a large square.
class SquarefreeTester {
public:
    SquarefreeTester();
    bool operator()(u64 n) const;

private:
    std::vector<std::uint32_t> primes_;
};

/// Smallest-prime-factor table for multiplicative sweeps up to a bound.
class SpfTable {
public:
    explicit SpfTable(std::uint32_t limit);
    std::uint32_t limit() const { return static_cast<std::uint32_t>(spf_.size() - 1); }
    Factorization factor(std::uint32_t n) const;

private:
    std::vector<std::uint32_t> spf_;
};

}  // namespace twistrank
