#include <random>

#include "doctest.h"

#include "twistrank/arith.hpp"
#include "twistrank/error.hpp"

using namespace twistrank;

namespace {

bool trial_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p = 2; p * p <= n; ++p) {
        if (n % p == 0) return false;
    }
    return true;
}

int legendre_euler(i64 a, u64 p) {
    const u64 r = static_cast<u64>(((a % static_cast<i64>(p)) + static_cast<i64>(p)) % static_cast<i64>(p));
    if (r == 0) return 0;
    return powmod(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

void check_factorization(u64 n, const Factorization& f) {
    CHECK(unfactor(f) == n);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(is_prime(f[i].p));
        CHECK(f[i].e >= 1);
        if (i > 0) CHECK(f[i - 1].p < f[i].p);
    }
}

}  // namespace

TEST_CASE("primality matches trial division below 10^5") {
    for (u64 n = 0; n < 100000; ++n) REQUIRE(is_prime(n) == trial_prime(n));
}

TEST_CASE("primality at known hard inputs") {
    CHECK(is_prime((u64{1} << 61) - 1));
    CHECK(is_prime(18446744073709551557ULL));
    CHECK_FALSE(is_prime(561));
    CHECK_FALSE(is_prime(3215031751ULL));
    CHECK_FALSE(is_prime(3825123056546413051ULL));
    CHECK_FALSE(is_prime(18446744073709551615ULL));
}

TEST_CASE("factorize every n up to 10^6") {
    for (u64 n = 1; n <= 1000000; ++n) {
        const auto f = factorize(n);
        REQUIRE(unfactor(f) == n);
        for (const auto& pe : f) REQUIRE(is_prime(pe.p));
    }
    CHECK(factorize(1).empty());
    CHECK_THROWS_AS(factorize(0), Error);
}

TEST_CASE("factorize random 63-bit values") {
    std::mt19937_64 gen(20240607);
    for (int i = 0; i < 10000; ++i) {
        const u64 n = (gen() >> 1) | 1;
        check_factorization(n, factorize(n));
    }
    const u64 semiprime = 3037000493ULL * 3037000453ULL;
    CHECK(factorize(semiprime) == Factorization{{3037000453ULL, 1}, {3037000493ULL, 1}});
}

TEST_CASE("factorization does not depend on the seed") {
    std::mt19937_64 gen(7);
    for (int i = 0; i < 200; ++i) {
        const u64 n = gen() >> 2;
        if (n == 0) continue;
        CHECK(factorize(n, 1) == factorize(n, 99));
    }
}

TEST_CASE("kronecker agrees with Euler's criterion at odd primes below 200") {
    for (u64 p = 3; p < 200; ++p) {
        if (!trial_prime(p)) continue;
        for (i64 a = -300; a <= 300; ++a) REQUIRE(kronecker(a, static_cast<i64>(p)) == legendre_euler(a, p));
    }
}

TEST_CASE("kronecker conventions") {
    CHECK(kronecker(1, 0) == 1);
    CHECK(kronecker(-1, 0) == 1);
    CHECK(kronecker(2, 0) == 0);
    CHECK(kronecker(5, -1) == 1);
    CHECK(kronecker(-5, -1) == -1);
    CHECK(kronecker(1, 2) == 1);
    CHECK(kronecker(7, 2) == 1);
    CHECK(kronecker(3, 2) == -1);
    CHECK(kronecker(5, 2) == -1);
    CHECK(kronecker(4, 2) == 0);
    // completely multiplicative in the lower argument
    for (i64 a : {-12, -7, 5, 12, 13}) {
        for (i64 m = 1; m < 40; ++m) {
            for (i64 n = 1; n < 40; ++n) CHECK(kronecker(a, m * n) == kronecker(a, m) * kronecker(a, n));
        }
    }
}

TEST_CASE("fundamental discriminants") {
    CHECK(fundamental_discriminant(1) == 1);
    CHECK(fundamental_discriminant(2) == 8);
    CHECK(fundamental_discriminant(3) == 12);
    CHECK(fundamental_discriminant(5) == 5);
    CHECK(fundamental_discriminant(6) == 24);
    CHECK(fundamental_discriminant(13) == 13);
    CHECK_THROWS_AS(fundamental_discriminant(12), Error);
}

TEST_CASE("mobius, phi and square-freeness against definitions") {
    for (u64 n = 1; n <= 3000; ++n) {
        u64 phi = 0;
        for (u64 k = 1; k <= n; ++k) phi += gcd(k, n) == 1;
        REQUIRE(euler_phi(n) == phi);
        mpq_class ratio(phi, n);
        ratio.canonicalize();
        REQUIRE(phi_star(n) == ratio);
        bool sf = true;
        int parity = 1;
        u64 m = n;
        for (u64 p = 2; p <= m; ++p) {
            if (m % p) continue;
            m /= p;
            parity = -parity;
            if (m % p == 0) sf = false;
            while (m % p == 0) m /= p;
        }
        REQUIRE(is_squarefree(n) == sf);
        REQUIRE(mobius(n) == (sf ? parity : 0));
    }
}

TEST_CASE("bulk square-free tester agrees with mobius") {
    SquarefreeTester sf;
    for (u64 n = 1; n <= 200000; ++n) REQUIRE(sf(n) == (mobius(n) != 0));
    CHECK_FALSE(sf(1000003ULL * 1000003ULL));
    CHECK_FALSE(sf(7 * 1000003ULL * 1000003ULL));
    CHECK(sf(1000003ULL * 1000033ULL));
}

TEST_CASE("smallest-prime-factor table") {
    SpfTable spf(100000);
    CHECK(spf.limit() == 100000);
    for (std::uint32_t n = 1; n <= 100000; ++n) REQUIRE(spf.factor(n) == factorize(n));
}

TEST_CASE("valuations") {
    CHECK(valuation(u64{1728}, 2) == 6);
    CHECK(valuation(u64{1728}, 3) == 3);
    CHECK(valuation(u64{1728}, 5) == 0);
    CHECK(valuation(mpz_class("-1180591620717411303424"), 2) == 70);
    CHECK_THROWS_AS(valuation(u64{0}, 2), Error);
}

TEST_CASE("prime sieve") {
    const auto ps = primes_up_to(1000);
    CHECK(ps.size() == 168);
    CHECK(ps.front() == 2);
    CHECK(ps.back() == 997);
}
