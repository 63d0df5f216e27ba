#pragma once

// Dense polynomials over Z/pZ for odd primes p < 2^63, low degree first.

#include <algorithm>
#include <vector>

#include "twistrank/arith.hpp"

namespace twistrank::polymod {

using Poly = std::vector<u64>;

inline void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline int degree(const Poly& a) { return static_cast<int>(a.size()) - 1; }

inline u64 inverse(u64 a, u64 p) { return powmod(a, p - 2, p); }

inline Poly sub(Poly a, const Poly& b, u64 p) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + p - b[i]) % p;
    trim(a);
    return a;
}

/// Quotient and remainder of a by nonzero b.
inline std::pair<Poly, Poly> divmod(Poly a, const Poly& b, u64 p) {
    trim(a);
    const int db = degree(b);
    if (degree(a) < db) return {{}, a};
    Poly q(a.size() - b.size() + 1, 0);
    const u64 lead_inv = inverse(b.back(), p);
    for (int i = degree(a); i >= db; --i) {
        const u64 coef = mulmod(a[i], lead_inv, p);
        q[i - db] = coef;
        if (coef == 0) continue;
        for (int j = 0; j <= db; ++j) {
            a[i - db + j] = (a[i - db + j] + p - mulmod(coef, b[j], p)) % p;
        }
    }
    trim(a);
    trim(q);
    return {q, a};
}

inline Poly mul_mod(const Poly& a, const Poly& b, const Poly& f, u64 p) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + mulmod(a[i], b[j], p)) % p;
    }
    return divmod(std::move(r), f, p).second;
}

inline Poly pow_mod(Poly base, u64 e, const Poly& f, u64 p) {
    Poly result{1};
    base = divmod(std::move(base), f, p).second;
    while (e > 0) {
        if (e & 1) result = mul_mod(result, base, f, p);
        base = mul_mod(base, base, f, p);
        e >>= 1;
    }
    return result;
}

inline Poly gcd(Poly a, Poly b, u64 p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = divmod(a, b, p).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        const u64 inv = inverse(a.back(), p);
        for (auto& c : a) c = mulmod(c, inv, p);
    }
    return a;
}

/// Product of the distinct linear factors of f: gcd(x^p - x, f).
inline Poly split_part(const Poly& f, u64 p) {
    const Poly xp = pow_mod({0, 1}, p, f, p);
    return gcd(f, sub(xp, {0, 1}, p), p);
}

/// Roots of a monic product of distinct linear factors (equal-degree splitting).
inline void split_roots(const Poly& g, u64 p, std::vector<u64>& out) {
    const int deg = degree(g);
    if (deg <= 0) return;
    if (deg == 1) {
        out.push_back((p - g[0] % p) % p);
        return;
    }
    for (u64 delta = 0;; ++delta) {
        Poly h = pow_mod({delta % p, 1}, (p - 1) / 2, g, p);
        h = sub(h, {1}, p);
        Poly part = gcd(g, h, p);
        const int dp = degree(part);
        if (dp > 0 && dp < deg) {
            split_roots(part, p, out);
            split_roots(divmod(g, part, p).first, p, out);
            return;
        }
    }
}

inline std::vector<u64> roots(const Poly& f, u64 p) {
    std::vector<u64> out;
    split_roots(split_part(f, p), p, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace twistrank::polymod
