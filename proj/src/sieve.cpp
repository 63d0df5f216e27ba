#include "twistrank/sieve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <ostream>
#include <unordered_map>

#include <mpfr.h>

#include "polymod.hpp"
#include "twistrank/csv.hpp"
#include "twistrank/error.hpp"

namespace twistrank {

namespace {

constexpr u64 kBruteLimit = 10000;
constexpr u64 kEnumerateRootsBelow = 65536;

// Outward-rounded product of positive rational factors.
class RoundedProduct {
public:
    RoundedProduct() {
        mpfr_inits2(160, lo_, hi_, static_cast<mpfr_ptr>(nullptr));
        mpfr_set_ui(lo_, 1, MPFR_RNDD);
        mpfr_set_ui(hi_, 1, MPFR_RNDU);
    }
    ~RoundedProduct() { mpfr_clears(lo_, hi_, static_cast<mpfr_ptr>(nullptr)); }
    RoundedProduct(const RoundedProduct&) = delete;
    RoundedProduct& operator=(const RoundedProduct&) = delete;

    void times(const mpz_class& num, const mpz_class& den) {
        mpfr_mul_z(lo_, lo_, num.get_mpz_t(), MPFR_RNDD);
        mpfr_div_z(lo_, lo_, den.get_mpz_t(), MPFR_RNDD);
        mpfr_mul_z(hi_, hi_, num.get_mpz_t(), MPFR_RNDU);
        mpfr_div_z(hi_, hi_, den.get_mpz_t(), MPFR_RNDU);
    }
    void times(u64 num, u64 den) { times(mpz_class(std::to_string(num)), mpz_class(std::to_string(den))); }
    void times(const mpq_class& q) { times(q.get_num(), q.get_den()); }
    /// Multiplies the lower end only: for a tail factor known to lie in [num/den, 1].
    void lower_times(u64 num, u64 den) {
        mpfr_mul_ui(lo_, lo_, num, MPFR_RNDD);
        mpfr_div_ui(lo_, lo_, den, MPFR_RNDD);
    }

    Interval get() const { return {mpfr_get_d(lo_, MPFR_RNDD), mpfr_get_d(hi_, MPFR_RNDU)}; }

private:
    mpfr_t lo_, hi_;
};

u64 reduce(i64 a, u64 n) {
    const i64 r = a % static_cast<i64>(n);
    return static_cast<u64>(r < 0 ? r + static_cast<i64>(n) : r);
}

u64 eval_mod(const CurveParams& c, u64 u, u64 n) {
    const u64 A = reduce(c.A, n), B = reduce(c.B, n);
    const u64 u2 = mulmod(u, u, n);
    const u64 t = (mulmod(u2, u, n) + mulmod(A, u, n)) % n;
    return (t + B) % n;
}

// F(u, s) mod n for the homogeneous cubic.
u64 eval_form_mod(const CurveParams& c, u64 u, u64 s, u64 n) {
    u %= n;
    s %= n;
    const u64 A = reduce(c.A, n), B = reduce(c.B, n);
    const u64 s2 = mulmod(s, s, n);
    const u64 u3 = mulmod(mulmod(u, u, n), u, n);
    const u64 mid = mulmod(mulmod(A, u, n), s2, n);
    const u64 top = mulmod(B, mulmod(s2, s, n), n);
    return ((u3 + mid) % n + top) % n;
}

std::optional<u64> checked_power(u64 p, int k) {
    u64 r = 1;
    for (int i = 0; i < k; ++i) {
        if (__builtin_mul_overflow(r, p, &r)) return std::nullopt;
    }
    return r;
}

using ZPoly = std::vector<mpz_class>;  // low degree first

mpz_class eval(const ZPoly& f, const mpz_class& x) {
    mpz_class r = 0;
    for (auto it = f.rbegin(); it != f.rend(); ++it) r = r * x + *it;
    return r;
}

// f(r + p t) as a polynomial in t.
ZPoly shift(const ZPoly& f, u64 r, u64 p) {
    const std::size_t n = f.size();
    ZPoly g(n, 0);
    static constexpr int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    const mpz_class R(std::to_string(r)), P(std::to_string(p));
    for (std::size_t j = 0; j < n; ++j) {
        mpz_class acc = 0;
        for (std::size_t i = j; i < n; ++i) {
            mpz_class rp;
            mpz_pow_ui(rp.get_mpz_t(), R.get_mpz_t(), i - j);
            acc += f[i] * binom[i][j] * rp;
        }
        mpz_class pj;
        mpz_pow_ui(pj.get_mpz_t(), P.get_mpz_t(), j);
        g[j] = acc * pj;
    }
    return g;
}

int content_valuation(const ZPoly& f, u64 p) {
    int v = -1;
    for (const auto& c : f) {
        if (c == 0) continue;
        const int vc = valuation(c, p);
        v = v < 0 ? vc : std::min(v, vc);
    }
    return v;  // -1 for the zero polynomial
}

std::vector<u64> roots_mod_p(const ZPoly& f, u64 p) {
    std::vector<u64> out;
    const mpz_class P(std::to_string(p));
    if (p < kEnumerateRootsBelow) {
        for (u64 r = 0; r < p; ++r) {
            mpz_class v = eval(f, mpz_class(static_cast<unsigned long>(r)));
            if (mpz_divisible_p(v.get_mpz_t(), P.get_mpz_t())) out.push_back(r);
        }
        return out;
    }
    polymod::Poly g;
    for (const auto& c : f) {
        mpz_class r;
        mpz_fdiv_r(r.get_mpz_t(), c.get_mpz_t(), P.get_mpz_t());
        g.push_back(std::stoull(r.get_str()));
    }
    polymod::trim(g);
    if (g.empty()) throw Error(ErrorCode::InvalidArgument, "polynomial vanishes mod p");
    return polymod::roots(g, p);
}

// #{x mod p^k : f(x) = 0 mod p^k}, by descending the tree of roots mod p.
mpz_class lift_count(const ZPoly& f, u64 p, int k) {
    const mpz_class P(std::to_string(p));
    auto ppow = [&](int e) {
        mpz_class r;
        mpz_pow_ui(r.get_mpz_t(), P.get_mpz_t(), static_cast<unsigned long>(std::max(e, 0)));
        return r;
    };
    if (k <= 0) return 1;
    const int content = content_valuation(f, p);
    if (content < 0 || content >= k) return ppow(k);
    if (content > 0) {
        ZPoly h = f;
        const mpz_class pc = ppow(content);
        for (auto& c : h) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), pc.get_mpz_t());
        return ppow(content) * lift_count(h, p, k - content);
    }
    mpz_class total = 0;
    for (u64 r : roots_mod_p(f, p)) {
        ZPoly g = shift(f, r, p);
        const int v = content_valuation(g, p);
        if (v < 0 || v >= k) {
            total += ppow(k - 1);
            continue;
        }
        const mpz_class pv = ppow(v);
        for (auto& c : g) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), pv.get_mpz_t());
        total += ppow(v - 1) * lift_count(g, p, k - v);
    }
    return total;
}

u64 rho_prime(const CurveParams& c, u64 p) {
    if (p <= kBruteLimit) return rho_brute(c, p);
    const polymod::Poly f{reduce(c.B, p), reduce(c.A, p), 0, 1};
    return static_cast<u64>(polymod::degree(polymod::split_part(f, p)));
}

std::vector<u64> prime_factors(u64 n) {
    std::vector<u64> ps;
    for (const auto& pp : factorize(n)) ps.push_back(pp.p);
    return ps;
}

mpz_class to_mpz(u64 v) { return mpz_class(std::to_string(v)); }

// Per-prime factors 1 - rho(p^2)/(p^2 + p - 1) of L(w), for p <= P_cut and
// for the primes of Delta_F beyond the cut.
struct LFactor {
    u64 p;
    u64 num;
    u64 den;
};

std::vector<LFactor> compute_l_factors(const CurveParams& c, u64 N_E, u64 P_cut) {
    const u64 q = 4 * N_E;
    std::vector<u64> ps;
    for (auto p : primes_up_to(static_cast<std::uint32_t>(P_cut))) ps.push_back(p);
    for (u64 p : prime_factors(static_cast<u64>(std::llabs(c.delta_F)))) {
        if (p > P_cut) ps.push_back(p);
    }
    std::vector<LFactor> out;
    for (u64 p : ps) {
        if (q % p == 0) continue;
        const u64 den = p * p + p - 1;
        out.push_back({p, den - rho_prime_power(c, p, 2), den});
    }
    return out;
}

// Memoised per (A, B, N_E, P_cut); sweeps over w reuse one table.
const std::vector<LFactor>& l_factors(const CurveParams& c, u64 N_E, u64 P_cut) {
    static std::mutex mu;
    static std::map<std::array<i64, 4>, std::vector<LFactor>> cache;
    const std::array<i64, 4> key{c.A, c.B, static_cast<i64>(N_E), static_cast<i64>(P_cut)};
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, compute_l_factors(c, N_E, P_cut)).first;
    return it->second;
}

Interval l_from_factors(const std::vector<LFactor>& factors, u64 w, u64 P_cut) {
    RoundedProduct prod;
    for (const auto& f : factors) {
        if (w % f.p == 0) continue;
        prod.times(f.num, f.den);
    }
    // Beyond the cut rho(p^2) = rho(p) <= 3, so the tail lies in [1 - 3/P_cut, 1].
    prod.lower_times(P_cut - 3, P_cut);
    return prod.get();
}

void require_cut(u64 P_cut) {
    if (P_cut < 1000) throw Error(ErrorCode::InvalidArgument, "P_cut must be at least 1000");
}

}  // namespace

u64 rho_brute(const CurveParams& c, u64 n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "rho needs n >= 1");
    if (n > 100000000) throw Error(ErrorCode::InvalidArgument, "brute-force rho limited to n <= 1e8");
    if (n == 1) return 1;
    u64 count = 0;
    for (u64 u = 0; u < n; ++u) {
        if (eval_mod(c, u, n) == 0) ++count;
    }
    return count;
}

u64 rho_prime_power(const CurveParams& c, u64 p, int k) {
    if (k <= 0) return 1;
    const auto pk = checked_power(p, k);
    if (pk && *pk <= kBruteLimit) return rho_brute(c, *pk);
    if (c.delta_F % static_cast<i64>(p) != 0) return rho_prime(c, p);
    const ZPoly f{mpz_class(static_cast<long>(c.B)), mpz_class(static_cast<long>(c.A)), 0, 1};
    const mpz_class r = lift_count(f, p, k);
    if (!r.fits_ulong_p()) throw Error(ErrorCode::Overflow, "rho(p^k) exceeds 64 bits");
    return r.get_ui();
}

u64 rho(const CurveParams& c, u64 n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "rho needs n >= 1");
    u64 r = 1;
    for (const auto& pp : factorize(n)) {
        r *= rho_prime_power(c, pp.p, pp.e);
        if (r == 0) break;
    }
    return r;
}

double stewart_bound(const CurveParams& c, u64 p) {
    const int v = valuation(static_cast<u64>(std::llabs(c.delta_F)), p);
    return 2.0 * std::pow(static_cast<double>(p), 0.5 * v) + 1.0;
}

bool check_stewart(const CurveParams& c, u64 p, int k) {
    const u64 r = rho_prime_power(c, p, k);
    if (r <= 1) return true;
    const int v = valuation(static_cast<u64>(std::llabs(c.delta_F)), p);
    mpz_class pv;
    mpz_pow_ui(pv.get_mpz_t(), to_mpz(p).get_mpz_t(), static_cast<unsigned long>(v));
    const mpz_class excess = to_mpz(r - 1);
    return excess * excess <= 4 * pv;
}

u64 rho_summatory(const CurveParams& c, u64 X, int k) {
    if (X < 1) throw Error(ErrorCode::InvalidArgument, "X must be at least 1");
    if (X > 100000000) throw Error(ErrorCode::InvalidArgument, "X limited to 1e8");
    const SpfTable spf(static_cast<std::uint32_t>(X));
    std::unordered_map<u64, u64> cache;  // key p * 256 + exponent
    u64 total = 0;
    for (u64 n = 1; n <= X; ++n) {
        u64 r = 1;
        for (const auto& pp : spf.factor(static_cast<std::uint32_t>(n))) {
            const int e = pp.e * k;
            const u64 key = pp.p * 256 + static_cast<u64>(std::min(e, 255));
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, rho_prime_power(c, pp.p, e)).first;
            r *= it->second;
            if (r == 0) break;
        }
        total += r;
    }
    return total;
}

std::map<u64, mpq_class> mt_sum_sweep(std::vector<u64> checkpoints, u64 a, u64 q, u64 m) {
    if (q < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "q and m must be positive");
    if (gcd(a % q, q) != 1) throw Error(ErrorCode::NotCoprime, "gcd(a, q) must be 1");
    std::sort(checkpoints.begin(), checkpoints.end());
    std::map<u64, mpq_class> out;
    if (checkpoints.empty()) return out;
    const u64 X_max = checkpoints.back();
    if (X_max > 100000000) throw Error(ErrorCode::InvalidArgument, "X limited to 1e8");
    const SpfTable spf(static_cast<std::uint32_t>(std::max<u64>(X_max, 2)));
    // Every phi*(n) with n square-free has denominator dividing the primorial.
    mpz_class primorial = 1;
    for (auto p : primes_up_to(static_cast<std::uint32_t>(std::max<u64>(X_max, 2)))) primorial *= p;
    mpz_class numerator = 0, term;
    auto next = checkpoints.begin();
    const u64 residue = a % q;
    for (u64 n = 1; n <= X_max; ++n) {
        if (n % q == residue && gcd(n, m) == 1) {
            u64 phi = 1;
            bool squarefree = true;
            for (const auto& pp : spf.factor(static_cast<std::uint32_t>(n))) {
                if (pp.e > 1) {
                    squarefree = false;
                    break;
                }
                phi *= pp.p - 1;
            }
            if (squarefree) {
                mpz_divexact_ui(term.get_mpz_t(), primorial.get_mpz_t(), n);
                mpz_addmul_ui(numerator.get_mpz_t(), term.get_mpz_t(), phi);
            }
        }
        while (next != checkpoints.end() && *next == n) {
            mpq_class value(numerator, primorial);
            value.canonicalize();
            out.emplace(n, value);
            ++next;
        }
    }
    while (next != checkpoints.end()) out.emplace(*next++, mpq_class(0));  // X = 0
    return out;
}

mpq_class mt_sum(u64 X, u64 a, u64 q, u64 m) {
    if (X == 0) {
        if (q < 1 || gcd(a % q, q) != 1) throw Error(ErrorCode::NotCoprime, "gcd(a, q) must be 1");
        return 0;
    }
    return mt_sum_sweep({X}, a, q, m).at(X);
}

Interval c0_interval(u64 q, u64 P_cut) {
    require_cut(P_cut);
    RoundedProduct prod;
    for (auto p32 : primes_up_to(static_cast<std::uint32_t>(P_cut))) {
        const u64 p = p32;
        if (q % p == 0) continue;
        prod.times(p * p * p - 2 * p + 1, p * p * p);
    }
    // Tail factors lie in [1 - 2/p^2, 1] and sum_{n > P} 1/n^2 < 1/P.
    prod.lower_times(P_cut - 2, P_cut);
    return prod.get();
}

mpq_class c1_factor(u64 m, u64 q) {
    mpq_class r = 1;
    for (u64 p : prime_factors(m)) {
        if (q % p == 0) continue;
        r *= mpq_class(to_mpz(p * p), to_mpz(p * p + p - 1));
    }
    r.canonicalize();
    return r;
}

Interval mt_main_term(u64 X, u64 q, u64 m, u64 P_cut) {
    const Interval c0 = c0_interval(q, P_cut);
    const mpq_class scale = c1_factor(m, q) * mpq_class(to_mpz(X), to_mpz(q));
    const double s = scale.get_d();
    // scale.get_d() truncates; widen by two ulps on each side.
    const double s_lo = std::nextafter(std::nextafter(s, 0.0), 0.0);
    const double s_hi = std::nextafter(std::nextafter(s, INFINITY), INFINITY);
    Interval out{c0.lo * s_lo, c0.hi * s_hi};
    out.lo = std::nextafter(out.lo, 0.0);
    out.hi = std::nextafter(out.hi, INFINITY);
    return out;
}

mpq_class f1(u64 n, u64 N_E) {
    const u64 q = 4 * N_E;
    mpq_class r = 1;
    for (u64 p : prime_factors(n)) {
        if (q % p == 0) continue;
        r *= mpq_class(to_mpz(p * p), to_mpz(p * p + p - 1));
    }
    r.canonicalize();
    return r;
}

mpq_class f2(u64 w, u64 N_E) {
    const u64 q = 4 * N_E;
    mpq_class r = phi_star(w);
    for (u64 p : prime_factors(w)) {
        if (q % p == 0) continue;
        r *= mpq_class(to_mpz(p * p + 2 * p - 1), to_mpz(p * p + p - 1));
    }
    r.canonicalize();
    return r;
}

Interval l_of_w(const CurveParams& c, u64 w, u64 N_E, u64 P_cut) {
    require_cut(P_cut);
    if (w < 1) throw Error(ErrorCode::InvalidArgument, "w must be positive");
    return l_from_factors(l_factors(c, N_E, P_cut), w, P_cut);
}

long double DerivedConstants::U(u64 X, u64 w) const {
    const long double t = static_cast<long double>(c3) * X * static_cast<long double>(w) * w / c4;
    return std::pow(t, 0.25L);
}

u64 DerivedConstants::U_floor(u64 X, u64 w) const {
    const u128 rhs = static_cast<u128>(c3) * X * w * w;
    u64 u = static_cast<u64>(std::floor(U(X, w)));
    auto fits = [&](u64 x) { return static_cast<u128>(c4) * x * x * x * x <= rhs; };
    while (u > 0 && !fits(u)) --u;
    while (fits(u + 1)) ++u;
    return u;
}

double DerivedConstants::w_cap(u64 X) const { return c6 * std::pow(static_cast<double>(X), 4.0 * alpha); }

DerivedConstants derive_constants(const CurveParams& c, double alpha, double c1, double c2, u64 N_E, u64 P_cut) {
    (void)c1;  // the lower region constant does not enter the chain
    if (!(alpha > 0.0) || !(alpha < 1.0 / 24.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1/24)");
    }
    if (N_E < 1) throw Error(ErrorCode::MissingBaseData, "conductor required");
    DerivedConstants k;
    k.alpha = alpha;
    k.N_E = N_E;
    const i128 a = std::llabs(c.A), b = std::llabs(c.B);
    for (i128 t = 1;; ++t) {
        if (2 * a * t + 2 * b <= t * t * t) {
            k.c3 = static_cast<u64>(t);
            break;
        }
    }
    k.c4 = static_cast<u64>(c.c4);
    const double gamma = 0.25 + 2.0 * alpha;
    k.c5 = std::exp(-2.0 * c2) * std::pow(2.0, -gamma);
    k.c6 = std::pow(static_cast<double>(k.c3), -(0.5 + 12.0 * alpha)) *
           std::pow(static_cast<double>(k.c4), -4.0 * alpha) * std::pow(k.c5, 2.0 / (1.0 - 24.0 * alpha));
    const Interval c0 = c0_interval(4 * N_E, P_cut);
    const double denom = 8.0 * static_cast<double>(N_E) * std::sqrt(static_cast<double>(k.c3 * k.c4));
    k.c7_interval = {std::nextafter(c0.lo / denom, 0.0), std::nextafter(c0.hi / denom, INFINITY)};
    k.c7 = k.c7_interval.mid();
    k.c8 = k.c7 / (4.0 * static_cast<double>(N_E));
    k.c9_lower = l_of_w(c, 1, N_E, P_cut).lo;
    return k;
}

std::vector<Residues> admissible_residues(const CurveParams& c, u64 N_E, std::size_t limit) {
    const u64 q = 4 * N_E;
    std::vector<Residues> out;
    for (u64 u = 0; u < q && out.size() < limit; ++u) {
        for (u64 v = 1; v < q && out.size() < limit; ++v) {
            if (gcd(v, q) != 1) continue;
            for (u64 w = 0; w < q && out.size() < limit; ++w) {
                const u64 s = mulmod(v, mulmod(w, w, q), q);
                const u64 Q = mulmod(v, eval_form_mod(c, u, s, q), q);
                if (gcd(Q, q) == 1) out.push_back({u, v, w});
            }
        }
    }
    return out;
}

Residues least_residues(const CurveParams& c, u64 N_E) {
    const auto list = admissible_residues(c, N_E, 1);
    if (list.empty()) throw Error(ErrorCode::BadResidues, "no residue triple makes Q invertible mod 4 N_E");
    return list.front();
}

namespace {

void check_lattice_inputs(u64 w, u64 ell, u64 X) {
    if (w < 1 || ell < 1) throw Error(ErrorCode::InvalidArgument, "w and l must be positive");
    if (X < 1 || X > 1000000000000ULL) throw Error(ErrorCode::InvalidArgument, "X must lie in [1, 1e12]");
}

u64 first_in_class(u64 lo, u64 r, u64 q) {
    // Least x >= lo with x = r mod q.
    const u64 base = lo - lo % q + r;
    return base >= lo ? base : base + q;
}

}  // namespace

LatticeCount n_wl_count(const CurveParams& c, const DerivedConstants& k, u64 w, u64 ell, u64 X, const Residues& res) {
    check_lattice_inputs(w, ell, X);
    const u64 q = 4 * k.N_E;
    if (gcd(ell, q * w) > 1) return {0, true};
    const u64 U = k.U_floor(X, w);
    const u64 ell2 = ell * ell;
    const SquarefreeTester squarefree;
    LatticeCount out;
    for (u64 v = first_in_class(1, res.v0 % q, q); k.c3 * v * w * w <= U; v += q) {
        if (!squarefree(v)) continue;
        const u64 s = v * w * w;
        for (u64 u = first_in_class(k.c3 * s, res.u0 % q, q); u <= U; u += q) {
            if (gcd(u, v * w) != 1) continue;
            if (ell2 > 1 && eval_form_mod(c, u, s, ell2) != 0) continue;
            ++out.count;
        }
    }
    return out;
}

double n_wl_main(const CurveParams& c, const DerivedConstants& k, u64 w, u64 ell, u64 X) {
    if (gcd(ell, 4 * k.N_E * w) > 1) return 0.0;
    const double rho2 = static_cast<double>(rho(c, ell * ell));
    return k.c8 * f2(w, k.N_E).get_d() * rho2 * f1(ell, k.N_E).get_d() /
           (static_cast<double>(w) * static_cast<double>(ell * ell)) * std::sqrt(static_cast<double>(X));
}

LatticeSum v_wl_sum(const DerivedConstants& k, u64 w, u64 ell, u64 X, const Residues& res) {
    check_lattice_inputs(w, ell, X);
    const u64 q = 4 * k.N_E;
    if (gcd(ell, q * w) > 1) return {0.0L, true};
    const long double U = k.U(X, w);
    const u64 U_int = k.U_floor(X, w);
    LatticeSum out;
    for (u64 v = first_in_class(1, res.v0 % q, q); k.c3 * v * w * w <= U_int; v += q) {
        if (gcd(v, ell) != 1 || !is_squarefree(v)) continue;
        const long double weight = U - static_cast<long double>(k.c3 * v * w * w);
        out.value += static_cast<long double>(phi_star(v * w).get_d()) * weight;
    }
    return out;
}

double v_wl_main(const DerivedConstants& k, u64 w, u64 ell, u64 X) {
    if (gcd(ell, 4 * k.N_E * w) > 1) return 0.0;
    return k.c7 * f2(w, k.N_E).get_d() * f1(ell, k.N_E).get_d() / static_cast<double>(w) *
           std::sqrt(static_cast<double>(X));
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return csv::parse_double(s);
}

}  // namespace

void write_sieve_csv(std::ostream& out, const std::vector<SieveRow>& rows) {
    out << "quantity,params,exact,main_term,residual,normalized_residual,tail_lo,tail_hi\n";
    for (const auto& r : rows) {
        out << r.quantity << ',' << r.params << ',' << r.exact << ',' << opt(r.main_term) << ',' << opt(r.residual)
            << ',' << opt(r.normalized_residual) << ',' << opt(r.tail_lo) << ',' << opt(r.tail_hi) << '\n';
    }
}

std::vector<SieveRow> read_sieve_csv(std::istream& in) {
    const auto header = csv::next_line(in);
    if (!header || header->rfind("quantity,params", 0) != 0) throw Error(ErrorCode::Io, "missing sieve header");
    std::vector<SieveRow> rows;
    while (const auto line = csv::next_line(in)) {
        const auto f = csv::split(*line);
        if (f.size() != 8) throw Error(ErrorCode::Io, "sieve row needs 8 fields");
        rows.push_back({f[0], f[1], f[2], parse_opt(f[3]), parse_opt(f[4]), parse_opt(f[5]), parse_opt(f[6]),
                        parse_opt(f[7])});
    }
    return rows;
}

}  // namespace twistrank
