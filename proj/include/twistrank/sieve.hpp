#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "twistrank/arith.hpp"
#include "twistrank/curve.hpp"

namespace twistrank {

/// Closed interval [lo, hi] with outward-rounded endpoints.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// rho(n) = #{u mod n : F(u, 1) = 0 mod n}.
u64 rho(const CurveParams& curve, u64 n);
u64 rho_prime_power(const CurveParams& curve, u64 p, int k);
/// Direct scan over all residues; n <= 10^8.
u64 rho_brute(const CurveParams& curve, u64 n);

/// rho(p^k) <= 2 p^{v_p(Delta_F)/2} + 1.
bool check_stewart(const CurveParams& curve, u64 p, int k);
double stewart_bound(const CurveParams& curve, u64 p);

/// Sum of rho(n^k) over n <= X.
u64 rho_summatory(const CurveParams& curve, u64 X, int k);

/// Sum of mu(n)^2 phi*(n) over n <= X with gcd(n, m) = 1 and n = a mod q.
mpq_class mt_sum(u64 X, u64 a, u64 q, u64 m);
/// The same sum at several X in one pass.
std::map<u64, mpq_class> mt_sum_sweep(std::vector<u64> checkpoints, u64 a, u64 q, u64 m);

/// C0(q) = prod_{p not dividing q} (1 - 2/p^2 + 1/p^3).
Interval c0_interval(u64 q, u64 P_cut);
/// C1(m; q) = prod over p | m, p not dividing q, of (1 + 1/p - 1/p^2)^{-1}.
mpq_class c1_factor(u64 m, u64 q);
/// C0(q) C1(m; q) X / q.
Interval mt_main_term(u64 X, u64 q, u64 m, u64 P_cut);

/// f1(n) = prod' (1 + 1/p - 1/p^2)^{-1} and
/// f2(w) = phi*(w) prod' (1 - p/(p^2 + 2p - 1))^{-1}; primes dividing 4 N_E
/// are skipped.
mpq_class f1(u64 n, u64 N_E);
mpq_class f2(u64 w, u64 N_E);

/// L(w) = prod' over p not dividing w of (1 - rho(p^2)/(p^2 + p - 1)).
Interval l_of_w(const CurveParams& curve, u64 w, u64 N_E, u64 P_cut);

struct DerivedConstants {
    u64 c3 = 0;
    u64 c4 = 0;
    double c5 = 0.0;
    double c6 = 0.0;
    double c7 = 0.0;
    double c8 = 0.0;
    double c9_lower = 0.0;
    Interval c7_interval;
    double alpha = 0.0;
    u64 N_E = 1;

    /// U_w = (c3 X w^2 / c4)^{1/4}.
    long double U(u64 X, u64 w) const;
    /// Largest integer u with c4 u^4 <= c3 X w^2.
    u64 U_floor(u64 X, u64 w) const;
    /// c6 X^{4 alpha}.
    double w_cap(u64 X) const;
};

/// Throws InvalidArgument unless 0 < alpha < 1/24.
DerivedConstants derive_constants(const CurveParams& curve, double alpha, double c1, double c2, u64 N_E,
                                  u64 P_cut = 10000);

struct Residues {
    u64 u0 = 0, v0 = 0, w0 = 0;
    friend bool operator==(const Residues&, const Residues&) = default;
};

/// Lexicographically least (u0, v0, w0) mod 4 N_E with Q(u0, v0, w0) invertible.
Residues least_residues(const CurveParams& curve, u64 N_E);
/// All such triples, in lexicographic order; `limit` caps the list.
std::vector<Residues> admissible_residues(const CurveParams& curve, u64 N_E, std::size_t limit);

struct LatticeCount {
    u64 count = 0;
    bool bad_residues = false;  // gcd(l, 4 N_E w) > 1, so the count is 0
};

struct LatticeSum {
    long double value = 0.0L;
    bool bad_residues = false;
};

LatticeCount n_wl_count(const CurveParams& curve, const DerivedConstants& k, u64 w, u64 ell, u64 X,
                        const Residues& res);
/// c8 f2(w) rho(l^2) f1(l) X^{1/2} / (w l^2).
double n_wl_main(const CurveParams& curve, const DerivedConstants& k, u64 w, u64 ell, u64 X);

/// Sum of mu(v)^2 phi*(vw) (U_w - c3 v w^2) over v = v0 mod 4 N_E with
/// c3 v w^2 <= U_w and gcd(v, l) = 1.
LatticeSum v_wl_sum(const DerivedConstants& k, u64 w, u64 ell, u64 X, const Residues& res);
/// c7 f2(w) f1(l) X^{1/2} / w.
double v_wl_main(const DerivedConstants& k, u64 w, u64 ell, u64 X);

struct SieveRow {
    std::string quantity;
    std::string params;
    std::string exact;
    std::optional<double> main_term;
    std::optional<double> residual;
    std::optional<double> normalized_residual;
    std::optional<double> tail_lo;
    std::optional<double> tail_hi;
    friend bool operator==(const SieveRow&, const SieveRow&) = default;
};

void write_sieve_csv(std::ostream& out, const std::vector<SieveRow>& rows);
std::vector<SieveRow> read_sieve_csv(std::istream& in);

}  // namespace twistrank
