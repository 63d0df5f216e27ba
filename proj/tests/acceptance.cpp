// Acceptance run for y^2 = x^3 + 2, alpha = 0.008, c1 = c2 = 0. Prints one
// PASS/FAIL line per criterion. The exit status is nonzero only when a
// criterion outside kKnownRed fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "oracle.hpp"
#include "twistrank/cli.hpp"
#include "twistrank/csv.hpp"
#include "twistrank/moments.hpp"
#include "twistrank/sieve.hpp"

using namespace twistrank;

namespace {

// Unattainable at desk scale for this curve; see README.
const std::set<int> kKnownRed = {5, 9};

const CurveParams kCurve = validate_curve(0, 2);
const BaseCurveData kBase = make_base_data(1728, -1);
constexpr double kAlpha = 0.008;

RegionParams region(RegionMode mode = RegionMode::region) { return make_region(kAlpha, 0.0, 0.0, mode); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double growth_scale(u64 X) { return std::sqrt(double(X)) * std::log(double(X)); }

Outcome oracle_equivalence() {
    const u64 top = 10000;
    const auto brute = oracle::brute_representations(0, 2, kAlpha, top, false);
    const SquarefreeTester sf;
    u64 mismatches = 0;
    for (u64 X = 1; X <= top; ++X) {
        const auto reps = representations(kCurve, region(), X);
        RepresentationTable want(brute.begin(), brute.upper_bound(X));
        if (reps != want) ++mismatches;
        const Census census = build_census(kCurve, region(), X);
        std::size_t sf_keys = 0;
        for (const auto& [d, ts] : want) {
            if (!sf(d)) continue;
            ++sf_keys;
            const auto it = census.find(d);
            if (it == census.end() || it->second.witnesses != ts) ++mismatches;
        }
        if (census.size() != sf_keys) ++mismatches;
    }
    return {mismatches == 0, "X=1..10^4, " + std::to_string(brute.size()) + " values at 10^4, mismatches=" +
                                 std::to_string(mismatches)};
}

Outcome diagonal_bijection() {
    u64 bad = 0;
    std::size_t entries = 0;
    for (auto mode : {RegionMode::relaxed, RegionMode::region}) {
        const auto brute = m_q_brute_table(representations(kCurve, region(mode), 10000));
        const auto param = m_q_param_table(kCurve, region(mode), 10000);
        entries += brute.size();
        if (brute != param) ++bad;
    }
    u64 identity_bad = 0;
    for (u64 u = 1; u <= 8; ++u)
        for (u64 v = 1; v <= 8; ++v)
            for (u64 w = 1; w <= 8; ++w)
                for (u64 x = 1; x <= 8; ++x)
                    for (u64 y = 1; y <= 8; ++y) {
                        if (oracle::q_value(0, 2, u * x, v * y * y * y, w * x * x) !=
                            oracle::q_value(0, 2, u * y, v * x * x * x, w * y * y))
                            ++identity_bad;
                    }
    return {bad == 0 && identity_bad == 0, "tables differ in " + std::to_string(bad) + " of 2 modes (" +
                                               std::to_string(entries) + " nonzero entries), identity failures=" +
                                               std::to_string(identity_bad)};
}

Outcome growth_law() {
    const auto rows = growth_table(kCurve, region(), {10000, 100000, 1000000, 10000000});
    bool ok = true;
    std::string detail = "ratios";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail += " " + fmt(rows[i].ratio);
        if (i > 0) {
            const double f = std::max(rows[i].ratio / rows[i - 1].ratio, rows[i - 1].ratio / rows[i].ratio);
            ok = ok && f <= 2.0;
        }
    }
    const double hi = std::max({rows[1].ratio, rows[2].ratio, rows[3].ratio});
    const double lo = std::min({rows[1].ratio, rows[2].ratio, rows[3].ratio});
    ok = ok && lo > 0 && hi / lo <= 2.5;
    return {ok, detail + "; top-three max/min " + fmt(hi / lo)};
}

Outcome second_moment_bound() {
    const std::vector<u64> grid = {10000, 100000, 1000000, 10000000};
    const auto rows = moment_table(kCurve, region(), grid, kBase);
    const double r_ref = double(rows[1].RQ2) / growth_scale(rows[1].X);
    const double a_ref = double(rows[1].AQ) / std::sqrt(double(rows[1].X));
    bool ok = true;
    std::string r_text, a_text;
    for (const auto& r : rows) {
        const double rr = double(r.RQ2) / growth_scale(r.X);
        const double ar = double(r.AQ) / std::sqrt(double(r.X));
        ok = ok && rr <= 3 * r_ref && ar <= 3 * a_ref;
        r_text += " " + fmt(rr);
        a_text += " " + fmt(ar);
    }
    return {ok, "R2/(sqrt X log X):" + r_text + "; A/sqrt X:" + a_text};
}

Outcome sign_proportions() {
    const u64 X = 10000000;
    const auto reps = representations(kCurve, region(), X);
    const Census census = census_from_representations(kCurve, region(), reps);
    const auto s = signed_first_moment(census, X, kBase);
    const double defined = double(s.defined_plus_count + s.defined_minus_count);
    const double p_plus = defined > 0 ? s.defined_plus_count / defined : 0.0;
    const double p_minus = defined > 0 ? s.defined_minus_count / defined : 0.0;
    const auto omega = omega_lower_bound(s.plus, census.size(), 0, second_moment(reps, X));
    const bool ok = p_plus >= 0.05 && p_minus >= 0.05 && omega.rank_lower_bound > 1.02;
    return {ok, "defined " + fmt(defined) + " of " + std::to_string(census.size()) + ", shares +" + fmt(p_plus) +
                    " -" + fmt(p_minus) + ", 1+Omega_plus = " + fmt(omega.rank_lower_bound) + " (needs > 1.02)"};
}

Outcome sieve_main_term() {
    std::vector<u64> checkpoints;
    for (u64 X = 2; X <= 100000; X *= 2) checkpoints.push_back(X);
    bool ok = true;
    std::string detail;
    for (auto [q, m] : std::vector<std::pair<u64, u64>>{{1, 1}, {2, 1}, {3, 2}, {4, 3}}) {
        const auto exact = mt_sum_sweep(checkpoints, 1, q, m);
        double sup = 0.0;
        double prev_sup = -1.0;
        double worst_growth = 0.0;
        for (u64 X : checkpoints) {
            const Interval main = mt_main_term(X, q, m, 10000);
            const double e = exact.at(X).get_d();
            const double resid = std::abs(e - main.mid());
            sup = std::max(sup, resid / std::sqrt(double(X)));
            if (prev_sup > 0) worst_growth = std::max(worst_growth, sup / prev_sup - 1.0);
            prev_sup = sup;
        }
        ok = ok && worst_growth <= 0.10;
        detail += "(q=" + std::to_string(q) + ",m=" + std::to_string(m) + ") sup " + fmt(sup) + " growth " +
                  fmt(worst_growth) + "; ";
    }
    return {ok, detail};
}

Outcome rho_suite() {
    std::vector<u64> small(1001);
    for (u64 n = 1; n <= 1000; ++n) small[n] = rho_brute(kCurve, n);
    u64 mult_bad = 0, pairs = 0;
    for (u64 m = 1; m <= 1000; ++m) {
        for (u64 n = m + 1; n <= 1000; ++n) {
            if (gcd(m, n) != 1) continue;
            ++pairs;
            if (rho(kCurve, m * n) != small[m] * small[n]) ++mult_bad;
            // a thinned set of products is also scanned directly
            if ((m * 7919 + n) % 997 == 0 && rho_brute(kCurve, m * n) != small[m] * small[n]) ++mult_bad;
        }
    }
    u64 hensel_bad = 0, stewart_bad = 0, library_bad = 0;
    for (auto p32 : primes_up_to(499)) {
        const u64 p = p32;
        const u64 r1 = oracle::root_count(0, 2, p, 1);
        const int v = valuation(static_cast<u64>(std::llabs(kCurve.delta_F)), p);
        for (int k = 1; k <= 6; ++k) {
            const u64 r = oracle::root_count(0, 2, p, k);
            if (rho_prime_power(kCurve, p, k) != r) ++library_bad;
            if (v == 0 && k <= 4 && r != r1) ++hensel_bad;
            const double lhs = (double(r) - 1.0) * (double(r) - 1.0);
            if (r > 1 && lhs > 4.0 * std::pow(double(p), v)) ++stewart_bad;
            if (!check_stewart(kCurve, p, k)) ++stewart_bad;
        }
    }
    const bool ok = mult_bad == 0 && hensel_bad == 0 && stewart_bad == 0 && library_bad == 0;
    return {ok, std::to_string(pairs) + " coprime pairs, violations: multiplicativity " + std::to_string(mult_bad) +
                    ", lifting " + std::to_string(hensel_bad) + ", Stewart " + std::to_string(stewart_bad) +
                    ", library vs lifting " + std::to_string(library_bad)};
}

Outcome euler_products() {
    double min_lo = 1e300, min_shrink = 1e300;
    for (u64 w = 1; w <= 1000; ++w) {
        const Interval coarse = l_of_w(kCurve, w, kBase.N_E, 1000);
        const Interval fine = l_of_w(kCurve, w, kBase.N_E, 10000);
        min_lo = std::min(min_lo, fine.lo);
        min_shrink = std::min(min_shrink, coarse.width() / fine.width());
    }
    const auto k = derive_constants(kCurve, kAlpha, 0.0, 0.0, kBase.N_E);
    const bool ok = min_lo > 0 && k.c9_lower > 0 && min_shrink >= 4.0;
    return {ok, "min lower bound " + fmt(min_lo) + ", c9_lower " + fmt(k.c9_lower) + ", min width shrink " +
                    fmt(min_shrink) + "x"};
}

Outcome v_main_term() {
    const auto k = derive_constants(kCurve, kAlpha, 0.0, 0.0, kBase.N_E);
    const Residues res = least_residues(kCurve, kBase.N_E);
    std::vector<double> vals;
    for (u64 X : {10000ULL, 100000ULL, 1000000ULL}) {
        for (u64 ell : {1ULL, 5ULL, 7ULL}) {
            for (u64 w = 1; w <= 20; ++w) {
                const LatticeSum v = v_wl_sum(k, w, ell, X, res);
                if (v.bad_residues) continue;
                const double resid = static_cast<double>(v.value) - v_wl_main(k, w, ell, X);
                vals.push_back(std::abs(resid) / std::pow(double(X), 0.375));
            }
        }
    }
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const double mx = sorted.back();
    const bool ok = mx <= 3 * median;
    return {ok, std::to_string(n) + " parameter sets, residues (" + std::to_string(res.u0) + "," +
                    std::to_string(res.v0) + "," + std::to_string(res.w0) + "), max " + fmt(mx) + ", median " +
                    fmt(median) + ", ratio " + fmt(median > 0 ? mx / median : INFINITY)};
}

Outcome height_engine() {
    const HeightEngine engine(kCurve);
    double worst_dup = 0, worst_oracle = 0, gap_min = 1e300, gap_max = -1e300;
    std::size_t points = 0;
    for (const auto& f : oracle::height_fixtures()) {
        const auto [d, P] = point_from_triple(kCurve, f.u, f.v, f.w);
        const TwistedCurve E{kCurve, d};
        const double h = canonical_height(engine, E, P);
        const double h2 = canonical_height(engine, E, multiply(E, P, 2));
        worst_dup = std::max(worst_dup, std::abs(h2 - 4 * h));
        worst_oracle = std::max(worst_oracle, std::abs(h - f.hhat));
        const double gap = h - 0.5 * naive_height(P);
        gap_min = std::min(gap_min, gap);
        gap_max = std::max(gap_max, gap);
        ++points;
    }
    const double bound = engine.term_bound() / 6.0;
    const bool ok = points == 100 && worst_dup <= 1e-8 && worst_oracle <= 1e-8 && gap_min >= -bound &&
                    gap_max <= bound;
    return {ok, std::to_string(points) + " points, max |h(2P)-4h(P)| " + fmt(worst_dup) + ", max |h - PARI| " +
                    fmt(worst_oracle) + ", gap in [" + fmt(gap_min) + ", " + fmt(gap_max) + "] within +-" +
                    fmt(bound)};
}

Outcome determinism() {
    const std::vector<std::vector<std::string>> runs = {
        {"twistrank", "census", "--X", "10000000"},
        {"twistrank", "census", "--X", "1000000", "--mode", "certified"},
        {"twistrank", "moments", "--x-grid", "1e4,1e5,1e6,1e7", "--N-E", "1728", "--omega-E", "-1"}};
    std::size_t differing = 0;
    std::size_t bytes = 0;
    for (const auto& base : runs) {
        std::string first;
        for (const char* shards : {"1", "4", "16"}) {
            auto args = base;
            args.insert(args.end(), {"--shards", shards});
            std::ostringstream out, err;
            if (run_cli(args, out, err) != 0) return {false, "run failed: " + err.str()};
            if (first.empty()) {
                first = out.str();
                bytes += first.size();
            } else if (out.str() != first) {
                ++differing;
            }
        }
    }
    return {differing == 0, "3 reports x {1,4,16} shards, " + std::to_string(bytes) + " bytes, differing " +
                                std::to_string(differing)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;  // 0 = no runtime bound
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "oracle equivalence", 60, oracle_equivalence},
        {2, "diagonal bijection", 120, diagonal_bijection},
        {3, "growth law", 600, growth_law},
        {4, "second-moment bound", 0, second_moment_bound},
        {5, "sign proportions", 0, sign_proportions},
        {6, "sieve main term", 300, sieve_main_term},
        {7, "rho suite", 0, rho_suite},
        {8, "Euler products", 0, euler_products},
        {9, "V main term", 0, v_main_term},
        {10, "height engine", 0, height_engine},
        {11, "determinism", 0, determinism},
    };
    int unexpected = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0 && secs >= c.limit_s) {
            o.pass = false;
            o.detail += "; over the " + fmt(c.limit_s) + " s budget";
        }
        const bool known = kKnownRed.count(c.id) > 0;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << " ["
                  << fmt(secs) << " s]" << (!o.pass && known ? " (known red)" : "") << '\n'
                  << std::flush;
        if (!o.pass && !known) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
