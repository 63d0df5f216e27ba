#include "twistrank/family.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "twistrank/csv.hpp"
#include "twistrank/error.hpp"

namespace twistrank {

namespace {

i128 checked_mul(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "Q(u,v,w) overflows 128 bits");
    return r;
}

i128 checked_add(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "Q(u,v,w) overflows 128 bits");
    return r;
}

constexpr u64 kMaxTwist = 9223372036854775807ULL;

// gamma = 1/4 + 2 alpha as a reduced fraction num/den when alpha is (to
// double precision) a rational with a modest denominator.
std::optional<std::pair<u64, u64>> exact_exponent(double alpha) {
    double x = alpha;
    i64 h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int i = 0; i < 40; ++i) {
        const double a = std::floor(x);
        const i64 ai = static_cast<i64>(a);
        const i64 h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > 100000) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - alpha) < 1e-15 * std::max(1.0, alpha)) {
            const u64 num = static_cast<u64>(k1 + 8 * h1), den = static_cast<u64>(4 * k1);
            const u64 g = gcd(num, den);
            return std::pair{num / g, den / g};
        }
        const double frac = x - a;
        if (frac < 1e-18) break;
        x = 1.0 / frac;
    }
    return std::nullopt;
}

// m <= e^{-2 c2} Q^gamma; ties (after the log comparison) are settled in
// exact arithmetic when c2 = 0 and gamma is a small-denominator rational.
bool upper_ok(u64 m, u64 q, const RegionParams& rp) {
    const double lhs = std::log(static_cast<double>(m));
    const double rhs = -2.0 * rp.c2 + rp.exponent() * std::log(static_cast<double>(q));
    const double diff = rhs - lhs;
    if (std::fabs(diff) > 1e-9 * std::max(1.0, std::fabs(rhs))) return diff > 0;
    if (rp.c2 == 0.0) {
        if (const auto frac = exact_exponent(rp.alpha); frac && frac->second <= 20000) {
            mpz_class lhs_exact, rhs_exact;
            mpz_ui_pow_ui(lhs_exact.get_mpz_t(), m, frac->second);
            mpz_ui_pow_ui(rhs_exact.get_mpz_t(), q, frac->first);
            return lhs_exact <= rhs_exact;
        }
    }
    return true;
}

bool lower_ok(u64 m, const RegionParams& rp) {
    if (rp.c1 == 0.0) return m >= 1;
    const double diff = std::log(static_cast<double>(m)) + 2.0 * rp.c1;
    if (std::fabs(diff) > 1e-12) return diff > 0;
    return true;
}

}  // namespace

u64 search_box(const RegionParams& rp, u64 X) {
    if (rp.mode == RegionMode::relaxed) return X;
    const double m = std::exp(-2.0 * rp.c2 + rp.exponent() * std::log(static_cast<double>(X)));
    if (m >= 1e18) throw Error(ErrorCode::Overflow, "search box too large");
    return static_cast<u64>(std::floor(m * (1.0 + 1e-9))) + 1;
}

std::string_view to_string(RegionMode mode) {
    switch (mode) {
        case RegionMode::region: return "region";
        case RegionMode::certified: return "certified";
        case RegionMode::relaxed: return "relaxed";
    }
    return "region";
}

RegionMode parse_region_mode(std::string_view text) {
    if (text == "region") return RegionMode::region;
    if (text == "certified") return RegionMode::certified;
    if (text == "relaxed") return RegionMode::relaxed;
    throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "'");
}

RegionParams make_region(double alpha, double c1, double c2, RegionMode mode, double max_alpha) {
    if (!(alpha > 0.0) || !(alpha < max_alpha)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, " + csv::format_double(max_alpha) + ")");
    }
    if (!(c1 <= c2)) throw Error(ErrorCode::InvalidArgument, "c1 must not exceed c2");
    return RegionParams{alpha, c1, c2, mode};
}

i128 q_poly_wide(const CurveParams& c, const Triple& t) {
    const i128 u = static_cast<i128>(t.u), v = static_cast<i128>(t.v), w = static_cast<i128>(t.w);
    const i128 s = checked_mul(v, checked_mul(w, w));
    const i128 u3 = checked_mul(u, checked_mul(u, u));
    const i128 s2 = checked_mul(s, s);
    const i128 mid = checked_mul(checked_mul(static_cast<i128>(c.A), u), s2);
    const i128 top = checked_mul(static_cast<i128>(c.B), checked_mul(s2, s));
    return checked_mul(v, checked_add(checked_add(u3, mid), top));
}

i64 q_poly(const CurveParams& c, const Triple& t) {
    const i128 q = q_poly_wide(c, t);
    if (q > static_cast<i128>(kMaxTwist) || q < -static_cast<i128>(kMaxTwist)) {
        throw Error(ErrorCode::Overflow, "Q(u,v,w) exceeds 2^63");
    }
    return static_cast<i64>(q);
}

bool in_region(const CurveParams& c, const Triple& t, const RegionParams& rp) {
    const i64 q = q_poly(c, t);
    if (q < 1) throw Error(ErrorCode::NonPositiveTwist, "Q(u,v,w) < 1");
    if (rp.mode == RegionMode::relaxed) return true;
    const u128 s = static_cast<u128>(t.v) * t.w * t.w;
    if (s > kMaxTwist) return false;
    const u64 m = std::max<u64>(t.u, static_cast<u64>(s));
    return lower_ok(m, rp) && upper_ok(m, static_cast<u64>(q), rp);
}

u64 w_limit(const CurveParams&, const RegionParams& rp, u64 X) {
    const u64 box = search_box(rp, X);
    u64 w = static_cast<u64>(std::sqrt(static_cast<double>(box)));
    while ((w + 1) * (w + 1) <= box) ++w;
    while (w > 0 && w * w > box) --w;
    return std::max<u64>(w, 1);
}

std::vector<WShard> partition_w(const CurveParams& c, const RegionParams& rp, u64 X, unsigned count) {
    const u64 top = w_limit(c, rp, X) + 1;
    count = std::max(1u, count);
    std::vector<WShard> shards;
    const u64 total = top - 1;
    u64 lo = 1;
    for (unsigned i = 0; i < count; ++i) {
        const u64 len = total / count + (i < total % count ? 1 : 0);
        shards.push_back({lo, lo + len});
        lo += len;
    }
    return shards;
}

void enumerate_triples(const CurveParams& c, const RegionParams& rp, u64 X, std::optional<WShard> shard,
                       const TripleSink& sink) {
    if (X < 1) throw Error(ErrorCode::InvalidArgument, "X must be at least 1");
    X = std::min(X, kMaxTwist);
    const u64 box = search_box(rp, X);
    const bool mono = is_monotone(c);
    const bool relaxed = rp.mode == RegionMode::relaxed;
    const u64 w_top = w_limit(c, rp, X);
    const u64 w_lo = shard ? std::max<u64>(shard->lo, 1) : 1;
    const u64 w_hi = shard ? std::min(shard->hi, w_top + 1) : w_top + 1;

    for (u64 w = w_lo; w < w_hi; ++w) {
        const u64 v_top = box / (w * w);
        for (u64 v = 1; v <= v_top; ++v) {
            const u64 s = v * w * w;
            if (mono && q_poly_wide(c, {1, v, w}) > static_cast<i128>(X)) break;
            for (u64 u = 1; u <= box; ++u) {
                const i128 q = q_poly_wide(c, {u, v, w});
                if (q > static_cast<i128>(X)) {
                    if (mono) break;
                    continue;
                }
                if (q < 1) continue;
                const u64 d = static_cast<u64>(q);
                if (!relaxed) {
                    const u64 m = std::max(u, s);
                    if (!lower_ok(m, rp) || !upper_ok(m, d, rp)) continue;
                }
                sink(Triple{u, v, w}, d);
            }
        }
    }
}

std::vector<TripleValue> collect_triples(const CurveParams& c, const RegionParams& rp, u64 X,
                                         std::optional<WShard> shard) {
    std::vector<TripleValue> out;
    enumerate_triples(c, rp, X, shard, [&](const Triple& t, u64 d) { out.push_back({t, d}); });
    return out;
}

RepresentationTable representations(const CurveParams& c, const RegionParams& rp, u64 X, unsigned shards) {
    const auto parts = partition_w(c, rp, X, shards);
    std::vector<std::vector<TripleValue>> results(parts.size());
    if (parts.size() == 1) {
        results[0] = collect_triples(c, rp, X, parts[0]);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            pool.emplace_back([&, i] { results[i] = collect_triples(c, rp, X, parts[i]); });
        }
    }
    RepresentationTable table;
    for (const auto& part : results) {
        for (const auto& tv : part) table[tv.d].push_back(tv.t);
    }
    for (auto& [d, list] : table) std::sort(list.begin(), list.end());
    return table;
}

void FamilyRecord::merge(const FamilyRecord& other) {
    witnesses.insert(witnesses.end(), other.witnesses.begin(), other.witnesses.end());
    std::sort(witnesses.begin(), witnesses.end());
    if (other.min_hhat) min_hhat = min_hhat ? std::min(*min_hhat, *other.min_hhat) : *other.min_hhat;
    certified = certified || other.certified;
}

void merge_census(Census& into, const Census& from) {
    for (const auto& [d, rec] : from) {
        auto [it, inserted] = into.try_emplace(d, rec);
        if (!inserted) it->second.merge(rec);
    }
}

Census census_from_representations(const CurveParams& c, const RegionParams& rp, const RepresentationTable& reps) {
    const SquarefreeTester squarefree;
    Census census;
    const HeightEngine* engine = nullptr;
    std::optional<HeightEngine> engine_store;
    if (rp.mode == RegionMode::certified) {
        engine_store.emplace(c);
        engine = &*engine_store;
    }
    for (const auto& [d, list] : reps) {
        if (!squarefree(d)) continue;
        FamilyRecord rec{d, list, std::nullopt, false};
        if (engine) {
            const TwistedCurve twist{c, d};
            const double bound = (0.125 + rp.alpha) * std::log(static_cast<double>(d));
            for (const auto& t : list) {
                const auto [dd, point] = point_from_triple(c, t.u, t.v, t.w);
                if (is_torsion(twist, point)) continue;
                const double h = canonical_height(*engine, twist, point);
                rec.min_hhat = rec.min_hhat ? std::min(*rec.min_hhat, h) : h;
            }
            rec.certified = rec.min_hhat && *rec.min_hhat <= bound;
        }
        census.emplace(d, std::move(rec));
    }
    return census;
}

Census build_census(const CurveParams& c, const RegionParams& rp, u64 X, unsigned shards) {
    return census_from_representations(c, rp, representations(c, rp, X, shards));
}

std::size_t census_count(const Census& census) { return census.size(); }

std::vector<GrowthRow> growth_table(const CurveParams& c, const RegionParams& rp, std::vector<u64> X_grid,
                                    unsigned shards) {
    if (X_grid.empty()) return {};
    if (!std::is_sorted(X_grid.begin(), X_grid.end())) {
        throw Error(ErrorCode::InvalidArgument, "X grid must be increasing");
    }
    const u64 X_max = X_grid.back();
    const RepresentationTable reps = representations(c, rp, X_max, shards);
    const Census census = census_from_representations(c, rp, reps);
    std::vector<GrowthRow> rows;
    for (u64 X : X_grid) {
        GrowthRow row{X, 0, 0, 0.0, 0.0};
        u64 w_max = 0;
        for (auto it = reps.begin(); it != reps.end() && it->first <= X; ++it) {
            for (const auto& t : it->second) w_max = std::max(w_max, t.w);
        }
        for (auto it = census.begin(); it != census.end() && it->first <= X; ++it) {
            ++row.count;
            if (it->second.certified) ++row.certified;
        }
        const double x = static_cast<double>(X);
        row.ratio = X > 1 ? static_cast<double>(row.count) / (std::sqrt(x) * std::log(x)) : 0.0;
        row.w_ratio = static_cast<double>(w_max) / std::pow(x, 4.0 * rp.alpha);
        rows.push_back(row);
    }
    return rows;
}

std::vector<CensusRow> census_rows(const Census& census) {
    std::vector<CensusRow> rows;
    rows.reserve(census.size());
    for (const auto& [d, rec] : census) {
        rows.push_back({d, rec.r_q(), rec.min_hhat, rec.certified, rec.witnesses.front()});
    }
    return rows;
}

void write_census_csv(std::ostream& out, const std::vector<CensusRow>& rows) {
    out << "d,r_Q,min_hhat,certified,witness_u,witness_v,witness_w\n";
    for (const auto& r : rows) {
        out << r.d << ',' << r.r_q << ',' << (r.min_hhat ? csv::format_double(*r.min_hhat) : "") << ','
            << (r.certified ? 1 : 0) << ',' << r.witness.u << ',' << r.witness.v << ',' << r.witness.w << '\n';
    }
}

std::vector<CensusRow> read_census_csv(std::istream& in) {
    std::vector<CensusRow> rows;
    const auto header = csv::next_line(in);
    if (!header || header->rfind("d,r_Q", 0) != 0) throw Error(ErrorCode::Io, "missing census header");
    while (const auto line = csv::next_line(in)) {
        const auto f = csv::split(*line);
        if (f.size() != 7) throw Error(ErrorCode::Io, "census row needs 7 fields");
        CensusRow r;
        r.d = csv::parse_int<u64>(f[0]);
        r.r_q = csv::parse_int<u64>(f[1]);
        if (!f[2].empty()) r.min_hhat = csv::parse_double(f[2]);
        r.certified = f[3] == "1";
        r.witness = {csv::parse_int<u64>(f[4]), csv::parse_int<u64>(f[5]), csv::parse_int<u64>(f[6])};
        rows.push_back(r);
    }
    return rows;
}

}  // namespace twistrank
