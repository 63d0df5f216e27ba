#include "twistrank/moments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "twistrank/csv.hpp"
#include "twistrank/error.hpp"

namespace twistrank {

namespace {

bool same_point(const Triple& a, const Triple& b) {
    const u128 lhs = static_cast<u128>(a.u) * (static_cast<u128>(b.v) * b.w * b.w);
    const u128 rhs = static_cast<u128>(b.u) * (static_cast<u128>(a.v) * a.w * a.w);
    return lhs == rhs;
}

double log_scale(u64 X) {
    const double x = static_cast<double>(X);
    return X > 1 ? std::sqrt(x) * std::log(x) : 0.0;
}

// Membership of an image triple: the region test plus, in relaxed mode, the
// search box that defines the relaxed family.
bool image_ok(const CurveParams& c, const RegionParams& rp, const Triple& t, u64 box) {
    if (rp.mode == RegionMode::relaxed) {
        const u128 s = static_cast<u128>(t.v) * t.w * t.w;
        return t.u <= box && s <= box;
    }
    return in_region(c, t, rp);
}

u128 cube(u64 a) { return static_cast<u128>(a) * a * a; }

}  // namespace

u64 second_moment(const RepresentationTable& reps, u64 X) {
    u64 total = 0;
    for (auto it = reps.begin(); it != reps.end() && it->first <= X; ++it) {
        const u64 r = it->second.size();
        total += r * r;
    }
    return total;
}

u64 second_moment(const CurveParams& c, const RegionParams& rp, u64 X, unsigned shards) {
    return second_moment(representations(c, rp, X, shards), X);
}

u64 m_q_pairs(const std::vector<Triple>& reps) {
    u64 count = 0;
    for (const auto& a : reps) {
        for (const auto& b : reps) {
            if (same_point(a, b)) ++count;
        }
    }
    return count;
}

u64 m_q_brute(const CurveParams& c, const RegionParams& rp, u64 d) {
    const auto reps = representations(c, rp, d);
    const auto it = reps.find(d);
    return it == reps.end() ? 0 : m_q_pairs(it->second);
}

std::map<u64, u64> m_q_brute_table(const RepresentationTable& reps) {
    std::map<u64, u64> out;
    for (const auto& [d, list] : reps) out.emplace(d, m_q_pairs(list));
    return out;
}

std::map<u64, u64> m_q_param_table(const CurveParams& c, const RegionParams& rp, u64 X) {
    const u64 M = search_box(rp, X);
    const bool mono = is_monotone(c);
    const i128 cap = static_cast<i128>(X);
    std::map<u64, u64> out;
    for (u64 x = 1; cube(x) * x <= M; ++x) {
        for (u64 y = 1;; ++y) {
            const u64 mx = std::max(x, y);
            // v w^2 x^3 y^3 max(x, y) <= M bounds every inner loop.
            const u128 base = cube(x) * cube(y) * mx;
            if (base > M) break;
            if (gcd(x, y) != 1) continue;
            const u64 vw_cap = static_cast<u64>(M / base);
            for (u64 w = 1; w * w <= vw_cap; ++w) {
                const u64 v_cap = vw_cap / (w * w);
                for (u64 v = 1; v <= v_cap; ++v) {
                    if (mono && q_poly_wide(c, {x, v * y * y * y, w * x * x}) > cap) break;
                    for (u64 u = 1; u * mx <= M; ++u) {
                        const Triple t1{u * x, v * y * y * y, w * x * x};
                        const i128 q1 = q_poly_wide(c, t1);
                        if (q1 > cap) {
                            if (mono) break;
                            continue;
                        }
                        if (q1 < 1) continue;
                        const Triple t2{u * y, v * x * x * x, w * y * y};
                        if (q_poly_wide(c, t2) != q1) continue;
                        if (!image_ok(c, rp, t1, M) || !image_ok(c, rp, t2, M)) continue;
                        ++out[static_cast<u64>(q1)];
                    }
                }
            }
        }
    }
    return out;
}

u64 m_q_param(const CurveParams& c, const RegionParams& rp, u64 d) {
    const auto table = m_q_param_table(c, rp, d);
    const auto it = table.find(d);
    return it == table.end() ? 0 : it->second;
}

DiagonalSplit diagonal_and_offdiagonal(const RepresentationTable& reps, u64 X) {
    DiagonalSplit s;
    for (auto it = reps.begin(); it != reps.end() && it->first <= X; ++it) {
        const u64 r = it->second.size();
        s.RQ2 += r * r;
        s.MQ += m_q_pairs(it->second);
    }
    s.AQ = s.RQ2 - s.MQ;
    const double scale = log_scale(X);
    s.MQ_ratio = scale > 0 ? static_cast<double>(s.MQ) / scale : 0.0;
    s.AQ_ratio = static_cast<double>(s.AQ) / std::sqrt(static_cast<double>(X));
    return s;
}

DiagonalSplit diagonal_and_offdiagonal(const CurveParams& c, const RegionParams& rp, u64 X, unsigned shards) {
    return diagonal_and_offdiagonal(representations(c, rp, X, shards), X);
}

SignedMoment signed_first_moment(const Census& census, u64 X, const BaseCurveData& base) {
    if (base.N_E < 1 || (base.omega_E != 1 && base.omega_E != -1)) {
        throw Error(ErrorCode::MissingBaseData, "conductor and root number required");
    }
    const u64 q = sign_modulus(base);
    SignedMoment s;
    for (auto it = census.begin(); it != census.end() && it->first <= X; ++it) {
        const u64 d = it->first;
        const u64 r = it->second.r_q();
        const u64 a = d % q;
        if (gcd(a, q) == 1) s.by_class[a] += r;
        const auto sign = root_number(d, base);
        if (!sign) {
            s.excluded += r;
            ++s.excluded_count;
        } else if (*sign > 0) {
            s.plus += r;
            ++s.defined_plus_count;
        } else {
            s.minus += r;
            ++s.defined_minus_count;
        }
    }
    return s;
}

SignedMoment signed_first_moment(const CurveParams& c, const RegionParams& rp, u64 X, const BaseCurveData& base,
                                 unsigned shards) {
    return signed_first_moment(census_from_representations(c, rp, representations(c, rp, X, shards)), X, base);
}

OmegaBound omega_lower_bound(u64 S_nu, std::size_t census_count, std::size_t certified_count, u64 RQ2) {
    if (census_count == 0 || RQ2 == 0) throw Error(ErrorCode::EmptyFamily, "census is empty");
    const long double s2 = static_cast<long double>(S_nu) * static_cast<long double>(S_nu);
    OmegaBound b;
    b.bound = static_cast<double>(s2 / (static_cast<long double>(census_count) * static_cast<long double>(RQ2)));
    if (certified_count > 0) {
        b.bound_certified =
            static_cast<double>(s2 / (static_cast<long double>(certified_count) * static_cast<long double>(RQ2)));
    }
    b.rank_lower_bound = 1.0 + b.bound;
    return b;
}

OmegaBound omega_lower_bound(const CurveParams& c, const RegionParams& rp, u64 X, const BaseCurveData& base, int nu,
                             unsigned shards) {
    const auto reps = representations(c, rp, X, shards);
    const Census census = census_from_representations(c, rp, reps);
    const SignedMoment s = signed_first_moment(census, X, base);
    const auto certified = static_cast<std::size_t>(
        std::count_if(census.begin(), census.end(), [](const auto& kv) { return kv.second.certified; }));
    return omega_lower_bound(s.of(nu), census.size(), certified, second_moment(reps, X));
}

std::vector<MomentRow> moment_table(const CurveParams& c, const RegionParams& rp, const std::vector<u64>& X_grid,
                                    const BaseCurveData& base, unsigned shards) {
    if (X_grid.empty()) return {};
    if (!std::is_sorted(X_grid.begin(), X_grid.end())) {
        throw Error(ErrorCode::InvalidArgument, "X grid must be increasing");
    }
    const auto reps = representations(c, rp, X_grid.back(), shards);
    const Census census = census_from_representations(c, rp, reps);
    std::vector<MomentRow> rows;
    for (u64 X : X_grid) {
        const DiagonalSplit split = diagonal_and_offdiagonal(reps, X);
        const SignedMoment s = signed_first_moment(census, X, base);
        std::size_t count = 0, certified = 0;
        for (auto it = census.begin(); it != census.end() && it->first <= X; ++it) {
            ++count;
            if (it->second.certified) ++certified;
        }
        MomentRow row{X, split.RQ2, split.MQ, split.AQ, s.plus, s.minus, s.excluded, count, 0.0, 0.0};
        if (count > 0) {
            row.omega_bound_plus = omega_lower_bound(s.plus, count, certified, split.RQ2).bound;
            row.omega_bound_minus = omega_lower_bound(s.minus, count, certified, split.RQ2).bound;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_moments_csv(std::ostream& out, const std::vector<MomentRow>& rows) {
    out << "X,RQ2,MQ,AQ,SQ_plus,SQ_minus,excluded,count,omega_bound_plus,omega_bound_minus\n";
    for (const auto& r : rows) {
        out << r.X << ',' << r.RQ2 << ',' << r.MQ << ',' << r.AQ << ',' << r.SQ_plus << ',' << r.SQ_minus << ','
            << r.excluded << ',' << r.count << ',' << csv::format_double(r.omega_bound_plus) << ','
            << csv::format_double(r.omega_bound_minus) << '\n';
    }
}

std::vector<MomentRow> read_moments_csv(std::istream& in) {
    const auto header = csv::next_line(in);
    if (!header || header->rfind("X,RQ2", 0) != 0) throw Error(ErrorCode::Io, "missing moments header");
    std::vector<MomentRow> rows;
    while (const auto line = csv::next_line(in)) {
        const auto f = csv::split(*line);
        if (f.size() != 10) throw Error(ErrorCode::Io, "moments row needs 10 fields");
        MomentRow r;
        r.X = csv::parse_int<u64>(f[0]);
        r.RQ2 = csv::parse_int<u64>(f[1]);
        r.MQ = csv::parse_int<u64>(f[2]);
        r.AQ = csv::parse_int<u64>(f[3]);
        r.SQ_plus = csv::parse_int<u64>(f[4]);
        r.SQ_minus = csv::parse_int<u64>(f[5]);
        r.excluded = csv::parse_int<u64>(f[6]);
        r.count = csv::parse_int<u64>(f[7]);
        r.omega_bound_plus = csv::parse_double(f[8]);
        r.omega_bound_minus = csv::parse_double(f[9]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace twistrank
