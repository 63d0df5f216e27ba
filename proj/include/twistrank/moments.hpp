#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "twistrank/family.hpp"
#include "twistrank/signs.hpp"

namespace twistrank {

/// Sum of r_Q(d)^2 over every d <= X, square-free or not.
u64 second_moment(const RepresentationTable& reps, u64 X);
u64 second_moment(const CurveParams& curve, const RegionParams& rp, u64 X, unsigned shards = 1);

/// Ordered pairs of representations that agree as points (u : v w^2) of P^1.
u64 m_q_pairs(const std::vector<Triple>& reps);

/// m_Q(d) from the representations of d, by cross-multiplication.
u64 m_q_brute(const CurveParams& curve, const RegionParams& rp, u64 d);

/// m_Q(d) by counting 5-tuples (u, v, w, x, y) with gcd(x, y) = 1 whose
/// images (ux, vy^3, wx^2) and (uy, vx^3, wy^2) both lie in the region.
u64 m_q_param(const CurveParams& curve, const RegionParams& rp, u64 d);

/// Both oracles for every d <= X at once; entries with value 0 are omitted.
std::map<u64, u64> m_q_brute_table(const RepresentationTable& reps);
std::map<u64, u64> m_q_param_table(const CurveParams& curve, const RegionParams& rp, u64 X);

struct DiagonalSplit {
    u64 RQ2 = 0;
    u64 MQ = 0;
    u64 AQ = 0;
    double MQ_ratio = 0.0;  // M_Q / (X^{1/2} log X)
    double AQ_ratio = 0.0;  // A_Q / X^{1/2}
};

DiagonalSplit diagonal_and_offdiagonal(const RepresentationTable& reps, u64 X);
DiagonalSplit diagonal_and_offdiagonal(const CurveParams& curve, const RegionParams& rp, u64 X,
                                       unsigned shards = 1);

struct SignedMoment {
    u64 plus = 0;
    u64 minus = 0;
    u64 excluded = 0;  // mass of square-free d whose root number is undefined
    u64 excluded_count = 0;
    u64 defined_plus_count = 0;
    u64 defined_minus_count = 0;
    /// S_Q(a) for invertible a mod 4 N_E, over square-free d.
    std::map<u64, u64> by_class;

    u64 of(int nu) const { return nu > 0 ? plus : minus; }
};

SignedMoment signed_first_moment(const Census& census, u64 X, const BaseCurveData& base);
SignedMoment signed_first_moment(const CurveParams& curve, const RegionParams& rp, u64 X,
                                 const BaseCurveData& base, unsigned shards = 1);

struct OmegaBound {
    double bound = 0.0;            // S^2 / (#census R_Q^(2))
    double bound_certified = 0.0;  // same with the certified count as denominator; 0 when none certified
    double rank_lower_bound = 1.0; // 1 + bound
};

/// Throws EmptyFamily when the census is empty.
OmegaBound omega_lower_bound(u64 S_nu, std::size_t census_count, std::size_t certified_count, u64 RQ2);
OmegaBound omega_lower_bound(const CurveParams& curve, const RegionParams& rp, u64 X, const BaseCurveData& base,
                             int nu, unsigned shards = 1);

struct MomentRow {
    u64 X = 0;
    u64 RQ2 = 0;
    u64 MQ = 0;
    u64 AQ = 0;
    u64 SQ_plus = 0;
    u64 SQ_minus = 0;
    u64 excluded = 0;
    u64 count = 0;
    double omega_bound_plus = 0.0;
    double omega_bound_minus = 0.0;
    friend bool operator==(const MomentRow&, const MomentRow&) = default;
};

/// One row per grid point, computed from a single enumeration at the largest X.
std::vector<MomentRow> moment_table(const CurveParams& curve, const RegionParams& rp, const std::vector<u64>& X_grid,
                                    const BaseCurveData& base, unsigned shards = 1);

void write_moments_csv(std::ostream& out, const std::vector<MomentRow>& rows);
std::vector<MomentRow> read_moments_csv(std::istream& in);

}  // namespace twistrank
