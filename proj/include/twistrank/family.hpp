#pragma once

#include <compare>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twistrank/arith.hpp"
#include "twistrank/curve.hpp"

namespace twistrank {

enum class RegionMode { region, certified, relaxed };

std::string_view to_string(RegionMode mode);
RegionMode parse_region_mode(std::string_view text);

/// Small-height region: e^{-2 c1} <= max(u, v w^2) <= e^{-2 c2} Q^{1/4 + 2 alpha}.
///
/// `relaxed` drops both inequalities and keeps only Q >= 1 inside the box
/// max(u, v w^2) <= X; it is the reference family for oracle tests.
struct RegionParams {
    double alpha = 0.008;
    double c1 = 0.0;
    double c2 = 0.0;
    RegionMode mode = RegionMode::region;

    double exponent() const { return 0.25 + 2.0 * alpha; }
};

/// Checks 0 < alpha < max_alpha and c1 <= c2.
RegionParams make_region(double alpha, double c1, double c2, RegionMode mode, double max_alpha = 1.0 / 24.0);

struct Triple {
    u64 u = 1, v = 1, w = 1;
    auto operator<=>(const Triple&) const = default;
};

/// Q(u, v, w) = v F(u, v w^2) in 128-bit arithmetic; throws Overflow when
/// an intermediate leaves the 128-bit range.
i128 q_poly_wide(const CurveParams& curve, const Triple& t);

/// Q(u, v, w) as a 64-bit value; throws Overflow beyond 2^63.
i64 q_poly(const CurveParams& curve, const Triple& t);

bool in_region(const CurveParams& curve, const Triple& t, const RegionParams& rp);

/// Bound on max(u, v w^2) used as the search box for a given X: the region
/// cap e^{-2 c2} X^{1/4 + 2 alpha}, or X itself in relaxed mode.
u64 search_box(const RegionParams& rp, u64 X);

/// True when Q is nondecreasing in each of u, v, w (A, B >= 0).
inline bool is_monotone(const CurveParams& c) { return c.A >= 0 && c.B >= 0; }

/// Half-open range [lo, hi) of w values.
struct WShard {
    u64 lo = 1;
    u64 hi = 0;
};

/// Largest w any triple of the search box can have for this X.
u64 w_limit(const CurveParams& curve, const RegionParams& rp, u64 X);

/// Contiguous partition of [1, w_limit] into `count` shards.
std::vector<WShard> partition_w(const CurveParams& curve, const RegionParams& rp, u64 X, unsigned count);

using TripleSink = std::function<void(const Triple&, u64 d)>;

/// Calls `sink` for every triple with 1 <= Q <= X that lies in the region,
/// in w -> v -> u order, restricted to `shard` when given.
void enumerate_triples(const CurveParams& curve, const RegionParams& rp, u64 X, std::optional<WShard> shard,
                       const TripleSink& sink);

struct TripleValue {
    Triple t;
    u64 d;
    auto operator<=>(const TripleValue&) const = default;
};

std::vector<TripleValue> collect_triples(const CurveParams& curve, const RegionParams& rp, u64 X,
                                         std::optional<WShard> shard = std::nullopt);

/// All representations d -> triples for d <= X, square-free or not. Witness
/// lists are sorted, so the result does not depend on `shards`.
using RepresentationTable = std::map<u64, std::vector<Triple>>;

RepresentationTable representations(const CurveParams& curve, const RegionParams& rp, u64 X, unsigned shards = 1);

struct FamilyRecord {
    u64 d = 0;
    std::vector<Triple> witnesses;
    std::optional<double> min_hhat;
    bool certified = false;

    u64 r_q() const { return witnesses.size(); }

    /// Commutative monoid merge for records of the same d.
    void merge(const FamilyRecord& other);
};

using Census = std::map<u64, FamilyRecord>;

void merge_census(Census& into, const Census& from);

/// Census of square-free d <= X with r_Q(d) >= 1. In certified mode every
/// witness point also gets a canonical height and a torsion check.
Census build_census(const CurveParams& curve, const RegionParams& rp, u64 X, unsigned shards = 1);
Census census_from_representations(const CurveParams& curve, const RegionParams& rp,
                                   const RepresentationTable& reps);

std::size_t census_count(const Census& census);

struct GrowthRow {
    u64 X = 0;
    std::size_t count = 0;
    std::size_t certified = 0;
    double ratio = 0.0;  // count / (X^{1/2} log X)
    double w_ratio = 0.0;  // max emitted w / X^{4 alpha}
};

/// The region does not depend on X, so a single enumeration at the largest
/// grid point serves every row.
std::vector<GrowthRow> growth_table(const CurveParams& curve, const RegionParams& rp, std::vector<u64> X_grid,
                                    unsigned shards = 1);

/// One CSV row per census entry: d, r_Q, min_hhat, certified and the first
/// witness.
struct CensusRow {
    u64 d = 0;
    u64 r_q = 0;
    std::optional<double> min_hhat;
    bool certified = false;
    Triple witness;
    friend bool operator==(const CensusRow&, const CensusRow&) = default;
};

std::vector<CensusRow> census_rows(const Census& census);
void write_census_csv(std::ostream& out, const std::vector<CensusRow>& rows);
std::vector<CensusRow> read_census_csv(std::istream& in);

}  // namespace twistrank
