#include <numeric>
#include <sstream>

#include "doctest.h"

#include "oracle.hpp"
#include "twistrank/error.hpp"
#include "twistrank/moments.hpp"

using namespace twistrank;

namespace {

const CurveParams kCurve = validate_curve(0, 2);
const BaseCurveData kBase = make_base_data(1728, -1);

RegionParams region(RegionMode mode = RegionMode::region) { return make_region(0.008, 0.0, 0.0, mode); }

}  // namespace

TEST_CASE("diagonal parametrization identity") {
    for (u64 u = 1; u <= 8; ++u)
        for (u64 v = 1; v <= 8; ++v)
            for (u64 w = 1; w <= 8; ++w)
                for (u64 x = 1; x <= 8; ++x)
                    for (u64 y = 1; y <= 8; ++y) {
                        const Triple a{u * x, v * y * y * y, w * x * x};
                        const Triple b{u * y, v * x * x * x, w * y * y};
                        REQUIRE(q_poly_wide(kCurve, a) == q_poly_wide(kCurve, b));
                    }
}

TEST_CASE("both diagonal counts agree for d <= 10^4") {
    for (auto mode : {RegionMode::region, RegionMode::relaxed}) {
        const auto rp = region(mode);
        const auto brute = m_q_brute_table(representations(kCurve, rp, 10000));
        CHECK(brute == m_q_param_table(kCurve, rp, 10000));
        for (u64 d : {3u, 34u, 66u, 129u, 1026u}) CHECK(m_q_brute(kCurve, rp, d) == m_q_param(kCurve, rp, d));
    }
}

TEST_CASE("pair counting") {
    CHECK(m_q_pairs({}) == 0);
    CHECK(m_q_pairs({{1, 1, 1}}) == 1);
    // (2 : 2) and (1 : 1) coincide in P^1, (1 : 2) does not
    CHECK(m_q_pairs({{2, 2, 1}, {1, 1, 1}, {1, 2, 1}}) == 5);
}

TEST_CASE("second moment splits into diagonal and off-diagonal parts") {
    for (auto mode : {RegionMode::region, RegionMode::relaxed}) {
        const auto rp = region(mode);
        const auto reps = representations(kCurve, rp, 1000000);
        const auto s = diagonal_and_offdiagonal(reps, 1000000);
        u64 first = 0, second = 0;
        for (const auto& [d, ts] : reps) {
            first += ts.size();
            second += ts.size() * ts.size();
        }
        CHECK(s.RQ2 == second);
        CHECK(s.RQ2 == second_moment(reps, 1000000));
        CHECK(s.MQ + s.AQ == s.RQ2);
        CHECK(s.MQ >= first);
        CHECK(second_moment(kCurve, rp, 1000000, 4) == second);
    }
}

TEST_CASE("second moment is nondecreasing in X") {
    u64 prev = 0;
    for (u64 X = 1000; X <= 10000000; X *= 10) {
        const u64 s = second_moment(kCurve, region(), X);
        CHECK(s >= prev);
        prev = s;
    }
}

TEST_CASE("signed moment partitions the first moment") {
    const u64 X = 1000000;
    const Census census = build_census(kCurve, region(), X);
    const auto s = signed_first_moment(census, X, kBase);
    u64 first = 0;
    u64 coprime_mass = 0;
    for (const auto& [d, rec] : census) {
        first += rec.r_q();
        if (gcd(d, 4 * kBase.N_E) == 1) coprime_mass += rec.r_q();
    }
    CHECK(s.plus + s.minus + s.excluded == first);
    CHECK(s.defined_plus_count + s.defined_minus_count + s.excluded_count == census.size());
    u64 class_total = 0, class_plus = 0, class_minus = 0, class_undefined = 0;
    for (const auto& [a, mass] : s.by_class) {
        CHECK(gcd(a, 4 * kBase.N_E) == 1);
        class_total += mass;
        try {
            (class_sign(a, kBase).sign > 0 ? class_plus : class_minus) += mass;
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::NoValidRepresentative);
            class_undefined += mass;
        }
    }
    // classes cover exactly the d prime to 4 N_E
    CHECK(class_total == coprime_mass);
    CHECK(class_plus <= s.plus);
    CHECK(class_minus <= s.minus);
    CHECK(class_undefined <= s.excluded);
    CHECK(s.of(1) == s.plus);
    CHECK(s.of(-1) == s.minus);
    CHECK_THROWS_AS(signed_first_moment(census, X, BaseCurveData{0, 1}), Error);
}

TEST_CASE("omega bound") {
    const auto b = omega_lower_bound(10, 5, 2, 40);
    CHECK(b.bound == doctest::Approx(0.5));
    CHECK(b.bound_certified == doctest::Approx(1.25));
    CHECK(b.rank_lower_bound == doctest::Approx(1.5));
    CHECK(omega_lower_bound(10, 5, 0, 40).bound_certified == 0.0);
    try {
        omega_lower_bound(0, 0, 0, 0);
        FAIL("expected EmptyFamily");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyFamily);
    }
    const auto direct = omega_lower_bound(kCurve, region(), 1000000, kBase, 1);
    CHECK(direct.bound > 0);
    CHECK(direct.rank_lower_bound == doctest::Approx(1 + direct.bound));
}

TEST_CASE("moment table rows agree with direct computation and round-trip") {
    const std::vector<u64> grid = {10000, 100000, 1000000};
    const auto rows = moment_table(kCurve, region(), grid, kBase);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto split = diagonal_and_offdiagonal(kCurve, region(), grid[i]);
        const auto s = signed_first_moment(kCurve, region(), grid[i], kBase);
        CHECK(rows[i].X == grid[i]);
        CHECK(rows[i].RQ2 == split.RQ2);
        CHECK(rows[i].MQ == split.MQ);
        CHECK(rows[i].AQ == split.AQ);
        CHECK(rows[i].SQ_plus == s.plus);
        CHECK(rows[i].SQ_minus == s.minus);
        CHECK(rows[i].excluded == s.excluded);
        CHECK(rows[i].count == build_census(kCurve, region(), grid[i]).size());
    }
    CHECK(moment_table(kCurve, region(), grid, kBase, 16) == rows);
    std::stringstream ss;
    write_moments_csv(ss, rows);
    CHECK(read_moments_csv(ss) == rows);
}
