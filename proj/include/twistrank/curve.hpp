#pragma once

#include <compare>
#include <utility>

#include <gmpxx.h>

#include "twistrank/arith.hpp"

namespace twistrank {

/// Base curve E : y^2 = x^3 + A x + B with F(x, z) = x^3 + A x z^2 + B z^3
/// irreducible over the integers.
struct CurveParams {
    i64 A = 0;
    i64 B = 0;
    i64 delta_F = 0;  // -(4A^3 + 27B^2)
    i64 c4 = 0;       // 1 + |A| + |B|
};

/// Coefficients are limited so that every derived quantity fits in 64 bits.
inline constexpr i64 kMaxCoefficient = i64{1} << 20;

CurveParams validate_curve(i64 A, i64 B);

/// E_d : d y^2 = x^3 + A x + B for square-free d >= 1.
struct TwistedCurve {
    CurveParams base;
    u64 d = 1;
};

TwistedCurve make_twist(const CurveParams& base, u64 d);

/// Point (x : y : z) on d y^2 z = x^3 + A x z^2 + B z^3, primitive, with
/// z > 0 or (0 : 1 : 0).
struct ProjectivePoint {
    mpz_class x{0};
    mpz_class y{1};
    mpz_class z{0};

    static ProjectivePoint identity() { return {}; }
    bool is_identity() const { return z == 0; }

    friend bool operator==(const ProjectivePoint& a, const ProjectivePoint& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

/// Scales to a primitive integer vector and applies the sign convention.
ProjectivePoint canonicalize(mpz_class x, mpz_class y, mpz_class z);

bool on_curve(const TwistedCurve& curve, const ProjectivePoint& p);

/// (d, P) with d = Q(u, v, w) and P = (uvw : 1 : v^2 w^3) on E_d.
std::pair<u64, ProjectivePoint> point_from_triple(const CurveParams& curve, u64 u, u64 v, u64 w);

ProjectivePoint negate(const ProjectivePoint& p);
ProjectivePoint add_points(const TwistedCurve& curve, const ProjectivePoint& p, const ProjectivePoint& q);
ProjectivePoint multiply(const TwistedCurve& curve, const ProjectivePoint& p, u64 n);

/// log max(|x'|, |z'|) for (x' : z') = (x : z) in lowest terms.
double naive_height(const ProjectivePoint& p);

/// Natural log of a nonzero big integer, accurate to double precision.
double log_abs(const mpz_class& n);

struct HeightOptions {
    double tol = 1e-10;
    int max_iter = 80;
};

/// Canonical heights here carry the factor 1/2 in front of the limit of
/// 4^-n h_x(2^n P). Multiply by this to get the convention in which the
/// height is the plain limit (PARI, Magma).
inline constexpr double kDoubledHeightConvention = 2.0;

/// Doubling engine for x-coordinates. The x-only duplication map of E_d does
/// not depend on d, so one engine serves every twist of the base curve.
///
/// Each step splits log h_x(2^{n+1}P) - 4 log h_x(2^n P) into an
/// archimedean part, evaluated on the max-normalised pair in long double, and
/// the log of the cancelled gcd, which divides the resultant R of the two
/// duplication forms. The gcd is read off exact residues modulo a power of R.
class HeightEngine {
public:
    explicit HeightEngine(const CurveParams& curve);

    const CurveParams& curve() const { return curve_; }
    const mpz_class& resultant() const { return resultant_; }
    /// Bound on |log max(|phi|, |psi|)| over primitive real pairs (sampled
    /// minimum, halved) plus log R: every series term lies within it.
    double term_bound() const { return term_bound_; }

    /// Height of the x-coordinate pair (x : z); (1 : 0) is the identity.
    double height(const mpz_class& x, const mpz_class& z, const HeightOptions& opts = {}) const;

    /// Partial series value after exactly n doublings, without the tail.
    /// Equals h_x(2^n P) / (2 * 4^n) up to rounding.
    double partial(const mpz_class& x, const mpz_class& z, int n) const;

private:
    CurveParams curve_;
    mpz_class resultant_;
    double term_bound_ = 0;
};

double canonical_height(const TwistedCurve& curve, const ProjectivePoint& p, const HeightOptions& opts = {});
double canonical_height(const HeightEngine& engine, const TwistedCurve& curve, const ProjectivePoint& p,
                        const HeightOptions& opts = {});

/// Rational torsion has order at most 12, so nP = O for some n <= 12 decides it.
bool is_torsion(const TwistedCurve& curve, const ProjectivePoint& p);

}  // namespace twistrank
