#include "twistrank/curve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "twistrank/error.hpp"

namespace twistrank {

namespace {

mpz_class to_mpz(i64 v) {
    mpz_class z;
    mpz_set_si(z.get_mpz_t(), static_cast<long>(v));
    return z;
}

mpz_class to_mpz(u64 v) {
    mpz_class z;
    mpz_set_ui(z.get_mpz_t(), static_cast<unsigned long>(v));
    return z;
}

bool has_integer_root(i64 A, i64 B) {
    if (B == 0) return true;
    const u64 absB = static_cast<u64>(B < 0 ? -B : B);
    const auto f = factorize(absB);
    std::vector<u64> divisors{1};
    for (const auto& [p, e] : f) {
        const std::size_t n = divisors.size();
        u64 pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < n; ++i) divisors.push_back(divisors[i] * pk);
        }
    }
    for (u64 dv : divisors) {
        for (int sign : {1, -1}) {
            const i128 r = static_cast<i128>(sign) * static_cast<i128>(dv);
            if (r * r * r + static_cast<i128>(A) * r + B == 0) return true;
        }
    }
    return false;
}

struct AffinePoint {
    bool infinity = true;
    mpq_class X, Y;
};

// Integral model Y^2 = X^3 + A d^2 X + B d^3 via (x, y) -> (d x, d^2 y).
AffinePoint to_model(const TwistedCurve& c, const ProjectivePoint& p) {
    if (p.is_identity()) return {};
    const mpz_class d = to_mpz(c.d);
    AffinePoint a{false, mpq_class(d * p.x, p.z), mpq_class(d * d * p.y, p.z)};
    a.X.canonicalize();
    a.Y.canonicalize();
    return a;
}

ProjectivePoint from_model(const TwistedCurve& c, const AffinePoint& a) {
    if (a.infinity) return ProjectivePoint::identity();
    const mpz_class d = to_mpz(c.d);
    mpq_class x = a.X / d;
    mpq_class y = a.Y / (d * d);
    x.canonicalize();
    y.canonicalize();
    mpz_class z;
    mpz_lcm(z.get_mpz_t(), x.get_den_mpz_t(), y.get_den_mpz_t());
    return canonicalize(x.get_num() * (z / x.get_den()), y.get_num() * (z / y.get_den()), z);
}

AffinePoint model_add(const TwistedCurve& c, const AffinePoint& p, const AffinePoint& q) {
    if (p.infinity) return q;
    if (q.infinity) return p;
    const mpz_class d = to_mpz(c.d);
    const mpz_class a = to_mpz(c.base.A) * d * d;
    mpq_class lambda;
    if (p.X == q.X) {
        if (p.Y + q.Y == 0) return {};
        lambda = (3 * p.X * p.X + a) / (2 * p.Y);
    } else {
        lambda = (q.Y - p.Y) / (q.X - p.X);
    }
    lambda.canonicalize();
    AffinePoint r{false, lambda * lambda - p.X - q.X, 0};
    r.X.canonicalize();
    r.Y = lambda * (p.X - r.X) - p.Y;
    r.Y.canonicalize();
    return r;
}

// Fraction-free Gaussian elimination (Bareiss) with row pivoting.
mpz_class determinant(std::vector<std::vector<mpz_class>> m) {
    const std::size_t n = m.size();
    mpz_class prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t r = k + 1;
            while (r < n && m[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(m[k], m[r]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

// Coefficients of x^4, x^3 z, x^2 z^2, x z^3, z^4.
struct QuarticForms {
    mpz_class phi[5];
    mpz_class psi[5];
};

QuarticForms duplication_forms(const CurveParams& c) {
    const mpz_class A = to_mpz(c.A), B = to_mpz(c.B);
    return {{1, 0, -2 * A, -8 * B, A * A}, {0, 4, 0, 4 * A, 4 * B}};
}

long double eval_ld(const mpz_class (&coef)[5], long double x, long double z) {
    long double c[5];
    for (int i = 0; i < 5; ++i) c[i] = static_cast<long double>(coef[i].get_d());
    long double result = c[0];
    long double zp = z;
    for (int i = 1; i < 5; ++i) {
        result = result * x + c[i] * zp;
        zp *= z;
    }
    return result;
}

mpz_class eval_mpz(const mpz_class (&coef)[5], const mpz_class& x, const mpz_class& z) {
    // coef[i] x^{4-i} z^i
    mpz_class result = 0;
    mpz_class xs[5], zs[5];
    xs[0] = 1;
    zs[0] = 1;
    for (int i = 1; i < 5; ++i) {
        xs[i] = xs[i - 1] * x;
        zs[i] = zs[i - 1] * z;
    }
    for (int i = 0; i < 5; ++i) result += coef[i] * xs[4 - i] * zs[i];
    return result;
}

// n / 2^shift as a long double with a 64-bit mantissa.
long double scaled_ld(const mpz_class& n, long shift) {
    if (n == 0) return 0.0L;
    mpz_class a = abs(n);
    const long bits = static_cast<long>(mpz_sizeinbase(a.get_mpz_t(), 2));
    const long drop = std::max(0L, bits - 64);
    mpz_class top = a >> static_cast<mp_bitcnt_t>(drop);
    long double v = static_cast<long double>(mpz_get_ui(top.get_mpz_t()));
    v = std::ldexp(v, static_cast<int>(drop - shift));
    return n < 0 ? -v : v;
}

}  // namespace

CurveParams validate_curve(i64 A, i64 B) {
    if (A > kMaxCoefficient || A < -kMaxCoefficient || B > kMaxCoefficient || B < -kMaxCoefficient) {
        throw Error(ErrorCode::InvalidArgument, "coefficients exceed 2^20");
    }
    const i64 disc = 4 * A * A * A + 27 * B * B;
    if (disc == 0) throw Error(ErrorCode::SingularCurve, "4A^3 + 27B^2 = 0");
    if (has_integer_root(A, B)) throw Error(ErrorCode::ReducibleCubic, "x^3 + Ax + B has an integer root");
    return CurveParams{A, B, -disc, 1 + (A < 0 ? -A : A) + (B < 0 ? -B : B)};
}

TwistedCurve make_twist(const CurveParams& base, u64 d) {
    if (d == 0 || !is_squarefree(d)) throw Error(ErrorCode::NotSquarefree, "twist d = " + std::to_string(d));
    return {base, d};
}

ProjectivePoint canonicalize(mpz_class x, mpz_class y, mpz_class z) {
    if (z == 0) return ProjectivePoint::identity();
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.get_mpz_t());
    if (z < 0) g = -g;
    return {x / g, y / g, z / g};
}

bool on_curve(const TwistedCurve& c, const ProjectivePoint& p) {
    if (p.is_identity()) return p.x == 0 && p.y == 1;
    const mpz_class A = to_mpz(c.base.A), B = to_mpz(c.base.B), d = to_mpz(c.d);
    const mpz_class lhs = d * p.y * p.y * p.z;
    const mpz_class rhs = p.x * p.x * p.x + A * p.x * p.z * p.z + B * p.z * p.z * p.z;
    return lhs == rhs;
}

std::pair<u64, ProjectivePoint> point_from_triple(const CurveParams& c, u64 u, u64 v, u64 w) {
    if (u == 0 || v == 0 || w == 0) throw Error(ErrorCode::InvalidArgument, "triple entries must be positive");
    const mpz_class U = to_mpz(u), V = to_mpz(v), W = to_mpz(w);
    const mpz_class t = V * W * W;
    const mpz_class q = V * (U * U * U + to_mpz(c.A) * U * t * t + to_mpz(c.B) * t * t * t);
    if (q < 1) throw Error(ErrorCode::NonPositiveTwist, "Q(u,v,w) < 1");
    if (q > mpz_class("9223372036854775807")) throw Error(ErrorCode::Overflow, "Q(u,v,w) exceeds 2^63");
    const u64 d = mpz_get_ui(q.get_mpz_t());
    return {d, canonicalize(U * V * W, 1, V * V * W * W * W)};
}

ProjectivePoint negate(const ProjectivePoint& p) {
    if (p.is_identity()) return p;
    return {p.x, -p.y, p.z};
}

ProjectivePoint add_points(const TwistedCurve& c, const ProjectivePoint& p, const ProjectivePoint& q) {
    if (!on_curve(c, p) || !on_curve(c, q)) throw Error(ErrorCode::PointNotOnCurve, "add_points");
    return from_model(c, model_add(c, to_model(c, p), to_model(c, q)));
}

ProjectivePoint multiply(const TwistedCurve& c, const ProjectivePoint& p, u64 n) {
    if (!on_curve(c, p)) throw Error(ErrorCode::PointNotOnCurve, "multiply");
    AffinePoint base = to_model(c, p), acc{};
    while (n) {
        if (n & 1) acc = model_add(c, acc, base);
        base = model_add(c, base, base);
        n >>= 1;
    }
    return from_model(c, acc);
}

double log_abs(const mpz_class& n) {
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
    return std::log(std::fabs(mant)) + static_cast<double>(exp) * std::log(2.0);
}

double naive_height(const ProjectivePoint& p) {
    if (p.is_identity()) return 0.0;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), p.x.get_mpz_t(), p.z.get_mpz_t());
    const mpz_class x = abs(p.x) / g, z = abs(p.z) / g;
    return log_abs(x > z ? x : z);
}

HeightEngine::HeightEngine(const CurveParams& curve) : curve_(curve) {
    const QuarticForms forms = duplication_forms(curve);
    std::vector<std::vector<mpz_class>> syl(8, std::vector<mpz_class>(8, 0));
    for (int r = 0; r < 4; ++r) {
        for (int i = 0; i < 5; ++i) {
            syl[r][r + i] = forms.phi[i];
            syl[r + 4][r + i] = forms.psi[i];
        }
    }
    resultant_ = abs(determinant(std::move(syl)));
    if (resultant_ == 0) throw Error(ErrorCode::SingularCurve, "duplication forms share a root");

    // Every normalised pair lies on the boundary of the unit square; the
    // forms are even so half of it suffices.
    long double lo = INFINITY;
    constexpr int kSamples = 20000;
    for (int i = 0; i <= kSamples; ++i) {
        const long double s = -1.0L + 2.0L * i / kSamples;
        for (auto [x, z] : {std::pair{1.0L, s}, std::pair{s, 1.0L}}) {
            const long double m =
                std::max(std::fabs(eval_ld(forms.phi, x, z)), std::fabs(eval_ld(forms.psi, x, z)));
            lo = std::min(lo, m);
        }
    }
    long double hi_phi = 0, hi_psi = 0;
    for (int i = 0; i < 5; ++i) {
        hi_phi += std::fabs(static_cast<long double>(forms.phi[i].get_d()));
        hi_psi += std::fabs(static_cast<long double>(forms.psi[i].get_d()));
    }
    const double arch = std::max(std::fabs(std::log(static_cast<double>(lo) / 2.0)),
                                 std::log(static_cast<double>(std::max(hi_phi, hi_psi))));
    term_bound_ = arch + log_abs(resultant_);
}

namespace {

struct SeriesState {
    mpz_class modulus;
    mpz_class xr, zr;
    long double xi = 0, zeta = 0;
    double h0 = 0;
    long double sum = 0;
};

SeriesState start_series(const mpz_class& resultant, const mpz_class& x0, const mpz_class& z0, int steps) {
    SeriesState s;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), x0.get_mpz_t(), z0.get_mpz_t());
    const mpz_class x = x0 / g, z = z0 / g;
    const mpz_class big = abs(x) > abs(z) ? abs(x) : abs(z);
    s.h0 = log_abs(big);
    const long bits = static_cast<long>(mpz_sizeinbase(big.get_mpz_t(), 2));
    const long double bl = scaled_ld(big, bits);
    s.xi = scaled_ld(x, bits) / bl;
    s.zeta = scaled_ld(z, bits) / bl;
    mpz_pow_ui(s.modulus.get_mpz_t(), resultant.get_mpz_t(), static_cast<unsigned long>(steps + 1));
    mpz_mod(s.xr.get_mpz_t(), x.get_mpz_t(), s.modulus.get_mpz_t());
    mpz_mod(s.zr.get_mpz_t(), z.get_mpz_t(), s.modulus.get_mpz_t());
    return s;
}

void step_series(const QuarticForms& forms, const mpz_class& resultant, SeriesState& s, int n) {
    const long double phi = eval_ld(forms.phi, s.xi, s.zeta);
    const long double psi = eval_ld(forms.psi, s.xi, s.zeta);
    const long double big = std::max(std::fabs(phi), std::fabs(psi));

    mpz_class pr = eval_mpz(forms.phi, s.xr, s.zr);
    mpz_class qr = eval_mpz(forms.psi, s.xr, s.zr);
    mpz_mod(pr.get_mpz_t(), pr.get_mpz_t(), s.modulus.get_mpz_t());
    mpz_mod(qr.get_mpz_t(), qr.get_mpz_t(), s.modulus.get_mpz_t());
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), pr.get_mpz_t(), qr.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), resultant.get_mpz_t());

    s.sum += (std::log(big) - static_cast<long double>(log_abs(g))) / std::pow(4.0L, n + 1);
    s.modulus /= g;
    s.xr = pr / g;
    s.zr = qr / g;
    mpz_mod(s.xr.get_mpz_t(), s.xr.get_mpz_t(), s.modulus.get_mpz_t());
    mpz_mod(s.zr.get_mpz_t(), s.zr.get_mpz_t(), s.modulus.get_mpz_t());
    s.xi = phi / big;
    s.zeta = psi / big;
}

}  // namespace

double HeightEngine::height(const mpz_class& x, const mpz_class& z, const HeightOptions& opts) const {
    if (z == 0) return 0.0;
    if (!(opts.tol > 0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
    // Tail after n terms is at most term_bound * 4^-n / 3 before the factor 1/2;
    // half of tol is reserved for it.
    int steps = 0;
    while (term_bound_ * std::pow(4.0, -steps) / 3.0 * 0.5 > opts.tol * 0.5) {
        ++steps;
        if (steps > opts.max_iter) {
            throw Error(ErrorCode::NonConvergence, "tolerance not reachable within iteration cap");
        }
    }
    const QuarticForms forms = duplication_forms(curve_);
    SeriesState s = start_series(resultant_, x, z, steps);
    for (int n = 0; n < steps; ++n) step_series(forms, resultant_, s, n);
    return 0.5 * (s.h0 + static_cast<double>(s.sum));
}

double HeightEngine::partial(const mpz_class& x, const mpz_class& z, int n) const {
    if (z == 0) return 0.0;
    const QuarticForms forms = duplication_forms(curve_);
    SeriesState s = start_series(resultant_, x, z, n);
    for (int i = 0; i < n; ++i) step_series(forms, resultant_, s, i);
    return 0.5 * (s.h0 + static_cast<double>(s.sum));
}

namespace {

const HeightEngine& cached_engine(const CurveParams& c) {
    thread_local std::map<std::pair<i64, i64>, HeightEngine> cache;
    auto it = cache.find({c.A, c.B});
    if (it == cache.end()) it = cache.emplace(std::pair{c.A, c.B}, HeightEngine(c)).first;
    return it->second;
}

}  // namespace

double canonical_height(const HeightEngine& engine, const TwistedCurve& c, const ProjectivePoint& p,
                        const HeightOptions& opts) {
    if (!on_curve(c, p)) throw Error(ErrorCode::PointNotOnCurve, "canonical_height");
    if (p.is_identity()) return 0.0;
    return engine.height(p.x, p.z, opts);
}

double canonical_height(const TwistedCurve& c, const ProjectivePoint& p, const HeightOptions& opts) {
    return canonical_height(cached_engine(c.base), c, p, opts);
}

bool is_torsion(const TwistedCurve& c, const ProjectivePoint& p) {
    if (!on_curve(c, p)) throw Error(ErrorCode::PointNotOnCurve, "is_torsion");
    if (p.is_identity()) return true;
    const AffinePoint base = to_model(c, p);
    AffinePoint acc = base;
    for (int n = 2; n <= 12; ++n) {
        acc = model_add(c, acc, base);
        if (acc.infinity) return true;
    }
    return false;
}

}  // namespace twistrank
