#pragma once

#include <array>
#include <numeric>
#include <optional>
#include <vector>

#include "bd/measure.hpp"
#include "bd/mobius.hpp"
#include "bd/ratbar.hpp"

namespace bd {

// ---- fixed-point multipliers and Milnor coordinates --------------------

struct MultiplierTriple {
    std::array<Cplx, 3> values;
    Cplx sigma1, sigma2, sigma3;
};

// Multipliers of the three fixed points of a degree-2 pair. A fixed point of
// multiplicity >= 2 on the fixed-point cubic carries multiplier 1. Works on
// raw pairs (no gcd required), so it stays usable arbitrarily close to the
// boundary.
inline MultiplierTriple multipliers_pair(const HomPolyF& P, const HomPolyF& Q,
                                         const Tol& tol = default_tol()) {
    if (P.degree() != 2 || Q.degree() != 2) throw input_error("multipliers: degree-2 pair required");
    HomPolyF fixed = mul(HomPolyF::var_z(), Q) - mul(HomPolyF::var_w(), P);
    if (fixed.is_zero()) throw domain_error("multipliers: identity-like pair");

    std::array<Cplx, 3> lam{};
    int idx = 0;
    for (const auto& r : roots(fixed, tol)) {
        if (r.mult >= 2) {
            for (int k = 0; k < r.mult && idx < 3; ++k) lam[idx++] = Cplx(1, 0);
            continue;
        }
        Cplx value;
        if (r.point.is_infinity()) {
            // chart swap: multiplier of zeta -> Q(1,zeta)/P(1,zeta) at 0
            Cplx p0 = P.eval({1, 0}, {0, 0});
            Cplx dp = P.derivative_w().eval({1, 0}, {0, 0});
            Cplx q0 = Q.eval({1, 0}, {0, 0});
            Cplx dq = Q.derivative_w().eval({1, 0}, {0, 0});
            value = (dq * p0 - dp * q0) / (p0 * p0);
        } else {
            Cplx z0 = r.point.to_complex();
            Cplx p = P.eval(z0, {1, 0}), q = Q.eval(z0, {1, 0});
            Cplx dp = P.derivative_z().eval(z0, {1, 0}), dq = Q.derivative_z().eval(z0, {1, 0});
            value = (dp * q - dq * p) / (q * q);
        }
        if (idx < 3) lam[idx++] = value;
    }
    if (idx != 3) throw numeric_error("multipliers: fixed-point count mismatch");

    MultiplierTriple out;
    out.values = lam;
    out.sigma1 = lam[0] + lam[1] + lam[2];
    out.sigma2 = lam[0] * lam[1] + lam[0] * lam[2] + lam[1] * lam[2];
    out.sigma3 = lam[0] * lam[1] * lam[2];
    double scale = std::max(1.0, std::abs(out.sigma1));
    if (std::abs(out.sigma3 - (out.sigma1 - 2.0)) > std::max(tol.sigma, 1e-6) * scale)
        throw numeric_error("multipliers: sigma3 != sigma1 - 2 beyond tolerance");
    return out;
}

inline MultiplierTriple multipliers(const RatbarPoint<Cplx>& f, const Tol& tol = default_tol()) {
    if (f.has_holes()) throw domain_error("multipliers: boundary point has no multiplier triple");
    return multipliers_pair(f.P(), f.Q(), tol);
}

// Point of Mbar_2 = P^2 in homogeneous coordinates (x1:x2:x3); the affine
// chart x3=1 carries (sigma1, sigma2), and the boundary is x3 = 0.
struct ModuliPoint2 {
    Cplx x1{1, 0}, x2{0, 0}, x3{0, 0};

    static ModuliPoint2 interior(Cplx s1, Cplx s2) { return {s1, s2, {1, 0}}; }
    static ModuliPoint2 boundary_of(const ProjPoint<Cplx>& a) {
        if (a.is_infinity() || std::abs(a.to_complex()) < 1e-300) return {{0, 0}, {1, 0}, {0, 0}};
        Cplx v = a.to_complex();
        return {{1, 0}, v + 1.0 / v, {0, 0}};
    }

    bool is_boundary(double tol = 1e-9) const {
        double scale = std::max({std::abs(x1), std::abs(x2), std::abs(x3)});
        return std::abs(x3) <= tol * scale;
    }
    Cplx sigma1() const { return x1 / x3; }
    Cplx sigma2() const { return x2 / x3; }
};

inline bool same_moduli_point(const ModuliPoint2& p, const ModuliPoint2& q, double tol = 1e-8) {
    Cplx a[3] = {p.x1, p.x2, p.x3}, b[3] = {q.x1, q.x2, q.x3};
    double sp = std::max({std::abs(p.x1), std::abs(p.x2), std::abs(p.x3)});
    double sq = std::max({std::abs(q.x1), std::abs(q.x2), std::abs(q.x3)});
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(a[i] * b[j] - a[j] * b[i]) > tol * sp * sq) return false;
    return true;
}

inline ModuliPoint2 milnor_point(const RatbarPoint<Cplx>& f, const Tol& tol = default_tol()) {
    auto m = multipliers(f, tol);
    return ModuliPoint2::interior(m.sigma1, m.sigma2);
}

inline ModuliPoint2 boundary_point(const ProjPoint<Cplx>& a) { return ModuliPoint2::boundary_of(a); }

// the two solutions a, 1/a of a + 1/a = x2/x1 for a boundary point
inline std::pair<ProjPoint<Cplx>, ProjPoint<Cplx>> boundary_parameter(const ModuliPoint2& p) {
    if (std::abs(p.x1) < 1e-300 * std::abs(p.x2))
        return {ProjPoint<Cplx>::finite({0, 0}), ProjPoint<Cplx>::infinity()};
    Cplx c = p.x2 / p.x1;
    Cplx s = std::sqrt(c * c - 4.0);
    Cplx a1 = (c + s) / 2.0, a2 = (c - s) / 2.0;
    return {ProjPoint<Cplx>::finite(a1), ProjPoint<Cplx>::finite(a2)};
}

// ---- the boundary family Lambda_a and its iterates ---------------------

// (a z (z-w) : w (z-w)) with the three degenerate specializations.
template <class S>
RatbarPoint<S> lambda_map(const ProjPoint<S>& a, const Tol& tol = default_tol()) {
    using T = scalar_traits<S>;
    HomPoly<S> z = HomPoly<S>::var_z(), w = HomPoly<S>::var_w();
    HomPoly<S> zmw(std::vector<S>{T::one(), -T::one()});
    HomPoly<S> zpw(std::vector<S>{T::one(), T::one()});
    if (a.is_infinity())
        return RatbarPoint<S>::normalize(mul(zpw, zmw), HomPoly<S>::zero(2), tol);
    const S& v = a.value();
    if (T::is_zero(v))
        return RatbarPoint<S>::normalize(HomPoly<S>::zero(2), mul(zpw, zmw), tol);
    if (T::is_zero(v - T::one()))
        return RatbarPoint<S>::normalize(mul(zpw, zmw), mul(w, zmw), tol);
    return RatbarPoint<S>::normalize(mul(z, zmw) * v, mul(w, zmw), tol);
}

// Closed form of Lambda_a^n:
//   (a^n z prod_i (z - w/a^i)^(2^(n-1-i)) : w prod_i (z - w/a^i)^(2^(n-1-i)))
inline RatbarPoint<Cplx> lambda_iterate(const ProjPoint<Cplx>& a, int n,
                                        const Tol& tol = default_tol()) {
    if (n < 1) throw input_error("lambda_iterate: n >= 1");
    if (a.is_infinity() || std::abs(a.to_complex()) < 1e-300 ||
        std::abs(a.to_complex() - 1.0) < 1e-300)
        return iterate(lambda_map(a, tol), n, tol);
    Cplx av = a.to_complex();
    HomPolyF H = HomPolyF::constant({1, 0});
    RootList<Cplx> holes;
    for (int i = 0; i < n; ++i) {
        Cplx pt = 1.0 / std::pow(av, i);
        HomPolyF lin(std::vector<Cplx>{{1, 0}, -pt});
        int e = 1 << (n - 1 - i);
        H = mul(H, pow(lin, e));
        holes.push_back({ProjPoint<Cplx>::finite(pt), e});
    }
    HomPolyF phiz(std::vector<Cplx>{std::pow(av, n), {0, 0}});
    HomPolyF phiw(std::vector<Cplx>{{0, 0}, {1, 0}});
    return RatbarPoint<Cplx>::from_parts(std::move(H), std::move(phiz), std::move(phiw),
                                         merge_roots(holes, tol.root), tol);
}

// ---- the iterate-limit families F_{q,tau,n} and P_{q,n} ----------------

namespace detail {

// (z^(2^(n-1)) w^(2^(n-1)) : 0), the common n < q degenerate form
inline RatbarPoint<Cplx> monomial_degenerate(int n, const Tol& tol) {
    int m = 1 << (n - 1);
    HomPolyF H = mul(pow(HomPolyF::var_z(), m), pow(HomPolyF::var_w(), m));
    RootList<Cplx> holes = {{ProjPoint<Cplx>::finite({0, 0}), m}, {ProjPoint<Cplx>::infinity(), m}};
    return RatbarPoint<Cplx>::from_parts(std::move(H), HomPolyF::constant({1, 0}),
                                         HomPolyF::constant({0, 0}), std::move(holes), tol);
}

}  // namespace detail

// F_{q,tau,n}: limits of n-th iterates along disks with finite tau^2.
inline RatbarPoint<Cplx> F_family(int q, Cplx tau, int n, const Tol& tol = default_tol()) {
    if (q < 2 || n < 1) throw input_error("F_family: q >= 2, n >= 1");
    if (n < q) return detail::monomial_degenerate(n, tol);
    if (n == q) {
        int m = (1 << (q - 1)) - 1;
        HomPolyF z = HomPolyF::var_z(), w = HomPolyF::var_w();
        HomPolyF quad(std::vector<Cplx>{{1, 0}, tau, {1, 0}});
        HomPolyF H = mul(pow(z, m), pow(w, m));
        RootList<Cplx> holes = {{ProjPoint<Cplx>::finite({0, 0}), m},
                                {ProjPoint<Cplx>::infinity(), m}};
        return RatbarPoint<Cplx>::from_parts(std::move(H), quad, mul(z, w), std::move(holes), tol);
    }
    int k = n % q, m = n / q;
    RatbarPoint<Cplx> base = iterate(F_family(q, tau, q, tol), m, tol);
    if (k == 0) return base;
    return compose(F_family(q, tau, k, tol), base, tol);
}

// P_{q,n}: limits of n-th iterates along disks with tau^2 = infinity.
inline RatbarPoint<Cplx> P_family(int q, int n, const Tol& tol = default_tol()) {
    if (q < 2 || n < 1) throw input_error("P_family: q >= 2, n >= 1");
    if (n < q) return detail::monomial_degenerate(n, tol);
    if (n == q) {
        int m = 1 << (q - 1);
        HomPolyF z = HomPolyF::var_z(), w = HomPolyF::var_w();
        HomPolyF H = mul(pow(z, m), pow(w, m - 1));
        RootList<Cplx> holes = {{ProjPoint<Cplx>::finite({0, 0}), m},
                                {ProjPoint<Cplx>::infinity(), m - 1}};
        HomPolyF zpw(std::vector<Cplx>{{1, 0}, {1, 0}});
        return RatbarPoint<Cplx>::from_parts(std::move(H), zpw, w, std::move(holes), tol);
    }
    int k = n % q, m = n / q;
    RatbarPoint<Cplx> base = iterate(P_family(q, q, tol), m, tol);
    if (k == 0) return base;
    return compose(P_family(q, k, tol), base, tol);
}

// ---- the indeterminacy locus of Phi_n on Mbar_2 -------------------------

struct IndeterminacyEntry {
    int q;
    Cplx zeta;
    ModuliPoint2 point;
};

// I(Phi_n) = {[Lambda_zeta] : zeta a primitive q-th root of unity, 2<=q<=n},
// one representative per pair {zeta, 1/zeta}.
inline std::vector<IndeterminacyEntry> indeterminacy_set(int n) {
    if (n < 2) throw input_error("indeterminacy_set: n >= 2");
    std::vector<IndeterminacyEntry> out;
    for (int q = 2; q <= n; ++q)
        for (int k = 1; 2 * k <= q; ++k) {
            if (std::gcd(k, q) != 1) continue;
            Cplx zeta = std::exp(Cplx(0, 2 * M_PI * k / q));
            out.push_back({q, zeta, ModuliPoint2::boundary_of(ProjPoint<Cplx>::finite(zeta))});
        }
    return out;
}

// ---- disk families through Mbar_2 ---------------------------------------

// (Nf) representative with fixed points 0, infinity, 1 of multipliers
// alpha, beta, gamma:  z ((1-a)z + a(1-b)) / (b(1-a)z + (1-b)).
inline std::pair<HomPolyF, HomPolyF> nf_pair(Cplx alpha, Cplx beta) {
    HomPolyF P(std::vector<Cplx>{(1.0 - alpha), alpha * (1.0 - beta), {0, 0}});
    HomPolyF Q(std::vector<Cplx>{{0, 0}, beta * (1.0 - alpha), (1.0 - beta)});
    return {P, Q};
}

// A degree-2 pair realizing given Milnor coordinates. The large multiplier
// gamma is a well-conditioned simple root of the cubic; deflating it
// exactly (e1 = s1 - gamma, e2 = s3/gamma) keeps the bounded pair's
// symmetric functions accurate even when alpha and beta nearly collide near
// the boundary, and the quadratic formula then yields a correlated pair.
inline std::pair<HomPolyF, HomPolyF> realize_from_sigma(Cplx s1, Cplx s2,
                                                        const Tol& tol = default_tol()) {
    HomPolyF cubic(std::vector<Cplx>{{1, 0}, -s1, s2, -(s1 - 2.0)});
    Cplx gamma;
    double best = -1;
    for (const auto& r : roots(cubic, tol)) {
        Cplx v = r.point.is_infinity() ? Cplx(1e300, 0) : r.point.to_complex();
        if (std::abs(v) > best) {
            best = std::abs(v);
            gamma = v;
        }
    }
    // polish gamma on the cubic (simple, dominant root)
    {
        std::vector<Cplx> u = {Cplx(1, 0), -s1, s2, -(s1 - 2.0)};
        gamma = detail::newton_polish(u, detail::poly_derivative(u), gamma);
    }
    // e2 = s3/gamma and e1 = (s2 - e2)/gamma avoid the cancellation in
    // s1 - gamma when gamma dominates
    Cplx e2 = (s1 - 2.0) / gamma;
    Cplx e1 = (s2 - e2) / gamma;
    Cplx half = e1 / 2.0;
    Cplx s = std::sqrt(half * half - e2);
    return nf_pair(half + s, half - s);
}

namespace detail {

// Richardson/Neville extrapolation to t = 0 for a function analytic in t,
// sampled on the geometric grid t_j = t0 * rho^j:
//   T_{j,k} = (T_{j,k-1} - rho^k T_{j-1,k-1}) / (1 - rho^k).
// Successive diagonal entries estimate the remaining error; the first
// column whose correction stops improving marks the noise floor, and the
// value there is returned together with that correction.
inline std::pair<Cplx, double> romberg_limit(const std::vector<Cplx>& v, double rho) {
    std::vector<Cplx> col = v;
    Cplx prev_diag = v.back();
    Cplx best_val = v.back();
    double best_corr = 1e300;
    double rk = 1.0;
    for (size_t k = 1; k < v.size(); ++k) {
        rk *= rho;
        std::vector<Cplx> next;
        next.reserve(col.size() - 1);
        for (size_t i = 1; i < col.size(); ++i)
            next.push_back((col[i] - rk * col[i - 1]) / (1.0 - rk));
        Cplx diag = next.back();
        double corr = std::abs(diag - prev_diag);
        if (corr < best_corr) {
            best_corr = corr;
            best_val = diag;
        } else if (corr > 4.0 * best_corr) {
            break;  // noise floor reached; further columns only amplify it
        }
        prev_diag = diag;
        col = std::move(next);
    }
    return {best_val, best_corr};
}

}  // namespace detail

struct DiskFamily;
std::pair<Cplx, Cplx> bounded_multiplier_pair(const DiskFamily& fam, double t,
                                              const Tol& tol = default_tol());

// Embedded holomorphic disk t -> Mbar_2 through a boundary point, in one of
// four presentations.
struct DiskFamily {
    enum class Kind { NormalForm, Line, Conic, CoeffPath };
    Kind kind = Kind::Line;

    // NormalForm: alpha(t), beta(t) as polynomials in t (lowest degree first)
    std::vector<Cplx> alpha, beta;
    // Line L_(a:b) through [Lambda_{-1}] (q=2), or conic C_(a^2:b^2) tangent
    // at [Lambda_zeta] (q>2)
    Cplx a{0, 0}, b{1, 0};
    int q = 2;
    Cplx zeta{-1, 0};
    // CoeffPath: coefficients of P and Q as polynomials in t (lowest first)
    std::vector<std::vector<Cplx>> Pt, Qt;

    static DiskFamily line(Cplx a, Cplx b) {
        DiskFamily f;
        f.kind = Kind::Line;
        f.a = a;
        f.b = b;
        f.q = 2;
        f.zeta = {-1, 0};
        return f;
    }
    static DiskFamily conic(Cplx a, Cplx b, int q, Cplx zeta) {
        DiskFamily f;
        f.kind = Kind::Conic;
        f.a = a;
        f.b = b;
        f.q = q;
        f.zeta = zeta;
        return f;
    }
    static DiskFamily normal_form(std::vector<Cplx> alpha, std::vector<Cplx> beta) {
        DiskFamily f;
        f.kind = Kind::NormalForm;
        f.alpha = std::move(alpha);
        f.beta = std::move(beta);
        return f;
    }
    static DiskFamily coeff_path(std::vector<std::vector<Cplx>> Pt,
                                 std::vector<std::vector<Cplx>> Qt) {
        DiskFamily f;
        f.kind = Kind::CoeffPath;
        f.Pt = std::move(Pt);
        f.Qt = std::move(Qt);
        return f;
    }

    bool inside_boundary() const {
        // a disk contained in the boundary line (only the degenerate line b=0)
        return (kind == Kind::Line || kind == Kind::Conic) && std::abs(b) < 1e-300;
    }

    // sigma coordinates for t != 0 (Line/Conic); other kinds go through the
    // realized pair
    std::pair<Cplx, Cplx> sigma_at(Cplx t) const {
        if (kind == Kind::Line) return {1.0 / (b * t), (-2.0 + a * t) / (b * t)};
        if (kind == Kind::Conic) {
            Cplx den = b * b * t * t;
            return {1.0 / den, (a * t + zeta + 1.0 / zeta) / den};
        }
        throw domain_error("sigma_at: family kind has no direct sigma path");
    }

    // representative pair in Rat_2 at parameter t > 0
    std::pair<HomPolyF, HomPolyF> pair_at(double t, const Tol& tol = default_tol()) const {
        switch (kind) {
            case Kind::Line:
            case Kind::Conic: {
                if (inside_boundary())
                    throw domain_error("pair_at: disk lies inside the boundary of M_2");
                auto [s1, s2] = sigma_at({t, 0});
                return realize_from_sigma(s1, s2, tol);
            }
            case Kind::NormalForm:
                return nf_pair(eval_poly_t(alpha, {t, 0}), eval_poly_t(beta, {t, 0}));
            case Kind::CoeffPath: {
                std::vector<Cplx> p, q_;
                for (const auto& c : Pt) p.push_back(eval_poly_t(c, {t, 0}));
                for (const auto& c : Qt) q_.push_back(eval_poly_t(c, {t, 0}));
                return {HomPolyF(std::move(p)), HomPolyF(std::move(q_))};
            }
        }
        throw input_error("pair_at: bad kind");
    }

    RatbarPoint<Cplx> at(double t, const Tol& tol = default_tol()) const {
        auto [P, Q] = pair_at(t, tol);
        return RatbarPoint<Cplx>::normalize(P, Q, tol);
    }

    // the limit point in Mbar_2 as t -> 0
    ModuliPoint2 base(const Tol& tol = default_tol()) const {
        switch (kind) {
            case Kind::Line:
                return ModuliPoint2::boundary_of(ProjPoint<Cplx>::finite({-1, 0}));
            case Kind::Conic:
                return ModuliPoint2::boundary_of(ProjPoint<Cplx>::finite(zeta));
            case Kind::NormalForm: {
                Cplx a0 = eval_poly_t(alpha, {0, 0});
                Cplx b0 = eval_poly_t(beta, {0, 0});
                if (std::abs(1.0 - a0 * b0) > 1e-10) {
                    auto m = multipliers_for(*this, 0.0, tol);
                    return ModuliPoint2::interior(m.sigma1, m.sigma2);
                }
                return ModuliPoint2::boundary_of(ProjPoint<Cplx>::finite(a0));
            }
            case Kind::CoeffPath: {
                auto [P0, Q0] = pair_at(0.0, tol);
                bool degenerate = P0.is_zero() || Q0.is_zero();
                if (!degenerate) {
                    auto f0 = RatbarPoint<Cplx>::normalize(P0, Q0, tol);
                    degenerate = f0.has_holes() || f0.phi_degree() < 2;
                }
                if (!degenerate) {
                    auto m = multipliers_pair(P0, Q0, tol);
                    return ModuliPoint2::interior(m.sigma1, m.sigma2);
                }
                // boundary: the bounded multiplier pair tends to {a, 1/a};
                // their sum is labeling-symmetric and analytic in t, so it
                // extrapolates cleanly to a + 1/a
                std::vector<Cplx> sums;
                double t = 1e-2;
                for (int j = 0; j < 8; ++j, t *= 0.25) {
                    try {
                        sums.push_back(bounded_multiplier_pair(*this, t, tol).first);
                    } catch (const std::exception&) {
                        break;
                    }
                }
                if (sums.size() < 3) throw numeric_error("base: boundary parameter not resolved");
                Cplx c = detail::romberg_limit(sums, 0.25).first;
                return ModuliPoint2{{1, 0}, c, {0, 0}};
            }
        }
        throw input_error("base: bad kind");
    }

    static Cplx eval_poly_t(const std::vector<Cplx>& c, Cplx t) {
        Cplx r{0, 0};
        for (size_t i = c.size(); i-- > 0;) r = r * t + c[i];
        return r;
    }

  private:
    static MultiplierTriple multipliers_for(const DiskFamily& f, double t, const Tol& tol) {
        auto [P, Q] = f.pair_at(t, tol);
        return multipliers_pair(P, Q, tol);
    }
};

// ---- tau^2 of a disk ----------------------------------------------------

struct Tau2 {
    bool is_infinity = false;
    Cplx value{0, 0};

    static Tau2 infinity() { return {true, {0, 0}}; }
    static Tau2 finite(Cplx v) { return {false, v}; }
};

inline bool same_tau2(const Tau2& x, const Tau2& y, double tol = default_tol().tau) {
    if (x.is_infinity || y.is_infinity) return x.is_infinity == y.is_infinity;
    return std::abs(x.value - y.value) <= tol * std::max(1.0, std::abs(x.value));
}

// closed form along the line L_(a:b) at q = 2: (b - a)/b
inline Tau2 tau_squared_closed_form_line(Cplx a, Cplx b) {
    if (std::abs(b) < 1e-300) return Tau2::infinity();
    return Tau2::finite((b - a) / b);
}

// closed form along the conic C_(a^2:b^2) at [Lambda_zeta], q > 2:
//   -q^2 a^2 zeta^3 / (b^2 (zeta^2-1)^2 (zeta-1)^2)
inline Tau2 tau_squared_closed_form_conic(Cplx a, Cplx b, int q, Cplx zeta) {
    if (q <= 2) throw input_error("conic closed form requires q > 2");
    if (std::abs(b) < 1e-300) return Tau2::infinity();
    Cplx z2m1 = zeta * zeta - 1.0, zm1 = zeta - 1.0;
    Cplx num = -double(q) * double(q) * a * a * zeta * zeta * zeta;
    return Tau2::finite(num / (b * b * z2m1 * z2m1 * zm1 * zm1));
}


namespace detail {

// remainder of g (coefficients highest-first) modulo the monic quadratic
// x^2 + p x + q, returned as (a, b) with remainder a x + b
inline std::pair<Cplx, Cplx> reduce_mod_quadratic(const std::vector<Cplx>& g, Cplx p, Cplx q) {
    Cplx a{0, 0}, b{0, 0};
    for (const Cplx& c : g) {
        Cplx na = b - a * p;
        Cplx nb = c - a * q;
        a = na;
        b = nb;
    }
    return {a, b};
}

// g(z1) g(z2) over the roots of x^2 + p x + q, from the reduced form
inline Cplx pair_product(const std::pair<Cplx, Cplx>& ab, Cplx p, Cplx q) {
    auto [a, b] = ab;
    return a * a * q - a * b * p + b * b;
}

// g(z1) h(z2) + g(z2) h(z1)
inline Cplx pair_cross(const std::pair<Cplx, Cplx>& ab, const std::pair<Cplx, Cplx>& cd, Cplx p,
                       Cplx q) {
    auto [a, b] = ab;
    auto [c, d] = cd;
    return 2.0 * a * c * q - (a * d + b * c) * p + 2.0 * b * d;
}

// (e1, e2) = (alpha + beta, alpha beta) of the two bounded multipliers for
// exact Milnor coordinates, via deflation of the dominant root gamma. All
// divisions are cancellation-free.
inline std::pair<Cplx, Cplx> bounded_pair_from_sigma(Cplx s1, Cplx s2) {
    std::vector<Cplx> u = {Cplx(1, 0), -s1, s2, -(s1 - 2.0)};
    auto du = poly_derivative(u);
    Cplx gamma = newton_polish(u, du, s1);
    if (std::abs(gamma) < 1.0) {
        // no dominant root (interior-like data); fall back on direct roots
        auto rts = companion_roots(u);
        std::sort(rts.begin(), rts.end(),
                  [](Cplx x, Cplx y) { return std::abs(x) > std::abs(y); });
        gamma = newton_polish(u, du, rts[0]);
    }
    Cplx e2 = (s1 - 2.0) / gamma;
    Cplx e1 = (s2 - e2) / gamma;
    return {e1, e2};
}

}  // namespace detail

// Symmetric functions (alpha + beta, alpha beta) of the two fixed-point
// multipliers that stay bounded as t -> 0 along the disk. Computed without
// ever separating alpha from beta, so the combination 1 - alpha beta keeps
// full precision even as the pair collides:
//  - line/conic pencils: deflation algebra on the exact sigma coordinates;
//  - normal forms: alpha(t), beta(t) evaluated directly;
//  - coefficient paths: the colliding fixed-point pair is refined as a
//    quadratic factor of the fixed-point cubic, and the multiplier pair's
//    symmetric functions come from resultant-style reductions against it.
inline std::pair<Cplx, Cplx> bounded_multiplier_pair(const DiskFamily& fam, double t,
                                                     const Tol& tol) {
    using K = DiskFamily::Kind;
    switch (fam.kind) {
        case K::Line:
        case K::Conic: {
            auto [s1, s2] = fam.sigma_at({t, 0});
            return detail::bounded_pair_from_sigma(s1, s2);
        }
        case K::NormalForm: {
            Cplx al = DiskFamily::eval_poly_t(fam.alpha, {t, 0});
            Cplx be = DiskFamily::eval_poly_t(fam.beta, {t, 0});
            return {al + be, al * be};
        }
        case K::CoeffPath: {
            auto [P, Q] = fam.pair_at(t, tol);
            HomPolyF cubic = mul(HomPolyF::var_z(), Q) - mul(HomPolyF::var_w(), P);
            double scale = cubic.max_abs();
            std::vector<Cplx> u(cubic.coeffs().begin(), cubic.coeffs().end());
            for (auto& c : u) c /= scale;
            // fixed point at infinity: deflate it coefficient-wise
            int lead = 0;
            while (lead + 1 < static_cast<int>(u.size()) && std::abs(u[lead]) < 1e-12) ++lead;
            u.erase(u.begin(), u.begin() + lead);
            Cplx p, q;
            if (u.size() == 3) {
                // the two finite fixed points are the colliding pair
                p = u[1] / u[0];
                q = u[2] / u[0];
            } else if (u.size() == 4) {
                const Cplx lead = u[0];
                for (auto& c : u) c /= lead;
                auto rts = detail::companion_roots(u);
                // pick the closest pair as the colliding one
                int bi = 0, bj = 1;
                double best = 1e300;
                for (int i = 0; i < 3; ++i)
                    for (int j = i + 1; j < 3; ++j)
                        if (std::abs(rts[i] - rts[j]) < best) {
                            best = std::abs(rts[i] - rts[j]);
                            bi = i;
                            bj = j;
                        }
                p = -(rts[bi] + rts[bj]);
                q = rts[bi] * rts[bj];
                if (!detail::bairstow(u, p, q))
                    throw numeric_error("bounded_multiplier_pair: quadratic factor refinement failed");
            } else {
                throw numeric_error("bounded_multiplier_pair: degenerate fixed-point locus");
            }
            // multiplier lambda(z) = N(z)/W(z) at the two roots of x^2+px+q
            std::vector<Cplx> pc(P.coeffs().begin(), P.coeffs().end());
            std::vector<Cplx> qc(Q.coeffs().begin(), Q.coeffs().end());
            auto dz = [](const std::vector<Cplx>& v) {
                std::vector<Cplx> d(v.size() - 1);
                int n = static_cast<int>(v.size()) - 1;
                for (int i = 0; i < n; ++i) d[i] = v[i] * double(n - i);
                return d;
            };
            auto pmul = [](const std::vector<Cplx>& x, const std::vector<Cplx>& y) {
                std::vector<Cplx> r(x.size() + y.size() - 1, Cplx(0, 0));
                for (size_t i = 0; i < x.size(); ++i)
                    for (size_t j = 0; j < y.size(); ++j) r[i + j] += x[i] * y[j];
                return r;
            };
            auto psub = [](std::vector<Cplx> x, const std::vector<Cplx>& y) {
                size_t off = x.size() - y.size();
                for (size_t i = 0; i < y.size(); ++i) x[off + i] -= y[i];
                return x;
            };
            std::vector<Cplx> N = psub(pmul(dz(pc), qc), pmul(dz(qc), pc));
            std::vector<Cplx> W = pmul(qc, qc);
            auto rn = detail::reduce_mod_quadratic(N, p, q);
            auto rw = detail::reduce_mod_quadratic(W, p, q);
            Cplx Wprod = detail::pair_product(rw, p, q);
            Cplx e2 = detail::pair_product(rn, p, q) / Wprod;
            Cplx e1 = detail::pair_cross(rn, rw, p, q) / Wprod;
            return {e1, e2};
        }
    }
    throw input_error("bounded_multiplier_pair: bad kind");
}

// Numerical tau^2 along a disk with base [Lambda_zeta], zeta a primitive
// q-th root of unity. The symmetrized quantity
//   s(t) = ((alpha^q - 1)^2 + (beta^q - 1)^2) / (2 eps)
// is invariant under the alpha/beta labeling swap, hence single-valued and
// analytic in t, and tends to tau^2; it is evaluated through the pair's
// symmetric functions (power sums) and extrapolated by a Richardson ladder
// on a ratio-1/4 grid. The two individual labelings must also approach each
// other (the labeling symmetry of the definition).
inline Tau2 tau_squared_numeric(const DiskFamily& fam, int q, const Tol& tol = default_tol(),
                                double t0 = 1e-2, int J = 10) {
    if (fam.inside_boundary()) return Tau2::infinity();
    const double rho = 0.25;

    std::vector<Cplx> sym;
    std::vector<double> split;  // |v_alpha - v_beta| per grid point
    double t = t0;
    for (int j = 0; j < J; ++j, t *= rho) {
        try {
            auto [e1, e2] = bounded_multiplier_pair(fam, t, tol);
            Cplx eps = 1.0 - e2;
            if (std::abs(eps) < 1e-280) return Tau2::infinity();
            // power sums of the multiplier pair up to 2q
            std::vector<Cplx> ps(2 * q + 1);
            ps[0] = {2, 0};
            ps[1] = e1;
            for (int k = 2; k <= 2 * q; ++k) ps[k] = e1 * ps[k - 1] - e2 * ps[k - 2];
            // (A-1)^2 + (B-1)^2 with A = alpha^q, B = beta^q
            Cplx num = ps[2 * q] - 2.0 * ps[q] + 2.0;
            Cplx sv = num / (2.0 * eps);
            if (!std::isfinite(sv.real()) || !std::isfinite(sv.imag())) break;
            sym.push_back(sv);
            // |v_alpha - v_beta| = |A - B| |A + B - 2| / (2 eps),
            // (A - B)^2 = ps[q]^2 - 4 e2^q
            Cplx e2q = std::pow(e2, q);
            double dAB = std::sqrt(std::abs(ps[q] * ps[q] - 4.0 * e2q));
            split.push_back(dAB * std::abs(ps[q] - 2.0) / (2.0 * std::abs(eps)));
        } catch (const std::exception&) {
            break;  // grid exhausted (conditioning); use what we have
        }
    }
    if (sym.size() < 4) throw numeric_error("tau_squared: too few usable grid points");

    // divergence to infinity: magnitudes grow geometrically along the grid
    if (std::abs(sym.back()) > 1e5 && std::abs(sym.back()) > 4.0 * std::abs(sym[sym.size() / 2]))
        return Tau2::infinity();

    auto [value, corr] = detail::romberg_limit(sym, rho);
    double scale = std::max(1.0, std::abs(value));
    if (!(corr <= tol.tau * scale))
        throw numeric_error("tau_squared: extrapolation did not converge");
    // both labelings must meet in the limit
    if (split.back() > 0.6 * split.front() + 0.05 * scale)
        throw numeric_error("tau_squared: the two multiplier labelings do not reconcile");
    return Tau2::finite(value);
}

// tau^2 of a disk: closed forms for line/conic pencils, symbolic limit for
// polynomial normal-form data, numerical extrapolation for coefficient
// paths.
inline Tau2 tau_squared(const DiskFamily& fam, int q, const Tol& tol = default_tol()) {
    switch (fam.kind) {
        case DiskFamily::Kind::Line:
            return tau_squared_closed_form_line(fam.a, fam.b);
        case DiskFamily::Kind::Conic:
            return tau_squared_closed_form_conic(fam.a, fam.b, q, fam.zeta);
        case DiskFamily::Kind::NormalForm: {
            // polynomial arithmetic in t: num = (alpha^q - 1)^2, den = 1 - alpha beta
            auto pmul = [](const std::vector<Cplx>& x, const std::vector<Cplx>& y) {
                std::vector<Cplx> r(x.size() + y.size() - 1, Cplx(0, 0));
                for (size_t i = 0; i < x.size(); ++i)
                    for (size_t j = 0; j < y.size(); ++j) r[i + j] += x[i] * y[j];
                return r;
            };
            std::vector<Cplx> aq{1.0};
            for (int k = 0; k < q; ++k) aq = pmul(aq, fam.alpha);
            aq[0] -= 1.0;
            std::vector<Cplx> num = pmul(aq, aq);
            std::vector<Cplx> den = pmul(fam.alpha, fam.beta);
            for (auto& c : den) c = -c;
            den[0] += 1.0;
            auto order = [](const std::vector<Cplx>& v) -> int {
                double scale = 0;
                for (auto& c : v) scale = std::max(scale, std::abs(c));
                if (scale == 0) return -1;
                for (size_t i = 0; i < v.size(); ++i)
                    if (std::abs(v[i]) > 1e-12 * scale) return static_cast<int>(i);
                return -1;
            };
            int on = order(num), od = order(den);
            if (od < 0) return Tau2::infinity();  // eps(t) == 0: disk inside boundary
            if (on < 0 || on > od) return Tau2::finite({0, 0});
            if (on < od) return Tau2::infinity();
            return Tau2::finite(num[on] / den[od]);
        }
        case DiskFamily::Kind::CoeffPath:
            return tau_squared_numeric(fam, q, tol);
    }
    throw input_error("tau_squared: bad kind");
}

// ---- classification of iterate limits ----------------------------------

enum class LimitKind { InteriorIterate, LambdaIterate, FLimit, PLimit };

struct LimitClass {
    LimitKind kind;
    ModuliPoint2 base;
    int q = 0;        // set for FLimit/PLimit
    Cplx tau{0, 0};   // set for FLimit (either square root of tau^2)
    RatbarPoint<Cplx> rep;
};

// smallest q in [2, n_max] with a^q = 1 (a != 1), within tolerance
inline std::optional<int> root_of_unity_order(Cplx a, int n_max, double tol = 1e-7) {
    if (std::abs(a - 1.0) <= tol) return std::nullopt;
    if (std::abs(std::abs(a) - 1.0) > tol) return std::nullopt;
    for (int q = 2; q <= n_max; ++q)
        if (std::abs(std::pow(a, q) - 1.0) <= tol) return q;
    return std::nullopt;
}

// Root-of-unity detection on the boundary coordinate c = a + 1/a. The
// parameter a recovered from c carries a sqrt-amplified error near c = +-2,
// but c itself is clean: a is a primitive q-th root of unity exactly when
// c = 2 cos(2 pi k / q) with gcd(k, q) = 1. Returns (q, zeta).
inline std::optional<std::pair<int, Cplx>> root_of_unity_from_c(Cplx c, int n_max,
                                                                double tol = 1e-6) {
    if (std::abs(c - 2.0) <= tol) return std::nullopt;  // a = 1 is excluded
    for (int q = 2; q <= n_max; ++q)
        for (int k = 1; 2 * k <= q; ++k) {
            if (std::gcd(k, q) != 1) continue;
            double cv = 2.0 * std::cos(2.0 * M_PI * k / q);
            if (std::abs(c - cv) <= tol)
                return std::make_pair(q, std::exp(Cplx(0, 2 * M_PI * k / q)));
        }
    return std::nullopt;
}

// Limit of Phi_n along the disk: the continuous extension off I(Phi_n), and
// the tau^2-classified [F_{q,tau,n}] / [P_{q,n}] on it.
inline LimitClass classify_limit(const DiskFamily& fam, int n, const Tol& tol = default_tol()) {
    ModuliPoint2 base = fam.base(tol);
    if (!base.is_boundary()) {
        auto f0 = fam.at(0.0, tol);
        return {LimitKind::InteriorIterate, base, 0, {0, 0}, iterate(f0, n, tol)};
    }
    if (std::abs(base.x1) > 1e-12 * std::abs(base.x2)) {
        Cplx c = base.x2 / base.x1;
        if (auto rz = root_of_unity_from_c(c, n)) {
            auto [q, zeta] = *rz;
            (void)zeta;
            Tau2 t2 = tau_squared(fam, q, tol);
            if (t2.is_infinity)
                return {LimitKind::PLimit, base, q, {0, 0}, P_family(q, n, tol)};
            Cplx tau = std::sqrt(t2.value);
            return {LimitKind::FLimit, base, q, tau, F_family(q, tau, n, tol)};
        }
    }
    auto [a1, a2] = boundary_parameter(base);
    Cplx a = a1.to_complex();
    if (std::abs(a) > 1.0) a = a2.to_complex();  // prefer |a| <= 1 representative
    ProjPoint<Cplx> ap = std::abs(a) > 1e300 ? ProjPoint<Cplx>::infinity()
                                             : ProjPoint<Cplx>::finite(a);
    return {LimitKind::LambdaIterate, base, 0, {0, 0}, lambda_iterate(ap, n, tol)};
}

// ---- conjugacy invariants of the limit classes --------------------------

// chi + 1/chi for the four marked points of an F-type limit. The two
// deepest holes are {0, infinity} (in the normalized representative); the
// other marked pair consists of the preimages p_+- of 0 under the reduced
// map z + tau + 1/z. For n = q those preimages are not holes yet, so they
// are recovered from phi; for n > q they appear as the second-deepest hole
// pair. The invariant equals tau^2 - 2 and is insensitive to both labeling
// swaps.
inline Cplx marked_invariant(const RatbarPoint<Cplx>& rep, const Tol& tol = default_tol()) {
    std::vector<Root<Cplx>> hs(rep.holes().begin(), rep.holes().end());
    std::sort(hs.begin(), hs.end(), [](const Root<Cplx>& x, const Root<Cplx>& y) {
        return x.mult > y.mult;
    });
    if (hs.size() < 2) throw domain_error("marked_invariant: not enough distinct holes");
    if (hs[0].mult != hs[1].mult) throw domain_error("marked_invariant: top depth pair mismatch");
    ProjPoint<Cplx> A = hs[0].point, B = hs[1].point;

    std::vector<Cplx> pr;
    if (hs.size() >= 4 && hs[2].mult == hs[3].mult &&
        (hs.size() == 4 || hs[3].mult > hs[4].mult)) {
        pr = {hs[2].point.to_complex(), hs[3].point.to_complex()};
    } else if (hs.size() >= 3 && hs[2].mult % 2 == 0 &&
               (hs.size() == 3 || hs[2].mult > hs[3].mult)) {
        // tau = +-2: the preimage pair coincides
        pr = {hs[2].point.to_complex(), hs[2].point.to_complex()};
    } else {
        // n = q: find which of {A, B} plays the role of 0 (its phi-preimages
        // leave {A, B}) and take those preimages as the marked pair
        auto preimages = [&](const ProjPoint<Cplx>& y) {
            HomPolyF pre = rep.phi_z() * y.w() - rep.phi_w() * y.z();
            std::vector<ProjPoint<Cplx>> out;
            for (const auto& e : roots(pre, tol))
                for (int k = 0; k < e.mult; ++k) out.push_back(e.point);
            return out;
        };
        for (const auto& cand : {A, B}) {
            auto pre = preimages(cand);
            bool outside = true;
            for (const auto& y : pre)
                if (same_point(y, A, tol.root) || same_point(y, B, tol.root)) outside = false;
            if (outside && pre.size() == 2) {
                pr = {pre[0].to_complex(), pre[1].to_complex()};
                break;
            }
        }
        if (pr.empty()) throw domain_error("marked_invariant: marked pair not found");
    }
    // cross-ratio normalized so chi(0, inf, p, r) = r/p, via the Mobius map
    // sending A -> 0, B -> inf (infinity-safe via projective coordinates)
    auto send = [&](Cplx x) {
        Cplx num = A.is_infinity() ? Cplx(1, 0) : x - A.to_complex();
        Cplx den = B.is_infinity() ? Cplx(1, 0) : x - B.to_complex();
        return num / den;
    };
    Cplx chi = send(pr[1]) / send(pr[0]);
    return chi + 1.0 / chi;
}

// depth signature of P_{q,n}: a hole of depth exactly 2^(n-1)
inline bool p_type_signature(const RatbarPoint<Cplx>& rep, int n) {
    for (const auto& h : rep.holes())
        if (h.mult == (1 << (n - 1))) return true;
    return false;
}

// Conjugate-or-not for two F/P-type limits in Ratbar_{2^n}: depth multisets
// must match; P is separated from F by the depth signature; two F's compare
// by the cross-ratio invariant chi + 1/chi = tau^2 - 2.
inline bool distinguish_classes(const RatbarPoint<Cplx>& f, const RatbarPoint<Cplx>& g, int n,
                                const Tol& tol = default_tol()) {
    if (f.degree() != g.degree()) return false;
    auto depths = [](const RatbarPoint<Cplx>& x) {
        std::vector<int> d;
        for (const auto& h : x.holes()) d.push_back(h.mult);
        std::sort(d.begin(), d.end());
        return d;
    };
    if (depths(f) != depths(g)) return false;
    bool fp = p_type_signature(f, n), gp = p_type_signature(g, n);
    if (fp != gp) return false;
    if (fp && gp) return true;  // both parabolic-type limits of the same (q, n)
    Cplx vf = marked_invariant(f, tol), vg = marked_invariant(g, tol);
    return std::abs(vf - vg) <= 1e-8 * std::max(1.0, std::abs(vf));
}

// ---- points of the iterate-resolving compactification -------------------

// A point of the inverse-limit space: the base point of Mbar_2, plus the
// (q, tau^2) fiber datum exactly when the base sits on the indeterminacy
// locus. Finitely many entries determine the whole tuple.
struct MhatPoint {
    ModuliPoint2 base;
    std::optional<int> q;
    std::optional<Tau2> tau2;
};

inline MhatPoint mhat_point(const DiskFamily& fam, int N, const Tol& tol = default_tol()) {
    ModuliPoint2 base = fam.base(tol);
    MhatPoint out{base, std::nullopt, std::nullopt};
    if (!base.is_boundary()) return out;
    if (std::abs(base.x1) <= 1e-12 * std::abs(base.x2)) return out;  // a in {0, inf}
    auto rz = root_of_unity_from_c(base.x2 / base.x1, N);
    if (!rz) return out;
    out.q = rz->first;
    out.tau2 = tau_squared(fam, rz->first, tol);
    return out;
}

// expansion of an MhatPoint into the first N entries of its iterate tuple
inline std::vector<LimitClass> mhat_tuple(const DiskFamily& fam, int N,
                                          const Tol& tol = default_tol()) {
    std::vector<LimitClass> out;
    for (int n = 1; n <= N; ++n) out.push_back(classify_limit(fam, n, tol));
    return out;
}

// ---- Epstein normal-form machinery --------------------------------------

// critical points of a degree-2 pair: roots of the Jacobian determinant
inline std::array<ProjPoint<Cplx>, 2> critical_points(const HomPolyF& P, const HomPolyF& Q,
                                                      const Tol& tol = default_tol()) {
    HomPolyF jac = mul(P.derivative_z(), Q.derivative_w()) - mul(P.derivative_w(), Q.derivative_z());
    auto r = roots(jac, tol);
    std::array<ProjPoint<Cplx>, 2> out{ProjPoint<Cplx>::finite({0, 0}),
                                       ProjPoint<Cplx>::finite({0, 0})};
    int idx = 0;
    for (const auto& e : r)
        for (int k = 0; k < e.mult && idx < 2; ++k) out[idx++] = e.point;
    if (idx != 2) throw numeric_error("critical_points: expected two critical points");
    return out;
}

// The Mobius change of variables from normal form (Nf) to (NF): labeled
// critical points go to +1 and -1, the fixed point at 1 goes to 0. The
// returned map m conjugates f into gamma z / (z^2 + delta z + 1) form via
// m f m^(-1).
inline MobiusC nf_to_critical_frame(const HomPolyF& P, const HomPolyF& Q,
                                    const Tol& tol = default_tol()) {
    auto crit = critical_points(P, Q, tol);
    std::array<ProjPoint<Cplx>, 3> from = {crit[0], crit[1], ProjPoint<Cplx>::finite({1, 0})};
    std::array<ProjPoint<Cplx>, 3> to = {ProjPoint<Cplx>::finite({1, 0}),
                                         ProjPoint<Cplx>::finite({-1, 0}),
                                         ProjPoint<Cplx>::finite({0, 0})};
    return mobius_three_points(from, to);
}

}  // namespace bd
