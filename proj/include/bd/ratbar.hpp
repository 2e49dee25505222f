#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "bd/gcd.hpp"
#include "bd/hom_poly.hpp"
#include "bd/mobius.hpp"
#include "bd/proj_point.hpp"
#include "bd/roots.hpp"

namespace bd {

inline Int ipow(long base, int e) {
    Int r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// Multiplicity of pt as a root of p. Exact backend: repeated exact division;
// floating: derivative ladder with relative thresholds.
template <class S>
int root_multiplicity(const HomPoly<S>& p, const ProjPoint<S>& pt, const Tol& tol = default_tol()) {
    using T = scalar_traits<S>;
    if (p.is_zero()) throw domain_error("root_multiplicity: zero polynomial");
    if constexpr (T::exact) {
        HomPoly<S> lin(std::vector<S>{pt.w(), -pt.z()});
        HomPoly<S> cur = p;
        int m = 0;
        while (cur.degree() >= 1 && T::is_zero(eval_at(cur, pt))) {
            cur = divide_exact(cur, lin, tol);
            ++m;
        }
        return m;
    } else {
        if (pt.is_infinity()) {
            double scale = p.max_abs();
            int k = 0;
            while (k <= p.degree() && negligible(p.coeff(k), scale, tol.verify)) ++k;
            return k;
        }
        std::vector<Cplx> u(p.coeffs().begin(), p.coeffs().end());
        double scale = 0;
        for (auto& c : u) scale = std::max(scale, std::abs(c));
        if (scale > 0)
            for (auto& c : u) c /= scale;
        std::vector<std::vector<Cplx>> ders{u};
        for (int j = 0; j < p.degree(); ++j) ders.push_back(detail::poly_derivative(ders.back()));
        return detail::ladder_multiplicity(ders, pt.to_complex(), tol.verify);
    }
}

// A point of Ratbar_d: the pair (P:Q) with its derived data H = gcd(P,Q),
// the reduced map phi = (P/H : Q/H), and the holes (roots of H with their
// depths). Immutable after construction.
//
// In the exact backend the hole POINTS may fail to lie in Q(i) even though
// the pair itself is exact (e.g. iterates whose pullback factors have
// irrational roots). Such a point carries an exact pair but an unknown hole
// list; structural queries keep working, point-level hole queries throw.
template <class S>
class RatbarPoint {
  public:
    using traits = scalar_traits<S>;

    static RatbarPoint normalize(const HomPoly<S>& P, const HomPoly<S>& Q,
                                 const Tol& tol = default_tol()) {
        if (P.degree() != Q.degree()) throw input_error("normalize: degree mismatch");
        if (P.is_zero() && Q.is_zero()) throw input_error("normalize: both components zero");
        HomPoly<S> H = gcd(P, Q, tol);
        HomPoly<S> pz = P.is_zero() ? HomPoly<S>::zero(P.degree() - H.degree())
                                    : divide_exact(P, H, tol);
        HomPoly<S> pw = Q.is_zero() ? HomPoly<S>::zero(Q.degree() - H.degree())
                                    : divide_exact(Q, H, tol);
        std::optional<RootList<S>> holes;
        if (H.degree() == 0) {
            holes.emplace();
        } else {
            try {
                holes = roots(H, tol);
            } catch (const numeric_error&) {
                // exact backend with irrational hole locations
            }
        }
        return RatbarPoint(P, Q, std::move(H), std::move(pz), std::move(pw), std::move(holes));
    }

    // Assemble from structured data (family constructors, iterate, compose)
    // without re-running gcd; known hole bookkeeping must account for all of
    // deg H, which is asserted.
    static RatbarPoint from_parts(HomPoly<S> H, HomPoly<S> phiz, HomPoly<S> phiw,
                                  std::optional<RootList<S>> holes,
                                  const Tol& tol = default_tol()) {
        if (holes && total_multiplicity(*holes) != H.degree())
            throw numeric_error("RatbarPoint: hole depths do not account for deg H");
        HomPoly<S> P = mul(H, phiz), Q = mul(H, phiw);
        (void)tol;
        return RatbarPoint(std::move(P), std::move(Q), std::move(H), std::move(phiz),
                           std::move(phiw), std::move(holes));
    }

    int degree() const { return P_.degree(); }
    int phi_degree() const { return phiz_.degree(); }
    int hole_degree() const { return H_.degree(); }
    bool has_holes() const { return H_.degree() > 0; }
    bool holes_known() const { return holes_.has_value(); }
    const HomPoly<S>& P() const { return P_; }
    const HomPoly<S>& Q() const { return Q_; }
    const HomPoly<S>& hole_part() const { return H_; }
    const HomPoly<S>& phi_z() const { return phiz_; }
    const HomPoly<S>& phi_w() const { return phiw_; }
    const RootList<S>& holes() const {
        if (!holes_)
            throw numeric_error("holes: locations not representable in the exact backend; "
                                "use the float backend");
        return *holes_;
    }

    bool phi_constant() const { return phiz_.degree() == 0; }
    ProjPoint<S> phi_value() const {
        if (!phi_constant()) throw domain_error("phi_value: phi is nonconstant");
        return ProjPoint<S>::from_pair(phiz_.coeff(0), phiw_.coeff(0));
    }

    ProjPoint<S> phi_apply(const ProjPoint<S>& p) const {
        return ProjPoint<S>::from_pair(eval_at(phiz_, p), eval_at(phiw_, p));
    }

    // Depth of z as a hole (0 if not a hole); needs the hole list.
    int depth_at(const ProjPoint<S>& z, double tol = default_tol().root) const {
        for (const auto& h : holes())
            if (same_point(h.point, z, tol)) return h.mult;
        return 0;
    }

  private:
    RatbarPoint(HomPoly<S> P, HomPoly<S> Q, HomPoly<S> H, HomPoly<S> pz, HomPoly<S> pw,
                std::optional<RootList<S>> holes)
        : P_(std::move(P)), Q_(std::move(Q)), H_(std::move(H)), phiz_(std::move(pz)),
          phiw_(std::move(pw)), holes_(std::move(holes)) {}

    HomPoly<S> P_, Q_, H_, phiz_, phiw_;
    std::optional<RootList<S>> holes_;
};

using RatbarX = RatbarPoint<GaussianRational>;
using RatbarF = RatbarPoint<Cplx>;

// Projective equality of boundary points: the concatenated coefficient
// vectors of (P,Q) are proportional.
template <class S>
bool equal_projective(const RatbarPoint<S>& f, const RatbarPoint<S>& g,
                      double rel_tol = 1e-9) {
    if (f.degree() != g.degree()) return false;
    std::vector<S> a(f.P().coeffs()), b(g.P().coeffs());
    a.insert(a.end(), f.Q().coeffs().begin(), f.Q().coeffs().end());
    b.insert(b.end(), g.Q().coeffs().begin(), g.Q().coeffs().end());
    return proportional(HomPoly<S>(std::move(a)), HomPoly<S>(std::move(b)), rel_tol);
}

// f is in the indeterminacy locus I(d) iff phi is constant and its value is
// a hole. Decided by direct evaluation of H, so no hole list is needed.
template <class S>
bool in_indeterminacy(const RatbarPoint<S>& f, const Tol& tol = default_tol()) {
    if (!f.phi_constant()) return false;
    S v = eval_at(f.hole_part(), f.phi_value());
    return negligible(v, f.hole_part().max_abs(), tol.root);
}

// Multiplicity of y as a solution of phi(x) = phi(y); 0 by convention when
// phi is constant.
template <class S>
int local_mult(const RatbarPoint<S>& f, const ProjPoint<S>& y, const Tol& tol = default_tol()) {
    if (f.phi_constant()) return 0;
    ProjPoint<S> img = f.phi_apply(y);
    HomPoly<S> level = f.phi_z() * img.w() - f.phi_w() * img.z();
    return root_multiplicity(level, y, tol);
}

// m_z(phi^n) = product of local multiplicities along the orbit.
template <class S>
Int local_degree(const RatbarPoint<S>& f, const ProjPoint<S>& z, int n,
                 const Tol& tol = default_tol()) {
    if (f.phi_constant()) return 0;
    if (n == 0) return 1;
    Int m = 1;
    ProjPoint<S> y = z;
    for (int k = 0; k < n; ++k) {
        m *= local_mult(f, y, tol);
        y = f.phi_apply(y);
    }
    return m;
}

// Depth of z as a hole of f^n, via the iterate-depth recursion; does not
// materialize the iterate.
template <class S>
Int depth_of_iterate(const RatbarPoint<S>& f, const ProjPoint<S>& z, int n,
                     const Tol& tol = default_tol()) {
    if (in_indeterminacy(f, tol)) throw domain_error("depth_of_iterate: point in I(d)");
    if (n < 1) throw input_error("depth_of_iterate: n must be >= 1");
    long d = f.degree();
    Int result = ipow(d, n - 1) * f.depth_at(z, tol.root);
    if (f.phi_constant()) return result;
    Int m = 1;
    ProjPoint<S> y = z;
    for (int k = 1; k <= n - 1; ++k) {
        m *= local_mult(f, y, tol);
        if (m == 0) break;
        y = f.phi_apply(y);
        result += ipow(d, n - 1 - k) * m * f.depth_at(y, tol.root);
    }
    return result;
}

// f^n by the product formula  f^n = (prod_k (phi^k* H)^(d^(n-k-1))) phi^n,
// with holes assembled factor by factor (roots of each pullback of H scaled
// by the known exponent) rather than by re-running a gcd on the result.
template <class S>
RatbarPoint<S> iterate(const RatbarPoint<S>& f, int n, const Tol& tol = default_tol()) {
    if (n < 1) throw input_error("iterate: n must be >= 1");
    if (in_indeterminacy(f, tol)) throw domain_error("iterate: point in I(d)");
    long d = f.degree();
    if (n * std::log(double(d)) > std::log(double(tol.max_degree)) + 1e-9)
        throw domain_error("iterate: degree budget exceeded");

    using T = scalar_traits<S>;
    HomPoly<S> pkz = HomPoly<S>::var_z(), pkw = HomPoly<S>::var_w();  // phi^0
    HomPoly<S> Hn = HomPoly<S>::constant(T::one());
    RootList<S> holes;
    bool holes_known = true;
    for (int k = 0; k < n; ++k) {
        HomPoly<S> Ak = substitute(f.hole_part(), pkz, pkw);
        if (Ak.is_zero()) throw domain_error("iterate: point in I(d)");
        int ek = static_cast<int>(ipow(d, n - 1 - k).template convert_to<long>());
        Hn = mul(Hn, pow(Ak, ek));
        if (Ak.degree() > 0 && holes_known) {
            if (k == 0 && f.holes_known()) {
                for (const auto& r : f.holes()) holes.push_back({r.point, r.mult * ek});
            } else {
                try {
                    for (const auto& r : roots(Ak, tol)) holes.push_back({r.point, r.mult * ek});
                } catch (const numeric_error&) {
                    holes_known = false;
                }
            }
        }
        if (k + 1 < n) {
            HomPoly<S> nz = substitute(f.phi_z(), pkz, pkw);
            HomPoly<S> nw = substitute(f.phi_w(), pkz, pkw);
            pkz = std::move(nz);
            pkw = std::move(nw);
        }
    }
    // phi^n
    HomPoly<S> pnz = substitute(f.phi_z(), pkz, pkw);
    HomPoly<S> pnw = substitute(f.phi_w(), pkz, pkw);
    std::optional<RootList<S>> hopt;
    if (holes_known) hopt = merge_roots(holes, tol.root);
    return RatbarPoint<S>::from_parts(Hn.normalized(tol), pnz, pnw, std::move(hopt), tol);
}

// I(d,e) for the composition map: phi_g constant with H_f vanishing at its
// value.
template <class S>
bool in_composition_indeterminacy(const RatbarPoint<S>& f, const RatbarPoint<S>& g,
                                  const Tol& tol = default_tol()) {
    if (!g.phi_constant()) return false;
    S v = eval_at(f.hole_part(), g.phi_value());
    return negligible(v, f.hole_part().max_abs(), tol.root);
}

// f o g = (H_g)^d H_f(P_g, Q_g) (phi_f o phi_g), holes tracked structurally.
template <class S>
RatbarPoint<S> compose(const RatbarPoint<S>& f, const RatbarPoint<S>& g,
                       const Tol& tol = default_tol()) {
    if (in_composition_indeterminacy(f, g, tol))
        throw domain_error("compose: pair in I(d,e)");
    long d = f.degree();
    if (std::log(double(d)) + std::log(double(g.degree())) >
        std::log(double(tol.max_degree)) + 1e-9)
        throw domain_error("compose: degree budget exceeded");

    HomPoly<S> Hg_d = pow(g.hole_part(), static_cast<int>(d));
    RootList<S> holes;
    bool holes_known = g.holes_known() || !g.has_holes();
    if (holes_known)
        for (const auto& h : g.holes()) holes.push_back({h.point, h.mult * static_cast<int>(d)});

    HomPoly<S> Hpull = substitute(f.hole_part(), g.phi_z(), g.phi_w());
    if (Hpull.is_zero()) throw domain_error("compose: pair in I(d,e)");
    HomPoly<S> H = mul(Hg_d, Hpull);
    if (Hpull.degree() > 0 && holes_known) {
        try {
            for (const auto& r : roots(Hpull, tol)) holes.push_back(r);
        } catch (const numeric_error&) {
            holes_known = false;
        }
    }

    HomPoly<S> cz = substitute(f.phi_z(), g.phi_z(), g.phi_w());
    HomPoly<S> cw = substitute(f.phi_w(), g.phi_z(), g.phi_w());
    std::optional<RootList<S>> hopt;
    if (holes_known) hopt = merge_roots(holes, tol.root);
    return RatbarPoint<S>::from_parts(H.normalized(tol), cz, cw, std::move(hopt), tol);
}

// A f A^(-1): substitutes A^(-1) into the pair and mixes rows by A; holes
// map forward under A with depths preserved.
template <class S>
RatbarPoint<S> conjugate(const RatbarPoint<S>& f, const Mobius<S>& A,
                         const Tol& tol = default_tol()) {
    if (A.singular()) throw domain_error("conjugate: singular Mobius matrix");
    Mobius<S> Ai = A.inverse();
    HomPoly<S> iz = Ai.z_poly(), iw = Ai.w_poly();
    auto subin = [&](const HomPoly<S>& p) { return substitute(p, iz, iw); };
    HomPoly<S> Pz = subin(f.phi_z()), Pw = subin(f.phi_w());
    HomPoly<S> nz = Pz * A.a + Pw * A.b;
    HomPoly<S> nw = Pz * A.c + Pw * A.d;
    HomPoly<S> H = subin(f.hole_part()).normalized(tol);
    std::optional<RootList<S>> holes;
    if (f.holes_known()) {
        holes.emplace();
        for (const auto& h : f.holes()) holes->push_back({A(h.point), h.mult});
    }
    return RatbarPoint<S>::from_parts(std::move(H), std::move(nz), std::move(nw),
                                      std::move(holes), tol);
}

// Direct pair-substitution iterate (test oracle; no hole bookkeeping).
template <class S>
std::pair<HomPoly<S>, HomPoly<S>> iterate_pair_oracle(const RatbarPoint<S>& f, int n) {
    HomPoly<S> P = f.P(), Q = f.Q();
    for (int k = 1; k < n; ++k) {
        HomPoly<S> nP = substitute(f.P(), P, Q);
        HomPoly<S> nQ = substitute(f.Q(), P, Q);
        P = std::move(nP);
        Q = std::move(nQ);
    }
    return {P, Q};
}

}  // namespace bd
