#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "bd/config.hpp"
#include "bd/hom_poly.hpp"
#include "bd/proj_point.hpp"

namespace bd {

template <class S>
struct Root {
    ProjPoint<S> point;
    int mult = 1;
};

template <class S>
using RootList = std::vector<Root<S>>;

template <class S>
int total_multiplicity(const RootList<S>& r) {
    int m = 0;
    for (const auto& e : r) m += e.mult;
    return m;
}

// Merge entries that represent the same projective point (exact equality or
// chordal proximity), summing multiplicities.
template <class S>
RootList<S> merge_roots(const RootList<S>& in, double tol) {
    RootList<S> out;
    for (const auto& r : in) {
        bool found = false;
        for (auto& o : out)
            if (same_point(o.point, r.point, tol)) {
                o.mult += r.mult;
                found = true;
                break;
            }
        if (!found) out.push_back(r);
    }
    return out;
}

// lead * prod (w_i z - z_i w)^mult, a degree-sum homogeneous polynomial.
template <class S>
HomPoly<S> from_roots(const S& lead, const RootList<S>& roots) {
    using T = scalar_traits<S>;
    HomPoly<S> p = HomPoly<S>::constant(lead);
    for (const auto& r : roots) {
        HomPoly<S> lin(std::vector<S>{r.point.w(), -r.point.z()});
        for (int k = 0; k < r.mult; ++k) p = mul(p, lin);
    }
    return p;
}

namespace detail {

// --- floating univariate machinery (coefficients highest-degree first) ---

inline std::vector<Cplx> poly_derivative(const std::vector<Cplx>& c) {
    if (c.size() <= 1) return {Cplx(0, 0)};
    std::vector<Cplx> d(c.size() - 1);
    int n = static_cast<int>(c.size()) - 1;
    for (int i = 0; i < n; ++i) d[i] = c[i] * double(n - i);
    return d;
}

inline Cplx poly_eval(const std::vector<Cplx>& c, Cplx x) {
    Cplx r = c[0];
    for (size_t i = 1; i < c.size(); ++i) r = r * x + c[i];
    return r;
}

inline double poly_norm1(const std::vector<Cplx>& c) {
    double s = 0;
    for (auto& v : c) s += std::abs(v);
    return s;
}

inline std::vector<Cplx> companion_roots(std::vector<Cplx> c) {
    int n = static_cast<int>(c.size()) - 1;
    if (n == 0) return {};
    const Cplx lead = c[0];
    for (auto& v : c) v /= lead;
    if (n == 1) return {-c[1]};
    if (n == 2) {
        // stable quadratic formula
        Cplx b = c[1], cc = c[2];
        Cplx sq = std::sqrt(b * b - 4.0 * cc);
        Cplx q = (std::real(std::conj(b) * sq) >= 0) ? -0.5 * (b + sq) : -0.5 * (b - sq);
        if (q == Cplx(0, 0)) return {Cplx(0, 0), Cplx(0, 0)};
        return {q, cc / q};
    }
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) M(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) M(i, n - 1) = -c[n - i];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
    std::vector<Cplx> out(n);
    for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()[i];
    return out;
}

inline Cplx newton_polish(const std::vector<Cplx>& p, const std::vector<Cplx>& dp, Cplx x0) {
    Cplx x = x0;
    for (int it = 0; it < 30; ++it) {
        Cplx f = poly_eval(p, x), df = poly_eval(dp, x);
        if (std::abs(df) == 0) break;
        Cplx step = f / df;
        x -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

// Linkage radius for a candidate multiplicity-m cluster: a perturbation of
// size u scatters an m-fold root by ~u^(1/m).
inline double cluster_radius(int m, double seed) {
    if (m <= 1) return seed;
    return std::max(seed, std::pow(1e-13, 1.0 / m));
}

// Magnitude envelope sum |c_i| |x|^(n-i); the natural scale for evaluation
// residuals at x.
inline double poly_envelope(const std::vector<Cplx>& c, double ax) {
    double r = std::abs(c[0]);
    for (size_t i = 1; i < c.size(); ++i) r = r * ax + std::abs(c[i]);
    return r;
}

// Bairstow refinement of a (near-)quadratic factor x^2 + p x + q of u.
// Joint refinement keeps the symmetric functions of a close root pair
// accurate even when the individual roots are ill-conditioned.
inline bool bairstow(const std::vector<Cplx>& a, Cplx& p, Cplx& q) {
    int n = static_cast<int>(a.size()) - 1;
    if (n < 2) return false;
    double env = poly_norm1(a);
    for (int it = 0; it < 60; ++it) {
        std::vector<Cplx> b(a.size()), P(a.size()), Q(a.size());
        auto at = [&](const std::vector<Cplx>& v, int i) { return i < 0 ? Cplx(0, 0) : v[i]; };
        for (int i = 0; i <= n; ++i) {
            b[i] = a[i] - p * at(b, i - 1) - q * at(b, i - 2);
            P[i] = -at(b, i - 1) - p * at(P, i - 1) - q * at(P, i - 2);
            Q[i] = -at(b, i - 2) - p * at(Q, i - 1) - q * at(Q, i - 2);
        }
        Cplx r1 = b[n - 1], r0 = b[n] + p * b[n - 1];
        Cplx j11 = P[n - 1], j12 = Q[n - 1];
        Cplx j21 = P[n] + b[n - 1] + p * P[n - 1], j22 = Q[n] + p * Q[n - 1];
        Cplx det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-300) return false;
        Cplx dp = (-r1 * j22 + r0 * j12) / det;
        Cplx dq = (-j11 * r0 + j21 * r1) / det;
        p += dp;
        q += dq;
        if (std::abs(dp) <= 1e-15 * std::max(1.0, std::abs(p)) &&
            std::abs(dq) <= 1e-15 * std::max(1.0, std::abs(q)))
            break;
        if (std::abs(r1) <= 1e-16 * env && std::abs(r0) <= 1e-16 * env) break;
    }
    // converged if the remainder is at noise level
    std::vector<Cplx> b(a.size());
    auto at = [&](const std::vector<Cplx>& v, int i) { return i < 0 ? Cplx(0, 0) : v[i]; };
    for (int i = 0; i <= n; ++i) b[i] = a[i] - p * at(b, i - 1) - q * at(b, i - 2);
    return std::abs(b[n - 1]) <= 1e-10 * env && std::abs(b[n] + p * b[n - 1]) <= 1e-10 * env;
}

// Multiplicity of x as a root, judged by scale-invariant residuals down the
// derivative ladder.
inline int ladder_multiplicity(const std::vector<std::vector<Cplx>>& ders, Cplx x, double verify) {
    double ax = std::abs(x);
    int m = 0;
    while (m + 1 < static_cast<int>(ders.size())) {
        double env = poly_envelope(ders[m], ax);
        if (std::abs(poly_eval(ders[m], x)) > verify * (env > 0 ? env : 1.0)) break;
        ++m;
    }
    return m;
}

// Verified multiplicity-aware root extraction for a univariate complex
// polynomial (coefficients highest-degree first). Eigenvalue candidates are
// linked generously (a high-multiplicity root scatters widely), then each
// cluster is polished and verified down the derivative ladder; clusters that
// fail verification are split and retried.
inline std::vector<std::pair<Cplx, int>> cluster_roots(const std::vector<Cplx>& u, const Tol& tol) {
    std::vector<Cplx> raw = companion_roots(u);
    if (raw.empty()) return {};
    int deg = static_cast<int>(u.size()) - 1;

    std::vector<std::vector<Cplx>> ders{u};
    for (size_t j = 0; j + 1 < u.size(); ++j) ders.push_back(poly_derivative(ders.back()));

    // connected components of the proximity graph at the generous radius
    double r_gen = cluster_radius(deg, tol.cluster_seed);
    std::vector<int> comp(raw.size());
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int i) { return comp[i] == i ? i : comp[i] = find(comp[i]); };
    for (size_t i = 0; i < raw.size(); ++i)
        for (size_t j = i + 1; j < raw.size(); ++j)
            if (chordal_c(raw[i], raw[j]) <= r_gen) comp[find(static_cast<int>(i))] = find(static_cast<int>(j));

    std::vector<std::vector<Cplx>> groups;
    {
        std::vector<int> reps;
        for (size_t i = 0; i < raw.size(); ++i) {
            int r = find(static_cast<int>(i));
            size_t gi = 0;
            for (; gi < reps.size(); ++gi)
                if (reps[gi] == r) break;
            if (gi == reps.size()) {
                reps.push_back(r);
                groups.emplace_back();
            }
            groups[gi].push_back(raw[i]);
        }
    }

    std::vector<std::pair<Cplx, int>> out;
    std::function<void(const std::vector<Cplx>&)> process = [&](const std::vector<Cplx>& pts) {
        int m = static_cast<int>(pts.size());
        if (m == 1) {
            Cplx r = newton_polish(ders[0], ders[1], pts[0]);
            if (chordal_c(r, pts[0]) > 1e-3) r = pts[0];
            out.push_back({r, 1});
            return;
        }
        if (m == 2) {
            // refine the pair jointly as a quadratic factor: the symmetric
            // functions stay accurate even when the roots nearly collide
            Cplx p = -(pts[0] + pts[1]), q = pts[0] * pts[1];
            if (bairstow(u, p, q)) {
                Cplx half = -p / 2.0;
                Cplx s = std::sqrt(half * half - q);
                double sep = 2.0 * std::abs(s);
                double scale = std::max(1.0, std::abs(half));
                if (sep <= std::max(tol.root, 1e-6) * scale) {
                    out.push_back({half, 2});
                } else {
                    out.push_back({half + s, 1});
                    out.push_back({half - s, 1});
                }
                return;
            }
        }
        Cplx center(0, 0);
        for (auto& p : pts) center += p;
        center /= double(m);
        Cplx r = newton_polish(ders[m - 1], ders[m], center);
        bool ok = chordal_c(r, center) <= 10 * cluster_radius(m, tol.cluster_seed) &&
                  ladder_multiplicity(ders, r, tol.verify) >= m;
        if (ok) {
            out.push_back({r, m});
            return;
        }
        // split at the widest pair and retry both halves
        size_t si = 0, sj = 1;
        double widest = -1;
        for (size_t i = 0; i < pts.size(); ++i)
            for (size_t j = i + 1; j < pts.size(); ++j)
                if (chordal_c(pts[i], pts[j]) > widest) {
                    widest = chordal_c(pts[i], pts[j]);
                    si = i;
                    sj = j;
                }
        std::vector<Cplx> a, b;
        for (size_t k = 0; k < pts.size(); ++k) {
            if (chordal_c(pts[k], pts[si]) <= chordal_c(pts[k], pts[sj]))
                a.push_back(pts[k]);
            else
                b.push_back(pts[k]);
        }
        if (a.empty() || b.empty()) {  // degenerate split: emit as simple roots
            for (auto& p : pts) out.push_back({newton_polish(ders[0], ders[1], p), 1});
            return;
        }
        process(a);
        process(b);
    };
    for (auto& g : groups) process(g);
    return out;
}

}  // namespace detail

// All projective roots with multiplicity; multiplicities sum to deg p.
inline RootList<Cplx> roots(const HomPoly<Cplx>& p, const Tol& tol = default_tol()) {
    if (p.is_zero()) throw domain_error("roots: zero polynomial");
    int d = p.degree();
    int minf = p.mult_at_infinity(tol.trim);
    int mzero = p.mult_at_zero(tol.trim);
    if (minf + mzero > d) mzero = d - minf;  // constant-ish residue

    RootList<Cplx> out;
    if (minf > 0) out.push_back({ProjPoint<Cplx>::infinity(), minf});
    if (mzero > 0) out.push_back({ProjPoint<Cplx>::finite({0, 0}), mzero});

    int e = d - minf - mzero;
    if (e > 0) {
        std::vector<Cplx> u(p.coeffs().begin() + minf, p.coeffs().end() - mzero);
        double scale = 0;
        for (auto& c : u) scale = std::max(scale, std::abs(c));
        for (auto& c : u) c /= scale;
        for (auto& [r, m] : detail::cluster_roots(u, tol))
            out.push_back({ProjPoint<Cplx>::finite(r), m});
    }
    return merge_roots(out, tol.root);
}

namespace detail {

// Exact synthetic division of u (highest first) by (x - r); returns the
// multiplicity of r and deflates u in place.
inline int deflate_all(std::vector<GaussianRational>& u, const GaussianRational& r) {
    int mult = 0;
    while (u.size() > 1) {
        std::vector<GaussianRational> q(u.size() - 1);
        GaussianRational acc = u[0];
        q[0] = acc;
        for (size_t i = 1; i + 1 < u.size(); ++i) {
            acc = acc * r + u[i];
            q[i] = acc;
        }
        GaussianRational rem = acc * r + u.back();
        if (!rem.is_zero()) break;
        u = std::move(q);
        ++mult;
    }
    return mult;
}

}  // namespace detail

// Exact roots over Q(i): Gaussian-rational roots are recovered from floating
// approximations and verified exactly; an irreducible quadratic tail is
// handled by the exact quadratic formula when its discriminant has a square
// root in Q(i). Anything beyond that is not representable in this backend.
inline RootList<GaussianRational> roots(const HomPoly<GaussianRational>& p,
                                        const Tol& tol = default_tol()) {
    if (p.is_zero()) throw domain_error("roots: zero polynomial");
    using GR = GaussianRational;
    int d = p.degree();
    int minf = p.mult_at_infinity();
    int mzero = p.mult_at_zero();
    if (minf + mzero > d) mzero = d - minf;

    RootList<GR> out;
    if (minf > 0) out.push_back({ProjPoint<GR>::infinity(), minf});
    if (mzero > 0) out.push_back({ProjPoint<GR>::finite(GR(0)), mzero});

    std::vector<GR> u(p.coeffs().begin() + minf, p.coeffs().end() - mzero);
    while (u.size() > 1) {
        if (u.size() == 2) {
            out.push_back({ProjPoint<GR>::finite(-u[1] / u[0]), 1});
            break;
        }
        if (u.size() == 3) {
            GR disc = u[1] * u[1] - GR(4) * u[0] * u[2];
            auto s = gaussian_sqrt(disc);
            if (!s) throw numeric_error("roots: exact backend cannot represent irrational roots; use the float backend");
            GR two_a = GR(2) * u[0];
            GR r1 = (-u[1] + *s) / two_a, r2 = (-u[1] - *s) / two_a;
            if (r1 == r2) {
                out.push_back({ProjPoint<GR>::finite(r1), 2});
            } else {
                out.push_back({ProjPoint<GR>::finite(r1), 1});
                out.push_back({ProjPoint<GR>::finite(r2), 1});
            }
            break;
        }
        // double-precision candidates (multiplicity-polished), rationalized
        // and verified exactly
        std::vector<Cplx> uf(u.size());
        double scale = 0;
        for (auto& c : u) scale = std::max(scale, scalar_traits<GR>::abs_approx(c));
        for (size_t i = 0; i < u.size(); ++i) uf[i] = u[i].to_complex() / scale;
        bool progress = false;
        for (auto& [c, mult_hint] : detail::cluster_roots(uf, tol)) {
            (void)mult_hint;
            for (std::uint64_t den : {1000000ull, 1000000000ull, 1000000000000000ull}) {
                auto g = rationalize_complex(c, den);
                if (!g) continue;
                std::vector<GR> save = u;
                int m = detail::deflate_all(u, *g);
                if (m > 0) {
                    out.push_back({ProjPoint<GR>::finite(*g), m});
                    progress = true;
                    break;
                }
                u = std::move(save);
            }
            if (progress) break;
        }
        if (!progress)
            throw numeric_error("roots: exact backend cannot represent irrational roots; use the float backend");
    }
    (void)tol;
    return merge_roots(out, tol.root);
}

}  // namespace bd
