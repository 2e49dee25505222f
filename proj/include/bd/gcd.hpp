#pragma once

#include <algorithm>
#include <vector>

#include "bd/hom_poly.hpp"
#include "bd/roots.hpp"

namespace bd {

namespace detail {

// Monic Euclidean remainder sequence over Q(i), highest-degree-first vectors.
inline std::vector<GaussianRational> poly_mod(std::vector<GaussianRational> a,
                                              const std::vector<GaussianRational>& b) {
    while (a.size() >= b.size()) {
        GaussianRational f = a[0] / b[0];
        for (size_t j = 0; j < b.size(); ++j) a[j] -= f * b[j];
        size_t k = 0;
        while (k < a.size() && a[k].is_zero() && a.size() - k > 1) ++k;
        // strip leading zeros (at least one coefficient got cancelled)
        a.erase(a.begin(), a.begin() + std::max<size_t>(1, k));
        if (a.size() == 1 && a[0].is_zero()) break;
    }
    return a;
}

inline std::vector<GaussianRational> euclid_gcd(std::vector<GaussianRational> a,
                                                std::vector<GaussianRational> b) {
    auto is_zero_poly = [](const std::vector<GaussianRational>& v) {
        for (auto& c : v)
            if (!c.is_zero()) return false;
        return true;
    };
    if (is_zero_poly(a)) return b;
    if (is_zero_poly(b)) return a;
    if (a.size() < b.size()) std::swap(a, b);
    while (!is_zero_poly(b)) {
        auto r = poly_mod(a, b);
        a = std::move(b);
        b = std::move(r);
        if (is_zero_poly(b)) break;
        // normalize monic to keep coefficient growth in check
        GaussianRational lead = b[0];
        for (auto& c : b) c /= lead;
    }
    GaussianRational lead = a[0];
    for (auto& c : a) c /= lead;
    return a;
}

}  // namespace detail

// gcd of two homogeneous polynomials, normalized (first nonzero coeff 1).
// Exact backend: Euclid on the dehomogenizations plus the shared monomial
// part. Floating backend: match root clusters of p and q within tol.root and
// take the minimum multiplicity on each matched cluster.
template <class S>
HomPoly<S> gcd(const HomPoly<S>& p, const HomPoly<S>& q, const Tol& tol = default_tol()) {
    using T = scalar_traits<S>;
    if (p.is_zero() && q.is_zero()) throw domain_error("gcd: both polynomials zero");
    if (p.is_zero()) return q.normalized(tol);
    if (q.is_zero()) return p.normalized(tol);

    if constexpr (T::exact) {
        int winf = std::min(p.mult_at_infinity(), q.mult_at_infinity());
        int wzero = std::min(p.mult_at_zero(), q.mult_at_zero());
        auto up = p.dehomogenized(p.mult_at_infinity());
        auto uq = q.dehomogenized(q.mult_at_infinity());
        up.resize(up.size() - p.mult_at_zero());
        uq.resize(uq.size() - q.mult_at_zero());
        auto g = detail::euclid_gcd(up, uq);
        // homogenize g and restore the shared monomial z^wzero w^winf
        HomPoly<S> r(static_cast<int>(g.size()) - 1 + winf + wzero);
        for (size_t i = 0; i < g.size(); ++i) r.coeff(static_cast<int>(i) + winf) = g[i];
        return r.normalized(tol);
    } else {
        RootList<S> rp = roots(p, tol);
        RootList<S> rq = roots(q, tol);
        RootList<S> common;
        for (const auto& a : rp)
            for (const auto& b : rq)
                if (same_point(a.point, b.point, tol.root)) {
                    common.push_back({a.point, std::min(a.mult, b.mult)});
                    break;
                }
        return from_roots(T::one(), common).normalized(tol);
    }
}

}  // namespace bd
