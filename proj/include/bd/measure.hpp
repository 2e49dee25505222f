#pragma once

#include <algorithm>
#include <deque>
#include <vector>

#include "bd/ratbar.hpp"
#include "bd/sphere.hpp"

namespace bd {

// An exact mass with a rigorous truncation bound: the true value lies in
// [value, value + error].
struct MassBound {
    Rational value{0};
    Rational error{0};
};

// mu_f({z}) = (1/d) sum_n m_z(phi^n) d_{phi^n(z)}(f) / d^n, evaluated by
// walking the forward orbit of z. An orbit that revisits a point (or lands
// exactly on a fixed point) closes into a geometric series and the mass is
// exact; otherwise the partial sum carries the geometric tail bound.
template <class S>
MassBound mass_at(const RatbarPoint<S>& f, const ProjPoint<S>& z, int n_max = 128,
                  const Tol& tol = default_tol()) {
    if (in_indeterminacy(f, tol)) throw domain_error("mass_at: point in I(d)");
    if (!f.has_holes()) return {};
    long d = f.degree();
    if (f.phi_constant()) return {Rational(f.depth_at(z, tol.root), d), 0};

    long e = f.phi_degree();
    std::vector<ProjPoint<S>> orbit;
    std::vector<Int> cum_mult;   // M_n = prod_{k<n} local mult
    std::vector<long> loc;       // local mult at orbit[n]
    std::vector<int> depth;      // hole depth at orbit[n]
    ProjPoint<S> y = z;
    Int M = 1;

    Rational partial = 0;
    int max_depth = 0;
    for (const auto& h : f.holes()) max_depth = std::max(max_depth, h.mult);

    for (int n = 0; n <= n_max; ++n) {
        // close the orbit if y matches an earlier point
        for (size_t s = 0; s < orbit.size(); ++s) {
            if (!same_point(orbit[s], y, tol.root)) continue;
            int nn = static_cast<int>(orbit.size());
            int p = nn - static_cast<int>(s);
            Rational head = 0, cyc = 0;
            Rational dn = 1;
            for (int j = 0; j < nn; ++j) {
                Rational term = Rational(cum_mult[j] * depth[j]) / dn;
                if (j < static_cast<int>(s))
                    head += term;
                else
                    cyc += term;
                dn *= d;
            }
            Rational rho = Rational(cum_mult[nn - 1] * loc[nn - 1], cum_mult[s]);
            Rational ratio = rho / Rational(ipow(d, p));
            Rational total = head + cyc / (1 - ratio);
            return {total / d, 0};
        }
        orbit.push_back(y);
        cum_mult.push_back(M);
        loc.push_back(local_mult(f, y, tol));
        depth.push_back(f.depth_at(y, tol.root));
        partial += Rational(M * depth.back()) / Rational(ipow(d, n));
        M *= loc.back();
        y = f.phi_apply(y);
    }
    // truncated: tail <= max_depth * sum_{n>N} (e/d)^n
    Rational q(e, d);
    Rational tail = Rational(max_depth) * Rational(ipow(e, n_max + 1), ipow(d, n_max + 1)) /
                    (1 - q);
    return {partial / d, tail / d};
}

// mu_f({z}) = lim d_z(f^n)/d^n, evaluated at n = n_max.
template <class S>
Rational mass_via_depths(const RatbarPoint<S>& f, const ProjPoint<S>& z, int n_max,
                         const Tol& tol = default_tol()) {
    return Rational(depth_of_iterate(f, z, n_max, tol), ipow(f.degree(), n_max));
}

template <class S>
struct Atom {
    ProjPoint<S> point;
    Rational mass;
};

// Purely atomic probability measure: atom list plus a bound on the mass of
// atoms not enumerated.
template <class S>
struct AtomicMeasure {
    std::vector<Atom<S>> atoms;
    Rational tail_bound{0};

    Rational total() const {
        Rational s = 0;
        for (const auto& a : atoms) s += a.mass;
        return s;
    }
    Rational mass_of(const ProjPoint<S>& p, double tol = default_tol().root) const {
        for (const auto& a : atoms)
            if (same_point(a.point, p, tol)) return a.mass;
        return 0;
    }
    Rational max_atom() const {
        Rational m = 0;
        for (const auto& a : atoms) m = std::max(m, a.mass);
        return m;
    }
    void sort_by_mass() {
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom<S>& a, const Atom<S>& b) { return a.mass > b.mass; });
    }
};

// The atomic measure of a boundary point: candidate atoms are found by
// enumerating preimages of the holes through depth_n levels of phi, and each
// atom then gets its exact mass from the forward-orbit formula. For
// constant phi the measure is the exact hole average.
template <class S>
AtomicMeasure<S> boundary_measure(const RatbarPoint<S>& f, int depth_n = 40,
                                  const Tol& tol = default_tol(), size_t max_atoms = 20000) {
    if (!f.has_holes()) throw domain_error("boundary_measure: f has no holes (f in Rat_d)");
    if (in_indeterminacy(f, tol)) throw domain_error("boundary_measure: point in I(d)");
    long d = f.degree();

    AtomicMeasure<S> mu;
    if (f.phi_constant()) {
        for (const auto& h : f.holes()) mu.atoms.push_back({h.point, Rational(h.mult, d)});
        mu.tail_bound = 0;
        return mu;
    }

    std::vector<ProjPoint<S>> seen;
    auto add = [&](const ProjPoint<S>& p) {
        for (const auto& q : seen)
            if (same_point(q, p, tol.root)) return false;
        seen.push_back(p);
        return true;
    };
    std::vector<ProjPoint<S>> level;
    for (const auto& h : f.holes())
        if (add(h.point)) level.push_back(h.point);

    bool complete = false;
    for (int n = 1; n <= depth_n && !level.empty() && seen.size() < max_atoms; ++n) {
        std::vector<ProjPoint<S>> next;
        for (const auto& y : level) {
            HomPoly<S> pre = f.phi_z() * y.w() - f.phi_w() * y.z();
            for (const auto& r : roots(pre, tol))
                if (add(r.point)) next.push_back(r.point);
        }
        level = std::move(next);
        if (level.empty()) complete = true;  // backward orbit closed up
    }

    (void)complete;
    for (const auto& p : seen) {
        MassBound mb = mass_at(f, p, 128, tol);
        if (mb.value > 0) mu.atoms.push_back({p, mb.value});
    }
    // Atom values are exact or underestimates, so 1 - sum bounds everything
    // not accounted for (unenumerated atoms plus truncation slack).
    Rational covered = mu.total();
    mu.tail_bound = covered < 1 ? 1 - covered : Rational(0);
    mu.sort_by_mass();
    return mu;
}

// ---- weak-distance discrepancy ----------------------------------------

struct WeightedPoint {
    Vec3 v;
    double mass;
};

// Discrepancy between mu and a reference atomic prediction nu: both measures
// are evaluated on the caps around nu's atoms; the result is the largest
// cap mismatch combined with the mismatch of the mass left outside all caps.
// Caps are chordal balls on the unit sphere. Identical measures give 0.
inline double weak_distance_core(const std::vector<WeightedPoint>& mu, double /*mu_tail*/,
                                 const std::vector<WeightedPoint>& nu, double /*nu_tail*/,
                                 double r_cap = default_tol().cap) {
    auto cap_mass = [&](const std::vector<WeightedPoint>& m, const Vec3& c) {
        double s = 0;
        for (const auto& p : m)
            if ((p.v - c).norm() <= r_cap) s += p.mass;
        return s;
    };
    double worst = 0;
    double cov_mu = 0, cov_nu = 0;
    for (const auto& atom : nu) {
        double a = cap_mass(mu, atom.v);
        double b = cap_mass(nu, atom.v);
        worst = std::max(worst, std::abs(a - b));
        cov_mu += a;
        cov_nu += b;
    }
    double leftover_mu = std::max(0.0, 1.0 - cov_mu);
    double leftover_nu = std::max(0.0, 1.0 - cov_nu);
    return std::max(worst, std::abs(leftover_mu - leftover_nu));
}

template <class S>
std::vector<WeightedPoint> to_weighted(const AtomicMeasure<S>& m) {
    std::vector<WeightedPoint> out;
    out.reserve(m.atoms.size());
    for (const auto& a : m.atoms) out.push_back({stereo(a.point), to_double(a.mass)});
    return out;
}

template <class S, class S2>
double weak_distance(const AtomicMeasure<S>& mu, const AtomicMeasure<S2>& nu,
                     double r_cap = default_tol().cap) {
    return weak_distance_core(to_weighted(mu), to_double(mu.tail_bound), to_weighted(nu),
                              to_double(nu.tail_bound), r_cap);
}

template <class S>
double weak_distance(const std::vector<Cplx>& samples, const AtomicMeasure<S>& nu,
                     double r_cap = default_tol().cap) {
    std::vector<WeightedPoint> mu;
    mu.reserve(samples.size());
    double w = samples.empty() ? 0.0 : 1.0 / double(samples.size());
    for (const auto& s : samples) mu.push_back({stereo(s), w});
    return weak_distance_core(mu, 0.0, to_weighted(nu), to_double(nu.tail_bound), r_cap);
}

}  // namespace bd
