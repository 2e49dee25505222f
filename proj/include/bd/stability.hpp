#pragma once

#include <optional>

#include "bd/measure.hpp"
#include "bd/ratbar.hpp"

namespace bd {

enum class StabilityClass { Stable, SemistableOnly, Unstable };

inline const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::Stable: return "Stable";
        case StabilityClass::SemistableOnly: return "SemistableOnly";
        default: return "Unstable";
    }
}

template <class S>
struct Classification {
    StabilityClass cls;
    // hole that failed (or sat at) the decisive threshold, when one exists
    std::optional<Root<S>> witness;
};

namespace detail {

// Depth-threshold test: every hole depth <= bound, and a hole at exactly the
// bound must not be fixed by phi.
template <class S>
bool depth_criterion(const RatbarPoint<S>& f, int bound, std::optional<Root<S>>& witness,
                     const Tol& tol) {
    for (const auto& h : f.holes()) {
        if (h.mult > bound) {
            witness = h;
            return false;
        }
        if (h.mult == bound) {
            ProjPoint<S> img = f.phi_constant() ? f.phi_value() : f.phi_apply(h.point);
            if (same_point(img, h.point, tol.root)) {
                witness = h;
                return false;
            }
        }
    }
    return true;
}

}  // namespace detail

// GIT stability from the hole-depth criteria. Even degree: stable and
// semistable coincide (threshold d/2). Odd degree: stable threshold
// (d-1)/2, semistable threshold (d+1)/2.
template <class S>
Classification<S> classify(const RatbarPoint<S>& f, const Tol& tol = default_tol()) {
    int d = f.degree();
    std::optional<Root<S>> witness;
    if (d % 2 == 0) {
        bool ok = detail::depth_criterion(f, d / 2, witness, tol);
        return {ok ? StabilityClass::Stable : StabilityClass::Unstable, witness};
    }
    if (detail::depth_criterion(f, (d - 1) / 2, witness, tol))
        return {StabilityClass::Stable, witness};
    witness.reset();
    if (detail::depth_criterion(f, (d + 1) / 2, witness, tol))
        return {StabilityClass::SemistableOnly, witness};
    return {StabilityClass::Unstable, witness};
}

template <class S>
bool is_stable(const RatbarPoint<S>& f, const Tol& tol = default_tol()) {
    return classify(f, tol).cls == StabilityClass::Stable;
}

// Verdict of the all-iterates stability criteria, driven by the maximal
// atom mass of mu_f. The maximum is attained at a hole (stepping backward
// from y to z multiplies mass by local_mult/d < 1 and adds nothing unless z
// is itself a hole), so only hole masses are examined.
template <class S>
struct IterateStabilityReport {
    bool semistable_all_n = true;       // max mass <= 1/2 (both parities)
    bool stable_all_n_sufficient = true;  // max mass < 1/2 (odd d, one direction)
    // decided verdict: even d always decided; odd d undecided when max == 1/2
    std::optional<bool> stable_all_n;
    bool indeterminate_by_criterion = false;
    ProjPoint<S> extremal_atom;
    MassBound max_mass;
};

template <class S>
IterateStabilityReport<S> all_iterates_stable(const RatbarPoint<S>& f,
                                              const Tol& tol = default_tol()) {
    if (in_indeterminacy(f, tol)) throw domain_error("all_iterates_stable: point in I(d)");
    IterateStabilityReport<S> rep;
    if (!f.has_holes()) {
        // genuine rational map: mu_f has no atoms, every iterate is stable
        rep.stable_all_n = true;
        return rep;
    }
    MassBound best;
    ProjPoint<S> where;
    for (const auto& h : f.holes()) {
        MassBound m = mass_at(f, h.point, 256, tol);
        if (m.value > best.value) {
            best = m;
            where = h.point;
        }
    }
    rep.extremal_atom = where;
    rep.max_mass = best;
    Rational half(1, 2);
    bool le_half = best.value + best.error <= half;
    bool lt_half = best.value + best.error < half;
    bool gt_half = best.value > half;
    rep.semistable_all_n = le_half;
    rep.stable_all_n_sufficient = lt_half;
    if (f.degree() % 2 == 0) {
        if (le_half)
            rep.stable_all_n = true;
        else if (gt_half)
            rep.stable_all_n = false;
        else
            rep.indeterminate_by_criterion = true;  // bound straddles 1/2
    } else {
        if (lt_half)
            rep.stable_all_n = true;
        else if (gt_half)
            rep.stable_all_n = false;
        else
            rep.indeterminate_by_criterion = true;  // mass exactly 1/2: undecided
    }
    return rep;
}

// Smallest n <= n_max with f^n not stable, scanning materialized iterates.
template <class S>
std::optional<int> first_unstable_iterate(const RatbarPoint<S>& f, int n_max,
                                          const Tol& tol = default_tol()) {
    for (int n = 1; n <= n_max; ++n)
        if (!is_stable(iterate(f, n, tol), tol)) return n;
    return std::nullopt;
}

// Stability of f^n certifies continuity of the n-th iterate map at [f]; when
// it holds, f itself must be stable, which is asserted.
template <class S>
bool continuity_certificate(const RatbarPoint<S>& f, int n, const Tol& tol = default_tol()) {
    RatbarPoint<S> fn = iterate(f, n, tol);
    bool ok = is_stable(fn, tol);
    if (ok && !is_stable(f, tol))
        throw numeric_error("continuity_certificate: iterate stable but base not stable");
    return ok;
}

}  // namespace bd
