#pragma once

#include <cmath>
#include <ostream>

#include "bd/hom_poly.hpp"
#include "bd/scalar.hpp"

namespace bd {

// Point of P^1, canonicalized to (z:1) or (1:0). (1:0) is infinity.
template <class S>
class ProjPoint {
  public:
    using traits = scalar_traits<S>;

    ProjPoint() : z_(traits::zero()), w_(traits::one()) {}

    static ProjPoint finite(S value) { return ProjPoint(std::move(value), traits::one()); }
    static ProjPoint infinity() { return ProjPoint(traits::one(), traits::zero()); }

    // Canonicalize a homogeneous representative. For the floating backend a
    // tiny w relative to z is snapped to infinity.
    static ProjPoint from_pair(const S& z, const S& w, double rel = 1e-12) {
        if constexpr (traits::exact) {
            if (traits::is_zero(w)) {
                if (traits::is_zero(z)) throw domain_error("ProjPoint: (0:0)");
                return infinity();
            }
            return finite(z / w);
        } else {
            double az = traits::abs_approx(z), aw = traits::abs_approx(w);
            if (az == 0 && aw == 0) throw domain_error("ProjPoint: (0:0)");
            if (aw <= rel * az) return infinity();
            return finite(z / w);
        }
    }

    const S& z() const { return z_; }
    const S& w() const { return w_; }
    bool is_infinity() const { return traits::is_zero(w_); }
    const S& value() const {
        if (is_infinity()) throw domain_error("ProjPoint: infinite point has no affine value");
        return z_;
    }

    Cplx to_complex() const {
        // Infinity maps to a genuine complex infinity.
        if (is_infinity()) return {std::numeric_limits<double>::infinity(), 0.0};
        return traits::to_complex(z_);
    }

    friend bool operator==(const ProjPoint& a, const ProjPoint& b) {
        return traits::is_zero(a.z_ * b.w_ - b.z_ * a.w_) && !(a.is_infinity() != b.is_infinity());
    }

    friend std::ostream& operator<<(std::ostream& os, const ProjPoint& p) {
        if (p.is_infinity()) return os << "inf";
        return os << p.z_;
    }

  private:
    ProjPoint(S z, S w) : z_(std::move(z)), w_(std::move(w)) {}
    S z_, w_;
};

// Chordal (Fubini-Study) distance on P^1, in [0,1]; handles infinity
// uniformly. This is the metric used for clustering and point identity.
template <class S>
double chordal(const ProjPoint<S>& a, const ProjPoint<S>& b) {
    using T = scalar_traits<S>;
    Cplx az = T::to_complex(a.z()), aw = T::to_complex(a.w());
    Cplx bz = T::to_complex(b.z()), bw = T::to_complex(b.w());
    double na = std::sqrt(std::norm(az) + std::norm(aw));
    double nb = std::sqrt(std::norm(bz) + std::norm(bw));
    return std::abs(az * bw - bz * aw) / (na * nb);
}

inline double chordal_c(const Cplx& a, const Cplx& b) {
    return std::abs(a - b) / (std::sqrt(1.0 + std::norm(a)) * std::sqrt(1.0 + std::norm(b)));
}

// Backend-aware point identity: exact equality, or chordal proximity.
template <class S>
bool same_point(const ProjPoint<S>& a, const ProjPoint<S>& b, double tol) {
    if constexpr (scalar_traits<S>::exact)
        return a == b;
    else
        return chordal(a, b) <= tol;
}

template <class S>
S eval_at(const HomPoly<S>& p, const ProjPoint<S>& pt) {
    if (pt.is_infinity()) return p.eval(scalar_traits<S>::one(), scalar_traits<S>::zero());
    return p.eval(pt.z(), pt.w());
}

}  // namespace bd
