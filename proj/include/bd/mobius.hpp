#pragma once

#include <array>

#include "bd/proj_point.hpp"

namespace bd {

// Mobius transformation (a b; c d), acting on P^1 by (az+bw : cz+dw).
template <class S>
struct Mobius {
    using T = scalar_traits<S>;
    S a, b, c, d;

    Mobius() : a(T::one()), b(T::zero()), c(T::zero()), d(T::one()) {}
    Mobius(S a_, S b_, S c_, S d_) : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {}

    static Mobius identity() { return {}; }
    static Mobius scaling(const S& k) { return {k, T::zero(), T::zero(), T::one()}; }
    static Mobius translation(const S& t) { return {T::one(), t, T::zero(), T::one()}; }

    S det() const { return a * d - b * c; }
    bool singular(double tol = 1e-12) const {
        if constexpr (T::exact)
            return T::is_zero(det());
        else {
            double scale = std::max({T::abs_approx(a) * T::abs_approx(d),
                                     T::abs_approx(b) * T::abs_approx(c), 1e-300});
            return T::abs_approx(det()) <= tol * scale;
        }
    }

    Mobius inverse() const { return {d, -b, -c, a}; }

    friend Mobius operator*(const Mobius& A, const Mobius& B) {
        return {A.a * B.a + A.b * B.c, A.a * B.b + A.b * B.d,
                A.c * B.a + A.d * B.c, A.c * B.b + A.d * B.d};
    }

    ProjPoint<S> operator()(const ProjPoint<S>& p) const {
        return ProjPoint<S>::from_pair(a * p.z() + b * p.w(), c * p.z() + d * p.w());
    }

    Cplx apply_c(const Cplx& z) const {
        Cplx na = T::to_complex(a), nb = T::to_complex(b), nc = T::to_complex(c), nd = T::to_complex(d);
        return (na * z + nb) / (nc * z + nd);
    }

    // Component pair as degree-1 homogeneous polynomials.
    HomPoly<S> z_poly() const { return HomPoly<S>(std::vector<S>{a, b}); }
    HomPoly<S> w_poly() const { return HomPoly<S>(std::vector<S>{c, d}); }
};

using MobiusC = Mobius<Cplx>;
using MobiusX = Mobius<GaussianRational>;

// The unique Mobius map sending (p1,p2,p3) to (q1,q2,q3).
// Built from the standard maps onto (0, 1, infinity).
template <class S>
Mobius<S> mobius_three_points(const std::array<ProjPoint<S>, 3>& from,
                              const std::array<ProjPoint<S>, 3>& to) {
    auto to01inf = [](const std::array<ProjPoint<S>, 3>& p) -> Mobius<S> {
        // rows of the matrix for z -> ((z-p0)(p1-p2)) / ((z-p2)(p1-p0)), projectively
        const S z0 = p[0].z(), w0 = p[0].w();
        const S z1 = p[1].z(), w1 = p[1].w();
        const S z2 = p[2].z(), w2 = p[2].w();
        S A = (z1 * w2 - z2 * w1);
        S B = (z1 * w0 - z0 * w1);
        return {w0 * A, -z0 * A, w2 * B, -z2 * B};
    };
    Mobius<S> F = to01inf(from);
    Mobius<S> G = to01inf(to);
    if (F.singular() || G.singular())
        throw domain_error("mobius_three_points: points not distinct");
    return G.inverse() * F;
}

}  // namespace bd
