#pragma once

#include <array>
#include <cmath>

#include "bd/proj_point.hpp"

namespace bd {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    friend Vec3 operator+(Vec3 a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
    friend Vec3 operator-(Vec3 v) { return {-v.x, -v.y, -v.z}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0 ? (1.0 / n) * *this : Vec3{0, 0, 1};
    }
};

// Stereographic identification of the Riemann sphere with S^2 in R^3.
// Convention fixed here: 0 <-> south pole (0,0,-1), infinity <-> north pole.
inline Vec3 stereo(const Cplx& v) {
    if (std::isinf(v.real()) || std::isinf(v.imag())) return {0, 0, 1};
    double n = std::norm(v);
    if (n > 1e300) return {0, 0, 1};
    double s = 1.0 / (n + 1.0);
    return {2.0 * v.real() * s, 2.0 * v.imag() * s, (n - 1.0) * s};
}

template <class S>
Vec3 stereo(const ProjPoint<S>& p) {
    if (p.is_infinity()) return {0, 0, 1};
    return stereo(scalar_traits<S>::to_complex(p.z()));
}

inline ProjPoint<Cplx> stereo_inv(const Vec3& v) {
    if (1.0 - v.z <= 1e-14) return ProjPoint<Cplx>::infinity();
    double s = 1.0 / (1.0 - v.z);
    return ProjPoint<Cplx>::finite({v.x * s, v.y * s});
}

}  // namespace bd
