#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include "bd/exact.hpp"

namespace bd {

using Cplx = std::complex<double>;

// The two coefficient backends. Generic code is written against this trait;
// arithmetic never silently mixes backends (they are distinct C++ types).
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<GaussianRational> {
    static constexpr bool exact = true;
    static const char* name() { return "exact"; }
    static GaussianRational zero() { return {}; }
    static GaussianRational one() { return GaussianRational(1); }
    static GaussianRational from_int(long n) { return GaussianRational(n); }
    static bool is_zero(const GaussianRational& s) { return s.is_zero(); }
    static double abs_approx(const GaussianRational& s) { return std::abs(s.to_complex()); }
    static Cplx to_complex(const GaussianRational& s) { return s.to_complex(); }
    static GaussianRational conj(const GaussianRational& s) { return s.conj(); }
};

template <>
struct scalar_traits<Cplx> {
    static constexpr bool exact = false;
    static const char* name() { return "float"; }
    static Cplx zero() { return {0.0, 0.0}; }
    static Cplx one() { return {1.0, 0.0}; }
    static Cplx from_int(long n) { return {static_cast<double>(n), 0.0}; }
    static bool is_zero(const Cplx& s) { return s.real() == 0.0 && s.imag() == 0.0; }
    static double abs_approx(const Cplx& s) { return std::abs(s); }
    static Cplx to_complex(const Cplx& s) { return s; }
    static Cplx conj(const Cplx& s) { return std::conj(s); }
};

// "Zero for the purposes of this backend": exact zero, or below a relative
// floating threshold.
template <class S>
bool negligible(const S& s, double scale, double rel_tol) {
    if constexpr (scalar_traits<S>::exact)
        return scalar_traits<S>::is_zero(s);
    else
        return scalar_traits<S>::abs_approx(s) <= rel_tol * (scale > 0 ? scale : 1.0);
}

}  // namespace bd
