#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace bd {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Exact complex number with rational real and imaginary parts, i.e. an
// element of Q(i). All arithmetic is exact.
struct GaussianRational {
    Rational re{0};
    Rational im{0};

    GaussianRational() = default;
    GaussianRational(Rational r) : re(std::move(r)) {}
    GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    GaussianRational(long r) : re(r) {}
    GaussianRational(long n, long d) : re(Rational(n, d)) {}

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
        Rational n = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }
    GaussianRational& operator+=(const GaussianRational& o) { return *this = *this + o; }
    GaussianRational& operator-=(const GaussianRational& o) { return *this = *this - o; }
    GaussianRational& operator*=(const GaussianRational& o) { return *this = *this * o; }
    GaussianRational& operator/=(const GaussianRational& o) { return *this = *this / o; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

    GaussianRational conj() const { return {re, -im}; }
    Rational norm2() const { return re * re + im * im; }

    std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }

    friend std::ostream& operator<<(std::ostream& os, const GaussianRational& g) {
        os << g.re;
        if (g.im != 0) os << (g.im > 0 ? "+" : "") << g.im << "i";
        return os;
    }
};

inline GaussianRational operator*(long a, const GaussianRational& b) {
    return GaussianRational(a) * b;
}

// sqrt of a non-negative rational, if it is a perfect square in Q.
inline std::optional<Rational> rational_sqrt(const Rational& r) {
    if (r < 0) return std::nullopt;
    Int n = boost::multiprecision::numerator(r);
    Int d = boost::multiprecision::denominator(r);
    Int sn = boost::multiprecision::sqrt(n);
    Int sd = boost::multiprecision::sqrt(d);
    if (sn * sn != n || sd * sd != d) return std::nullopt;
    return Rational(sn, sd);
}

// sqrt within Q(i), if one exists.
inline std::optional<GaussianRational> gaussian_sqrt(const GaussianRational& g) {
    if (g.im == 0) {
        if (g.re >= 0) {
            auto s = rational_sqrt(g.re);
            if (!s) return std::nullopt;
            return GaussianRational(*s);
        }
        auto s = rational_sqrt(-g.re);
        if (!s) return std::nullopt;
        return GaussianRational(Rational(0), *s);
    }
    // (x+yi)^2 = a+bi  =>  x^2 = (a + |g|)/2, y = b/(2x)
    auto n = rational_sqrt(g.norm2());
    if (!n) return std::nullopt;
    auto x2 = (g.re + *n) / 2;
    auto x = rational_sqrt(x2);
    if (!x || *x == 0) return std::nullopt;
    return GaussianRational(*x, g.im / (2 * *x));
}

// Nearest rational with bounded denominator (continued fractions). Used to
// recover exact roots from floating approximations; results are always
// verified exactly by the caller.
inline std::optional<Rational> rationalize(double x, std::uint64_t max_den = 1000000000ull) {
    if (!std::isfinite(x)) return std::nullopt;
    bool neg = x < 0;
    double v = neg ? -x : x;
    std::uint64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = v;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(frac);
        if (fl > 9e17) return std::nullopt;
        std::uint64_t a = static_cast<std::uint64_t>(fl);
        std::uint64_t p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        double rem = frac - fl;
        if (rem < 1e-15) break;
        frac = 1.0 / rem;
    }
    if (q1 == 0) return std::nullopt;
    Rational r{Int(p1), Int(q1)};
    return neg ? Rational(-r) : r;
}

inline std::optional<GaussianRational> rationalize_complex(std::complex<double> z,
                                                           std::uint64_t max_den = 1000000000ull) {
    auto re = rationalize(z.real(), max_den);
    auto im = rationalize(z.imag(), max_den);
    if (!re || !im) return std::nullopt;
    return GaussianRational(*re, *im);
}

}  // namespace bd
