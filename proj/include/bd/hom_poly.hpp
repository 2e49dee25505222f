#pragma once

#include <algorithm>
#include <cassert>
#include <ostream>
#include <vector>

#include "bd/config.hpp"
#include "bd/scalar.hpp"

namespace bd {

// Homogeneous polynomial in (z, w). coeff(i) multiplies z^(degree-i) w^i, so
// coeff(0) is the z^d term and coeff(d) the w^d term. The zero polynomial of
// a given degree is the all-zero coefficient vector; degree is part of the
// value and is preserved by the zero polynomial.
template <class S>
class HomPoly {
  public:
    using scalar = S;
    using traits = scalar_traits<S>;

    HomPoly() : c_(1, traits::zero()) {}
    explicit HomPoly(int degree) : c_(static_cast<size_t>(degree) + 1, traits::zero()) {
        if (degree < 0) throw input_error("HomPoly: negative degree");
    }
    explicit HomPoly(std::vector<S> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) throw input_error("HomPoly: empty coefficient list");
    }

    static HomPoly constant(S value) { return HomPoly(std::vector<S>{std::move(value)}); }
    static HomPoly zero(int degree) { return HomPoly(degree); }
    // The coordinate functions z and w.
    static HomPoly var_z() { return HomPoly(std::vector<S>{traits::one(), traits::zero()}); }
    static HomPoly var_w() { return HomPoly(std::vector<S>{traits::zero(), traits::one()}); }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const S& coeff(int i) const { return c_[static_cast<size_t>(i)]; }
    S& coeff(int i) { return c_[static_cast<size_t>(i)]; }
    const std::vector<S>& coeffs() const { return c_; }

    bool is_zero() const {
        for (const auto& c : c_)
            if (!traits::is_zero(c)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0;
        for (const auto& c : c_) m = std::max(m, traits::abs_approx(c));
        return m;
    }

    // Multiplicity of the root at infinity (1:0): leading coefficients that
    // vanish. For floating input, "vanish" is relative to the largest
    // coefficient.
    int mult_at_infinity(double trim = default_tol().trim) const {
        double scale = max_abs();
        int k = 0;
        while (k < static_cast<int>(c_.size()) && negligible(c_[k], scale, trim)) ++k;
        return k;
    }
    // Multiplicity of the root at 0 (0:1): trailing coefficients that vanish.
    int mult_at_zero(double trim = default_tol().trim) const {
        double scale = max_abs();
        int k = 0;
        while (k < static_cast<int>(c_.size()) &&
               negligible(c_[static_cast<int>(c_.size()) - 1 - k], scale, trim))
            ++k;
        return k;
    }

    // p(z, w) by Horner in z with running powers of w.
    S eval(const S& z, const S& w) const {
        S r = c_[0];
        S wp = traits::one();
        for (size_t i = 1; i < c_.size(); ++i) {
            wp *= w;
            r = r * z + c_[i] * wp;
        }
        return r;
    }

    // Dehomogenized coefficients u(x) = p(x, 1), highest degree first,
    // with exact degree after stripping the leading zeros given.
    std::vector<S> dehomogenized(int strip_leading) const {
        return std::vector<S>(c_.begin() + strip_leading, c_.end());
    }

    HomPoly operator+(const HomPoly& o) const {
        require_same_degree(o);
        HomPoly r(*this);
        for (size_t i = 0; i < c_.size(); ++i) r.c_[i] += o.c_[i];
        return r;
    }
    HomPoly operator-(const HomPoly& o) const {
        require_same_degree(o);
        HomPoly r(*this);
        for (size_t i = 0; i < c_.size(); ++i) r.c_[i] -= o.c_[i];
        return r;
    }
    HomPoly operator-() const {
        HomPoly r(*this);
        for (auto& c : r.c_) c = -c;
        return r;
    }
    HomPoly operator*(const S& s) const {
        HomPoly r(*this);
        for (auto& c : r.c_) c *= s;
        return r;
    }

    friend HomPoly mul(const HomPoly& a, const HomPoly& b) {
        HomPoly r(a.degree() + b.degree());
        for (int i = 0; i <= a.degree(); ++i) {
            if (traits::is_zero(a.coeff(i))) continue;
            for (int j = 0; j <= b.degree(); ++j) r.coeff(i + j) += a.coeff(i) * b.coeff(j);
        }
        return r;
    }

    friend HomPoly pow(const HomPoly& a, int k) {
        if (k < 0) throw input_error("pow: negative exponent");
        HomPoly r = HomPoly::constant(traits::one());
        HomPoly base = a;
        while (k > 0) {
            if (k & 1) r = mul(r, base);
            k >>= 1;
            if (k > 0) base = mul(base, base);
        }
        return r;
    }

    // p(A(z,w), B(z,w)) for a pair of equal-degree polynomials; the result
    // has degree deg(p) * deg(A).
    friend HomPoly substitute(const HomPoly& p, const HomPoly& A, const HomPoly& B) {
        if (A.degree() != B.degree()) throw input_error("substitute: deg A != deg B");
        HomPoly r = HomPoly::constant(p.coeff(0));
        HomPoly bp = HomPoly::constant(traits::one());
        for (int i = 1; i <= p.degree(); ++i) {
            bp = mul(bp, B);
            r = mul(r, A) + mul(bp, HomPoly::constant(p.coeff(i)));
        }
        return r;
    }

    // Quotient p / divisor, failing if the division is inexact (exact
    // backend) or leaves a residual above tol.div * |p| (floating backend).
    friend HomPoly divide_exact(const HomPoly& p, const HomPoly& divisor,
                                const Tol& tol = default_tol()) {
        if (divisor.is_zero()) throw domain_error("divide_exact: zero divisor");
        if (divisor.degree() > p.degree()) throw domain_error("divide_exact: divisor degree too large");
        // Strip the divisor's roots at infinity (leading w factors) from both.
        int a = divisor.mult_at_infinity(tol.trim);
        if (p.mult_at_infinity(tol.trim) < a) throw domain_error("divide_exact: inexact (w-power)");
        std::vector<S> num = p.dehomogenized(a);
        std::vector<S> den = divisor.dehomogenized(a);
        double scale = p.max_abs();
        // Long division on dehomogenized coefficients, leading first.
        size_t qn = num.size() - den.size() + 1;
        std::vector<S> q(qn, traits::zero());
        for (size_t i = 0; i < qn; ++i) {
            S f = num[i] / den[0];
            q[i] = f;
            for (size_t j = 0; j < den.size(); ++j) num[i + j] -= f * den[j];
        }
        for (size_t i = qn; i < num.size(); ++i)
            if (!negligible(num[i], scale, tol.div)) throw domain_error("divide_exact: inexact division");
        return HomPoly(std::move(q));
    }

    // d/dz and d/dw, as homogeneous polynomials of degree-1 lower.
    HomPoly derivative_z() const {
        if (degree() == 0) return HomPoly(std::vector<S>{traits::zero()});
        HomPoly r(degree() - 1);
        for (int i = 0; i < degree(); ++i) r.coeff(i) = c_[i] * traits::from_int(degree() - i);
        return r;
    }
    HomPoly derivative_w() const {
        if (degree() == 0) return HomPoly(std::vector<S>{traits::zero()});
        HomPoly r(degree() - 1);
        for (int i = 1; i <= degree(); ++i) r.coeff(i - 1) = c_[i] * traits::from_int(i);
        return r;
    }

    // Scaled so the first non-negligible coefficient is 1.
    HomPoly normalized(const Tol& tol = default_tol()) const {
        double scale = max_abs();
        for (const auto& c : c_)
            if (!negligible(c, scale, tol.trim)) {
                HomPoly r(*this);
                for (auto& x : r.c_) x /= c;
                return r;
            }
        return *this;
    }

    // Projective equality: coefficient vectors proportional.
    friend bool proportional(const HomPoly& a, const HomPoly& b, double rel_tol) {
        if (a.degree() != b.degree()) return false;
        if constexpr (traits::exact) {
            for (int i = 0; i <= a.degree(); ++i)
                for (int j = i + 1; j <= a.degree(); ++j)
                    if (!(a.coeff(i) * b.coeff(j) == a.coeff(j) * b.coeff(i))) return false;
            return true;
        } else {
            double s = a.max_abs() * b.max_abs();
            if (s == 0) return a.is_zero() == b.is_zero();
            for (int i = 0; i <= a.degree(); ++i)
                for (int j = i + 1; j <= a.degree(); ++j) {
                    auto d = a.coeff(i) * b.coeff(j) - a.coeff(j) * b.coeff(i);
                    if (std::abs(d) > rel_tol * s) return false;
                }
            return true;
        }
    }

    friend bool operator==(const HomPoly& a, const HomPoly& b) {
        return a.degree() == b.degree() && a.c_ == b.c_;
    }

    friend std::ostream& operator<<(std::ostream& os, const HomPoly& p) {
        bool first = true;
        for (int i = 0; i <= p.degree(); ++i) {
            if (traits::is_zero(p.coeff(i))) continue;
            if (!first) os << " + ";
            os << "(" << p.coeff(i) << ")";
            int ze = p.degree() - i;
            if (ze > 0) os << " z" << (ze > 1 ? "^" + std::to_string(ze) : "");
            if (i > 0) os << " w" << (i > 1 ? "^" + std::to_string(i) : "");
            first = false;
        }
        if (first) os << "0";
        return os;
    }

  private:
    void require_same_degree(const HomPoly& o) const {
        if (degree() != o.degree()) throw input_error("HomPoly: degree mismatch");
    }
    std::vector<S> c_;
};

using HomPolyX = HomPoly<GaussianRational>;
using HomPolyF = HomPoly<Cplx>;

}  // namespace bd
