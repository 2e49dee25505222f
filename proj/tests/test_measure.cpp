#include <catch2/catch_amalgamated.hpp>

#include "bd/measure.hpp"

using namespace bd;
using GR = GaussianRational;
using PX = HomPolyX;
using PF = HomPolyF;

namespace {

PX px(std::vector<long> v) {
    std::vector<GR> c;
    for (long x : v) c.emplace_back(x);
    return PX(std::move(c));
}

RatbarX h_point() { return RatbarX::normalize(mul(PX::var_z(), PX::var_w()), pow(PX::var_z(), 2)); }

RatbarX lambda0() {
    return RatbarX::normalize(PX::zero(2), mul(px({1, 1}), px({1, -1})));
}

RatbarX lambda2() {
    PX zmw = px({1, -1});
    return RatbarX::normalize(mul(PX::var_z(), zmw) * GR(2), mul(PX::var_w(), zmw));
}

// P_{2,2} = (z^2 w (z+w) : z^2 w^2)
RatbarX P22() {
    PX z = PX::var_z(), w = PX::var_w();
    return RatbarX::normalize(mul(mul(pow(z, 2), w), px({1, 1})), mul(pow(z, 2), pow(w, 2)));
}

RatbarX F_qq(int q, const GR& tau) {
    PX z = PX::var_z(), w = PX::var_w();
    int k = (1 << (q - 1)) - 1;
    PX quad(std::vector<GR>{GR(1), tau, GR(1)});
    return RatbarX::normalize(mul(mul(pow(z, k), pow(w, k)), quad),
                              mul(pow(z, k + 1), pow(w, k + 1)));
}

// f_a = (w^(d-1) P^(d-1) (a w P + z^d) : w^d P^d), the second-iterate limit
// of the g-family
RatbarX f_a_point(int d, const GR& a, const PX& P) {
    PX z = PX::var_z(), w = PX::var_w();
    PX inner = mul(w, P) * a + pow(z, d);
    PX H = mul(pow(w, d - 1), pow(P, d - 1));
    return RatbarX::normalize(mul(H, inner), mul(pow(w, d), pow(P, d)));
}

ProjPoint<GR> fin(long n, long d = 1) { return ProjPoint<GR>::finite(GR(n, d)); }

}  // namespace

TEST_CASE("boundary_measure: Lambda_0 is the exact hole average") {
    auto mu = boundary_measure(lambda0());
    REQUIRE(mu.atoms.size() == 2);
    REQUIRE(mu.tail_bound == 0);
    REQUIRE(mu.mass_of(fin(1)) == Rational(1, 2));
    REQUIRE(mu.mass_of(fin(-1)) == Rational(1, 2));
}

TEST_CASE("boundary_measure: Lambda_2 geometric atoms") {
    auto mu = boundary_measure(lambda2(), 20);
    for (int k = 0; k <= 10; ++k) {
        Rational expect{1, 2 * (Int(1) << k)};
        REQUIRE(mu.mass_of(ProjPoint<GR>::finite(GR(Rational(1, Int(1) << k)))) == expect);
    }
    REQUIRE(mu.total() + mu.tail_bound == 1);
    REQUIRE(mu.tail_bound >= 0);
    REQUIRE(mu.tail_bound < Rational(1, 1 << 20));
}

TEST_CASE("boundary_measure: P_{2,2}") {
    auto mu = boundary_measure(P22(), 25);
    // 1/2 sum 4^-k delta_{-k} + 1/3 delta_inf
    REQUIRE(mu.mass_of(ProjPoint<GR>::infinity()) == Rational(1, 3));
    for (int k = 0; k <= 6; ++k)
        REQUIRE(mu.mass_of(fin(-k)) == Rational(1, 2 * (Int(1) << (2 * k))));
    REQUIRE(mu.total() + mu.tail_bound == 1);
}

TEST_CASE("mass_at: mu_h = 2/3 delta_0 + 1/3 delta_inf") {
    auto h = h_point();
    auto m0 = mass_at(h, fin(0));
    auto mi = mass_at(h, ProjPoint<GR>::infinity());
    REQUIRE(m0.value == Rational(2, 3));
    REQUIRE(m0.error == 0);
    REQUIRE(mi.value == Rational(1, 3));
    REQUIRE(mi.error == 0);
}

TEST_CASE("mass_at: F_{q,tau,q} masses at 0 and infinity") {
    for (int q : {2, 3}) {
        for (long t : {0L, 1L, 2L}) {
            auto F = F_qq(q, GR(t));
            Rational expect{(Int(1) << (q - 1)) - 1, (Int(1) << q) - 1};
            REQUIRE(mass_at(F, fin(0)).value == expect);
            REQUIRE(mass_at(F, ProjPoint<GR>::infinity()).value == expect);
            REQUIRE(mass_at(F, fin(0)).error == 0);
        }
    }
}

TEST_CASE("mass_at: mu_{f_a}(infinity) = 1/(d+1)") {
    for (int d : {2, 3}) {
        PX P = d == 2 ? px({1, -1}) : px({1, 0, -1});  // z-w and z^2-w^2
        auto fa = f_a_point(d, GR(2), P);
        REQUIRE(fa.degree() == d * d);
        auto m = mass_at(fa, ProjPoint<GR>::infinity());
        REQUIRE(m.value == Rational(1, d + 1));
        REQUIRE(m.error == 0);
        // and the same mass at each root of P
        REQUIRE(mass_at(fa, fin(1)).value == Rational(1, d + 1));
    }
}

TEST_CASE("mass_via_depths") {
    // (z^4 w : z w^4): d_0(f^n)/5^n = (1 - (3/5)^n)/2 -> 1/2
    auto f = RatbarX::normalize(mul(pow(PX::var_z(), 4), PX::var_w()),
                                mul(PX::var_z(), pow(PX::var_w(), 4)));
    for (int n : {1, 3, 6}) {
        Rational expect = (1 - Rational(ipow(3, n), ipow(5, n))) / 2;
        REQUIRE(mass_via_depths(f, fin(0), n) == expect);
        REQUIRE(mass_via_depths(f, ProjPoint<GR>::infinity(), n) == expect);
    }

    // hole-free map: zero everywhere
    auto g = RatbarX::normalize(px({1, 0, 1}), px({0, 1, 0}));
    REQUIRE(mass_via_depths(g, fin(0), 4) == 0);

    // Lambda_2 at z = 1: exactly 1/2 for every n
    auto L2 = lambda2();
    for (int n = 1; n <= 8; ++n)
        REQUIRE(mass_via_depths(L2, fin(1), n) == Rational(1, 2));
}

TEST_CASE("weak_distance basics") {
    auto mu = boundary_measure(lambda2(), 20);
    REQUIRE(weak_distance(mu, mu) == 0.0);

    AtomicMeasure<GR> d0, dinf;
    d0.atoms.push_back({fin(0), Rational(1)});
    dinf.atoms.push_back({ProjPoint<GR>::infinity(), Rational(1)});
    REQUIRE(weak_distance(d0, dinf) == Catch::Approx(1.0));
}

TEST_CASE("iterate invariance of atom masses") {
    std::vector<RatbarX> fixtures = {h_point(), lambda2(), P22()};
    for (const auto& f : fixtures) {
        auto f2 = iterate(f, 2);
        for (const auto& hole : f.holes()) {
            auto base = mass_at(f, hole.point);
            auto it = mass_at(f2, hole.point);
            REQUIRE(base.value == it.value);
            REQUIRE(base.error < Rational(1, 1000000));
            REQUIRE(it.error < Rational(1, 1000000));
        }
    }
}

TEST_CASE("balanced condition at atoms: d mu(z) = m_z(phi) mu(phi(z)) + d_z(f)") {
    std::vector<RatbarX> fixtures = {h_point(), P22(), F_qq(2, GR(1)), lambda2()};
    for (const auto& f : fixtures) {
        long d = f.degree();
        // check at the holes and at one further preimage of each hole
        std::vector<ProjPoint<GR>> pts;
        for (const auto& hole : f.holes()) pts.push_back(hole.point);
        for (const auto& z : pts) {
            Rational lhs = Rational(d) * mass_at(f, z).value;
            Rational rhs = Rational(local_mult(f, z)) * mass_at(f, f.phi_apply(z)).value +
                           f.depth_at(z);
            REQUIRE(lhs == rhs);
        }
    }
}

TEST_CASE("the two mass formulas agree within the tail") {
    std::vector<RatbarX> fixtures = {h_point(), lambda2(), P22(), F_qq(2, GR(1))};
    for (const auto& f : fixtures) {
        for (const auto& hole : f.holes()) {
            auto direct = mass_at(f, hole.point);
            Rational approx = mass_via_depths(f, hole.point, 10);
            REQUIRE(approx <= direct.value + direct.error);
            REQUIRE(to_double(direct.value) - to_double(approx) < 1e-3);
        }
    }
}
