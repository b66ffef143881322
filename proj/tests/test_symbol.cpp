#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orbizeta/symbol.hpp"

using namespace orbizeta;

namespace {

Coefficient cos_coeff(double amp) {
    TrigPolyData d;
    d.freq_scale = RVec::Ones(1);
    d.terms[{1}] = Mat::Constant(1, 1, amp / 2);
    d.terms[{-1}] = Mat::Constant(1, 1, amp / 2);
    return Coefficient::trig(std::move(d));
}

Coefficient sin_coeff(double amp) {
    TrigPolyData d;
    d.freq_scale = RVec::Ones(1);
    d.terms[{1}] = Mat::Constant(1, 1, Cplx(0, -amp / 2));
    d.terms[{-1}] = Mat::Constant(1, 1, Cplx(0, amp / 2));
    return Coefficient::trig(std::move(d));
}

Coefficient zero1() { return Coefficient::constant(Mat::Zero(1, 1), 1); }

FiniteGroupAction circle_c2() {
    GroupGenerator g;
    g.rot = RMat::Constant(1, 1, -1.0);
    g.trans = RVec::Zero(1);
    g.fiber = Mat::Identity(1, 1);
    RVec p(1);
    p << kTwoPi;
    return cyclic_group(2, g, p);
}

RVec vec1(double x) { return RVec::Constant(1, x); }

Mat full_eval(const ClassicalSymbol& sym, const RVec& x, const RVec& xi) {
    Mat acc = Mat::Zero(sym.k, sym.k);
    for (const auto& comp : sym.comps)
        if (!comp.empty()) acc += eval_component(comp, x, xi);
    return acc;
}

}  // namespace

TEST_CASE("coefficient calculus") {
    Coefficient c = cos_coeff(0.3);
    CHECK(std::abs(c.eval(vec1(0.4))(0, 0) - 0.3 * std::cos(0.4)) < 1e-14);

    // D = -i d/dx on cos gives i sin
    Coefficient dc = c.x_derivative(0);
    Cplx expect = Cplx(0, 1) * 0.3 * std::sin(0.9);
    CHECK(std::abs(dc.eval(vec1(0.9))(0, 0) - expect) < 1e-14);

    // product: cos * cos
    Coefficient sq = c.mat_mul(c);
    CHECK(std::abs(sq.eval(vec1(1.1))(0, 0) - 0.09 * std::cos(1.1) * std::cos(1.1)) <
          1e-14);

    // directional derivative against finite differences
    RVec dir = vec1(1.0);
    Coefficient dd = c.dir_derivative(dir);
    double h = 1e-6;
    Cplx fd = Cplx(0, -1) *
              (c.eval(vec1(0.5 + h))(0, 0) - c.eval(vec1(0.5 - h))(0, 0)) / (2 * h);
    CHECK(std::abs(dd.eval(vec1(0.5))(0, 0) - fd) < 1e-8);
}

TEST_CASE("trig pullback by rotation and translation") {
    Coefficient c = cos_coeff(1.0);
    // x -> -x leaves cos invariant
    Coefficient p1 = c.pullback(RMat::Constant(1, 1, -1.0), RVec::Zero(1));
    CHECK(std::abs(p1.eval(vec1(0.7))(0, 0) - std::cos(0.7)) < 1e-13);
    // sin picks up a sign
    Coefficient s = sin_coeff(1.0);
    Coefficient p2 = s.pullback(RMat::Constant(1, 1, -1.0), RVec::Zero(1));
    CHECK(std::abs(p2.eval(vec1(0.7))(0, 0) + std::sin(0.7)) < 1e-13);
    // translation by pi: cos(x - pi) = -cos(x)
    Coefficient p3 = c.pullback(RMat::Identity(1, 1), vec1(kPi));
    CHECK(std::abs(p3.eval(vec1(0.7))(0, 0) + std::cos(0.7)) < 1e-13);
}

TEST_CASE("jet coefficient calculus") {
    JetData d;
    d.base = RVec::Zero(2);
    d.order = 3;
    // f(x, y) = x^2 y
    d.coeffs[{2, 1}] = Mat::Identity(1, 1);
    Coefficient c = Coefficient::jet(std::move(d));
    RVec x(2);
    x << 0.3, -0.2;
    CHECK(std::abs(c.eval(x)(0, 0) - 0.09 * (-0.2)) < 1e-14);
    // D_x (x^2 y) = -2 i x y
    Coefficient dc = c.x_derivative(0);
    CHECK(std::abs(dc.eval(x)(0, 0) - Cplx(0, -1) * 2.0 * 0.3 * (-0.2)) < 1e-14);
}

TEST_CASE("laplace-type symbol evaluation") {
    ClassicalSymbol sym =
        from_laplace_type(1, 1, 1.0, {sin_coeff(0.2)}, cos_coeff(0.3), 1.0);
    RVec x = vec1(0.5), xi = vec1(1.7);
    Cplx expect = 1.7 * 1.7 + 0.2 * std::sin(0.5) * 1.7 + 1.0 + 0.3 * std::cos(0.5);
    CHECK(std::abs(full_eval(sym, x, xi)(0, 0) - expect) < 1e-13);
}

TEST_CASE("resolvent rewrite of power terms") {
    SymbolTerm t;
    t.coeff = Coefficient::constant(Mat::Identity(1, 1), 1);
    t.xi = {0};
    t.rad = Radial::power(2.0);
    double scale = 1.5;
    TermList rl = to_resolvent(t, scale);
    RVec x = vec1(0.0), xi = vec1(1.3);
    Cplx lambda(0.4, 0.9);
    Cplx acc = 0.0;
    for (const auto& r : rl) acc += eval_term_resolvent(r, x, xi, lambda, scale)(0, 0);
    CHECK(std::abs(acc - std::pow(1.3 * 1.3, 2)) < 1e-12);
}

TEST_CASE("xi derivative against finite differences") {
    SymbolTerm t;
    t.coeff = Coefficient::constant(Mat::Identity(1, 1), 2);
    t.xi = {1, 0};
    t.rad = Radial::resolvent(0, 1);
    double scale = 1.0;
    TermList d = xi_derivative(t, 0, scale);
    RVec x = RVec::Zero(2);
    RVec xi(2);
    xi << 0.8, -0.6;
    Cplx lambda(-0.3, 0.5);
    Cplx analytic = 0.0;
    for (const auto& r : d) analytic += eval_term_resolvent(r, x, xi, lambda, scale)(0, 0);
    double h = 1e-6;
    RVec xp = xi, xm = xi;
    xp(0) += h;
    xm(0) -= h;
    Cplx fd = (eval_term_resolvent(t, x, xp, lambda, scale)(0, 0) -
               eval_term_resolvent(t, x, xm, lambda, scale)(0, 0)) /
              (2 * h);
    CHECK(std::abs(analytic - fd) < 1e-7);
}

TEST_CASE("linear pullback of a symbol") {
    ClassicalSymbol sym =
        from_laplace_type(1, 1, 0.5, {}, sin_coeff(0.4), 1.0);
    RMat rot = RMat::Constant(1, 1, -1.0);
    RVec trans = RVec::Zero(1);
    ClassicalSymbol pb = linear_pullback(sym, rot, trans, Mat::Identity(1, 1));
    RVec x = vec1(0.9), xi = vec1(-1.2);
    // b(x, xi) = a(rot^T (x - trans), rot^T xi)
    Mat lhs = full_eval(pb, x, xi);
    Mat rhs = full_eval(sym, vec1(-0.9), vec1(1.2));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("pullback off the dual lattice is rejected") {
    Coefficient c = cos_coeff(1.0);  // integer frequency 1
    RMat rot = RMat::Constant(1, 1, 1.0);
    ClassicalSymbol sym = from_laplace_type(1, 1, 0.0, {}, c, 1.0);
    // fine for lattice-preserving rot; a non-lattice frequency scale breaks it
    TrigPolyData d;
    d.freq_scale = RVec::Constant(1, 0.7);
    d.terms[{1}] = Mat::Identity(1, 1);
    Coefficient bad = Coefficient::trig(std::move(d));
    CHECK_THROWS_AS(bad.pullback(RMat::Constant(1, 1, -0.6), RVec::Zero(1)),
                    std::exception);
    CHECK_NOTHROW(linear_pullback(sym, rot, RVec::Zero(1), Mat::Identity(1, 1)));
}

TEST_CASE("equivariant average and defect") {
    auto g = circle_c2();
    ClassicalSymbol odd = from_laplace_type(1, 1, 1.0, {}, sin_coeff(0.4), 1.0);
    CHECK(equivariance_defect(odd, g) > 0.1);
    ClassicalSymbol avg = equivariant_average(odd, g);
    CHECK(equivariance_defect(avg, g) < 1e-12);
    // the average of sin vanishes
    CHECK(std::abs(full_eval(avg, vec1(0.3), vec1(1.0))(0, 0) - (1.0 + 1.0)) < 1e-12);

    ClassicalSymbol even = from_laplace_type(1, 1, 1.0, {}, cos_coeff(0.3), 1.0);
    CHECK(equivariance_defect(even, g) < 1e-12);
}

TEST_CASE("agmon condition") {
    ClassicalSymbol good = from_laplace_type(2, 1, 1.0, {}, Coefficient::constant(Mat::Zero(1, 1), 2), 1.0);
    AgmonResult r = agmon_check(good);
    CHECK(r.ok);
    CHECK(r.clearance == doctest::Approx(1.0).epsilon(1e-10));

    // a negative-definite principal part fails
    ClassicalSymbol bad = good;
    bad.comps[0][0].coeff = Coefficient::constant(-Mat::Identity(1, 1), 2);
    AgmonResult rb = agmon_check(bad);
    CHECK(!rb.ok);
}

TEST_CASE("composition against the leibniz expansion") {
    ClassicalSymbol d2 = from_laplace_type(1, 1, 0.0, {}, zero1(), 1.0);
    ClassicalSymbol mult;
    mult.order = 0.0;
    mult.m = 1;
    mult.k = 1;
    mult.scale = 1.0;
    SymbolTerm v;
    v.coeff = cos_coeff(0.3);
    v.xi = {0};
    v.rad = Radial::power(0.0);
    mult.comps.push_back({v});
    ClassicalSymbol c = compose(d2, mult, 3);
    double x = 0.5, xi = 1.4;
    Cplx expect = xi * xi * 0.3 * std::cos(x) + 2.0 * xi * Cplx(0, 1) * 0.3 * std::sin(x) +
                  0.3 * std::cos(x);
    Cplx got = 0.0;
    for (const auto& comp : c.comps)
        if (!comp.empty()) got += eval_component(comp, vec1(x), vec1(xi))(0, 0);
    CHECK(std::abs(got - expect) < 1e-12);
}
