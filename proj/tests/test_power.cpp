#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>

#include "orbizeta/power.hpp"

using namespace orbizeta;

namespace {

Coefficient cos_coeff(double amp) {
    TrigPolyData d;
    d.freq_scale = RVec::Ones(1);
    d.terms[{1}] = Mat::Constant(1, 1, amp / 2);
    d.terms[{-1}] = Mat::Constant(1, 1, amp / 2);
    return Coefficient::trig(std::move(d));
}

Coefficient zero_c(int m) { return Coefficient::constant(Mat::Zero(1, 1), m); }

RVec vec1(double x) { return RVec::Constant(1, x); }

double family_distance(const PowerSymbolFamily& a, const PowerSymbolFamily& b, int J,
                       const std::vector<Cplx>& svals, const std::vector<RVec>& xis,
                       const RVec& x) {
    double d = 0.0;
    for (int j = 0; j <= J; ++j)
        for (Cplx s : svals)
            for (const auto& xi : xis) {
                Mat va = eval_power_component(a, j, s, x, xi);
                Mat vb = eval_power_component(b, j, s, x, xi);
                d = std::max(d, (va - vb).cwiseAbs().maxCoeff());
            }
    return d;
}

}  // namespace

TEST_CASE("generalized binomial polynomial") {
    // binom(s, 3) = s(s-1)(s-2)/6
    CVec c = binom_poly(3);
    Cplx s(1.7, 0.3);
    Cplx expect = s * (s - 1.0) * (s - 2.0) / 6.0;
    CHECK(std::abs(poly_eval(c, s) - expect) < 1e-13);
    CHECK(std::abs(poly_eval(binom_poly(0), s) - 1.0) < 1e-15);

    CVec sh = poly_shift(c, Cplx(2.0, 0.0));
    CHECK(std::abs(poly_eval(sh, s) - poly_eval(c, s + 2.0)) < 1e-12);
}

TEST_CASE("cauchy rule matches the numeric contour integral") {
    std::vector<std::pair<int, int>> cases = {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {2, 3}, {1, 4}};
    std::vector<Cplx> svals = {{-2.3, 0.0}, {-0.7, 0.0}, {0.6, 0.0}, {1.45, 0.0}, {0.3, 0.4}};
    for (auto [a, r] : cases)
        for (Cplx s : svals)
            for (double q : {0.7, 1.0, 2.3}) {
                Cplx closed = cauchy_rule(a, r, s, q);
                Cplx numeric = numeric_contour(a, r, s, q);
                CHECK(std::abs(closed - numeric) < 1e-8);
            }
}

TEST_CASE("cauchy rule special values") {
    // a = 0, r = 1: residue at lambda = q of lambda^s/(q-lambda) gives q^s
    CHECK(std::abs(cauchy_rule(0, 1, Cplx(0.5, 0), 2.0) - std::sqrt(2.0)) < 1e-13);
    // a = 0, r = 2: d/d lambda lambda^s at q -> s q^(s-1), sign from the rule
    Cplx s(1.25, 0.0);
    CHECK(std::abs(cauchy_rule(0, 2, s, 3.0) - (-s * std::pow(3.0, s - 1.0))) < 1e-12);
    // r <= 0: entire in lambda, no residue
    CHECK(std::abs(cauchy_rule(2, 0, s, 3.0)) == 0.0);
}

TEST_CASE("resolvent recursion reproduces the geometric series") {
    // constant coefficients: b_{-2-2j} = (-1)^j (c + V0)^j (q - lambda)^(-1-j)
    double c0 = 0.8;
    ClassicalSymbol sym = from_laplace_type(
        1, 1, c0, {}, Coefficient::constant(Mat::Zero(1, 1), 1), 1.0);
    ResolventSymbolFamily fam = resolvent_recursion(sym, 4);
    REQUIRE(fam.comps.size() == 5);
    RVec x = vec1(0.0), xi = vec1(1.2);
    Cplx lambda(0.3, 0.8);
    double q = 1.44;
    for (int j = 0; j <= 4; ++j) {
        Cplx acc = 0.0;
        for (const auto& t : fam.comps[j])
            acc += eval_term_resolvent(t, x, xi, lambda, 1.0)(0, 0);
        Cplx expect = (j % 2 == 0)
                          ? std::pow(-c0, j / 2) * std::pow(q - lambda, -1.0 - j / 2)
                          : Cplx(0.0, 0.0);
        CHECK(std::abs(acc - expect) < 1e-12);
    }
}

TEST_CASE("binomial oracle equivalence, circle and torus") {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Cplx> svals = {{-1.1, 0}, {-0.3, 0}, {0.7, 0}, {1.9, 0},
                               {2.4, 0},  {3.3, 0},  {-2.2, 0}, {0.1, 0}};
    {
        ClassicalSymbol sym = from_laplace_type(
            1, 1, 1.3, {}, Coefficient::constant(Mat::Zero(1, 1), 1), 1.0);
        PowerSymbolFamily engine = cauchy_power(resolvent_recursion(sym, 6));
        PowerSymbolFamily oracle = binomial_oracle(sym, 6);
        std::vector<RVec> xis = {vec1(1.0), vec1(0.6), vec1(-1.7)};
        CHECK(family_distance(engine, oracle, 6, svals, xis, vec1(0.0)) < 1e-10);
    }
    {
        ClassicalSymbol sym = from_laplace_type(
            2, 1, 2.5, {}, Coefficient::constant(Mat::Zero(1, 1), 2), 1.0);
        PowerSymbolFamily engine = cauchy_power(resolvent_recursion(sym, 6));
        PowerSymbolFamily oracle = binomial_oracle(sym, 6);
        RVec xi1(2), xi2(2);
        xi1 << 0.8, -0.6;
        xi2 << 1.3, 0.4;
        CHECK(family_distance(engine, oracle, 6, svals, {xi1, xi2}, RVec::Zero(2)) < 1e-10);
    }
    double ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    CHECK(ms < 1000.0);
}

TEST_CASE("binomial oracle rejects x-dependent coefficients") {
    ClassicalSymbol sym = from_laplace_type(1, 1, 1.0, {}, cos_coeff(0.3), 1.0);
    CHECK_THROWS(binomial_oracle(sym, 2));
}

TEST_CASE("contour backend reproduces the exact power family") {
    ClassicalSymbol sym = from_laplace_type(1, 1, 1.0, {}, cos_coeff(0.3), 1.0);
    ResolventSymbolFamily rfam = resolvent_recursion(sym, 3);
    PowerSymbolFamily exact = cauchy_power(rfam);
    PowerSymbolFamily contour = cauchy_power_contour(rfam);
    std::vector<Cplx> svals = {{-0.5, 0}, {0.5, 0}, {1.5, 0}};
    std::vector<RVec> xis = {vec1(1.0), vec1(-1.3)};
    CHECK(family_distance(exact, contour, 3, svals, xis, vec1(0.45)) < 1e-7);
}

TEST_CASE("power family with a potential, first correction") {
    // j = 2 component at constant potential c: -binom(s, 1) c q^(s-1) ... the
    // termwise rule gives s c q^{s-1}
    ClassicalSymbol sym = from_laplace_type(
        1, 1, 0.9, {}, Coefficient::constant(Mat::Zero(1, 1), 1), 1.0);
    PowerSymbolFamily fam = cauchy_power(resolvent_recursion(sym, 2));
    Cplx s(0.5, 0.0);
    RVec x = vec1(0.0), xi = vec1(1.3);
    double q = 1.69;
    Cplx expect = s * 0.9 * std::pow(q, s - 1.0);
    CHECK(std::abs(eval_power_component(fam, 2, s, x, xi)(0, 0) - expect) < 1e-12);
    // j = 0: q^s
    CHECK(std::abs(eval_power_component(fam, 0, s, x, xi)(0, 0) - std::sqrt(q)) < 1e-13);
    // odd component vanishes
    CHECK(std::abs(eval_power_component(fam, 1, s, x, xi)(0, 0)) < 1e-14);
}

TEST_CASE("trace class gate") {
    CHECK(trace_class_gate(Cplx(-1.0, 0.0), 1));
    CHECK(!trace_class_gate(Cplx(-0.5, 0.0), 1));
    CHECK(!trace_class_gate(Cplx(-0.9, 0.0), 2));
    CHECK(trace_class_gate(Cplx(-1.1, 3.0), 2));
}
