#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orbizeta/residues.hpp"

using namespace orbizeta;

namespace {

Coefficient cos_coeff(double amp, double mean = 0.0) {
    TrigPolyData d;
    d.freq_scale = RVec::Ones(1);
    d.terms[{1}] = Mat::Constant(1, 1, amp / 2);
    d.terms[{-1}] = Mat::Constant(1, 1, amp / 2);
    if (mean != 0.0) d.terms[{0}] = Mat::Constant(1, 1, mean);
    return Coefficient::trig(std::move(d));
}

Coefficient zero_c(int m) { return Coefficient::constant(Mat::Zero(1, 1), m); }

GroupGenerator make_gen(const RMat& rot, const RVec& trans) {
    GroupGenerator g;
    g.rot = rot;
    g.trans = trans;
    g.fiber = Mat::Identity(1, 1);
    return g;
}

RVec periods1() { return RVec::Constant(1, kTwoPi); }
RVec periods2() { return RVec::Constant(2, kTwoPi); }

FiniteGroupAction circle_trivial() { return trivial_group(1, 1, periods1()); }

FiniteGroupAction circle_c2() {
    return cyclic_group(2, make_gen(RMat::Constant(1, 1, -1.0), RVec::Zero(1)), periods1());
}

FiniteGroupAction torus_reflection() {
    RMat r(2, 2);
    r << 1, 0, 0, -1;
    return cyclic_group(2, make_gen(r, RVec::Zero(2)), periods2());
}

ClassicalSymbol laplace_const(int m, double c0) {
    return from_laplace_type(m, 1, c0, {}, zero_c(m), 1.0);
}

}  // namespace

TEST_CASE("sphere quadrature is exact up to degree 2 level") {
    for (int n : {1, 2, 3, 4}) {
        int level = (n >= 3) ? 6 : 8;
        SphereQuad quad = sphere_quadrature(n, level);
        double norm = std::pow(kTwoPi, n);
        for (int deg = 0; deg <= 2 * level; deg += 2) {
            for (const auto& alpha : multi_indices_of_weight(n, deg)) {
                double acc = 0.0;
                for (size_t i = 0; i < quad.nodes.size(); ++i) {
                    double mono = 1.0;
                    for (int d = 0; d < n; ++d)
                        mono *= std::pow(quad.nodes[i](d), alpha[d]);
                    acc += quad.weights(i) * mono;
                }
                CHECK(std::abs(acc - sphere_moment(n, alpha) / norm) < 1e-12);
            }
            if (deg >= 8 && n >= 3) break;  // keep the run quick in high degree
        }
        // odd monomials integrate to zero
        MIdx odd(n, 0);
        odd[0] = 3;
        double acc = 0.0;
        for (size_t i = 0; i < quad.nodes.size(); ++i)
            acc += quad.weights(i) * std::pow(quad.nodes[i](0), 3);
        CHECK(std::abs(acc) < 1e-12);
    }
}

TEST_CASE("gegenbauer rule integrates the weight exactly") {
    // n = 3: weight 1 on [-1, 1]
    RVec nodes, weights;
    gegenbauer_rule(3, 6, nodes, weights);
    CHECK(std::abs(weights.sum() - 2.0) < 1e-12);
    double m2 = 0.0;
    for (int i = 0; i < nodes.size(); ++i) m2 += weights(i) * nodes(i) * nodes(i);
    CHECK(std::abs(m2 - 2.0 / 3.0) < 1e-12);
}

TEST_CASE("circle with trivial group") {
    ResidueCalculator calc(laplace_const(1, 1.0), circle_trivial(), 2);
    CHECK(std::abs(calc.residue_gamma(0, 0) - Cplx(-1.0, 0.0)) < 1e-10);
    CHECK(std::abs(calc.residue_gamma(0, 1)) < 1e-12);
    CHECK(std::abs(calc.residue_gamma(0, 2) - Cplx(-0.5, 0.0)) < 1e-10);
    CHECK(std::abs(calc.residue_orbifold(0) - Cplx(-1.0, 0.0)) < 1e-10);
    // local density is -1/(2 pi)
    CHECK(std::abs(calc.density_at(0, 0, RVec::Constant(1, 0.4)) -
                   Cplx(-1.0 / kTwoPi, 0.0)) < 1e-12);
}

TEST_CASE("constant shifts move the subleading residue") {
    ResidueCalculator calc(laplace_const(1, 2.5), circle_trivial(), 2);
    CHECK(std::abs(calc.residue_gamma(0, 2) - Cplx(-1.25, 0.0)) < 1e-10);
    // a mean-zero potential does not change it
    ResidueCalculator calc2(from_laplace_type(1, 1, 2.5, {}, cos_coeff(0.3), 1.0),
                            circle_trivial(), 2);
    CHECK(std::abs(calc2.residue_gamma(0, 2) - Cplx(-1.25, 0.0)) < 1e-10);
    // a potential of mean 0.5 shifts it by -0.25
    ResidueCalculator calc3(from_laplace_type(1, 1, 2.5, {}, cos_coeff(0.3, 0.5), 1.0),
                            circle_trivial(), 2);
    CHECK(std::abs(calc3.residue_gamma(0, 2) - Cplx(-1.5, 0.0)) < 1e-10);
}

TEST_CASE("torus with trivial group") {
    ResidueCalculator calc(laplace_const(2, 1.0), trivial_group(2, 1, periods2()), 2);
    CHECK(std::abs(calc.residue_gamma(0, 0) - Cplx(-kPi, 0.0)) < 1e-9);
    CHECK(std::abs(calc.residue_gamma(0, 1)) < 1e-12);
}

TEST_CASE("torus reflection") {
    ResidueCalculator calc(laplace_const(2, 1.0), torus_reflection(), 2);
    CHECK(std::abs(calc.residue_gamma(1, 0)) < 1e-14);
    CHECK(std::abs(calc.residue_gamma(1, 1) - Cplx(-1.0, 0.0)) < 1e-8);
}

TEST_CASE("quarter rotation and free translation vanish") {
    RMat r(2, 2);
    r << 0, -1, 1, 0;
    auto g4 = cyclic_group(4, make_gen(r, RVec::Zero(2)), periods2());
    ResidueCalculator calc(laplace_const(2, 1.0), g4, 4);
    for (int k = 0; k <= 4; ++k) {
        CHECK(std::abs(calc.residue_gamma(1, k)) < 1e-10);
        CHECK(std::abs(calc.residue_gamma(3, k)) < 1e-10);
    }
    auto gt = cyclic_group(2, make_gen(RMat::Identity(1, 1), RVec::Constant(1, kPi)),
                           periods1());
    ResidueCalculator calct(laplace_const(1, 1.0), gt, 4);
    for (int k = 0; k <= 4; ++k) CHECK(std::abs(calct.residue_gamma(1, k)) < 1e-10);
}

TEST_CASE("isotypic residues on the orbifold circle") {
    ResidueCalculator calc(laplace_const(1, 1.0), circle_c2(), 2);
    CHECK(std::abs(calc.residue_isotypic(0, 0) - Cplx(-0.5, 0.0)) < 1e-8);
    CHECK(std::abs(calc.residue_isotypic(1, 0) - Cplx(-0.5, 0.0)) < 1e-8);
    // reconstruction: sum of isotypic residues = residue of the full trace
    for (int k = 0; k <= 2; ++k) {
        Cplx sum = calc.residue_isotypic(0, k) + calc.residue_isotypic(1, k);
        CHECK(std::abs(sum - calc.residue_gamma(0, k)) < 1e-10);
    }
    CHECK(std::abs(calc.residue_orbifold(0) - Cplx(-0.5, 0.0)) < 1e-8);
}

TEST_CASE("strata table sums to the orbifold residue") {
    auto g = circle_c2();
    ClassicalSymbol sym = from_laplace_type(1, 1, 1.0, {}, cos_coeff(0.3), 1.0);
    ResidueCalculator calc(sym, g, 2);
    Stratification strat = orbit_type_poset(g, periods1());
    for (int k = 0; k <= 2; ++k) {
        auto rows = calc.strata_table(k, strat);
        Cplx sum = 0.0;
        for (const auto& row : rows) sum += row.integral;
        CHECK(std::abs(sum - calc.residue_orbifold(k)) < 1e-10);
    }
}

TEST_CASE("strata table on the dihedral pillow") {
    RMat r = -RMat::Identity(2, 2);
    RMat s(2, 2);
    s << 1, 0, 0, -1;
    auto g = dihedral_group(2, make_gen(r, RVec::Zero(2)), make_gen(s, RVec::Zero(2)),
                            periods2());
    ResidueCalculator calc(laplace_const(2, 1.0), g, 2);
    Stratification strat = orbit_type_poset(g, periods2());
    for (int k = 0; k <= 2; ++k) {
        auto rows = calc.strata_table(k, strat);
        Cplx sum = 0.0;
        for (const auto& row : rows) sum += row.integral;
        CHECK(std::abs(sum - calc.residue_orbifold(k)) < 1e-10);
    }
    CHECK(calc.covariance_defect(1) < 1e-8);
}

TEST_CASE("equivariance gate") {
    TrigPolyData d;
    d.freq_scale = RVec::Ones(1);
    d.terms[{1}] = Mat::Constant(1, 1, Cplx(0, -0.15));
    d.terms[{-1}] = Mat::Constant(1, 1, Cplx(0, 0.15));
    ClassicalSymbol odd =
        from_laplace_type(1, 1, 1.0, {}, Coefficient::trig(std::move(d)), 1.0);
    CHECK_THROWS_AS(ResidueCalculator(odd, circle_c2(), 2), SpecError);
}

TEST_CASE("contour backend") {
    ResidueCalculator calc(laplace_const(1, 1.0), circle_trivial(), 2, 8, 16,
                           Backend::Contour);
    CHECK(std::abs(calc.residue_orbifold(0) - Cplx(-1.0, 0.0)) < 1e-3);
    CHECK(std::abs(calc.residue_gamma(0, 2) - Cplx(-0.5, 0.0)) < 1e-3);
}

TEST_CASE("frame-change invariance of the reduced density") {
    auto g = torus_reflection();
    ResidueCalculator calc(laplace_const(2, 1.0), g, 2);
    const auto& fam = calc.power_family();
    FixedStratum st = calc.fixed_sets()[1][0];
    SphereQuad quad = sphere_quadrature(1, 8);
    RVec x = st.base_point + 0.3 * st.lattice_dirs.col(0);
    Mat fiber = Mat::Identity(1, 1);

    ReducedDensity rd = reduce_density(fam, st, 1);
    Cplx v0 = eval_density(rd, st, fiber, x, quad, 1.0);

    FixedStratum flipped = st;
    flipped.fixed_basis = -st.fixed_basis;
    flipped.normal_basis = -st.normal_basis;  // tbar is unchanged under conjugation
    ReducedDensity rdf = reduce_density(fam, flipped, 1);
    Cplx v1 = eval_density(rdf, flipped, fiber, x, quad, 1.0);
    CHECK(std::abs(v0 - v1) < 1e-10);

    // identity stratum: rotate the (2-dimensional) fixed frame
    FixedStratum ide = calc.fixed_sets()[0][0];
    SphereQuad quad2 = sphere_quadrature(2, 8);
    ReducedDensity rde = reduce_density(fam, ide, 2);
    Cplx w0 = eval_density(rde, ide, fiber, x, quad2, 1.0);
    FixedStratum rot = ide;
    RMat R(2, 2);
    double th = 0.3;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    rot.fixed_basis = ide.fixed_basis * R;
    ReducedDensity rdr = reduce_density(fam, rot, 2);
    Cplx w1 = eval_density(rdr, rot, fiber, x, quad2, 1.0);
    CHECK(std::abs(w0 - w1) < 1e-10);
}
