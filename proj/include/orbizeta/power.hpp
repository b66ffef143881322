#pragma once

#include "orbizeta/symbol.hpp"

namespace orbizeta {

/// Resolvent parametrix of a Laplace-type symbol: comps[j] holds the terms of
/// b_{-2-j}, homogeneous of order -2-j in (xi, lambda^{1/2}).  All radials
/// are of Resolvent kind.
struct ResolventSymbolFamily {
    double scale = 1.0;
    int m = 0;
    int k = 1;
    std::vector<TermList> comps;
};

/// Seeley recursion b_{-2} = (a_2 - lambda)^{-1},
/// b_{-2-j} = -b_{-2} sum_{k+l+|alpha|=j, l<j} (1/alpha!) d_xi^alpha a_{2-k}
///            D_x^alpha b_{-2-l}.
ResolventSymbolFamily resolvent_recursion(const ClassicalSymbol& sym, int J);

/// One term of the complex-power symbol family:
///   polyS(s) * coeff(x) * xi^mu * q^(s + qshift),  q = scale |xi|^2.
struct PowerTerm {
    CVec polyS;
    Coefficient coeff;
    MIdx xi;
    int qshift = 0;
};

struct PowerSymbolFamily {
    double scale = 1.0;
    int m = 0;
    int k = 1;
    std::vector<std::vector<PowerTerm>> comps;  // comps[j]: order 2s - j
};

/// Cauchy-integral rule applied termwise:
///   lambda^a (q-lambda)^(-r) -> (-1)^(r+1) binom(s+a, r-1) q^(s+a-r+1)
/// (terms entire in lambda contribute nothing).
PowerSymbolFamily cauchy_power(const ResolventSymbolFamily& fam);

/// The same radial rule as a closed-form scalar, for cross-checks.
Cplx cauchy_rule(int lam, int res, Cplx s, double q);

/// Numerical contour integral -1/(2 pi i) int_Gamma lambda^(s+a)
/// (q-lambda)^(-r) d lambda over a vertical line left of the pole q, after
/// algebraic reduction of the positive lambda-powers.  Agrees with
/// cauchy_rule wherever both are defined.
Cplx numeric_contour(int lam, int res, Cplx s, double q, double tol = 1e-11);

/// Like cauchy_power, but the coefficient polynomials in s are recovered by
/// interpolating the numeric contour integral instead of the closed-form
/// rule (slower, used as the "contour" backend).
PowerSymbolFamily cauchy_power_contour(const ResolventSymbolFamily& fam);

/// Pointwise binomial expansion (q + L)^s for symbols with x-independent
/// coefficients; L is the sub-principal part.  Throws if a coefficient
/// depends on x.
PowerSymbolFamily binomial_oracle(const ClassicalSymbol& sym, int J);

Mat eval_power_component(const PowerSymbolFamily& fam, int j, Cplx s, const RVec& x,
                         const RVec& xi);

/// A^s is trace class iff Re(s) < -m/order.
bool trace_class_gate(Cplx s, int m, double order = 2.0);

/// Polynomial shift p(s) -> p(s + a).
CVec poly_shift(const CVec& p, Cplx a);

}  // namespace orbizeta
