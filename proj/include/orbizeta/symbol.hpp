#pragma once

#include <map>

#include "orbizeta/group.hpp"

namespace orbizeta {

/// x-dependence of a symbol coefficient: a matrix-valued trigonometric
/// polynomial over a finite set of integer frequency vectors.  The physical
/// frequency of the integer vector n is componentwise freq_scale .* n
/// (freq_scale = 2 pi / periods on a torus).
struct TrigPolyData {
    RVec freq_scale;
    std::map<std::vector<int>, Mat> terms;
};

/// Truncated Taylor data at base_point: coeffs[alpha] = d^alpha c / alpha!.
struct JetData {
    RVec base;
    int order = 0;
    std::map<MIdx, Mat> coeffs;
};

class Coefficient {
public:
    enum class Kind { Trig, Jet };

    static Coefficient constant(const Mat& c, int m);
    static Coefficient trig(TrigPolyData d);
    static Coefficient jet(JetData d);

    Kind kind() const { return kind_; }
    int dim_x() const;
    int dim_fiber() const;
    const TrigPolyData& trig_data() const { return trig_; }
    const JetData& jet_data() const { return jet_; }

    Mat eval(const RVec& x) const;
    /// D = -i d/dx along a coordinate axis.
    Coefficient x_derivative(int axis) const;
    /// D = -i d/dx along an arbitrary direction.
    Coefficient dir_derivative(const RVec& dir) const;
    Coefficient scaled(Cplx f) const;
    /// F c F^-1
    Coefficient conjugated(const Mat& fiber) const;
    /// c(x) -> c(t^-1 x) for t x = rot x + trans (trig only; jets only for
    /// pure rotations about their base point).
    Coefficient pullback(const RMat& rot, const RVec& trans) const;
    void add_in_place(const Coefficient& other, Cplx f = 1.0);
    /// this * other (matrix product; trig convolution / truncated jet product)
    Coefficient mat_mul(const Coefficient& other) const;
    double max_abs() const;
    void prune(double tol);
    bool is_zero(double tol = 0.0) const;

private:
    Kind kind_ = Kind::Trig;
    TrigPolyData trig_;
    JetData jet_;
};

/// Radial part of a symbol term.
///   Power:     (|xi|^2)^rho
///   Resolvent: lambda^lam * (q - lambda)^(-res), q = scale * |xi|^2
/// (lambda is counted with homogeneity weight 2).
struct Radial {
    enum class Kind { Power, Resolvent };
    Kind kind = Kind::Power;
    Cplx rho{0.0, 0.0};
    int lam = 0;
    int res = 0;

    static Radial power(Cplx rho);
    static Radial resolvent(int lam, int res);
    Cplx degree() const;  // homogeneity contribution
};

struct SymbolTerm {
    Coefficient coeff;
    MIdx xi;  // monomial exponents over the m xi-variables
    Radial rad;

    Cplx degree() const { return double(midx_abs(xi)) + rad.degree(); }
};

using TermList = std::vector<SymbolTerm>;

/// A polyhomogeneous matrix-valued symbol; component j holds terms of exact
/// homogeneity order - j.
struct ClassicalSymbol {
    double order = 2.0;
    int m = 0;
    int k = 1;
    double scale = 1.0;  // principal part scale * |xi|^2 * Id
    bool laplace_type = false;
    std::vector<TermList> comps;
};

// ---- term-level operations ----

TermList xi_derivative(const SymbolTerm& t, int axis, double scale);
SymbolTerm x_derivative(const SymbolTerm& t, int axis);
SymbolTerm term_multiply(const SymbolTerm& a, const SymbolTerm& b, double scale);
/// Rewrite a Power term with a nonnegative-integer exponent in the
/// resolvent ring: (|xi|^2)^p = scale^-p ((q-lambda)+lambda)^p expanded.
TermList to_resolvent(const SymbolTerm& t, double scale);
void normalize_terms(TermList& terms, double tol = 1e-14);
Mat eval_term(const SymbolTerm& t, const RVec& x, const RVec& xi);
Mat eval_term_resolvent(const SymbolTerm& t, const RVec& x, const RVec& xi, Cplx lambda,
                        double scale);
Mat eval_component(const TermList& terms, const RVec& x, const RVec& xi);

// ---- symbol-level operations ----

ClassicalSymbol from_laplace_type(int m, int k, double c0,
                                  const std::vector<Coefficient>& first_order,
                                  const Coefficient& potential, double scale = 1.0);

ClassicalSymbol linear_pullback(const ClassicalSymbol& sym, const RMat& rot,
                                const RVec& trans, const Mat& fiber);

ClassicalSymbol equivariant_average(const ClassicalSymbol& sym, const FiniteGroupAction& g);

double equivariance_defect(const ClassicalSymbol& sym, const FiniteGroupAction& g);

struct AgmonResult {
    bool ok = true;
    double clearance = 0.0;  // minimal distance of principal eigenvalues
                             // from the cut region
    RVec witness_x, witness_xi;
    Cplx witness_eig;
};
AgmonResult agmon_check(const ClassicalSymbol& sym, double epsilon = 1e-6);

/// Asymptotic composition a # b truncated at K components.
ClassicalSymbol compose(const ClassicalSymbol& a, const ClassicalSymbol& b, int K);

}  // namespace orbizeta
