#pragma once

#include <functional>

#include "orbizeta/geometry.hpp"
#include "orbizeta/power.hpp"

namespace orbizeta {

/// Quadrature on the unit sphere S^(n-1), with the normalized measure
/// dS / (2 pi)^n.  Exact on spherical polynomials of degree <= 2 * level.
struct SphereQuad {
    std::vector<RVec> nodes;
    RVec weights;
};
SphereQuad sphere_quadrature(int n, int level);

/// int_{S^(n-1)} xi^alpha dS (unnormalized); zero for odd alpha, otherwise
/// 2 prod Gamma((alpha_i+1)/2) / Gamma((|alpha|+n)/2).
double sphere_moment(int n, const MIdx& alpha);

/// Gauss nodes/weights for the weight (1-u^2)^((n-3)/2) on [-1, 1]
/// (Golub-Welsch on the Gegenbauer recurrence).
void gegenbauer_rule(int n, int points, RVec& nodes, RVec& weights);

/// One term of a power-symbol component pushed down to a fixed stratum:
///   polyS(s) * coeff(x) * xi1^mu * q1^(s + qshift),  q1 = scale |xi1|^2,
/// with xi1 ranging over the fixed directions of the stratum.
struct ReducedTerm {
    CVec polyS;
    Coefficient coeff;
    MIdx xi1;
    int qshift = 0;
};

struct ReducedDensity {
    int gamma = 0;
    int k = 0;
    int n = 0;           // fixed-set dimension
    Cplx s_star{0, 0};   // (k - m) / 2
    double d_weight = 1.0;
    std::vector<ReducedTerm> terms;  // empty when the density vanishes
};

/// Reduction of component j = n - m + k of the power family onto the frame
/// of `st` (the substitution w = (tbar - I) x2 followed by the diagonal
/// (D_w, d_xi2) Taylor expansion at the stratum).
ReducedDensity reduce_density(const PowerSymbolFamily& fam, const FixedStratum& st, int k);

/// eta^gamma_k(x) for x on the fixed set, including the d-weight and the
/// fiber trace; requires |xi1|-frame data from `st`.
Cplx eval_density(const ReducedDensity& rd, const FixedStratum& st, const Mat& fiber,
                  const RVec& x, const SphereQuad& quad, double scale);

/// Integral of a smooth function over the affine subtorus of `st`
/// (uniform periodic grid; exact for trigonometric integrands of modest
/// frequency).
Cplx integrate_stratum(const FixedStratum& st, int grid,
                       const std::function<Cplx(const RVec&)>& f);

struct StratumRow {
    int type_id = 0;
    int component = 0;
    int dim = 0;
    double volume = 0.0;
    Cplx integral{0, 0};  // int_alpha eta_{upsilon, k}
};

/// Residues of the equivariant, isotypic and orbifold zeta functions of an
/// equivariant Laplace-type symbol.  Construction refuses symbols whose
/// equivariance defect exceeds 1e-8.
enum class Backend { Exact, Contour };

class ResidueCalculator {
public:
    ResidueCalculator(ClassicalSymbol sym, FiniteGroupAction group, int k_max,
                      int quad_level = 8, int grid = 16, Backend backend = Backend::Exact,
                      const PowerSymbolFamily* preset = nullptr);

    /// Residue at s = (k - n_gamma)/2 of s -> Tr(A^s T_gamma).
    Cplx residue_gamma(int gamma, int k);
    /// eta^gamma_k at an arbitrary point of Fix(gamma).
    Cplx density_at(int gamma, int k, const RVec& x);
    Cplx residue_isotypic(int irrep, int k);
    Cplx residue_orbifold(int k);
    /// Stratumwise densities integrated over each component; their sum over
    /// all rows equals residue_orbifold(k).
    std::vector<StratumRow> strata_table(int k, const Stratification& strat);
    /// Max defect of eta^{h g h^-1}_k(h x) = eta^g_k(x) over the group.
    double covariance_defect(int k);

    const std::vector<std::vector<FixedStratum>>& fixed_sets() const { return fixed_; }
    const FiniteGroupAction& group() const { return group_; }
    const ClassicalSymbol& symbol() const { return sym_; }
    double equivariance() const { return equi_defect_; }
    int k_max() const { return k_max_; }
    const PowerSymbolFamily& power_family() const { return fam_; }

private:
    const ReducedDensity& reduced(int gamma, int k);

    ClassicalSymbol sym_;
    FiniteGroupAction group_;
    int k_max_;
    int grid_;
    double equi_defect_ = 0.0;
    PowerSymbolFamily fam_;
    std::vector<std::vector<FixedStratum>> fixed_;
    std::map<int, SphereQuad> quads_;
    int quad_level_;
    std::map<std::pair<int, int>, ReducedDensity> cache_;
};

}  // namespace orbizeta
