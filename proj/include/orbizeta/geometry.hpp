#pragma once

#include "orbizeta/group.hpp"

namespace orbizeta {

/// Smith normal form of an integer matrix: B = U * S * V with U, V
/// unimodular and S diagonal (stored as the full matrix).
struct SmithForm {
    IMat U, S, V;
    IMat Uinv, Vinv;
};
SmithForm smith_normal_form(const IMat& B);

/// One connected component of the fixed-point set of a group element.
struct FixedStratum {
    int gamma = 0;
    int component_id = 0;
    RVec base_point;    // a point on the component
    RMat fixed_basis;   // m x n orthonormal
    RMat normal_basis;  // m x (m-n) orthonormal
    RMat tbar;          // (m-n) x (m-n), restriction of rot to the normal space
    int n = 0;          // fixed-set dimension
    double d_weight = 1.0;  // |det(tbar - I)|^-1
    RMat lattice_dirs;  // m x n: translation lattice of the component subtorus
};

/// fixed_basis / normal_basis / tbar of the linear part of gamma.
/// Kernel directions are split off with singular-value threshold 1e-9.
void fixed_subspace(const RMat& rot, RMat& fixed_basis, RMat& normal_basis, RMat& tbar);

/// |det(tbar - I)|^-1; 1 for an empty normal space.  Throws on an
/// eigenvalue-1 degeneracy, which signals an inconsistent fixed space.
double normal_determinant(const RMat& tbar);

/// All connected components of {x : rot x + trans = x mod diag(periods) Z^m}.
/// Components are affine subtori; the list is empty for fixed-point-free
/// elements.  Candidate base points are enumerated through the Smith normal
/// form of the lattice matrix of rot - I.
std::vector<FixedStratum> affine_fixed_set(const IsometryElement& gamma, const RVec& periods);

/// Fixed components of every group element, indexed by element.
std::vector<std::vector<FixedStratum>> all_fixed_sets(const FiniteGroupAction& g,
                                                      const RVec& periods);

/// A representative isotropy subgroup (orbit type).
struct OrbitType {
    int class_id = 0;
    std::vector<int> subgroup;  // sorted element indices
    int order = 1;
};

/// One connected piece of a stratum, carried by the fixed set of its
/// isotropy subgroup.
struct StratumComponent {
    int type_id = 0;
    RVec base_point;
    RMat fixed_basis;   // m x n
    RMat lattice_dirs;  // m x n
    int n = 0;
};

struct Stratification {
    std::vector<OrbitType> types;
    std::vector<std::vector<StratumComponent>> strata;  // per type
    // poset(i, j) != 0 iff type i is subconjugate to type j
    Eigen::MatrixXi poset;
};

/// Subgroup {gamma : gamma x = x mod lattice} of the point x.
std::vector<int> isotropy_group(const RVec& x, const FiniteGroupAction& g,
                                const RVec& periods, double tol = 1e-9);

/// Enumerates occurring orbit types and the canonical stratification of the
/// torus under g.
Stratification orbit_type_poset(const FiniteGroupAction& g, const RVec& periods);

/// True if h1 is conjugate (as a subgroup) to a subgroup of h2.
bool subconjugate(const FiniteGroupAction& g, const std::vector<int>& h1,
                  const std::vector<int>& h2);

/// Fixed set of a whole subgroup: solves the joint congruence for all its
/// elements.
std::vector<FixedStratum> subgroup_fixed_set(const FiniteGroupAction& g,
                                             const std::vector<int>& subgroup,
                                             const RVec& periods);

}  // namespace orbizeta
