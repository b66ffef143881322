#pragma once

#include <map>
#include <optional>

#include "orbizeta/common.hpp"

namespace orbizeta {

/// One element of a finite group of fiber-twisted isometries.
/// The base action is x |-> rot x + trans, the fiber action is the
/// unitary matrix `fiber`.
struct IsometryElement {
    int index = 0;
    RMat rot;    // m x m orthogonal
    RVec trans;  // m, reduced mod periods for torus models
    Mat fiber;   // k x k unitary
};

/// A finite group acting on the model by isometries, together with its
/// multiplication structure, conjugacy classes and character table.
/// Irrep 0 is always the trivial one-dimensional representation.
struct FiniteGroupAction {
    std::vector<IsometryElement> elements;
    std::vector<std::vector<int>> mult;  // mult[a][b] = index of a*b
    std::vector<int> inv;
    int identity = 0;
    std::vector<std::vector<int>> classes;
    std::vector<int> class_of;        // element index -> class index
    Mat chars;                        // n_irreps x n_classes
    std::vector<int> dims;            // k_i
    std::vector<std::string> names;   // irrep labels
    int m = 0;                        // base dimension
    int fiber_dim = 1;                // k
    std::optional<RVec> periods;      // torus periods, if a torus model

    int size() const { return int(elements.size()); }
    int n_irreps() const { return int(dims.size()); }
    int mul(int a, int b) const { return mult[a][b]; }
    int conj(int g, int h) const { return mul(mul(h, g), inv[h]); }  // h g h^-1
    Cplx character(int irrep, int elem) const { return chars(irrep, class_of[elem]); }
};

struct GroupDiagnostics {
    double assoc_defect = 0.0;        // group axiom violations (index level: 0/1)
    double rot_orthogonality = 0.0;
    double fiber_unitarity = 0.0;
    double fiber_homomorphism = 0.0;
    double char_orthogonality = 0.0;
    double sum_squares_defect = 0.0;  // |sum k_i^2 - |G||
    double lattice_defect = 0.0;      // torus models: rot must preserve the period lattice
    double max_violation() const;
};

struct GroupGenerator {
    RMat rot;
    RVec trans;
    Mat fiber;
};

/// Trivial group acting on R^m with fiber dimension k.
FiniteGroupAction trivial_group(int m, int k, std::optional<RVec> periods = {});

/// Cyclic group of order n generated by `gen` (gen^n must be the identity).
FiniteGroupAction cyclic_group(int n, const GroupGenerator& gen,
                               std::optional<RVec> periods = {});

/// Dihedral group of order 2n generated by a rotation r (order n) and a
/// reflection s.  dihedral(1) is C2, dihedral(2) the Klein four-group.
FiniteGroupAction dihedral_group(int n, const GroupGenerator& r,
                                 const GroupGenerator& s,
                                 std::optional<RVec> periods = {});

/// Direct product of two cyclic groups with commuting generators.
FiniteGroupAction cyclic_product_group(int n1, const GroupGenerator& g1, int n2,
                                       const GroupGenerator& g2,
                                       std::optional<RVec> periods = {});

/// Group generated by arbitrary orthogonal generators, closed exhaustively.
/// A character table must be supplied (rows = irreps, columns = classes in
/// the order the builder reports) unless the group turns out to be one of
/// the built-in families; it is validated by orthogonality.
FiniteGroupAction group_from_generators(const std::vector<GroupGenerator>& gens,
                                        std::optional<RVec> periods = {},
                                        int max_order = 256);

/// Attach a user-supplied character table (rows x classes) to a group that
/// was built without one; validates row orthogonality and dimensions.
void attach_character_table(FiniteGroupAction& g, const Mat& chars,
                            const std::vector<int>& dims,
                            const std::vector<std::string>& names);

GroupDiagnostics verify_action(const FiniteGroupAction& g,
                               std::optional<RVec> periods = {});

/// Weights w(gamma) = k_i chi_i(gamma^-1) / |Gamma| of the isotypic
/// projection onto irrep i (0-based).
std::vector<Cplx> isotypic_weights(const FiniteGroupAction& g, int irrep);

/// Regular-representation projection matrix built from isotypic_weights.
Mat regular_projection(const FiniteGroupAction& g, int irrep);

/// True if `rot` maps the period lattice diag(periods) Z^m to itself.
bool preserves_lattice(const RMat& rot, const RVec& periods, double tol = 1e-9);

/// Integer matrix P^-1 rot P for a lattice-preserving rot (throws otherwise).
IMat lattice_matrix(const RMat& rot, const RVec& periods, double tol = 1e-9);

}  // namespace orbizeta
