#pragma once

#include <functional>

#include "orbizeta/symbol.hpp"

namespace orbizeta {

/// Brute-force model operator A = scale * (-Laplacian) + c0 + first-order
/// part + potential on the torus with the given periods, acted on by `group`.
struct LatticeModel {
    int m = 1;
    RVec periods;
    FiniteGroupAction group;
    double scale = 1.0;
    double c0 = 1.0;
    int k = 1;                                  // fiber dimension
    std::optional<Coefficient> potential;       // variable part (trig)
    std::vector<Coefficient> first_order;       // b_i(x) D_i terms
    int cutoff = 16;                            // Fourier modes |n_i| <= cutoff
    long budget = 20000;                        // max matrix dimension

    bool constant_coefficients() const;
};

/// Exact continuation of the twisted Epstein zeta
///   zeta_gamma(z) = tr(F) sum_{nu in Lambda_gamma} phase(nu)
///                   (scale |nu|^2 + c0)^(-z).
struct TwistedZetaContinuation {
    int gamma = 0;
    int rank = 0;           // n_gamma = dim Lambda_gamma
    RMat basis;             // m x rank, physical frequency basis of Lambda_gamma
    RMat Q;                 // rank x rank scaled Gram matrix
    RVec h;                 // phase(nu(y)) = e^{i y.h}
    bool phase_trivial = true;
    Cplx fiber_trace{1, 0};
    double covol = 1.0;     // sqrt(det Q)
    double c0 = 1.0;
    // simple poles (z-location, residue), phase-trivial case only
    std::vector<std::pair<double, Cplx>> poles;
    std::function<Cplx(Cplx)> eval;
};

TwistedZetaContinuation constant_case_zeta(const LatticeModel& model, int gamma);

/// Raw Dirichlet series of the twisted zeta (converges for Re z > m/2 + 1;
/// used to cross-check the continuation at Re z = 3).
Cplx direct_sum(const TwistedZetaContinuation& tz, Cplx z, double cut = 3e5);

/// Residue of s -> Tr(A^s T_gamma) = zeta_gamma(-s) at s = (k - m)/2, read
/// off the pole ledger (0 when there is no pole there).
Cplx oracle_residue_s(const TwistedZetaContinuation& tz, int k, int m);

/// Exact twisted theta Tr(T_gamma e^{-tA}) for constant-coefficient models
/// (mode sum over the fixed sublattice, truncated to machine precision).
Cplx twisted_theta(const LatticeModel& model, int gamma, double t);

struct NumericSpectrum {
    int m = 0, k = 1, N = 0;
    double scale = 1.0, c0 = 0.0;
    std::vector<std::vector<int>> modes;  // integer mode vectors, fiber-major
    RVec evals;
    Mat evecs;
    double herm_defect = 0.0;
};

NumericSpectrum numeric_spectrum(const LatticeModel& model);

/// U_gamma: the permutation-with-phase action of gamma on Fourier modes,
/// tensored with the fiber matrix.
Mat twist_matrix(const LatticeModel& model, const NumericSpectrum& spec, int gamma);

/// Precomputed eigenbasis pairing for fast heat traces
/// Tr(U e^{-tH}) = sum_a diag_a e^{-t lambda_a}.
struct TwistedHeat {
    RVec evals;
    CVec diag;
    double cutoff_sq = 0.0;  // N^2, for the e^{-t N^2} cutoff error bound
    Cplx operator()(double t) const;
};

TwistedHeat equivariant_heat_trace(const NumericSpectrum& spec, const Mat& U);

struct HeatFitResult {
    std::vector<Cplx> res_by_k;   // residues of Tr(A^s T) at s = (k-m)/2
    std::vector<bool> checked;    // false where the Gamma factor degenerates
    CVec coeffs;                  // fitted c_j of sum c_j t^((j-n)/2)
    double cond = 0.0;
};

/// Least-squares fit of samples f(t_i) ~ sum_{j<=J} c_j t^((j-n)/2) on a
/// geometric grid, mapped to residues (J = k_max + 2).
HeatFitResult heat_fit(const std::function<Cplx(double)>& f, int n, int m, int k_max,
                       int N);

HeatFitResult heat_fit_residues(const LatticeModel& model, const NumericSpectrum& spec,
                                int gamma, int n_gamma, int k_max);

/// Isotypic residues from the projected numeric spectrum: heat trace of
/// P_i e^{-tH} with P_i the isotypic projection in mode space.
HeatFitResult isotypic_fit_residues(const LatticeModel& model, const NumericSpectrum& spec,
                                    int irrep, int k_max);

}  // namespace orbizeta
