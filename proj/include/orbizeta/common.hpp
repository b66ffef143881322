#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbizeta {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

// Multi-index over a small number of variables.
using MIdx = std::vector<int>;

inline int midx_abs(const MIdx& a) {
    int s = 0;
    for (int v : a) s += v;
    return s;
}

inline double midx_factorial(const MIdx& a) {
    double f = 1.0;
    for (int v : a)
        for (int j = 2; j <= v; ++j) f *= j;
    return f;
}

// All multi-indices over `dims` variables with |alpha| == total.
std::vector<MIdx> multi_indices_of_weight(int dims, int total);
// All multi-indices with |alpha| <= total.
std::vector<MIdx> multi_indices_up_to(int dims, int total);

class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

class ComputeError : public std::runtime_error {
public:
    explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

// Gamma function on the complex plane (Lanczos, g = 7).
Cplx gamma_cplx(Cplx z);

inline long long binom_int(int n, int r) {
    if (r < 0 || r > n) return 0;
    long long v = 1;
    for (int i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
    return v;
}

// Generalized binomial coefficient binom(s, r) as a polynomial in s,
// returned as coefficient vector c[0] + c[1] s + ... (degree r).
CVec binom_poly(int r);

// Evaluate a coefficient-vector polynomial at s.
Cplx poly_eval(const CVec& c, Cplx s);

// Multiply polynomial by (s + shift).
CVec poly_mul_linear(const CVec& c, Cplx shift);

CVec poly_mul(const CVec& a, const CVec& b);

}  // namespace orbizeta
