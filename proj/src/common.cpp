#include "orbizeta/common.hpp"

namespace orbizeta {

std::vector<MIdx> multi_indices_of_weight(int dims, int total) {
    std::vector<MIdx> out;
    if (dims == 0) {
        if (total == 0) out.push_back({});
        return out;
    }
    MIdx cur(dims, 0);
    // lexicographic enumeration by recursion on the first slot
    std::vector<MIdx> rest;
    for (int first = total; first >= 0; --first) {
        rest = multi_indices_of_weight(dims - 1, total - first);
        for (auto& r : rest) {
            MIdx a;
            a.reserve(dims);
            a.push_back(first);
            a.insert(a.end(), r.begin(), r.end());
            out.push_back(std::move(a));
        }
    }
    return out;
}

std::vector<MIdx> multi_indices_up_to(int dims, int total) {
    std::vector<MIdx> out;
    for (int t = 0; t <= total; ++t) {
        auto w = multi_indices_of_weight(dims, t);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

Cplx gamma_cplx(Cplx z) {
    // Lanczos approximation, g = 7, 9 coefficients.
    static const double g = 7.0;
    static const double c[9] = {
        0.99999999999980993,    676.5203681218851,     -1259.1392167224028,
        771.32342877765313,     -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};
    if (z.real() < 0.5) {
        // reflection
        return kPi / (std::sin(kPi * z) * gamma_cplx(1.0 - z));
    }
    z -= 1.0;
    Cplx x = c[0];
    for (int i = 1; i < 9; ++i) x += c[i] / (z + Cplx(double(i), 0.0));
    Cplx t = z + g + 0.5;
    return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

CVec binom_poly(int r) {
    // binom(s, r) = s (s-1) ... (s-r+1) / r!
    CVec p(1);
    p(0) = 1.0;
    for (int i = 0; i < r; ++i) p = poly_mul_linear(p, Cplx(-double(i), 0.0));
    double rf = 1.0;
    for (int j = 2; j <= r; ++j) rf *= j;
    return p / rf;
}

Cplx poly_eval(const CVec& c, Cplx s) {
    Cplx v = 0.0;
    for (int i = int(c.size()) - 1; i >= 0; --i) v = v * s + c(i);
    return v;
}

CVec poly_mul_linear(const CVec& c, Cplx shift) {
    CVec out = CVec::Zero(c.size() + 1);
    for (int i = 0; i < c.size(); ++i) {
        out(i) += c(i) * shift;
        out(i + 1) += c(i);
    }
    return out;
}

CVec poly_mul(const CVec& a, const CVec& b) {
    CVec out = CVec::Zero(a.size() + b.size() - 1);
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
    return out;
}

}  // namespace orbizeta
