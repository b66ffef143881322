#include "orbizeta/power.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace orbizeta {

namespace {

TermList xi_derivative_multi(const SymbolTerm& t, const MIdx& alpha, double scale) {
    TermList cur{t};
    for (int i = 0; i < int(alpha.size()); ++i)
        for (int rep = 0; rep < alpha[i]; ++rep) {
            TermList next;
            for (const auto& u : cur) {
                TermList d = xi_derivative(u, i, scale);
                next.insert(next.end(), d.begin(), d.end());
            }
            cur = std::move(next);
            if (cur.empty()) return cur;
        }
    return cur;
}

SymbolTerm x_derivative_multi(const SymbolTerm& t, const MIdx& alpha) {
    SymbolTerm cur = t;
    for (int i = 0; i < int(alpha.size()); ++i)
        for (int rep = 0; rep < alpha[i]; ++rep) cur = x_derivative(cur, i);
    return cur;
}

}  // namespace

ResolventSymbolFamily resolvent_recursion(const ClassicalSymbol& sym, int J) {
    if (!sym.laplace_type)
        throw SpecError("resolvent recursion requires a Laplace-type symbol");
    ResolventSymbolFamily fam;
    fam.scale = sym.scale;
    fam.m = sym.m;
    fam.k = sym.k;
    fam.comps.assign(J + 1, {});

    SymbolTerm b0;
    b0.coeff = Coefficient::constant(Mat::Identity(sym.k, sym.k), sym.m);
    b0.xi.assign(sym.m, 0);
    b0.rad = Radial::resolvent(0, 1);
    fam.comps[0].push_back(b0);

    int a_max = int(sym.comps.size()) - 1;
    for (int j = 1; j <= J; ++j) {
        TermList acc;
        for (int k = 0; k <= std::min(j, a_max); ++k) {
            for (int l = 0; l < j; ++l) {
                int aw = j - k - l;
                if (aw < 0) continue;
                for (const auto& alpha : multi_indices_of_weight(sym.m, aw)) {
                    double fac = 1.0 / midx_factorial(alpha);
                    for (const auto& ta : sym.comps[k]) {
                        TermList da = xi_derivative_multi(ta, alpha, sym.scale);
                        if (da.empty()) continue;
                        for (const auto& tb : fam.comps[l]) {
                            SymbolTerm db = x_derivative_multi(tb, alpha);
                            for (const auto& d : da) {
                                for (const auto& dr : to_resolvent(d, sym.scale)) {
                                    SymbolTerm p = term_multiply(dr, db, sym.scale);
                                    // left factor -b_{-2} = -(q-lambda)^{-1}
                                    p.rad.res += 1;
                                    p.coeff = p.coeff.scaled(-fac);
                                    acc.push_back(std::move(p));
                                }
                            }
                        }
                    }
                }
            }
        }
        normalize_terms(acc);
        fam.comps[j] = std::move(acc);
    }
    return fam;
}

CVec poly_shift(const CVec& p, Cplx a) {
    int n = int(p.size());
    CVec out = CVec::Zero(n);
    for (int deg = 0; deg < n; ++deg) {
        Cplx apow = 1.0;
        for (int k = deg; k >= 0; --k) {
            out(k) += p(deg) * double(binom_int(deg, k)) * apow;
            apow *= a;
        }
    }
    return out;
}

PowerSymbolFamily cauchy_power(const ResolventSymbolFamily& fam) {
    PowerSymbolFamily out;
    out.scale = fam.scale;
    out.m = fam.m;
    out.k = fam.k;
    out.comps.assign(fam.comps.size(), {});
    for (size_t j = 0; j < fam.comps.size(); ++j) {
        for (const auto& t : fam.comps[j]) {
            if (t.rad.kind != Radial::Kind::Resolvent)
                throw ComputeError("cauchy_power expects resolvent-ring terms");
            int a = t.rad.lam, r = t.rad.res;
            if (r <= 0) continue;  // entire in lambda
            PowerTerm pt;
            pt.polyS = poly_shift(binom_poly(r - 1), Cplx(double(a)));
            if ((r + 1) % 2 == 1) pt.polyS = -pt.polyS;
            pt.coeff = t.coeff;
            pt.xi = t.xi;
            pt.qshift = a - r + 1;
            out.comps[j].push_back(std::move(pt));
        }
    }
    return out;
}

PowerSymbolFamily cauchy_power_contour(const ResolventSymbolFamily& fam) {
    PowerSymbolFamily out;
    out.scale = fam.scale;
    out.m = fam.m;
    out.k = fam.k;
    out.comps.assign(fam.comps.size(), {});
    for (size_t j = 0; j < fam.comps.size(); ++j) {
        for (const auto& t : fam.comps[j]) {
            int a = t.rad.lam, r = t.rad.res;
            if (r <= 0) continue;
            // with q = 1 the contour value is the degree r-1 polynomial in s
            // itself; recover it through r interpolation nodes
            Mat V(r, r);
            CVec rhs(r);
            for (int i = 0; i < r; ++i) {
                Cplx si(-2.15 + 0.8 * i, 0.0);
                rhs(i) = numeric_contour(a, r, si, 1.0);
                Cplx p = 1.0;
                for (int c = 0; c < r; ++c) {
                    V(i, c) = p;
                    p *= si;
                }
            }
            PowerTerm pt;
            pt.polyS = V.colPivHouseholderQr().solve(rhs);
            pt.coeff = t.coeff;
            pt.xi = t.xi;
            pt.qshift = a - r + 1;
            out.comps[j].push_back(std::move(pt));
        }
    }
    return out;
}

Cplx cauchy_rule(int lam, int res, Cplx s, double q) {
    if (res <= 0) return 0.0;
    Cplx b = poly_eval(binom_poly(res - 1), s + double(lam));
    double sign = ((res + 1) % 2 == 0) ? 1.0 : -1.0;
    return sign * b * std::pow(Cplx(q), s + double(lam - res + 1));
}

Cplx numeric_contour(int lam, int res, Cplx s, double q, double tol) {
    if (res <= 0) return 0.0;
    if (q <= 0.0) throw ComputeError("numeric_contour needs q > 0");
    // Shift so that Re(s + lam - kp) lands in [-2.5, -1.5]; then
    //   lambda^(s+lam) (q-lambda)^(-res)
    //     = (-1)^res lambda^(s+lam-kp) sum_i binom(kp, i) q^(kp-i)
    //       (lambda-q)^(i-res),
    // where terms with i >= res are entire and integrate to zero.
    Cplx sa = s + double(lam);
    int kp = int(std::ceil(sa.real() + 1.5));
    if (kp < 0) kp = 0;
    Cplx sp = sa - double(kp);
    double sigma = q / 2.0;
    Cplx total = 0.0;
    double rsign = (res % 2 == 0) ? 1.0 : -1.0;
    using boost::math::quadrature::gauss_kronrod;
    for (int i = 0; i < res && i <= kp; ++i) {
        int p = res - i;  // (lambda - q)^{-p}
        // t = sinh(v) turns the algebraic tail |t|^(Re sp - p) into an
        // exponential one, which the infinite-interval rule resolves fully
        auto f = [&](double v) -> Cplx {
            Cplx lambda(sigma, std::sinh(v));
            return std::cosh(v) * std::pow(lambda, sp) * std::pow(lambda - q, -p);
        };
        // |f| <= e^{(Re sp - p + 1)|v|} with exponent <= -1/2, so the window
        // below captures the integral to well under 1e-12
        Cplx piece = gauss_kronrod<double, 61>::integrate(f, -60.0, 60.0, 14, tol);
        // -1/(2 pi i) over the downward line contributes +1/(2 pi) int f dt
        total += rsign * double(binom_int(kp, i)) * std::pow(q, double(kp - i)) * piece /
                 kTwoPi;
    }
    return total;
}

PowerSymbolFamily binomial_oracle(const ClassicalSymbol& sym, int J) {
    if (!sym.laplace_type)
        throw SpecError("binomial oracle requires a Laplace-type symbol");
    // sub-principal part L (everything below the scalar principal symbol)
    TermList L;
    for (size_t j = 1; j < sym.comps.size(); ++j)
        for (const auto& t : sym.comps[j]) {
            for (int i = 0; i < sym.m; ++i)
                if (!t.coeff.x_derivative(i).is_zero(1e-13))
                    throw SpecError("binomial oracle requires x-independent coefficients");
            L.push_back(t);
        }

    PowerSymbolFamily out;
    out.scale = sym.scale;
    out.m = sym.m;
    out.k = sym.k;
    out.comps.assign(J + 1, {});

    TermList Lp;  // L^p, starting with p = 0
    SymbolTerm one;
    one.coeff = Coefficient::constant(Mat::Identity(sym.k, sym.k), sym.m);
    one.xi.assign(sym.m, 0);
    one.rad = Radial::power(0.0);
    Lp.push_back(one);

    for (int p = 0; p <= J; ++p) {
        CVec bp = binom_poly(p);
        for (const auto& t : Lp) {
            double rr = t.rad.rho.real();
            int rho = int(std::llround(rr));
            if (std::abs(rr - rho) > 1e-12 || std::abs(t.rad.rho.imag()) > 1e-12)
                throw ComputeError("binomial oracle met a non-integer radial power");
            int deg = midx_abs(t.xi) + 2 * rho;
            int j = 2 * p - deg;
            if (j < 0 || j > J) continue;
            PowerTerm pt;
            pt.polyS = bp;
            pt.coeff = t.coeff.scaled(std::pow(sym.scale, -rho));
            pt.xi = t.xi;
            pt.qshift = rho - p;
            out.comps[j].push_back(std::move(pt));
        }
        if (p < J) {
            TermList next;
            for (const auto& a : Lp)
                for (const auto& b : L) next.push_back(term_multiply(a, b, sym.scale));
            normalize_terms(next);
            Lp = std::move(next);
        }
    }
    return out;
}

Mat eval_power_component(const PowerSymbolFamily& fam, int j, Cplx s, const RVec& x,
                         const RVec& xi) {
    Mat out = Mat::Zero(fam.k, fam.k);
    if (j < 0 || j >= int(fam.comps.size())) return out;
    double q = fam.scale * xi.squaredNorm();
    for (const auto& t : fam.comps[j]) {
        Cplx mono = 1.0;
        for (int i = 0; i < int(t.xi.size()); ++i) mono *= std::pow(xi(i), t.xi[i]);
        Cplx v = poly_eval(t.polyS, s) * mono * std::pow(Cplx(q), s + double(t.qshift));
        out += v * t.coeff.eval(x);
    }
    return out;
}

bool trace_class_gate(Cplx s, int m, double order) {
    return s.real() < -double(m) / order;
}

}  // namespace orbizeta
