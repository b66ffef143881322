#include "orbizeta/symbol.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace orbizeta {

namespace {

const Cplx kI{0.0, 1.0};

bool vec_close(const RVec& a, const RVec& b, double tol = 1e-12) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

// ---------------------------------------------------------------- Coefficient

Coefficient Coefficient::constant(const Mat& c, int m) {
    TrigPolyData d;
    d.freq_scale = RVec::Ones(m);
    d.terms[std::vector<int>(m, 0)] = c;
    return trig(std::move(d));
}

Coefficient Coefficient::trig(TrigPolyData d) {
    Coefficient c;
    c.kind_ = Kind::Trig;
    c.trig_ = std::move(d);
    return c;
}

Coefficient Coefficient::jet(JetData d) {
    Coefficient c;
    c.kind_ = Kind::Jet;
    c.jet_ = std::move(d);
    return c;
}

int Coefficient::dim_x() const {
    return kind_ == Kind::Trig ? int(trig_.freq_scale.size()) : int(jet_.base.size());
}

int Coefficient::dim_fiber() const {
    if (kind_ == Kind::Trig) {
        if (trig_.terms.empty()) return 0;
        return int(trig_.terms.begin()->second.rows());
    }
    if (jet_.coeffs.empty()) return 0;
    return int(jet_.coeffs.begin()->second.rows());
}

Mat Coefficient::eval(const RVec& x) const {
    int k = dim_fiber();
    Mat out = Mat::Zero(k, k);
    if (kind_ == Kind::Trig) {
        for (const auto& [n, c] : trig_.terms) {
            double phase = 0.0;
            for (int i = 0; i < int(n.size()); ++i)
                phase += trig_.freq_scale(i) * n[i] * x(i);
            out += std::exp(kI * phase) * c;
        }
    } else {
        RVec h = x - jet_.base;
        for (const auto& [alpha, c] : jet_.coeffs) {
            double mono = 1.0;
            for (int i = 0; i < int(alpha.size()); ++i)
                mono *= std::pow(h(i), alpha[i]);
            out += mono * c;
        }
    }
    return out;
}

Coefficient Coefficient::x_derivative(int axis) const {
    if (kind_ == Kind::Trig) {
        TrigPolyData d;
        d.freq_scale = trig_.freq_scale;
        for (const auto& [n, c] : trig_.terms) {
            // D = -i d/dx applied to e^{i nu.x} gives a factor nu_axis
            double nu = trig_.freq_scale(axis) * n[axis];
            if (nu == 0.0) continue;
            d.terms[n] = nu * c;
        }
        return trig(std::move(d));
    }
    if (jet_.order == 0)
        throw ComputeError("jet order exhausted by x-derivative");
    JetData d;
    d.base = jet_.base;
    d.order = jet_.order - 1;
    for (const auto& [alpha, c] : jet_.coeffs) {
        if (alpha[axis] == 0) continue;
        MIdx beta = alpha;
        beta[axis] -= 1;
        Mat term = -kI * double(alpha[axis]) * c;
        auto it = d.coeffs.find(beta);
        if (it == d.coeffs.end())
            d.coeffs[beta] = term;
        else
            it->second += term;
    }
    return jet(std::move(d));
}

Coefficient Coefficient::dir_derivative(const RVec& dir) const {
    Coefficient out = scaled(0.0);
    for (int i = 0; i < dir.size(); ++i) {
        if (dir(i) == 0.0) continue;
        out.add_in_place(x_derivative(i), dir(i));
    }
    return out;
}

Coefficient Coefficient::scaled(Cplx f) const {
    Coefficient c = *this;
    if (kind_ == Kind::Trig) {
        if (f == Cplx(0.0)) {
            c.trig_.terms.clear();
        } else {
            for (auto& [n, m] : c.trig_.terms) m *= f;
        }
    } else {
        if (f == Cplx(0.0)) {
            c.jet_.coeffs.clear();
        } else {
            for (auto& [a, m] : c.jet_.coeffs) m *= f;
        }
    }
    return c;
}

Coefficient Coefficient::conjugated(const Mat& fiber) const {
    Coefficient c = *this;
    Mat finv = fiber.inverse();
    if (kind_ == Kind::Trig) {
        for (auto& [n, m] : c.trig_.terms) m = fiber * m * finv;
    } else {
        for (auto& [a, m] : c.jet_.coeffs) m = fiber * m * finv;
    }
    return c;
}

Coefficient Coefficient::pullback(const RMat& rot, const RVec& trans) const {
    if (kind_ == Kind::Jet) {
        if (trans.cwiseAbs().maxCoeff() > 1e-12 ||
            (rot * jet_.base - jet_.base).cwiseAbs().maxCoeff() > 1e-9)
            throw ComputeError("jet pullback requires a rotation fixing the base point");
        // c(rot^-1 x): substitute h -> rot^T h in each Taylor monomial
        JetData d;
        d.base = jet_.base;
        d.order = jet_.order;
        RMat rt = rot.transpose();
        for (const auto& [alpha, c] : jet_.coeffs) {
            // expand prod_i ((rt h)_i)^alpha_i
            std::map<MIdx, double> poly;
            poly[MIdx(alpha.size(), 0)] = 1.0;
            for (int i = 0; i < int(alpha.size()); ++i) {
                for (int rep = 0; rep < alpha[i]; ++rep) {
                    std::map<MIdx, double> next;
                    for (const auto& [mu, v] : poly) {
                        for (int j = 0; j < int(alpha.size()); ++j) {
                            if (rt(i, j) == 0.0) continue;
                            MIdx nu = mu;
                            nu[j] += 1;
                            next[nu] += v * rt(i, j);
                        }
                    }
                    poly = std::move(next);
                }
            }
            for (const auto& [mu, v] : poly) {
                auto it = d.coeffs.find(mu);
                if (it == d.coeffs.end())
                    d.coeffs[mu] = v * c;
                else
                    it->second += v * c;
            }
        }
        return jet(std::move(d));
    }
    // e^{i nu . (rot^T x - rot^T trans)} = e^{i (rot nu).x} e^{-i (rot nu).trans}
    TrigPolyData d;
    d.freq_scale = trig_.freq_scale;
    int m = int(trig_.freq_scale.size());
    for (const auto& [n, c] : trig_.terms) {
        RVec nu(m);
        for (int i = 0; i < m; ++i) nu(i) = trig_.freq_scale(i) * n[i];
        RVec nup = rot * nu;
        std::vector<int> np(m);
        for (int i = 0; i < m; ++i) {
            double raw = nup(i) / trig_.freq_scale(i);
            np[i] = int(std::llround(raw));
            if (std::abs(raw - np[i]) > 1e-9)
                throw ComputeError("pullback frequency leaves the dual lattice");
        }
        Cplx phase = std::exp(-kI * nup.dot(trans));
        auto it = d.terms.find(np);
        if (it == d.terms.end())
            d.terms[np] = phase * c;
        else
            it->second += phase * c;
    }
    return trig(std::move(d));
}

void Coefficient::add_in_place(const Coefficient& other, Cplx f) {
    if (kind_ != other.kind_)
        throw ComputeError("cannot add coefficients of different kinds");
    if (kind_ == Kind::Trig) {
        if (!vec_close(trig_.freq_scale, other.trig_.freq_scale))
            throw ComputeError("trig coefficient frequency scales differ");
        for (const auto& [n, c] : other.trig_.terms) {
            auto it = trig_.terms.find(n);
            if (it == trig_.terms.end())
                trig_.terms[n] = f * c;
            else
                it->second += f * c;
        }
    } else {
        if (!vec_close(jet_.base, other.jet_.base))
            throw ComputeError("jet base points differ");
        jet_.order = std::min(jet_.order, other.jet_.order);
        for (const auto& [a, c] : other.jet_.coeffs) {
            auto it = jet_.coeffs.find(a);
            if (it == jet_.coeffs.end())
                jet_.coeffs[a] = f * c;
            else
                it->second += f * c;
        }
    }
}

Coefficient Coefficient::mat_mul(const Coefficient& other) const {
    if (kind_ != other.kind_)
        throw ComputeError("cannot multiply coefficients of different kinds");
    if (kind_ == Kind::Trig) {
        if (!vec_close(trig_.freq_scale, other.trig_.freq_scale))
            throw ComputeError("trig coefficient frequency scales differ");
        TrigPolyData d;
        d.freq_scale = trig_.freq_scale;
        for (const auto& [n1, c1] : trig_.terms)
            for (const auto& [n2, c2] : other.trig_.terms) {
                std::vector<int> n(n1.size());
                for (size_t i = 0; i < n.size(); ++i) n[i] = n1[i] + n2[i];
                Mat prod = c1 * c2;
                auto it = d.terms.find(n);
                if (it == d.terms.end())
                    d.terms[n] = prod;
                else
                    it->second += prod;
            }
        return trig(std::move(d));
    }
    if (!vec_close(jet_.base, other.jet_.base))
        throw ComputeError("jet base points differ");
    JetData d;
    d.base = jet_.base;
    d.order = std::min(jet_.order, other.jet_.order);
    for (const auto& [a1, c1] : jet_.coeffs)
        for (const auto& [a2, c2] : other.jet_.coeffs) {
            MIdx a(a1.size());
            int tot = 0;
            for (size_t i = 0; i < a.size(); ++i) {
                a[i] = a1[i] + a2[i];
                tot += a[i];
            }
            if (tot > d.order) continue;
            Mat prod = c1 * c2;
            auto it = d.coeffs.find(a);
            if (it == d.coeffs.end())
                d.coeffs[a] = prod;
            else
                it->second += prod;
        }
    return jet(std::move(d));
}

double Coefficient::max_abs() const {
    double m = 0.0;
    if (kind_ == Kind::Trig) {
        for (const auto& [n, c] : trig_.terms) m = std::max(m, c.cwiseAbs().maxCoeff());
    } else {
        for (const auto& [a, c] : jet_.coeffs) m = std::max(m, c.cwiseAbs().maxCoeff());
    }
    return m;
}

void Coefficient::prune(double tol) {
    if (kind_ == Kind::Trig) {
        for (auto it = trig_.terms.begin(); it != trig_.terms.end();) {
            if (it->second.cwiseAbs().maxCoeff() <= tol)
                it = trig_.terms.erase(it);
            else
                ++it;
        }
    } else {
        for (auto it = jet_.coeffs.begin(); it != jet_.coeffs.end();) {
            if (it->second.cwiseAbs().maxCoeff() <= tol)
                it = jet_.coeffs.erase(it);
            else
                ++it;
        }
    }
}

bool Coefficient::is_zero(double tol) const { return max_abs() <= tol; }

// --------------------------------------------------------------------- Radial

Radial Radial::power(Cplx rho) {
    Radial r;
    r.kind = Kind::Power;
    r.rho = rho;
    return r;
}

Radial Radial::resolvent(int lam, int res) {
    Radial r;
    r.kind = Kind::Resolvent;
    r.lam = lam;
    r.res = res;
    return r;
}

Cplx Radial::degree() const {
    if (kind == Kind::Power) return 2.0 * rho;
    return Cplx(2.0 * (lam - res), 0.0);
}

// ------------------------------------------------------- term-level operations

TermList xi_derivative(const SymbolTerm& t, int axis, double scale) {
    // plain d/d xi_axis (no -i factor)
    TermList out;
    if (t.xi[axis] > 0) {
        SymbolTerm s = t;
        s.xi[axis] -= 1;
        s.coeff = t.coeff.scaled(double(t.xi[axis]));
        out.push_back(std::move(s));
    }
    if (t.rad.kind == Radial::Kind::Power) {
        if (t.rad.rho != Cplx(0.0)) {
            SymbolTerm s = t;
            s.xi[axis] += 1;
            s.rad = Radial::power(t.rad.rho - 1.0);
            s.coeff = t.coeff.scaled(2.0 * t.rad.rho);
            out.push_back(std::move(s));
        }
    } else {
        // d/d xi (q - lambda)^p = p * 2 scale xi_axis * (q - lambda)^{p-1},
        // p = -res; lambda^lam is xi-independent
        int p = -t.rad.res;
        if (p != 0) {
            SymbolTerm s = t;
            s.xi[axis] += 1;
            s.rad = Radial::resolvent(t.rad.lam, t.rad.res + 1);
            s.coeff = t.coeff.scaled(2.0 * scale * double(p));
            out.push_back(std::move(s));
        }
    }
    return out;
}

SymbolTerm x_derivative(const SymbolTerm& t, int axis) {
    SymbolTerm s = t;
    s.coeff = t.coeff.x_derivative(axis);
    return s;
}

SymbolTerm term_multiply(const SymbolTerm& a, const SymbolTerm& b, double) {
    if (a.rad.kind != b.rad.kind)
        throw ComputeError("cannot multiply terms with mixed radial kinds");
    SymbolTerm s;
    s.coeff = a.coeff.mat_mul(b.coeff);
    s.xi.resize(a.xi.size());
    for (size_t i = 0; i < s.xi.size(); ++i) s.xi[i] = a.xi[i] + b.xi[i];
    if (a.rad.kind == Radial::Kind::Power)
        s.rad = Radial::power(a.rad.rho + b.rad.rho);
    else
        s.rad = Radial::resolvent(a.rad.lam + b.rad.lam, a.rad.res + b.rad.res);
    return s;
}

TermList to_resolvent(const SymbolTerm& t, double scale) {
    if (t.rad.kind == Radial::Kind::Resolvent) return {t};
    double rr = t.rad.rho.real();
    int p = int(std::llround(rr));
    if (std::abs(t.rad.rho.imag()) > 1e-12 || std::abs(rr - p) > 1e-12 || p < 0)
        throw ComputeError("only nonnegative-integer radial powers embed in the resolvent ring");
    TermList out;
    // (|xi|^2)^p = scale^-p ((q-lambda) + lambda)^p
    double sp = std::pow(scale, -p);
    for (int i = 0; i <= p; ++i) {
        SymbolTerm s = t;
        s.rad = Radial::resolvent(p - i, -i);
        s.coeff = t.coeff.scaled(sp * double(binom_int(p, i)));
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

std::string term_key(const SymbolTerm& t) {
    std::ostringstream os;
    for (int e : t.xi) os << e << ',';
    os << '|';
    if (t.rad.kind == Radial::Kind::Power) {
        os << 'P' << std::llround(t.rad.rho.real() * 1e9) << ','
           << std::llround(t.rad.rho.imag() * 1e9);
    } else {
        os << 'R' << t.rad.lam << ',' << t.rad.res;
    }
    os << '|' << (t.coeff.kind() == Coefficient::Kind::Trig ? 'T' : 'J');
    return os.str();
}

}  // namespace

void normalize_terms(TermList& terms, double tol) {
    std::map<std::string, size_t> seen;
    TermList out;
    for (auto& t : terms) {
        std::string key = term_key(t);
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen[key] = out.size();
            out.push_back(std::move(t));
        } else {
            out[it->second].coeff.add_in_place(t.coeff);
        }
    }
    TermList pruned;
    for (auto& t : out) {
        t.coeff.prune(tol);
        if (!t.coeff.is_zero(tol)) pruned.push_back(std::move(t));
    }
    terms = std::move(pruned);
}

Mat eval_term(const SymbolTerm& t, const RVec& x, const RVec& xi) {
    if (t.rad.kind != Radial::Kind::Power)
        throw ComputeError("eval_term needs a Power radial; use eval_term_resolvent");
    Cplx mono = 1.0;
    for (int i = 0; i < int(t.xi.size()); ++i) mono *= std::pow(xi(i), t.xi[i]);
    double q = xi.squaredNorm();
    Cplx rad = (t.rad.rho == Cplx(0.0)) ? Cplx(1.0) : std::pow(Cplx(q), t.rad.rho);
    return (mono * rad) * t.coeff.eval(x);
}

Mat eval_term_resolvent(const SymbolTerm& t, const RVec& x, const RVec& xi, Cplx lambda,
                        double scale) {
    if (t.rad.kind != Radial::Kind::Resolvent)
        throw ComputeError("eval_term_resolvent needs a Resolvent radial");
    Cplx mono = 1.0;
    for (int i = 0; i < int(t.xi.size()); ++i) mono *= std::pow(xi(i), t.xi[i]);
    Cplx q = scale * xi.squaredNorm();
    Cplx rad = std::pow(lambda, t.rad.lam) * std::pow(q - lambda, -t.rad.res);
    return (mono * rad) * t.coeff.eval(x);
}

Mat eval_component(const TermList& terms, const RVec& x, const RVec& xi) {
    if (terms.empty()) throw ComputeError("cannot evaluate an empty component");
    int k = terms.front().coeff.dim_fiber();
    Mat out = Mat::Zero(k, k);
    for (const auto& t : terms) out += eval_term(t, x, xi);
    return out;
}

// ----------------------------------------------------- symbol-level operations

ClassicalSymbol from_laplace_type(int m, int k, double c0,
                                  const std::vector<Coefficient>& first_order,
                                  const Coefficient& potential, double scale) {
    if (!first_order.empty() && int(first_order.size()) != m)
        throw SpecError("first-order part needs one coefficient per xi-variable");
    ClassicalSymbol sym;
    sym.order = 2.0;
    sym.m = m;
    sym.k = k;
    sym.scale = scale;
    sym.laplace_type = true;
    sym.comps.assign(3, {});

    SymbolTerm lead;
    lead.coeff = Coefficient::constant(scale * Mat::Identity(k, k), m);
    lead.xi.assign(m, 0);
    lead.rad = Radial::power(1.0);
    sym.comps[0].push_back(std::move(lead));

    for (int i = 0; i < int(first_order.size()); ++i) {
        if (first_order[i].is_zero()) continue;
        SymbolTerm t;
        t.coeff = first_order[i];
        t.xi.assign(m, 0);
        t.xi[i] = 1;
        t.rad = Radial::power(0.0);
        sym.comps[1].push_back(std::move(t));
    }

    SymbolTerm zero;
    zero.coeff = potential;
    if (c0 != 0.0)
        zero.coeff.add_in_place(Coefficient::constant(c0 * Mat::Identity(k, k), m));
    zero.xi.assign(m, 0);
    zero.rad = Radial::power(0.0);
    if (!zero.coeff.is_zero()) sym.comps[2].push_back(std::move(zero));

    for (auto& comp : sym.comps) normalize_terms(comp);
    return sym;
}

namespace {

/// Expands prod_i ((rot^T xi)_i)^mu_i as a polynomial in xi.
std::map<MIdx, double> transformed_monomial(const RMat& rot_t, const MIdx& mu) {
    int m = int(mu.size());
    std::map<MIdx, double> poly;
    poly[MIdx(m, 0)] = 1.0;
    for (int i = 0; i < m; ++i) {
        for (int rep = 0; rep < mu[i]; ++rep) {
            std::map<MIdx, double> next;
            for (const auto& [nu, v] : poly) {
                for (int j = 0; j < m; ++j) {
                    if (std::abs(rot_t(i, j)) < 1e-15) continue;
                    MIdx np = nu;
                    np[j] += 1;
                    next[np] += v * rot_t(i, j);
                }
            }
            poly = std::move(next);
        }
    }
    return poly;
}

}  // namespace

ClassicalSymbol linear_pullback(const ClassicalSymbol& sym, const RMat& rot,
                                const RVec& trans, const Mat& fiber) {
    ClassicalSymbol out = sym;
    RMat rot_t = rot.transpose();
    for (auto& comp : out.comps) {
        TermList next;
        for (const auto& t : comp) {
            Coefficient c = t.coeff.pullback(rot, trans).conjugated(fiber);
            for (const auto& [nu, v] : transformed_monomial(rot_t, t.xi)) {
                SymbolTerm s;
                s.coeff = c.scaled(v);
                s.xi = nu;
                s.rad = t.rad;  // |xi|^2 is rotation invariant
                next.push_back(std::move(s));
            }
        }
        normalize_terms(next);
        comp = std::move(next);
    }
    return out;
}

ClassicalSymbol equivariant_average(const ClassicalSymbol& sym, const FiniteGroupAction& g) {
    ClassicalSymbol out = sym;
    for (size_t j = 0; j < out.comps.size(); ++j) {
        TermList acc;
        for (const auto& el : g.elements) {
            ClassicalSymbol pb = linear_pullback(sym, el.rot, el.trans, el.fiber);
            for (auto& t : pb.comps[j]) {
                t.coeff = t.coeff.scaled(1.0 / double(g.size()));
                acc.push_back(std::move(t));
            }
        }
        normalize_terms(acc);
        out.comps[j] = std::move(acc);
    }
    return out;
}

namespace {

std::vector<RVec> sample_points_x(const ClassicalSymbol& sym, const FiniteGroupAction& g) {
    std::vector<RVec> pts;
    RVec periods = g.periods ? *g.periods : RVec::Ones(sym.m);
    int per_dim = sym.m <= 2 ? 5 : 3;
    std::vector<int> idx(sym.m, 0);
    while (true) {
        RVec x(sym.m);
        for (int i = 0; i < sym.m; ++i)
            x(i) = periods(i) * (idx[i] + 0.318309886) / per_dim;
        pts.push_back(x);
        int i = 0;
        while (i < sym.m && ++idx[i] == per_dim) idx[i++] = 0;
        if (i == sym.m) break;
    }
    return pts;
}

std::vector<RVec> sample_points_xi(int m) {
    std::vector<RVec> pts;
    if (m == 1) {
        pts.push_back(RVec::Constant(1, 1.0));
        pts.push_back(RVec::Constant(1, -1.0));
    } else {
        int n = 8 + 3 * m;
        unsigned long long state = 0x9e3779b97f4a7c15ull;
        for (int s = 0; s < n; ++s) {
            RVec v(m);
            for (int i = 0; i < m; ++i) {
                state = state * 6364136223846793005ull + 1442695040888963407ull;
                v(i) = double((state >> 18) & 0xffffff) / double(0xffffff) - 0.5;
            }
            if (v.norm() < 1e-3) v(0) = 0.7;
            pts.push_back(v / v.norm());
        }
    }
    return pts;
}

}  // namespace

double equivariance_defect(const ClassicalSymbol& sym, const FiniteGroupAction& g) {
    double defect = 0.0;
    auto xs = sample_points_x(sym, g);
    auto xis = sample_points_xi(sym.m);
    for (const auto& el : g.elements) {
        Mat finv = el.fiber.inverse();
        for (const auto& comp : sym.comps) {
            if (comp.empty()) continue;
            for (const auto& x : xs) {
                RVec gx = el.rot * x + el.trans;
                for (const auto& xi : xis) {
                    RVec gxi = el.rot * xi;
                    Mat lhs = el.fiber * eval_component(comp, x, xi) * finv;
                    Mat rhs = eval_component(comp, gx, gxi);
                    defect = std::max(defect, (lhs - rhs).cwiseAbs().maxCoeff());
                }
            }
        }
    }
    return defect;
}

AgmonResult agmon_check(const ClassicalSymbol& sym, double epsilon) {
    AgmonResult res;
    if (sym.comps.empty() || sym.comps[0].empty())
        throw ComputeError("symbol has no principal part");
    FiniteGroupAction triv = trivial_group(sym.m, sym.k);
    auto xs = sample_points_x(sym, triv);
    auto xis = sample_points_xi(sym.m);
    res.clearance = std::numeric_limits<double>::infinity();
    for (const auto& x : xs) {
        for (const auto& xi : xis) {
            Mat p = eval_component(sym.comps[0], x, xi);
            Eigen::ComplexEigenSolver<Mat> es(p);
            for (int i = 0; i < es.eigenvalues().size(); ++i) {
                Cplx ev = es.eigenvalues()(i);
                // distance from the closed negative real axis (the Agmon cut)
                double dist = ev.real() >= 0.0 ? std::abs(ev) : std::abs(ev.imag());
                if (dist < res.clearance) {
                    res.clearance = dist;
                    res.witness_x = x;
                    res.witness_xi = xi;
                    res.witness_eig = ev;
                }
            }
        }
    }
    res.ok = res.clearance > epsilon;
    return res;
}

ClassicalSymbol compose(const ClassicalSymbol& a, const ClassicalSymbol& b, int K) {
    if (a.m != b.m) throw ComputeError("compose: base dimensions differ");
    ClassicalSymbol out;
    out.order = a.order + b.order;
    out.m = a.m;
    out.k = a.k;
    out.scale = a.scale;
    out.comps.assign(K, {});
    int ja_max = int(a.comps.size()) - 1;
    int jb_max = int(b.comps.size()) - 1;
    for (int j = 0; j < K; ++j) {
        TermList acc;
        for (int ja = 0; ja <= std::min(j, ja_max); ++ja) {
            for (int jb = 0; jb <= std::min(j - ja, jb_max); ++jb) {
                int aw = j - ja - jb;  // |alpha|
                for (const auto& alpha : multi_indices_of_weight(a.m, aw)) {
                    double fac = 1.0 / double(midx_factorial(alpha));
                    for (const auto& ta : a.comps[ja]) {
                        // d_xi^alpha of ta
                        TermList da{ta};
                        for (int i = 0; i < a.m && !da.empty(); ++i)
                            for (int rep = 0; rep < alpha[i]; ++rep) {
                                TermList next;
                                for (const auto& t : da) {
                                    TermList d = xi_derivative(t, i, a.scale);
                                    next.insert(next.end(), d.begin(), d.end());
                                }
                                da = std::move(next);
                                if (da.empty()) break;
                            }
                        if (da.empty()) continue;
                        for (const auto& tb : b.comps[jb]) {
                            // D_x^alpha of tb
                            SymbolTerm db = tb;
                            for (int i = 0; i < a.m; ++i)
                                for (int rep = 0; rep < alpha[i]; ++rep)
                                    db = x_derivative(db, i);
                            for (const auto& ta_d : da) {
                                SymbolTerm left = ta_d;
                                SymbolTerm right = db;
                                if (left.rad.kind != right.rad.kind) {
                                    TermList lefts = left.rad.kind == Radial::Kind::Power
                                                         ? to_resolvent(left, a.scale)
                                                         : TermList{left};
                                    TermList rights = right.rad.kind == Radial::Kind::Power
                                                          ? to_resolvent(right, a.scale)
                                                          : TermList{right};
                                    for (const auto& l : lefts)
                                        for (const auto& r : rights) {
                                            SymbolTerm p = term_multiply(l, r, a.scale);
                                            p.coeff = p.coeff.scaled(fac);
                                            acc.push_back(std::move(p));
                                        }
                                } else {
                                    SymbolTerm p = term_multiply(left, right, a.scale);
                                    p.coeff = p.coeff.scaled(fac);
                                    acc.push_back(std::move(p));
                                }
                            }
                        }
                    }
                }
            }
        }
        normalize_terms(acc);
        out.comps[j] = std::move(acc);
    }
    return out;
}

}  // namespace orbizeta
