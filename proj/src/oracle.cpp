#include "orbizeta/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "orbizeta/geometry.hpp"

namespace orbizeta {

namespace {

const Cplx kI{0.0, 1.0};

IMat dual_integer_matrix(const RMat& rot, const RVec& periods) {
    int m = int(periods.size());
    RMat D = periods.asDiagonal() * rot * periods.cwiseInverse().asDiagonal();
    IMat out(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            long long v = std::llround(D(i, j));
            if (std::abs(D(i, j) - double(v)) > 1e-9)
                throw ComputeError("rotation does not preserve the dual lattice");
            out(i, j) = v;
        }
    return out;
}

/// Integer kernel basis of B via the Smith normal form.
std::vector<IVec> integer_kernel(const IMat& B) {
    SmithForm sf = smith_normal_form(B);
    std::vector<IVec> basis;
    int n = int(B.cols());
    for (int i = 0; i < n; ++i) {
        long long s = (i < sf.S.rows() && i < sf.S.cols()) ? sf.S(i, i) : 0;
        if (s == 0) basis.push_back(sf.Vinv.col(i));
    }
    return basis;
}

void enumerate_box(const std::vector<int>& lo, const std::vector<int>& hi,
                   const std::function<void(const IVec&)>& fn) {
    int r = int(lo.size());
    if (r == 0) {
        fn(IVec::Zero(0));
        return;
    }
    std::vector<int> cur(lo);
    while (true) {
        IVec y(r);
        for (int i = 0; i < r; ++i) y(i) = cur[i];
        fn(y);
        int i = 0;
        while (i < r && ++cur[i] > hi[i]) cur[i++] = lo[i];
        if (i == r) return;
    }
}

struct FixedLattice {
    int rank = 0;
    RMat W;  // m x rank physical basis
    RMat Q;  // scaled Gram
    RVec h;
    bool phase_trivial = true;
    Cplx fiber_trace{0, 0};
};

FixedLattice fixed_lattice(const LatticeModel& model, int gamma) {
    const auto& el = model.group.elements[gamma];
    FixedLattice fl;
    fl.fiber_trace = el.fiber.trace();
    IMat D = dual_integer_matrix(el.rot, model.periods);
    IMat B = D - IMat::Identity(model.m, model.m);
    auto kern = integer_kernel(B);
    fl.rank = int(kern.size());
    fl.W.resize(model.m, fl.rank);
    for (int j = 0; j < fl.rank; ++j)
        for (int i = 0; i < model.m; ++i)
            fl.W(i, j) = kTwoPi / model.periods(i) * double(kern[j](i));
    fl.Q = model.scale * fl.W.transpose() * fl.W;
    fl.h = -fl.W.transpose() * el.trans;
    for (int i = 0; i < fl.rank; ++i) {
        double frac = fl.h(i) / kTwoPi;
        if (std::abs(frac - std::round(frac)) > 1e-9) fl.phase_trivial = false;
    }
    return fl;
}

/// Modes with y^T Q y <= cut, as (mu = y^T Q y + c0, phase) pairs.
std::vector<std::pair<double, Cplx>> mode_list(const FixedLattice& fl, double c0,
                                               double cut, long cap = 4000000) {
    std::vector<std::pair<double, Cplx>> out;
    if (fl.rank == 0) {
        out.emplace_back(c0, 1.0);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(fl.Q);
    double lmin = es.eigenvalues().minCoeff();
    int bound = int(std::sqrt(cut / lmin)) + 1;
    std::vector<int> lo(fl.rank, -bound), hi(fl.rank, bound);
    long long total = 1;
    for (int i = 0; i < fl.rank; ++i) total *= (2 * bound + 1);
    if (total > cap) throw ComputeError("oracle mode enumeration exceeds its budget");
    enumerate_box(lo, hi, [&](const IVec& y) {
        RVec yd = y.cast<double>();
        double q = yd.dot(fl.Q * yd);
        if (q > cut) return;
        out.emplace_back(q + c0, std::exp(kI * yd.dot(fl.h)));
    });
    return out;
}

}  // namespace

bool LatticeModel::constant_coefficients() const {
    if (potential && !potential->is_zero(0.0)) return false;
    for (const auto& b : first_order)
        if (!b.is_zero(0.0)) return false;
    return true;
}

TwistedZetaContinuation constant_case_zeta(const LatticeModel& model, int gamma) {
    if (!model.constant_coefficients())
        throw SpecError("constant_case_zeta requires constant coefficients");
    if (model.c0 <= 0.0) throw SpecError("constant_case_zeta requires c0 > 0");
    FixedLattice fl = fixed_lattice(model, gamma);

    TwistedZetaContinuation tz;
    tz.gamma = gamma;
    tz.rank = fl.rank;
    tz.basis = fl.W;
    tz.Q = fl.Q;
    tz.h = fl.h;
    tz.phase_trivial = fl.phase_trivial;
    tz.fiber_trace = fl.fiber_trace;
    tz.covol = fl.rank > 0 ? std::sqrt(fl.Q.determinant()) : 1.0;
    tz.c0 = model.c0;

    int r = fl.rank;
    double c0 = model.c0;
    if (r >= 1 && fl.phase_trivial) {
        double pr = std::pow(kPi, 0.5 * r);
        double fact = 1.0;
        for (int j = 0; j <= 12; ++j) {
            if (j > 0) fact *= j;
            double zloc = 0.5 * r - j;
            bool degenerate = zloc <= 0.0 && std::abs(zloc - std::round(zloc)) < 1e-12;
            if (!degenerate) {
                Cplx res = tz.fiber_trace * pr * std::pow(-c0, j) /
                           (fact * tz.covol * std::tgamma(zloc));
                tz.poles.emplace_back(zloc, res);
            }
        }
    }

    auto modes = std::make_shared<std::vector<std::pair<double, Cplx>>>(
        mode_list(fl, c0, 60.0));
    Cplx ftr = fl.fiber_trace;
    bool trivial = fl.phase_trivial;
    double covol = tz.covol;
    RMat Q = fl.Q;
    RVec h = fl.h;
    tz.eval = [r, c0, ftr, trivial, covol, Q, h, modes](Cplx z) -> Cplx {
        if (r == 0) return ftr * std::pow(Cplx(c0), -z);
        using boost::math::quadrature::gauss_kronrod;
        // upper Mellin part, t in (1, inf)
        auto theta = [&](double t) -> Cplx {
            Cplx s = 0.0;
            for (const auto& [mu, ph] : *modes) s += ph * std::exp(-t * mu);
            return s;
        };
        auto fup = [&](double t) -> Cplx { return std::pow(Cplx(t), z - 1.0) * theta(t); };
        Cplx total = gauss_kronrod<double, 31>::integrate(
            fup, 1.0, std::numeric_limits<double>::infinity(), 12, 1e-13);
        // lower part via Poisson summation
        double pr = std::pow(kPi, 0.5 * r);
        if (trivial) {
            double term = 1.0;
            for (int j = 0; j <= 40; ++j) {
                if (j > 0) term *= -c0 / j;
                total += pr / covol * term / (z - 0.5 * r + double(j));
                if (std::abs(term) < 1e-18) break;
            }
        }
        RMat Qinv = Q.inverse();
        std::vector<int> lo(r), hi(r);
        for (int i = 0; i < r; ++i) {
            int c = int(std::lround(h(i) / kTwoPi));
            lo[i] = c - 6;
            hi[i] = c + 6;
        }
        boost::math::quadrature::tanh_sinh<double> ts;
        enumerate_box(lo, hi, [&](const IVec& kap) {
            RVec d = h - kTwoPi * kap.cast<double>();
            double beta = 0.25 * d.dot(Qinv * d);
            if (beta < 1e-14 || beta > 60.0) return;  // kappa = 0 handled above
            auto g = [&](double t) -> Cplx {
                return std::pow(Cplx(t), z - 1.0 - 0.5 * r) *
                       std::exp(-c0 * t - beta / t);
            };
            total += pr / covol * ts.integrate(g, 1e-12, 1.0);
        });
        return ftr * total / gamma_cplx(z);
    };
    return tz;
}

Cplx direct_sum(const TwistedZetaContinuation& tz, Cplx z, double cut) {
    if (tz.rank == 0) return tz.fiber_trace * std::pow(Cplx(tz.c0), -z);
    FixedLattice fl;
    fl.rank = tz.rank;
    fl.Q = tz.Q;
    fl.h = tz.h;
    fl.fiber_trace = tz.fiber_trace;
    Cplx s = 0.0;
    for (const auto& [mu, ph] : mode_list(fl, tz.c0, cut))
        s += ph * std::pow(Cplx(mu), -z);
    return tz.fiber_trace * s;
}

Cplx oracle_residue_s(const TwistedZetaContinuation& tz, int k, int m) {
    double zloc = 0.5 * double(m - k);
    for (const auto& [z0, res] : tz.poles)
        if (std::abs(z0 - zloc) < 1e-9) return -res;
    return 0.0;
}

Cplx twisted_theta(const LatticeModel& model, int gamma, double t) {
    if (!model.constant_coefficients())
        throw SpecError("twisted_theta requires constant coefficients");
    if (t <= 0.0) throw SpecError("twisted_theta requires t > 0");
    FixedLattice fl = fixed_lattice(model, gamma);
    double cut = 45.0 / t;
    Cplx s = 0.0;
    for (const auto& [mu, ph] : mode_list(fl, model.c0, cut)) s += ph * std::exp(-t * mu);
    return fl.fiber_trace * s;
}

// ----------------------------------------------------------- numeric spectrum

namespace {

long mode_index(const std::vector<int>& n, int N, int m) {
    long idx = 0;
    for (int i = m - 1; i >= 0; --i) idx = idx * (2 * N + 1) + (n[i] + N);
    return idx;
}

bool in_box(const std::vector<int>& n, int N) {
    for (int v : n)
        if (v < -N || v > N) return false;
    return true;
}

RVec mode_freq(const std::vector<int>& n, const RVec& periods) {
    RVec nu(periods.size());
    for (int i = 0; i < periods.size(); ++i) nu(i) = kTwoPi * n[i] / periods(i);
    return nu;
}

}  // namespace

NumericSpectrum numeric_spectrum(const LatticeModel& model) {
    int m = model.m, k = model.k, N = model.cutoff;
    long M = 1;
    for (int i = 0; i < m; ++i) M *= (2 * N + 1);
    long dim = M * k;
    if (dim > model.budget) throw ComputeError("eigensolve budget exceeded");

    NumericSpectrum sp;
    sp.m = m;
    sp.k = k;
    sp.N = N;
    sp.scale = model.scale;
    sp.c0 = model.c0;
    sp.modes.resize(M);
    {
        std::vector<int> n(m, -N);
        for (long idx = 0; idx < M; ++idx) {
            sp.modes[mode_index(n, N, m)] = n;
            int i = 0;
            while (i < m && ++n[i] > N) n[i++] = -N;
        }
    }

    Mat H = Mat::Zero(dim, dim);
    for (long a = 0; a < M; ++a) {
        RVec nu = mode_freq(sp.modes[a], model.periods);
        double ev = model.scale * nu.squaredNorm() + model.c0;
        H.block(a * k, a * k, k, k) += ev * Mat::Identity(k, k);
    }
    auto add_trig = [&](const Coefficient& c, int deriv_axis) {
        if (c.kind() != Coefficient::Kind::Trig)
            throw SpecError("numeric_spectrum requires trigonometric coefficients");
        const auto& td = c.trig_data();
        for (long a = 0; a < M; ++a) {
            RVec nu = mode_freq(sp.modes[a], model.periods);
            for (const auto& [f, C] : td.terms) {
                std::vector<int> nn(m);
                for (int i = 0; i < m; ++i) nn[i] = sp.modes[a][i] + f[i];
                if (!in_box(nn, N)) continue;
                long b = mode_index(nn, N, m);
                Cplx fac = deriv_axis < 0 ? Cplx(1.0) : Cplx(nu(deriv_axis));
                H.block(b * k, a * k, k, k) += fac * C;
            }
        }
    };
    if (model.potential) add_trig(*model.potential, -1);
    for (int i = 0; i < int(model.first_order.size()); ++i)
        if (!model.first_order[i].is_zero(0.0)) add_trig(model.first_order[i], i);

    sp.herm_defect = (H - H.adjoint()).cwiseAbs().maxCoeff();
    if (sp.herm_defect > 1e-10)
        throw ComputeError("assembled operator is not Hermitian (defect " +
                           std::to_string(sp.herm_defect) + ")");
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    sp.evals = es.eigenvalues();
    sp.evecs = es.eigenvectors();
    if (sp.evals.minCoeff() <= 0.0)
        throw ComputeError("spectrum is not positive; increase c0");
    return sp;
}

Mat twist_matrix(const LatticeModel& model, const NumericSpectrum& spec, int gamma) {
    const auto& el = model.group.elements[gamma];
    int m = spec.m, k = spec.k, N = spec.N;
    long M = long(spec.modes.size());
    IMat D = dual_integer_matrix(el.rot, model.periods);
    Mat U = Mat::Zero(M * k, M * k);
    for (long a = 0; a < M; ++a) {
        IVec n(m);
        for (int i = 0; i < m; ++i) n(i) = spec.modes[a][i];
        IVec np = D * n;
        std::vector<int> nn(m);
        for (int i = 0; i < m; ++i) nn[i] = int(np(i));
        if (!in_box(nn, N)) continue;  // boundary modes dropped (high energy)
        long b = mode_index(nn, N, m);
        RVec nu = mode_freq(nn, model.periods);
        Cplx phase = std::exp(-kI * nu.dot(el.trans));
        U.block(b * k, a * k, k, k) = phase * el.fiber;
    }
    return U;
}

Cplx TwistedHeat::operator()(double t) const {
    Cplx s = 0.0;
    for (int a = 0; a < evals.size(); ++a) s += diag(a) * std::exp(-t * evals(a));
    return s;
}

TwistedHeat equivariant_heat_trace(const NumericSpectrum& spec, const Mat& U) {
    TwistedHeat th;
    th.evals = spec.evals;
    th.diag = (spec.evecs.adjoint() * (U * spec.evecs)).diagonal();
    th.cutoff_sq = double(spec.N) * double(spec.N);
    return th;
}

HeatFitResult heat_fit(const std::function<Cplx(double)>& f, int n, int m, int k_max,
                       int N) {
    int J = k_max + 6;
    int pts = 60;
    double tmin = std::log(1e13) / double(N) / N;
    double tmax = 0.2;
    RVec tg(pts);
    for (int i = 0; i < pts; ++i)
        tg(i) = tmin * std::pow(tmax / tmin, double(i) / (pts - 1));
    Mat Phi(pts, J + 1);
    CVec rhs(pts);
    for (int i = 0; i < pts; ++i) {
        rhs(i) = f(tg(i));
        for (int j = 0; j <= J; ++j) Phi(i, j) = std::pow(tg(i), 0.5 * (j - n));
    }
    // a trace that is uniformly negligible on the window (free group
    // elements) certifies zero residues directly; fitting powers to it would
    // only amplify noise from the steep theta tail
    if (rhs.cwiseAbs().maxCoeff() < 1e-4) {
        HeatFitResult out;
        out.coeffs = CVec::Zero(J + 1);
        out.cond = 1.0;
        out.res_by_k.assign(k_max + 1, 0.0);
        out.checked.assign(k_max + 1, true);
        return out;
    }
    // weight rows by the magnitude of the leading power so small-t rows do
    // not drown the sub-leading coefficients
    for (int i = 0; i < pts; ++i) {
        double w = std::pow(tg(i), 0.5 * n);
        Phi.row(i) *= w;
        rhs(i) *= w;
    }
    Eigen::JacobiSVD<Mat> svd(Phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    HeatFitResult out;
    out.coeffs = svd.solve(rhs);
    out.cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    out.res_by_k.assign(k_max + 1, 0.0);
    out.checked.assign(k_max + 1, true);
    for (int k = 0; k <= k_max; ++k) {
        int j = k - m + n;
        if (j < 0) continue;  // no pole below k = m - n
        if (j > J) {
            out.checked[k] = false;
            continue;
        }
        double zloc = 0.5 * (n - j);
        if (zloc <= 0.0 && std::abs(zloc - std::round(zloc)) < 1e-12) {
            // Gamma factor degenerates: heat coefficient maps to a value,
            // not a residue; residue 0 expected but not checked here
            out.checked[k] = false;
            continue;
        }
        out.res_by_k[k] = -out.coeffs(j) / std::tgamma(zloc);
    }
    return out;
}

HeatFitResult heat_fit_residues(const LatticeModel& model, const NumericSpectrum& spec,
                                int gamma, int n_gamma, int k_max) {
    Mat U = twist_matrix(model, spec, gamma);
    TwistedHeat th = equivariant_heat_trace(spec, U);
    return heat_fit([&](double t) { return th(t); }, n_gamma, model.m, k_max, spec.N);
}

HeatFitResult isotypic_fit_residues(const LatticeModel& model, const NumericSpectrum& spec,
                                    int irrep, int k_max) {
    auto w = isotypic_weights(model.group, irrep);
    Mat P = Mat::Zero(spec.evecs.rows(), spec.evecs.cols());
    for (int g = 0; g < model.group.size(); ++g)
        if (std::abs(w[g]) > 0.0) P += w[g] * twist_matrix(model, spec, g);
    TwistedHeat th = equivariant_heat_trace(spec, P);
    return heat_fit([&](double t) { return th(t); }, model.m, model.m, k_max, spec.N);
}

}  // namespace orbizeta
