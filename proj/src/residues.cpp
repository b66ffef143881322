#include "orbizeta/residues.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace orbizeta {

void gegenbauer_rule(int n, int points, RVec& nodes, RVec& weights) {
    // weight (1-u^2)^lambda - 1/2 with lambda = (n-2)/2; monic three-term
    // recurrence b_k = k (k + 2 lambda - 1) / (4 (k + lambda)(k + lambda - 1))
    double lambda = 0.5 * (n - 2);
    double b0 = std::sqrt(kPi) * std::tgamma(lambda + 0.5) / std::tgamma(lambda + 1.0);
    RMat J = RMat::Zero(points, points);
    for (int k = 1; k < points; ++k) {
        double bk = k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0));
        double off = std::sqrt(bk);
        J(k, k - 1) = off;
        J(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(J);
    nodes = es.eigenvalues();
    weights.resize(points);
    for (int i = 0; i < points; ++i) {
        double v = es.eigenvectors()(0, i);
        weights(i) = b0 * v * v;
    }
}

namespace {

SphereQuad raw_sphere(int n, int level) {
    SphereQuad q;
    if (n == 1) {
        q.nodes.push_back(RVec::Constant(1, 1.0));
        q.nodes.push_back(RVec::Constant(1, -1.0));
        q.weights = RVec::Constant(2, 1.0);
        return q;
    }
    if (n == 2) {
        int N = 2 * level + 4;
        q.weights = RVec::Constant(N, kTwoPi / N);
        for (int i = 0; i < N; ++i) {
            double th = kTwoPi * (i + 0.5) / N;
            RVec v(2);
            v << std::cos(th), std::sin(th);
            q.nodes.push_back(v);
        }
        return q;
    }
    RVec u, wu;
    gegenbauer_rule(n, level + 2, u, wu);
    SphereQuad sub = raw_sphere(n - 1, level);
    std::vector<double> wlist;
    for (int i = 0; i < u.size(); ++i) {
        double r = std::sqrt(std::max(0.0, 1.0 - u(i) * u(i)));
        for (size_t j = 0; j < sub.nodes.size(); ++j) {
            RVec v(n);
            v.head(n - 1) = r * sub.nodes[j];
            v(n - 1) = u(i);
            q.nodes.push_back(v);
            wlist.push_back(wu(i) * sub.weights(j));
        }
    }
    q.weights = Eigen::Map<RVec>(wlist.data(), wlist.size());
    return q;
}

}  // namespace

SphereQuad sphere_quadrature(int n, int level) {
    SphereQuad q = raw_sphere(n, level);
    q.weights /= std::pow(kTwoPi, n);
    return q;
}

double sphere_moment(int n, const MIdx& alpha) {
    int tot = 0;
    for (int a : alpha) {
        if (a % 2 == 1) return 0.0;
        tot += a;
    }
    double num = 2.0;
    for (int a : alpha) num *= std::tgamma(0.5 * (a + 1));
    return num / std::tgamma(0.5 * (tot + n));
}

namespace {

// xi2-derivative bookkeeping: poly(s) * xi2^g2 * q^(s + t)
struct RadPiece {
    CVec p;
    MIdx g2;
    int t;
};

std::vector<RadPiece> xi2_derivatives(const MIdx& alpha, const MIdx& g2_init, int t_init,
                                      double scale) {
    std::vector<RadPiece> cur;
    CVec one(1);
    one(0) = 1.0;
    cur.push_back({one, g2_init, t_init});
    for (int i = 0; i < int(alpha.size()); ++i) {
        for (int rep = 0; rep < alpha[i]; ++rep) {
            std::vector<RadPiece> next;
            for (const auto& e : cur) {
                if (e.g2[i] > 0) {
                    RadPiece a = e;
                    a.p = double(e.g2[i]) * e.p;
                    a.g2[i] -= 1;
                    next.push_back(std::move(a));
                }
                RadPiece b = e;
                b.p = 2.0 * scale * poly_mul_linear(e.p, Cplx(double(e.t)));
                b.g2[i] += 1;
                b.t -= 1;
                next.push_back(std::move(b));
            }
            cur = std::move(next);
        }
    }
    return cur;
}

}  // namespace

ReducedDensity reduce_density(const PowerSymbolFamily& fam, const FixedStratum& st, int k) {
    int m = fam.m;
    ReducedDensity rd;
    rd.gamma = st.gamma;
    rd.k = k;
    rd.n = st.n;
    rd.s_star = 0.5 * double(k - m);
    rd.d_weight = st.d_weight;
    int j = st.n - m + k;
    if (st.n == 0 || j < 0 || j >= int(fam.comps.size())) return rd;

    int n2 = m - st.n;
    RMat M;  // x = ... + M w, the w-coordinates of the normal displacement
    if (n2 > 0) M = st.normal_basis * (st.tbar - RMat::Identity(n2, n2)).inverse();

    for (int kp = 0; kp <= j; ++kp) {
        int aw = j - kp;
        if (n2 == 0 && aw > 0) continue;
        for (const auto& alpha : multi_indices_of_weight(std::max(n2, 1), aw)) {
            if (n2 == 0 && midx_abs(alpha) > 0) continue;
            double fac = 1.0 / midx_factorial(alpha);
            for (const auto& t : fam.comps[kp]) {
                Coefficient c = t.coeff;
                bool dead = false;
                for (int i = 0; i < n2 && !dead; ++i)
                    for (int rep = 0; rep < alpha[i]; ++rep) {
                        c = c.dir_derivative(M.col(i));
                        if (c.is_zero(1e-15)) {
                            dead = true;
                            break;
                        }
                    }
                if (dead) continue;
                c = c.scaled(fac);

                // expand xi^mu with xi = F xi1 + N xi2
                using Key = std::pair<MIdx, MIdx>;
                std::map<Key, double> poly;
                poly[{MIdx(st.n, 0), MIdx(std::max(n2, 0), 0)}] = 1.0;
                for (int a = 0; a < m; ++a) {
                    for (int rep = 0; rep < t.xi[a]; ++rep) {
                        std::map<Key, double> nx;
                        for (const auto& [key, v] : poly) {
                            for (int jj = 0; jj < st.n; ++jj) {
                                double f = st.fixed_basis(a, jj);
                                if (std::abs(f) < 1e-15) continue;
                                Key nk = key;
                                nk.first[jj] += 1;
                                nx[nk] += v * f;
                            }
                            for (int l = 0; l < n2; ++l) {
                                double f = st.normal_basis(a, l);
                                if (std::abs(f) < 1e-15) continue;
                                Key nk = key;
                                nk.second[l] += 1;
                                nx[nk] += v * f;
                            }
                        }
                        poly = std::move(nx);
                    }
                }

                for (const auto& [key, v] : poly) {
                    for (const auto& piece :
                         xi2_derivatives(alpha, key.second, t.qshift, fam.scale)) {
                        if (midx_abs(piece.g2) != 0) continue;  // xi2 = 0
                        ReducedTerm out;
                        out.polyS = v * poly_mul(t.polyS, piece.p);
                        out.coeff = c;
                        out.xi1 = key.first;
                        out.qshift = piece.t;
                        rd.terms.push_back(std::move(out));
                    }
                }
            }
        }
    }
    return rd;
}

Cplx eval_density(const ReducedDensity& rd, const FixedStratum& st, const Mat& fiber,
                  const RVec& x, const SphereQuad& quad, double scale) {
    if (rd.terms.empty()) return 0.0;
    int kdim = fiber.rows();
    Cplx acc = 0.0;
    for (size_t qn = 0; qn < quad.nodes.size(); ++qn) {
        const RVec& xi1 = quad.nodes[qn];
        Mat b = Mat::Zero(kdim, kdim);
        for (const auto& t : rd.terms) {
            double mono = 1.0;
            for (int i = 0; i < rd.n; ++i) mono *= std::pow(xi1(i), t.xi1[i]);
            if (mono == 0.0) continue;
            Cplx rad = std::pow(Cplx(scale), rd.s_star + double(t.qshift));
            b += (poly_eval(t.polyS, rd.s_star) * mono * rad) * t.coeff.eval(x);
        }
        acc += quad.weights(qn) * (b * fiber).trace();
    }
    return -0.5 * rd.d_weight * acc;
}

Cplx integrate_stratum(const FixedStratum& st, int grid,
                       const std::function<Cplx(const RVec&)>& f) {
    if (st.n == 0) return f(st.base_point);
    const RMat& L = st.lattice_dirs;
    double vol = std::sqrt((L.transpose() * L).determinant());
    long total = 1;
    for (int i = 0; i < st.n; ++i) total *= grid;
    Cplx acc = 0.0;
    std::vector<int> idx(st.n, 0);
    for (long c = 0; c < total; ++c) {
        RVec u(st.n);
        for (int i = 0; i < st.n; ++i) u(i) = double(idx[i]) / grid;
        acc += f(st.base_point + L * u);
        int i = 0;
        while (i < st.n && ++idx[i] == grid) idx[i++] = 0;
    }
    return acc * vol / double(total);
}

// ------------------------------------------------------------ ResidueCalculator

ResidueCalculator::ResidueCalculator(ClassicalSymbol sym, FiniteGroupAction group, int k_max,
                                     int quad_level, int grid, Backend backend,
                                     const PowerSymbolFamily* preset)
    : sym_(std::move(sym)),
      group_(std::move(group)),
      k_max_(k_max),
      grid_(grid),
      quad_level_(quad_level) {
    if (!group_.periods)
        throw SpecError("residue computation requires a torus model with periods");
    equi_defect_ = equivariance_defect(sym_, group_);
    if (equi_defect_ > 1e-8)
        throw SpecError("symbol is not equivariant (defect " + std::to_string(equi_defect_) +
                        " > 1e-8)");
    if (preset && int(preset->comps.size()) >= k_max_ + 1) {
        fam_ = *preset;
        fam_.comps.resize(k_max_ + 1);
    } else if (backend == Backend::Contour) {
        fam_ = cauchy_power_contour(resolvent_recursion(sym_, k_max_));
    } else {
        fam_ = cauchy_power(resolvent_recursion(sym_, k_max_));
    }
    fixed_ = all_fixed_sets(group_, *group_.periods);
    for (int n = 1; n <= sym_.m; ++n) quads_[n] = sphere_quadrature(n, quad_level_);
}

const ReducedDensity& ResidueCalculator::reduced(int gamma, int k) {
    auto key = std::make_pair(gamma, k);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ReducedDensity rd;
    if (!fixed_[gamma].empty()) {
        rd = reduce_density(fam_, fixed_[gamma][0], k);
    } else {
        rd.gamma = gamma;
        rd.k = k;
    }
    return cache_.emplace(key, std::move(rd)).first->second;
}

Cplx ResidueCalculator::density_at(int gamma, int k, const RVec& x) {
    if (fixed_[gamma].empty()) return 0.0;
    const ReducedDensity& rd = reduced(gamma, k);
    if (rd.terms.empty()) return 0.0;
    return eval_density(rd, fixed_[gamma][0], group_.elements[gamma].fiber, x,
                        quads_.at(rd.n), sym_.scale);
}

Cplx ResidueCalculator::residue_gamma(int gamma, int k) {
    if (k < 0 || k > k_max_) throw SpecError("k outside the configured range");
    Cplx acc = 0.0;
    const ReducedDensity& rd = reduced(gamma, k);
    if (rd.terms.empty()) return acc;
    for (const auto& st : fixed_[gamma]) {
        acc += integrate_stratum(st, grid_, [&](const RVec& x) {
            return eval_density(rd, st, group_.elements[gamma].fiber, x, quads_.at(rd.n),
                                sym_.scale);
        });
    }
    return acc;
}

Cplx ResidueCalculator::residue_isotypic(int irrep, int k) {
    auto w = isotypic_weights(group_, irrep);
    Cplx acc = 0.0;
    for (int g = 0; g < group_.size(); ++g)
        if (std::abs(w[g]) > 0.0) acc += w[g] * residue_gamma(g, k);
    return acc;
}

Cplx ResidueCalculator::residue_orbifold(int k) { return residue_isotypic(0, k); }

std::vector<StratumRow> ResidueCalculator::strata_table(int k, const Stratification& strat) {
    std::vector<StratumRow> rows;
    const RVec& periods = *group_.periods;
    for (size_t ty = 0; ty < strat.strata.size(); ++ty) {
        for (size_t ci = 0; ci < strat.strata[ty].size(); ++ci) {
            const StratumComponent& al = strat.strata[ty][ci];
            StratumRow row;
            row.type_id = int(ty);
            row.component = int(ci);
            row.dim = al.n;
            if (al.n == 0) {
                row.volume = 0.0;
                rows.push_back(row);
                continue;
            }
            row.volume =
                std::sqrt((al.lattice_dirs.transpose() * al.lattice_dirs).determinant());
            // generic point of the component picks out its exact isotropy
            RVec probe = al.base_point;
            for (int jj = 0; jj < al.n; ++jj)
                probe += (0.1098327 + 0.0371 * jj) * al.lattice_dirs.col(jj);
            std::vector<int> iso = isotropy_group(probe, group_, periods);
            FixedStratum carrier;
            carrier.base_point = al.base_point;
            carrier.lattice_dirs = al.lattice_dirs;
            carrier.n = al.n;
            Cplx acc = 0.0;
            for (int g : iso) {
                if (fixed_[g].empty() || fixed_[g][0].n != al.n) continue;
                const ReducedDensity& rd = reduced(g, k);
                if (rd.terms.empty()) continue;
                acc += integrate_stratum(carrier, grid_, [&](const RVec& x) {
                    return eval_density(rd, fixed_[g][0], group_.elements[g].fiber, x,
                                        quads_.at(rd.n), sym_.scale);
                });
            }
            row.integral = acc / double(group_.size());
            rows.push_back(row);
        }
    }
    return rows;
}

double ResidueCalculator::covariance_defect(int k) {
    double defect = 0.0;
    for (int g = 0; g < group_.size(); ++g) {
        if (fixed_[g].empty()) continue;
        for (int h = 0; h < group_.size(); ++h) {
            int gc = group_.conj(g, h);
            const auto& eh = group_.elements[h];
            for (const auto& st : fixed_[g]) {
                for (int sp = 0; sp < 3; ++sp) {
                    RVec x = st.base_point;
                    for (int jj = 0; jj < st.n; ++jj)
                        x += (0.05 + 0.27 * sp + 0.031 * jj) * st.lattice_dirs.col(jj);
                    Cplx a = density_at(g, k, x);
                    Cplx b = density_at(gc, k, eh.rot * x + eh.trans);
                    defect = std::max(defect, std::abs(a - b));
                }
            }
        }
    }
    return defect;
}

}  // namespace orbizeta
