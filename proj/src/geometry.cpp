#include "orbizeta/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace orbizeta {

namespace {

constexpr double kKernelTol = 1e-9;

void row_swap(IMat& S, IMat& U, IMat& Uinv, int i, int j) {
    S.row(i).swap(S.row(j));
    Uinv.row(i).swap(Uinv.row(j));
    U.col(i).swap(U.col(j));
}

void row_negate(IMat& S, IMat& U, IMat& Uinv, int i) {
    S.row(i) = -S.row(i);
    Uinv.row(i) = -Uinv.row(i);
    U.col(i) = -U.col(i);
}

void row_addmul(IMat& S, IMat& U, IMat& Uinv, int dst, int src, long long f) {
    // S_dst += f * S_src ; keeps B = U S V
    S.row(dst) += f * S.row(src);
    Uinv.row(dst) += f * Uinv.row(src);
    U.col(src) -= f * U.col(dst);
}

void col_swap(IMat& S, IMat& V, IMat& Vinv, int i, int j) {
    S.col(i).swap(S.col(j));
    Vinv.col(i).swap(Vinv.col(j));
    V.row(i).swap(V.row(j));
}

void col_negate(IMat& S, IMat& V, IMat& Vinv, int i) {
    S.col(i) = -S.col(i);
    Vinv.col(i) = -Vinv.col(i);
    V.row(i) = -V.row(i);
}

void col_addmul(IMat& S, IMat& V, IMat& Vinv, int dst, int src, long long f) {
    S.col(dst) += f * S.col(src);
    Vinv.col(dst) += f * Vinv.col(src);
    V.row(src) -= f * V.row(dst);
}

}  // namespace

SmithForm smith_normal_form(const IMat& B) {
    int r = int(B.rows()), c = int(B.cols());
    SmithForm f;
    f.S = B;
    f.U = IMat::Identity(r, r);
    f.Uinv = IMat::Identity(r, r);
    f.V = IMat::Identity(c, c);
    f.Vinv = IMat::Identity(c, c);
    IMat& S = f.S;
    int t = 0;
    while (t < std::min(r, c)) {
        // find pivot with minimal nonzero absolute value in S(t.., t..)
        int pi = -1, pj = -1;
        long long best = 0;
        for (int i = t; i < r; ++i)
            for (int j = t; j < c; ++j) {
                long long v = std::llabs(S(i, j));
                if (v != 0 && (pi < 0 || v < best)) {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        if (pi < 0) break;  // all zero
        if (pi != t) row_swap(S, f.U, f.Uinv, t, pi);
        if (pj != t) col_swap(S, f.V, f.Vinv, t, pj);
        if (S(t, t) < 0) row_negate(S, f.U, f.Uinv, t);
        bool clean = true;
        for (int i = t + 1; i < r; ++i) {
            long long q = S(i, t) / S(t, t);
            if (q != 0) row_addmul(S, f.U, f.Uinv, i, t, -q);
            if (S(i, t) != 0) clean = false;
        }
        for (int j = t + 1; j < c; ++j) {
            long long q = S(t, j) / S(t, t);
            if (q != 0) col_addmul(S, f.V, f.Vinv, j, t, -q);
            if (S(t, j) != 0) clean = false;
        }
        if (!clean) continue;  // remainder left somewhere, reduce again
        ++t;
    }
    return f;
}

void fixed_subspace(const RMat& rot, RMat& fixed_basis, RMat& normal_basis, RMat& tbar) {
    int m = int(rot.rows());
    RMat B = rot - RMat::Identity(m, m);
    Eigen::JacobiSVD<RMat> svd(B, Eigen::ComputeFullV);
    int n = 0;
    for (int i = 0; i < m; ++i)
        if (svd.singularValues()(i) < kKernelTol) ++n;
    fixed_basis = svd.matrixV().rightCols(n);
    normal_basis = svd.matrixV().leftCols(m - n);
    tbar = normal_basis.transpose() * rot * normal_basis;
}

double normal_determinant(const RMat& tbar) {
    int q = int(tbar.rows());
    if (q == 0) return 1.0;
    RMat D = tbar - RMat::Identity(q, q);
    Eigen::ComplexEigenSolver<Mat> es(tbar.cast<Cplx>());
    for (int i = 0; i < q; ++i)
        if (std::abs(es.eigenvalues()(i) - 1.0) < 1e-8)
            throw ComputeError("tbar has an eigenvalue 1: inconsistent fixed space");
    double det = std::abs(D.determinant());
    return 1.0 / det;
}

std::vector<FixedStratum> affine_fixed_set(const IsometryElement& gamma,
                                           const RVec& periods) {
    int m = int(gamma.rot.rows());
    IMat RL = lattice_matrix(gamma.rot, periods);
    IMat B = RL - IMat::Identity(m, m);
    RVec tau(m);
    for (int i = 0; i < m; ++i) tau(i) = gamma.trans(i) / periods(i);

    SmithForm f = smith_normal_form(B);
    RVec sigma = -(f.Uinv.cast<double>() * tau);

    std::vector<int> free_idx;
    std::vector<std::vector<double>> choices(m);
    for (int i = 0; i < m; ++i) {
        long long s = f.S(i, i);
        if (s == 0) {
            double frac = sigma(i) - std::round(sigma(i));
            if (std::abs(frac) > 1e-9) return {};  // no solutions
            free_idx.push_back(i);
            choices[i] = {0.0};
        } else {
            long long as = std::llabs(s);
            for (long long t = 0; t < as; ++t) {
                double v = (sigma(i) + double(t)) / double(s);
                v -= std::floor(v);
                choices[i].push_back(v);
            }
        }
    }

    RMat P = periods.asDiagonal();
    RMat Vinv_d = f.Vinv.cast<double>();
    int n = int(free_idx.size());

    RMat fixed_b, normal_b, tbar;
    fixed_subspace(gamma.rot, fixed_b, normal_b, tbar);
    if (int(fixed_b.cols()) != n)
        throw ComputeError("lattice fixed-direction count disagrees with the linear kernel");
    double dw = normal_determinant(tbar);

    RMat lat(m, n);
    for (int j = 0; j < n; ++j) lat.col(j) = P * Vinv_d.col(free_idx[j]);

    std::vector<FixedStratum> out;
    std::vector<int> pos(m, 0);
    while (true) {
        RVec v(m);
        for (int i = 0; i < m; ++i) v(i) = choices[i][pos[i]];
        RVec x = P * (Vinv_d * v);
        for (int i = 0; i < m; ++i) {
            x(i) = std::fmod(x(i), periods(i));
            if (x(i) < 0) x(i) += periods(i);
        }
        FixedStratum st;
        st.gamma = gamma.index;
        st.component_id = int(out.size());
        st.base_point = x;
        st.fixed_basis = fixed_b;
        st.normal_basis = normal_b;
        st.tbar = tbar;
        st.n = n;
        st.d_weight = dw;
        st.lattice_dirs = lat;
        out.push_back(std::move(st));
        // advance mixed-radix counter
        int i = 0;
        for (; i < m; ++i) {
            if (++pos[i] < int(choices[i].size())) break;
            pos[i] = 0;
        }
        if (i == m) break;
    }
    return out;
}

std::vector<std::vector<FixedStratum>> all_fixed_sets(const FiniteGroupAction& g,
                                                      const RVec& periods) {
    std::vector<std::vector<FixedStratum>> out(g.size());
    for (int a = 0; a < g.size(); ++a) out[a] = affine_fixed_set(g.elements[a], periods);
    return out;
}

std::vector<int> isotropy_group(const RVec& x, const FiniteGroupAction& g,
                                const RVec& periods, double tol) {
    std::vector<int> iso;
    for (int a = 0; a < g.size(); ++a) {
        RVec y = g.elements[a].rot * x + g.elements[a].trans - x;
        bool fixed = true;
        for (int i = 0; i < x.size(); ++i)
            if (std::abs(std::remainder(y(i), periods(i))) > tol) fixed = false;
        if (fixed) iso.push_back(a);
    }
    return iso;
}

bool subconjugate(const FiniteGroupAction& g, const std::vector<int>& h1,
                  const std::vector<int>& h2) {
    std::set<int> s2(h2.begin(), h2.end());
    for (int c = 0; c < g.size(); ++c) {
        bool ok = true;
        for (int a : h1)
            if (!s2.count(g.conj(a, c))) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

std::vector<FixedStratum> subgroup_fixed_set(const FiniteGroupAction& g,
                                             const std::vector<int>& subgroup,
                                             const RVec& periods) {
    int m = g.m;
    int r = int(subgroup.size());
    IMat B(r * m, m);
    RVec tau(r * m);
    RMat rot_any;
    for (int gi = 0; gi < r; ++gi) {
        const auto& e = g.elements[subgroup[gi]];
        IMat RL = lattice_matrix(e.rot, periods);
        B.block(gi * m, 0, m, m) = RL - IMat::Identity(m, m);
        for (int i = 0; i < m; ++i) tau(gi * m + i) = e.trans(i) / periods(i);
    }
    SmithForm f = smith_normal_form(B);
    RVec sigma = -(f.Uinv.cast<double>() * tau);
    std::vector<int> free_idx;
    std::vector<std::vector<double>> choices(m);
    for (int i = 0; i < r * m; ++i) {
        long long s = (i < m) ? f.S(i, i) : 0;
        if (i >= m || s == 0) {
            double frac = sigma(i) - std::round(sigma(i));
            if (std::abs(frac) > 1e-9) return {};
            if (i < m) {
                free_idx.push_back(i);
                choices[i] = {0.0};
            }
        } else {
            long long as = std::llabs(s);
            for (long long t = 0; t < as; ++t) {
                double v = (sigma(i) + double(t)) / double(s);
                v -= std::floor(v);
                choices[i].push_back(v);
            }
        }
    }
    RMat P = periods.asDiagonal();
    RMat Vinv_d = f.Vinv.cast<double>();
    int n = int(free_idx.size());
    RMat lat(m, n);
    for (int j = 0; j < n; ++j) lat.col(j) = P * Vinv_d.col(free_idx[j]);
    // orthonormal basis of the joint fixed directions
    RMat fixed_b(m, n);
    if (n > 0) {
        Eigen::HouseholderQR<RMat> qr(lat);
        fixed_b = qr.householderQ() * RMat::Identity(m, n);
    }

    std::vector<FixedStratum> out;
    std::vector<int> pos(m, 0);
    while (true) {
        RVec v(m);
        for (int i = 0; i < m; ++i) v(i) = choices[i][pos[i]];
        RVec x = P * (Vinv_d * v);
        for (int i = 0; i < m; ++i) {
            x(i) = std::fmod(x(i), periods(i));
            if (x(i) < 0) x(i) += periods(i);
        }
        FixedStratum st;
        st.gamma = -1;
        st.component_id = int(out.size());
        st.base_point = x;
        st.fixed_basis = fixed_b;
        st.n = n;
        st.d_weight = 1.0;
        st.lattice_dirs = lat;
        out.push_back(std::move(st));
        int i = 0;
        for (; i < m; ++i) {
            if (++pos[i] < int(choices[i].size())) break;
            pos[i] = 0;
        }
        if (i == m) break;
    }
    return out;
}

namespace {

std::vector<std::vector<int>> enumerate_subgroups(const FiniteGroupAction& g) {
    std::set<std::vector<int>> found;
    auto closure = [&](std::vector<int> seed) {
        std::set<int> s(seed.begin(), seed.end());
        s.insert(g.identity);
        bool grew = true;
        while (grew) {
            grew = false;
            std::vector<int> cur(s.begin(), s.end());
            for (int a : cur)
                for (int b : cur) {
                    if (s.insert(g.mul(a, b)).second) grew = true;
                    if (s.insert(g.inv[a]).second) grew = true;
                }
        }
        return std::vector<int>(s.begin(), s.end());
    };
    found.insert({g.identity});
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::vector<int>> cur(found.begin(), found.end());
        for (const auto& h : cur)
            for (int a = 0; a < g.size(); ++a) {
                std::vector<int> seed = h;
                seed.push_back(a);
                if (found.insert(closure(seed)).second) grew = true;
            }
    }
    return {found.begin(), found.end()};
}

bool subgroup_conjugate(const FiniteGroupAction& g, const std::vector<int>& h1,
                        const std::vector<int>& h2) {
    if (h1.size() != h2.size()) return false;
    return subconjugate(g, h1, h2) && subconjugate(g, h2, h1);
}

}  // namespace

Stratification orbit_type_poset(const FiniteGroupAction& g, const RVec& periods) {
    Stratification strat;
    auto subgroups = enumerate_subgroups(g);
    // generic-point isotropy per fixed component of each subgroup
    struct Piece {
        std::vector<int> iso;
        StratumComponent comp;
    };
    std::vector<Piece> pieces;
    for (const auto& h : subgroups) {
        auto comps = subgroup_fixed_set(g, h, periods);
        for (const auto& c : comps) {
            RVec x = c.base_point;
            for (int j = 0; j < c.n; ++j)
                x += (0.1098327 + 0.0371 * j) * c.lattice_dirs.col(j);
            auto iso = isotropy_group(x, g, periods);
            if (iso != h) continue;  // generic isotropy differs: not this type's stratum
            Piece p;
            p.iso = h;
            p.comp.base_point = c.base_point;
            p.comp.fixed_basis = c.fixed_basis;
            p.comp.lattice_dirs = c.lattice_dirs;
            p.comp.n = c.n;
            pieces.push_back(std::move(p));
        }
    }
    // group pieces into conjugacy classes of isotropy subgroups
    for (auto& p : pieces) {
        int tid = -1;
        for (size_t t = 0; t < strat.types.size(); ++t)
            if (subgroup_conjugate(g, p.iso, strat.types[t].subgroup)) {
                tid = int(t);
                break;
            }
        if (tid < 0) {
            OrbitType ot;
            ot.class_id = int(strat.types.size());
            ot.subgroup = p.iso;
            ot.order = int(p.iso.size());
            strat.types.push_back(ot);
            strat.strata.emplace_back();
            tid = ot.class_id;
        }
        p.comp.type_id = tid;
        strat.strata[tid].push_back(p.comp);
    }
    int nt = int(strat.types.size());
    strat.poset = Eigen::MatrixXi::Zero(nt, nt);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nt; ++j)
            strat.poset(i, j) =
                subconjugate(g, strat.types[i].subgroup, strat.types[j].subgroup) ? 1 : 0;
    return strat;
}

}  // namespace orbizeta
