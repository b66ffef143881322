#include "orbizeta/group.hpp"

#include <algorithm>
#include <cmath>

namespace orbizeta {

namespace {

constexpr double kEqTol = 1e-9;

RVec reduce_mod_periods(const RVec& t, const std::optional<RVec>& periods) {
    if (!periods) return t;
    RVec r = t;
    for (int i = 0; i < r.size(); ++i) {
        double p = (*periods)(i);
        r(i) = std::fmod(r(i), p);
        if (r(i) < -kEqTol) r(i) += p;
        if (std::abs(r(i) - p) < kEqTol) r(i) = 0.0;
        if (std::abs(r(i)) < kEqTol) r(i) = 0.0;
    }
    return r;
}

bool same_base_action(const IsometryElement& a, const IsometryElement& b,
                      const std::optional<RVec>& periods) {
    if ((a.rot - b.rot).cwiseAbs().maxCoeff() > kEqTol) return false;
    RVec d = a.trans - b.trans;
    if (periods) {
        for (int i = 0; i < d.size(); ++i) {
            double p = (*periods)(i);
            double r = std::remainder(d(i), p);
            if (std::abs(r) > kEqTol) return false;
        }
        return true;
    }
    return d.cwiseAbs().maxCoeff() <= kEqTol;
}

IsometryElement compose_elems(const IsometryElement& a, const IsometryElement& b,
                              const std::optional<RVec>& periods) {
    IsometryElement c;
    c.rot = a.rot * b.rot;
    c.trans = reduce_mod_periods(a.rot * b.trans + a.trans, periods);
    c.fiber = a.fiber * b.fiber;
    return c;
}

int find_element(const std::vector<IsometryElement>& elems, const IsometryElement& e,
                 const std::optional<RVec>& periods) {
    for (size_t i = 0; i < elems.size(); ++i)
        if (same_base_action(elems[i], e, periods)) return int(i);
    return -1;
}

void build_tables(FiniteGroupAction& g) {
    int n = g.size();
    g.mult.assign(n, std::vector<int>(n, -1));
    g.inv.assign(n, -1);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            IsometryElement c = compose_elems(g.elements[a], g.elements[b], g.periods);
            int idx = find_element(g.elements, c, g.periods);
            if (idx < 0) throw SpecError("group closure is not closed under multiplication");
            g.mult[a][b] = idx;
            if (idx == g.identity) g.inv[a] = b;
        }
    }
    for (int a = 0; a < n; ++a)
        if (g.inv[a] < 0) throw SpecError("group element without inverse");
}

void build_classes(FiniteGroupAction& g) {
    int n = g.size();
    g.classes.clear();
    g.class_of.assign(n, -1);
    for (int a = 0; a < n; ++a) {
        if (g.class_of[a] >= 0) continue;
        std::vector<int> cls;
        for (int h = 0; h < n; ++h) {
            int c = g.conj(a, h);
            if (g.class_of[c] < 0) {
                g.class_of[c] = int(g.classes.size());
                cls.push_back(c);
            }
        }
        std::sort(cls.begin(), cls.end());
        g.classes.push_back(cls);
    }
}

void check_generator(const GroupGenerator& gen) {
    int m = int(gen.rot.rows());
    if (gen.rot.cols() != m || gen.trans.size() != m)
        throw SpecError("generator dimensions inconsistent");
    double orth = (gen.rot.transpose() * gen.rot - RMat::Identity(m, m)).cwiseAbs().maxCoeff();
    if (orth > 1e-10) throw SpecError("generator rotation is not orthogonal");
    int k = int(gen.fiber.rows());
    double uni = (gen.fiber.adjoint() * gen.fiber - Mat::Identity(k, k)).cwiseAbs().maxCoeff();
    if (uni > 1e-10) throw SpecError("generator fiber matrix is not unitary");
}

IsometryElement identity_elem(int m, int k) {
    IsometryElement e;
    e.rot = RMat::Identity(m, m);
    e.trans = RVec::Zero(m);
    e.fiber = Mat::Identity(k, k);
    e.index = 0;
    return e;
}

}  // namespace

double GroupDiagnostics::max_violation() const {
    return std::max({assoc_defect, rot_orthogonality, fiber_unitarity, fiber_homomorphism,
                     char_orthogonality, sum_squares_defect, lattice_defect});
}

bool preserves_lattice(const RMat& rot, const RVec& periods, double tol) {
    int m = int(rot.rows());
    for (int j = 0; j < m; ++j) {
        // image of the j-th lattice basis vector, in lattice coordinates
        for (int i = 0; i < m; ++i) {
            double v = rot(i, j) * periods(j) / periods(i);
            if (std::abs(v - std::round(v)) > tol) return false;
        }
    }
    return true;
}

IMat lattice_matrix(const RMat& rot, const RVec& periods, double tol) {
    int m = int(rot.rows());
    IMat K(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double v = rot(i, j) * periods(j) / periods(i);
            if (std::abs(v - std::round(v)) > tol)
                throw SpecError("rotation does not preserve the period lattice");
            K(i, j) = (long long)std::llround(v);
        }
    return K;
}

FiniteGroupAction trivial_group(int m, int k, std::optional<RVec> periods) {
    FiniteGroupAction g;
    g.m = m;
    g.fiber_dim = k;
    g.periods = periods;
    g.elements.push_back(identity_elem(m, k));
    build_tables(g);
    build_classes(g);
    g.chars = Mat::Ones(1, 1);
    g.dims = {1};
    g.names = {"trivial"};
    return g;
}

FiniteGroupAction cyclic_group(int n, const GroupGenerator& gen,
                               std::optional<RVec> periods) {
    if (n < 1) throw SpecError("cyclic order must be >= 1");
    check_generator(gen);
    int m = int(gen.rot.rows());
    int k = int(gen.fiber.rows());
    FiniteGroupAction g;
    g.m = m;
    g.fiber_dim = k;
    g.periods = periods;
    IsometryElement e = identity_elem(m, k);
    IsometryElement cur = e;
    for (int a = 0; a < n; ++a) {
        cur.index = a;
        g.elements.push_back(cur);
        IsometryElement gm;
        gm.rot = gen.rot;
        gm.trans = gen.trans;
        gm.fiber = gen.fiber;
        cur = compose_elems(gm, cur, periods);
    }
    if (!same_base_action(cur, e, periods))
        throw SpecError("cyclic generator does not have the stated order");
    // faithfulness
    for (int a = 1; a < n; ++a)
        if (same_base_action(g.elements[a], e, periods))
            throw SpecError("cyclic base action is not faithful");
    build_tables(g);
    build_classes(g);
    // chi_j(g^a) = omega^{j a}; classes are singletons, class of g^a is found
    // through class_of.
    g.chars = Mat(n, int(g.classes.size()));
    Cplx omega = std::exp(Cplx(0.0, kTwoPi / n));
    for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a) g.chars(j, g.class_of[a]) = std::pow(omega, j * a);
    g.dims.assign(n, 1);
    for (int j = 0; j < n; ++j) g.names.push_back("chi" + std::to_string(j));
    return g;
}

FiniteGroupAction dihedral_group(int n, const GroupGenerator& r,
                                 const GroupGenerator& s,
                                 std::optional<RVec> periods) {
    if (n < 1) throw SpecError("dihedral parameter must be >= 1");
    check_generator(r);
    check_generator(s);
    int m = int(r.rot.rows());
    int k = int(r.fiber.rows());
    FiniteGroupAction g;
    g.m = m;
    g.fiber_dim = k;
    g.periods = periods;
    IsometryElement re;
    re.rot = r.rot; re.trans = r.trans; re.fiber = r.fiber;
    IsometryElement se;
    se.rot = s.rot; se.trans = s.trans; se.fiber = s.fiber;
    // elements r^a, then s r^a
    IsometryElement cur = identity_elem(m, k);
    std::vector<IsometryElement> rots;
    for (int a = 0; a < n; ++a) {
        rots.push_back(cur);
        cur = compose_elems(re, cur, periods);
    }
    if (!same_base_action(cur, rots[0], periods))
        throw SpecError("dihedral rotation does not have order n");
    for (int a = 0; a < n; ++a) {
        rots[a].index = a;
        g.elements.push_back(rots[a]);
    }
    for (int a = 0; a < n; ++a) {
        IsometryElement sr = compose_elems(se, rots[a], periods);
        sr.index = n + a;
        if (find_element(g.elements, sr, periods) >= 0)
            throw SpecError("dihedral base action is not faithful");
        g.elements.push_back(sr);
    }
    build_tables(g);
    build_classes(g);

    auto set_char = [&](Mat& chars, int irrep, int elem, Cplx v) {
        chars(irrep, g.class_of[elem]) = v;
    };
    int nc = int(g.classes.size());
    int l = (n % 2 == 0) ? 4 + n / 2 - 1 : 2 + (n - 1) / 2;
    Mat chars = Mat::Zero(l, nc);
    g.dims.clear();
    g.names.clear();
    // one-dimensional irreps
    for (int a = 0; a < n; ++a) {
        set_char(chars, 0, a, 1.0);
        set_char(chars, 0, n + a, 1.0);
        set_char(chars, 1, a, 1.0);
        set_char(chars, 1, n + a, -1.0);
    }
    g.dims.push_back(1); g.names.push_back("trivial");
    g.dims.push_back(1); g.names.push_back("det");
    int next = 2;
    if (n % 2 == 0) {
        for (int a = 0; a < n; ++a) {
            double sgn = (a % 2 == 0) ? 1.0 : -1.0;
            set_char(chars, 2, a, sgn);
            set_char(chars, 2, n + a, sgn);
            set_char(chars, 3, a, sgn);
            set_char(chars, 3, n + a, -sgn);
        }
        g.dims.push_back(1); g.names.push_back("alt1");
        g.dims.push_back(1); g.names.push_back("alt2");
        next = 4;
    }
    int ntwo = (n % 2 == 0) ? n / 2 - 1 : (n - 1) / 2;
    for (int h = 1; h <= ntwo; ++h) {
        for (int a = 0; a < n; ++a) {
            set_char(chars, next, a, 2.0 * std::cos(kTwoPi * h * a / n));
            set_char(chars, next, n + a, 0.0);
        }
        g.dims.push_back(2);
        g.names.push_back("rho" + std::to_string(h));
        ++next;
    }
    g.chars = chars;
    return g;
}

FiniteGroupAction cyclic_product_group(int n1, const GroupGenerator& g1, int n2,
                                       const GroupGenerator& g2,
                                       std::optional<RVec> periods) {
    check_generator(g1);
    check_generator(g2);
    int m = int(g1.rot.rows());
    int k = int(g1.fiber.rows());
    FiniteGroupAction g;
    g.m = m;
    g.fiber_dim = k;
    g.periods = periods;
    IsometryElement e1;
    e1.rot = g1.rot; e1.trans = g1.trans; e1.fiber = g1.fiber;
    IsometryElement e2;
    e2.rot = g2.rot; e2.trans = g2.trans; e2.fiber = g2.fiber;
    // commutation check
    IsometryElement ab = compose_elems(e1, e2, periods);
    IsometryElement ba = compose_elems(e2, e1, periods);
    if (!same_base_action(ab, ba, periods))
        throw SpecError("product generators do not commute");
    std::vector<IsometryElement> pow1, pow2;
    IsometryElement cur = identity_elem(m, k);
    for (int a = 0; a < n1; ++a) {
        pow1.push_back(cur);
        cur = compose_elems(e1, cur, periods);
    }
    cur = identity_elem(m, k);
    for (int b = 0; b < n2; ++b) {
        pow2.push_back(cur);
        cur = compose_elems(e2, cur, periods);
    }
    for (int a = 0; a < n1; ++a)
        for (int b = 0; b < n2; ++b) {
            IsometryElement el = compose_elems(pow1[a], pow2[b], periods);
            el.index = a * n2 + b;
            if (find_element(g.elements, el, periods) >= 0)
                throw SpecError("product base action is not faithful");
            g.elements.push_back(el);
        }
    build_tables(g);
    build_classes(g);
    int l = n1 * n2;
    g.chars = Mat(l, int(g.classes.size()));
    Cplx w1 = std::exp(Cplx(0.0, kTwoPi / n1));
    Cplx w2 = std::exp(Cplx(0.0, kTwoPi / n2));
    for (int j1 = 0; j1 < n1; ++j1)
        for (int j2 = 0; j2 < n2; ++j2) {
            int row = j1 * n2 + j2;
            for (int a = 0; a < n1; ++a)
                for (int b = 0; b < n2; ++b)
                    g.chars(row, g.class_of[a * n2 + b]) =
                        std::pow(w1, j1 * a) * std::pow(w2, j2 * b);
            g.names.push_back("chi" + std::to_string(j1) + "_" + std::to_string(j2));
        }
    g.dims.assign(l, 1);
    return g;
}

FiniteGroupAction group_from_generators(const std::vector<GroupGenerator>& gens,
                                        std::optional<RVec> periods, int max_order) {
    if (gens.empty()) throw SpecError("no generators given");
    for (const auto& gen : gens) check_generator(gen);
    int m = int(gens[0].rot.rows());
    int k = int(gens[0].fiber.rows());
    FiniteGroupAction g;
    g.m = m;
    g.fiber_dim = k;
    g.periods = periods;
    g.elements.push_back(identity_elem(m, k));
    std::vector<IsometryElement> gelems;
    for (const auto& gen : gens) {
        IsometryElement e;
        e.rot = gen.rot;
        e.trans = reduce_mod_periods(gen.trans, periods);
        e.fiber = gen.fiber;
        gelems.push_back(e);
    }
    size_t head = 0;
    while (head < g.elements.size()) {
        IsometryElement cur = g.elements[head++];
        for (const auto& gen : gelems) {
            IsometryElement nxt = compose_elems(gen, cur, periods);
            if (find_element(g.elements, nxt, periods) < 0) {
                nxt.index = int(g.elements.size());
                g.elements.push_back(nxt);
                if (int(g.elements.size()) > max_order)
                    throw SpecError("group closure exceeds the configured max order");
            }
        }
    }
    build_tables(g);
    build_classes(g);
    return g;  // no character table yet; attach_character_table must follow
}

void attach_character_table(FiniteGroupAction& g, const Mat& chars,
                            const std::vector<int>& dims,
                            const std::vector<std::string>& names) {
    int nc = int(g.classes.size());
    if (chars.cols() != nc) throw SpecError("character table has wrong number of classes");
    int l = int(chars.rows());
    if (int(dims.size()) != l) throw SpecError("dims length mismatch");
    // row orthogonality with class sizes
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
            Cplx acc = 0.0;
            for (int c = 0; c < nc; ++c)
                acc += double(g.classes[c].size()) * chars(i, c) * std::conj(chars(j, c));
            Cplx expect = (i == j) ? Cplx(double(g.size()), 0.0) : Cplx(0.0, 0.0);
            if (std::abs(acc - expect) > 1e-8)
                throw SpecError("character table fails row orthogonality");
        }
    int ss = 0;
    for (int d : dims) ss += d * d;
    if (ss != g.size()) throw SpecError("sum of squared dimensions != group order");
    // trivial first
    for (int c = 0; c < nc; ++c)
        if (std::abs(chars(0, c) - 1.0) > 1e-10)
            throw SpecError("first character row must be trivial");
    g.chars = chars;
    g.dims = dims;
    g.names = names.empty() ? std::vector<std::string>(l, "irrep") : names;
}

GroupDiagnostics verify_action(const FiniteGroupAction& g, std::optional<RVec> periods) {
    GroupDiagnostics d;
    int n = g.size();
    int m = g.m;
    // associativity on indices (exhaustive up to 64, sampled beyond)
    if (n <= 64) {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) d.assoc_defect = 1.0;
    } else {
        for (int trial = 0; trial < 4096; ++trial) {
            int a = (trial * 2654435761u) % n, b = (trial * 40503u + 1) % n,
                c = (trial * 9973u + 7) % n;
            if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) d.assoc_defect = 1.0;
        }
    }
    for (const auto& e : g.elements) {
        d.rot_orthogonality = std::max(
            d.rot_orthogonality,
            (e.rot.transpose() * e.rot - RMat::Identity(m, m)).cwiseAbs().maxCoeff());
        d.fiber_unitarity = std::max(
            d.fiber_unitarity, (e.fiber.adjoint() * e.fiber -
                                Mat::Identity(g.fiber_dim, g.fiber_dim))
                                   .cwiseAbs()
                                   .maxCoeff());
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            int c = g.mul(a, b);
            d.fiber_homomorphism =
                std::max(d.fiber_homomorphism,
                         (g.elements[a].fiber * g.elements[b].fiber - g.elements[c].fiber)
                             .cwiseAbs()
                             .maxCoeff());
        }
    if (g.chars.size() > 0) {
        int l = g.n_irreps();
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < l; ++j) {
                Cplx acc = 0.0;
                for (int a = 0; a < n; ++a)
                    acc += g.character(i, a) * std::conj(g.character(j, a));
                Cplx expect = (i == j) ? Cplx(double(n), 0.0) : Cplx(0.0, 0.0);
                d.char_orthogonality = std::max(d.char_orthogonality, std::abs(acc - expect));
            }
        int ss = 0;
        for (int kd : g.dims) ss += kd * kd;
        d.sum_squares_defect = std::abs(double(ss - n));
    }
    std::optional<RVec> per = periods ? periods : g.periods;
    if (per) {
        for (const auto& e : g.elements)
            if (!preserves_lattice(e.rot, *per)) d.lattice_defect = 1.0;
    }
    return d;
}

std::vector<Cplx> isotypic_weights(const FiniteGroupAction& g, int irrep) {
    if (irrep < 0 || irrep >= g.n_irreps()) throw SpecError("irrep index out of range");
    std::vector<Cplx> w(g.size());
    for (int a = 0; a < g.size(); ++a)
        w[a] = double(g.dims[irrep]) * g.character(irrep, g.inv[a]) / double(g.size());
    return w;
}

Mat regular_projection(const FiniteGroupAction& g, int irrep) {
    int n = g.size();
    auto w = isotypic_weights(g, irrep);
    Mat P = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) P(g.mul(a, b), b) += w[a];
    return P;
}

}  // namespace orbizeta
