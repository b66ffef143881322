#include "orbizeta/problem.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace orbizeta {

namespace fs = std::filesystem;

// ------------------------------------------------------------------- parsing

namespace {

const Json& need(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw SpecError(path + " must be an object");
    auto it = j.find(key);
    if (it == j.end()) throw SpecError("missing field " + path + "." + key);
    return *it;
}

double num(const Json& j, const std::string& path) {
    if (!j.is_number()) throw SpecError(path + " must be a number");
    return j.get<double>();
}

int integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw SpecError(path + " must be an integer");
    return j.get<int>();
}

RVec rvec(const Json& j, int len, const std::string& path) {
    if (!j.is_array() || int(j.size()) != len)
        throw SpecError(path + " must be an array of length " + std::to_string(len));
    RVec v(len);
    for (int i = 0; i < len; ++i) v(i) = num(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

RMat rmat(const Json& j, int rows, int cols, const std::string& path) {
    if (!j.is_array() || int(j.size()) != rows)
        throw SpecError(path + " must be a " + std::to_string(rows) + "-row matrix");
    RMat out(rows, cols);
    for (int i = 0; i < rows; ++i)
        out.row(i) = rvec(j[i], cols, path + "[" + std::to_string(i) + "]").transpose();
    return out;
}

Mat cmat(const Json& parent, const char* re_key, const char* im_key, int k,
         const std::string& path) {
    Mat out = Mat::Zero(k, k);
    if (parent.contains(re_key))
        out += rmat(parent.at(re_key), k, k, path + "." + re_key).cast<Cplx>();
    if (parent.contains(im_key))
        out += Cplx(0, 1) * rmat(parent.at(im_key), k, k, path + "." + im_key).cast<Cplx>();
    return out;
}

GroupGenerator parse_generator(const Json& j, int m, int k, const RVec* periods,
                               const std::string& path) {
    GroupGenerator g;
    g.rot = rmat(need(j, "rot", path), m, m, path + ".rot");
    if ((g.rot.transpose() * g.rot - RMat::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-9)
        throw SpecError(path + ".rot is not orthogonal");
    if (periods && !preserves_lattice(g.rot, *periods))
        throw SpecError(path + ".rot does not preserve the period lattice");
    g.trans = j.contains("trans") ? rvec(j.at("trans"), m, path + ".trans") : RVec::Zero(m);
    if (j.contains("fiber_re") || j.contains("fiber_im")) {
        g.fiber = cmat(j, "fiber_re", "fiber_im", k, path);
        if ((g.fiber.adjoint() * g.fiber - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-9)
            throw SpecError(path + ".fiber is not unitary");
    } else {
        g.fiber = Mat::Identity(k, k);
    }
    return g;
}

Coefficient parse_trig(const Json& j, int m, int k, const RVec& freq_scale,
                       const std::string& path) {
    if (!j.is_array()) throw SpecError(path + " must be an array of Fourier terms");
    TrigPolyData d;
    d.freq_scale = freq_scale;
    for (size_t i = 0; i < j.size(); ++i) {
        std::string p = path + "[" + std::to_string(i) + "]";
        const Json& term = j[i];
        const Json& fq = need(term, "freq", p);
        if (!fq.is_array() || int(fq.size()) != m)
            throw SpecError(p + ".freq must be an integer array of length " +
                            std::to_string(m));
        std::vector<int> f(m);
        for (int a = 0; a < m; ++a) f[a] = integer(fq[a], p + ".freq");
        Mat c = cmat(term, "re", "im", k, p);
        auto it = d.terms.find(f);
        if (it == d.terms.end())
            d.terms[f] = c;
        else
            it->second += c;
    }
    return Coefficient::trig(std::move(d));
}

Coefficient parse_jet(const Json& j, int m, int k, const std::string& path) {
    JetData d;
    d.base = j.contains("base") ? rvec(j.at("base"), m, path + ".base") : RVec::Zero(m);
    d.order = integer(need(j, "order", path), path + ".order");
    const Json& terms = need(j, "coeffs", path);
    for (size_t i = 0; i < terms.size(); ++i) {
        std::string p = path + ".coeffs[" + std::to_string(i) + "]";
        const Json& al = need(terms[i], "alpha", p);
        MIdx alpha(m);
        for (int a = 0; a < m; ++a) alpha[a] = integer(al[a], p + ".alpha");
        if (midx_abs(alpha) > d.order) throw SpecError(p + ".alpha exceeds the jet order");
        d.coeffs[alpha] = cmat(terms[i], "re", "im", k, p);
    }
    return Coefficient::jet(std::move(d));
}

}  // namespace

std::string content_hash(const Json& doc) {
    std::string s = doc.dump();
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

ProblemSpec parse_spec_json(const Json& doc) {
    ProblemSpec spec;
    spec.hash = content_hash(doc);
    if (need(doc, "spec_version", "$").get<int>() != 1)
        throw SpecError("spec_version must be 1");

    const Json& model = need(doc, "model", "$");
    spec.m = integer(need(model, "m", "model"), "model.m");
    if (spec.m < 1) throw SpecError("model.m must be >= 1");
    std::string chart = model.contains("chart_mode") ? model.at("chart_mode").get<std::string>()
                                                     : std::string("torus");
    if (chart != "torus" && chart != "linear")
        throw SpecError("model.chart_mode must be torus or linear");
    spec.torus = (chart == "torus");
    if (spec.torus) {
        spec.periods = rvec(need(model, "periods", "model"), spec.m, "model.periods");
        for (int i = 0; i < spec.m; ++i)
            if (spec.periods(i) <= 0) throw SpecError("model.periods must be positive");
    } else {
        spec.periods = RVec::Ones(spec.m);
    }

    const Json& op = need(doc, "operator", "$");
    spec.k = op.contains("k") ? integer(op.at("k"), "operator.k") : 1;
    if (spec.k < 1) throw SpecError("operator.k must be >= 1");
    spec.c0 = num(need(op, "c0", "operator"), "operator.c0");
    spec.scale = op.contains("scale") ? num(op.at("scale"), "operator.scale") : 1.0;
    if (spec.scale <= 0) throw SpecError("operator.scale must be positive");

    // compute block first: jet parsing needs jet_order context
    if (doc.contains("compute")) {
        const Json& cm = doc.at("compute");
        if (cm.contains("k_max")) spec.compute.k_max = integer(cm.at("k_max"), "compute.k_max");
        if (spec.compute.k_max < 0) throw SpecError("compute.k_max must be >= 0");
        if (cm.contains("backend")) {
            std::string b = cm.at("backend").get<std::string>();
            if (b == "exact")
                spec.compute.backend = Backend::Exact;
            else if (b == "contour")
                spec.compute.backend = Backend::Contour;
            else
                throw SpecError("compute.backend must be exact or contour");
        }
        if (cm.contains("sphere_level"))
            spec.compute.sphere_level = integer(cm.at("sphere_level"), "compute.sphere_level");
        if (cm.contains("strata_nodes"))
            spec.compute.strata_nodes = integer(cm.at("strata_nodes"), "compute.strata_nodes");
        if (cm.contains("jet_order"))
            spec.compute.jet_order = integer(cm.at("jet_order"), "compute.jet_order");
    }
    if (!spec.torus && spec.compute.jet_order < spec.compute.k_max)
        throw SpecError("compute.jet_order < k_max in linear chart mode");

    RVec freq_scale(spec.m);
    for (int i = 0; i < spec.m; ++i) freq_scale(i) = kTwoPi / spec.periods(i);
    if (op.contains("potential"))
        spec.potential = parse_trig(op.at("potential"), spec.m, spec.k, freq_scale,
                                    "operator.potential");
    else if (op.contains("potential_jet"))
        spec.potential = parse_jet(op.at("potential_jet"), spec.m, spec.k,
                                   "operator.potential_jet");
    if (op.contains("first_order")) {
        const Json& fo = op.at("first_order");
        if (!fo.is_array() || int(fo.size()) != spec.m)
            throw SpecError("operator.first_order must have one entry per axis");
        for (int i = 0; i < spec.m; ++i)
            spec.first_order.push_back(parse_trig(
                fo[i], spec.m, spec.k, freq_scale,
                "operator.first_order[" + std::to_string(i) + "]"));
    }

    const Json& grp = need(doc, "group", "$");
    std::string kind = need(grp, "kind", "group").get<std::string>();
    std::optional<RVec> periods =
        spec.torus ? std::optional<RVec>(spec.periods) : std::nullopt;
    const RVec* pp = spec.torus ? &spec.periods : nullptr;
    auto gen_at = [&](size_t i) {
        const Json& gens = need(grp, "generators", "group");
        if (!gens.is_array() || gens.size() <= i)
            throw SpecError("group.generators needs at least " + std::to_string(i + 1) +
                            " entries");
        return parse_generator(gens[i], spec.m, spec.k, pp,
                               "group.generators[" + std::to_string(i) + "]");
    };
    if (kind == "trivial") {
        spec.group = trivial_group(spec.m, spec.k, periods);
    } else if (kind == "cyclic") {
        int n = integer(need(grp, "order", "group"), "group.order");
        spec.group = cyclic_group(n, gen_at(0), periods);
    } else if (kind == "dihedral") {
        int n = integer(need(grp, "order", "group"), "group.order");
        spec.group = dihedral_group(n, gen_at(0), gen_at(1), periods);
    } else if (kind == "product") {
        int n1 = integer(need(grp, "order1", "group"), "group.order1");
        int n2 = integer(need(grp, "order2", "group"), "group.order2");
        spec.group = cyclic_product_group(n1, gen_at(0), n2, gen_at(1), periods);
    } else if (kind == "generators") {
        const Json& gens = need(grp, "generators", "group");
        std::vector<GroupGenerator> gg;
        for (size_t i = 0; i < gens.size(); ++i) gg.push_back(gen_at(i));
        spec.group = group_from_generators(gg, periods);
        if (grp.contains("character_table")) {
            const Json& ct = grp.at("character_table");
            int nc = int(spec.group.classes.size());
            const Json& dims_j = need(ct, "dims", "group.character_table");
            std::vector<int> dims;
            for (size_t i = 0; i < dims_j.size(); ++i)
                dims.push_back(integer(dims_j[i], "group.character_table.dims"));
            Mat chars = cmat(ct, "re", "im", 0, "group.character_table");
            chars = Mat::Zero(int(dims.size()), nc);
            chars += rmat(need(ct, "re", "group.character_table"), int(dims.size()), nc,
                          "group.character_table.re")
                         .cast<Cplx>();
            if (ct.contains("im"))
                chars += Cplx(0, 1) * rmat(ct.at("im"), int(dims.size()), nc,
                                           "group.character_table.im")
                                          .cast<Cplx>();
            std::vector<std::string> names;
            for (size_t i = 0; i < dims.size(); ++i)
                names.push_back("irrep" + std::to_string(i));
            if (ct.contains("names"))
                for (size_t i = 0; i < dims.size(); ++i)
                    names[i] = ct.at("names")[i].get<std::string>();
            attach_character_table(spec.group, chars, dims, names);
        } else if (spec.group.chars.size() == 0) {
            throw SpecError("group.character_table is required for generator-built groups");
        }
    } else {
        throw SpecError("group.kind must be trivial, cyclic, dihedral, product or generators");
    }

    GroupDiagnostics diag = verify_action(spec.group, periods);
    if (diag.max_violation() > 1e-8)
        throw SpecError("group fails validation (max violation " +
                        std::to_string(diag.max_violation()) + ")");

    if (doc.contains("oracle")) {
        const Json& oj = doc.at("oracle");
        if (oj.contains("enabled")) spec.oracle.enabled = oj.at("enabled").get<bool>();
        if (oj.contains("cutoff")) spec.oracle.cutoff = integer(oj.at("cutoff"), "oracle.cutoff");
        if (oj.contains("tolerance_exact"))
            spec.oracle.tol_exact = num(oj.at("tolerance_exact"), "oracle.tolerance_exact");
        if (oj.contains("tolerance_fit"))
            spec.oracle.tol_fit = num(oj.at("tolerance_fit"), "oracle.tolerance_fit");
    }
    return spec;
}

ProblemSpec parse_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot read spec file " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw SpecError(std::string("invalid JSON: ") + e.what());
    }
    return parse_spec_json(doc);
}

ClassicalSymbol build_symbol(const ProblemSpec& spec) {
    Coefficient pot = spec.potential
                          ? *spec.potential
                          : Coefficient::constant(Mat::Zero(spec.k, spec.k), spec.m);
    return from_laplace_type(spec.m, spec.k, spec.c0, spec.first_order, pot, spec.scale);
}

LatticeModel build_model(const ProblemSpec& spec) {
    if (!spec.torus) throw SpecError("the oracle requires a torus model");
    LatticeModel model;
    model.m = spec.m;
    model.periods = spec.periods;
    model.group = spec.group;
    model.scale = spec.scale;
    model.c0 = spec.c0;
    model.k = spec.k;
    model.potential = spec.potential;
    model.first_order = spec.first_order;
    model.cutoff = spec.oracle.cutoff;
    return model;
}

// --------------------------------------------------------------------- cache

Cache Cache::standard() {
    const char* env = std::getenv("ORBIZETA_CACHE_DIR");
    if (env && *env) return Cache(env);
    const char* home = std::getenv("HOME");
    if (home && *home) return Cache(std::string(home) + "/.cache/orbizeta");
    return Cache(".orbizeta-cache");
}

Cache::Cache(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    // degrade to no-cache when the directory cannot be used
    enabled_ = !ec && fs::is_directory(dir_);
    if (enabled_) {
        std::ofstream probe(dir_ + "/.probe");
        enabled_ = probe.good();
        probe.close();
        fs::remove(dir_ + "/.probe", ec);
    }
}

std::optional<Json> Cache::get(const std::string& key) const {
    if (!enabled_) return std::nullopt;
    std::ifstream in(dir_ + "/" + key + ".json");
    if (!in) return std::nullopt;
    Json wrapper;
    try {
        in >> wrapper;
    } catch (...) {
        return std::nullopt;
    }
    if (!wrapper.contains("checksum") || !wrapper.contains("payload")) return std::nullopt;
    if (wrapper.at("checksum").get<std::string>() != content_hash(wrapper.at("payload")))
        return std::nullopt;  // corrupted entry -> recompute
    return wrapper.at("payload");
}

void Cache::put(const std::string& key, const Json& payload) const {
    if (!enabled_) return;
    Json wrapper;
    wrapper["checksum"] = content_hash(payload);
    wrapper["payload"] = payload;
    std::string tmp = dir_ + "/." + key + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) return;
        out << wrapper.dump();
    }
    std::error_code ec;
    fs::rename(tmp, dir_ + "/" + key + ".json", ec);
}

int Cache::clear() const {
    if (!enabled_) return 0;
    int n = 0;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir_, ec)) {
        if (e.path().extension() == ".json") {
            fs::remove(e.path(), ec);
            ++n;
        }
    }
    return n;
}

// -------------------------------------------------- power family (de)serialization

namespace {

std::optional<Json> coeff_to_json(const Coefficient& c) {
    if (c.kind() != Coefficient::Kind::Trig) return std::nullopt;
    const auto& td = c.trig_data();
    Json j;
    j["freq_scale"] = std::vector<double>(td.freq_scale.data(),
                                          td.freq_scale.data() + td.freq_scale.size());
    Json terms = Json::array();
    for (const auto& [f, m] : td.terms) {
        Json t;
        t["freq"] = f;
        std::vector<std::vector<double>> re(m.rows()), im(m.rows());
        for (int r = 0; r < m.rows(); ++r)
            for (int cc = 0; cc < m.cols(); ++cc) {
                re[r].push_back(m(r, cc).real());
                im[r].push_back(m(r, cc).imag());
            }
        t["re"] = re;
        t["im"] = im;
        terms.push_back(t);
    }
    j["terms"] = terms;
    return j;
}

Coefficient coeff_from_json(const Json& j) {
    TrigPolyData d;
    auto fsv = j.at("freq_scale").get<std::vector<double>>();
    d.freq_scale = Eigen::Map<RVec>(fsv.data(), fsv.size());
    for (const auto& t : j.at("terms")) {
        auto f = t.at("freq").get<std::vector<int>>();
        auto re = t.at("re").get<std::vector<std::vector<double>>>();
        auto im = t.at("im").get<std::vector<std::vector<double>>>();
        int k = int(re.size());
        Mat m(k, k);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) m(r, c) = Cplx(re[r][c], im[r][c]);
        d.terms[f] = m;
    }
    return Coefficient::trig(std::move(d));
}

}  // namespace

Json power_family_to_json(const PowerSymbolFamily& fam) {
    Json j;
    j["scale"] = fam.scale;
    j["m"] = fam.m;
    j["k"] = fam.k;
    Json comps = Json::array();
    for (const auto& comp : fam.comps) {
        Json terms = Json::array();
        for (const auto& t : comp) {
            auto cj = coeff_to_json(t.coeff);
            if (!cj) return Json();  // jets are not cached
            Json tj;
            std::vector<std::vector<double>> poly;
            for (int i = 0; i < t.polyS.size(); ++i)
                poly.push_back({t.polyS(i).real(), t.polyS(i).imag()});
            tj["polyS"] = poly;
            tj["xi"] = t.xi;
            tj["qshift"] = t.qshift;
            tj["coeff"] = *cj;
            terms.push_back(tj);
        }
        comps.push_back(terms);
    }
    j["comps"] = comps;
    return j;
}

std::optional<PowerSymbolFamily> power_family_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("comps")) return std::nullopt;
    try {
        PowerSymbolFamily fam;
        fam.scale = j.at("scale").get<double>();
        fam.m = j.at("m").get<int>();
        fam.k = j.at("k").get<int>();
        for (const auto& comp : j.at("comps")) {
            std::vector<PowerTerm> terms;
            for (const auto& tj : comp) {
                PowerTerm t;
                auto poly = tj.at("polyS").get<std::vector<std::vector<double>>>();
                t.polyS.resize(poly.size());
                for (size_t i = 0; i < poly.size(); ++i)
                    t.polyS(i) = Cplx(poly[i][0], poly[i][1]);
                t.xi = tj.at("xi").get<std::vector<int>>();
                t.qshift = tj.at("qshift").get<int>();
                t.coeff = coeff_from_json(tj.at("coeff"));
                terms.push_back(std::move(t));
            }
            fam.comps.push_back(std::move(terms));
        }
        return fam;
    } catch (...) {
        return std::nullopt;
    }
}

// --------------------------------------------------------------- run_residues

namespace {

Json cplx_row(Cplx v) {
    Json j;
    j["re"] = v.real();
    j["im"] = v.imag();
    return j;
}

std::string power_key(const ProblemSpec& spec) {
    Json key;
    key["m"] = spec.m;
    key["k"] = spec.k;
    key["c0"] = spec.c0;
    key["scale"] = spec.scale;
    key["periods"] = std::vector<double>(spec.periods.data(),
                                         spec.periods.data() + spec.periods.size());
    if (spec.potential) {
        auto pj = coeff_to_json(*spec.potential);
        key["potential"] = pj ? *pj : Json("jet");
    }
    Json fo = Json::array();
    for (const auto& b : spec.first_order) {
        auto bj = coeff_to_json(b);
        fo.push_back(bj ? *bj : Json("jet"));
    }
    key["first_order"] = fo;
    return "power_" + content_hash(key);
}

Json linear_mode_report(const ProblemSpec& spec) {
    // linear chart: densities at the chart origin only
    ClassicalSymbol sym = build_symbol(spec);
    int k_max = spec.compute.k_max;
    PowerSymbolFamily fam = cauchy_power(resolvent_recursion(sym, k_max));
    Json report;
    report["chart_mode"] = "linear";
    Json dens = Json::array();
    std::map<int, SphereQuad> quads;
    for (int g = 0; g < spec.group.size(); ++g) {
        const auto& el = spec.group.elements[g];
        if (el.trans.cwiseAbs().maxCoeff() > 1e-12) continue;
        FixedStratum st;
        st.gamma = g;
        fixed_subspace(el.rot, st.fixed_basis, st.normal_basis, st.tbar);
        st.n = int(st.fixed_basis.cols());
        st.base_point = RVec::Zero(spec.m);
        st.lattice_dirs = st.fixed_basis;
        st.d_weight = normal_determinant(st.tbar);
        if (st.n == 0) continue;
        if (!quads.count(st.n)) quads[st.n] = sphere_quadrature(st.n, spec.compute.sphere_level);
        for (int k = 0; k <= k_max; ++k) {
            ReducedDensity rd = reduce_density(fam, st, k);
            Cplx v = rd.terms.empty()
                         ? Cplx(0, 0)
                         : eval_density(rd, st, el.fiber, st.base_point, quads[st.n],
                                        sym.scale);
            Json row;
            row["gamma"] = g;
            row["stratum"] = 0;
            row["k"] = k;
            row["s"] = 0.5 * (k - spec.m);
            row["x"] = std::vector<double>(spec.m, 0.0);
            row["re"] = v.real();
            row["im"] = v.imag();
            dens.push_back(row);
        }
    }
    report["densities"] = dens;
    return report;
}

}  // namespace

ResidueArtifact run_residues(const ProblemSpec& spec, const Cache& cache) {
    ResidueArtifact art;
    art.hash = spec.hash;
    std::string art_key = "artifact_" + spec.hash;
    if (auto hit = cache.get(art_key)) {
        art.cache_hit = true;
        art.report = *hit;
        return art;
    }
    auto t0 = std::chrono::steady_clock::now();

    if (!spec.torus) {
        art.report = linear_mode_report(spec);
        art.report["hash"] = spec.hash;
        cache.put(art_key, art.report);
        return art;
    }

    ClassicalSymbol sym = build_symbol(spec);
    int k_max = spec.compute.k_max;

    std::optional<PowerSymbolFamily> preset;
    std::string pkey = power_key(spec);
    if (spec.compute.backend == Backend::Exact) {
        if (auto pj = cache.get(pkey)) preset = power_family_from_json(*pj);
        if (preset && int(preset->comps.size()) < k_max + 1) preset.reset();
    }

    ResidueCalculator calc(sym, spec.group, k_max, spec.compute.sphere_level,
                           spec.compute.strata_nodes, spec.compute.backend,
                           preset ? &*preset : nullptr);
    if (!preset && spec.compute.backend == Backend::Exact) {
        Json pj = power_family_to_json(calc.power_family());
        if (!pj.is_null()) cache.put(pkey, pj);
    }

    Json report;
    report["spec_version"] = 1;
    report["hash"] = spec.hash;
    report["m"] = spec.m;
    report["equivariance_defect"] = calc.equivariance();

    Json ggamma = Json::array(), giso = Json::array(), gorb = Json::array();
    for (int k = 0; k <= k_max; ++k) {
        double s = 0.5 * (k - spec.m);
        for (int g = 0; g < spec.group.size(); ++g) {
            Json row = cplx_row(calc.residue_gamma(g, k));
            row["gamma"] = g;
            row["k"] = k;
            row["s"] = s;
            ggamma.push_back(row);
        }
        for (int i = 0; i < spec.group.n_irreps(); ++i) {
            Json row = cplx_row(calc.residue_isotypic(i, k));
            row["irrep"] = i;
            row["name"] = spec.group.names.empty() ? ("irrep" + std::to_string(i))
                                                   : spec.group.names[i];
            row["k"] = k;
            row["s"] = s;
            giso.push_back(row);
        }
        Json row = cplx_row(calc.residue_orbifold(k));
        row["k"] = k;
        row["s"] = s;
        gorb.push_back(row);
    }
    report["residues"]["gamma"] = ggamma;
    report["residues"]["isotypic"] = giso;
    report["residues"]["orbifold"] = gorb;

    Stratification strat = orbit_type_poset(spec.group, spec.periods);
    Json st = Json::array();
    for (int k = 0; k <= k_max; ++k) {
        for (const auto& row : calc.strata_table(k, strat)) {
            Json r = cplx_row(row.integral);
            r["type"] = row.type_id;
            r["component"] = row.component;
            r["dim"] = row.dim;
            r["volume"] = row.volume;
            r["k"] = k;
            st.push_back(r);
        }
    }
    report["strata"] = st;
    Json types = Json::array();
    for (const auto& t : strat.types) {
        Json r;
        r["subgroup"] = t.subgroup;
        r["order"] = t.order;
        types.push_back(r);
    }
    report["orbit_types"] = types;

    // density tables on coarse per-component grids
    Json dens = Json::array();
    int gpts = std::min(6, spec.compute.strata_nodes);
    for (int g = 0; g < spec.group.size(); ++g) {
        const auto& comps = calc.fixed_sets()[g];
        for (size_t ci = 0; ci < comps.size(); ++ci) {
            const auto& stc = comps[ci];
            long total = 1;
            for (int i = 0; i < stc.n; ++i) total *= gpts;
            for (int k = 0; k <= k_max; ++k) {
                std::vector<int> idx(std::max(stc.n, 0), 0);
                for (long c = 0; c < total; ++c) {
                    RVec u = RVec::Zero(stc.n);
                    for (int i = 0; i < stc.n; ++i) u(i) = double(idx[i]) / gpts;
                    RVec x = stc.base_point + stc.lattice_dirs * u;
                    Cplx v = calc.density_at(g, k, x);
                    Json row;
                    row["gamma"] = g;
                    row["stratum"] = int(ci);
                    row["k"] = k;
                    row["x"] =
                        std::vector<double>(x.data(), x.data() + x.size());
                    row["re"] = v.real();
                    row["im"] = v.imag();
                    dens.push_back(row);
                    int i = 0;
                    while (i < stc.n && ++idx[i] == gpts) idx[i++] = 0;
                }
            }
        }
    }
    report["densities"] = dens;

    auto t1 = std::chrono::steady_clock::now();
    report["timings"]["total_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    report["versions"]["orbizeta"] = "0.1.0";

    art.report = report;
    cache.put(art_key, art.report);
    return art;
}

// ----------------------------------------------------------------- run_verify

VerifyResult run_verify(const ProblemSpec& spec) {
    VerifyResult out;
    if (!spec.oracle.enabled) {
        out.skipped = true;
        out.table["status"] = "skipped";
        return out;
    }
    ClassicalSymbol sym = build_symbol(spec);
    int k_max = spec.compute.k_max;
    ResidueCalculator calc(sym, spec.group, k_max, spec.compute.sphere_level,
                           spec.compute.strata_nodes);
    LatticeModel model = build_model(spec);
    bool constant = model.constant_coefficients();

    int G = spec.group.size();
    // per-gamma oracle residues; checked[g][k] = false where the oracle has
    // nothing to say (degenerate Gamma factor in the fit path)
    std::vector<std::vector<Cplx>> oracle_res(G, std::vector<Cplx>(k_max + 1, 0.0));
    std::vector<std::vector<bool>> checked(G, std::vector<bool>(k_max + 1, true));
    double tol = constant ? spec.oracle.tol_exact : spec.oracle.tol_fit;
    std::string source = constant ? "continuation" : "heat_fit";

    std::optional<NumericSpectrum> sp;
    if (!constant) sp = numeric_spectrum(model);
    for (int g = 0; g < G; ++g) {
        if (constant) {
            TwistedZetaContinuation tz = constant_case_zeta(model, g);
            for (int k = 0; k <= k_max; ++k)
                oracle_res[g][k] = oracle_residue_s(tz, k, spec.m);
        } else {
            int n_fit = calc.fixed_sets()[g].empty()
                            ? 0
                            : calc.fixed_sets()[g][0].n;
            if (calc.fixed_sets()[g].empty()) {
                // free element: fit against the full power ladder; singular
                // coefficients should vanish
                RMat rot = spec.group.elements[g].rot;
                RMat F, N, tb;
                fixed_subspace(rot, F, N, tb);
                n_fit = int(F.cols());
            }
            HeatFitResult fit = heat_fit_residues(model, *sp, g, n_fit, k_max);
            for (int k = 0; k <= k_max; ++k) {
                oracle_res[g][k] = fit.res_by_k[k];
                checked[g][k] = fit.checked[k];
            }
        }
    }

    Json rows = Json::array();
    auto add_row = [&](const std::string& label, int k, Cplx engine, Cplx oracle,
                       bool is_checked) {
        Json r;
        r["label"] = label;
        r["k"] = k;
        r["engine_re"] = engine.real();
        r["engine_im"] = engine.imag();
        r["oracle_re"] = oracle.real();
        r["oracle_im"] = oracle.imag();
        r["source"] = source;
        if (!is_checked) {
            r["status"] = "skipped";
        } else {
            bool pass = std::abs(engine - oracle) <= tol;
            r["status"] = pass ? "pass" : "fail";
            if (!pass) ++out.failures;
        }
        rows.push_back(r);
    };

    for (int g = 0; g < G; ++g)
        for (int k = 0; k <= k_max; ++k)
            add_row("gamma=" + std::to_string(g), k, calc.residue_gamma(g, k),
                    oracle_res[g][k], checked[g][k]);

    for (int i = 0; i < spec.group.n_irreps(); ++i) {
        auto w = isotypic_weights(spec.group, i);
        for (int k = 0; k <= k_max; ++k) {
            Cplx oracle = 0.0;
            bool ok = true;
            for (int g = 0; g < G; ++g) {
                if (std::abs(w[g]) == 0.0) continue;
                if (!checked[g][k]) ok = false;
                oracle += w[g] * oracle_res[g][k];
            }
            add_row("irrep=" + std::to_string(i), k, calc.residue_isotypic(i, k), oracle,
                    ok);
        }
    }

    out.table["rows"] = rows;
    out.table["failures"] = out.failures;
    out.table["tolerance"] = tol;
    out.table["source"] = source;
    return out;
}

Json run_strata(const ProblemSpec& spec) {
    if (!spec.torus) throw SpecError("strata require a torus model");
    ClassicalSymbol sym = build_symbol(spec);
    ResidueCalculator calc(sym, spec.group, spec.compute.k_max, spec.compute.sphere_level,
                           spec.compute.strata_nodes);
    Stratification strat = orbit_type_poset(spec.group, spec.periods);
    Json out;
    Json types = Json::array();
    for (size_t i = 0; i < strat.types.size(); ++i) {
        Json t;
        t["type"] = int(i);
        t["subgroup"] = strat.types[i].subgroup;
        t["order"] = strat.types[i].order;
        t["components"] = int(strat.strata[i].size());
        types.push_back(t);
    }
    out["types"] = types;
    std::vector<std::vector<int>> poset(strat.types.size(),
                                        std::vector<int>(strat.types.size(), 0));
    for (size_t i = 0; i < strat.types.size(); ++i)
        for (size_t j = 0; j < strat.types.size(); ++j) poset[i][j] = strat.poset(i, j);
    out["poset"] = poset;
    Json table = Json::array();
    for (int k = 0; k <= spec.compute.k_max; ++k) {
        Cplx total = 0.0;
        for (const auto& row : calc.strata_table(k, strat)) {
            Json r = cplx_row(row.integral);
            r["type"] = row.type_id;
            r["component"] = row.component;
            r["dim"] = row.dim;
            r["volume"] = row.volume;
            r["k"] = k;
            table.push_back(r);
            total += row.integral;
        }
        Json sumrow = cplx_row(total);
        Json orb = cplx_row(calc.residue_orbifold(k));
        sumrow["k"] = k;
        sumrow["orbifold_re"] = orb["re"];
        sumrow["orbifold_im"] = orb["im"];
        out["sums"].push_back(sumrow);
    }
    out["table"] = table;
    return out;
}

Json run_oracle(const ProblemSpec& spec, int gamma) {
    LatticeModel model = build_model(spec);
    if (gamma < 0 || gamma >= spec.group.size())
        throw SpecError("gamma index out of range");
    Json out;
    out["gamma"] = gamma;
    if (model.constant_coefficients()) {
        TwistedZetaContinuation tz = constant_case_zeta(model, gamma);
        out["source"] = "continuation";
        out["rank"] = tz.rank;
        out["phase_trivial"] = tz.phase_trivial;
        Json poles = Json::array();
        for (const auto& [z, r] : tz.poles) {
            Json p = cplx_row(r);
            p["z"] = z;
            poles.push_back(p);
        }
        out["poles"] = poles;
        Json res = Json::array();
        for (int k = 0; k <= spec.compute.k_max; ++k) {
            Json r = cplx_row(oracle_residue_s(tz, k, spec.m));
            r["k"] = k;
            r["s"] = 0.5 * (k - spec.m);
            res.push_back(r);
        }
        out["residues_s"] = res;
        Cplx ev = tz.eval(Cplx(3.0, 0.0));
        Cplx ds = direct_sum(tz, Cplx(3.0, 0.0));
        out["eval_z3"] = cplx_row(ev);
        out["direct_z3"] = cplx_row(ds);
        out["direct_agreement"] = std::abs(ev - ds);
    } else {
        NumericSpectrum sp = numeric_spectrum(model);
        out["source"] = "heat_fit";
        out["dimension"] = int(sp.evals.size());
        out["herm_defect"] = sp.herm_defect;
        ClassicalSymbol sym = build_symbol(spec);
        ResidueCalculator calc(sym, spec.group, spec.compute.k_max,
                               spec.compute.sphere_level, spec.compute.strata_nodes);
        int n_fit = calc.fixed_sets()[gamma].empty() ? 0 : calc.fixed_sets()[gamma][0].n;
        HeatFitResult fit = heat_fit_residues(model, sp, gamma, n_fit, spec.compute.k_max);
        out["condition"] = fit.cond;
        Json res = Json::array();
        for (int k = 0; k <= spec.compute.k_max; ++k) {
            Json r = cplx_row(fit.res_by_k[k]);
            r["k"] = k;
            r["s"] = 0.5 * (k - spec.m);
            r["checked"] = bool(fit.checked[k]);
            res.push_back(r);
        }
        out["residues_s"] = res;
    }
    return out;
}

std::string densities_csv(const Json& report, int m) {
    std::ostringstream os;
    os << "gamma,stratum,k";
    for (int i = 0; i < m; ++i) os << ",x" << i;
    os << ",value_re,value_im\n";
    if (!report.contains("densities")) return os.str();
    os.precision(17);
    for (const auto& row : report.at("densities")) {
        os << row.at("gamma").get<int>() << ',' << row.at("stratum").get<int>() << ','
           << row.at("k").get<int>();
        for (const auto& xc : row.at("x")) os << ',' << xc.get<double>();
        os << ',' << row.at("re").get<double>() << ',' << row.at("im").get<double>()
           << '\n';
    }
    return os.str();
}

}  // namespace orbizeta
