#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orbizeta/problem.hpp"

namespace py = pybind11;
using namespace orbizeta;

namespace {

ProblemSpec spec_from_string(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const std::exception& e) {
        throw SpecError(std::string("invalid JSON: ") + e.what());
    }
    return parse_spec_json(doc);
}

Cache cache_for(const std::string& dir) {
    if (dir.empty()) return Cache::standard();
    return Cache(dir);
}

}  // namespace

PYBIND11_MODULE(_orbizeta, mod) {
    mod.doc() = "residues of equivariant zeta functions on flat orbifolds";
    mod.attr("__version__") = "0.1.0";

    py::register_exception<SpecError>(mod, "SpecError");
    py::register_exception<ComputeError>(mod, "ComputeError");

    mod.def(
        "residues_json",
        [](const std::string& spec_text, const std::string& cache_dir) {
            ProblemSpec spec = spec_from_string(spec_text);
            ResidueArtifact art = run_residues(spec, cache_for(cache_dir));
            return art.report.dump();
        },
        py::arg("spec_json"), py::arg("cache_dir") = "",
        "Full residue/strata/density report as a JSON string.");

    mod.def(
        "verify_json",
        [](const std::string& spec_text) {
            ProblemSpec spec = spec_from_string(spec_text);
            VerifyResult vr = run_verify(spec);
            Json out = vr.table;
            out["skipped"] = vr.skipped;
            out["failures"] = vr.failures;
            return out.dump();
        },
        py::arg("spec_json"), "Engine-versus-oracle comparison table as JSON.");

    mod.def(
        "strata_json",
        [](const std::string& spec_text) {
            ProblemSpec spec = spec_from_string(spec_text);
            return run_strata(spec).dump();
        },
        py::arg("spec_json"), "Orbit-type poset and strata densities as JSON.");

    mod.def(
        "oracle_json",
        [](const std::string& spec_text, int gamma) {
            ProblemSpec spec = spec_from_string(spec_text);
            return run_oracle(spec, gamma).dump();
        },
        py::arg("spec_json"), py::arg("gamma"),
        "Oracle data (continuation poles or heat-fit residues) for one group element.");

    mod.def(
        "densities_csv",
        [](const std::string& report_json, int m) {
            return densities_csv(Json::parse(report_json), m);
        },
        py::arg("report_json"), py::arg("m"),
        "Render the density table of a report as CSV text.");

    mod.def(
        "content_hash",
        [](const std::string& text) { return content_hash(Json::parse(text)); },
        py::arg("json_text"), "Content hash used for cache addressing.");

    mod.def(
        "sphere_quadrature",
        [](int n, int level) {
            SphereQuad quad = sphere_quadrature(n, level);
            std::vector<std::vector<double>> nodes;
            for (const auto& node : quad.nodes)
                nodes.emplace_back(node.data(), node.data() + node.size());
            std::vector<double> weights(quad.weights.data(),
                                        quad.weights.data() + quad.weights.size());
            return py::make_tuple(nodes, weights);
        },
        py::arg("n"), py::arg("level"),
        "Nodes and (1/(2 pi)^n)-normalized weights on S^(n-1), exact to degree "
        "2*level.");

    mod.def(
        "sphere_moment",
        [](int n, const std::vector<int>& alpha) { return sphere_moment(n, alpha); },
        py::arg("n"), py::arg("alpha"), "Unnormalized monomial sphere moment.");

    mod.def(
        "residue_table",
        [](const std::string& spec_text) {
            ProblemSpec spec = spec_from_string(spec_text);
            ClassicalSymbol sym = build_symbol(spec);
            ResidueCalculator calc(sym, spec.group, spec.compute.k_max,
                                   spec.compute.sphere_level, spec.compute.strata_nodes,
                                   spec.compute.backend);
            py::dict out;
            py::list gamma, iso, orb;
            for (int k = 0; k <= spec.compute.k_max; ++k) {
                for (int g = 0; g < spec.group.size(); ++g)
                    gamma.append(py::make_tuple(g, k, calc.residue_gamma(g, k)));
                for (int i = 0; i < spec.group.n_irreps(); ++i)
                    iso.append(py::make_tuple(i, k, calc.residue_isotypic(i, k)));
                orb.append(py::make_tuple(k, calc.residue_orbifold(k)));
            }
            out["gamma"] = gamma;
            out["isotypic"] = iso;
            out["orbifold"] = orb;
            return out;
        },
        py::arg("spec_json"),
        "Residues as native complex numbers, keyed gamma/isotypic/orbifold.");
}
