#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "orbizeta/problem.hpp"

using namespace orbizeta;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSpec = 2;
constexpr int kExitCompute = 3;
constexpr int kExitVerify = 4;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ComputeError("cannot write " + path);
    out << content;
}

int cmd_residues(const std::string& spec_path, int k_max_override,
                 const std::string& backend_override, const std::string& out_dir) {
    ProblemSpec spec = parse_spec(spec_path);
    if (k_max_override >= 0) spec.compute.k_max = k_max_override;
    if (backend_override == "exact") spec.compute.backend = Backend::Exact;
    if (backend_override == "contour") spec.compute.backend = Backend::Contour;
    Cache cache = Cache::standard();
    ResidueArtifact art = run_residues(spec, cache);
    std::cout << art.report.dump(2) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(out_dir + "/residues.json", art.report.dump(2));
        write_file(out_dir + "/densities.csv", densities_csv(art.report, spec.m));
    }
    return kExitOk;
}

int cmd_verify(const std::string& spec_path) {
    ProblemSpec spec = parse_spec(spec_path);
    VerifyResult vr = run_verify(spec);
    std::cout << vr.table.dump(2) << "\n";
    if (vr.skipped) {
        std::cerr << "warning: oracle disabled, verification skipped\n";
        return kExitOk;
    }
    return vr.failures == 0 ? kExitOk : kExitVerify;
}

int cmd_strata(const std::string& spec_path) {
    ProblemSpec spec = parse_spec(spec_path);
    std::cout << run_strata(spec).dump(2) << "\n";
    return kExitOk;
}

int cmd_oracle(const std::string& spec_path, int gamma) {
    ProblemSpec spec = parse_spec(spec_path);
    std::cout << run_oracle(spec, gamma).dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbizeta: residues of equivariant zeta functions on flat orbifolds"};
    app.require_subcommand(1);

    std::string spec_path, backend, out_dir;
    int k_max = -1, gamma = 0;
    bool clear = false;

    auto* residues = app.add_subcommand("residues", "compute residue tables");
    residues->add_option("--spec", spec_path, "problem spec JSON")->required();
    residues->add_option("--k-max", k_max, "override compute.k_max");
    residues->add_option("--backend", backend, "exact|contour")
        ->check(CLI::IsMember({"exact", "contour"}));
    residues->add_option("--out", out_dir, "output directory");

    auto* verify = app.add_subcommand("verify", "compare engine against the oracle");
    verify->add_option("--spec", spec_path, "problem spec JSON")->required();

    auto* strata = app.add_subcommand("strata", "stratification and strata densities");
    strata->add_option("--spec", spec_path, "problem spec JSON")->required();

    auto* oracle = app.add_subcommand("oracle", "oracle data for one group element");
    oracle->add_option("--spec", spec_path, "problem spec JSON")->required();
    oracle->add_option("--gamma", gamma, "group element index")->required();

    auto* cachecmd = app.add_subcommand("cache", "cache maintenance");
    cachecmd->add_flag("--clear", clear, "remove all cache entries");

    CLI11_PARSE(app, argc, argv);

    try {
        if (residues->parsed()) return cmd_residues(spec_path, k_max, backend, out_dir);
        if (verify->parsed()) return cmd_verify(spec_path);
        if (strata->parsed()) return cmd_strata(spec_path);
        if (oracle->parsed()) return cmd_oracle(spec_path, gamma);
        if (cachecmd->parsed()) {
            Cache cache = Cache::standard();
            if (!cache.enabled()) {
                std::cerr << "warning: cache directory unusable: " << cache.dir() << "\n";
                return kExitOk;
            }
            if (clear) {
                int n = cache.clear();
                std::cout << "removed " << n << " entries from " << cache.dir() << "\n";
            } else {
                std::cout << "cache directory: " << cache.dir() << "\n";
            }
            return kExitOk;
        }
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpec;
    } catch (const ComputeError& e) {
        std::cerr << "compute error: " << e.what() << "\n";
        return kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCompute;
    }
    return kExitOk;
}
