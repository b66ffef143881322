#pragma once

#include <json.hpp>

#include "orbizeta/oracle.hpp"
#include "orbizeta/residues.hpp"

namespace orbizeta {

using Json = nlohmann::json;

struct ComputeOptions {
    int k_max = 2;
    Backend backend = Backend::Exact;
    int sphere_level = 8;
    int strata_nodes = 16;
    int jet_order = 6;
};

struct OracleOptions {
    bool enabled = true;
    int cutoff = 16;
    double tol_exact = 1e-6;
    double tol_fit = 2e-2;
};

struct ProblemSpec {
    int spec_version = 1;
    int m = 1;
    bool torus = true;  // chart_mode torus vs linear
    RVec periods;
    FiniteGroupAction group;
    int k = 1;
    double c0 = 1.0;
    double scale = 1.0;
    std::optional<Coefficient> potential;
    std::vector<Coefficient> first_order;
    ComputeOptions compute;
    OracleOptions oracle;
    std::string hash;  // content hash of the canonicalized document
};

/// Parses and validates a problem document.  Throws SpecError whose message
/// names the offending field path.
ProblemSpec parse_spec(const std::string& path);
ProblemSpec parse_spec_json(const Json& doc);

/// FNV-1a hash of the canonical (sorted-key) serialization.
std::string content_hash(const Json& doc);

ClassicalSymbol build_symbol(const ProblemSpec& spec);
LatticeModel build_model(const ProblemSpec& spec);

/// Content-addressed JSON store under ORBIZETA_CACHE_DIR (or a per-user
/// default).  Corrupted entries fail the checksum and read as misses.
class Cache {
public:
    static Cache standard();
    explicit Cache(std::string dir);

    bool enabled() const { return enabled_; }
    const std::string& dir() const { return dir_; }
    std::optional<Json> get(const std::string& key) const;
    void put(const std::string& key, const Json& payload) const;
    int clear() const;  // number of entries removed

private:
    std::string dir_;
    bool enabled_ = false;
};

Json power_family_to_json(const PowerSymbolFamily& fam);
std::optional<PowerSymbolFamily> power_family_from_json(const Json& j);

struct ResidueArtifact {
    std::string hash;
    bool cache_hit = false;
    Json report;
};

ResidueArtifact run_residues(const ProblemSpec& spec, const Cache& cache);

struct VerifyResult {
    int failures = 0;
    bool skipped = false;
    Json table;
};

VerifyResult run_verify(const ProblemSpec& spec);

Json run_strata(const ProblemSpec& spec);
Json run_oracle(const ProblemSpec& spec, int gamma);

/// density tables as CSV (columns: gamma, stratum, k, x0..x{m-1}, value_re,
/// value_im)
std::string densities_csv(const Json& report, int m);

}  // namespace orbizeta
