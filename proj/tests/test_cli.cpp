#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "orbizeta/problem.hpp"

using namespace orbizeta;
namespace fs = std::filesystem;

namespace {

std::string bin_path() {
    const char* p = std::getenv("ORBIZETA_BIN");
    REQUIRE(p != nullptr);
    return p;
}

std::string fixtures_dir() {
    const char* p = std::getenv("ORBIZETA_FIXTURES");
    REQUIRE(p != nullptr);
    return p;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("orbizeta-test-" + std::to_string(std::rand()) + "-" +
                std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run(const std::string& args, const fs::path& cache_dir, std::string* stdout_text = nullptr,
        std::string* stderr_text = nullptr) {
    TempDir io;
    fs::path out = io.path / "out.txt", err = io.path / "err.txt";
    std::string cmd = "ORBIZETA_CACHE_DIR='" + cache_dir.string() + "' '" + bin_path() +
                      "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    int status = std::system(cmd.c_str());
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    if (stdout_text) *stdout_text = slurp(out);
    if (stderr_text) *stderr_text = slurp(err);
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

Json strip_timings(Json j) {
    j.erase("timings");
    return j;
}

std::string fixture(const std::string& name) {
    return "--spec '" + fixtures_dir() + "/" + name + ".json'";
}

}  // namespace

TEST_CASE("residues subcommand succeeds on every fixture") {
    TempDir cache;
    for (const std::string name :
         {"circle_trivial", "circle_c2", "circle_potential", "circle_translation",
          "torus_reflection", "dihedral2_torus"}) {
        std::string so, se;
        int rc = run("residues " + fixture(name), cache.path, &so, &se);
        CHECK_MESSAGE(rc == 0, name, ": ", se);
        CHECK(Json::parse(so).contains("residues"));
    }
    // keep the big k_max fixture quick with an override
    std::string so;
    CHECK(run("residues " + fixture("torus_rot4") + " --k-max 2", cache.path, &so) == 0);
}

TEST_CASE("output directory receives json and csv") {
    TempDir cache, outdir;
    std::string so;
    int rc = run("residues " + fixture("circle_c2") + " --out '" +
                     (outdir.path / "res").string() + "'",
                 cache.path, &so);
    REQUIRE(rc == 0);
    std::ifstream jf(outdir.path / "res" / "residues.json");
    REQUIRE(jf.good());
    Json report;
    jf >> report;
    CHECK(report.contains("strata"));
    CHECK(report.at("residues").contains("orbifold"));
    std::ifstream cf(outdir.path / "res" / "densities.csv");
    REQUIRE(cf.good());
    std::string header;
    std::getline(cf, header);
    CHECK(header == "gamma,stratum,k,x0,value_re,value_im");
}

TEST_CASE("reports are deterministic up to timings") {
    TempDir cache1, cache2;
    std::string a, b;
    REQUIRE(run("residues " + fixture("circle_c2"), cache1.path, &a) == 0);
    REQUIRE(run("residues " + fixture("circle_c2"), cache2.path, &b) == 0);
    CHECK(strip_timings(Json::parse(a)) == strip_timings(Json::parse(b)));
}

TEST_CASE("artifact and power-family caching") {
    TempDir cache;
    std::string a, b;
    REQUIRE(run("residues " + fixture("circle_trivial"), cache.path, &a) == 0);
    int entries = 0;
    bool has_power = false, has_artifact = false;
    for (const auto& e : fs::directory_iterator(cache.path)) {
        if (e.path().extension() != ".json") continue;
        ++entries;
        std::string name = e.path().filename().string();
        if (name.rfind("power_", 0) == 0) has_power = true;
        if (name.rfind("artifact_", 0) == 0) has_artifact = true;
    }
    CHECK(entries >= 2);
    CHECK(has_power);
    CHECK(has_artifact);
    // second run hits the artifact cache and reproduces the report verbatim
    REQUIRE(run("residues " + fixture("circle_trivial"), cache.path, &b) == 0);
    CHECK(Json::parse(a) == Json::parse(b));

    // a corrupted entry fails its checksum and is silently recomputed
    for (const auto& e : fs::directory_iterator(cache.path))
        if (e.path().filename().string().rfind("artifact_", 0) == 0) {
            std::ofstream f(e.path());
            f << "{\"checksum\":\"bogus\",\"payload\":{}}";
        }
    REQUIRE(run("residues " + fixture("circle_trivial"), cache.path, &b) == 0);
    CHECK(strip_timings(Json::parse(a)) == strip_timings(Json::parse(b)));

    std::string so;
    CHECK(run("cache --clear", cache.path, &so) == 0);
    int remaining = 0;
    for (const auto& e : fs::directory_iterator(cache.path))
        if (e.path().extension() == ".json") ++remaining;
    CHECK(remaining == 0);
}

TEST_CASE("verify subcommand") {
    TempDir cache;
    std::string so, se;
    CHECK(run("verify " + fixture("circle_trivial"), cache.path, &so, &se) == 0);
    Json table = Json::parse(so);
    CHECK(table.at("failures").get<int>() == 0);
    CHECK(table.at("source") == "continuation");

    CHECK(run("verify " + fixture("torus_reflection"), cache.path, &so) == 0);
    CHECK(run("verify " + fixture("circle_potential"), cache.path, &so) == 0);
    CHECK(Json::parse(so).at("source") == "heat_fit");

    // oracle disabled: warning + exit 0
    TempDir specs;
    Json doc;
    {
        std::ifstream in(fixtures_dir() + std::string("/circle_trivial.json"));
        in >> doc;
    }
    doc["oracle"]["enabled"] = false;
    fs::path p = specs.path / "disabled.json";
    std::ofstream(p) << doc.dump();
    CHECK(run("verify --spec '" + p.string() + "'", cache.path, &so, &se) == 0);
    CHECK(se.find("skipped") != std::string::npos);
}

TEST_CASE("strata and oracle subcommands") {
    TempDir cache;
    std::string so;
    REQUIRE(run("strata " + fixture("dihedral2_torus"), cache.path, &so) == 0);
    Json out = Json::parse(so);
    CHECK(out.contains("poset"));
    // every k-row sum matches the orbifold residue
    for (const auto& row : out.at("sums")) {
        CHECK(std::abs(row.at("re").get<double>() - row.at("orbifold_re").get<double>()) <
              1e-9);
    }
    REQUIRE(run("oracle " + fixture("circle_c2") + " --gamma 1", cache.path, &so) == 0);
    Json orc = Json::parse(so);
    CHECK(orc.at("source") == "continuation");
    CHECK(orc.at("direct_agreement").get<double>() < 1e-9);
}

TEST_CASE("spec errors exit with code 2 and name the field") {
    TempDir cache, specs;
    std::string se;
    CHECK(run("residues --spec '/nonexistent/path.json'", cache.path, nullptr, &se) == 2);

    Json doc;
    {
        std::ifstream in(fixtures_dir() + std::string("/circle_c2.json"));
        in >> doc;
    }
    doc["group"]["generators"][0]["rot"] = {{2.0}};
    fs::path p = specs.path / "bad.json";
    std::ofstream(p) << doc.dump();
    CHECK(run("residues --spec '" + p.string() + "'", cache.path, nullptr, &se) == 2);
    CHECK(se.find("group.generators[0].rot") != std::string::npos);
}

TEST_CASE("parser error paths") {
    CHECK_THROWS_WITH_AS(parse_spec_json(Json::object()), "missing field $.spec_version",
                         SpecError);
    Json doc;
    doc["spec_version"] = 1;
    CHECK_THROWS_WITH_AS(parse_spec_json(doc), "missing field $.model", SpecError);
    doc["model"] = {{"m", 1}, {"chart_mode", "linear"}};
    doc["operator"] = {{"c0", 1.0}};
    doc["group"] = {{"kind", "trivial"}};
    doc["compute"] = {{"k_max", 4}, {"jet_order", 2}};
    CHECK_THROWS_WITH_AS(parse_spec_json(doc),
                         "compute.jet_order < k_max in linear chart mode", SpecError);
    doc["compute"] = {{"k_max", 2}, {"jet_order", 4}};
    ProblemSpec spec = parse_spec_json(doc);
    CHECK(!spec.torus);
    CHECK(spec.hash.size() > 0);
}

TEST_CASE("linear chart mode reports densities at the origin") {
    TempDir cache, specs;
    Json doc;
    doc["spec_version"] = 1;
    doc["model"] = {{"m", 1}, {"chart_mode", "linear"}};
    doc["operator"] = {{"c0", 1.0}};
    doc["group"] = {{"kind", "trivial"}};
    doc["compute"] = {{"k_max", 2}, {"jet_order", 4}};
    fs::path p = specs.path / "linear.json";
    std::ofstream(p) << doc.dump();
    std::string so, se;
    REQUIRE_MESSAGE(run("residues --spec '" + p.string() + "'", cache.path, &so, &se) == 0,
                    se);
    Json report = Json::parse(so);
    CHECK(report.at("chart_mode") == "linear");
    bool found = false;
    for (const auto& row : report.at("densities"))
        if (row.at("k") == 0) {
            CHECK(row.at("re").get<double>() ==
                  doctest::Approx(-1.0 / kTwoPi).epsilon(1e-9));
            found = true;
        }
    CHECK(found);
}
