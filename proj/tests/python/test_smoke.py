"""End-to-end smoke tests for the Python bindings.

Exercises the module against the shipped fixtures; the frozen values here
match the C++ test suite (circle point reflection, flat torus, isotypic
split of the circle under C2).
"""

import json
import math
import os

import pytest

import orbizeta

FIXTURES = os.environ.get(
    "ORBIZETA_FIXTURES",
    os.path.join(os.path.dirname(__file__), "..", "..", "fixtures"),
)


def load(name):
    with open(os.path.join(FIXTURES, name), "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_version():
    assert orbizeta.__version__ == "0.1.0"


def test_circle_trivial_residues():
    report = orbizeta.residues(load("circle_trivial.json"))
    rows = {(r["gamma"], r["k"]): complex(r["re"], r["im"])
            for r in report["residues"]["gamma"]}
    assert abs(rows[(0, 0)] - (-1.0)) < 1e-10
    assert abs(rows[(0, 1)]) < 1e-10
    assert abs(rows[(0, 2)] - (-0.5)) < 1e-10
    assert "hash" in report and report["versions"]["orbizeta"] == "0.1.0"


def test_circle_c2_isotypic_and_orbifold():
    table = orbizeta.residue_table(load("circle_c2.json"))
    iso = {(i, k): v for i, k, v in table["isotypic"]}
    assert abs(iso[(0, 0)] - (-0.5)) < 1e-10
    assert abs(iso[(1, 0)] - (-0.5)) < 1e-10
    orb = dict((k, v) for k, v in table["orbifold"])
    # isotypic residues weighted by dim reconstruct the gamma=identity row
    gamma = {(g, k): v for g, k, v in table["gamma"]}
    assert abs(iso[(0, 0)] + iso[(1, 0)] - gamma[(0, 0)]) < 1e-10
    assert abs(orb[0] - (-0.5)) < 1e-10


def test_torus_trivial_weyl():
    table = orbizeta.residue_table(load("dihedral2_torus.json"))
    gamma = {(g, k): v for g, k, v in table["gamma"]}
    assert abs(gamma[(0, 0)] - (-math.pi)) < 1e-9


def test_strata_sum_matches_orbifold():
    spec = load("circle_c2.json")
    table = orbizeta.residue_table(spec)
    orb = dict((k, v) for k, v in table["orbifold"])
    st = orbizeta.strata(spec)
    assert len(st["poset"]) == 2  # principal stratum and the C2 orbit type
    for row in st["sums"]:
        total = complex(row["re"], row["im"])
        assert abs(total - complex(row["orbifold_re"], row["orbifold_im"])) < 1e-8
        assert abs(total - orb[row["k"]]) < 1e-8


def test_verify_against_oracle():
    result = orbizeta.verify(load("torus_reflection.json"))
    assert result["failures"] == 0
    assert not result["skipped"]
    assert all(row["status"] == "pass" for row in result["rows"])


def test_oracle_endpoint():
    data = orbizeta.oracle(load("circle_trivial.json"), 0)
    assert data["source"] == "continuation"


def test_densities_csv_header():
    spec = load("circle_c2.json")
    report = orbizeta.residues(spec)
    csv = orbizeta.densities_csv(report, 1)
    assert csv.splitlines()[0] == "gamma,stratum,k,x0,value_re,value_im"


def test_sphere_quadrature_moments():
    for n in (2, 3):
        nodes, weights = orbizeta.sphere_quadrature(n, 6)
        total = sum(weights)
        surface = orbizeta.sphere_moment(n, [0] * n)
        assert abs(total - surface / (2 * math.pi) ** n) < 1e-12
        # degree-2 moment of xi_0^2
        quad = sum(w * p[0] ** 2 for p, w in zip(nodes, weights))
        exact = orbizeta.sphere_moment(n, [2] + [0] * (n - 1)) / (2 * math.pi) ** n
        assert abs(quad - exact) < 1e-12


def test_content_hash_is_canonical():
    a = orbizeta.content_hash({"b": 1, "a": 2})
    b = orbizeta.content_hash({"a": 2, "b": 1})
    assert a == b and len(a) > 0


def test_spec_error():
    with pytest.raises(orbizeta.SpecError):
        orbizeta.residues({"spec_version": 1})


def test_cache_roundtrip(tmp_path):
    spec = load("circle_trivial.json")
    first = orbizeta.residues(spec, cache_dir=str(tmp_path))
    assert any(p.name.startswith("artifact_") for p in tmp_path.iterdir())
    second = orbizeta.residues(spec, cache_dir=str(tmp_path))
    first.pop("timings", None)
    second.pop("timings", None)
    assert first == second
