"""Residues of equivariant zeta functions on flat orbifolds.

Thin Python veneer over the C++ core.  Most entry points take the problem
document either as a JSON string, a dict, or a path, and return parsed JSON.
"""

from __future__ import annotations

import json
import os
from typing import Any

try:
    from . import _orbizeta as _core
except ImportError:  # extension built outside the package (e.g. CMake tree)
    import _orbizeta as _core  # type: ignore[no-redef]

SpecError = _core.SpecError
ComputeError = _core.ComputeError
sphere_quadrature = _core.sphere_quadrature
sphere_moment = _core.sphere_moment

__version__ = _core.__version__
__all__ = [
    "SpecError",
    "ComputeError",
    "residues",
    "verify",
    "strata",
    "oracle",
    "residue_table",
    "densities_csv",
    "content_hash",
    "sphere_quadrature",
    "sphere_moment",
    "__version__",
]


def _spec_text(spec: Any) -> str:
    if isinstance(spec, dict):
        return json.dumps(spec)
    if isinstance(spec, (str, os.PathLike)) and os.path.exists(os.fspath(spec)):
        with open(os.fspath(spec), "r", encoding="utf-8") as fh:
            return fh.read()
    if isinstance(spec, str):
        return spec
    raise TypeError("spec must be a dict, a JSON string, or a path")


def residues(spec: Any, cache_dir: str = "") -> dict:
    """Full residue report (gamma/isotypic/orbifold residues, strata,
    densities, defects) as a dict."""
    return json.loads(_core.residues_json(_spec_text(spec), cache_dir))


def verify(spec: Any) -> dict:
    """Engine-versus-oracle comparison table; ``result['failures']`` counts
    rows outside tolerance and ``result['skipped']`` flags a disabled oracle."""
    return json.loads(_core.verify_json(_spec_text(spec)))


def strata(spec: Any) -> dict:
    """Orbit-type poset and stratumwise residue contributions."""
    return json.loads(_core.strata_json(_spec_text(spec)))


def oracle(spec: Any, gamma: int) -> dict:
    """Independent spectral-oracle data for one group element."""
    return json.loads(_core.oracle_json(_spec_text(spec), gamma))


def residue_table(spec: Any) -> dict:
    """Residues as native complex numbers: ``{'gamma': [(g, k, value), ...],
    'isotypic': [(i, k, value), ...], 'orbifold': [(k, value), ...]}``."""
    return _core.residue_table(_spec_text(spec))


def densities_csv(report: Any, m: int) -> str:
    """Render the density table of a residue report as CSV text."""
    text = report if isinstance(report, str) else json.dumps(report)
    return _core.densities_csv(text, m)


def content_hash(doc: Any) -> str:
    """Content hash of a canonicalized JSON document (cache addressing)."""
    text = doc if isinstance(doc, str) else json.dumps(doc)
    return _core.content_hash(text)
