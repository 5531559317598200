"""Python bindings for the critflow toolkit.

Structured reports are returned as dictionaries with the same layout as the
JSON written by the command-line tool.
"""

import json as _json

from ._critflow import (
    CritflowError,
    evaluate,
    families,
    gradient,
    morse_index,
    run_cli,
    schema_version,
    spectral_flow_endpoints,
    spectral_flow_path,
    spectral_flow_signature,
    sublevel_betti,
)
from . import _critflow

__all__ = [
    "CritflowError",
    "evaluate",
    "eversion_report",
    "families",
    "family_spectral_flow",
    "gradient",
    "indefinite_report",
    "morse_index",
    "run_cli",
    "scan",
    "schema_version",
    "spectral_flow_endpoints",
    "spectral_flow_path",
    "spectral_flow_signature",
    "sublevel_betti",
]


def family_spectral_flow(family="demo", lo=-1.0, hi=1.0):
    """Spectral flow of the Hessian path at the origin by the three methods."""
    return _json.loads(_critflow._family_spectral_flow(family, lo, hi))


def eversion_report(slices=400, grid_h=0.01):
    """Full report for the radial eversion surrogate."""
    return _json.loads(_critflow._eversion(slices, grid_h))


def indefinite_report(modes=2, slices=200):
    """Strongly indefinite Galerkin demo."""
    return _json.loads(_critflow._indefinite(modes, slices))


def scan(family="demo", slices=400, window=10.0):
    """Critical-pair scan with the classification of the attached branch."""
    return _json.loads(_critflow._scan(family, slices, window))
