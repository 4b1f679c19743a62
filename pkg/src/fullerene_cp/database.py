"""Bundled material and molecule database.

Files live under ``data/materials/*.json`` and ``data/molecules/*.json``
inside the package; ids are file stems.  The environment variable
``CP_DATA_DIR`` points the loader at an alternative database root with the
same layout.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np

from . import dielectric, molecule as molecule_mod
from .dielectric import PermittivityModel, eval_eps_imag, static_eps
from .errors import UnknownId
from .molecule import Molecule

__all__ = [
    "data_dir",
    "material_ids",
    "molecule_ids",
    "load_material",
    "load_molecule",
    "golden_curve_path",
    "doctor",
]

_ENV_VAR = "CP_DATA_DIR"


def data_dir() -> Path:
    override = os.environ.get(_ENV_VAR)
    if override:
        return Path(override)
    return Path(__file__).parent / "data"


def _ids(sub: str) -> list[str]:
    root = data_dir() / sub
    if not root.is_dir():
        return []
    return sorted(p.stem for p in root.glob("*.json"))


def material_ids() -> list[str]:
    return _ids("materials")


def molecule_ids() -> list[str]:
    return _ids("molecules")


def load_material(material_id: str) -> PermittivityModel:
    if material_id == "vacuum":
        return dielectric.OscillatorSet()
    path = data_dir() / "materials" / f"{material_id}.json"
    if not path.is_file():
        raise UnknownId(f"unknown material {material_id!r}; have {material_ids()}")
    return dielectric.load_model(path)


def load_molecule(molecule_id: str) -> Molecule:
    path = data_dir() / "molecules" / f"{molecule_id}.json"
    if not path.is_file():
        raise UnknownId(f"unknown molecule {molecule_id!r}; have {molecule_ids()}")
    return molecule_mod.load_molecule(path)


def golden_curve_path() -> Path:
    return data_dir() / "golden" / "c60_au_300K_curve.csv"


def doctor() -> list[str]:
    """Parse every bundled file and check its type invariants.

    Returns a list of findings; an empty list means the database is healthy.
    """
    problems: list[str] = []
    xi_grid = np.logspace(12, 17, 40)
    for mid in material_ids():
        try:
            model = load_material(mid)
        except Exception as exc:   # noqa: BLE001 - report, do not crash
            problems.append(f"material {mid}: failed to load ({exc})")
            continue
        if isinstance(model, dielectric.PerfectConductor):
            continue
        if isinstance(model, dielectric.TabulatedImEps) and model.denominator == "paper":
            problems.append(
                f"material {mid}: 'paper' denominator has no imaginary-axis transform"
            )
            continue
        try:
            vals = np.atleast_1d(eval_eps_imag(model, xi_grid))
        except dielectric.StaticDrudeDivergence:
            vals = np.atleast_1d(eval_eps_imag(model, xi_grid[xi_grid > 0]))
        if np.any(vals < 1.0 - 1e-12):
            problems.append(f"material {mid}: eps(i xi) dips below 1")
        if np.any(np.diff(vals) > 1e-12 * vals[:-1]):
            problems.append(f"material {mid}: eps(i xi) not non-increasing")
        e0 = static_eps(model)
        if not (math.isinf(e0) or e0 >= 1.0):
            problems.append(f"material {mid}: static permittivity {e0} < 1")
    for mid in molecule_ids():
        try:
            mol = load_molecule(mid)
        except Exception as exc:   # noqa: BLE001
            problems.append(f"molecule {mid}: failed to load ({exc})")
            continue
        if mol.lattice_constant is not None and not mol.number_density > 0:
            problems.append(f"molecule {mid}: bad number density")
    return problems
