"""Closed-form and one-dimensional-quadrature asymptotic coefficients.

The potential follows -C3/z^3 at short range, -C4/z^4 at retarded range and
-C3T/z^3 in the thermal regime.  This module evaluates those coefficients,
the zero-width and linear-response variants of C3 used to quantify the
effect of molecular line widths, and the phonon short-range coefficient.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import mpmath
import numpy as np
from scipy.constants import c, epsilon_0, hbar, k as k_B
from scipy.integrate import quad

from .dielectric import (
    PerfectConductor,
    PermittivityModel,
    eval_eps_imag,
    static_eps,
    static_mirror_factor,
)
from .errors import DomainError, QuadratureFailure
from .molecule import Molecule, phonon_weight, static_alpha

__all__ = [
    "CoeffSet",
    "c3t",
    "c4_integral",
    "c4_closed",
    "c4_series",
    "c3_nonret",
    "c3_phonon",
    "coeff_set",
    "coeff_table",
]

_C4_PREF = 3.0 * hbar * c / (64.0 * math.pi**2 * epsilon_0)
_C4_EPS_LARGE = 1e8      # switch to the large-eps expansion
_C4_CHI_SMALL = 1e-4     # switch to the small-chi expansion


@dataclass(frozen=True)
class CoeffSet:
    """Asymptotic coefficients for one molecule/surface pair."""

    molecule: str
    surface: str
    T: float
    T_m: float
    C3: float              # J m^3, nonretarded, symmetrised polarisability
    C3_zero_width: float   # J m^3, line widths set to zero
    C3_lrt: float          # J m^3, linear-response (unsymmetrised) form
    C4: float              # J m^4, retarded
    C3T: float             # J m^3, thermal
    C3_phonon: float       # J m^3, phonon short-range part

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def c3t(alpha0: float, surf: PermittivityModel, T: float) -> float:
    """Thermal long-range coefficient k_B T alpha0/(16 pi eps0) (eps0-1)/(eps0+1).

    A divergent static permittivity (conductors) gives the mirror factor 1
    exactly.
    """
    if not T > 0:
        raise DomainError("T must be positive")
    return k_B * T * alpha0 / (16.0 * math.pi * epsilon_0) * static_mirror_factor(surf)


def _c4_integrand(v: np.ndarray, eps: float) -> np.ndarray:
    s = np.sqrt(eps - 1.0 + v * v)
    t_p = (2.0 / v**2 - 1.0 / v**4) * (eps * v - s) / (eps * v + s)
    t_s = (1.0 / v**4) * (v - s) / (v + s)
    return t_p - t_s


def c4_integral(alpha0: float, eps_static: float) -> float:
    """Retarded coefficient by quadrature over the reduced wave vector v >= 1.

    ``eps_static = math.inf`` evaluates the conductor limit
    3 hbar c alpha0 / (32 pi^2 eps0) in closed form.
    """
    if math.isinf(eps_static):
        return 2.0 * _C4_PREF * alpha0
    if eps_static < 1.0:
        raise DomainError("static permittivity must be >= 1")
    if eps_static == 1.0:
        return 0.0
    val, err = quad(lambda s: _c4_integrand(1.0 / s, eps_static) / s**2,
                    0.0, 1.0, limit=500, epsrel=1e-12, epsabs=1e-300)
    if val > 0 and err / val > 1e-9:
        raise QuadratureFailure(f"C4 quadrature error estimate {err/val:.2e}")
    return _C4_PREF * alpha0 * val


def _c4_shape_closed(eps: float) -> float:
    """Dimensionless C4 shape function, exact antiderivative.

    The three groups individually grow like eps^{3/2} log eps while their sum
    stays order one, so the evaluation runs in extended precision.
    """
    with mpmath.workdps(50):
        e = mpmath.mpf(eps)
        sqe, sqp, sqm = mpmath.sqrt(e), mpmath.sqrt(e + 1), mpmath.sqrt(e - 1)
        rational = (10 - 3 * sqe - 4 * e - 3 * e * sqe + 6 * e * e) / (3 * (e - 1))
        mirror = (e * e / sqp) * (mpmath.log((sqp - 1) / (sqp + 1)) + 2 * mpmath.log(sqe + sqp))
        edge = ((2 * e**3 - 4 * e * e + 3 * e + 1) / sqm**3) * mpmath.log(sqe + sqm)
        return float(rational + mirror - edge)


def c4_closed(alpha0: float, eps_static: float) -> float:
    """Retarded coefficient from the explicit antiderivative of the v-integral.

    Near eps = 1 and at very large eps the closed form is replaced by its
    series expansions, which are better conditioned there.
    """
    if math.isinf(eps_static):
        return 2.0 * _C4_PREF * alpha0
    if eps_static < 1.0:
        raise DomainError("static permittivity must be >= 1")
    chi = eps_static - 1.0
    if chi <= _C4_CHI_SMALL:
        return c4_series(alpha0, eps_static, "SmallChi")
    if eps_static > _C4_EPS_LARGE:
        return c4_series(alpha0, eps_static, "LargeEps")
    return _C4_PREF * alpha0 * _c4_shape_closed(eps_static)


def c4_series(alpha0: float, eps_static: float, regime: str) -> float:
    """Printed expansions of the retarded coefficient.

    LargeEps: 2 - 5/(2 sqrt(eps)) + 44/(15 eps);  SmallChi: (23/30) chi -
    (169/420) chi^2 with chi = eps - 1.
    """
    if regime == "LargeEps":
        if math.isinf(eps_static):
            return 2.0 * _C4_PREF * alpha0
        e = eps_static
        return _C4_PREF * alpha0 * (2.0 - 2.5 / math.sqrt(e) + 44.0 / (15.0 * e))
    if regime == "SmallChi":
        chi = eps_static - 1.0
        return _C4_PREF * alpha0 * ((23.0 / 30.0) * chi - (169.0 / 420.0) * chi * chi)
    raise DomainError(f"regime must be 'LargeEps' or 'SmallChi', got {regime!r}")


def _mirror_imag(surf: PermittivityModel, xi: float) -> float:
    """(eps(i xi)-1)/(eps(i xi)+1), with exact endpoint limits at xi = 0."""
    if isinstance(surf, PerfectConductor):
        return 1.0
    if xi == 0.0:
        return static_mirror_factor(surf)
    e = float(eval_eps_imag(surf, xi))
    return (e - 1.0) / (e + 1.0)


def c3_nonret(mol: Molecule, surf: PermittivityModel, mode: str = "Symmetrised",
              parts: str = "electronic", rel_tol: float = 1e-9) -> float:
    """Nonretarded coefficient (hbar/16 pi^2 eps0) Int alpha(xi) mirror(xi) dxi.

    ``mode`` picks the polarisability entering the integral: "Symmetrised"
    (the microscopic result 0.5[alpha(i xi) + alpha(-i xi)]), "ZeroWidth"
    (all line widths dropped), or "LRT" (the unsymmetrised alpha(i xi) of
    linear-response theory).
    """
    if mode not in ("Symmetrised", "ZeroWidth", "LRT"):
        raise DomainError(f"unknown mode {mode!r}")
    trans = mol.transitions(parts)
    if not trans:
        return 0.0
    w_ref = float(np.median([t.omega for t in trans]))

    def alpha_used(xi):
        total = 0.0
        for t in trans:
            base = t.omega**2 + xi**2
            if mode == "ZeroWidth":
                total += t.omega * t.dipole**2 / base
            elif mode == "LRT":
                total += t.omega * t.dipole**2 / (base + xi * t.width / 2.0)
            else:
                total += t.omega * t.dipole**2 * base / (base**2 - (xi * t.width / 2.0) ** 2)
        return 2.0 / (3.0 * hbar) * total + mol.residual_alpha_inf

    def f(u):
        xi = w_ref * u / (1.0 - u)
        jac = w_ref / (1.0 - u) ** 2
        return alpha_used(xi) * _mirror_imag(surf, xi) * jac

    val, err = quad(f, 0.0, 1.0, limit=500, epsrel=rel_tol, epsabs=0.0)
    if val > 0 and err / val > 100.0 * rel_tol:
        raise QuadratureFailure(f"C3 quadrature error estimate {err/val:.2e}")
    return hbar / (16.0 * math.pi**2 * epsilon_0) * val


def c3_phonon(mol: Molecule, T_m: float) -> float:
    """Short-range coefficient of the phonon lines,

        (1/48 pi eps0) sum_k (p_0k - p_1k)^2 |d_0k|^2 ,

    each line an independently thermalised two-level system, so the weight is
    tanh^2(hbar w/(2 k_B T_m)): 1 at T_m = 0, and reduced at finite internal
    temperature where absorption and emission pathways partly offset.
    Returns 0 when the molecule has no phonon transitions.
    """
    if not mol.phonon:
        return 0.0
    total = math.fsum(
        phonon_weight(t.omega, T_m) ** 2 * t.dipole**2 for t in mol.phonon
    )
    return total / (48.0 * math.pi * epsilon_0)


def coeff_set(mol: Molecule, surf: PermittivityModel, T: float, T_m: float,
              molecule_id: str = "", surface_id: str = "") -> CoeffSet:
    """All asymptotic coefficients for one pair.

    The static polarisability feeding C4 and C3T is the optical one: the
    retarded and thermal regimes of the printed tables describe the potential
    of the electronic transitions, with the phonon lines reported separately
    through C3_phonon.
    """
    alpha0 = static_alpha(mol, parts="electronic")
    return CoeffSet(
        molecule=molecule_id or mol.name,
        surface=surface_id,
        T=T,
        T_m=T_m,
        C3=c3_nonret(mol, surf, "Symmetrised"),
        C3_zero_width=c3_nonret(mol, surf, "ZeroWidth"),
        C3_lrt=c3_nonret(mol, surf, "LRT"),
        C4=c4_closed(alpha0, static_eps(surf)),
        C3T=c3t(alpha0, surf, T),
        C3_phonon=c3_phonon(mol, T_m),
    )


_COLUMNS = ("C3", "C3_zero_width", "C3_lrt", "C4", "C3T", "C3_phonon")


def coeff_table(rows: list[CoeffSet]) -> str:
    """Fixed-column text table, one row per molecule/surface pair."""
    header = f"{'surface':<18}{'molecule':<10}" + "".join(f"{n:>16}" for n in _COLUMNS)
    lines = [header, "-" * len(header)]
    for r in rows:
        vals = "".join(f"{getattr(r, n):>16.4e}" for n in _COLUMNS)
        lines.append(f"{r.surface:<18}{r.molecule:<10}" + vals)
    return "\n".join(lines) + "\n"
