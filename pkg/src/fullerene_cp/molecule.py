"""Molecular polarisabilities from transition lists or film permittivities.

A molecule is a named set of dipole transitions (electronic and phonon).
Polarisabilities follow the damped-oscillator form

    alpha_0(omega) = (2/3hbar) sum_k  w_k0 |d_0k|^2 / (w_k0^2 - omega^2 - i omega Gamma_k/2)

plus an optional constant remainder alpha_inf inherited from a film fit with
eps_inf > 1.  Transition lists can be derived from a film's oscillator model
through the Clausius-Mosotti relation and a partial-fraction decomposition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.constants import hbar, epsilon_0, k as k_B

from .dielectric import OscillatorSet
from .errors import DecompositionFailure, DomainError

__all__ = [
    "Transition",
    "Molecule",
    "LevelScheme",
    "RationalAlpha",
    "populations",
    "phonon_weight",
    "alpha_ground",
    "alpha_thermal",
    "alpha_sym",
    "static_alpha",
    "clausius_mosotti",
    "decompose",
    "molecule_to_dict",
    "molecule_from_dict",
    "load_molecule",
    "dump_molecule",
]

PARTS = ("all", "electronic", "phonon")


@dataclass(frozen=True)
class Transition:
    """One dipole transition from the ground state."""

    omega: float     # transition angular frequency, rad/s
    dipole: float    # |d|, C m
    width: float     # Gamma, rad/s
    kind: str = "electronic"   # "electronic" | "phonon"

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError(f"transition frequency must be finite positive, got {self.omega}")
        if not self.dipole > 0:
            raise DomainError("dipole must be positive")
        if self.width < 0:
            raise DomainError("width must be >= 0")
        if self.kind not in ("electronic", "phonon"):
            raise DomainError(f"unknown transition kind {self.kind!r}")


@dataclass(frozen=True)
class Molecule:
    name: str
    electronic: tuple[Transition, ...] = ()
    phonon: tuple[Transition, ...] = ()
    lattice_constant: float | None = None   # m; fcc film number density = 4/a^3
    residual_alpha_inf: float = 0.0          # C^2 m^2 / J

    def __post_init__(self):
        object.__setattr__(self, "electronic", tuple(self.electronic))
        object.__setattr__(self, "phonon", tuple(self.phonon))
        for group in (self.electronic, self.phonon):
            freqs = [t.omega for t in group]
            if freqs != sorted(freqs):
                raise DomainError("transitions must be sorted ascending in frequency")
        if self.lattice_constant is not None and not self.lattice_constant > 0:
            raise DomainError("lattice constant must be positive")

    @property
    def number_density(self) -> float:
        """Molecules per m^3 in the fcc film, 4/a^3."""
        if self.lattice_constant is None:
            raise DomainError(f"{self.name} has no lattice constant")
        return 4.0 / self.lattice_constant**3

    def transitions(self, parts: str = "all") -> tuple[Transition, ...]:
        if parts == "all":
            return self.electronic + self.phonon
        if parts == "electronic":
            return self.electronic
        if parts == "phonon":
            return self.phonon
        raise DomainError(f"parts must be one of {PARTS}, got {parts!r}")


@dataclass(frozen=True)
class LevelScheme:
    """Internal level energies (J, ground first at 0) and widths (rad/s)."""

    energies: tuple[float, ...]
    widths: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(self.energies))
        object.__setattr__(self, "widths", tuple(self.widths))
        if len(self.energies) != len(self.widths):
            raise DomainError("energies and widths must have equal length")
        if list(self.energies) != sorted(self.energies):
            raise DomainError("energies must be non-decreasing")
        if self.energies and self.energies[0] != 0.0:
            raise DomainError("ground-state energy must be 0")
        if self.widths and self.widths[0] != 0.0:
            raise DomainError("ground-state width must be 0")


def populations(scheme: LevelScheme, T_m: float) -> np.ndarray:
    """Boltzmann occupation probabilities at internal temperature T_m.

    T_m = 0 returns the pure ground state.  Computed with the ground-state
    energy subtracted, so arbitrarily large level energies stay finite.
    """
    if T_m < 0:
        raise DomainError("T_m must be >= 0")
    e = np.asarray(scheme.energies, dtype=float)
    if T_m == 0.0:
        p = np.zeros_like(e)
        p[0] = 1.0
        return p
    w = np.exp(-(e - e[0]) / (k_B * T_m))
    return w / math.fsum(w)


def phonon_weight(omega: float, T_m: float) -> float:
    """Thermal weight tanh(hbar w/(2 k_B T_m)) of one phonon line.

    Equals p_0 - p_1 of the independently thermalised two-level mode; the
    companion factor p_0 + p_1 is identically 1.  T_m = 0 gives 1.
    """
    if T_m == 0.0:
        return 1.0
    return math.tanh(hbar * omega / (2.0 * k_B * T_m))


# ---------------------------------------------------------------------------
# polarisability evaluation
# ---------------------------------------------------------------------------

def _alpha_terms(transitions, omega, weights=None):
    omega = np.asarray(omega, dtype=complex)
    out = np.zeros_like(omega)
    for i, t in enumerate(transitions):
        w = 1.0 if weights is None else weights[i]
        out += w * t.omega * t.dipole**2 / (
            t.omega**2 - omega**2 - 1j * omega * t.width / 2.0
        )
    return 2.0 / (3.0 * hbar) * out


def alpha_ground(mol: Molecule, omega, parts: str = "all"):
    """Ground-state polarisability alpha_0(omega), complex, C^2 m^2/J.

    omega may lie anywhere in the closed upper half plane.
    """
    val = _alpha_terms(mol.transitions(parts), omega) + mol.residual_alpha_inf
    return val[()]


def alpha_thermal(mol: Molecule, T_m: float, omega, parts: str = "all"):
    """Thermal polarisability: phonon lines carry tanh(hbar w/(2 k_B T_m)).

    Electronic transitions are far above any attainable internal temperature
    and stay at their ground-state weight.  At T_m = 0 this equals
    :func:`alpha_ground` exactly.
    """
    trans = mol.transitions(parts)
    weights = [
        phonon_weight(t.omega, T_m) if t.kind == "phonon" else 1.0 for t in trans
    ]
    return (_alpha_terms(trans, omega, weights) + mol.residual_alpha_inf)[()]


def alpha_sym(mol: Molecule, T_m: float, xi, parts: str = "all"):
    """Symmetrised imaginary-axis polarisability 0.5[alpha(i xi) + alpha(-i xi)].

    Real and positive for passive transition lists; non-increasing in xi.
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    trans = mol.transitions(parts)
    out = np.zeros_like(xi)
    for t in trans:
        w = phonon_weight(t.omega, T_m) if t.kind == "phonon" else 1.0
        base = t.omega**2 + xi**2
        # 0.5 [1/(base + xi G/2) + 1/(base - xi G/2)], exact and real
        out += w * t.omega * t.dipole**2 * base / (base**2 - (xi * t.width / 2.0) ** 2)
    return (2.0 / (3.0 * hbar) * out + mol.residual_alpha_inf)[()]


def static_alpha(mol: Molecule, T_m: float = 0.0, parts: str = "all") -> float:
    """alpha(0) = (2/3hbar) sum w_k |d|^2/w_k ... via the exact static sum."""
    trans = mol.transitions(parts)
    total = math.fsum(
        (phonon_weight(t.omega, T_m) if t.kind == "phonon" else 1.0)
        * t.dipole**2 / t.omega
        for t in trans
    )
    return 2.0 / (3.0 * hbar) * total + mol.residual_alpha_inf


# ---------------------------------------------------------------------------
# rational polarisability and its decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalAlpha:
    """alpha(omega) as a real-coefficient rational function.

    Coefficients are ascending in the scaled variable s = -i omega / scale,
    where passive responses have all-real coefficients (each oscillator factor
    becomes s^2 + gamma s + Omega^2).  deg(num) <= deg(den); the value at
    infinity is the constant remainder picked up when eps_inf > 1.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]
    scale: float   # rad/s

    def __post_init__(self):
        if len(self.num) > len(self.den):
            raise DomainError("numerator degree must not exceed denominator degree")
        if self.den[-1] == 0.0:
            raise DomainError("denominator leading coefficient must be nonzero")

    def evaluate(self, omega):
        s = -1j * np.asarray(omega, dtype=complex) / self.scale
        P = np.polynomial.polynomial.polyval
        return (P(s, np.asarray(self.num)) / P(s, np.asarray(self.den)))[()]

    @property
    def value_at_infinity(self) -> float:
        if len(self.num) < len(self.den):
            return 0.0
        return self.num[-1] / self.den[-1]


def clausius_mosotti(eps: OscillatorSet, number_density: float) -> RationalAlpha:
    """Single-molecule polarisability of a film, (3 eps0/eta)(eps-1)/(eps+2).

    Exact rational function over the common denominator of all oscillators.
    """
    if not isinstance(eps, OscillatorSet):
        raise DomainError("clausius_mosotti requires an oscillator-sum model")
    if not number_density > 0:
        raise DomainError("number density must be positive")
    scale = max((o.omega for o in eps.oscillators), default=1.0)
    one = np.array([1.0])
    qs = [
        np.array([(o.omega / scale) ** 2, o.damping / scale, 1.0])
        for o in eps.oscillators
    ]
    P = one
    for q in qs:
        P = np.convolve(P, q)
    S = np.zeros(1)
    for i, o in enumerate(eps.oscillators):
        Pi = one
        for j, q in enumerate(qs):
            if j != i:
                Pi = np.convolve(Pi, q)
        S = np.polynomial.polynomial.polyadd(S, o.strength * (o.omega / scale) ** 2 * Pi)
    pref = 3.0 * epsilon_0 / number_density
    num = np.polynomial.polynomial.polyadd((eps.eps_inf - 1.0) * P, S) * pref
    den = np.polynomial.polynomial.polyadd((eps.eps_inf + 2.0) * P, S)
    return RationalAlpha(tuple(num), tuple(den), scale)


def decompose(
    alpha: RationalAlpha,
    kind: str = "electronic",
    measurement_temperature: float | None = None,
    pair_tol: float = 1e-6,
    merge_tol: float = 1e-9,
) -> tuple[tuple[Transition, ...], float]:
    """Extract damped-oscillator transitions from a rational polarisability.

    Denominator roots (companion-matrix eigenvalues in the scaled variable s)
    must occur in complex-conjugate pairs; each pair s = -Gamma/4 +- i
    sqrt(w0^2 - Gamma^2/16) maps to w0 = |s| scale and Gamma = -4 Re(s) scale.
    The transition strength is the real pole-pair coefficient that preserves
    the static polarisability exactly, c = -2 Re(R conj(s)); the s-linear
    remainder of the exact residues has no counterpart in the
    constant-numerator form and is dropped.

    For phonon spectra measured on a warm sample, pass the measurement
    temperature to divide the thermal tanh weight out of the extracted
    dipoles.

    Returns the transitions (ascending in frequency) and the constant
    remainder alpha_inf.

    Raises
    ------
    DecompositionFailure
        If any root lies on the real s-axis or lacks a conjugate partner
        within ``pair_tol`` (a non-passive fit).
    """
    poly = np.polynomial.polynomial
    num = np.asarray(alpha.num, dtype=float)
    den = np.asarray(alpha.den, dtype=float)
    residual = alpha.value_at_infinity
    roots = poly.polyroots(den)

    upper = sorted((z for z in roots if z.imag > 0), key=abs)
    lower = sorted((z for z in roots if z.imag < 0), key=abs)
    if 2 * len(upper) != len(roots) or len(upper) != len(lower):
        raise DecompositionFailure("real denominator roots: response is not passive")
    for zu, zl in zip(upper, lower):
        if abs(zu - np.conj(zl)) > pair_tol * abs(zu):
            raise DecompositionFailure(
                f"roots {zu:.6e} and {zl:.6e} are not conjugate partners within {pair_tol}"
            )

    dden = poly.polyder(den)
    raw = []
    for z in upper:
        if z.real > 0:
            raise DecompositionFailure(f"root {z:.6e} lies in the growing half plane")
        w0 = abs(z) * alpha.scale
        width = -4.0 * z.real * alpha.scale
        R = poly.polyval(z, num) / poly.polyval(z, dden)
        strength = -2.0 * (R * np.conj(z)).real * alpha.scale**2   # c, preserves alpha(0)
        raw.append([w0, width, strength])

    # merge numerically clustered roots
    raw.sort(key=lambda r: r[0])
    merged: list[list[float]] = []
    for w0, width, strength in raw:
        if merged and abs(w0 - merged[-1][0]) <= merge_tol * w0:
            prev = merged[-1]
            prev[1] = 0.5 * (prev[1] + width)
            prev[2] += strength
        else:
            merged.append([w0, width, strength])

    transitions = []
    for w0, width, strength in merged:
        if strength <= 0:
            raise DecompositionFailure(
                f"non-positive strength {strength:.3e} at {w0:.3e} rad/s"
            )
        d_sq = 3.0 * hbar * strength / (2.0 * w0)
        if measurement_temperature is not None and kind == "phonon":
            d_sq /= phonon_weight(w0, measurement_temperature)
        transitions.append(Transition(w0, math.sqrt(d_sq), width, kind))
    return tuple(transitions), residual


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _trans_list(group):
    return [
        {"omega_rad_s": t.omega, "dipole_Cm": t.dipole, "width_rad_s": t.width}
        for t in group
    ]


def molecule_to_dict(mol: Molecule) -> dict:
    data = {
        "name": mol.name,
        "electronic": _trans_list(mol.electronic),
        "phonon": _trans_list(mol.phonon),
    }
    if mol.lattice_constant is not None:
        data["lattice_constant_m"] = mol.lattice_constant
    if mol.residual_alpha_inf:
        data["residual_alpha_inf"] = mol.residual_alpha_inf
    return data


def molecule_from_dict(data: dict) -> Molecule:
    def build(group, kind):
        return tuple(
            Transition(t["omega_rad_s"], t["dipole_Cm"], t["width_rad_s"], kind)
            for t in group
        )

    return Molecule(
        name=data["name"],
        electronic=build(data.get("electronic", ()), "electronic"),
        phonon=build(data.get("phonon", ()), "phonon"),
        lattice_constant=data.get("lattice_constant_m"),
        residual_alpha_inf=data.get("residual_alpha_inf", 0.0),
    )


def load_molecule(path: str | Path) -> Molecule:
    return molecule_from_dict(json.loads(Path(path).read_text()))


def dump_molecule(mol: Molecule, path: str | Path) -> None:
    Path(path).write_text(json.dumps(molecule_to_dict(mol), indent=2) + "\n")
