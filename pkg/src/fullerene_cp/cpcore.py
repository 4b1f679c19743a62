"""Full distance- and temperature-dependent molecule-surface potential.

The potential splits into a virtual-photon part (a sum over discrete
imaginary frequencies xi_j = 2 pi k_B T j / hbar, j = 0 half-weighted) and a
real-photon part fed by absorption and stimulated emission on thermally
populated phonon lines:

    U(z) = U_nres(z) + U_res(z)

Both parts default to the dominant electronic (optical) transition set;
phonon lines are selected explicitly with ``parts`` where meaningful.  All
quadratures use fixed Gauss-Legendre composite rules with node-doubling
verification, so identical inputs give bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.constants import c, epsilon_0, hbar, k as k_B, mu_0
from scipy.integrate import quad

from .dielectric import (
    PerfectConductor,
    PermittivityModel,
    eval_eps_imag,
    refl_real,
    static_mirror_factor,
)
from .errors import DomainError, MatsubaraBudgetExceeded, QuadratureFailure
from .molecule import Molecule, alpha_sym, phonon_weight

__all__ = [
    "EnvConfig",
    "QuadratureSettings",
    "PotentialResult",
    "n_thermal",
    "u_nonresonant",
    "u_zero_temperature",
    "u_resonant",
    "u_total",
]


@dataclass(frozen=True)
class EnvConfig:
    """Environment temperature, internal molecular temperature, distance."""

    T: float      # K
    T_m: float    # K
    z: float      # m

    def __post_init__(self):
        if not self.z > 0:
            raise DomainError("z must be positive")
        if self.T < 0 or self.T_m < 0:
            raise DomainError("temperatures must be >= 0")
        if not (math.isfinite(self.T) and math.isfinite(self.T_m)):
            raise DomainError("temperatures must be finite")


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-8
    matsubara_tail_tol: float = 1e-10
    max_matsubara: int = 1_000_000
    max_subdivisions: int = 10_000

    def __post_init__(self):
        for name in ("rel_tol", "matsubara_tail_tol", "max_matsubara", "max_subdivisions"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


@dataclass(frozen=True)
class PotentialResult:
    total: float
    nonresonant: float
    resonant: float
    matsubara_terms_used: int
    est_error: float


def n_thermal(omega: float, T: float) -> float:
    """Thermal photon number 1/(exp(hbar w/k_B T) - 1); zero at T = 0."""
    if omega <= 0:
        raise DomainError("omega must be positive")
    if T < 0:
        raise DomainError("T must be >= 0")
    if T == 0.0:
        return 0.0
    return 1.0 / math.expm1(hbar * omega / (k_B * T))


# ---------------------------------------------------------------------------
# imaginary-axis kernel: K(xi, z) = int_{xi/c}^inf dk e^{-2kz} [xi^2 r_s - (2k^2c^2 - xi^2) r_p]
# ---------------------------------------------------------------------------

# Panels in the shifted exponent variable s = 2 kappa z - 2 xi z / c.  The
# e^{-s} weight makes 64-point Gauss-Legendre per panel exact to roughly
# machine precision; the 32-point grid provides the convergence check.
_S_PANELS = ((0.0, 1.0), (1.0, 10.0), (10.0, 100.0), (100.0, 700.0))


def _panel_nodes(n: int, panels=_S_PANELS):
    x, w = leggauss(n)
    S = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in panels])
    W = np.concatenate([0.5 * (b - a) * w for a, b in panels])
    return S, W * np.exp(-S)


_SK_FINE = _panel_nodes(64)
_SK_COARSE = _panel_nodes(32)


def _kernel_block(surf: PermittivityModel, xi: np.ndarray, z: float,
                  nodes=_SK_FINE) -> np.ndarray:
    """Vectorised kernel for a block of imaginary frequencies xi > 0."""
    S, W = nodes
    t0 = 2.0 * xi * z / c                      # (J,)
    t = t0[:, None] + S[None, :]               # (J, N)
    kap = t / (2.0 * z)
    xi2 = (xi**2)[:, None]
    if isinstance(surf, PerfectConductor):
        rs = -1.0
        rp = 1.0
    else:
        eps = np.atleast_1d(eval_eps_imag(surf, xi))[:, None]
        kap1 = np.sqrt(kap**2 + (eps - 1.0) * xi2 / c**2)
        rs = (kap - kap1) / (kap + kap1)
        rp = (eps * kap - kap1) / (eps * kap + kap1)
    bracket = xi2 * (rs + rp) - 2.0 * (kap * c) ** 2 * rp
    return np.exp(-t0) / (2.0 * z) * np.sum(W[None, :] * bracket, axis=1)


def _kernel_checked(surf, xi, z, rel_tol):
    fine = _kernel_block(surf, xi, z, _SK_FINE)
    coarse = _kernel_block(surf, xi, z, _SK_COARSE)
    scale = np.max(np.abs(fine))
    if scale > 0:
        err = np.max(np.abs(fine - coarse)) / scale
        if err > max(rel_tol, 1e-13):
            raise QuadratureFailure(
                f"wave-vector quadrature not converged: node-doubling residual {err:.2e}"
            )
    return fine


_MONOTONE_RUN = 5      # consecutive decaying terms before the tail estimate applies
_BLOCK = 256


def _nonresonant_sum(mol, surf, env, q, parts):
    """Matsubara sum; returns (value, terms_used, est_error)."""
    xi1 = 2.0 * math.pi * k_B * env.T / hbar
    pref = mu_0 * k_B * env.T / (8.0 * math.pi)

    # j = 0 in its analytic limit: only the p mirror factor survives
    alpha0 = float(alpha_sym(mol, env.T_m, 0.0, parts))
    term0 = -k_B * env.T * alpha0 * static_mirror_factor(surf) / (
        16.0 * math.pi * epsilon_0 * env.z**3
    )
    terms = [term0]

    decay_run = 0
    prev_abs = math.inf
    j = 0
    while j < q.max_matsubara:
        n = min(_BLOCK, q.max_matsubara - j)
        jj = np.arange(j + 1, j + n + 1)
        xi = xi1 * jj
        al = np.atleast_1d(alpha_sym(mol, env.T_m, xi, parts))
        K = _kernel_checked(surf, xi, env.z, q.rel_tol)
        block = pref * 2.0 * al * K
        partial = math.fsum(terms)
        for idx, term in enumerate(block):
            terms.append(term)
            partial += term
            a = abs(term)
            if a < prev_abs:
                decay_run += 1
            else:
                decay_run = 0
            if decay_run >= _MONOTONE_RUN and prev_abs > 0:
                r = a / prev_abs
                tail = a * r / (1.0 - r)
                if tail < q.matsubara_tail_tol * abs(partial):
                    total = math.fsum(terms)
                    return total, len(terms), tail
            prev_abs = a
        j += n
    raise MatsubaraBudgetExceeded(
        f"no convergence within {q.max_matsubara} frequency terms "
        f"(last |term| {prev_abs:.3e})"
    )


def u_nonresonant(mol: Molecule, surf: PermittivityModel, env: EnvConfig,
                  q: QuadratureSettings | None = None,
                  parts: str = "electronic") -> float:
    """Virtual-photon potential at temperature T > 0, in J.

    The j = 0 term is taken in its analytic form
    -k_B T alpha(0) / (16 pi eps0 z^3) * (eps(0)-1)/(eps(0)+1), with the
    mirror factor equal to 1 exactly for conductors.  The sum is truncated
    once a geometric tail estimate drops below ``matsubara_tail_tol`` times
    the partial sum; the estimate is reported through :func:`u_total`, not
    added to the sum.  ``parts`` selects the transition set; the default
    evaluates the dominant optical potential.
    """
    if env.T <= 0:
        raise DomainError("u_nonresonant requires T > 0; use u_zero_temperature")
    q = q or QuadratureSettings()
    value, _, _ = _nonresonant_sum(mol, surf, env, q, parts)
    return value


def u_zero_temperature(mol: Molecule, surf: PermittivityModel, z: float,
                       q: QuadratureSettings | None = None,
                       parts: str = "electronic") -> float:
    """Zero-temperature potential: the frequency sum replaced by an integral."""
    if not z > 0:
        raise DomainError("z must be positive")
    q = q or QuadratureSettings()
    w_ref = c / z

    def outer(u):
        xi = w_ref * u / (1.0 - u)
        jac = w_ref / (1.0 - u) ** 2
        al = float(alpha_sym(mol, 0.0, xi, parts))
        K = float(_kernel_block(surf, np.array([xi]), z)[0])
        return 2.0 * al * K * jac

    val, err = quad(outer, 0.0, 1.0, limit=q.max_subdivisions,
                    epsrel=q.rel_tol, epsabs=0.0)
    if val != 0.0 and abs(err / val) > 100.0 * q.rel_tol:
        raise QuadratureFailure(
            f"frequency integral error estimate {abs(err/val):.2e} exceeds tolerance"
        )
    return hbar * mu_0 / (16.0 * math.pi**2) * val


# ---------------------------------------------------------------------------
# resonant (real-photon) contribution
# ---------------------------------------------------------------------------

def _emission_minus_absorption(omega: float, T: float, T_m: float) -> float:
    """p_1 (n_T + 1) - p_0 n_T for an independently thermalised two-level line.

    Equals p_0 n_T expm1(hbar w (1/T - 1/T_m)/k_B): exactly zero in mutual
    equilibrium T = T_m, negative for a hot environment (net absorption),
    positive for a hot molecule (net stimulated + spontaneous emission).
    """
    x_m = math.inf if T_m == 0.0 else hbar * omega / (k_B * T_m)
    p1 = 0.0 if math.isinf(x_m) else 1.0 / (math.exp(x_m) + 1.0)
    p0 = 1.0 - p1
    nT = n_thermal(omega, T)
    if T > 0 and T_m > 0:
        return p0 * nT * math.expm1(hbar * omega * (1.0 / T - 1.0 / T_m) / k_B)
    return p1 * (nT + 1.0) - p0 * nT


def _propagating_integral(surf, omega, z, n_per_panel=16):
    """(omega/c)^2 Int_0^1 dx Im[e^{i a x} (r_s - (2x^2-1) r_p)], a = 2 w z/c.

    x = k_perp c / omega; panels are capped at a quarter oscillation period.
    Above a = 1e3 the integral switches to half-period partial sums with
    Euler acceleration of the alternating series.
    """
    a = 2.0 * omega * z / c
    if a <= 1e3:
        n_panels = max(4, int(math.ceil(a / (0.5 * math.pi))))
        edges = np.linspace(0.0, 1.0, n_panels + 1)
        xg, wg = leggauss(n_per_panel)
        x = np.concatenate([0.5 * (b - e) * xg + 0.5 * (e + b) for e, b in zip(edges, edges[1:])])
        w = np.concatenate([np.full(n_per_panel, 0.5 * (b - e)) * wg for e, b in zip(edges, edges[1:])])
        k_par = (omega / c) * np.sqrt(np.clip(1.0 - x**2, 0.0, None))
        rs, rp = refl_real(surf, omega, k_par)
        f = np.imag(np.exp(1j * a * x) * (rs - (2.0 * x**2 - 1.0) * rp))
        return (omega / c) ** 2 * float(np.sum(w * f))

    # half-period Filon-style summation with Euler acceleration
    half = math.pi / a
    xg, wg = leggauss(8)

    def chunk(x0, x1):
        x = 0.5 * (x1 - x0) * xg + 0.5 * (x0 + x1)
        k_par = (omega / c) * np.sqrt(np.clip(1.0 - x**2, 0.0, None))
        rs, rp = refl_real(surf, omega, k_par)
        f = np.imag(np.exp(1j * a * x) * (rs - (2.0 * x**2 - 1.0) * rp))
        return 0.5 * (x1 - x0) * float(np.sum(wg * f))

    sums = []
    acc = 0.0
    x0 = 0.0
    while x0 < 1.0:
        x1 = min(x0 + half, 1.0)
        acc += chunk(x0, x1)
        sums.append(acc)
        x0 = x1
    tail = np.array(sums[-min(len(sums), 14):])
    while tail.size > 1:
        tail = 0.5 * (tail[:-1] + tail[1:])
    return (omega / c) ** 2 * float(tail[0])


def _evanescent_integral(surf, omega, z):
    """-Int_0^inf dk e^{-2 k z} Re[r_s + (2 k^2 c^2/w^2 + 1) r_p].

    Analytic continuation of the propagating integrand across k_par = w/c:
    the perpendicular wave number turns imaginary, the phase factor becomes a
    real decay, and the 1/k_perp measure rotates the bracket onto its real
    part.
    """
    S, W = _SK_FINE
    kap = S / (2.0 * z)
    k_par = np.sqrt(kap**2 + (omega / c) ** 2)
    rs, rp = refl_real(surf, omega, k_par)
    bracket = np.real(rs + (2.0 * (kap * c / omega) ** 2 + 1.0) * rp)
    return -float(np.sum(W * bracket)) / (2.0 * z)


def u_resonant(mol: Molecule, surf: PermittivityModel, env: EnvConfig,
               q: QuadratureSettings | None = None) -> float:
    """Real-photon potential from thermally populated phonon lines, in J.

    Electronic levels stay in the ground state at any attainable internal
    temperature and contribute nothing here; each phonon line is an
    independently thermalised two-level system.  The result vanishes
    identically in mutual equilibrium T = T_m and at T = T_m = 0.
    """
    total = 0.0
    for t in mol.phonon:
        weight = _emission_minus_absorption(t.omega, env.T, env.T_m)
        if weight == 0.0:
            continue
        I = (_propagating_integral(surf, t.omega, env.z)
             + _evanescent_integral(surf, t.omega, env.z))
        total += mu_0 / (12.0 * math.pi) * weight * t.omega**2 * t.dipole**2 * I
    return total


def u_total(mol: Molecule, surf: PermittivityModel, env: EnvConfig,
            q: QuadratureSettings | None = None,
            parts: str = "electronic") -> PotentialResult:
    """Total potential: virtual-photon part plus real-photon part."""
    q = q or QuadratureSettings()
    nonres, terms, tail = _nonresonant_sum(mol, surf, env, q, parts)
    res = u_resonant(mol, surf, env, q) if parts in ("all", "phonon") else 0.0
    return PotentialResult(
        total=nonres + res,
        nonresonant=nonres,
        resonant=res,
        matsubara_terms_used=terms,
        est_error=tail,
    )
