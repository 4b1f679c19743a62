"""Surface and film dielectric response models.

All models evaluate on the real frequency axis (complex permittivity) and on
the positive imaginary axis (real permittivity), and provide Fresnel
reflection coefficients for both branches.  Strict SI units throughout:
angular frequencies in rad/s, wave vectors in 1/m.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.constants import c

from .errors import (
    DomainError,
    PerfectConductorHasNoEps,
    QuadratureFailure,
    RealPartUnavailable,
    StaticDrudeDivergence,
)

__all__ = [
    "Oscillator",
    "OscillatorSet",
    "DrudeLorentz",
    "TabulatedImEps",
    "SemiQuantum4",
    "PerfectConductor",
    "PermittivityModel",
    "ReflectionPair",
    "eval_eps_real",
    "eval_eps_imag",
    "im_eps_real",
    "static_eps",
    "static_mirror_factor",
    "refl_imag",
    "refl_real",
    "kk_imag_axis",
    "model_to_dict",
    "model_from_dict",
    "load_model",
    "dump_model",
]


@dataclass(frozen=True)
class Oscillator:
    """One Lorentz oscillator: resonance frequency, strength, damping."""

    omega: float      # rad/s
    strength: float   # dimensionless
    damping: float    # rad/s

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError(f"oscillator frequency must be finite positive, got {self.omega}")
        if not (self.strength > 0 and math.isfinite(self.strength)):
            raise DomainError(f"oscillator strength must be finite positive, got {self.strength}")
        if not (self.damping > 0 and math.isfinite(self.damping)):
            raise DomainError(f"oscillator damping must be finite positive, got {self.damping}")


@dataclass(frozen=True)
class OscillatorSet:
    """Sum-of-Lorentzians permittivity.

    eps(omega) = eps_inf + sum_i f_i O_i^2 / (O_i^2 - omega^2 - i gamma_i omega)
    """

    eps_inf: float = 1.0
    oscillators: tuple[Oscillator, ...] = ()

    def __post_init__(self):
        if not (self.eps_inf >= 1.0 and math.isfinite(self.eps_inf)):
            raise DomainError(f"eps_inf must be >= 1, got {self.eps_inf}")
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        freqs = [o.omega for o in self.oscillators]
        if freqs != sorted(freqs):
            raise DomainError("oscillators must be sorted ascending in frequency")


@dataclass(frozen=True)
class DrudeLorentz:
    """Free-electron (Drude) term plus interband Lorentz oscillators.

    eps(omega) = 1 - O_0^2/(omega (omega + i gamma_0)) + Lorentz sum
    """

    plasma: float     # rad/s
    damping: float    # rad/s
    lorentz: OscillatorSet = field(default_factory=OscillatorSet)

    def __post_init__(self):
        if not (self.plasma > 0 and self.damping > 0):
            raise DomainError("Drude plasma frequency and damping must be positive")
        if self.lorentz.eps_inf != 1.0:
            raise DomainError("the Lorentz part of a Drude-Lorentz model must have eps_inf = 1")


@dataclass(frozen=True)
class TabulatedImEps:
    """Absorption-only model: Im eps given in closed form above a threshold.

    Im eps(omega) = Theta(omega - omega_t) *
        f * omega_0 * gamma * (omega - omega_t)^2 / (D(omega) * omega)

    with D = (omega^2 - omega_0^2)^2 - gamma^2 omega^2 for
    ``denominator="paper"`` (the printed form; it changes sign inside a band
    around omega_0) or + gamma^2 omega^2 for ``denominator="lorentzian"``
    (the passive damped-oscillator form).  The imaginary-axis permittivity
    follows from the Kramers-Kronig transform, which only converges for the
    lorentzian reading.
    """

    omega_t: float    # onset, rad/s
    omega_0: float    # resonance, rad/s
    strength: float   # rad/s
    damping: float    # rad/s
    denominator: str = "paper"

    def __post_init__(self):
        for name in ("omega_t", "omega_0", "strength", "damping"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.denominator not in ("paper", "lorentzian"):
            raise DomainError("denominator must be 'paper' or 'lorentzian'")

    def sign_change_band(self) -> tuple[float, float]:
        """Frequencies where the ``paper`` denominator crosses zero."""
        disc = math.sqrt(self.damping**2 + 4.0 * self.omega_0**2)
        return (0.5 * (disc - self.damping), 0.5 * (disc + self.damping))


@dataclass(frozen=True)
class SemiQuantum4:
    """Single-resonance four-parameter factorised permittivity.

    eps(omega) = (O_L^2 - omega^2 - i omega g_L)/(O_T^2 - omega^2 - i omega g_T)
    """

    omega_l: float
    omega_t: float
    gamma_l: float
    gamma_t: float

    def __post_init__(self):
        if not (self.omega_l > self.omega_t > 0):
            raise DomainError("requires omega_l > omega_t > 0")
        if not (self.gamma_l > 0 and self.gamma_t > 0):
            raise DomainError("dampings must be positive")


@dataclass(frozen=True)
class PerfectConductor:
    """Idealised mirror: r_s = -1, r_p = +1 at all frequencies."""


PermittivityModel = Union[
    PerfectConductor, DrudeLorentz, OscillatorSet, TabulatedImEps, SemiQuantum4
]

#: (r_s, r_p) pair; complex on the real-frequency branch, real on the imaginary axis.
ReflectionPair = tuple


# ---------------------------------------------------------------------------
# real-frequency evaluation
# ---------------------------------------------------------------------------

def _lorentz_sum_real(oscillators, omega):
    out = np.zeros_like(np.asarray(omega, dtype=complex))
    for o in oscillators:
        out += o.strength * o.omega**2 / (o.omega**2 - omega**2 - 1j * o.damping * omega)
    return out


def im_eps_real(model: PermittivityModel, omega):
    """Im eps(omega) on the real axis.  Defined for every model with finite eps."""
    omega = np.asarray(omega, dtype=float)
    if isinstance(model, TabulatedImEps):
        sgn = -1.0 if model.denominator == "paper" else 1.0
        den = (omega**2 - model.omega_0**2) ** 2 + sgn * model.damping**2 * omega**2
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (model.strength * model.omega_0 * model.damping
                   * (omega - model.omega_t) ** 2 / (den * omega))
        return np.where(omega > model.omega_t, val, 0.0)[()]
    return np.imag(eval_eps_real(model, omega))


def eval_eps_real(model: PermittivityModel, omega):
    """Complex permittivity eps(omega) for real omega >= 0."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("omega must be >= 0")
    if isinstance(model, PerfectConductor):
        raise PerfectConductorHasNoEps("a perfect conductor has no finite permittivity")
    if isinstance(model, TabulatedImEps):
        raise RealPartUnavailable(
            "only Im eps(omega) is defined for this model; use im_eps_real"
        )
    if isinstance(model, OscillatorSet):
        return (model.eps_inf + _lorentz_sum_real(model.oscillators, omega))[()]
    if isinstance(model, DrudeLorentz):
        drude = -model.plasma**2 / (omega * (omega + 1j * model.damping))
        return (1.0 + drude + _lorentz_sum_real(model.lorentz.oscillators, omega))[()]
    if isinstance(model, SemiQuantum4):
        num = model.omega_l**2 - omega**2 - 1j * omega * model.gamma_l
        den = model.omega_t**2 - omega**2 - 1j * omega * model.gamma_t
        return (num / den)[()]
    raise TypeError(f"unknown permittivity model {type(model)!r}")


# ---------------------------------------------------------------------------
# imaginary-axis evaluation
# ---------------------------------------------------------------------------

def _lorentz_sum_imag(oscillators, xi):
    out = np.zeros_like(np.asarray(xi, dtype=float))
    for o in oscillators:
        out += o.strength * o.omega**2 / (o.omega**2 + xi**2 + o.damping * xi)
    return out


# Composite Gauss-Legendre nodes on theta in (0, pi/2) for the compactified
# Kramers-Kronig integral, omega = omega_t (1 + tan theta).  Two resolutions;
# the coarse one serves as the convergence check for the fine one.
_KK_NPANEL = 24


def _kk_nodes(n_per_panel: int):
    edges = np.linspace(0.0, 0.5 * np.pi, _KK_NPANEL + 1)
    x, w = leggauss(n_per_panel)
    th = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(edges, edges[1:])])
    wt = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges, edges[1:])])
    return th, wt


_KK_COARSE = _kk_nodes(24)
_KK_FINE = _kk_nodes(48)


def kk_imag_axis(im_eps, xi, omega_onset: float, eps_const: float = 1.0,
                 rel_tol: float = 1e-8):
    """Kramers-Kronig transform of an absorption spectrum to the imaginary axis.

    eps(i xi) = eps_const + (2/pi) * int_0^inf  omega Im eps(omega) / (omega^2 + xi^2) domega

    The integrand is compactified with omega = omega_onset (1 + tan theta)
    (the spectrum must vanish below ``omega_onset``) and integrated on nested
    Gauss-Legendre grids; disagreement beyond ``rel_tol`` raises
    :class:`QuadratureFailure`.

    Parameters
    ----------
    im_eps : callable
        Vectorised Im eps(omega) on the real axis.
    xi : float or ndarray
        Imaginary-axis frequencies, rad/s, >= 0.
    omega_onset : float
        Lower edge of the absorption spectrum, rad/s.
    eps_const : float
        High-frequency constant added to the transform.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty_like(xi)
    for nodes, target in ((_KK_COARSE, None), (_KK_FINE, out)):
        th, wt = nodes
        w = omega_onset * (1.0 + np.tan(th))
        jac = omega_onset / np.cos(th) ** 2
        f = im_eps(w) * w * jac
        vals = eps_const + (2.0 / np.pi) * np.sum(
            wt * f / (w[None, :] ** 2 + xi[:, None] ** 2), axis=1
        )
        if target is None:
            coarse = vals
        else:
            out[:] = vals
    err = np.max(np.abs(out - coarse) / np.maximum(np.abs(out), 1e-300))
    if err > rel_tol:
        raise QuadratureFailure(
            f"Kramers-Kronig transform did not converge: node-doubling residual {err:.2e}"
        )
    return out if out.size > 1 else out[0]


def eval_eps_imag(model: PermittivityModel, xi, rel_tol: float = 1e-8):
    """Real permittivity eps(i xi) on the positive imaginary axis."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    if isinstance(model, PerfectConductor):
        raise PerfectConductorHasNoEps("a perfect conductor has no finite permittivity")
    if isinstance(model, OscillatorSet):
        return (model.eps_inf + _lorentz_sum_imag(model.oscillators, xi))[()]
    if isinstance(model, DrudeLorentz):
        if np.any(xi == 0):
            raise StaticDrudeDivergence("eps(i xi) diverges at xi = 0; use static_eps")
        drude = model.plasma**2 / (xi * (xi + model.damping))
        return (1.0 + drude + _lorentz_sum_imag(model.lorentz.oscillators, xi))[()]
    if isinstance(model, SemiQuantum4):
        num = model.omega_l**2 + xi**2 + model.gamma_l * xi
        den = model.omega_t**2 + xi**2 + model.gamma_t * xi
        return (num / den)[()]
    if isinstance(model, TabulatedImEps):
        if model.denominator == "paper":
            lo, hi = model.sign_change_band()
            raise QuadratureFailure(
                "the 'paper' denominator makes Im eps non-integrable (simple poles at "
                f"{lo:.3e} and {hi:.3e} rad/s); use denominator='lorentzian'"
            )
        return kk_imag_axis(lambda w: im_eps_real(model, w), xi,
                            model.omega_t, 1.0, rel_tol)
    raise TypeError(f"unknown permittivity model {type(model)!r}")


def static_eps(model: PermittivityModel) -> float:
    """eps(0).  Returns ``math.inf`` where the static response diverges."""
    if isinstance(model, (PerfectConductor, DrudeLorentz)):
        return math.inf
    if isinstance(model, OscillatorSet):
        return model.eps_inf + sum(o.strength for o in model.oscillators)
    if isinstance(model, SemiQuantum4):
        return model.omega_l**2 / model.omega_t**2
    if isinstance(model, TabulatedImEps):
        return float(eval_eps_imag(model, 0.0))
    raise TypeError(f"unknown permittivity model {type(model)!r}")


def static_mirror_factor(model: PermittivityModel) -> float:
    """(eps(0) - 1)/(eps(0) + 1), with the divergent static case giving 1 exactly."""
    e0 = static_eps(model)
    if math.isinf(e0):
        return 1.0
    return (e0 - 1.0) / (e0 + 1.0)


# ---------------------------------------------------------------------------
# reflection coefficients
# ---------------------------------------------------------------------------

def refl_imag(model: PermittivityModel, xi: float, kappa_perp):
    """Fresnel coefficients (r_s, r_p) at imaginary frequency i*xi.

    kappa_perp is the perpendicular decay constant, >= xi/c.  Both
    coefficients are real; for passive media with eps(i xi) >= 1 they satisfy
    -1 <= r_s <= 0 <= r_p <= 1.
    """
    kappa_perp = np.asarray(kappa_perp, dtype=float)
    if np.any(kappa_perp < xi / c * (1.0 - 1e-12)):
        raise DomainError("kappa_perp must be >= xi/c")
    if isinstance(model, PerfectConductor):
        shape = np.broadcast(kappa_perp).shape
        return (np.full(shape, -1.0)[()], np.full(shape, 1.0)[()])
    if xi == 0.0:
        # kappa_1 -> kappa_perp; r_p keeps its static limit
        rp = static_mirror_factor(model)
        z = np.zeros_like(kappa_perp)
        return (z[()], (z + rp)[()])
    eps = eval_eps_imag(model, xi)
    kappa1 = np.sqrt(kappa_perp**2 + (eps - 1.0) * xi**2 / c**2)
    rs = (kappa_perp - kappa1) / (kappa_perp + kappa1)
    rp = (eps * kappa_perp - kappa1) / (eps * kappa_perp + kappa1)
    return (rs[()], rp[()])


def refl_real(model: PermittivityModel, omega: float, k_par):
    """Fresnel coefficients (r_s, r_p) at real frequency omega.

    The perpendicular wave number is real non-negative on the propagating
    branch (k_par <= omega/c) and +i sqrt(k_par^2 - omega^2/c^2) on the
    evanescent branch.  Inside the medium the branch is fixed by
    Im k_perp_1 > 0, with Re k_perp_1 >= 0 when the imaginary part vanishes.
    """
    if omega <= 0:
        raise DomainError("omega must be positive")
    k_par = np.asarray(k_par, dtype=float)
    if np.any(k_par < 0):
        raise DomainError("k_par must be >= 0")
    w2c2 = (omega / c) ** 2
    arg = w2c2 - k_par**2
    kperp = np.where(arg >= 0, np.sqrt(np.abs(arg)), 0.0) + 1j * np.where(
        arg < 0, np.sqrt(np.abs(arg)), 0.0
    )
    if isinstance(model, PerfectConductor):
        shape = kperp.shape
        return (np.full(shape, -1.0 + 0j)[()], np.full(shape, 1.0 + 0j)[()])
    eps = eval_eps_real(model, omega)
    k1 = np.sqrt(eps * w2c2 - k_par**2 + 0j)
    flip = (k1.imag < 0) | ((k1.imag == 0) & (k1.real < 0))
    k1 = np.where(flip, -k1, k1)
    rs = (kperp - k1) / (kperp + k1)
    rp = (eps * kperp - k1) / (eps * kperp + k1)
    return (rs[()], rp[()])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_TYPE_TAGS = {
    PerfectConductor: "perfect-conductor",
    DrudeLorentz: "drude-lorentz",
    OscillatorSet: "oscillators",
    TabulatedImEps: "tabulated-im",
    SemiQuantum4: "semi-quantum",
}


def model_to_dict(model: PermittivityModel) -> dict:
    """JSON-ready dict, all frequencies in rad/s."""
    tag = _TYPE_TAGS[type(model)]
    if isinstance(model, PerfectConductor):
        params = {}
    elif isinstance(model, OscillatorSet):
        params = {
            "eps_inf": model.eps_inf,
            "oscillators": [
                {"omega_rad_s": o.omega, "strength": o.strength, "gamma_rad_s": o.damping}
                for o in model.oscillators
            ],
        }
    elif isinstance(model, DrudeLorentz):
        params = {
            "plasma_rad_s": model.plasma,
            "gamma_rad_s": model.damping,
            "oscillators": [
                {"omega_rad_s": o.omega, "strength": o.strength, "gamma_rad_s": o.damping}
                for o in model.lorentz.oscillators
            ],
        }
    elif isinstance(model, TabulatedImEps):
        params = {
            "omega_t_rad_s": model.omega_t,
            "omega_rad_s": model.omega_0,
            "f_rad_s": model.strength,
            "gamma_rad_s": model.damping,
            "denominator": model.denominator,
        }
    else:  # SemiQuantum4
        params = {
            "omega_l_rad_s": model.omega_l,
            "omega_t_rad_s": model.omega_t,
            "gamma_l_rad_s": model.gamma_l,
            "gamma_t_rad_s": model.gamma_t,
        }
    return {"type": tag, "params": params}


def _oscillators_from(params) -> tuple[Oscillator, ...]:
    return tuple(
        Oscillator(o["omega_rad_s"], o["strength"], o["gamma_rad_s"])
        for o in params.get("oscillators", ())
    )


def model_from_dict(data: dict) -> PermittivityModel:
    tag = data["type"]
    params = data.get("params", {})
    if tag == "perfect-conductor":
        return PerfectConductor()
    if tag == "oscillators":
        return OscillatorSet(params.get("eps_inf", 1.0), _oscillators_from(params))
    if tag == "drude-lorentz":
        return DrudeLorentz(
            params["plasma_rad_s"], params["gamma_rad_s"],
            OscillatorSet(1.0, _oscillators_from(params)),
        )
    if tag == "tabulated-im":
        return TabulatedImEps(
            params["omega_t_rad_s"], params["omega_rad_s"],
            params["f_rad_s"], params["gamma_rad_s"],
            params.get("denominator", "paper"),
        )
    if tag == "semi-quantum":
        return SemiQuantum4(
            params["omega_l_rad_s"], params["omega_t_rad_s"],
            params["gamma_l_rad_s"], params["gamma_t_rad_s"],
        )
    raise DomainError(f"unknown material model type {tag!r}")


def load_model(path: str | Path) -> PermittivityModel:
    return model_from_dict(json.loads(Path(path).read_text()))


def dump_model(model: PermittivityModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")
