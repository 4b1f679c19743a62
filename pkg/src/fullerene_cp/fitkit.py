"""Least-squares fitting of permittivity models to tabulated spectra.

The optimizer is a damped Gauss-Newton iteration over log-transformed
parameters (so every fitted quantity stays positive), with the classic
damping schedule: reject a step and multiply the damping by 10, accept and
divide by 10.  Deterministic given identical inputs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dielectric import (
    Oscillator,
    OscillatorSet,
    PermittivityModel,
    SemiQuantum4,
    eval_eps_real,
    model_to_dict,
)
from .errors import DomainError, InsufficientData, NonConvergence

__all__ = [
    "SpectrumTable",
    "FitReport",
    "fit_oscillators",
    "fit_semi_quantum",
    "synth_spectrum",
    "read_spectrum_csv",
    "write_spectrum_csv",
]

MAX_ITER = 10_000
GRAD_TOL = 1e-10
STEP_TOL = 1e-12
LAMBDA0 = 1e-3


@dataclass(frozen=True)
class SpectrumTable:
    """Sampled permittivity: omega strictly ascending, im_eps >= 0."""

    omega: np.ndarray
    im_eps: np.ndarray
    re_eps: np.ndarray | None = None

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        im_eps = np.asarray(self.im_eps, dtype=float)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "im_eps", im_eps)
        if self.re_eps is not None:
            object.__setattr__(self, "re_eps", np.asarray(self.re_eps, dtype=float))
        if omega.ndim != 1 or np.any(np.diff(omega) <= 0):
            raise DomainError("omega must be strictly ascending")
        if im_eps.shape != omega.shape:
            raise DomainError("im_eps shape must match omega")
        if np.any(im_eps < 0):
            raise DomainError("im_eps must be >= 0")
        if self.re_eps is not None and self.re_eps.shape != omega.shape:
            raise DomainError("re_eps shape must match omega")

    def __len__(self):
        return self.omega.size


@dataclass(frozen=True)
class FitReport:
    model: PermittivityModel
    residual_rms: float
    iterations: int
    converged: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": model_to_dict(self.model),
                "residual_rms": self.residual_rms,
                "iterations": self.iterations,
                "converged": self.converged,
            },
            indent=2,
        )


def synth_spectrum(model: PermittivityModel, omega: np.ndarray) -> SpectrumTable:
    """Exact spectrum of a model on a frequency grid (round-trip input)."""
    eps = eval_eps_real(model, np.asarray(omega, dtype=float))
    return SpectrumTable(omega, np.imag(eps), np.real(eps))


# ---------------------------------------------------------------------------
# damped Gauss-Newton over log parameters
# ---------------------------------------------------------------------------

def _levenberg(residual_fn, theta0, max_iter=MAX_ITER):
    """Minimise ||residual_fn(theta)||^2.  Returns (theta, rms, iters, converged).

    The reported rms never increases across accepted iterations.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    r = residual_fn(theta)
    cost = float(r @ r)
    lam = LAMBDA0
    n = theta.size

    def jacobian(th, r0):
        J = np.empty((r0.size, n))
        for k in range(n):
            h = 1e-6 * max(1.0, abs(th[k]))
            tp = th.copy()
            tp[k] += h
            J[:, k] = (residual_fn(tp) - r0) / h
        return J

    iterations = 0
    converged = False
    for _ in range(max_iter):
        J = jacobian(theta, r)
        g = J.T @ r
        if np.max(np.abs(g)) < GRAD_TOL * max(1.0, cost):
            converged = True
            break
        JTJ = J.T @ J
        diag = np.diag(JTJ).copy()
        diag[diag <= 0] = 1.0
        stepped = False
        for _ in range(60):
            try:
                step = np.linalg.solve(JTJ + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            r_new = residual_fn(theta + step)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                theta += step
                r, cost = r_new, cost_new
                lam = max(lam / 10.0, 1e-14)
                iterations += 1
                stepped = True
                if np.max(np.abs(step)) < STEP_TOL:
                    converged = True
                break
            lam *= 10.0
        if not stepped:
            # damping saturated: no descent direction left
            converged = True
        if converged:
            break
    rms = math.sqrt(cost / r.size)
    return theta, rms, iterations, converged


def _residuals(table: SpectrumTable, weight: str):
    re, im = table.re_eps, table.im_eps
    if weight == "relative":
        scale = 1.0 / np.maximum(np.abs(re + 1j * im), 1e-30)
    elif weight == "none":
        scale = np.ones_like(im)
    else:
        raise DomainError(f"unknown weight {weight!r}")

    def build(eps_model):
        return np.concatenate(
            (((np.real(eps_model) - re) * scale), ((np.imag(eps_model) - im) * scale))
        )

    return build


# ---------------------------------------------------------------------------
# oscillator-sum fit
# ---------------------------------------------------------------------------

def _osc_pack(model: OscillatorSet) -> np.ndarray:
    theta = [math.log(model.eps_inf - 1.0)] if model.eps_inf > 1.0 else [math.log(1e-12)]
    for o in model.oscillators:
        theta += [math.log(o.omega), math.log(o.strength), math.log(o.damping)]
    return np.array(theta)


def _osc_unpack(theta: np.ndarray) -> OscillatorSet:
    eps_inf = 1.0 + math.exp(theta[0])
    osc = [
        Oscillator(math.exp(a), math.exp(b), math.exp(g))
        for a, b, g in theta[1:].reshape(-1, 3)
    ]
    osc.sort(key=lambda o: o.omega)
    return OscillatorSet(eps_inf, tuple(osc))


def _local_maxima(x: np.ndarray, y: np.ndarray):
    idx = [i for i in range(1, y.size - 1) if y[i] >= y[i - 1] and y[i] > y[i + 1]]
    idx.sort(key=lambda i: y[i], reverse=True)
    return idx


def _auto_init_oscillators(table: SpectrumTable, n: int) -> OscillatorSet:
    """Deterministic starting point: resonances at the n largest absorption
    maxima, strength from the single-oscillator peak relation f = Im(peak)
    gamma/Omega, damping from the full width at half maximum."""
    w, im = table.omega, table.im_eps
    peaks = _local_maxima(w, im)[:n]
    guesses = []
    for i in peaks:
        w0 = w[i]
        half = im[i] / 2.0
        lo = i
        while lo > 0 and im[lo] > half:
            lo -= 1
        hi = i
        while hi < im.size - 1 and im[hi] > half:
            hi += 1
        gamma = max(w[hi] - w[lo], 0.05 * w0)
        f = max(im[i] * gamma / w0, 1e-6)
        guesses.append((w0, f, gamma))
    # top up with log-spaced fillers when the spectrum shows fewer maxima
    while len(guesses) < n:
        have = sorted(g[0] for g in guesses) or [w[0], w[-1]]
        edges = [w[0]] + have + [w[-1]]
        gaps = [(math.log(b / a), math.sqrt(a * b)) for a, b in zip(edges, edges[1:]) if b > a]
        gaps.sort(reverse=True)
        w0 = gaps[0][1]
        i = int(np.searchsorted(w, w0))
        i = min(max(i, 0), im.size - 1)
        guesses.append((w0, max(im[i], 1e-3), 0.3 * w0))
    guesses.sort(key=lambda g: g[0])
    eps_inf = max(float(table.re_eps[-1]), 1.0 + 1e-6) if table.re_eps is not None else 1.0 + 1e-6
    return OscillatorSet(eps_inf, tuple(Oscillator(*g) for g in guesses))


def fit_oscillators(table: SpectrumTable, n: int,
                    init: OscillatorSet | None = None,
                    weight: str = "none") -> FitReport:
    """Simultaneous least-squares fit of an n-oscillator model to Re and Im.

    ``init=None`` uses the deterministic peak-based starting point.  Raises
    :class:`InsufficientData` for fewer than 3n + 1 rows and
    :class:`NonConvergence` when the iteration budget runs out.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if table.re_eps is None:
        raise InsufficientData("oscillator fits need both re_eps and im_eps")
    if len(table) < 3 * n + 1:
        raise InsufficientData(f"need at least {3 * n + 1} rows for {n} oscillators")
    if init is None:
        init = _auto_init_oscillators(table, n)
    elif len(init.oscillators) != n:
        raise DomainError("init oscillator count must equal n")
    build = _residuals(table, weight)

    def residual(theta):
        return build(eval_eps_real(_osc_unpack(theta), table.omega))

    theta, rms, iters, ok = _levenberg(residual, _osc_pack(init))
    if not ok:
        raise NonConvergence(f"no convergence after {iters} accepted steps")
    return FitReport(_osc_unpack(theta), rms, iters, ok)


# ---------------------------------------------------------------------------
# four-parameter single-resonance fit
# ---------------------------------------------------------------------------

def _auto_init_semi_quantum(table: SpectrumTable) -> SemiQuantum4:
    w, im = table.omega, table.im_eps
    peaks = _local_maxima(w, im)
    w_t = w[peaks[0]] if peaks else math.sqrt(w[0] * w[-1])
    eps0 = float(table.re_eps[0]) if table.re_eps is not None else 4.0
    eps0 = max(eps0, 1.5)
    w_l = w_t * math.sqrt(eps0)
    return SemiQuantum4(w_l, w_t, w_t, 0.5 * w_t)


def fit_semi_quantum(table: SpectrumTable,
                     init: SemiQuantum4 | None = None,
                     weight: str = "none") -> FitReport:
    """Least-squares fit of the factorised single-resonance model."""
    if table.re_eps is None:
        raise InsufficientData("the fit needs both re_eps and im_eps")
    if len(table) < 5:
        raise InsufficientData("need at least 5 rows")
    if init is None:
        init = _auto_init_semi_quantum(table)
    build = _residuals(table, weight)

    def unpack(theta):
        wl, wt, gl, gt = (math.exp(v) for v in theta)
        if wl <= wt:   # keep the model valid while the step explores
            wl = wt * (1.0 + 1e-9)
        return SemiQuantum4(wl, wt, gl, gt)

    def residual(theta):
        return build(eval_eps_real(unpack(theta), table.omega))

    theta0 = np.log([init.omega_l, init.omega_t, init.gamma_l, init.gamma_t])
    theta, rms, iters, ok = _levenberg(residual, theta0)
    if not ok:
        raise NonConvergence(f"no convergence after {iters} accepted steps")
    return FitReport(unpack(theta), rms, iters, ok)


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

def read_spectrum_csv(source: str | Path | io.TextIOBase) -> SpectrumTable:
    """Read `omega_rad_s,re_eps,im_eps`; the re_eps column may be absent."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DomainError("empty spectrum file")
    header = [h.strip() for h in rows[0]]
    if header[:1] != ["omega_rad_s"] or "im_eps" not in header:
        raise DomainError("expected header omega_rad_s[,re_eps],im_eps")
    i_im = header.index("im_eps")
    i_re = header.index("re_eps") if "re_eps" in header else None
    omega, re_e, im_e = [], [], []
    for row in rows[1:]:
        if not row:
            continue
        omega.append(float(row[0]))
        im_e.append(float(row[i_im]))
        if i_re is not None:
            re_e.append(float(row[i_re]))
    return SpectrumTable(
        np.array(omega), np.array(im_e),
        np.array(re_e) if i_re is not None else None,
    )


def write_spectrum_csv(table: SpectrumTable, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if table.re_eps is not None:
            writer.writerow(["omega_rad_s", "re_eps", "im_eps"])
            for w, re_v, im_v in zip(table.omega, table.re_eps, table.im_eps):
                writer.writerow([f"{w:.14e}", f"{re_v:.14e}", f"{im_v:.14e}"])
        else:
            writer.writerow(["omega_rad_s", "im_eps"])
            for w, im_v in zip(table.omega, table.im_eps):
                writer.writerow([f"{w:.14e}", f"{im_v:.14e}"])
