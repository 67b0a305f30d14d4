"""Murnaghan equation of state: closed-form energy curve and least-squares fit."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from ..constants import EV_PER_A3_TO_GPA
from ..errors import DomainError, FitError, ValidationError

MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class EOSFit:
    E0: float  # eV
    V0: float  # A^3
    B0: float  # GPa
    B0p: float  # dimensionless
    residual: float = 0.0  # eV RMS

    def __post_init__(self):
        if self.V0 <= 0:
            raise ValidationError(f"V0 must be positive, got {self.V0}")
        if self.B0 <= 0:
            raise ValidationError(f"B0 must be positive, got {self.B0}")
        if self.B0p <= 1:
            raise ValidationError(f"B0p must exceed 1, got {self.B0p}")


def _energy(V, E0, V0, B0_ev, B0p):
    return E0 + B0_ev * V / B0p * ((V0 / V) ** B0p / (B0p - 1.0) + 1.0) \
        - B0_ev * V0 / (B0p - 1.0)


def murnaghan_energy(V, fit: EOSFit):
    """E(V) in eV for volumes in A^3; E(V0) = E0 and dE/dV(V0) = 0."""
    v = np.asarray(V, dtype=np.float64)
    if np.any(v <= 0):
        raise DomainError("volume must be positive")
    out = _energy(v, fit.E0, fit.V0, fit.B0 / EV_PER_A3_TO_GPA, fit.B0p)
    return float(out) if np.isscalar(V) else out


def _parabolic_seed(volumes, energies):
    c2, c1, c0 = np.polyfit(volumes, energies, 2)
    if c2 <= 0:  # no curvature minimum; start from the sampled midpoint
        v0 = float(np.mean(volumes))
        e0 = float(np.min(energies))
        b0_ev = 0.5
    else:
        v0 = -c1 / (2.0 * c2)
        e0 = c0 - c1 * c1 / (4.0 * c2)
        b0_ev = 2.0 * c2 * v0  # B = V * d2E/dV2 at the vertex
        if not np.isfinite(b0_ev) or b0_ev <= 0:
            b0_ev = 0.5
        if not (min(volumes) / 2 < v0 < max(volumes) * 2):
            v0 = float(np.mean(volumes))
    return e0, v0, b0_ev, 4.0


def fit_murnaghan(points) -> EOSFit:
    """Least-squares Murnaghan fit of (V in A^3, E in eV) samples.

    Levenberg-Marquardt seeded by a parabolic pre-fit; B0 is reported in GPa.
    """
    pts = sorted((float(v), float(e)) for v, e in points)
    volumes = np.array([p[0] for p in pts])
    energies = np.array([p[1] for p in pts])
    if len(pts) < MIN_FIT_POINTS:
        raise FitError(f"need at least {MIN_FIT_POINTS} points, got {len(pts)}")
    if len(np.unique(volumes)) != len(volumes):
        raise FitError("volumes must be distinct")
    if np.any(volumes <= 0):
        raise FitError("volumes must be positive")

    seed = _parabolic_seed(volumes, energies)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            params, _ = curve_fit(_energy, volumes, energies, p0=seed,
                                  method="lm", maxfev=10000)
    except (RuntimeError, TypeError) as exc:
        raise FitError(f"optimizer failed: {exc}") from exc
    e0, v0, b0_ev, b0p = (float(x) for x in params)
    if not np.all(np.isfinite(params)):
        raise FitError("optimizer produced non-finite parameters")
    if b0_ev <= 0:
        raise FitError(f"non-physical bulk modulus {b0_ev * EV_PER_A3_TO_GPA:.3g} GPa")
    if v0 <= 0:
        raise FitError(f"non-physical equilibrium volume {v0:.3g} A^3")
    if b0p <= 1:
        raise FitError(f"non-physical pressure derivative {b0p:.3g}")
    resid = energies - _energy(volumes, e0, v0, b0_ev, b0p)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return EOSFit(E0=e0, V0=v0, B0=b0_ev * EV_PER_A3_TO_GPA, B0p=b0p, residual=rms)
