"""Power-law fit of the interface cost near the critical temperature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .kernels import ShortRangeKernel
from .profile import ProfileProblem, compute_c0
from .wells import WellParams

R2_GATE = 0.99
FRACTION_RANGE = (0.85, 0.995)


@dataclass(frozen=True)
class ExponentFit:
    mu: float
    intercept: float
    r2: float
    kT: tuple[float, ...]
    c0: tuple[float, ...]
    kT_critical: float
    family: str

    @property
    def flagged(self) -> bool:
        return not self.r2 >= R2_GATE

    def to_dict(self) -> dict:
        return {"family": self.family, "mu": self.mu, "intercept": self.intercept, "r2": self.r2,
                "flagged": self.flagged, "kT_critical": self.kT_critical,
                "kT": list(self.kT), "c0": list(self.c0)}


def fit_power_law(distance, values) -> tuple[float, float, float]:
    """Least-squares line through (log distance, log values): (slope, intercept, R^2)."""
    x = np.log(np.asarray(distance, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if len(x) < 3:
        raise ParameterError("need at least 3 points for a fit")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, icpt])
    r2 = 1.0 - float(resid @ resid) / float(np.sum((y - y.mean()) ** 2))
    return float(slope), float(icpt), r2


def exponent_fit(kernel: ShortRangeKernel, fractions, *, j: float = 0.0,
                 convention: str = "quarter", half_width: float | None = None) -> ExponentFit:
    """Fit c0(kT) ~ (kT_c - kT)^mu over kT = fraction * kT_c."""
    fr = np.asarray(fractions, dtype=float)
    lo, hi = FRACTION_RANGE
    if np.any(fr < lo) or np.any(fr > hi):
        raise ParameterError(f"kT fractions must lie in [{lo}, {hi}] of the critical value")
    if np.any(np.diff(fr) <= 0):
        raise ParameterError("kT fractions must be strictly increasing")
    kTc = WellParams(0.0, j).kT_critical
    kTs, vals = [], []
    for f in fr:
        kT = float(f * kTc)
        pp = ProfileProblem(kernel, WellParams(kT, j), half_width=half_width, convention=convention)
        try:
            r = compute_c0(pp)
        except Exception as exc:
            raise type(exc)(f"c0 solve failed at kT={kT}: {exc}") from exc
        if not r.converged:
            raise ParameterError(f"c0 solve did not converge at kT={kT}: {r.message}")
        kTs.append(kT)
        vals.append(r.c0)
    mu, icpt, r2 = fit_power_law(kTc - np.array(kTs), vals)
    return ExponentFit(mu, icpt, r2, tuple(kTs), tuple(vals), kTc, kernel.family)
