"""Interaction kernels on the unit interval.

Kernels are collocated at cell midpoints ``x_i = (i + 1/2)/n``; in
quadratures each entry is weighted by ``h**2``.  The scaled short-range
kernel is restricted to ``[0, 1]**2`` without reflection, so its row mass
dips near the endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erfc

from .errors import ParameterError, ShapeError

FAMILIES = ("box", "gaussian", "exponential", "constant")


@dataclass(frozen=True)
class ShortRangeKernel:
    """Even kernel on the line with total mass ``mass``.

    For the ``constant`` family ``mass`` is the constant value itself (the
    kernel is not integrable on the line).
    """

    family: str = "gaussian"
    scale: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not self.scale > 0 or not self.mass >= 0:
            raise ParameterError("kernel scale must be positive and mass nonnegative")

    @property
    def integrable(self) -> bool:
        return self.family != "constant"

    def __call__(self, z):
        z = np.abs(np.asarray(z, dtype=float))
        s, c = self.scale, self.mass
        if self.family == "box":
            # half height exactly at the edge keeps sampled sums second order
            return np.where(z < s, c / (2 * s), np.where(z == s, c / (4 * s), 0.0))
        if self.family == "gaussian":
            return c / (np.sqrt(2 * np.pi) * s) * np.exp(-0.5 * (z / s) ** 2)
        if self.family == "exponential":
            return c / (2 * s) * np.exp(-z / s)
        return np.full_like(z, c)

    def tail(self, d):
        """Mass beyond distance ``d >= 0`` on one side: the integral of J over (d, inf)."""
        d = np.maximum(np.asarray(d, dtype=float), 0.0)
        s, c = self.scale, self.mass
        if self.family == "box":
            return c / (2 * s) * np.maximum(s - d, 0.0)
        if self.family == "gaussian":
            return 0.5 * c * erfc(d / (np.sqrt(2) * s))
        if self.family == "exponential":
            return 0.5 * c * np.exp(-d / s)
        return np.full_like(d, np.inf)

    def half_moment(self) -> float:
        """Integral of z J(z) over (0, inf); infinite for the constant family."""
        s, c = self.scale, self.mass
        if self.family == "box":
            return c * s / 4
        if self.family == "gaussian":
            return c * s / np.sqrt(2 * np.pi)
        if self.family == "exponential":
            return c * s / 2
        return np.inf


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric kernel sampled at cell midpoints, with row masses j(x_i)."""

    values: np.ndarray
    row_mass: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ShapeError("kernel matrix must be square")
        v.setflags(write=False)
        self.row_mass.setflags(write=False)

    @classmethod
    def from_values(cls, values) -> "KernelMatrix":
        values = np.array(values, dtype=float)
        n = values.shape[0]
        return cls(values, values.sum(axis=1) / n)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def x(self) -> np.ndarray:
        return midpoints(self.n)

    def apply(self, u) -> np.ndarray:
        """Quadrature of the integral operator: ``h * J @ u``."""
        return self.h * (self.values @ u)

    def total_mass(self) -> float:
        return float(self.h * self.row_mass.sum())


def midpoints(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def _check_n(n):
    if int(n) != n or n < 2:
        raise ParameterError(f"grid size must be an integer >= 2, got {n}")
    return int(n)


def build_short(k: ShortRangeKernel, eps: float, n: int) -> KernelMatrix:
    """Matrix of ``J^s((x - y)/eps) / eps``; the constant family ignores ``eps``."""
    n = _check_n(n)
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    x = midpoints(n)
    dz = x[:, None] - x[None, :]
    if k.family == "constant":
        values = k(dz)
    else:
        values = k(dz / eps) / eps
    return KernelMatrix.from_values(values)


def green_closed_form(x, y):
    """Kernel of the inverse Neumann Laplacian on zero-mean functions."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 0.5 * (x**2 + y**2) - np.maximum(x, y) + 1.0 / 3.0


def neumann_green(n: int) -> KernelMatrix:
    """Discrete Neumann Green's function.

    The midpoint samples are double-centred so that the matrix maps
    constants to zero exactly; this changes entries only at O(h^2).
    """
    n = _check_n(n)
    x = midpoints(n)
    g = green_closed_form(x[:, None], x[None, :])
    r = g.mean(axis=1)
    g = g - r[:, None] - r[None, :] + r.mean()
    g = 0.5 * (g + g.T)
    return KernelMatrix(g, np.zeros(n))


def constant_kernel(n: int, value: float = 1.0) -> KernelMatrix:
    n = _check_n(n)
    return KernelMatrix.from_values(np.full((n, n), float(value)))


def build_balanced(short: KernelMatrix, long: KernelMatrix, eps: float) -> KernelMatrix:
    """Well-balanced kernel ``short - eps * long`` (``short`` already scaled)."""
    if short.values.shape != long.values.shape:
        raise ShapeError(f"grid mismatch: {short.n} vs {long.n}")
    if eps == 0:
        return short
    return KernelMatrix.from_values(short.values - eps * long.values)


def first_moment(k: ShortRangeKernel, truncation: float) -> float:
    """Integral of |z| J(z) over [-truncation, truncation].

    For the constant family this grows like ``truncation**2``; check
    ``k.integrable`` before treating it as a line kernel.
    """
    if not truncation > 0:
        raise ParameterError("truncation must be positive")
    pts = [k.scale] if k.family == "box" and k.scale < truncation else None
    val, _ = integrate.quad(lambda z: z * k(z), 0.0, truncation, points=pts,
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 * float(val)
