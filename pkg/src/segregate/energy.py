"""Energy functionals on the unit interval.

All integrals use the midpoint rule on cells ``[i h, (i+1) h]``; double
integrals become ``h**2`` weighted sums over a :class:`KernelMatrix`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, ShapeError
from .kernels import KernelMatrix, green_closed_form, midpoints, neumann_green
from .wells import DELTA_BOX, EnvelopeTable, WellParams, eval_G, eval_W


@dataclass(frozen=True)
class Field:
    """Order parameter sampled at cell midpoints of a uniform grid on [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or len(v) < 1:
            raise ShapeError("field values must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)) or np.any(np.abs(v) >= 1):
            raise DomainError("field values must satisfy |u| < 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def x(self) -> np.ndarray:
        return midpoints(self.n)

    @property
    def mass(self) -> float:
        return float(self.h * self.values.sum())

    @classmethod
    def constant(cls, n: int, m: float) -> "Field":
        return cls(np.full(n, float(m)))


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, Field) else np.asarray(u, dtype=float)


def _match(u, J: KernelMatrix):
    if len(u) != J.n:
        raise ShapeError(f"field has {len(u)} points, kernel has {J.n}")


def _row_mass(p: WellParams, J: KernelMatrix):
    return J.row_mass if p.j is None else p.j


def energy_I(u, J: KernelMatrix, p: WellParams) -> float:
    """Quarter double integral of J (u(x) - u(y))^2 plus the integral of W(u).

    ``W`` takes its local kernel mass from ``p.j``, or from the kernel's row
    mass when ``p.j`` is None.
    """
    u = _values(u)
    _match(u, J)
    h = J.h
    diff2 = (u[:, None] - u[None, :]) ** 2
    interaction = 0.25 * h * h * float(np.sum(J.values * diff2))
    bulk = h * float(np.sum(eval_W(u, p, _row_mass(p, J))))
    return interaction + bulk


def energy_split(u, J: KernelMatrix, kT: float) -> float:
    """-1/2 <J u, u> + integral of G(u); equals :func:`energy_I` when j is the row mass."""
    u = _values(u)
    _match(u, J)
    h = J.h
    return -0.5 * h * h * float(u @ (J.values @ u)) + h * float(np.sum(eval_G(u, kT)))


def energy_I_star(u, J: KernelMatrix, t: EnvelopeTable) -> float:
    """Convexified energy: -1/2 <J u, u> + integral of G*(u)."""
    u = _values(u)
    _match(u, J)
    lo, hi = t.u_grid[0], t.u_grid[-1]
    if np.any(u < lo) or np.any(u > hi):
        raise DomainError("field leaves the range covered by the envelope table")
    h = J.h
    return -0.5 * h * h * float(u @ (J.values @ u)) + h * float(np.sum(t.Gstar(u)))


# --- sharp-interface configurations ----------------------------------------


@dataclass(frozen=True)
class BVConfig:
    """Piecewise-constant +-amplitude function with ordered jump positions."""

    jumps: tuple[float, ...]
    start_sign: int = -1
    amplitude: float = 1.0

    def __post_init__(self):
        jumps = tuple(float(x) for x in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        if self.start_sign not in (-1, 1):
            raise ParameterError("start_sign must be +1 or -1")
        if not self.amplitude > 0:
            raise ParameterError("amplitude must be positive")
        arr = np.array((0.0,) + jumps + (1.0,))
        if np.any(np.diff(arr) <= 0):
            raise ParameterError("jumps must be strictly increasing inside (0, 1)")

    @property
    def k(self) -> int:
        return len(self.jumps)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array((0.0,) + self.jumps + (1.0,))

    @property
    def signs(self) -> np.ndarray:
        """Sign on each of the k+1 segments."""
        return self.start_sign * (-1.0) ** np.arange(self.k + 1)

    @property
    def mass(self) -> float:
        return float(self.amplitude * np.sum(self.signs * np.diff(self.breakpoints)))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.array(self.jumps), x, side="right")
        return self.amplitude * self.signs[idx]

    def cell_averages(self, n: int) -> np.ndarray:
        """Exact averages over the n uniform cells (jumps inside a cell are blended)."""
        edges = np.linspace(0.0, 1.0, n + 1)
        cum = self._antiderivative(edges)
        return np.diff(cum) * n

    def _antiderivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        bp = self.breakpoints
        seg_int = self.amplitude * self.signs * np.diff(bp)
        cum = np.concatenate(([0.0], np.cumsum(seg_int)))
        idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, self.k)
        return cum[idx] + self.amplitude * self.signs[idx] * (x - bp[idx])


def green_energy_exact(c: BVConfig) -> float:
    """1/2 <u~, (-D^2)^{-1} u~> for a BV configuration, exactly.

    Solves -v'' = u - m with v'(0) = v'(1) = 0: v'(x) = m x - U(x), so the
    energy is 1/2 of the integral of (U - m x)^2, piecewise quadratic.
    """
    bp = c.breakpoints
    m = c.mass
    phi = c._antiderivative(bp) - m * bp
    a, b = phi[:-1], phi[1:]
    return float(0.5 * np.sum(np.diff(bp) / 3.0 * (a * a + a * b + b * b)))


def _rect_green(a, b, c, d):
    """Integral of the closed-form Green kernel over [a,b] x [c,d]."""
    def F(x, y):
        return np.abs(x - y) ** 3 / 6.0

    abs_int = -(F(b, d) - F(a, d) - F(b, c) + F(a, c))
    lx, ly = b - a, d - c
    sx = 0.5 * (b * b - a * a)
    sy = 0.5 * (d * d - c * c)
    max_int = 0.5 * (sx * ly + sy * lx + abs_int)
    quad = 0.5 * ((b**3 - a**3) / 3.0 * ly + (d**3 - c**3) / 3.0 * lx)
    return quad - max_int + lx * ly / 3.0


def green_energy_kernel(c: BVConfig) -> float:
    """Same quantity as :func:`green_energy_exact`, via rectangle integrals of the kernel."""
    bp = c.breakpoints
    vals = c.amplitude * c.signs
    a, b = bp[:-1], bp[1:]
    rect = _rect_green(a[:, None], b[:, None], a[None, :], b[None, :])
    return float(0.5 * vals @ rect @ vals)


def long_range_term(c: BVConfig, Jl: KernelMatrix | None = None) -> float:
    """-1/4 double integral of Jl (u(x) - u(y))^2 over the configuration.

    ``Jl=None`` selects the Neumann Green's function evaluated exactly.
    """
    if Jl is None:
        return green_energy_exact(c)
    u = c.cell_averages(Jl.n)
    h = Jl.h
    diff2 = (u[:, None] - u[None, :]) ** 2
    return -0.25 * h * h * float(np.sum(Jl.values * diff2))


def energy_I0(c: BVConfig, c0: float, Jl: KernelMatrix | None = None) -> float:
    """Sharp-interface energy: ``c0`` per jump plus the long-range term."""
    return c0 * c.k + long_range_term(c, Jl)


# --- elastic functional ----------------------------------------------------


def _second_difference(w_full, h):
    d2 = np.empty_like(w_full)
    d2[1:-1] = (w_full[2:] - 2 * w_full[1:-1] + w_full[:-2]) / h**2
    d2[0] = (2 * w_full[0] - 5 * w_full[1] + 4 * w_full[2] - w_full[3]) / h**2
    d2[-1] = (2 * w_full[-1] - 5 * w_full[-2] + 4 * w_full[-3] - w_full[-4]) / h**2
    return d2


def _trapezoid(f, h):
    return h * (f.sum() - 0.5 * (f[0] + f[-1]))


def _with_ends(w_interior):
    w = np.asarray(w_interior, dtype=float)
    if w.ndim != 1 or len(w) < 3:
        raise ShapeError("need at least 3 interior nodes")
    return np.concatenate(([0.0], w, [0.0]))


def elastic_energy(w_interior, eps: float, p: WellParams) -> float:
    """Integral of eps^2 w''^2 / 2 + W(w') + w^2 with w(0) = w(1) = 0.

    ``w_interior`` holds w at the nodes ``k/n``, k = 1..n-1.
    """
    w = _with_ends(w_interior)
    n = len(w) - 1
    h = 1.0 / n
    slope = np.diff(w) / h
    if np.any(np.abs(slope) >= 1):
        raise DomainError("|w'| must stay below 1")
    bend = 0.5 * eps**2 * _trapezoid(_second_difference(w, h) ** 2, h)
    bulk = h * float(np.sum(eval_W(slope, p)))
    # midpoint rule on the linear interpolant of w
    foundation = h * float(np.sum((0.5 * (w[1:] + w[:-1])) ** 2))
    return float(bend + bulk + foundation)


def elastic_to_nonlocal(w_interior, eps: float, p: WellParams, m: float = 0.0,
                        green: KernelMatrix | None = None):
    """Map w to u = m - w' and evaluate the nonlocal form of the same energy.

    Returns ``(u, energy)`` with energy = integral of eps^2 u'^2 / 2 + W(m - u)
    plus the double integral of G(x, y) u(x) u(y).
    """
    w = _with_ends(w_interior)
    n = len(w) - 1
    h = 1.0 / n
    slope = np.diff(w) / h
    if np.any(np.abs(slope) >= 1):
        raise DomainError("|w'| must stay below 1")
    u = m - slope
    du = np.empty(n + 1)
    du[1:-1] = np.diff(u) / h
    du[0] = (-2 * u[0] + 3 * u[1] - u[2]) / h
    du[-1] = (2 * u[-1] - 3 * u[-2] + u[-3]) / h
    if green is None:
        green = neumann_green(n)
    elif green.n != n:
        raise ShapeError("Green matrix does not match the field grid")
    grad = 0.5 * eps**2 * _trapezoid(du**2, h)
    bulk = h * float(np.sum(eval_W(m - u, p)))
    nonlocal_ = h * h * float(u @ (green.values @ u))
    field = Field(u) if np.all(np.abs(u) < 1) else u
    return field, float(grad + bulk + nonlocal_)


def random_deflection(rng: np.random.Generator, modes: int = 4, max_slope: float = 0.5):
    """Smooth random w with w(0) = w(1) = 0 and max |w'| = max_slope, as a callable.

    Built from sine modes with 1/k^2 decay so the same function can be
    sampled on any grid.
    """
    coef = rng.standard_normal(modes) / np.arange(1, modes + 1) ** 2
    k = np.pi * np.arange(1, modes + 1)
    xs = np.linspace(0.0, 1.0, 4001)
    peak = np.abs(np.cos(np.outer(xs, k)) @ (coef * k)).max()
    coef = coef * (max_slope / peak)

    def w(x):
        return np.sin(np.outer(np.asarray(x, dtype=float), k)) @ coef

    return w


def elastic_gap(w, eps: float, p: WellParams, n: int, m: float = 0.0) -> dict:
    """Both energies of the callable deflection ``w`` on an n-cell grid and their relative gap."""
    nodes = np.arange(1, n) / n
    wi = w(nodes)
    e_el = elastic_energy(wi, eps, p)
    _, e_nl = elastic_to_nonlocal(wi, eps, p, m=m)
    return {"n": n, "elastic": e_el, "nonlocal": e_nl, "relative_gap": abs(e_el - e_nl) / abs(e_el)}


__all__ = [
    "Field", "BVConfig", "energy_I", "energy_split", "energy_I_star", "energy_I0",
    "long_range_term", "green_energy_exact", "green_energy_kernel", "green_closed_form",
    "elastic_energy", "elastic_to_nonlocal", "elastic_gap", "random_deflection", "DELTA_BOX",
]
