"""Logarithmic double well, its kernel-free part, and convex envelopes.

The bulk free-energy density is

    W(u) = -j u^2 / 2 - u^2 / 2 + kT [(1+u) ln(1+u) + (1-u) ln(1-u)]

where ``j`` is the local mass of the interaction kernel.  Dropping the
``j`` term gives ``G``; its convex envelope ``G*`` has a flat-derivative
interval ``[u_lower, u_upper]`` whenever ``kT < 1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize
from scipy.special import xlogy

from .errors import DomainError, NoDoubleWell, ParameterError

DELTA_BOX = 1e-6
N_U = 4001
PLATEAU_RTOL = 1e-10


@dataclass(frozen=True)
class WellParams:
    """Temperature and local kernel mass of the double well.

    ``j`` may be a scalar, a per-position array, or ``None``; ``None`` means
    "use the row mass of whatever kernel the well is paired with".
    """

    kT: float
    j: float | np.ndarray | None = None

    def __post_init__(self):
        if not self.kT >= 0:
            raise ParameterError(f"kT must be nonnegative, got {self.kT}")
        if self.j is not None and not np.all(np.isfinite(self.j)):
            raise ParameterError("j must be finite")

    @property
    def kT_critical(self) -> float:
        """Temperature where W stops being double-welled (scalar j only)."""
        j = 0.0 if self.j is None else float(np.max(self.j))
        return 0.5 * (1.0 + j)


def _check_domain(u, kT):
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    if np.any(a > 1) or (kT > 0 and np.any(a >= 1)) or not np.all(np.isfinite(u)):
        raise DomainError("order parameter must satisfy |u| < 1")
    return u


def entropy(u):
    """(1+u) ln(1+u) + (1-u) ln(1-u), finite up to |u| = 1."""
    u = np.asarray(u, dtype=float)
    return xlogy(1 + u, 1 + u) + xlogy(1 - u, 1 - u)


def eval_G(u, kT):
    u = _check_domain(u, kT)
    return -0.5 * u**2 + kT * entropy(u)


def eval_g(u, kT):
    """Derivative of G: -u + kT ln((1+u)/(1-u))."""
    u = _check_domain(u, kT)
    if kT == 0:
        return -u
    return -u + 2.0 * kT * np.arctanh(u)


def eval_dg(u, kT):
    """Second derivative of G: -1 + 2 kT / (1 - u^2)."""
    u = _check_domain(u, kT)
    return -1.0 + 2.0 * kT / (1.0 - u**2)


def eval_W(u, p: WellParams, j=None):
    """The double well W(u); ``j`` overrides ``p.j`` when given."""
    j = p.j if j is None else j
    if j is None:
        raise ParameterError("W needs a kernel mass j")
    u = _check_domain(u, p.kT)
    return -0.5 * j * u**2 + eval_G(u, p.kT)


def eval_dW(u, p: WellParams, j=None):
    j = p.j if j is None else j
    if j is None:
        raise ParameterError("W needs a kernel mass j")
    return -j * np.asarray(u, dtype=float) + eval_g(u, p.kT)


def well_minimum(kT: float, j: float = 0.0) -> float:
    """Positive minimizer of W for scalar ``j``; 0 when W is single-welled.

    At kT = 0 the minimizer is the box edge u = 1.
    """
    if kT <= 0:
        return 1.0
    if kT >= 0.5 * (1.0 + j):
        return 0.0
    # W'(u)/u = -(1+j) + 2kT artanh(u)/u is increasing on (0, 1)
    c = 1.0 + j
    hi = 1.0 - 1e-16
    if -c * hi + 2 * kT * np.arctanh(hi) <= 0:
        return hi
    return optimize.brentq(lambda u: -c * u + 2 * kT * np.arctanh(u), 1e-300 + 1e-12, hi,
                           xtol=1e-16, rtol=1e-15, maxiter=500)


def well_depth(kT: float, j: float = 0.0) -> float:
    """min_u W(u) for scalar ``j`` (<= 0, since W(0) = 0)."""
    u = well_minimum(kT, j)
    return float(-0.5 * (1.0 + j) * u**2 + kT * entropy(u))


# --- convex envelope -------------------------------------------------------


def lower_hull(x, y) -> np.ndarray:
    """Indices of the lower convex hull of points sorted by x (monotone chain)."""
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull)


@dataclass(frozen=True)
class EnvelopeTable:
    """Sampled function, its convex envelope, and the flat-derivative interval.

    ``u_lower``/``u_upper`` are NaN when the envelope has no plateau.
    """

    u_grid: np.ndarray
    G_values: np.ndarray
    Gstar_values: np.ndarray
    gstar_values: np.ndarray
    u_lower: float
    u_upper: float
    v_star: float
    func: Callable | None = field(default=None, repr=False, compare=False)
    deriv: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("u_grid", "G_values", "Gstar_values", "gstar_values"):
            getattr(self, name).setflags(write=False)

    @property
    def has_plateau(self) -> bool:
        return bool(np.isfinite(self.u_lower))

    def Gstar(self, u):
        """Evaluate G* off the grid (exact when built from a callable)."""
        u = np.asarray(u, dtype=float)
        if self.func is None:
            return np.interp(u, self.u_grid, self.Gstar_values)
        out = np.array(self.func(u), dtype=float)
        if self.has_plateau:
            inside = (u > self.u_lower) & (u < self.u_upper)
            base = float(self.func(np.array(self.u_lower)))
            out = np.where(inside, base + self.v_star * (u - self.u_lower), out)
        return out

    def gstar(self, u):
        u = np.asarray(u, dtype=float)
        if self.deriv is None:
            return np.interp(u, self.u_grid, self.gstar_values)
        out = np.array(self.deriv(u), dtype=float)
        if self.has_plateau:
            inside = (u >= self.u_lower) & (u <= self.u_upper)
            out = np.where(inside, self.v_star, out)
        return out

    def to_rows(self):
        return zip(self.u_grid, self.G_values, self.Gstar_values, self.gstar_values)


def _common_tangent(func, deriv, a0, b0):
    """Refine the bitangent touching points (a, b) from hull seeds."""
    span = b0 - a0

    def eqs(z):
        a, b = z
        ga = deriv(a)
        return [(ga - deriv(b)), (func(b) - func(a) - ga * (b - a)) / span]

    sol = optimize.root(eqs, [a0, b0], method="hybr", options={"xtol": 1e-15})
    a, b = sol.x
    if np.max(np.abs(sol.fun)) > 1e-12 or not (a < b) or abs(a - a0) > 0.5 * span or abs(b - b0) > 0.5 * span:
        return None
    return float(a), float(b)


def convex_envelope(u_grid, f_values, *, func=None, deriv=None) -> EnvelopeTable:
    """Greatest convex minorant of sampled data, with plateau extraction.

    If ``func`` and ``deriv`` are given the plateau endpoints are refined off
    the grid by solving the common-tangent equations, and ``G*``/``g*`` are
    evaluated exactly rather than by interpolation.
    """
    u = np.asarray(u_grid, dtype=float)
    f = np.asarray(f_values, dtype=float)
    if u.ndim != 1 or u.shape != f.shape or len(u) < 3:
        raise ParameterError("need matching 1-D arrays with at least 3 samples")
    if not np.all(np.diff(u) > 0):
        raise ParameterError("grid must be strictly increasing")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(u))):
        raise ParameterError("samples must be finite")

    hull = lower_hull(u, f)
    gstar_grid = np.interp(u, u[hull], f[hull])
    gap = f - gstar_grid
    scale = 1e-12 * (1.0 + np.max(np.abs(f)))

    # the bridging hull segment with the deepest gap is the plateau
    best, best_gap = None, scale
    for a, b in zip(hull[:-1], hull[1:]):
        if b - a > 1:
            depth = gap[a + 1:b].max()
            if depth > best_gap:
                best, best_gap = (a, b), depth

    if best is None:
        Gstar = f.copy()
        gstar = deriv(u) if deriv is not None else np.gradient(f, u)
        return EnvelopeTable(u, f.copy(), Gstar, np.asarray(gstar, dtype=float),
                             np.nan, np.nan, np.nan, func, deriv)

    ia, ib = best
    ua, ub = u[ia], u[ib]
    refined = None
    if func is not None and deriv is not None:
        refined = _common_tangent(func, deriv, ua, ub)
    if refined is not None:
        ua, ub = refined
        v_star = float(deriv(ua))
        fa = float(func(ua))
        Gstar = np.where((u > ua) & (u < ub), fa + v_star * (u - ua), f)
        gstar = np.where((u >= ua) & (u <= ub), v_star, deriv(u))
    else:
        v_star = float((f[ib] - f[ia]) / (u[ib] - u[ia]))
        Gstar = gstar_grid
        gstar = deriv(u) if deriv is not None else np.gradient(Gstar, u)
        gstar = np.where((u >= ua) & (u <= ub), v_star, gstar)
    return EnvelopeTable(u, f.copy(), np.asarray(Gstar, dtype=float),
                         np.asarray(gstar, dtype=float), float(ua), float(ub),
                         v_star, func, deriv)


def envelope_of_G(kT: float, n_u: int = N_U, delta_box: float = DELTA_BOX) -> EnvelopeTable:
    """Envelope table of the kernel-free well G at temperature ``kT``."""
    if kT <= 0:
        raise ParameterError("kT must be positive for the logarithmic well")
    u = np.linspace(-1 + delta_box, 1 - delta_box, n_u)
    return convex_envelope(u, eval_G(u, kT),
                           func=lambda x: eval_G(x, kT), deriv=lambda x: eval_g(x, kT))


def envelope_of_W(p: WellParams, j: float, **kw) -> EnvelopeTable:
    """Envelope of W at one value of the local kernel mass ``j``.

    When ``j`` varies with position the plateau varies too; call this once
    per distinct ``j`` instead of assuming a single table.
    """
    n_u = kw.get("n_u", N_U)
    delta_box = kw.get("delta_box", DELTA_BOX)
    u = np.linspace(-1 + delta_box, 1 - delta_box, n_u)
    return convex_envelope(u, eval_W(u, p, j),
                           func=lambda x: eval_W(x, p, j), deriv=lambda x: eval_dW(x, p, j))


def flat_interval(t: EnvelopeTable):
    """``(u_lower, u_upper, v_star)``, or ``None`` when the envelope equals G."""
    if not t.has_plateau:
        return None
    return t.u_lower, t.u_upper, t.v_star


def _plateau_tol(t: EnvelopeTable) -> float:
    return PLATEAU_RTOL * max(1.0, float(np.max(np.abs(t.gstar_values))))


def _invert(t: EnvelopeTable, v: float, lo: float, hi: float) -> float:
    if t.deriv is not None:
        return optimize.brentq(lambda x: t.deriv(x) - v, lo, hi, xtol=1e-15, rtol=1e-15)
    mask = (t.u_grid >= lo) & (t.u_grid <= hi)
    return float(np.interp(v, t.gstar_values[mask], t.u_grid[mask]))


def _select(t: EnvelopeTable, v: float, upper: bool) -> float:
    gmin, gmax = t.gstar_values[0], t.gstar_values[-1]
    if not gmin <= v <= gmax:
        raise DomainError(f"v={v} outside the range [{gmin}, {gmax}] of g*")
    lo, hi = t.u_grid[0], t.u_grid[-1]
    if not t.has_plateau:
        return _invert(t, v, lo, hi)
    if abs(v - t.v_star) <= _plateau_tol(t):
        return t.u_upper if upper else t.u_lower
    if v < t.v_star:
        return _invert(t, v, lo, t.u_lower)
    return _invert(t, v, t.u_upper, hi)


def s_lower(v: float, t: EnvelopeTable) -> float:
    """Inverse of g*, taking the left plateau end at v = v*."""
    return _select(t, v, upper=False)


def s_upper(v: float, t: EnvelopeTable) -> float:
    """Inverse of g*, taking the right plateau end at v = v*."""
    return _select(t, v, upper=True)


# --- well balancing --------------------------------------------------------


def _local_extrema(d):
    dd = np.diff(d)
    s = np.sign(dd)
    maxima = np.nonzero((s[:-1] > 0) & (s[1:] < 0))[0] + 1
    minima = np.nonzero((s[:-1] < 0) & (s[1:] > 0))[0] + 1
    return maxima, minima


def balance_wells(well, lo: float = -1 + 1e-12, hi: float = 1 - 1e-12, *,
                  deriv=None, n: int = 20001) -> float:
    """Linear coefficient λ making ``u -> f(u) + λ u`` have equal-depth wells.

    ``well`` is a :class:`WellParams` (scalar ``j``) or a callable on
    ``(lo, hi)``.  The function must have a nonconvex stretch (a decreasing
    run of its derivative) so that some tilt produces two minima.
    """
    if isinstance(well, WellParams):
        p = well
        if p.j is None or np.ndim(p.j) != 0:
            raise ParameterError("balance_wells needs a scalar j")
        f = lambda x: eval_W(x, p)  # noqa: E731
        deriv = lambda x: eval_dW(x, p)  # noqa: E731
    else:
        f = well

    x = np.linspace(lo, hi, n)
    fx = np.asarray(f(x), dtype=float)
    d = np.asarray(deriv(x), dtype=float) if deriv is not None else np.gradient(fx, x)
    maxima, minima = _local_extrema(d)
    if len(maxima) == 0 or len(minima) == 0 or minima[0] < maxima[0]:
        raise NoDoubleWell("well function is convex; no tilt gives two minima")
    i1, i2 = maxima[0], minima[minima > maxima[0]][0]
    s1, s2 = x[i1], x[i2]

    def minimum(lam, a, b):
        if deriv is not None:
            da, db = deriv(a) + lam, deriv(b) + lam
            if da < 0 < db:
                xm = optimize.brentq(lambda t: deriv(t) + lam, a, b, xtol=1e-15, rtol=1e-15)
                return f(xm) + lam * xm
        res = optimize.minimize_scalar(lambda t: f(t) + lam * t, bounds=(a, b),
                                       method="bounded", options={"xatol": 1e-14})
        return res.fun

    def depth_difference(lam):
        return float(minimum(lam, lo, s1) - minimum(lam, s2, hi))

    lam_a, lam_b = -d[i1], -d[i2]
    pad = 1e-9 * (lam_b - lam_a)
    lam_a, lam_b = lam_a + pad, lam_b - pad
    fa, fb = depth_difference(lam_a), depth_difference(lam_b)
    if fa == 0:
        return float(lam_a)
    if np.sign(fa) == np.sign(fb):
        raise NoDoubleWell("wells cannot be balanced inside the two-minimum range")
    lam = optimize.brentq(depth_difference, lam_a, lam_b, xtol=1e-15, rtol=1e-15, maxiter=500)
    return float(lam)
