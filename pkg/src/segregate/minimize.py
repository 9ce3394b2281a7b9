"""Mass-constrained local minimization of the nonlocal energy and diagnostics.

The discrete energy is

    E(u) = 1/4 h^2 sum J_ij (u_i - u_j)^2 + h sum W(u_i)

minimized over ``|u_i| <= 1 - delta_box`` with fixed mass ``h sum u_i = m``
by projected gradient descent (Barzilai-Borwein trial step, Armijo
backtracking).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .energy import Field
from .errors import NotApplicable, ParameterError, ShapeError
from .kernels import KernelMatrix
from .wells import DELTA_BOX, EnvelopeTable, WellParams, eval_dg, eval_g, eval_G

log = logging.getLogger(__name__)

INTERFACE_WINDOW = 5


@dataclass(frozen=True)
class MinimizeOptions:
    step: float = 1e-2
    backtrack: float = 0.5
    tol: float = 1e-8
    max_iter: int = 50000
    delta_box: float = DELTA_BOX
    seed: int = 0
    armijo: float = 1e-4

    def __post_init__(self):
        if not (self.step > 0 and self.tol > 0 and 0 < self.backtrack < 1):
            raise ParameterError("step and tol must be positive, backtrack in (0, 1)")
        if not 0 < self.delta_box < 0.1:
            raise ParameterError("delta_box must lie in (0, 0.1)")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ParameterError("max_iter must be a positive integer")


@dataclass(frozen=True)
class JumpCensus:
    count: int
    locations: tuple[float, ...]
    widths: tuple[float, ...]
    # indices of the last strong cell before and first strong cell after each interface
    bounds: tuple[tuple[int, int], ...] = ()

    def to_dict(self) -> dict:
        return {"count": self.count, "locations": list(self.locations), "widths": list(self.widths)}


@dataclass
class MinimizerResult:
    field: Field
    energy: float
    iterations: int
    converged: bool
    census: JumpCensus
    pg_norm: float
    history: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "iterations": self.iterations,
            "converged": self.converged,
            "projected_gradient_norm": self.pg_norm,
            "mass": self.field.mass,
            "census": self.census.to_dict(),
        }


def project(u, m, lo, hi):
    """Euclidean projection onto the box ``[lo, hi]`` intersected with the mass plane.

    The projection is ``clip(u + lam)`` for the scalar ``lam`` that restores
    the mean; the mean is piecewise linear in ``lam`` with kinks at
    ``lo - u`` and ``hi - u``, so ``lam`` is found exactly between two kinks.
    """
    u = np.asarray(u, dtype=float)
    if not lo <= m <= hi:
        raise ParameterError(f"mass {m} is outside the box [{lo}, {hi}]")
    kinks = np.sort(np.concatenate((lo - u, hi - u)))

    def mean_at(lam):
        return float(np.clip(u + lam, lo, hi).mean())

    a, b = 0, len(kinks) - 1
    while b - a > 1:
        c = (a + b) // 2
        if mean_at(kinks[c]) < m:
            a = c
        else:
            b = c
    ka, kb = kinks[a], kinks[b]
    fa, fb = mean_at(ka), mean_at(kb)
    lam = ka if fb == fa else ka + (m - fa) * (kb - ka) / (fb - fa)
    return np.clip(u + lam, lo, hi)


def _entropy_increment(u, d):
    """S(u + d) - S(u) without cancellation, S the mixing entropy."""
    up, um = 1.0 + u, 1.0 - u
    return (up * np.log1p(d / up) + d * np.log(up + d)
            + um * np.log1p(-d / um) - d * np.log(um - d))


class _Energy:
    """Discrete energy, its L2 gradient, and accurate increments."""

    def __init__(self, J: KernelMatrix, p: WellParams):
        self.J = J
        self.h = J.h
        self.kT = p.kT
        j = J.row_mass if p.j is None else np.broadcast_to(np.asarray(p.j, float), (J.n,))
        # quadratic self-term: row mass from the interaction minus j from W
        self.q = J.row_mass - j

    def value(self, u, Ju):
        h = self.h
        return float(h * np.sum(0.5 * self.q * u * u - 0.5 * h * u * Ju + eval_G(u, self.kT)))

    def gradient(self, u, Ju):
        return self.q * u - self.h * Ju + eval_g(u, self.kT)

    def increment(self, u, Ju, d, Jd):
        h = self.h
        quad = 0.5 * self.q * (2 * u * d + d * d) - 0.5 * h * (2 * d * Ju + d * Jd)
        local = -(u * d + 0.5 * d * d) + self.kT * _entropy_increment(u, d)
        return float(h * np.sum(quad + local))


def local_minimize(init, J: KernelMatrix, p: WellParams, m: float | None = None,
                   opts: MinimizeOptions | None = None, *, level: float = 0.5,
                   constrain_mass: bool = True, callback=None) -> MinimizerResult:
    """Local minimizer of the nonlocal energy from ``init`` at fixed mass ``m``.

    ``m`` defaults to the mass of ``init``; ``constrain_mass=False`` drops the
    mass constraint and keeps only the box.  ``callback(u, energy)`` is called
    after every accepted step.  Returns ``converged=False`` when
    the iteration budget runs out or the line search stalls above tolerance.
    """
    opts = opts or MinimizeOptions()
    u = init.values if isinstance(init, Field) else np.asarray(init, dtype=float)
    if len(u) != J.n:
        raise ShapeError(f"field has {len(u)} points, kernel has {J.n}")
    lo, hi = -1.0 + opts.delta_box, 1.0 - opts.delta_box
    m = float(u.mean()) if m is None else float(m)
    if abs(m) >= hi:
        raise ParameterError(f"mass {m} is infeasible inside the box")

    def proj(v):
        if not constrain_mass:
            return np.clip(v, lo, hi)
        return project(v, m, lo, hi)

    def centre(g):
        return g - g.mean() if constrain_mass else g

    energy = _Energy(J, p)
    h = J.h
    u = proj(u)
    Ju = J.values @ u
    E = energy.value(u, Ju)
    grad = centre(energy.gradient(u, Ju))
    history = [E]
    alpha = opts.step
    converged = False
    pg = np.inf
    for it in range(1, opts.max_iter + 1):
        pg = float(np.sqrt(h * np.sum((u - proj(u - grad)) ** 2)))
        if pg <= opts.tol:
            converged = True
            break
        gd = 0.0
        while True:
            trial = proj(u - alpha * grad)
            d = trial - u
            gd = h * float(grad @ d)
            if gd >= 0:
                alpha *= opts.backtrack
            else:
                Jd = J.values @ d
                dE = energy.increment(u, Ju, d, Jd)
                if dE <= opts.armijo * gd:
                    break
                alpha *= opts.backtrack
            if alpha < 1e-20:
                break
        if alpha < 1e-20:
            log.debug("line search stalled at iteration %d, pg=%.3e", it, pg)
            break
        Ju = Ju + Jd
        u = trial
        E += dE
        history.append(E)
        if callback is not None:
            callback(u, E)
        new_grad = centre(energy.gradient(u, Ju))
        y = new_grad - grad
        sy = float(d @ y)
        alpha = float(d @ d) / sy if sy > 0 else 2 * alpha
        alpha = min(max(alpha, 1e-12), 1e6)
        grad = new_grad
    u = proj(u)
    field_ = Field(u)
    return MinimizerResult(field=field_, energy=energy.value(u, J.values @ u),
                           iterations=len(history) - 1,
                           converged=converged, census=detect_jumps(field_, level), pg_norm=pg,
                           history=history)


def multi_start(init, J: KernelMatrix, p: WellParams, m: float | None = None,
                opts: MinimizeOptions | None = None, restarts: int = 0,
                noise: float = 0.05, **kw) -> tuple[MinimizerResult, list[MinimizerResult]]:
    """Deterministic run plus ``restarts`` seeded perturbations; returns (lowest, all runs).

    Only the first, unperturbed run is reproducible without the seed.
    """
    opts = opts or MinimizeOptions()
    u0 = init.values if isinstance(init, Field) else np.asarray(init, dtype=float)
    rng = np.random.default_rng(opts.seed)
    runs = [local_minimize(u0, J, p, m, opts, **kw)]
    for _ in range(restarts):
        runs.append(local_minimize(u0 + noise * rng.standard_normal(len(u0)), J, p,
                                   runs[0].field.mass if m is None else m, opts, **kw))
    best = min(runs, key=lambda r: r.energy)
    return best, runs


def detect_jumps(u, level: float = 0.5) -> JumpCensus:
    """Locate sign changes between cells where |u| >= level.

    The width of an interface is the distance between the centres of the
    strong cells bracketing it, ``h * (weak cells + 1)``.  A crossing at an
    exact zero is assigned to the left cell.
    """
    if not 0 < level < 1:
        raise ParameterError("level must lie in (0, 1)")
    v = u.values if isinstance(u, Field) else np.asarray(u, dtype=float)
    n = len(v)
    h = 1.0 / n
    strong = np.nonzero(np.abs(v) >= level)[0]
    locations, widths, bounds = [], [], []
    for a, b in zip(strong[:-1], strong[1:]):
        if np.sign(v[a]) == np.sign(v[b]):
            continue
        seg = v[a:b + 1]
        # first cell pair in the run that changes sign
        k = int(np.nonzero(np.sign(seg[:-1]) != np.sign(seg[1:]))[0][0])
        if seg[k] == 0:
            x = (a + k + 0.5) * h
        elif seg[k + 1] == 0:
            x = (a + k + 1.5) * h
        else:
            t = seg[k] / (seg[k] - seg[k + 1])
            x = (a + k + 0.5 + t) * h
        locations.append(float(x))
        widths.append(float((b - a) * h))
        bounds.append((int(a), int(b)))
    return JumpCensus(len(locations), tuple(locations), tuple(widths), tuple(bounds))


def criterion_C(J: KernelMatrix, p: WellParams, u, x0: float) -> float:
    """J(x0,x0)/4 + 1/2 int int J - j(x0) - int g'(u).

    Positive values certify that a local minimizer skips the plateau
    ``(u_lower, u_upper)`` near ``x0``.
    """
    v = u.values if isinstance(u, Field) else np.asarray(u, dtype=float)
    if len(v) != J.n:
        raise ShapeError("field and kernel grids differ")
    i = min(int(np.floor(x0 * J.n)), J.n - 1)
    j = J.row_mass if p.j is None else np.broadcast_to(np.asarray(p.j, float), (J.n,))
    h = J.h
    return float(J.values[i, i] / 4 + 0.5 * h * h * J.values.sum() - j[i]
                 - h * np.sum(eval_dg(v, p.kT)))


def criterion_C_profile(J: KernelMatrix, p: WellParams, u) -> np.ndarray:
    """criterion_C at every grid point, sharing the x0-independent terms."""
    v = u.values if isinstance(u, Field) else np.asarray(u, dtype=float)
    if len(v) != J.n:
        raise ShapeError("field and kernel grids differ")
    j = J.row_mass if p.j is None else np.broadcast_to(np.asarray(p.j, float), (J.n,))
    h = J.h
    common = 0.5 * h * h * J.values.sum() - h * np.sum(eval_dg(v, p.kT))
    return np.diagonal(J.values) / 4 + common - j


def gap_avoidance_check(u, t: EnvelopeTable, census: JumpCensus,
                        window: int = INTERFACE_WINDOW) -> float:
    """Fraction of cells away from interfaces whose value lies inside the plateau."""
    if not t.has_plateau:
        raise NotApplicable("envelope has no flat interval")
    v = u.values if isinstance(u, Field) else np.asarray(u, dtype=float)
    keep = np.ones(len(v), dtype=bool)
    for a, b in census.bounds:
        keep[max(a - window + 1, 0):b + window] = False
    if not keep.any():
        return 0.0
    vals = v[keep]
    inside = (vals > t.u_lower) & (vals < t.u_upper)
    return float(inside.mean())
