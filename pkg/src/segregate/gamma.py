"""Sharp-interface limit: optimal jump patterns and continuation to finite eps.

The limit energy of a +-A step pattern with jumps x_1 < ... < x_k is

    c0 * k + 1/2 * integral over [0, 1] of (U(x) - U(1) x)^2,

U the antiderivative of the pattern.  Its gradient in x_i is closed-form, so
the finite-dimensional problem is handed to SLSQP with the mass as an
equality constraint.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .energy import BVConfig, energy_I, energy_I0
from .errors import ParameterError
from .kernels import KernelMatrix, ShortRangeKernel, build_balanced, build_short, neumann_green
from .minimize import MinimizeOptions, MinimizerResult, local_minimize
from .wells import WellParams, well_minimum

OK = "ok"
FAILED = "ContinuationFailed"


def _phi_integrals(c: BVConfig):
    """Breakpoint values of phi = U - U(1) x, and the integrals needed by the gradient."""
    bp = c.breakpoints
    phi = c._antiderivative(bp) - c.mass * bp
    dx = np.diff(bp)
    a, b = phi[:-1], phi[1:]
    seg = 0.5 * dx * (a + b)                      # phi is linear on each segment
    tail = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))   # integral from bp[i] to 1
    xa, xb = bp[:-1], bp[1:]
    # x * phi is quadratic per segment: Simpson is exact
    xm, pm = 0.5 * (xa + xb), 0.5 * (a + b)
    first = float(np.sum(dx / 6.0 * (xa * a + 4 * xm * pm + xb * b)))
    return tail, first


def _limit_value_grad(x, k, start_sign, amplitude, c0):
    c = BVConfig(tuple(x), start_sign, amplitude)
    e = energy_I0(c, c0)
    tail, first = _phi_integrals(c)
    s_left = c.signs[:-1]
    # moving x_i right swaps the value s_i for s_{i-1} on [x_i, x_i + dx]
    g = 2.0 * amplitude * s_left * (tail[1:-1] - first)
    return e, g


def _check_mass(k: int, m: float, amplitude: float):
    if k < 0 or int(k) != k:
        raise ParameterError("jump count must be a nonnegative integer")
    if k == 0 and not np.isclose(abs(m), amplitude):
        raise ParameterError(f"no jumps forces mass +-{amplitude}, got {m}")
    if k > 0 and abs(m) >= amplitude:
        raise ParameterError(f"mass {m} is unreachable with {k} jumps of amplitude {amplitude}")


def optimize_jump_positions(k: int, c0: float, Jl: KernelMatrix | None = None, m: float = 0.0,
                            *, amplitude: float = 1.0, starts: int = 8, seed: int = 0):
    """Best k-jump pattern of mass m for the limit energy; returns (BVConfig, energy).

    ``Jl=None`` uses the exact Neumann Green's function (analytic gradient);
    a sampled ``Jl`` is only supported as an evaluation check afterwards.
    """
    _check_mass(k, m, amplitude)
    if k == 0:
        c = BVConfig((), 1 if m > 0 else -1, amplitude)
        return c, energy_I0(c, c0, Jl)
    rng = np.random.default_rng(seed)
    best = None
    gap = 1e-9
    cons_A = np.zeros((k - 1, k))
    for i in range(k - 1):
        cons_A[i, i], cons_A[i, i + 1] = -1.0, 1.0
    for start_sign in (-1, 1):
        for trial in range(starts):
            x0 = np.sort(rng.uniform(0.02, 0.98, k)) if trial else (np.arange(k) + 0.5) / k
            x0 = x0 + 1e-3 * rng.standard_normal(k) * (trial == 0)

            def mass_res(x, s=start_sign):
                return np.array([_mass_raw(x, s, amplitude) - m])

            def mass_jac(x, s=start_sign):
                return (2.0 * amplitude * s * (-1.0) ** np.arange(k))[None, :]

            cons = [{"type": "eq", "fun": mass_res, "jac": mass_jac}]
            if k > 1:
                cons.append({"type": "ineq", "fun": lambda x: cons_A @ x - gap, "jac": lambda x: cons_A})
            with warnings.catch_warnings():
                # SLSQP clips its own trial points to the bounds and says so
                warnings.simplefilter("ignore", RuntimeWarning)
                res = optimize.minimize(
                    lambda x, s=start_sign: _limit_value_grad(_safe(x), k, s, amplitude, c0),
                    x0, jac=True, method="SLSQP", bounds=[(gap, 1 - gap)] * k, constraints=cons,
                    options={"ftol": 1e-15, "maxiter": 1000})
            x = _safe(res.x)
            if abs(_mass_raw(x, start_sign, amplitude) - m) > 1e-9:
                continue
            e = _limit_value_grad(x, k, start_sign, amplitude, c0)[0]
            if best is None or e < best[0] - 1e-14:
                best = (e, BVConfig(tuple(x), start_sign, amplitude))
    if best is None:
        raise ParameterError(f"no feasible {k}-jump pattern found for mass {m}")
    c = best[1]
    return c, energy_I0(c, c0, Jl)


def _safe(x):
    """Strictly increasing copy of x inside (0, 1), for evaluation during the search."""
    x = np.clip(np.sort(np.asarray(x, dtype=float)), 1e-12, 1 - 1e-12)
    for i in range(1, len(x)):
        x[i] = max(x[i], x[i - 1] + 1e-13)
    return x


def _mass_raw(x, start_sign, amplitude):
    bp = np.concatenate(([0.0], x, [1.0]))
    signs = start_sign * (-1.0) ** np.arange(len(x) + 1)
    return float(amplitude * np.sum(signs * np.diff(bp)))


def gaps(c: BVConfig) -> np.ndarray:
    return np.diff(c.breakpoints)


def periodic_gaps(c: BVConfig) -> np.ndarray:
    """Interior gaps together with twice each end gap.

    Under the Neumann condition the pattern reflects at both ends, so an end
    segment is half a period; for the periodic optimum all entries agree.
    """
    g = gaps(c)
    return np.concatenate(([2 * g[0]], g[1:-1], [2 * g[-1]]))


# --- continuation to finite eps ---------------------------------------------


def mollify(c: BVConfig, n: int, width: float) -> np.ndarray:
    """Cell values of c with each jump replaced by a linear ramp of half-width ``width``."""
    x = (np.arange(n) + 0.5) / n
    u = c(x).astype(float)
    for xi, s in zip(c.jumps, c.signs[1:]):
        near = np.abs(x - xi) < width
        u[near] = c.amplitude * s * (x[near] - xi) / width
    return u


@dataclass
class ContinuationResult:
    eps: float
    result: MinimizerResult
    l2_distance: float
    rescaled_energy: float
    reference_energy: float
    limit_energy: dict
    energy_gap: dict
    status: str
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"eps": self.eps, "status": self.status, "l2_distance": self.l2_distance,
                "rescaled_energy": self.rescaled_energy, "reference_energy": self.reference_energy,
                "limit_energy": self.limit_energy, "energy_gap": self.energy_gap,
                "minimizer": self.result.to_dict(), "notes": list(self.notes)}


def balanced_kernel(short: ShortRangeKernel, eps: float, n: int) -> KernelMatrix:
    return build_balanced(build_short(short, eps, n), neumann_green(n), eps)


def continuation(c: BVConfig, eps: float, short: ShortRangeKernel, kT: float, c0: dict,
                 *, n: int = 2048, opts: MinimizeOptions | None = None,
                 trust_radius: float | None = None) -> ContinuationResult:
    """Relax a sharp pattern at finite eps and compare with the limit energy.

    ``c0`` maps convention name to interface cost.  The rescaled energy is
    measured from a one-phase state (the relaxed uniform well value, mass
    free), which removes the bulk energy and the wall layers common to both.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    J = balanced_kernel(short, eps, n)
    p = WellParams(kT)
    opts = opts or MinimizeOptions()
    u_sharp = c.cell_averages(n)
    init = mollify(c, n, eps)
    e_init = energy_I(np.clip(init, -1 + opts.delta_box, 1 - opts.delta_box), J, p)
    res = local_minimize(init, J, p, m=c.mass, opts=opts)
    ref = local_minimize(np.full(n, c.amplitude), J, p, opts=opts, constrain_mass=False)
    h = 1.0 / n
    dist = float(np.sqrt(h * np.sum((res.field.values - u_sharp) ** 2)))
    rescaled = (res.energy - ref.energy) / eps
    limit = {name: float(energy_I0(c, val)) for name, val in c0.items()}
    gap = {name: abs(rescaled - val) for name, val in limit.items()}
    trust = c.amplitude if trust_radius is None else trust_radius
    failures = []
    if res.energy > e_init + 1e-12 * max(1.0, abs(e_init)):
        failures.append("energy increased during relaxation")
    if dist > trust:
        failures.append(f"left the trust ball: distance {dist:.3g} > {trust:.3g}")
    notes = failures + ([] if res.converged and ref.converged else ["minimizer did not reach tolerance"])
    status = FAILED if failures else OK
    return ContinuationResult(eps, res, dist, float(rescaled), float(ref.energy), limit, gap, status, notes)


def select_convention(runs: list[ContinuationResult]) -> tuple[str, dict]:
    """Pick the prefactor convention whose energy gap shrinks along decreasing eps.

    Among conventions with strictly decreasing gaps the one with the smallest
    final gap wins; if none decreases, the smallest final gap wins and the
    choice is flagged.
    """
    runs = sorted(runs, key=lambda r: -r.eps)
    names = list(runs[0].energy_gap)
    summary = {}
    for name in names:
        g = [r.energy_gap[name] for r in runs]
        summary[name] = {"gaps": g, "strictly_decreasing": bool(np.all(np.diff(g) < 0)),
                         "final_gap": g[-1]}
    good = [nm for nm in names if summary[nm]["strictly_decreasing"]]
    pool = good or names
    choice = min(pool, key=lambda nm: summary[nm]["final_gap"])
    summary["selected"] = choice
    summary["flagged"] = not good
    return choice, summary


def well_amplitude(short: ShortRangeKernel, kT: float) -> float:
    """Well value u* of W with the line mass of the short kernel."""
    return well_minimum(kT, short.mass)


__all__ = ["optimize_jump_positions", "continuation", "select_convention", "mollify",
           "periodic_gaps", "gaps", "well_amplitude", "balanced_kernel", "ContinuationResult"]
