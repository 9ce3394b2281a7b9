"""Van der Waals equation of state and Maxwell coexistence.

Coexistence is found as the convex envelope of the molar free energy
Psi(V) = -RT ln(V - b) - a/V: a bridging segment of the envelope is a
common tangent whose slope is minus the coexistence pressure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, NoCoexistence, ParameterError
from .wells import lower_hull


@dataclass(frozen=True)
class EosParams:
    a: float
    b: float
    R: float = 1.0

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or not self.R > 0:
            raise ParameterError("need a >= 0, b >= 0, R > 0")


REDUCED = EosParams(a=3.0, b=1.0 / 3.0, R=8.0 / 3.0)


@dataclass(frozen=True)
class CoexistenceResult:
    V1: float
    V2: float
    Pstar: float
    T: float


def _check_T(T):
    if not np.all(np.asarray(T) > 0):
        raise DomainError("temperature must be positive")


def ideal_pressure(V, T, p: EosParams):
    V = np.asarray(V, dtype=float)
    _check_T(T)
    if np.any(V <= 0):
        raise DomainError("volume must be positive")
    return p.R * T / V


def _check_V(V, p):
    V = np.asarray(V, dtype=float)
    if np.any(V <= p.b) or np.any(V <= 0):
        raise DomainError(f"volume must exceed the covolume b={p.b}")
    return V


def vdw_pressure(V, T, p: EosParams):
    V = _check_V(V, p)
    _check_T(T)
    return p.R * T / (V - p.b) - p.a / V**2


def vdw_free_energy(V, T, p: EosParams):
    """Molar Helmholtz free energy whose negative V-derivative is the pressure."""
    V = _check_V(V, p)
    return -p.R * T * np.log(V - p.b) - p.a / V


def critical_point(p: EosParams, *, closed_form: bool = True) -> tuple[float, float, float]:
    """(Vc, Tc, Pc) where dP/dV = d2P/dV2 = 0.

    ``closed_form=False`` solves the two stationarity conditions numerically
    instead (used to cross-check the closed form).
    """
    if p.a <= 0 or p.b <= 0:
        raise NoCoexistence("no critical point without attraction and covolume")
    if closed_form:
        return 3 * p.b, 8 * p.a / (27 * p.R * p.b), p.a / (27 * p.b**2)

    def eqs(z):
        V, T = z
        d1 = -p.R * T / (V - p.b) ** 2 + 2 * p.a / V**3
        d2 = 2 * p.R * T / (V - p.b) ** 3 - 6 * p.a / V**4
        return [d1 * V**3 / p.a, d2 * V**4 / p.a]

    guess = [4 * p.b, p.a / (4 * p.R * p.b)]
    sol = optimize.root(eqs, guess, method="hybr", options={"xtol": 1e-14})
    if not sol.success:
        raise NoCoexistence("critical point search failed")
    Vc, Tc = sol.x
    return float(Vc), float(Tc), float(vdw_pressure(Vc, Tc, p))


def equal_area_residual(res: CoexistenceResult, p: EosParams) -> float:
    """Integral of P(V) - P* over [V1, V2] by adaptive quadrature."""
    val, _ = integrate.quad(lambda V: vdw_pressure(V, res.T, p) - res.Pstar, res.V1, res.V2,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def _grid_tangent(T, p, v_max, n):
    V = p.b + np.geomspace(p.b * 1e-6, v_max - p.b, n)
    psi = vdw_free_energy(V, T, p)
    hull = lower_hull(V, psi)
    jumps = np.diff(hull)
    k = int(np.argmax(jumps))
    if jumps[k] <= 1:
        return None
    return V[hull[k]], V[hull[k + 1]], hull[k + 1] == n - 1


def maxwell_construction(T: float, p: EosParams, *, v_max_factor: float = 50.0,
                         n: int = 20001) -> CoexistenceResult:
    """Coexisting molar volumes V1 < V2 and pressure P* at temperature T."""
    _check_T(T)
    Vc, Tc, _ = critical_point(p)
    if T >= Tc:
        raise NoCoexistence(f"T={T} is at or above Tc={Tc}")

    v_max = v_max_factor * p.b
    seed = _grid_tangent(T, p, v_max, n)
    # the gas branch runs off the grid at low T: widen until the tangent closes
    while seed is not None and seed[2] and v_max < 1e12 * p.b:
        v_max *= 10
        seed = _grid_tangent(T, p, v_max, n)
    if seed is None:
        # the double tangent is narrower than the grid spacing: seed from the
        # spinodal points instead
        seed = _spinodal_seed(T, p)
    V1g, V2g = seed[0], seed[1]

    def psi(V):
        return vdw_free_energy(V, T, p)

    def P(V):
        return vdw_pressure(V, T, p)

    span = V2g - V1g
    scale = p.R * T

    def eqs(z):
        V1, V2 = z
        if V1 <= p.b or V2 <= p.b:
            return [1e3, 1e3]
        return [(P(V1) - P(V2)) * span / scale,
                (psi(V1) - psi(V2) - P(V1) * (V2 - V1)) / scale]

    sol = optimize.root(eqs, [V1g, V2g], method="hybr", options={"xtol": 1e-15})
    V1, V2 = sorted(map(float, sol.x))
    if np.max(np.abs(sol.fun)) > 1e-10 or not V2 - V1 > 0.25 * span:
        raise NoCoexistence(f"common tangent refinement failed at T={T}")
    Pstar = float(0.5 * (P(V1) + P(V2)))
    return CoexistenceResult(V1=V1, V2=V2, Pstar=Pstar, T=float(T))


def _spinodal_seed(T, p):
    # roots of dP/dV = 0: RT V^3 = 2a (V-b)^2
    coeffs = [p.R * T, -2 * p.a, 4 * p.a * p.b, -2 * p.a * p.b**2]
    r = np.roots(coeffs)
    r = np.sort(r[np.isreal(r)].real)
    r = r[r > p.b]
    if len(r) < 2:
        raise NoCoexistence("isotherm has no wiggle")
    s1, s2 = r[0], r[-1]
    mid = 0.5 * (s1 + s2)
    half = 0.5 * (s2 - s1) * np.sqrt(3.0)
    return mid - half, mid + half, False


def isotherm(T: float, p: EosParams, V) -> np.ndarray:
    return vdw_pressure(V, T, p)


def density_well(T: float, p: EosParams):
    """Free-energy density in rho = 1/V and its derivative.

    f(rho) = -RT rho ln(1/rho - b) - a rho^2 on (0, 1/b).
    """

    def f(rho):
        rho = np.asarray(rho, dtype=float)
        return -p.R * T * rho * np.log(1.0 / rho - p.b) - p.a * rho**2

    def df(rho):
        rho = np.asarray(rho, dtype=float)
        return -p.R * T * np.log(1.0 / rho - p.b) + p.R * T / (1.0 - p.b * rho) - 2 * p.a * rho

    return f, df
