import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segregate.energy import BVConfig, energy_I
from segregate.errors import NotApplicable, ParameterError, ShapeError
from segregate.gamma import balanced_kernel, mollify
from segregate.kernels import KernelMatrix, ShortRangeKernel, constant_kernel
from segregate.minimize import (MinimizeOptions, criterion_C, criterion_C_profile, detect_jumps,
                                gap_avoidance_check, local_minimize, multi_start, project)
from segregate.wells import WellParams, envelope_of_G, eval_dg, eval_W, flat_interval

N = 128


@pytest.fixture(scope="module")
def J():
    return balanced_kernel(ShortRangeKernel(), 0.1, N)


def _init(n=N, amp=0.5):
    x = (np.arange(n) + 0.5) / n
    return amp * np.cos(np.pi * x)


def test_convex_regime_relaxes_to_constant():
    n, m = 64, 0.2
    Jc = constant_kernel(n, 1.0)
    p = WellParams(0.6)
    u0 = m + 0.3 * np.cos(np.pi * (np.arange(n) + 0.5) / n)
    r = local_minimize(u0, Jc, p)
    assert r.converged
    np.testing.assert_allclose(r.field.values, m, atol=1e-6)
    assert r.energy == pytest.approx(float(eval_W(m, WellParams(0.6, 1.0))), abs=1e-10)


def test_history_monotone_and_mass_fixed(J):
    drift = []
    m = 0.1
    u0 = m + _init()
    r = local_minimize(u0, J, WellParams(0.25), m=m,
                       callback=lambda u, E: drift.append(abs(u.mean() - m)))
    assert r.converged
    # accepted increments are negative; once they drop below roundoff of E the sum stalls
    assert np.all(np.diff(r.history) <= 0)
    assert np.all(np.diff(r.history[:10]) < 0)
    assert max(drift) < 1e-12
    assert r.field.mass == pytest.approx(m, abs=1e-12)
    assert r.pg_norm <= MinimizeOptions().tol
    # reported energy agrees with the independent evaluation
    assert r.energy == pytest.approx(energy_I(r.field, J, WellParams(0.25)), abs=1e-10)


def test_minimizer_lowers_energy(J):
    u0 = _init()
    r = local_minimize(u0, J, WellParams(0.25))
    assert r.energy < energy_I(u0, J, WellParams(0.25))
    assert r.census.count >= 1


def test_unconstrained_mode_moves_mass(J):
    r = local_minimize(np.full(N, 0.2), J, WellParams(0.25), constrain_mass=False)
    assert r.converged
    assert abs(r.field.mass) > 0.5


def test_infeasible_mass_and_shape(J):
    with pytest.raises(ParameterError):
        local_minimize(np.zeros(N), J, WellParams(0.25), m=1.0)
    with pytest.raises(ShapeError):
        local_minimize(np.zeros(N + 1), J, WellParams(0.25))
    with pytest.raises(ParameterError):
        MinimizeOptions(backtrack=1.5)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.floats(-0.9, 0.9))
def test_project_lands_in_box_with_mass(seed, m):
    u = np.random.default_rng(seed).uniform(-3, 3, 50)
    v = project(u, m, -0.99, 0.99)
    assert np.all(np.abs(v) <= 0.99)
    assert v.mean() == pytest.approx(m, abs=1e-12)
    # optimality: v - u is constant on the free cells
    free = np.abs(v) < 0.99
    if free.any():
        assert np.ptp((v - u)[free]) < 1e-12


def test_multi_start(J):
    opts = MinimizeOptions(seed=4)
    best, runs = multi_start(_init(), J, WellParams(0.25), opts=opts, restarts=2)
    assert len(runs) == 3
    assert best.energy == min(r.energy for r in runs)
    again, _ = multi_start(_init(), J, WellParams(0.25), opts=opts, restarts=2)
    np.testing.assert_array_equal(best.field.values, again.field.values)


# --- jump detection --------------------------------------------------------


def test_detect_square_wave():
    n = 200
    x = (np.arange(n) + 0.5) / n
    u = np.where((x > 0.25) & (x < 0.75), 0.9, -0.9)
    c = detect_jumps(u)
    assert c.count == 2
    np.testing.assert_allclose(c.locations, [0.25, 0.75], atol=1 / n)
    np.testing.assert_allclose(c.widths, [1 / n, 1 / n])


def test_detect_constant_field():
    assert detect_jumps(np.full(50, 0.7)).count == 0
    assert detect_jumps(np.zeros(50)).count == 0
    with pytest.raises(ParameterError):
        detect_jumps(np.zeros(5), level=1.0)


def test_detect_mollified_step():
    n, w = 400, 0.05
    u = 0.95 * mollify(BVConfig((0.4,)), n, w)
    c = detect_jumps(u)
    assert c.count == 1
    assert abs(c.locations[0] - 0.4) < 2 / n
    # strong cells start where |u| >= 1/2, i.e. about 0.53 w from the jump
    assert c.widths[0] == pytest.approx(2 * w * 0.5 / 0.95, abs=2 / n)


# --- criterion C and gap avoidance -----------------------------------------


def test_criterion_C_constant_kernel_formula():
    n, kT, c = 64, 0.25, 1.0
    Jc = constant_kernel(n, c)
    ub = flat_interval(envelope_of_G(kT))[1]
    u = np.full(n, ub)
    expected = c / 4 + c / 2 - c - float(eval_dg(ub, kT))
    assert criterion_C(Jc, WellParams(kT), u, 0.3) == pytest.approx(expected, abs=1e-12)
    np.testing.assert_allclose(criterion_C_profile(Jc, WellParams(kT), u), expected, atol=1e-12)


def test_criterion_C_linear_in_kernel(J, rng):
    u = rng.uniform(-0.9, 0.9, N)
    p = WellParams(0.25)
    J2 = KernelMatrix.from_values(2 * J.values)
    integral = float(np.mean(eval_dg(u, 0.25)))
    for x0 in (0.0, 0.37, 0.999):
        c1, c2 = criterion_C(J, p, u, x0), criterion_C(J2, p, u, x0)
        assert c2 - 2 * c1 == pytest.approx(integral, abs=1e-10)


def test_criterion_C_cold_limit():
    n = 32
    Jc = constant_kernel(n, 1.0)
    u = np.full(n, 0.5)
    # g' -> -1 away from +-1 as kT -> 0
    assert criterion_C(Jc, WellParams(1e-3), u, 0.5) == pytest.approx(-0.25 + 1, abs=1e-2)


def test_criterion_C_profile_matches_pointwise(J, rng):
    u = rng.uniform(-0.9, 0.9, N)
    prof = criterion_C_profile(J, WellParams(0.25), u)
    for i in (0, 17, N - 1):
        assert prof[i] == pytest.approx(criterion_C(J, WellParams(0.25), u, (i + 0.5) / N), abs=1e-12)


def test_gap_avoidance_values():
    t = envelope_of_G(0.25)
    ub = t.u_upper
    n = 200
    x = (np.arange(n) + 0.5) / n
    sq = np.where((x > 0.25) & (x < 0.75), ub, -ub)
    assert gap_avoidance_check(sq, t, detect_jumps(sq)) == 0.0
    ramp = 0.3 * (2 * x - 1)
    assert gap_avoidance_check(ramp, t, detect_jumps(ramp)) == 1.0
    with pytest.raises(NotApplicable):
        gap_avoidance_check(sq, envelope_of_G(0.6), detect_jumps(sq))
