import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bisect, widest_bridge
from segregate.errors import DomainError, NoDoubleWell, ParameterError
from segregate.thermo import REDUCED, density_well
from segregate.wells import (WellParams, balance_wells, convex_envelope, envelope_of_G,
                             envelope_of_W, eval_dg, eval_dW, eval_g, eval_G, eval_W,
                             flat_interval, s_lower, s_upper, well_depth, well_minimum)

KT_SWEEP = [0.1, 0.2, 0.25, 0.3, 0.4, 0.45, 0.49, 0.5, 0.55, 0.6]


@pytest.fixture(scope="module")
def tables():
    return {kT: envelope_of_G(kT) for kT in KT_SWEEP}


def test_W_zero_at_origin():
    assert eval_W(0.0, WellParams(0.3, 0.7)) == 0.0


@settings(max_examples=60, deadline=None)
@given(u=st.floats(-0.999, 0.999), kT=st.floats(0.01, 2), j=st.floats(-2, 2))
def test_W_even(u, kT, j):
    p = WellParams(kT, j)
    assert eval_W(u, p) == pytest.approx(eval_W(-u, p), abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(u=st.floats(-0.999, 0.999), kT=st.floats(0.01, 2), j=st.floats(-2, 2))
def test_energy_split_identity(u, kT, j):
    # 1/2 j u^2 + W(u) = G(u)
    assert 0.5 * j * u * u + eval_W(u, WellParams(kT, j)) == pytest.approx(eval_G(u, kT), abs=1e-14)


def test_W_minima_match_bisection_oracle():
    kT = 0.3
    ustar = bisect(lambda u: u - kT * np.log((1 + u) / (1 - u)), 1e-6, 1 - 1e-12)
    assert well_minimum(kT, 0.0) == pytest.approx(ustar, abs=1e-12)
    u = np.linspace(-0.999, 0.999, 200001)
    W = eval_W(u, WellParams(kT, 0.0))
    assert abs(abs(u[np.argmin(W)]) - ustar) < 2e-5
    assert well_depth(kT, 0.0) == pytest.approx(W.min(), abs=1e-9)


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_W(1.0, WellParams(0.3, 0.0))
    with pytest.raises(DomainError):
        eval_g(-1.2, 0.3)
    with pytest.raises(ParameterError):
        eval_W(0.1, WellParams(0.3))
    with pytest.raises(ParameterError):
        WellParams(-0.1, 0.0)


def test_G_curvature_at_origin():
    for kT in (0.2, 0.5, 0.7):
        assert eval_dg(0.0, kT) == pytest.approx(-1 + 2 * kT)
    assert eval_dg(0.0, 0.49) < 0 < eval_dg(0.0, 0.51)


def test_g_is_odd_derivative_of_G():
    u = np.linspace(-0.99, 0.99, 101)
    assert eval_g(0.0, 0.3) == 0.0
    np.testing.assert_allclose(eval_g(-u, 0.3), -eval_g(u, 0.3), atol=1e-15)
    h = 1e-6
    np.testing.assert_allclose((eval_G(u + h, 0.3) - eval_G(u - h, 0.3)) / (2 * h), eval_g(u, 0.3),
                               atol=1e-8)


def test_g_has_two_extrema_at_quarter():
    u = np.linspace(-1 + 1e-6, 1 - 1e-6, 100001)
    s = np.sign(eval_dg(u, 0.25))
    assert int(np.sum(s[1:] != s[:-1])) == 2


def test_W_derivative():
    p = WellParams(0.3, 0.4)
    u = np.linspace(-0.9, 0.9, 31)
    h = 1e-6
    np.testing.assert_allclose((eval_W(u + h, p) - eval_W(u - h, p)) / (2 * h), eval_dW(u, p), atol=1e-8)


def test_envelope_of_convex_function_is_itself():
    u = np.linspace(-1, 1, 501)
    t = convex_envelope(u, u**2)
    np.testing.assert_array_equal(t.Gstar_values, u**2)
    assert flat_interval(t) is None


@pytest.mark.parametrize("u", [[0.0, 2.0, 1.0], [0.0, 0.0, 1.0]])
def test_envelope_rejects_unsorted(u):
    with pytest.raises(ParameterError):
        convex_envelope(np.array(u), np.zeros(3))


def test_envelope_symmetric_at_quarter_against_qhull(tables):
    t = tables[0.25]
    lo, hi, v = flat_interval(t)
    assert lo < 0 < hi
    assert abs(lo + hi) < 1e-8
    assert abs(v) < 1e-10
    ql, qh = widest_bridge(t.u_grid, t.G_values)
    du = t.u_grid[1] - t.u_grid[0]
    assert abs(ql - lo) < du and abs(qh - hi) < du


@pytest.mark.parametrize("kT", KT_SWEEP)
def test_envelope_sandwich_and_convexity(tables, kT):
    t = tables[kT]
    assert np.all(t.Gstar_values <= t.G_values + 1e-15)
    # second divided differences on a uniform grid
    assert np.all(np.diff(t.Gstar_values, 2) >= -1e-12)
    assert np.all(np.diff(t.gstar_values) >= -1e-12)
    if t.has_plateau:
        outside = (t.u_grid < t.u_lower) | (t.u_grid > t.u_upper)
        np.testing.assert_array_equal(t.Gstar_values[outside], t.G_values[outside])
        inside = (t.u_grid >= t.u_lower) & (t.u_grid <= t.u_upper)
        assert np.all(t.gstar_values[inside] == t.v_star)


@pytest.mark.parametrize("kT", KT_SWEEP)
def test_temperature_bifurcation(tables, kT):
    assert (flat_interval(tables[kT]) is not None) == (kT < 0.5)


def test_plateau_shrinks_towards_critical():
    widths = [flat_interval(envelope_of_G(kT))[1] for kT in (0.4, 0.45, 0.49, 0.499)]
    assert np.all(np.diff(widths) < 0)
    assert widths[-1] < 0.1


def test_plateau_endpoints_are_well_minima():
    # for the symmetric well the common tangent is horizontal at +-u*
    for kT in (0.2, 0.3, 0.4):
        assert flat_interval(envelope_of_G(kT))[1] == pytest.approx(well_minimum(kT, 0.0), abs=1e-10)


def test_selection_functions(tables):
    t = tables[0.25]
    lo, hi, v = flat_interval(t)
    assert s_lower(v, t) == lo and s_upper(v, t) == hi
    for w in (-2.0, -0.3, 0.1, 1.5):
        a, b = s_lower(w, t), s_upper(w, t)
        assert a == b
        assert t.gstar(a) == pytest.approx(w, abs=1e-10)
    with pytest.raises(DomainError):
        s_lower(1e6, t)


def test_selection_without_plateau(tables):
    t = tables[0.6]
    for w in (-1.0, 0.0, 0.7):
        assert s_lower(w, t) == s_upper(w, t)
        assert eval_g(s_lower(w, t), 0.6) == pytest.approx(w, abs=1e-10)


def test_envelope_of_W_matches_shifted_G():
    p = WellParams(0.3, 0.0)
    t = envelope_of_W(p, 0.0)
    assert flat_interval(t)[1] == pytest.approx(flat_interval(envelope_of_G(0.3))[1], abs=1e-12)


def test_balance_symmetric_well():
    assert abs(balance_wells(WellParams(0.3, 0.0))) < 1e-12


def test_balance_cancels_tilt():
    p = WellParams(0.3, 0.0)
    lam = balance_wells(lambda u: eval_W(u, p) + 0.01 * u, deriv=lambda u: eval_dW(u, p) + 0.01)
    assert lam == pytest.approx(-0.01, abs=1e-12)


def test_balance_vdw_density_well():
    f, df = density_well(0.9, REDUCED)
    lo, hi = 1e-6, 1 / REDUCED.b - 1e-6
    lam = balance_wells(f, lo, hi, deriv=df)
    g = lambda r: f(r) + lam * r  # noqa: E731
    r = np.linspace(lo, hi, 400001)
    d = df(r) + lam
    # two minima from sign changes of the tilted derivative, refined by bisection
    idx = np.nonzero((d[:-1] < 0) & (d[1:] > 0))[0]
    assert len(idx) == 2
    mins = [g(bisect(lambda x: df(x) + lam, r[i], r[i + 1])) for i in idx]
    assert abs(mins[0] - mins[1]) < 1e-10


def test_balance_rejects_convex_well():
    with pytest.raises(NoDoubleWell):
        balance_wells(WellParams(0.8, 0.0))
