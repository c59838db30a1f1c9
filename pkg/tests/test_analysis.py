import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from majorminor.analysis import (
    amplitude, detrend, evaluate_costs, optimal_cost_shortcut, periodic_rate, price_path, spectral_amplitudes,
)
from majorminor.errors import DomainError, GridMismatch, NotDifferentiable
from majorminor.fdsolver import EquilibriumSolution, solve_equilibrium, solve_periodic
from majorminor.model import Cosine, DTwap, Grid, GridFn, Inventories, MarketParams, TwapStep, periodic_residual

PRESET = MarketParams(a0=0.001, a=0.001, lambda0=0.01, lambda_=0.005, phi0=0.1, phi=0.01, T=10.0)
B = 1 / (2 * math.pi)
INV = Inventories(10.0, 0.0)


def simpson_costs(sol, target, p):
    """Same functionals by composite Simpson on the even-numbered grid."""
    from scipy.integrate import simpson

    t = sol.t
    R = target.inventory(t)
    Q, q, v, u = sol.q_major.values, sol.q_minor.values, sol.v_major.values, sol.v_minor.values
    J0 = (-(p.lambda_ * simpson(Q * u, x=t) - p.a0 * simpson(v**2, x=t)) + p.lambda_ * simpson(R * u, x=t)
          + p.phi0 * simpson((Q - R) ** 2, x=t))
    J = -(simpson(q * (p.lambda0 * v + p.lambda_ * u), x=t) - p.a * simpson(u**2, x=t)) + p.phi * simpson(q**2, x=t)
    return J0, J


# ------------------------------------------------------------ costs


def test_costs_of_unperturbed_twap():
    p = PRESET.replace(lambda0=0.0, lambda_=0.0)
    grid = Grid.from_step(10.0, 0.01)
    sol = solve_equilibrium(p, INV, DTwap(10, 10), grid)
    major, minor = evaluate_costs(sol, DTwap(10, 10), p)
    assert major.risk == pytest.approx(0.0, abs=1e-18)
    assert major.total == pytest.approx(p.a0 * 10.0, rel=1e-9)
    assert minor.total == 0.0 and minor.profit_r == 0.0


def test_costs_agree_with_simpson():
    target = Cosine(10, 10, 10, B)
    grid = Grid.from_step(10.0, 0.002)
    sol = solve_equilibrium(PRESET, INV, target, grid)
    major, minor = evaluate_costs(sol, target, PRESET)
    J0, J = simpson_costs(sol, target, PRESET)
    assert major.total == pytest.approx(J0, abs=1e-4)
    assert minor.total == pytest.approx(J, abs=1e-4)
    assert major.total == pytest.approx(-major.profit_q + major.profit_r + major.risk, rel=1e-14)


def test_step_target_costs_converge():
    # integrands jump at the period nodes, so compare refinements instead of rules
    target = TwapStep(10, 10, 10)
    totals = []
    for h in (0.004, 0.002, 0.001):
        sol = solve_equilibrium(PRESET, INV, target, Grid.from_step(10.0, h))
        totals.append([c.total for c in evaluate_costs(sol, target, PRESET)])
    d1 = np.abs(np.subtract(totals[1], totals[0]))
    d2 = np.abs(np.subtract(totals[2], totals[1]))
    assert np.all(d2 < 0.7 * d1 + 1e-9) and np.all(d2 < 5e-4)


def test_shortcut_agrees_at_equilibrium():
    target = Cosine(10, 10, 10, B)
    gaps = []
    for h in (0.002, 0.001):
        sol = solve_equilibrium(PRESET, INV, target, Grid.from_step(10.0, h))
        major, minor = evaluate_costs(sol, target, PRESET)
        j0, j = optimal_cost_shortcut(sol, target, PRESET)
        gaps.append(max(abs(major.total - j0), abs(minor.total - j)))
    assert gaps[0] < 1e-3 and gaps[1] < 0.7 * gaps[0]


def test_shortcut_breaks_off_equilibrium():
    target = Cosine(10, 10, 10, B)
    grid = Grid.from_step(10.0, 0.002)
    sol = solve_equilibrium(PRESET, INV, target, grid)
    bump = 0.5 * np.sin(np.pi * grid.t / 10)
    off = EquilibriumSolution.from_inventories(sol.q_major + GridFn(grid, bump), sol.q_minor)
    major, _ = evaluate_costs(off, target, PRESET)
    j0, _ = optimal_cost_shortcut(off, target, PRESET)
    assert abs(major.total - j0) > 1e-2


def test_shortcut_needs_a_differentiable_target():
    target = TwapStep(10, 10, 10)
    sol = solve_equilibrium(PRESET, INV, target, Grid.from_step(10.0, 0.01))
    with pytest.raises(NotDifferentiable):
        optimal_cost_shortcut(sol, target, PRESET)


def test_costs_reject_other_horizons():
    sol = solve_equilibrium(PRESET, INV, DTwap(10, 10), Grid.from_step(10.0, 0.01))
    with pytest.raises(GridMismatch):
        evaluate_costs(sol, DTwap(10, 5), PRESET)


# ------------------------------------------------------------ prices


def test_price_examples():
    grid = Grid.from_step(10.0, 0.01)
    p = PRESET.replace(lambda_=0.0)
    sol = solve_equilibrium(p, INV, DTwap(10, 10), grid)
    S = price_path(sol, p)
    assert S.values[0] == 0.0
    assert S.values[-1] == pytest.approx(-p.lambda0 * 10)
    lin = PRESET.replace(lambda0=0.0, lambda_=0.0)
    S2 = price_path(solve_equilibrium(lin, INV, DTwap(10, 10), grid), PRESET)
    assert np.allclose(S2.values, -0.01 * grid.t)


@pytest.mark.parametrize("target", [Cosine(10, 10, 10, B), TwapStep(10, 10, 10), DTwap(10, 10)])
def test_competition_lowers_price_impact(target):
    grid = Grid.from_step(10.0, 0.005)
    eq = price_path(solve_equilibrium(PRESET, INV, target, grid), PRESET)
    ng = price_path(solve_equilibrium(PRESET.without_interaction(), INV, target, grid), PRESET)
    assert np.all(ng.values - eq.values >= -1e-12)


# ------------------------------------------------------------ amplitudes


def test_amplitude_examples():
    assert amplitude([1.0, -3.0, 2.0]) == 2.5
    assert amplitude(np.zeros(5)) == 0.0
    t = np.linspace(0, 1, 1001)
    assert amplitude(0.7 * np.cos(2 * np.pi * t)) == pytest.approx(0.7)


def test_periodic_rate_wraps():
    grid = Grid.from_step(1.0, 0.001)
    f = GridFn(grid, np.sin(2 * np.pi * grid.t))
    v = periodic_rate(f)
    assert v.values[-1] == v.values[0]
    assert np.max(np.abs(v.values - 2 * np.pi * np.cos(2 * np.pi * grid.t))) < 0.03


@pytest.mark.parametrize("target", [Cosine(10, 10, 10, B), TwapStep(10, 10, 10)])
def test_periodic_amplitudes_shrink_under_competition(target):
    grid_per = Grid.from_step(1.0, 0.002)
    res = periodic_residual(target)
    pm, pn, _ = solve_periodic(PRESET, res, 10, grid_per)
    gm, gn, _ = solve_periodic(PRESET.without_interaction(), res, 10, grid_per)
    rate_eq = amplitude(periodic_rate(pm).values + periodic_rate(pn).values)
    rate_ng = amplitude(periodic_rate(gm).values + periodic_rate(gn).values)
    assert rate_eq < rate_ng
    price_eq = amplitude(PRESET.lambda0 * pm.values + PRESET.lambda_ * pn.values)
    price_ng = amplitude(PRESET.lambda0 * gm.values)
    assert price_eq < price_ng


# ------------------------------------------------------------ spectra


def direct_modes(values, t, kmax):
    T = t[-1]
    return np.array([2 / T * abs(np.trapezoid(values * np.exp(-2j * np.pi * k * t / T), t))
                     for k in range(1, kmax + 1)])


def test_planted_harmonics_are_recovered():
    grid = Grid.from_step(10.0, 0.01)
    t = grid.t
    f = 2.0 * np.cos(2 * np.pi * 3 * t / 10) + 0.5 * np.sin(2 * np.pi * 7 * t / 10) + 1.3
    est = spectral_amplitudes(GridFn(grid, f), 40, method="none")
    assert est.amplitudes[2] == pytest.approx(2.0, abs=1e-12)
    assert est.amplitudes[6] == pytest.approx(0.5, abs=1e-12)
    others = np.delete(est.amplitudes, [2, 6])
    assert np.max(others) < 1e-12
    assert list(est.top(2)) == [3, 7]


def test_affine_detrending_removes_drift():
    grid = Grid.from_step(10.0, 0.01)
    t = grid.t
    f = 2.0 * np.cos(2 * np.pi * 3 * t / 10) + 0.5 * np.cos(2 * np.pi * 7 * t / 10) - 0.4 * t + 1.3
    est = spectral_amplitudes(GridFn(grid, f), 40, method="affine")
    assert est.amplitudes[2] == pytest.approx(2.0, abs=1e-3)
    assert est.amplitudes[6] == pytest.approx(0.5, abs=1e-3)
    assert list(est.top(2)) == [3, 7]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=201, max_size=201), st.integers(1, 100))
def test_fft_matches_direct_quadrature(vals, kmax):
    grid = Grid(10.0, 200)
    series = GridFn(grid, np.array(vals))
    est = spectral_amplitudes(series, kmax, method="none")
    assert np.allclose(est.amplitudes, direct_modes(np.array(vals), grid.t, kmax), atol=1e-10)


def test_spectral_argument_checks():
    series = GridFn(Grid(10.0, 100), np.zeros(101))
    with pytest.raises(DomainError):
        spectral_amplitudes(series, 0)
    with pytest.raises(DomainError):
        spectral_amplitudes(series, 51)
    with pytest.raises(DomainError):
        detrend(np.zeros(5), np.arange(5.0), method="wavelet")


def test_detrend_variants():
    t = np.linspace(0, 10, 1001)
    assert np.allclose(detrend(3 * t + 1, t), 0, atol=1e-10)
    assert np.allclose(detrend(t**3 - t, t, method="poly", degree=3), 0, atol=1e-8)
    assert np.allclose(detrend(np.full_like(t, 4.0), t, method="moving_average", window=1.0), 0)
    assert np.array_equal(detrend(t, t, method="none"), t)
