"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Reference numbers are restated here as literals so the suite does not lean
on the package's own copy of the published tables.
"""

import math
import time

import numpy as np
import pytest

from majorminor.analysis import evaluate_costs, optimal_cost_shortcut
from majorminor.closedform import (
    aggregate_rate_amplitude, cosine_periodic_components, price_periodic_amplitude, rate_amplitude_phase,
)
from majorminor.config import preset_config
from majorminor.fdsolver import (
    assemble_decomposition, periodic_oracle_matrix, solve_equilibrium, solve_periodic, solve_trend,
)
from majorminor.model import Cosine, Grid, Inventories, MarketParams, TwapStep, periodic_residual, validate_params
from majorminor.nplayer import best_response_gap
from majorminor.pipeline import run_pipeline

PRESET = MarketParams(a0=0.001, a=0.001, lambda0=0.01, lambda_=0.005, phi0=0.1, phi=0.01, T=10.0)
B = 1 / (2 * math.pi)
INV = Inventories(10.0, 0.0)

COSTS_COS = {
    "nash": {"major": {"total": 0.0130, "profit_q": -0.0368, "profit_r": -0.0253, "risk": 0.0014},
             "minor": {"total": -0.0246, "profit_q": 0.0475, "risk": 0.0229}},
    "no_interaction": {"major": {"total": 0.0136, "profit_q": -0.0126, "profit_r": 0.0, "risk": 0.0010},
                       "minor": {"total": 0.0, "profit_q": 0.0, "risk": 0.0}},
}
TOTALS_TWAP = {"nash": {"major": 0.0477, "minor": -0.0266}, "no_interaction": {"major": 0.0500, "minor": 0.0}}
TOTALS_VWAP = {"nash": {"major": 0.0138, "minor": -0.0276}, "no_interaction": {"major": 0.0140, "minor": 0.0}}


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def cos_run():
    start = time.perf_counter()
    exp = run_pipeline(preset_config("cos", 1e-3), ("costs", "amplitudes"))
    return exp, time.perf_counter() - start


@pytest.fixture(scope="module")
def twap_run():
    return run_pipeline(preset_config("twap", 1e-3), ("costs", "amplitudes"))


@pytest.fixture(scope="module")
def vwap_run():
    return run_pipeline(preset_config("vwap", 1e-3), ("costs", "spectrum"))


def _cost_misses(costs, reference, tol, totals_only=False):
    misses = []
    for regime, traders in reference.items():
        for trader, comps in traders.items():
            comps = {"total": comps} if totals_only else comps
            for comp, ref in comps.items():
                val = costs[regime][trader][comp]
                if abs(val - ref) > tol:
                    misses.append(f"{regime}.{trader}.{comp}={val:.6f} (ref {ref})")
    return misses


def _totals(costs):
    return {r: {t: round(costs[r][t]["total"], 5) for t in ("major", "minor")} for r in ("nash", "no_interaction")}


# ---------------------------------------------------------------- tables


def test_criterion_01_cosine_costs(cos_run, capsys):
    exp, elapsed = cos_run
    misses = _cost_misses(exp.costs, COSTS_COS, 5e-4)
    ok = not misses and elapsed < 30
    report(capsys, 1, ok, f"cosine costs {_totals(exp.costs)}; misses={misses}; runtime {elapsed:.1f}s")


def test_criterion_02_cosine_amplitudes(cos_run, capsys):
    exp, _ = cos_run
    amp = exp.amplitudes
    ref = {"aggregate_rate": (0.672341, 0.716953), "price": (0.001020, 0.001141)}
    misses = []
    for series, (r_eq, r_ng) in ref.items():
        for regime, r in (("nash", r_eq), ("no_interaction", r_ng)):
            if abs(amp[series][regime] - r) > 5e-3 * r:
                misses.append(f"{series}.{regime}={amp[series][regime]:.8g} (ref {r})")
    _, rate_ng = aggregate_rate_amplitude(PRESET, 10, B)
    _, price_ng = price_periodic_amplitude(PRESET, 10, B)
    for name, val, r in (("analytic rate", rate_ng, 0.716953), ("analytic price", price_ng, 0.001141)):
        if abs(val - r) > 1e-4 * r:
            misses.append(f"{name}={val:.8g} (ref {r})")
    detail = (f"rate {amp['aggregate_rate']['nash']:.6f}/{amp['aggregate_rate']['no_interaction']:.6f}, "
              f"price {amp['price']['nash']:.6g}/{amp['price']['no_interaction']:.6g}, "
              f"analytic no-game {rate_ng:.7f}/{price_ng:.7g}; misses={misses}")
    report(capsys, 2, not misses, detail)


def test_criterion_03_twap_costs(twap_run, capsys):
    misses = _cost_misses(twap_run.costs, TOTALS_TWAP, 5e-4, totals_only=True)
    report(capsys, 3, not misses, f"twap totals {_totals(twap_run.costs)}; misses={misses}")


def test_criterion_04_twap_amplitudes(twap_run, capsys):
    amp = twap_run.amplitudes
    ref = {"aggregate_rate": (2.364551, 2.466589), "price": (0.230056, 0.239414)}
    misses = []
    for series, (r_eq, r_ng) in ref.items():
        for regime, r in (("nash", r_eq), ("no_interaction", r_ng)):
            if abs(amp[series][regime] - r) > 1e-2 * r:
                misses.append(f"{series}.{regime}={amp[series][regime]:.6g} (ref {r})")
    detail = (f"rate {amp['aggregate_rate']['nash']:.6f}/{amp['aggregate_rate']['no_interaction']:.6f}, "
              f"price {amp['price']['nash']:.6g}/{amp['price']['no_interaction']:.6g}; misses={misses}")
    report(capsys, 4, not misses, detail)


def test_criterion_05_vwap_costs(vwap_run, capsys):
    misses = _cost_misses(vwap_run.costs, TOTALS_VWAP, 5e-4, totals_only=True)
    report(capsys, 5, not misses, f"vwap totals {_totals(vwap_run.costs)}; misses={misses}")


def test_criterion_06_vwap_spectral_ordering(vwap_run, capsys):
    problems, parts = [], []
    for series, (eq, ng) in vwap_run.spectra.items():
        for label, est in (("nash", eq), ("no_interaction", ng)):
            top = [int(k) for k in est.top(2)]
            parts.append(f"{series}.{label} top2={top}")
            if not set(top) <= {10, 20}:
                problems.append(f"{series}.{label} top2={top}")
        for k in (10, 20):
            a_eq, a_ng = eq.amplitudes[k - 1], ng.amplitudes[k - 1]
            if not a_eq < a_ng:
                problems.append(f"{series} k={k}: {a_eq:.4g} >= {a_ng:.4g}")
    report(capsys, 6, not problems, f"{'; '.join(parts)}; problems={problems}")


# ---------------------------------------------------------------- solver routes


def test_criterion_07_oracle_equivalence(capsys):
    worst, ratios, misses = {}, {}, []
    for label, target in (("cosine", Cosine(10, 10, 10, B)), ("sawtooth", TwapStep(10, 10, 10))):
        res = periodic_residual(target)
        _, traj = periodic_oracle_matrix(PRESET, res, 10)
        errs = {}
        for h in (0.01, 0.005, 0.001):
            grid_per = Grid.from_step(1.0, h)
            pm, pn, _ = solve_periodic(PRESET, res, 10, grid_per)
            X = traj(grid_per.t)
            errs[h] = max(np.max(np.abs(pm.values - X[:, 0])), np.max(np.abs(pn.values - X[:, 1])))
            if errs[h] > 5 * h:
                misses.append(f"{label} h={h}: {errs[h]:.3g}")
        worst[label] = {h: float(f"{e:.3g}") for h, e in errs.items()}
        ratios[label] = errs[0.01] / errs[0.005]
        if ratios[label] < 1.7:
            misses.append(f"{label} ratio {ratios[label]:.2f}")
    detail = f"sup errors {worst}; ratios {{{', '.join(f'{k}: {v:.2f}' for k, v in ratios.items())}}}; misses={misses}"
    report(capsys, 7, not misses, detail)


def test_criterion_08_closed_form_equivalence(capsys):
    hc = cosine_periodic_components(PRESET, 10, B)
    res = periodic_residual(Cosine(10, 10, 10, B))
    misses, errs = [], {}
    for h in (0.01, 0.005, 0.001):
        grid_per = Grid.from_step(1.0, h)
        pm, pn, _ = solve_periodic(PRESET, res, 10, grid_per)
        errs[h] = max(np.max(np.abs(pm.values - hc.major(grid_per.t))),
                      np.max(np.abs(pn.values - hc.minor(grid_per.t))))
        if errs[h] > 5 * h:
            misses.append(f"h={h}: {errs[h]:.3g}")

    rng = np.random.default_rng(20240611)
    draws = violations = 0
    while draws < 1000:
        p = MarketParams(
            a0=10 ** rng.uniform(-4, -1), a=10 ** rng.uniform(-4, -1),
            lambda0=10 ** rng.uniform(-4, -1), lambda_=10 ** rng.uniform(-4, -1),
            phi0=10 ** rng.uniform(-2, 0), phi=10 ** rng.uniform(-2, 0), T=rng.uniform(1, 20),
        )
        if not validate_params(p).feasible:
            continue
        draws += 1
        n, b = int(rng.integers(1, 21)), rng.uniform(0.01, 2.0)
        major, minor, nogame = rate_amplitude_phase(p, n, b)
        eq, ng = price_periodic_amplitude(p, n, b)
        ok = (-1e-12 <= major.phase <= math.pi / 2 + 1e-12
              and -math.pi - 1e-12 <= minor.phase <= -math.pi / 2 + 1e-12
              and major.phase - minor.phase <= math.pi + 1e-12
              and major.amplitude <= nogame * (1 + 1e-12)
              and eq <= ng * (1 + 1e-12))
        violations += not ok
    if violations:
        misses.append(f"{violations} draws broke a phase or dominance inequality")
    detail = f"sup errors {{{', '.join(f'{h}: {e:.3g}' for h, e in errs.items())}}}; {draws} feasible draws; misses={misses}"
    report(capsys, 8, not misses, detail)


def _decompose(params, target, inv, h):
    grid, grid_per = Grid.from_step(10.0, h), Grid.from_step(1.0, h)
    pm, pn, q0_per = solve_periodic(params, periodic_residual(target), 10, grid_per)
    trend = solve_trend(params, inv, q0_per, grid)
    decomp, sol = assemble_decomposition((pm, pn), trend, inv, 10)
    return decomp, sol, grid


def test_criterion_09_decomposition_identity(capsys):
    misses, gaps = [], {}
    for label, target in (("cosine", Cosine(10, 10, 10, B)), ("twap", TwapStep(10, 10, 10))):
        decomp, sol, grid = _decompose(PRESET, target, INV, 1e-3)
        direct = solve_equilibrium(PRESET, INV, target, grid)
        gaps[label] = max(np.max(np.abs(sol.q_major.values - direct.q_major.values)),
                          np.max(np.abs(sol.q_minor.values - direct.q_minor.values)))
        if gaps[label] > 1e-5:
            misses.append(f"{label} reassembly {gaps[label]:.3g}")
        no_minor_impact, _, _ = _decompose(PRESET.replace(lambda_=0.0), target, INV, 1e-3)
        trend_sup = np.max(np.abs(no_minor_impact.trend_major.values))
        if trend_sup > 1e-8:
            misses.append(f"{label} trend_major with lambda=0: {trend_sup:.3g}")
        no_major_impact, _, _ = _decompose(PRESET.replace(lambda0=0.0), target, INV, 1e-3)
        per_sup = np.max(np.abs(no_major_impact.periodic_minor.values))
        if per_sup > 1e-8:
            misses.append(f"{label} periodic_minor with lambda0=0: {per_sup:.3g}")
    detail = f"reassembly gaps {{{', '.join(f'{k}: {v:.2g}' for k, v in gaps.items())}}}; misses={misses}"
    report(capsys, 9, not misses, detail)


def test_criterion_10_cost_shortcut(cos_run, vwap_run, capsys):
    misses, gaps = [], {}
    for label, exp in (("cosine", cos_run[0]), ("vwap", vwap_run)):
        target, params = exp.cfg.target, exp.cfg.params
        major, minor = evaluate_costs(exp.nash, target, params)
        j0, j = optimal_cost_shortcut(exp.nash, target, params)
        gaps[label] = (abs(major.total - j0), abs(minor.total - j))
        if max(gaps[label]) > 1e-4:
            misses.append(label)
    detail = "; ".join(f"{k}: |dJ major|={a:.2g} |dJ minor|={b:.2g}" for k, (a, b) in gaps.items())
    report(capsys, 10, not misses, f"{detail}; misses={misses}")


# ---------------------------------------------------------------- games


def test_criterion_11_finite_population_gaps(cos_run, twap_run, vwap_run, capsys):
    misses, parts = [], []
    for label, exp in (("cos", cos_run[0]), ("twap", twap_run), ("vwap", vwap_run)):
        cfg = exp.cfg
        reps = [best_response_gap(exp.nash, cfg.target, cfg.params, cfg.inv, N, cfg.grid) for N in (2, 10, 100)]
        eps = [r.eps_minor for r in reps]
        parts.append(f"{label} eps_minor={[float(f'{e:.3g}') for e in eps]} "
                     f"max eps_major={max(r.eps_major for r in reps):.2g}")
        for r in reps:
            if not 0 <= r.eps_minor <= r.bound_minor:
                misses.append(f"{label} N={r.n_players} eps_minor={r.eps_minor:.3g} bound={r.bound_minor:.3g}")
            if r.eps_major > 1e-8:
                misses.append(f"{label} N={r.n_players} eps_major={r.eps_major:.3g}")
        if not (eps[0] > eps[1] > eps[2]):
            misses.append(f"{label} eps_minor not decreasing")
    report(capsys, 11, not misses, f"{'; '.join(parts)}; misses={misses}")


def test_criterion_12_feasibility(capsys):
    rep = validate_params(PRESET)
    t1, t2, t3 = rep.witness if rep.feasible else (None, None, None)
    p = PRESET
    verified = rep.feasible and (
        t1 > 0 and t2 > p.lambda0 / 2 and t3 > 0
        and t1 * t3 / (t1 + t3) > p.lambda_ / 2
        and t1 < 8 * p.phi0 * p.a / p.lambda_
        and p.lambda0 / p.a0 * t2 + p.lambda_ / p.a * t3 < 8 * p.phi
    )
    # lambda0^2 / (2 a0) >= 8 phi forces the last inequality to fail for any t2 > lambda0/2
    violation = PRESET.replace(lambda0=0.02)
    bad = validate_params(violation)
    ok = verified and not bad.feasible
    detail = f"base feasible={rep.feasible} witness={rep.witness} verified={verified}; violation feasible={bad.feasible}"
    report(capsys, 12, ok, detail)
