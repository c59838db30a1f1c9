"""Experiment pipeline: solve, decompose, measure, and compare with references."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import presets
from .analysis import (
    CostBreakdown, SpectralEstimate, amplitude, evaluate_costs, optimal_cost_shortcut,
    periodic_rate, price_path, spectral_amplitudes,
)
from .closedform import aggregate_rate_amplitude, price_periodic_amplitude
from .config import ExperimentConfig
from .errors import NotDifferentiable, NotPeriodic
from .fdsolver import (
    Decomposition, EquilibriumSolution, assemble_decomposition, solve_equilibrium, solve_periodic, solve_trend,
)
from .model import Grid, GridFn, ValidationReport, periodic_residual, validate_params
from .nplayer import GapReport, best_response_gap

__all__ = ["Experiment", "run_pipeline", "check_against_reference", "TABLES_BY_PRESET"]

TABLES_BY_PRESET = {"cos": ("table1", "table2"), "twap": ("table3", "table4"), "vwap": ("table5", None)}


@dataclass
class Experiment:
    """Everything computed for one configuration; fields stay ``None`` when not requested."""

    cfg: ExperimentConfig
    validation: ValidationReport
    nash: EquilibriumSolution
    nogame: EquilibriumSolution
    decomposition: Decomposition | None = None
    decomposition_nogame: Decomposition | None = None
    periodic: dict | None = None
    costs: dict | None = None
    amplitudes: dict | None = None
    spectra: dict[str, tuple[SpectralEstimate, SpectralEstimate]] | None = None
    gaps: list[GapReport] = field(default_factory=list)

    @property
    def price_nash(self) -> GridFn:
        return price_path(self.nash, self.cfg.params)

    @property
    def price_nogame(self) -> GridFn:
        return price_path(self.nogame, self.cfg.params)


def _costs_dict(major: CostBreakdown, minor: CostBreakdown) -> dict:
    m = major.as_dict()
    n = minor.as_dict()
    n.pop("profit_r")
    return {"major": m, "minor": n}


def _decompose(cfg, params):
    n = cfg.target_spec.periods
    if n is None:
        raise NotPeriodic(f"target kind {cfg.target_spec.kind!r} has no periodic-trend decomposition")
    grid_per = Grid.from_step(cfg.params.T / n, cfg.grid.h)
    residual = periodic_residual(cfg.target)
    pm, pn, q0_per = solve_periodic(params, residual, n, grid_per, cfg.options)
    trend = solve_trend(params, cfg.inv, q0_per, cfg.grid)
    decomp, _ = assemble_decomposition((pm, pn), trend, cfg.inv, n)
    return decomp, (pm, pn)


def _periodic_amplitudes(cfg, per_nash, per_nogame) -> dict:
    lam0, lam = cfg.params.lambda0, cfg.params.lambda_
    out = {"aggregate_rate": {}, "price": {}, "aggregate_inventory": {}}
    for label, (pm, pn), lam_minor in (("nash", per_nash, lam), ("no_interaction", per_nogame, 0.0)):
        rate = periodic_rate(pm).values + periodic_rate(pn).values
        out["aggregate_rate"][label] = amplitude(rate)
        out["price"][label] = amplitude(lam0 * pm.values + lam_minor * pn.values)
        out["aggregate_inventory"][label] = amplitude(pm.values + pn.values)
    spec = cfg.target_spec
    if spec.kind == "cosine":
        eq, ng = aggregate_rate_amplitude(cfg.params, spec.n, spec.b)
        peq, png = price_periodic_amplitude(cfg.params, spec.n, spec.b)
        out["analytic"] = {
            "aggregate_rate": {"nash": eq, "no_interaction": ng},
            "price": {"nash": peq, "no_interaction": png},
        }
    return out


def run_pipeline(cfg: ExperimentConfig, outputs=None) -> Experiment:
    """Run every stage needed by ``outputs`` (default: ``cfg.outputs``)."""
    outputs = tuple(cfg.outputs if outputs is None else outputs)
    target = cfg.target
    params = cfg.params
    nogame_params = params.without_interaction()
    exp = Experiment(
        cfg=cfg,
        validation=validate_params(params),
        nash=solve_equilibrium(params, cfg.inv, target, cfg.grid),
        nogame=solve_equilibrium(nogame_params, cfg.inv, target, cfg.grid),
    )

    if "decomposition" in outputs or "amplitudes" in outputs:
        if cfg.target_spec.periods is not None:
            exp.decomposition, per_nash = _decompose(cfg, params)
            exp.decomposition_nogame, per_nogame = _decompose(cfg, nogame_params)
            exp.periodic = {"nash": per_nash, "no_interaction": per_nogame}
            if "amplitudes" in outputs:
                exp.amplitudes = _periodic_amplitudes(cfg, per_nash, per_nogame)
        elif "decomposition" in outputs:
            raise NotPeriodic(f"target kind {cfg.target_spec.kind!r} has no periodic-trend decomposition")

    if "costs" in outputs:
        costs = {
            "nash": _costs_dict(*evaluate_costs(exp.nash, target, params)),
            "no_interaction": _costs_dict(*evaluate_costs(exp.nogame, target, nogame_params)),
        }
        try:
            j_major, j_minor = optimal_cost_shortcut(exp.nash, target, params)
            costs["shortcut_nash"] = {"major": float(j_major), "minor": float(j_minor)}
        except NotDifferentiable:
            costs["shortcut_nash"] = None
        exp.costs = costs

    if "spectrum" in outputs:
        kmax = min(cfg.kmax, cfg.grid.n_mesh // 2)
        rate_nash = exp.nash.v_major + exp.nash.v_minor
        rate_nogame = exp.nogame.v_major + exp.nogame.v_minor
        exp.spectra = {
            "aggregate_rate": (
                spectral_amplitudes(rate_nash, kmax, cfg.detrend),
                spectral_amplitudes(rate_nogame, kmax, cfg.detrend),
            ),
            "price": (
                spectral_amplitudes(exp.price_nash, kmax, cfg.detrend),
                spectral_amplitudes(exp.price_nogame, kmax, cfg.detrend),
            ),
        }

    if "nplayer" in outputs:
        with ThreadPoolExecutor(max_workers=max(1, len(cfg.n_players))) as pool:
            jobs = [pool.submit(best_response_gap, exp.nash, target, params, cfg.inv, N, cfg.grid)
                    for N in cfg.n_players]
            exp.gaps = [job.result() for job in jobs]
    return exp


# --------------------------------------------------------------------------
# tables and reference comparison


def spectral_summary(exp: Experiment) -> dict:
    out = {}
    for series, (eq, ng) in exp.spectra.items():
        modes = {}
        for k in presets.SPECTRAL_MODES:
            if k <= len(eq.amplitudes):
                modes[str(k)] = {"nash": float(eq.amplitudes[k - 1]), "no_interaction": float(ng.amplitudes[k - 1])}
        out[series] = {
            "top2_nash": [int(k) for k in eq.top(2)],
            "top2_no_interaction": [int(k) for k in ng.top(2)],
            "modes": modes,
        }
    return out


def tables(exp: Experiment) -> dict:
    """Results keyed like the published tables for a preset run."""
    cost_key, amp_key = TABLES_BY_PRESET.get(exp.cfg.name, ("costs", "amplitudes"))
    out = {}
    if exp.costs is not None:
        out[cost_key] = {k: exp.costs[k] for k in ("nash", "no_interaction")}
    if exp.amplitudes is not None and amp_key is not None:
        out[amp_key] = exp.amplitudes
    if exp.spectra is not None:
        out["spectral"] = spectral_summary(exp)
    return out


@dataclass(frozen=True)
class Check:
    name: str
    value: float | list
    reference: float | list
    tolerance: str
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: value={self.value} reference={self.reference} ({self.tolerance})"


def check_against_reference(exp: Experiment) -> list[Check]:
    """Compare a preset run with the published numbers."""
    name = exp.cfg.name
    if name not in TABLES_BY_PRESET:
        return []
    cost_key, amp_key = TABLES_BY_PRESET[name]
    table = tables(exp)
    checks = []
    ref_costs = presets.REFERENCE[cost_key]
    for regime in ("nash", "no_interaction"):
        for trader in ("major", "minor"):
            for comp, ref in ref_costs[regime][trader].items():
                val = table[cost_key][regime][trader][comp]
                checks.append(Check(
                    f"{cost_key}.{regime}.{trader}.{comp}", round(val, 6), ref,
                    f"abs {presets.COST_TOL}", abs(val - ref) <= presets.COST_TOL,
                ))
    if amp_key is not None and amp_key in table:
        rtol = presets.AMPLITUDE_RTOL[amp_key]
        for series in ("aggregate_rate", "price"):
            for regime in ("nash", "no_interaction"):
                ref = presets.REFERENCE[amp_key][series][regime]
                val = table[amp_key][series][regime]
                checks.append(Check(
                    f"{amp_key}.{series}.{regime}", round(val, 8), ref,
                    f"rel {rtol}", abs(val - ref) <= rtol * abs(ref),
                ))
    if name == "vwap" and "spectral" in table:
        modes = set(presets.SPECTRAL_MODES)
        for series, info in table["spectral"].items():
            top = info["top2_nash"]
            checks.append(Check(f"spectral.{series}.top2_nash", top, sorted(modes), "subset",
                                set(top) <= modes))
            top = info["top2_no_interaction"]
            checks.append(Check(f"spectral.{series}.top2_no_interaction", top, sorted(modes), "subset",
                                set(top) <= modes))
            for k, vals in info["modes"].items():
                checks.append(Check(
                    f"spectral.{series}.k{k}.nash_below_no_interaction",
                    round(vals["nash"], 10), round(vals["no_interaction"], 10), "strict <",
                    vals["nash"] < vals["no_interaction"],
                ))
    return checks


def trajectory_table(sol: EquilibriumSolution, price: GridFn) -> np.ndarray:
    return np.column_stack([sol.t, sol.q_major.values, sol.q_minor.values,
                            sol.v_major.values, sol.v_minor.values, price.values])
