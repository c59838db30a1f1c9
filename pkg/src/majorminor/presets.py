"""The three reference experiments and their published table values."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .model import Cosine, MarketParams, SampledRate, TwapStep

__all__ = [
    "BASE_PARAMS",
    "BASE_Q0_MAJOR",
    "BASE_Q0_MINOR",
    "COSINE_B",
    "PRESET_NAMES",
    "REFERENCE",
    "vwap_rate",
    "vwap_inventory",
    "vwap_target",
    "vwap_sample_step",
]

BASE_PARAMS = MarketParams(a0=0.001, a=0.001, lambda0=0.01, lambda_=0.005, phi0=0.1, phi=0.01, T=10.0)
BASE_Q0_MAJOR = 10.0
BASE_Q0_MINOR = 0.0
COSINE_B = 1.0 / (2.0 * math.pi)
PRESET_NAMES = ("cos", "twap", "vwap")

# switch time of the VWAP-like rate: period 1/2 before, period 1 after
_VWAP_SWITCH = 3.0


def cosine_target(q0: float = BASE_Q0_MAJOR, T: float = 10.0, n: int = 10, b: float = COSINE_B) -> Cosine:
    return Cosine(q0=q0, T=T, n=n, b=b)


def twap_target(q0: float = BASE_Q0_MAJOR, T: float = 10.0, n: int = 10) -> TwapStep:
    return TwapStep(q0=q0, T=T, n=n)


def vwap_rate(t):
    """U-shaped liquidation rate with intraday oscillations.

    At ``t = 3`` the two branches disagree; the average of the one-sided
    limits is returned there so trapezoid sums across the switch are exact
    for the piecewise-linear interpolant.
    """
    t = np.asarray(t, dtype=float)
    base = -(15.0 / 370.0) * (t - 7.0) ** 2 - 0.5
    early = base + 0.75 * np.cos(4 * np.pi * t)
    late = base + 0.5 * np.cos(2 * np.pi * t)
    out = np.where(t < _VWAP_SWITCH, early, late)
    at_switch = np.isclose(t, _VWAP_SWITCH, rtol=0.0, atol=1e-12)
    return np.where(at_switch, 0.5 * (early + late), out)


def vwap_inventory(t, q0: float = BASE_Q0_MAJOR):
    """Exact integral of :func:`vwap_rate` started from ``q0``."""
    t = np.asarray(t, dtype=float)
    trend = -(15.0 / 370.0) * ((t - 7.0) ** 3 + 343.0) / 3.0 - 0.5 * t
    early = 0.75 * np.sin(4 * np.pi * t) / (4 * np.pi)
    late = 0.75 * np.sin(4 * np.pi * _VWAP_SWITCH) / (4 * np.pi) + 0.5 * (
        np.sin(2 * np.pi * t) - np.sin(2 * np.pi * _VWAP_SWITCH)
    ) / (2 * np.pi)
    return q0 + trend + np.where(t < _VWAP_SWITCH, early, late)


def vwap_sample_step(h: float) -> float:
    """Sampling step of the VWAP rate for a solver step ``h``.

    Eight samples per solver step, never coarser than ``1/8000``, keeps
    the trapezoid terminal inventory within the ``1e-9`` relative check.
    """
    return min(h, 1e-3) / 8.0


def vwap_target(h: float, q0: float = BASE_Q0_MAJOR, T: float = 10.0) -> SampledRate:
    step = vwap_sample_step(h)
    n = int(round(T / step))
    if abs(n * step - T) > 1e-12 * T:
        raise DomainError(f"VWAP sampling step {step} does not divide T={T}")
    return SampledRate.from_function(vwap_rate, q0=q0, T=T, n_samples=n)


# Published values: costs keyed [trader][component] for the equilibrium
# ("nash") and the no-interaction benchmark; amplitudes keyed [series].
REFERENCE = {
    "table1": {
        "nash": {
            "major": {"total": 0.0130, "profit_q": -0.0368, "profit_r": -0.0253, "risk": 0.0014},
            "minor": {"total": -0.0246, "profit_q": 0.0475, "risk": 0.0229},
        },
        "no_interaction": {
            "major": {"total": 0.0136, "profit_q": -0.0126, "profit_r": 0.0000, "risk": 0.0010},
            "minor": {"total": 0.0000, "profit_q": 0.0000, "risk": 0.0000},
        },
    },
    "table2": {
        "aggregate_rate": {"nash": 0.672341, "no_interaction": 0.716953},
        "price": {"nash": 0.001020, "no_interaction": 0.001141},
    },
    "table3": {
        "nash": {
            "major": {"total": 0.0477, "profit_q": -0.0504, "profit_r": -0.0290, "risk": 0.0264},
            "minor": {"total": -0.0266, "profit_q": 0.0491, "risk": 0.0225},
        },
        "no_interaction": {
            "major": {"total": 0.0500, "profit_q": -0.0250, "profit_r": 0.0000, "risk": 0.0250},
            "minor": {"total": 0.0000, "profit_q": 0.0000, "risk": 0.0000},
        },
    },
    "table4": {
        "aggregate_rate": {"nash": 2.364551, "no_interaction": 2.466589},
        "price": {"nash": 0.230056, "no_interaction": 0.239414},
    },
    "table5": {
        "nash": {
            "major": {"total": 0.0138, "profit_q": -0.0412, "profit_r": -0.0279, "risk": 0.0005},
            "minor": {"total": -0.0276, "profit_q": 0.0521, "risk": 0.0246},
        },
        "no_interaction": {
            "major": {"total": 0.0140, "profit_q": -0.0137, "profit_r": 0.0000, "risk": 0.0004},
            "minor": {"total": 0.0000, "profit_q": 0.0000, "risk": 0.0000},
        },
    },
}

COST_TOL = 5e-4
AMPLITUDE_RTOL = {"table2": 5e-3, "table4": 1e-2}
SPECTRAL_MODES = (10, 20)
