"""Analytic benchmarks.

Two families of closed forms are provided:

* optimal inventories when permanent impact is switched off, for the major
  (any target, evaluated on a grid) and for the representative minor;
* the periodic components of the equilibrium for a cosine target, with
  amplitudes and phases of trading rates and of the price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePhase
from .model import Grid, GridFn, MarketParams, TargetStrategy

__all__ = [
    "NoGameConstants",
    "HarmonicCoeffs",
    "AmplitudePhase",
    "no_game_constants",
    "no_interaction_major",
    "no_interaction_minor",
    "cosine_periodic_components",
    "rate_amplitude_phase",
    "aggregate_rate_amplitude",
    "price_periodic_amplitude",
]


@dataclass(frozen=True)
class NoGameConstants:
    theta0: float
    theta: float
    gamma: float


def no_game_constants(params: MarketParams) -> NoGameConstants:
    theta0 = math.sqrt(params.phi0 / params.a0)
    theta = math.sqrt(params.phi / params.a)
    gamma = math.sqrt(params.phi / params.a + params.lambda_**2 / (16 * params.a**2))
    return NoGameConstants(theta0, theta, gamma)


def no_interaction_major(params: MarketParams, target: TargetStrategy, grid: Grid) -> GridFn:
    """Optimal major inventory when both permanent impacts vanish.

    The Green's-function integral against ``R`` is evaluated by composite
    trapezoid on ``grid``, split at ``s = t``. Hyperbolic sines are
    rewritten with decaying exponentials and the two partial integrals are
    accumulated recursively, so the cost is O(n) and nothing overflows for
    large ``theta0 * T``.
    """
    th = math.sqrt(params.phi0 / params.a0)
    T, h = grid.T, grid.h
    t = grid.t
    R = np.asarray(target.inventory(t), dtype=float)
    decay = math.exp(-th * h)
    norm = -math.expm1(-2 * th * T)
    left = -np.expm1(-2 * th * t)  # 1 - e^{-2 th t}
    right = -np.expm1(-2 * th * (T - t))  # 1 - e^{-2 th (T - t)}

    # I1(t) = int_0^t e^{-th (t-s)} R_s (1 - e^{-2 th s}) ds
    f1 = R * left
    I1 = np.zeros_like(t)
    for i in range(len(t) - 1):
        I1[i + 1] = decay * I1[i] + 0.5 * h * (decay * f1[i] + f1[i + 1])
    # I2(t) = int_t^T e^{-th (s-t)} R_s (1 - e^{-2 th (T-s)}) ds
    f2 = R * right
    I2 = np.zeros_like(t)
    for i in range(len(t) - 1, 0, -1):
        I2[i - 1] = decay * I2[i] + 0.5 * h * (decay * f2[i] + f2[i - 1])

    q0 = target.inventory(0.0)
    homogeneous = q0 * np.exp(-th * t) * right / norm
    forced = th / (2 * norm) * (right * I1 + left * I2)
    Q = homogeneous + forced
    Q[0], Q[-1] = q0, 0.0
    return GridFn(grid, Q)


def no_interaction_minor(params: MarketParams, q0_minor: float, t):
    """Representative-minor inventory when the major exerts no permanent impact."""
    gamma = no_game_constants(params).gamma
    T = params.T
    t = np.asarray(t, dtype=float)
    ratio = np.exp(-gamma * t) * (-np.expm1(-2 * gamma * (T - t))) / (-math.expm1(-2 * gamma * T))
    out = q0_minor * np.exp(-params.lambda_ * t / (4 * params.a)) * ratio
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# cosine target


@dataclass(frozen=True)
class AmplitudePhase:
    """``amplitude * cos(omega t - phase)``."""

    amplitude: float
    phase: float


def _amp_phase(cos_coef: float, sin_coef: float, what: str) -> AmplitudePhase:
    amp = math.hypot(cos_coef, sin_coef)
    if amp == 0.0:
        raise DegeneratePhase(f"{what} periodic component is identically zero")
    return AmplitudePhase(amp, math.atan2(sin_coef, cos_coef))


@dataclass(frozen=True)
class HarmonicCoeffs:
    """Sine/cosine coefficients of the periodic equilibrium components.

    Inventories are ``major_sin sin(wt) + major_cos cos(wt)`` for the major
    residual part and likewise for the minor.
    """

    omega: float
    d0: float
    d1: float
    e0: float
    e1: float
    K: float
    major_sin: float
    major_cos: float
    minor_sin: float
    minor_cos: float

    def major(self, t):
        w = self.omega * np.asarray(t, dtype=float)
        return self.major_sin * np.sin(w) + self.major_cos * np.cos(w)

    def minor(self, t):
        w = self.omega * np.asarray(t, dtype=float)
        return self.minor_sin * np.sin(w) + self.minor_cos * np.cos(w)

    def major_rate(self, t):
        w = self.omega * np.asarray(t, dtype=float)
        return self.omega * (self.major_sin * np.cos(w) - self.major_cos * np.sin(w))

    def minor_rate(self, t):
        w = self.omega * np.asarray(t, dtype=float)
        return self.omega * (self.minor_sin * np.cos(w) - self.minor_cos * np.sin(w))


def cosine_periodic_components(params: MarketParams, n: int, b: float) -> HarmonicCoeffs:
    """Periodic equilibrium components for the residual ``b sin(2 pi n t / T)``."""
    omega = 2 * math.pi * n / params.T
    d0 = params.a0 * omega**2 + params.phi0
    d1 = params.a * omega**2 + params.phi
    e0 = params.lambda0 * omega / 2
    e1 = params.lambda_ * omega / 2
    K = d0**2 * d1**2 + 2 * d0 * d1 * e0 * e1 + d0**2 * e1**2 + e0**2 * e1**2
    c = b * params.phi0 / K
    return HarmonicCoeffs(
        omega=omega, d0=d0, d1=d1, e0=e0, e1=e1, K=K,
        major_sin=c * (d0 * d1**2 + d1 * e0 * e1 + d0 * e1**2),
        major_cos=-c * e0 * e1**2,
        minor_sin=-c * d0 * e0 * e1,
        minor_cos=c * e0 * (d0 * d1 + e0 * e1),
    )


def rate_amplitude_phase(params: MarketParams, n: int, b: float):
    """Amplitude and phase of the periodic trading rates.

    Returns
    -------
    major, minor : AmplitudePhase
        Rates written as ``A cos(omega t - phase)``.
    major_nogame_amp : float
        Rate amplitude of the major without permanent impact.

    Raises
    ------
    DegeneratePhase
        If either periodic rate is identically zero.
    """
    hc = cosine_periodic_components(params, n, b)
    w = hc.omega
    # d/dt (s sin + c cos) = w s cos - w c sin
    major = _amp_phase(w * hc.major_sin, -w * hc.major_cos, "major")
    minor = _amp_phase(w * hc.minor_sin, -w * hc.minor_cos, "minor")
    nogame = abs(b) * params.phi0 * w / hc.d0
    return major, minor, nogame


def aggregate_rate_amplitude(params: MarketParams, n: int, b: float) -> tuple[float, float]:
    """Amplitude of the summed periodic rate of major and minor.

    Returns ``(equilibrium, nogame)``; without interaction the minor does not
    trade, so the no-game value is the major rate amplitude alone.
    """
    hc = cosine_periodic_components(params, n, b)
    s = hc.major_sin + hc.minor_sin
    c = hc.major_cos + hc.minor_cos
    eq = hc.omega * math.hypot(s, c)
    return eq, abs(b) * params.phi0 * hc.omega / hc.d0


def price_periodic_amplitude(params: MarketParams, n: int, b: float) -> tuple[float, float]:
    """Amplitude of the periodic price component, with and without interaction."""
    hc = cosine_periodic_components(params, n, b)
    d0, d1, e0, e1, K = hc.d0, hc.d1, hc.e0, hc.e1, hc.K
    eq = (2 * abs(b) * params.phi0 / (K * hc.omega)) * d1 * e0 * math.hypot(d0 * d1 + e0 * e1, d0 * e1)
    nogame = params.lambda0 * abs(b) * params.phi0 / d0
    return eq, nogame
