"""Costs, prices and periodicity measures computed from solved trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d

from .errors import DomainError, GridMismatch
from .fdsolver import EquilibriumSolution
from .model import GridFn, MarketParams, TargetStrategy

__all__ = [
    "CostBreakdown",
    "SpectralEstimate",
    "evaluate_costs",
    "optimal_cost_shortcut",
    "price_path",
    "amplitude",
    "periodic_rate",
    "spectral_amplitudes",
    "detrend",
]


@dataclass(frozen=True)
class CostBreakdown:
    """Cost of one trader split into its three parts.

    ``profit_q`` and ``profit_r`` carry the sign under which they enter the
    cost: ``total = -profit_q + profit_r + risk`` for the major and
    ``total = -profit_q + risk`` for the minor (``profit_r = 0``).
    """

    profit_q: float
    profit_r: float
    risk: float
    total: float

    def as_dict(self) -> dict:
        return {
            "profit_q": self.profit_q,
            "profit_r": self.profit_r,
            "risk": self.risk,
            "total": self.total,
        }


@dataclass(frozen=True)
class SpectralEstimate:
    amplitudes: np.ndarray  # index k-1 holds |A_k|

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, len(self.amplitudes) + 1)

    def top(self, count: int = 2) -> np.ndarray:
        """Mode numbers of the ``count`` largest amplitudes, largest first."""
        order = np.argsort(-self.amplitudes, kind="stable")
        return self.k[order[:count]]


def _integrate(y, t) -> float:
    return float(np.trapezoid(y, t))


def evaluate_costs(sol: EquilibriumSolution, target: TargetStrategy, params: MarketParams):
    """Trapezoid quadrature of both traders' cost functionals.

    Returns
    -------
    major, minor : CostBreakdown
    """
    t = sol.t
    if abs(target.T - sol.grid.T) > 1e-12 * sol.grid.T:
        raise GridMismatch("target horizon differs from the solution grid")
    R = np.asarray(target.inventory(t), dtype=float)
    Q, q = sol.q_major.values, sol.q_minor.values
    v, u = sol.v_major.values, sol.v_minor.values
    p = params

    profit_q = p.lambda_ * _integrate(Q * u, t) - p.a0 * _integrate(v**2, t)
    profit_r = p.lambda_ * _integrate(R * u, t)
    risk = p.phi0 * _integrate((Q - R) ** 2, t)
    major = CostBreakdown(profit_q, profit_r, risk, -profit_q + profit_r + risk)

    m_profit = _integrate(q * (p.lambda0 * v + p.lambda_ * u), t) - p.a * _integrate(u**2, t)
    m_risk = p.phi * _integrate(q**2, t)
    minor = CostBreakdown(m_profit, 0.0, m_risk, -m_profit + m_risk)
    return major, minor


def optimal_cost_shortcut(sol: EquilibriumSolution, target: TargetStrategy, params: MarketParams):
    """Equilibrium costs through the reduced formulas valid at the optimum.

    Only differentiable targets are supported, since the major's term
    integrates the major rate against ``dR``.

    Raises
    ------
    NotDifferentiable
        For targets with jumps.
    """
    t = sol.t
    Rdot = np.asarray(target.rate(t), dtype=float)
    R = np.asarray(target.inventory(t), dtype=float)
    Q, q = sol.q_major.values, sol.q_minor.values
    v, u = sol.v_major.values, sol.v_minor.values
    p = params
    j_major = p.a0 * _integrate(v * Rdot, t) - 0.5 * p.lambda_ * _integrate((Q - R) * u, t)
    j_minor = p.a * q[0] * u[0] - 0.5 * _integrate(q * (p.lambda0 * v + p.lambda_ * u), t)
    return j_major, j_minor


def price_path(sol: EquilibriumSolution, params: MarketParams) -> GridFn:
    """Drift of the mid price: permanent impact of both inventories, ``S_0 = 0``."""
    Q, q = sol.q_major.values, sol.q_minor.values
    S = params.lambda0 * (Q - Q[0]) + params.lambda_ * (q - q[0])
    return GridFn(sol.grid, S)


def amplitude(series) -> float:
    """Half the range of the sampled values."""
    vals = np.asarray(series, dtype=float)
    return 0.5 * float(vals.max() - vals.min())


def periodic_rate(f: GridFn) -> GridFn:
    """Forward-difference rate of a one-period function, wrapping at the end."""
    vals = f.values
    v = np.empty_like(vals)
    v[:-1] = np.diff(vals) / f.grid.h
    v[-1] = v[0]
    return GridFn(f.grid, v)


# --------------------------------------------------------------------------
# spectra


def detrend(values, t, method: str = "affine", degree: int = 1, window: float = 1.0) -> np.ndarray:
    """Remove a slowly varying component from ``values``.

    Parameters
    ----------
    method : {"affine", "poly", "moving_average", "none"}
        ``affine`` and ``poly`` subtract a least-squares polynomial fit in
        ``t`` (of degree 1 and ``degree``); ``moving_average`` subtracts a
        centred running mean over ``window`` time units.
    """
    values = np.asarray(values, dtype=float)
    t = np.asarray(t, dtype=float)
    if method == "none":
        return values.copy()
    if method in ("affine", "poly"):
        deg = 1 if method == "affine" else int(degree)
        fit = np.polynomial.Polynomial.fit(t, values, deg)
        return values - fit(t)
    if method == "moving_average":
        h = t[1] - t[0]
        size = int(round(window / h)) + 1
        return values - uniform_filter1d(values, size=size, mode="nearest")
    raise DomainError(f"unknown detrending method {method!r}")


def spectral_amplitudes(series: GridFn, kmax: int, method: str = "affine", **detrend_kw) -> SpectralEstimate:
    """Fourier mode magnitudes ``|A_k| = (2/T) |int f~(t) exp(-2 pi i k t/T) dt|``.

    The integral is the trapezoid rule on the series grid, evaluated for all
    modes at once with an FFT (the grid is uniform and the kernel is
    ``T``-periodic, so only the two end weights differ from a plain sum).
    """
    grid = series.grid
    n = grid.n_mesh
    if not 1 <= kmax <= n // 2:
        raise DomainError(f"kmax must lie in [1, {n // 2}]")
    g = detrend(series.values, grid.t, method, **detrend_kw)
    spectrum = grid.h * (np.fft.fft(g[:n])[1 : kmax + 1] + 0.5 * (g[n] - g[0]))
    return SpectralEstimate(2.0 / grid.T * np.abs(spectrum))
