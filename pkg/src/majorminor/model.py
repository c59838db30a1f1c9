"""Domain types: market parameters, grids, and the major trader's targets.

Targets are deterministic inventory schedules ``R`` with ``R(0) = q0`` and
``R(T) = 0``. Every target is a frozen dataclass exposing ``inventory(t)``
(vectorised over numpy arrays); differentiable targets also expose
``rate(t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, GridMismatch, NotDifferentiable, NotPeriodic

__all__ = [
    "MarketParams",
    "Inventories",
    "Grid",
    "GridFn",
    "DTwap",
    "Cosine",
    "TwapStep",
    "SampledRate",
    "PeriodicResidual",
    "TargetStrategy",
    "ValidationReport",
    "validate_params",
    "check_witness",
    "target_inventory",
    "target_rate",
    "periodic_residual",
]

# jump detection for TwapStep, in units of one period
_JUMP_TOL = 1e-10


@dataclass(frozen=True)
class MarketParams:
    """Impact, penalty and horizon constants of the game.

    ``sigma`` is carried for completeness only; the deterministic solvers
    never read it.
    """

    a0: float
    a: float
    lambda0: float
    lambda_: float
    phi0: float
    phi: float
    T: float
    sigma: float = 0.0

    def __post_init__(self):
        for name in ("a0", "a", "phi0", "phi", "T"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        for name in ("lambda0", "lambda_", "sigma"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be non-negative, got {value!r}")

    def without_interaction(self) -> "MarketParams":
        """Copy with both permanent impacts switched off."""
        return self.replace(lambda0=0.0, lambda_=0.0)

    def replace(self, **changes) -> "MarketParams":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return MarketParams(**values)


@dataclass(frozen=True)
class Inventories:
    q0_major: float
    q0_minor: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.q0_major) and np.isfinite(self.q0_minor)):
            raise DomainError("initial inventories must be finite")


# --------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class Grid:
    """Uniform time grid ``t_i = i h`` for ``i = 0..n_mesh``."""

    T: float
    n_mesh: int

    def __post_init__(self):
        if not (self.T > 0 and np.isfinite(self.T)):
            raise DomainError(f"grid horizon must be positive, got {self.T!r}")
        if int(self.n_mesh) != self.n_mesh or self.n_mesh < 1:
            raise DomainError(f"n_mesh must be a positive integer, got {self.n_mesh!r}")

    @classmethod
    def from_step(cls, T: float, h: float) -> "Grid":
        if not h > 0:
            raise DomainError(f"grid step must be positive, got {h!r}")
        n = int(round(T / h))
        if n < 1 or abs(n * h - T) > 1e-12 * T:
            raise DomainError(f"step h={h} does not divide the horizon T={T}")
        return cls(T=T, n_mesh=n)

    @property
    def h(self) -> float:
        return self.T / self.n_mesh

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_mesh + 1)

    def aligned_with(self, period: float) -> bool:
        """True when ``period`` is an integer multiple of the step."""
        ratio = period / self.h
        return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, ratio) and round(ratio) >= 1


@dataclass(frozen=True, eq=False)
class GridFn:
    """A scalar function tabulated on the nodes of a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_mesh + 1,):
            raise GridMismatch(
                f"expected {self.grid.n_mesh + 1} values, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def _check(self, other):
        if isinstance(other, GridFn):
            if other.grid != self.grid:
                raise GridMismatch("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFn(self.grid, self.values + self._check(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFn(self.grid, self.values - self._check(other))

    def __mul__(self, other):
        return GridFn(self.grid, self.values * self._check(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFn(self.grid, -self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def forward_rate(self) -> "GridFn":
        """Forward differences, with a backward difference at the last node."""
        v = np.empty_like(self.values)
        v[:-1] = np.diff(self.values) / self.grid.h
        v[-1] = v[-2] if len(v) > 1 else 0.0
        return GridFn(self.grid, v)


# --------------------------------------------------------------------------
# targets


def _as_float_array(t):
    return np.asarray(t, dtype=float)


def _check_time(t, T):
    arr = _as_float_array(t)
    tol = 1e-12 * T
    if np.any(arr < -tol) or np.any(arr > T + tol):
        raise DomainError(f"time outside [0, {T}]")
    return np.clip(arr, 0.0, T)


@dataclass(frozen=True)
class DTwap:
    """Differentiable TWAP: constant selling rate ``-q0/T``."""

    q0: float
    T: float
    n: int = 1

    def inventory(self, t):
        t = _check_time(t, self.T)
        return self.q0 * (1.0 - t / self.T)

    def rate(self, t):
        t = _check_time(t, self.T)
        return np.full_like(t, -self.q0 / self.T)


@dataclass(frozen=True)
class Cosine:
    """``q0 (1 - t/T) + b sin(2 pi n t / T)``."""

    q0: float
    T: float
    n: int
    b: float

    def __post_init__(self):
        _check_periods(self.n)

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.n / self.T

    def inventory(self, t):
        t = _check_time(t, self.T)
        return self.q0 * (1.0 - t / self.T) + self.b * np.sin(self.omega * t)

    def rate(self, t):
        t = _check_time(t, self.T)
        return -self.q0 / self.T + self.b * self.omega * np.cos(self.omega * t)


@dataclass(frozen=True)
class TwapStep:
    """Discrete TWAP trading ``q0/n`` shares at each ``t = kT/n``.

    At a jump time the inventory takes the post-trade value ``(n-k)/n q0``;
    on the open interval before it, the midpoint ``(2n-2k+1)/(2n) q0``.
    """

    q0: float
    T: float
    n: int

    def __post_init__(self):
        _check_periods(self.n)

    @property
    def period(self) -> float:
        return self.T / self.n

    def _position(self, t):
        x = _check_time(t, self.T) * self.n / self.T
        k = np.rint(x)
        on_jump = np.abs(x - k) <= _JUMP_TOL
        return x, k, on_jump

    def inventory(self, t):
        x, k, on_jump = self._position(t)
        n, q0 = self.n, self.q0
        at_jump = (n - k) / n * q0
        k_open = np.floor(x) + 1  # interval ((k-1)T/n, kT/n)
        between = (2 * n - 2 * k_open + 1) / (2 * n) * q0
        return np.where(on_jump, at_jump, between)

    def rate(self, t):
        raise NotDifferentiable("a TWAP step target has jumps and no trading rate")


@dataclass(frozen=True, eq=False)
class SampledRate:
    """Target given by trading-rate samples on a uniform grid over [0, T].

    The inventory is ``q0`` plus the exact integral of the piecewise-linear
    interpolant of the samples, so at sample nodes it coincides with the
    cumulative trapezoid rule.
    """

    rates: np.ndarray
    q0: float
    T: float
    n: int | None = None
    terminal_tol: float = 1e-9
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rates = np.array(self.rates, dtype=float)
        if rates.ndim != 1 or len(rates) < 2 or not np.all(np.isfinite(rates)):
            raise DomainError("rate samples must be a finite 1-d array of length >= 2")
        rates.setflags(write=False)
        object.__setattr__(self, "rates", rates)
        step = self.T / (len(rates) - 1)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * step * (rates[1:] + rates[:-1]))])
        cum.setflags(write=False)
        object.__setattr__(self, "_cum", cum)
        terminal = self.q0 + cum[-1]
        if abs(terminal) > self.terminal_tol * max(abs(self.q0), 1.0):
            raise DomainError(
                f"rate samples integrate to {cum[-1]:.12g}, not -q0={-self.q0:.12g}"
            )
        if self.n is not None:
            _check_periods(self.n)

    @classmethod
    def from_function(cls, rate_fn, q0, T, n_samples, **kwargs) -> "SampledRate":
        t = np.linspace(0.0, T, n_samples + 1)
        return cls(rates=rate_fn(t), q0=q0, T=T, **kwargs)

    @property
    def step(self) -> float:
        return self.T / (len(self.rates) - 1)

    def _locate(self, t):
        t = _check_time(t, self.T)
        s = t / self.step
        j = np.minimum(np.floor(s).astype(int), len(self.rates) - 2)
        return j, (s - j) * self.step

    def inventory(self, t):
        j, tau = self._locate(t)
        r0, r1 = self.rates[j], self.rates[j + 1]
        slope = (r1 - r0) / self.step
        return self.q0 + self._cum[j] + r0 * tau + 0.5 * slope * tau**2

    def rate(self, t):
        j, tau = self._locate(t)
        r0, r1 = self.rates[j], self.rates[j + 1]
        return r0 + (r1 - r0) * tau / self.step


@dataclass(frozen=True)
class PeriodicResidual:
    """``R_t - q0 (1 - t/T)`` for a periodic target ``R``."""

    base: "TargetStrategy"

    @property
    def T(self) -> float:
        return self.base.T

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def q0(self) -> float:
        return 0.0

    @property
    def period(self) -> float:
        return self.base.T / self.base.n

    def inventory(self, t):
        t = _check_time(t, self.T)
        return self.base.inventory(t) - self.base.q0 * (1.0 - t / self.T)

    def rate(self, t):
        return self.base.rate(t) + self.base.q0 / self.T


TargetStrategy = Union[DTwap, Cosine, TwapStep, SampledRate, PeriodicResidual]


def _check_periods(n):
    if int(n) != n or n < 1:
        raise DomainError(f"number of periods must be a positive integer, got {n!r}")


def target_inventory(target: TargetStrategy, t):
    """Inventory ``R_t`` of the target; scalar in, scalar out."""
    out = target.inventory(t)
    return float(out) if np.ndim(out) == 0 else out


def target_rate(target: TargetStrategy, t):
    """Trading rate ``dR/dt``; raises :class:`NotDifferentiable` for step targets."""
    out = target.rate(t)
    return float(out) if np.ndim(out) == 0 else out


def periodic_residual(target: TargetStrategy) -> TargetStrategy:
    """Round-trip part of a periodic target after removing the D-TWAP line.

    Cosine targets map to a zero-drift cosine in closed form; other periodic
    targets are wrapped in :class:`PeriodicResidual`.
    """
    if isinstance(target, Cosine):
        return Cosine(q0=0.0, T=target.T, n=target.n, b=target.b)
    if isinstance(target, DTwap):
        return DTwap(q0=0.0, T=target.T, n=target.n)
    if isinstance(target, TwapStep):
        return PeriodicResidual(target)
    if isinstance(target, SampledRate) and target.n is not None:
        residual = PeriodicResidual(target)
        nodes = np.arange(target.n + 1) * target.T / target.n
        if np.max(np.abs(residual.inventory(nodes))) > 1e-9 * max(abs(target.q0), 1.0):
            raise NotPeriodic("sampled target does not return to the D-TWAP line at kT/n")
        return residual
    if isinstance(target, PeriodicResidual):
        return target
    raise NotPeriodic(f"{type(target).__name__} is not declared periodic")


# --------------------------------------------------------------------------
# feasibility of the weak-interaction condition


@dataclass(frozen=True)
class ValidationReport:
    feasible: bool
    witness: tuple[float, float, float] | None = None
    violated: tuple[str, ...] = ()


def check_witness(params: MarketParams, theta: Sequence[float]) -> list[str]:
    """Names of the four inequalities that ``theta`` fails (empty if none)."""
    t1, t2, t3 = theta
    lam0, lam = params.lambda0, params.lambda_
    failed = []
    if not min(t1, t2, t3) > 0:
        failed.append("positivity")
    if not t2 > lam0 / 2:
        failed.append("theta2_exceeds_half_lambda0")
    if lam > 0:
        if not 1.0 / (1.0 / t1 + 1.0 / t3) > lam / 2:
            failed.append("harmonic_mean_exceeds_half_lambda")
        if not t1 < 8 * params.phi0 * params.a / lam:
            failed.append("theta1_below_penalty_bound")
    if not (lam0 / params.a0) * t2 + (lam / params.a) * t3 < 8 * params.phi:
        failed.append("impact_budget_below_8phi")
    return failed


def validate_params(params: MarketParams) -> ValidationReport:
    """Decide whether positive ``theta1..theta3`` satisfying the weak-interaction
    inequalities exist, and return a verified witness when they do.

    The infimum of the left side of the budget inequality is reached by
    pushing ``theta2`` down to ``lambda0/2``, ``theta1`` up to
    ``8 phi0 a / lambda`` and ``theta3`` down to the smallest value keeping
    the harmonic mean above ``lambda/2``. Feasibility is strictness of the
    budget at that infimum; the witness backs off from it geometrically.
    """
    lam0, lam = params.lambda0, params.lambda_
    budget = 8 * params.phi
    if lam > 0:
        # theta1 < U = 8 phi0 a / lambda must leave room above lambda/2,
        # i.e. r = lambda^2 / (16 phi0 a) < 1
        r = lam**2 / (16 * params.phi0 * params.a)
        if not r < 1:
            return ValidationReport(False, None, ("theta1_bound_below_half_lambda",))
        upper1 = 8 * params.phi0 * params.a / lam
        t3_inf = (lam / 2) / (1 - r)
        inf_cost = (lam0 / params.a0) * (lam0 / 2) + (lam / params.a) * t3_inf
    else:
        upper1 = None
        inf_cost = (lam0 / params.a0) * (lam0 / 2)
    if not inf_cost < budget:
        return ValidationReport(False, None, ("impact_budget_below_8phi",))

    for k in range(1, 200):
        eta = 0.5**k
        t1 = upper1 * (1 - eta) if upper1 is not None and math.isfinite(upper1) else 1.0
        t2 = lam0 / 2 * (1 + eta)
        if not t2 > lam0 / 2:  # lambda0 == 0 or subnormal
            t2 = lam0 / 2 + eta
        if lam > 0:
            t3 = (lam / 2) * t1 / (t1 - lam / 2) * (1 + eta)
        else:
            t3 = 1.0
        if t1 > 0 and (upper1 is None or t1 > lam / 2) and not check_witness(params, (t1, t2, t3)):
            return ValidationReport(True, (t1, t2, t3), ())
    # only reachable when the margin is below double precision
    return ValidationReport(False, None, ("margin_below_machine_precision",))
