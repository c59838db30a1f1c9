"""Finite-difference equilibrium solver and its periodic/trend decomposition.

The equilibrium inventories ``z`` (major) and ``w`` (representative minor)
solve the coupled boundary value problem

    a0 z'' - phi0 z + (lambda/2) w'                  = -phi0 R
    a  w'' - phi  w + (lambda0/2) z' + (lambda/2) w' = 0

discretised with central second differences and forward first differences.
Unknowns are interleaved as ``(z_1, w_1, z_2, w_2, ...)`` which makes the
matrix banded with two sub- and three super-diagonals; it is factored once
with LAPACK ``gbtrf`` and reused for every right-hand side.

A second, independent route to the periodic component uses the first-order
matrix form ``X' = A X + B`` and the periodicity condition
``X0 = (I - e^{A T_p})^{-1} int_0^{T_p} e^{A (T_p - s)} B_s ds``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import expm
from scipy.linalg.lapack import dgbtrf, dgbtrs

from .errors import DomainError, GridMismatch, NonConvergence, SingularMatrix, SingularSystem
from .model import Grid, GridFn, Inventories, MarketParams, TargetStrategy, TwapStep

__all__ = [
    "EquilibriumSolution",
    "Decomposition",
    "SolveOptions",
    "OracleTrajectory",
    "solve_equilibrium",
    "solve_periodic",
    "solve_trend",
    "periodic_oracle_matrix",
    "assemble_decomposition",
    "discrete_residuals",
]


@dataclass(frozen=True)
class EquilibriumSolution:
    q_major: GridFn
    q_minor: GridFn
    v_major: GridFn
    v_minor: GridFn

    @property
    def grid(self) -> Grid:
        return self.q_major.grid

    @property
    def t(self) -> np.ndarray:
        return self.q_major.grid.t

    @classmethod
    def from_inventories(cls, q_major: GridFn, q_minor: GridFn) -> "EquilibriumSolution":
        return cls(q_major, q_minor, q_major.forward_rate(), q_minor.forward_rate())


@dataclass(frozen=True)
class Decomposition:
    periodic_major: GridFn
    periodic_minor: GridFn
    trend_major: GridFn
    trend_minor: GridFn
    q0_per: tuple[float, float]


@dataclass(frozen=True)
class SolveOptions:
    max_iter: int = 200
    tol: float = 1e-10
    oracle_quadrature_steps: int = 20000

    def __post_init__(self):
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError("max_iter must be a positive integer")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if int(self.oracle_quadrature_steps) != self.oracle_quadrature_steps or self.oracle_quadrature_steps < 2:
            raise DomainError("oracle_quadrature_steps must be an integer >= 2")


# --------------------------------------------------------------------------
# banded linear system

_KL, _KU = 2, 3


class _BandedSystem:
    """LU-factored discrete operator for ``n_mesh`` steps of size ``h``."""

    def __init__(self, params: MarketParams, h: float, n_mesh: int):
        self.params, self.h, self.m = params, h, n_mesh - 1
        if self.m == 0:
            return
        a0, a, lam0, lam = params.a0, params.a, params.lambda0, params.lambda_
        N = 2 * self.m
        ab = np.zeros((2 * _KL + _KU + 1, N))

        def put(row, col, val):
            ab[_KL + _KU + row - col, col] = val

        for j in range(self.m):
            r = 2 * j
            # major row at node j+1
            put(r, r, -2 * a0 / h**2 - params.phi0)
            put(r, r + 1, -lam / (2 * h))
            if j > 0:
                put(r, r - 2, a0 / h**2)
            if j < self.m - 1:
                put(r, r + 2, a0 / h**2)
                put(r, r + 3, lam / (2 * h))
            # minor row at node j+1
            put(r + 1, r + 1, -2 * a / h**2 - params.phi - lam / (2 * h))
            put(r + 1, r, -lam0 / (2 * h))
            if j > 0:
                put(r + 1, r - 1, a / h**2)
            if j < self.m - 1:
                put(r + 1, r + 3, a / h**2 + lam / (2 * h))
                put(r + 1, r + 2, lam0 / (2 * h))
        lu, piv, info = dgbtrf(ab, _KL, _KU)
        if info != 0:
            raise SingularSystem(f"banded LU failed (info={info})")
        self._lu, self._piv = lu, piv

    def solve(self, src_major, src_minor, z_ends, w_ends):
        """Interior values given row sources and pinned end values."""
        if self.m == 0:
            return np.array(z_ends, float), np.array(w_ends, float)
        p, h = self.params, self.h
        b1 = np.array(src_major, dtype=float)
        b2 = np.array(src_minor, dtype=float)
        (z0, zN), (w0, wN) = z_ends, w_ends
        b1[0] -= p.a0 / h**2 * z0
        b1[-1] -= p.a0 / h**2 * zN + p.lambda_ / (2 * h) * wN
        b2[0] -= p.a / h**2 * w0
        b2[-1] -= (p.a / h**2 + p.lambda_ / (2 * h)) * wN + p.lambda0 / (2 * h) * zN
        rhs = np.empty(2 * self.m)
        rhs[0::2], rhs[1::2] = b1, b2
        x, info = dgbtrs(self._lu, _KL, _KU, rhs, self._piv)
        if info != 0 or not np.all(np.isfinite(x)):
            raise SingularSystem("banded solve produced non-finite values")
        z = np.concatenate([[z0], x[0::2], [zN]])
        w = np.concatenate([[w0], x[1::2], [wN]])
        return z, w


def discrete_residuals(params: MarketParams, z, w, h: float, src_major, src_minor):
    """Row residuals of the discrete system at interior nodes.

    ``src_major``/``src_minor`` are the right-hand sides at interior nodes
    (``-phi0 R_j`` and ``0`` for the equilibrium problem).
    """
    z, w = np.asarray(z, float), np.asarray(w, float)
    d2z = (z[2:] - 2 * z[1:-1] + z[:-2]) / h**2
    d2w = (w[2:] - 2 * w[1:-1] + w[:-2]) / h**2
    dz = (z[2:] - z[1:-1]) / h
    dw = (w[2:] - w[1:-1]) / h
    r1 = params.a0 * d2z - params.phi0 * z[1:-1] + params.lambda_ / 2 * dw - src_major
    r2 = params.a * d2w - params.phi * w[1:-1] + params.lambda0 / 2 * dz + params.lambda_ / 2 * dw - src_minor
    return r1, r2


# --------------------------------------------------------------------------
# full equilibrium


def solve_equilibrium(
    params: MarketParams, inv: Inventories, target: TargetStrategy, grid: Grid
) -> EquilibriumSolution:
    """Solve the discrete equilibrium system on ``grid``.

    Raises
    ------
    DomainError
        If ``target`` is a TWAP step whose jump times miss the grid nodes.
    SingularSystem
        If the banded factorisation breaks down.
    """
    if abs(target.T - grid.T) > 1e-12 * grid.T or abs(params.T - grid.T) > 1e-12 * grid.T:
        raise GridMismatch("target, parameters and grid must share the horizon T")
    if isinstance(target, TwapStep) and not grid.aligned_with(target.period):
        raise DomainError(f"grid step {grid.h} does not divide the trading period {target.period}")
    R = np.asarray(target.inventory(grid.t), dtype=float)
    system = _BandedSystem(params, grid.h, grid.n_mesh)
    z, w = system.solve(
        -params.phi0 * R[1:-1], np.zeros(grid.n_mesh - 1),
        (inv.q0_major, 0.0), (inv.q0_minor, 0.0),
    )
    return EquilibriumSolution.from_inventories(GridFn(grid, z), GridFn(grid, w))


# --------------------------------------------------------------------------
# periodic component


def _period_grid_check(params, n, grid_per):
    period = params.T / n
    if abs(grid_per.T - period) > 1e-12 * period:
        raise GridMismatch(f"period grid spans {grid_per.T}, expected T/n = {period}")


def _sample_residual(residual, grid_per: Grid) -> np.ndarray:
    # one-period samples; the residual may live on [0, T] with T > T/n
    return np.asarray(residual.inventory(grid_per.t), dtype=float)


def solve_periodic(
    params: MarketParams, residual: TargetStrategy, n: int, grid_per: Grid, opts: SolveOptions | None = None
):
    """Periodic equilibrium component by averaged boundary-value iteration.

    Each sweep solves the discrete equilibrium system with both traders'
    end values pinned at the current guess ``q_per`` over a horizon of
    several periods, reads the solution at the end of the first period,
    and relaxes ``q_per <- (q_per + value) / 2``. At the fixed point the
    first period is the discrete periodic solution.

    Returns
    -------
    periodic_major, periodic_minor : GridFn
        One period of each component, on ``grid_per``.
    q0_per : tuple of float
        Initial values of the two periodic components.
    """
    opts = opts or SolveOptions()
    _period_grid_check(params, n, grid_per)
    n_per = grid_per.n_mesh
    periods = max(int(n), 2)
    one = _sample_residual(residual, grid_per)
    tiled = np.concatenate([np.tile(one[:-1], periods), one[-1:]])
    system = _BandedSystem(params, grid_per.h, periods * n_per)
    src_major = -params.phi0 * tiled[1:-1]
    src_minor = np.zeros_like(src_major)

    zq = wq = 0.0
    delta = np.inf
    for _ in range(opts.max_iter):
        z, w = system.solve(src_major, src_minor, (zq, zq), (wq, wq))
        new_z, new_w = 0.5 * (zq + z[n_per]), 0.5 * (wq + w[n_per])
        delta = max(abs(new_z - zq), abs(new_w - wq))
        zq, wq = new_z, new_w
        if delta < opts.tol:
            z, w = system.solve(src_major, src_minor, (zq, zq), (wq, wq))
            major = z[: n_per + 1].copy()
            minor = w[: n_per + 1].copy()
            major[-1], minor[-1] = major[0], minor[0]
            return GridFn(grid_per, major), GridFn(grid_per, minor), (float(zq), float(wq))
    raise NonConvergence(
        f"periodic iteration did not reach tol={opts.tol} in {opts.max_iter} sweeps "
        f"(last update {delta:.3e})",
        last_update=delta,
    )


# --------------------------------------------------------------------------
# trend component


def solve_trend(params: MarketParams, inv: Inventories, q0_per, grid: Grid):
    """Trend components: same operator, constant minor source, shifted boundaries."""
    zp, wp = q0_per
    system = _BandedSystem(params, grid.h, grid.n_mesh)
    m = grid.n_mesh - 1
    src_minor = np.full(m, params.lambda0 * inv.q0_major / (2 * params.T))
    z, w = system.solve(np.zeros(m), src_minor, (-zp, -zp), (inv.q0_minor - wp, -wp))
    return GridFn(grid, z), GridFn(grid, w)


def assemble_decomposition(periodic, trend, inv: Inventories, n: int):
    """Tile the periodic part over the horizon and add the D-TWAP line and trend.

    Returns
    -------
    Decomposition, EquilibriumSolution
    """
    per_major, per_minor = periodic
    tr_major, tr_minor = trend
    grid_per, grid = per_major.grid, tr_major.grid
    if per_minor.grid != grid_per or tr_minor.grid != grid:
        raise GridMismatch("major and minor parts must share their grids")
    if grid.n_mesh != n * grid_per.n_mesh or abs(grid.h - grid_per.h) > 1e-12 * grid.h:
        raise GridMismatch("period grid does not tile the horizon grid")

    def tile(f: GridFn) -> GridFn:
        vals = np.concatenate([np.tile(f.values[:-1], n), f.values[:1]])
        return GridFn(grid, vals)

    pm, pn = tile(per_major), tile(per_minor)
    line = inv.q0_major * (1.0 - grid.t / grid.T)
    q_major = GridFn(grid, line + pm.values + tr_major.values)
    q_minor = GridFn(grid, pn.values + tr_minor.values)
    decomp = Decomposition(pm, pn, tr_major, tr_minor, (float(per_major.values[0]), float(per_minor.values[0])))
    return decomp, EquilibriumSolution.from_inventories(q_major, q_minor)


# --------------------------------------------------------------------------
# matrix-exponential oracle


def _system_matrix(params: MarketParams) -> np.ndarray:
    p = params
    return np.array(
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [p.phi0 / p.a0, 0.0, 0.0, -p.lambda_ / (2 * p.a0)],
            [0.0, p.phi / p.a, -p.lambda0 / (2 * p.a), -p.lambda_ / (2 * p.a)],
        ]
    )


class OracleTrajectory:
    """Periodic state ``X_t = (Q_major, Q_minor, v_major, v_minor)``.

    Calling the object with times returns an array of shape ``(len(t), 4)``;
    times are reduced modulo the period.
    """

    def __init__(self, A, s, forcing, X0, period):
        self.period = period
        delta = s[1] - s[0]
        E = expm(A * delta)
        X = np.empty((len(s), 4))
        X[0] = X0
        Bj = np.zeros(4)
        Bn = np.zeros(4)
        for j in range(len(s) - 1):
            Bj[2], Bn[2] = forcing[j], forcing[j + 1]
            X[j + 1] = E @ X[j] + 0.5 * delta * (E @ Bj + Bn)
        B = np.zeros_like(X)
        B[:, 2] = forcing
        self.nodes, self.states = s, X
        self._spline = CubicHermiteSpline(s, X, X @ A.T + B, axis=0)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tm = np.mod(t, self.period)
        # values that land on the right end after rounding belong to it
        tm = np.where(np.isclose(tm, self.period, rtol=0, atol=1e-12 * self.period), self.period, tm)
        return self._spline(tm)


def periodic_oracle_matrix(params: MarketParams, residual: TargetStrategy, n: int, opts: SolveOptions | None = None):
    """Unique periodic initial state of the first-order system.

    Returns
    -------
    X0 : ndarray of shape (4,)
        ``(Q_major, Q_minor, v_major, v_minor)`` of the periodic component at 0.
    trajectory : OracleTrajectory
        Evaluator of the periodic state at arbitrary times.

    Raises
    ------
    SingularMatrix
        If ``I - exp(A T/n)`` cannot be inverted reliably.
    """
    opts = opts or SolveOptions()
    Tp = params.T / n
    M = opts.oracle_quadrature_steps
    A = _system_matrix(params)
    s = np.linspace(0.0, Tp, M + 1)
    # one-sided limits at the ends so that jumps at period boundaries are
    # integrated as the piecewise-smooth function they are
    s_eval = s.copy()
    s_eval[0] += 1e-8 * Tp
    s_eval[-1] -= 1e-8 * Tp
    forcing = -params.phi0 / params.a0 * np.asarray(residual.inventory(s_eval), dtype=float)

    delta = Tp / M
    E = expm(A * delta)
    # integral of e^{A (Tp - s)} B_s ds; only the third component of B is nonzero
    col = np.array([0.0, 0.0, 1.0, 0.0])
    acc = 0.5 * forcing[-1] * col
    for j in range(M - 1, -1, -1):
        col = E @ col
        acc += (0.5 if j == 0 else 1.0) * forcing[j] * col
    integral = delta * acc

    monodromy = expm(A * Tp)
    lhs = np.eye(4) - monodromy
    if np.linalg.cond(lhs) > 1e12:
        raise SingularMatrix("I - exp(A T/n) is numerically singular")
    X0 = np.linalg.solve(lhs, integral)
    return X0, OracleTrajectory(A, s, forcing, X0, Tp)
