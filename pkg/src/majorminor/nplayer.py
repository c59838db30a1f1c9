"""Finite-population check of the mean-field equilibrium.

With ``N`` identical minors the average minor rate seen by minor ``i`` is
``((N-1)/N) v* + (1/N) v_i``; the extra own-rate term is the only thing
that separates the finite game from the mean-field one in the
deterministic regime. Each player's exact best response against opponents
frozen at the mean-field strategies is obtained from a discrete
equality-constrained quadratic program.

Discretisation: rates live on the ``n`` intervals, inventories on the
``n + 1`` nodes with trapezoid weights, and ``Q_{j+1} = Q_j + h v_j``.
Under this discretisation the finite-difference equilibrium is the exact
stationary point of the mean-field objectives.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, spsolve
import warnings

from .errors import DomainError, GridMismatch, SingularKKT
from .fdsolver import EquilibriumSolution
from .model import Grid, Inventories, MarketParams, TargetStrategy

__all__ = [
    "GapReport",
    "mf_constants",
    "theoretical_bounds",
    "best_response",
    "best_response_gap",
]


@dataclass(frozen=True)
class GapReport:
    n_players: int
    kappa: float
    k_val: float
    bound_major: float
    bound_minor: float
    eps_major: float
    eps_minor: float

    def as_dict(self) -> dict:
        return asdict(self)


def mf_constants(sol: EquilibriumSolution) -> tuple[float, float]:
    """Rate energies ``(kappa, K)`` of the mean-field strategies."""
    t = sol.t
    e_major = float(np.trapezoid(sol.v_major.values**2, t))
    e_minor = float(np.trapezoid(sol.v_minor.values**2, t))
    return max(e_major, e_minor), e_minor


def theoretical_bounds(kappa: float, k_val: float, N: int, params: MarketParams) -> tuple[float, float]:
    """Suboptimality bounds for the major and for one minor in an ``N``-player game."""
    if N < 1:
        raise DomainError("N must be at least 1")
    T = params.T
    bound_major = params.lambda_ * 2 * T * kappa / np.sqrt(N)
    bound_minor = (2 * T / N) * np.sqrt(k_val * ((N + 1) * kappa + 2 * k_val))
    return float(bound_major), float(bound_minor)


# --------------------------------------------------------------------------
# discrete objectives


def _weights(grid: Grid) -> np.ndarray:
    c = np.full(grid.n_mesh + 1, grid.h)
    c[0] = c[-1] = 0.5 * grid.h
    return c


def _node_rate(v_int: np.ndarray) -> np.ndarray:
    # forward difference at nodes, backward at the last one
    return np.concatenate([v_int, v_int[-1:]])


def _interval_rate(f) -> np.ndarray:
    return np.diff(f.values) / f.grid.h


class _Objective:
    """``J(v, Q) = 1/2 x^T H x + g^T x + const`` with ``x = (v, Q)``."""

    def __init__(self, grid, temp, risk, target, linear_q, self_coupling):
        self.grid = grid
        n = grid.n_mesh
        c = _weights(grid)
        h = grid.h
        self.n = n
        self.temp, self.risk, self.target, self.linear_q = temp, risk, target, linear_q
        self.self_coupling, self.c = self_coupling, c
        # quadratic part
        diag = np.concatenate([np.full(n, 2 * temp * h), 2 * risk * c])
        rows, cols, vals = list(range(2 * n + 1)), list(range(2 * n + 1)), list(diag)
        if self_coupling != 0.0:
            vidx = np.concatenate([np.arange(n), [n - 1]])
            qidx = n + np.arange(n + 1)
            coup = -self_coupling * c
            rows += list(qidx) + list(vidx)
            cols += list(vidx) + list(qidx)
            vals += list(coup) + list(coup)
        self.H = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n + 1, 2 * n + 1))
        self.g = np.concatenate([np.zeros(n), -2 * risk * c * target - c * linear_q])
        self.const = float(np.sum(c * risk * target**2))

    def value(self, v_int, Q) -> float:
        c = self.c
        vn = _node_rate(v_int)
        return float(
            self.temp * self.grid.h * np.sum(v_int**2)
            + np.sum(c * (self.risk * (Q - self.target) ** 2 - Q * self.linear_q))
            - self.self_coupling * np.sum(c * Q * vn)
        )

    def minimise(self, q0: float):
        n, h = self.n, self.grid.h
        # constraints: Q_0 = q0, Q_{j+1} - Q_j - h v_j = 0, Q_n = 0
        rows, cols, vals = [0], [n], [1.0]
        for j in range(n):
            r = j + 1
            rows += [r, r, r]
            cols += [n + j + 1, n + j, j]
            vals += [1.0, -1.0, -h]
        rows.append(n + 1)
        cols.append(2 * n)
        vals.append(1.0)
        C = sp.csr_matrix((vals, (rows, cols)), shape=(n + 2, 2 * n + 1))
        kkt = sp.bmat([[self.H, C.T], [C, None]], format="csc")
        rhs = np.concatenate([-self.g, [q0], np.zeros(n), [0.0]])
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            try:
                x = spsolve(kkt, rhs)
            except MatrixRankWarning as exc:
                raise SingularKKT("best-response KKT matrix is singular") from exc
        if not np.all(np.isfinite(x)):
            raise SingularKKT("best-response KKT solve produced non-finite values")
        return x[:n], x[n : 2 * n + 1]


def _major_objective(sol, target, params):
    grid = sol.grid
    R = np.asarray(target.inventory(grid.t), dtype=float)
    # risk phi0 (Q - R)^2 and cross term -lambda (Q - R) vbar; the R part of
    # the cross term does not depend on the major and is folded into const
    obj = _Objective(grid, params.a0, params.phi0, R, params.lambda_ * sol.v_minor.values, 0.0)
    extra = float(np.sum(obj.c * params.lambda_ * R * sol.v_minor.values))
    return obj, extra


def _minor_objective(sol, params, N):
    grid = sol.grid
    share = 0.0 if N is None else 1.0 / N
    linear = params.lambda0 * sol.v_major.values + params.lambda_ * (1.0 - share) * sol.v_minor.values
    return _Objective(grid, params.a, params.phi, np.zeros(grid.n_mesh + 1), linear, params.lambda_ * share)


def best_response(sol: EquilibriumSolution, target: TargetStrategy, params: MarketParams,
                  inv: Inventories, who: str, N: int | None = None):
    """Exact discrete best response against opponents at the mean-field strategies.

    ``who`` is ``"major"`` or ``"minor"``; ``N=None`` drops the minor's own
    contribution to the average rate (the mean-field problem).

    Returns
    -------
    v : ndarray
        Interval rates.
    Q : ndarray
        Node inventories.
    """
    if who == "major":
        obj, _ = _major_objective(sol, target, params)
        return obj.minimise(inv.q0_major)
    if who == "minor":
        return _minor_objective(sol, params, N).minimise(inv.q0_minor)
    raise DomainError(f"unknown player {who!r}")


def best_response_gap(sol: EquilibriumSolution, target: TargetStrategy, params: MarketParams,
                      inv: Inventories, N: int, grid: Grid) -> GapReport:
    """Empirical suboptimality of the mean-field strategies in the ``N``-player game."""
    if grid != sol.grid:
        raise GridMismatch("gap grid must equal the solution grid")
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    kappa, k_val = mf_constants(sol)
    bound_major, bound_minor = theoretical_bounds(kappa, k_val, N, params)

    major, _ = _major_objective(sol, target, params)
    v_br, Q_br = major.minimise(inv.q0_major)
    eps_major = major.value(_interval_rate(sol.q_major), sol.q_major.values) - major.value(v_br, Q_br)

    minor = _minor_objective(sol, params, N)
    v_br, Q_br = minor.minimise(inv.q0_minor)
    eps_minor = minor.value(_interval_rate(sol.q_minor), sol.q_minor.values) - minor.value(v_br, Q_br)

    return GapReport(int(N), kappa, k_val, bound_major, bound_minor, float(eps_major), float(eps_minor))
