"""Cosine target: how competition reshapes the oscillating part of execution.

Solves the equilibrium for a cosine-modulated liquidation target, splits it
into a periodic and a trend part, and compares the periodic trading rates
with the benchmark where the major trades alone. Closed-form harmonic
amplitudes and phases are printed next to the finite-difference numbers.

    python demos/cosine_target.py
"""

import math

from majorminor.analysis import amplitude, evaluate_costs, periodic_rate
from majorminor.closedform import aggregate_rate_amplitude, rate_amplitude_phase
from majorminor.fdsolver import solve_equilibrium, solve_periodic
from majorminor.model import Cosine, Grid, Inventories, periodic_residual
from majorminor.presets import BASE_PARAMS as params

b, n = 1 / (2 * math.pi), 10
target = Cosine(q0=10.0, T=params.T, n=n, b=b)
inv = Inventories(10.0, 0.0)
grid = Grid.from_step(params.T, 1e-3)

print("Costs (total) at h = 1e-3")
for label, p in (("equilibrium", params), ("major alone", params.without_interaction())):
    major, minor = evaluate_costs(solve_equilibrium(p, inv, target, grid), target, p)
    print(f"  {label:12s} major {major.total:+.5f}   minor {minor.total:+.5f}")

print("\nPeriodic component of the aggregate trading rate")
grid_per = Grid.from_step(params.T / n, 1e-3)
for label, p in (("equilibrium", params), ("major alone", params.without_interaction())):
    pm, pn, _ = solve_periodic(p, periodic_residual(target), n, grid_per)
    fd = amplitude(periodic_rate(pm).values + periodic_rate(pn).values)
    print(f"  {label:12s} finite differences {fd:.6f}")
eq, ng = aggregate_rate_amplitude(params, n, b)
print(f"  closed form  equilibrium {eq:.6f}   major alone {ng:.6f}")

major, minor, _ = rate_amplitude_phase(params, n, b)
print("\nPhases of the periodic rates, A cos(wt - phase)")
print(f"  major  amplitude {major.amplitude:.4f}  phase {major.phase:+.4f}")
print(f"  minor  amplitude {minor.amplitude:.4f}  phase {minor.phase:+.4f}")
print("  the minor's rate leads the major's in phase")
