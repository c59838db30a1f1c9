"""VWAP-like target: Fourier content of trading rates and prices.

The target follows a U-shaped volume profile with intraday oscillations.
There is no exact periodic component here, so periodicity is measured from
the Fourier magnitudes of the detrended series. Affine detrending leaves the
U-shaped trend in the low modes; the script shows how much of the spectrum
that leakage occupies next to the k = 10 and k = 20 modes.

    python demos/vwap_spectrum.py
"""

import numpy as np

from majorminor.analysis import evaluate_costs, price_path, spectral_amplitudes
from majorminor.fdsolver import solve_equilibrium
from majorminor.model import Grid, Inventories
from majorminor.presets import BASE_PARAMS as params, vwap_target

h = 1e-3
grid = Grid.from_step(params.T, h)
target = vwap_target(h)
inv = Inventories(10.0, 0.0)
nash = solve_equilibrium(params, inv, target, grid)
alone = solve_equilibrium(params.without_interaction(), inv, target, grid)

for label, sol, p in (("equilibrium", nash, params), ("major alone", alone, params.without_interaction())):
    major, minor = evaluate_costs(sol, target, p)
    print(f"{label:12s} cost major {major.total:+.5f}  minor {minor.total:+.5f}")

series = {
    "aggregate rate": (nash.v_major + nash.v_minor, alone.v_major + alone.v_minor),
    "price": (price_path(nash, params), price_path(alone, params)),
}
for method in ("affine", "none"):
    print(f"\ndetrending: {method}")
    for name, (eq_series, ng_series) in series.items():
        eq = spectral_amplitudes(eq_series, 50, method)
        ng = spectral_amplitudes(ng_series, 50, method)
        print(f"  {name:15s} largest modes equilibrium {[int(k) for k in eq.top(3)]}, alone {[int(k) for k in ng.top(3)]}")
        for k in (10, 20):
            print(f"  {'':15s} k={k:2d}  equilibrium {eq.amplitudes[k - 1]:.4g}  alone {ng.amplitudes[k - 1]:.4g}")
    low = spectral_amplitudes(series["aggregate rate"][0], 50, method).amplitudes
    print(f"  share of rate spectrum in k < 10: {np.sum(low[:9] ** 2) / np.sum(low ** 2):.1%}")
