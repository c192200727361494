"""Rate-energy trade-off for one two-pair network.

The energy transmitter picks a beam; the information transmitter then shapes
its covariance around the energy demand.  Steering along the geodesic between
the maximum-energy and minimum-leakage beams lets the energy transmitter
trade harvested energy against the interference it leaks into the decoder.

Run:  python3 demos/re_region.py
"""
import numpy as np

from jwiet import beamform as bf
from jwiet import reopt
from jwiet.channel import sample_network

net = sample_network(2024, m=4, alpha=0.6)
print(f"M={net.m}, P={net.p:.1f} (noise-normalized)")

# The energy curve and its two endpoint quantities.
curve = bf.geodesic(bf.meb(net.h11), bf.mlb(net.h21))
print(f"angle between the MEB and MLB beams: {curve.phi:.3f} rad")
th = np.linspace(0, curve.phi, 5)
for t, e, l in zip(th, bf.curve_gain(curve, net.h11)(th), bf.curve_gain(curve, net.h21)(th)):
    print(f"  theta={t:.3f}  energy gain {e:7.3f}  leakage gain {l:7.3f}")

emax = net.p * net.h11.sigma[0] ** 2 + net.p * net.h12.sigma[0] ** 2
grid = np.linspace(0, 0.95, 8) * emax
strategies = ("GEO_E", "SLER", "MEB", "MLB", "GEO_EI", "TIMESHARE")
table = {s: reopt.re_boundary(net, s, grid) for s in strategies}

print("\nrate (bits) at each energy demand; '-' marks an unreachable demand")
print("  E-bar   " + "".join(f"{s:>10}" for s in strategies))
for i, eb in enumerate(grid):
    cells = []
    for s in strategies:
        b = table[s]
        cells.append(f"{b.rates[i]:10.3f}" if b.feasible[i] else f"{'-':>10}")
    print(f"{eb:8.2f} " + "".join(cells))

# The geodesic strategy meets or beats the fixed energy beams everywhere.
geo = table["GEO_E"].rates
for s in ("MEB", "MLB"):
    ok = table[s].feasible
    print(f"GEO_E >= {s} wherever {s} is feasible: {bool(np.all(geo[ok] >= table[s].rates[ok] - 1e-6))}")
