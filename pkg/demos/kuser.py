"""Distributed beam tilting with K transmitter-receiver pairs.

The first K1 receivers harvest energy, the rest decode.  Every transmitter
only hears back one dominant direction and gain per receiver, estimates a
direction that favours the harvesters and one that spares the decoders, and
tilts between them until the network-wide energy demand is met.

Run:  python3 demos/kuser.py
"""
import numpy as np

from jwiet import kuser as ku
from jwiet.errors import InfeasibleError

methods = ("select", "svd", "full")
sums = {k: [] for k in methods}
for trial in range(30):
    net = ku.sample_knetwork((6, trial), k=3, k1=2, m=4, alpha=0.5, power=50.0)
    ebar = 0.5 * ku.max_energy(net, "full")
    for k in methods:
        try:
            sums[k].append(ku.distributed_tilt(net, ebar, k).sum_rate)
        except InfeasibleError:
            sums[k].append(0.0)

print("mean sum rate at half the full-CSI energy reach (30 networks)")
for k in methods:
    print(f"  {k:6s} {np.mean(sums[k]):.3f} bits")

net = ku.sample_knetwork((6, 0), k=3, k1=2, m=4, alpha=0.5, power=50.0)
res = ku.distributed_tilt(net, 0.5 * ku.max_energy(net, "svd"), "svd")
print("\none network, SVD estimates:")
print(f"  tilts {np.round(res.thetas, 3)}  powers {np.round(res.powers, 2)}")
print(f"  harvested {res.energy:.2f}, per-decoder rates {np.round(res.rates, 3)}")
