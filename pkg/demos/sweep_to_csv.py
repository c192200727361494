"""Run a small experiment grid through the harness and write a CSV.

The same thing from the shell:

    jwiet --mode re_region --trials 5 --strategy GEO_E --strategy MEB \
          --ebar-frac-grid 0,0.25,0.5,0.75 --out re.csv

Run:  python3 demos/sweep_to_csv.py [out.csv]
"""
import sys

from jwiet import harness

cfg = harness.ExperimentConfig(mode="re_region", trials=5, strategies=("GEO_E", "MEB"),
                               ebar_frac_grid=(0.0, 0.25, 0.5, 0.75), master_seed=3)
rows = harness.run(cfg)
harness.emit_csv(rows, sys.argv[1] if len(sys.argv) > 1 else sys.stdout)
