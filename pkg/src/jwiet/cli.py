"""Command-line entry point: ``jwiet --mode re_region --trials 10 --out r.csv``.

Exit codes: 0 success, 2 configuration error, 3 every grid point infeasible.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import feedback as fb
from . import harness
from .errors import ConfigError, ResourceError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def build_parser():
    p = argparse.ArgumentParser(
        prog="jwiet", description="Rate-energy experiments for the MIMO interference channel."
    )
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--mode", choices=harness.MODES)
    p.add_argument("--m", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--power-mw", type=float)
    p.add_argument("--noise-uw", type=float)
    p.add_argument("--ebar-frac-grid", help="comma-separated energy fractions")
    p.add_argument("--strategy", action="append", help="repeatable")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bits", help="comma-separated bit budgets")
    p.add_argument("--allocation", choices=harness.ALLOCATIONS)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--snr-db-grid", help="comma-separated SNRs for snr_sweep")
    p.add_argument("--k", type=int)
    p.add_argument("--k1", type=int)
    p.add_argument("--rate-model", choices=harness.RATE_MODELS)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-timing", action="store_true",
                   help="leave runtime_ms blank so equal seeds give identical files")
    p.add_argument("--codebook-out", help="write the trial-0 codebook tables to PATH_b11.txt etc.")
    return p


_FLAG_KEYS = {
    "mode": "mode", "m": "m", "alpha": "alpha", "power_mw": "power_mw", "noise_uw": "noise_uw",
    "ebar_frac_grid": "ebar_frac_grid", "strategy": "strategies", "trials": "trials",
    "seed": "master_seed", "bits": "bit_budgets", "allocation": "allocation",
    "out": "output_path", "snr_db_grid": "snr_db_grid", "k": "k", "k1": "k1",
    "rate_model": "rate_model", "workers": "workers",
}


def make_config(args):
    mapping = harness.load_config_file(args.config) if args.config else {}
    cfg = harness.config_from_mapping(mapping)
    flags = {
        key: getattr(args, attr)
        for attr, key in _FLAG_KEYS.items()
        if getattr(args, attr) is not None
    }
    return harness.config_from_mapping(flags, cfg).resolved()


def _write_codebooks(cfg, stem):
    bits = fb.BitAllocation.equal(int(cfg.bit_budgets[0]))
    names = ("b11", "b21", "b12", "b22")
    for name, cb in zip(names, fb._codebooks((cfg.master_seed, 0), bits, cfg.m)):
        fb.save_codebook(cb, f"{stem}_{name}.txt")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        rows = harness.run(cfg)
        if args.codebook_out:
            if cfg.mode not in ("feedback_rate", "snr_sweep"):
                raise ConfigError("codebook_out", "only meaningful in feedback modes")
            _write_codebooks(cfg, args.codebook_out)
    except (ConfigError, ResourceError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.output_path:
        Path(cfg.output_path).parent.mkdir(parents=True, exist_ok=True)
        harness.emit_csv(rows, cfg.output_path, timing=not args.no_timing)
    else:
        harness.emit_csv(rows, sys.stdout, timing=not args.no_timing)
    if all(r.feasible_fraction == 0.0 for r in rows):
        print("every grid point was infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
