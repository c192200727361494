"""Monte Carlo experiment runner and CSV emission.

Four modes are supported:

``re_region``
    Rate-energy boundaries per strategy.  ``ebar_frac_grid`` holds fractions
    of each realization's maximum harvestable energy
    ``P sigma_11,1^2 + P sigma_12,1^2``.
``kuser``
    Sum rate of the distributed tilt procedure per direction-estimation
    method (``select``, ``svd``, ``full``).  Fractions refer to the mean
    full-CSI reach over all trials, so every method faces the same absolute
    demands.
``feedback_rate``
    Limited-feedback geodesic beamforming per bit budget and allocation,
    plus a perfect-CSI reference.  Fractions are of the normalized power ``P``.
``snr_sweep``
    As ``feedback_rate`` at a single energy fraction, sweeping the transmit
    power over ``snr_db_grid``; the ``ebar`` column then holds the SNR in dB.

Infeasible demands count as zero rate in every mean; ``feasible_fraction``
on each row records how often the demand was met.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import feedback as fb
from . import kuser, reopt
from .channel import sample_network
from .errors import ConfigError, InfeasibleError

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "MODES",
    "ResultRow",
    "config_from_mapping",
    "emit_csv",
    "load_config_file",
    "read_csv",
    "run",
]

MODES = ("re_region", "kuser", "feedback_rate", "snr_sweep")
CSV_HEADER = (
    "mode", "strategy", "m", "alpha", "ebar", "mean_rate_bits", "mean_energy",
    "std_rate", "std_energy", "b11", "b21", "b12", "b22", "runtime_ms",
)
KUSER_METHODS = ("select", "svd", "full")
ALLOCATIONS = ("adaptive", "equal", "both")
RATE_MODELS = ("mmse", "sinr")

_DEFAULT_STRATEGIES = {
    "re_region": ("MEB", "MLB", "SLER", "GEO_E"),
    "kuser": KUSER_METHODS,
    "feedback_rate": ("GEO_EI",),
    "snr_sweep": ("GEO_EI",),
}
_DEFAULT_TRIALS = {"re_region": 50, "kuser": 200, "feedback_rate": 200, "snr_sweep": 200}


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "re_region"
    m: int = 4
    alpha: float = 0.6
    power_mw: float = 50.0
    noise_uw: float = 1.0
    direct_pathloss: float = 1e-3
    ebar_frac_grid: tuple = tuple(np.round(np.linspace(0.0, 0.95, 20), 12))
    strategies: tuple = ()
    trials: int = 0
    master_seed: int = 0
    bit_budgets: tuple = (8, 12)
    allocation: str = "both"
    output_path: str | None = None
    k: int = 3
    k1: int = 2
    snr_db_grid: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    rate_model: str = "mmse"
    workers: int = 1

    def resolved(self):
        """Fill mode-dependent defaults and validate; raises ConfigError."""
        cfg = self
        if cfg.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
        if not cfg.strategies:
            cfg = replace(cfg, strategies=_DEFAULT_STRATEGIES[cfg.mode])
        if cfg.trials == 0:
            cfg = replace(cfg, trials=_DEFAULT_TRIALS[cfg.mode])
        cfg._validate()
        return cfg

    @property
    def power_w(self):
        return self.power_mw * 1e-3

    @property
    def noise_w(self):
        return self.noise_uw * 1e-6

    def _validate(self):
        if self.trials < 1:
            raise ConfigError("trials", "must be at least 1")
        if self.m < 2:
            raise ConfigError("m", "need at least 2 antennas")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha", "must lie in [0, 1]")
        if self.power_mw <= 0:
            raise ConfigError("power_mw", "must be positive")
        if self.noise_uw <= 0:
            raise ConfigError("noise_uw", "must be positive")
        if self.direct_pathloss <= 0:
            raise ConfigError("direct_pathloss", "must be positive")
        grid = np.asarray(self.ebar_frac_grid, dtype=float)
        if grid.size == 0:
            raise ConfigError("ebar_frac_grid", "must not be empty")
        if np.any(grid < 0) or np.any(~np.isfinite(grid)):
            raise ConfigError("ebar_frac_grid", "fractions must be finite and nonnegative")
        if self.mode != "snr_sweep" and grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ConfigError("ebar_frac_grid", "must be strictly increasing")
        if self.mode == "re_region":
            bad = [s for s in self.strategies if s not in reopt.STRATEGIES]
            if bad:
                raise ConfigError("strategy", f"unknown strategies {bad}")
        if self.mode == "kuser":
            bad = [s for s in self.strategies if s not in KUSER_METHODS]
            if bad:
                raise ConfigError("strategy", f"kuser methods are {KUSER_METHODS}, got {bad}")
            if not 1 <= self.k1 < self.k:
                raise ConfigError("k1", "need 1 <= k1 < k")
        if self.mode in ("feedback_rate", "snr_sweep"):
            if self.strategies != ("GEO_EI",):
                raise ConfigError("strategy", "feedback modes only support GEO_EI")
            if not self.bit_budgets or any(int(b) != b or b < 0 for b in self.bit_budgets):
                raise ConfigError("bits", "need nonnegative integer bit budgets")
            if self.allocation not in ALLOCATIONS:
                raise ConfigError("allocation", f"must be one of {ALLOCATIONS}")
            if self.rate_model not in RATE_MODELS:
                raise ConfigError("rate_model", f"must be one of {RATE_MODELS}")
        if self.mode == "snr_sweep":
            if grid.size != 1:
                raise ConfigError("ebar_frac_grid", "snr_sweep takes a single energy fraction")
            if not self.snr_db_grid:
                raise ConfigError("snr_db_grid", "must not be empty")
        if self.workers < 1:
            raise ConfigError("workers", "must be at least 1")


@dataclass(frozen=True)
class ResultRow:
    mode: str
    strategy: str
    m: int
    alpha: float
    ebar: float
    mean_rate_bits: float
    mean_energy: float
    std_rate: float
    std_energy: float
    b11: float | None = None
    b21: float | None = None
    b12: float | None = None
    b22: float | None = None
    runtime_ms: float = 0.0
    feasible_fraction: float = field(default=1.0, compare=False)
    trials: int = field(default=1, compare=False)


# ------------------------------------------------------------- config I/O


_LIST_FIELDS = {"ebar_frac_grid", "strategies", "bit_budgets", "snr_db_grid"}
_ALIASES = {
    "strategy": "strategies", "bits": "bit_budgets", "seed": "master_seed",
    "out": "output_path", "power-mw": "power_mw", "noise-uw": "noise_uw",
    "ebar-frac-grid": "ebar_frac_grid", "snr-db-grid": "snr_db_grid",
    "rate-model": "rate_model",
}


def load_config_file(path):
    """Parse ``key=value`` lines (``#`` starts a comment) into a dict of strings."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    with fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("config", f"line {n} is not key=value: {raw.strip()!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = val
    return out


def _coerce(name, value, kind):
    try:
        if name in _LIST_FIELDS:
            items = value if isinstance(value, (list, tuple)) else str(value).split(",")
            items = [str(i).strip() for i in items if str(i).strip()]
            if name == "strategies":
                return tuple(items)
            if name == "bit_budgets":
                return tuple(int(i) for i in items)
            return tuple(float(i) for i in items)
        if kind in ("int", int):
            return int(value)
        if kind in ("float", float):
            return float(value)
        return None if value in (None, "") else str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"cannot parse {value!r}") from exc


def config_from_mapping(mapping, base=None):
    """Build an :class:`ExperimentConfig` from string or typed values."""
    base = base or ExperimentConfig()
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    updates = {}
    for key, value in mapping.items():
        name = _ALIASES.get(key, key.replace("-", "_"))
        if name not in kinds:
            raise ConfigError(key, "unknown configuration key")
        updates[name] = _coerce(name, value, kinds[name].split(" ")[0])
    return replace(base, **updates)


# ----------------------------------------------------------- trial workers


def _net(cfg, trial, power_w=None):
    return sample_network(
        (cfg.master_seed, trial), cfg.m, cfg.alpha,
        power=cfg.power_w if power_w is None else power_w,
        noise=cfg.noise_w, direct_pathloss=cfg.direct_pathloss,
    )


def _re_trial(args):
    cfg, trial = args
    net = _net(cfg, trial)
    emax = net.p * net.h11.sigma[0] ** 2 + net.p * net.h12.sigma[0] ** 2
    grid = np.asarray(cfg.ebar_frac_grid) * emax
    out = {}
    for s in cfg.strategies:
        t0 = time.perf_counter()
        b = reopt.re_boundary(net, s, grid)
        dt = time.perf_counter() - t0
        out[s] = [(p.rate if p.feasible else 0.0, p.energy, p.feasible, None, dt / len(grid))
                  for p in b.points]
    return out


def _knet(cfg, trial):
    p = cfg.power_w * cfg.direct_pathloss / cfg.noise_w
    return kuser.sample_knetwork((cfg.master_seed, trial), cfg.k, cfg.k1, cfg.m, cfg.alpha, p)


def _kuser_reach(args):
    cfg, trial = args
    return kuser.max_energy(_knet(cfg, trial), "full")


def _kuser_trial(args):
    cfg, trial, grid = args
    knet = _knet(cfg, trial)
    out = {}
    for s in cfg.strategies:
        res = []
        for eb in grid:
            t0 = time.perf_counter()
            try:
                r = kuser.distributed_tilt(knet, float(eb), s)
                item = (r.sum_rate, r.energy, True)
            except InfeasibleError as exc:
                item = (0.0, exc.max_energy or 0.0, False)
            res.append((*item, None, time.perf_counter() - t0))
        out[s] = res
    return out


def _allocations(cfg):
    return ("adaptive", "equal") if cfg.allocation == "both" else (cfg.allocation,)


def _feedback_labels(cfg):
    labels = [("perfect", None, None)]
    for b in cfg.bit_budgets:
        for a in _allocations(cfg):
            labels.append((f"GEO_EI/{a}/B{b}", a, int(b)))
    return labels


def _feedback_cell(cfg, net, trial, ebar):
    out = {}
    for label, alloc, b in _feedback_labels(cfg):
        t0 = time.perf_counter()
        if alloc is None:
            try:
                pt = reopt.algorithm4(net, ebar)
                rate = pt.rate if cfg.rate_model == "mmse" else reopt.single_stream_rate(net, pt)
                item = (rate, pt.energy, True, None)
            except InfeasibleError as exc:
                item = (0.0, exc.max_energy or 0.0, False, None)
        else:
            rate, energy, bits = fb.feedback_rate(
                net, ebar, b, (cfg.master_seed, trial), alloc, cfg.rate_model
            )
            item = (rate, energy, energy > 0.0,
                    (bits.b11, bits.b21, bits.b12, bits.b22))
        out[label] = (*item, time.perf_counter() - t0)
    return out


def _feedback_trial(args):
    cfg, trial = args
    net = _net(cfg, trial)
    cells = [_feedback_cell(cfg, net, trial, fr * net.p) for fr in cfg.ebar_frac_grid]
    return {lab: [c[lab] for c in cells] for lab, _, _ in _feedback_labels(cfg)}


def _snr_trial(args):
    cfg, trial = args
    frac = cfg.ebar_frac_grid[0]
    cells = []
    for snr in cfg.snr_db_grid:
        power_w = 10.0 ** (snr / 10.0) * cfg.noise_w / cfg.direct_pathloss
        net = _net(cfg, trial, power_w)
        cells.append(_feedback_cell(cfg, net, trial, frac * net.p))
    return {lab: [c[lab] for c in cells] for lab, _, _ in _feedback_labels(cfg)}


def _map(fn, tasks, workers):
    if workers == 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# ------------------------------------------------------------------ run


def _aggregate(cfg, per_trial, labels, xs):
    rows = []
    for lab in labels:
        for i, x in enumerate(xs):
            cells = [t[lab][i] for t in per_trial]
            rates = np.array([c[0] for c in cells])
            energies = np.array([c[1] for c in cells])
            bits = [c[3] for c in cells if c[3] is not None]
            mean_bits = np.mean(np.array(bits, dtype=float), axis=0) if bits else [None] * 4
            rows.append(ResultRow(
                cfg.mode, lab, cfg.m, cfg.alpha, float(x),
                float(rates.mean()), float(energies.mean()),
                float(rates.std()), float(energies.std()),
                *(None if v is None else float(v) for v in mean_bits),
                runtime_ms=1e3 * float(sum(c[-1] for c in cells)),
                feasible_fraction=float(np.mean([c[2] for c in cells])),
                trials=len(cells),
            ))
    return rows


def run(config):
    """Run an experiment; deterministic given ``master_seed``.

    Returns rows ordered by strategy, then grid point.  Raises
    :class:`ConfigError` for invalid configurations.
    """
    cfg = config.resolved()
    trials = range(cfg.trials)
    if cfg.mode == "re_region":
        per = _map(_re_trial, [(cfg, t) for t in trials], cfg.workers)
        return _aggregate(cfg, per, cfg.strategies, cfg.ebar_frac_grid)
    if cfg.mode == "kuser":
        reach = _map(_kuser_reach, [(cfg, t) for t in trials], cfg.workers)
        grid = np.asarray(cfg.ebar_frac_grid) * float(np.mean(reach))
        per = _map(_kuser_trial, [(cfg, t, grid) for t in trials], cfg.workers)
        return _aggregate(cfg, per, cfg.strategies, cfg.ebar_frac_grid)
    labels = [lab for lab, _, _ in _feedback_labels(cfg)]
    if cfg.mode == "feedback_rate":
        per = _map(_feedback_trial, [(cfg, t) for t in trials], cfg.workers)
        return _aggregate(cfg, per, labels, cfg.ebar_frac_grid)
    per = _map(_snr_trial, [(cfg, t) for t in trials], cfg.workers)
    return _aggregate(cfg, per, labels, cfg.snr_db_grid)


# ------------------------------------------------------------------ CSV


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if not math.isfinite(v):
        return repr(float(v))
    return f"{v:.9g}"


def emit_csv(rows, path, *, timing=True):
    """Write rows as UTF-8 CSV with 9 significant digits; empty input is an error.

    ``path`` may also be an open text stream.  With ``timing=False`` the
    wall-clock ``runtime_ms`` column is left blank so that equal seeds give
    byte-identical files.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    if hasattr(path, "write"):
        _write_rows(rows, path, timing)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_rows(rows, fh, timing)


def _write_rows(rows, fh, timing=True):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([
            "" if name == "runtime_ms" and not timing else _fmt(getattr(r, name))
            for name in CSV_HEADER
        ])


def read_csv(path):
    """Parse an emitted file back into dicts of typed values (blank -> None)."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for k, v in rec.items():
                if k in ("mode", "strategy"):
                    row[k] = v
                elif k == "m":
                    row[k] = int(v)
                else:
                    row[k] = None if v == "" else float(v)
            out.append(row)
    return out
