import io
import subprocess
import sys

import numpy as np
import pytest

from jwiet import cli, harness, reopt
from jwiet.errors import ConfigError
from jwiet.harness import ExperimentConfig, ResultRow

HEADER = ("mode,strategy,m,alpha,ebar,mean_rate_bits,mean_energy,std_rate,std_energy,"
          "b11,b21,b12,b22,runtime_ms")


def _cfg(**kw):
    base = dict(trials=1, ebar_frac_grid=(0.0, 0.5))
    base.update(kw)
    return ExperimentConfig(**base)


def _csv(rows, timing=True):
    buf = io.StringIO()
    harness.emit_csv(rows, buf, timing=timing)
    return buf.getvalue()


# ------------------------------------------------------------------ config


def test_mode_defaults():
    re = ExperimentConfig().resolved()
    assert re.strategies == ("MEB", "MLB", "SLER", "GEO_E") and re.trials == 50
    fbk = ExperimentConfig(mode="feedback_rate").resolved()
    assert fbk.strategies == ("GEO_EI",) and fbk.trials == 200
    assert fbk.power_w == pytest.approx(0.05) and fbk.noise_w == pytest.approx(1e-6)


@pytest.mark.parametrize("kw,field", [
    (dict(mode="fig9"), "mode"),
    (dict(trials=-1), "trials"),
    (dict(m=1), "m"),
    (dict(alpha=1.5), "alpha"),
    (dict(power_mw=0.0), "power_mw"),
    (dict(noise_uw=-1.0), "noise_uw"),
    (dict(ebar_frac_grid=()), "ebar_frac_grid"),
    (dict(ebar_frac_grid=(0.5, 0.2)), "ebar_frac_grid"),
    (dict(ebar_frac_grid=(-0.1,)), "ebar_frac_grid"),
    (dict(strategies=("NOPE",)), "strategy"),
    (dict(mode="kuser", strategies=("MEB",)), "strategy"),
    (dict(mode="kuser", k=3, k1=3), "k1"),
    (dict(mode="feedback_rate", strategies=("MEB",)), "strategy"),
    (dict(mode="feedback_rate", bit_budgets=(-2,)), "bits"),
    (dict(mode="feedback_rate", allocation="greedy"), "allocation"),
    (dict(mode="feedback_rate", rate_model="shannon"), "rate_model"),
    (dict(mode="snr_sweep", ebar_frac_grid=(0.1, 0.2)), "ebar_frac_grid"),
    (dict(mode="snr_sweep", ebar_frac_grid=(0.5,), snr_db_grid=()), "snr_db_grid"),
    (dict(workers=0), "workers"),
])
def test_config_errors_name_the_field(kw, field):
    with pytest.raises(ConfigError) as err:
        ExperimentConfig(**kw).resolved()
    assert err.value.field == field
    assert field in str(err.value)


def test_config_file_parsing(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("# comment\nmode = feedback_rate\nm=6  # inline\nbits=8,12\nstrategy=GEO_EI\n\n")
    mapping = harness.load_config_file(path)
    assert mapping == {"mode": "feedback_rate", "m": "6", "bits": "8,12", "strategy": "GEO_EI"}
    cfg = harness.config_from_mapping(mapping)
    assert cfg.m == 6 and cfg.bit_budgets == (8, 12) and cfg.strategies == ("GEO_EI",)


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("trials 5\n")
    with pytest.raises(ConfigError):
        harness.load_config_file(bad)
    with pytest.raises(ConfigError):
        harness.load_config_file(tmp_path / "missing.cfg")
    with pytest.raises(ConfigError) as err:
        harness.config_from_mapping({"colour": "blue"})
    assert err.value.field == "colour"
    with pytest.raises(ConfigError) as err:
        harness.config_from_mapping({"trials": "many"})
    assert err.value.field == "trials"


def test_mapping_aliases_and_lists():
    cfg = harness.config_from_mapping({"seed": "7", "power-mw": "20", "ebar-frac-grid": "0, 0.25,0.5"})
    assert cfg.master_seed == 7 and cfg.power_mw == 20.0
    assert cfg.ebar_frac_grid == (0.0, 0.25, 0.5)
    assert harness.config_from_mapping({"trials": 3}, cfg).master_seed == 7


# --------------------------------------------------------------------- run


def test_re_region_rows_cover_the_product():
    rows = harness.run(_cfg(strategies=("MEB", "GEO_E")))
    assert [(r.strategy, r.ebar) for r in rows] == [
        ("MEB", 0.0), ("MEB", 0.5), ("GEO_E", 0.0), ("GEO_E", 0.5)]
    # no energy demand: every strategy reaches the water-filling rate
    assert rows[0].mean_rate_bits == pytest.approx(rows[2].mean_rate_bits, rel=1e-9)
    assert all(r.std_rate >= 0 and r.b11 is None for r in rows)


def test_re_region_matches_direct_solve():
    cfg = _cfg(strategies=("MLB",), ebar_frac_grid=(0.3,), master_seed=4).resolved()
    row, = harness.run(cfg)
    net = harness._net(cfg, 0)
    emax = net.p * net.h11.sigma[0] ** 2 + net.p * net.h12.sigma[0] ** 2
    b = reopt.re_boundary(net, "MLB", [0.3 * emax])
    assert row.mean_rate_bits == pytest.approx(b.rates[0] if b.feasible[0] else 0.0)


def test_feedback_rows_carry_bit_allocations():
    rows = harness.run(_cfg(mode="feedback_rate", trials=2, ebar_frac_grid=(0.5,), bit_budgets=(4,)))
    assert [r.strategy for r in rows] == ["perfect", "GEO_EI/adaptive/B4", "GEO_EI/equal/B4"]
    assert rows[0].b11 is None
    for r in rows[1:]:
        assert r.b11 + r.b21 == pytest.approx(4) and r.b12 + r.b22 == pytest.approx(4)
    assert (rows[2].b11, rows[2].b21, rows[2].b12, rows[2].b22) == (2, 2, 2, 2)


def test_kuser_and_snr_modes():
    rows = harness.run(_cfg(mode="kuser", strategies=("svd",), ebar_frac_grid=(0.5,)))
    assert len(rows) == 1 and rows[0].mean_rate_bits > 0
    rows = harness.run(_cfg(mode="snr_sweep", ebar_frac_grid=(0.5,), snr_db_grid=(0.0, 10.0),
                            bit_budgets=(4,), allocation="equal"))
    assert [r.ebar for r in rows] == [0.0, 10.0, 0.0, 10.0]
    assert rows[1].mean_rate_bits > rows[0].mean_rate_bits


def test_workers_give_identical_results():
    cfg = _cfg(mode="feedback_rate", trials=3, ebar_frac_grid=(0.5,), bit_budgets=(4,))
    a = harness.run(cfg)
    b = harness.run(harness.config_from_mapping({"workers": 2}, cfg))
    assert _csv(a, timing=False) == _csv(b, timing=False)


def test_determinism_to_the_byte():
    cfg = _cfg(mode="feedback_rate", ebar_frac_grid=(0.2, 0.5), bit_budgets=(6,), master_seed=9)
    first, second = harness.run(cfg), harness.run(cfg)
    assert _csv(first, timing=False) == _csv(second, timing=False)
    # with timing on only the wall-clock column may differ
    strip = lambda text: [line.rsplit(",", 1)[0] for line in text.splitlines()]
    assert strip(_csv(first)) == strip(_csv(second))


def test_different_seeds_differ():
    a = harness.run(_cfg(strategies=("MEB",), ebar_frac_grid=(0.5,), master_seed=1))
    b = harness.run(_cfg(strategies=("MEB",), ebar_frac_grid=(0.5,), master_seed=2))
    assert a[0].mean_rate_bits != b[0].mean_rate_bits


# --------------------------------------------------------------------- CSV


def _row(**kw):
    base = dict(mode="re_region", strategy="MEB", m=4, alpha=0.6, ebar=0.5,
                mean_rate_bits=1 / 3, mean_energy=123.456789012, std_rate=0.0, std_energy=2e-12)
    base.update(kw)
    return ResultRow(**base)


def test_single_row_file(tmp_path):
    path = tmp_path / "one.csv"
    harness.emit_csv([_row()], path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2 and lines[0] == HEADER
    assert lines[1].startswith("re_region,MEB,4,0.6,0.5,0.333333333,123.456789,0,2e-12,,,,,")


def test_empty_rows_rejected(tmp_path):
    with pytest.raises(ValueError):
        harness.emit_csv([], tmp_path / "none.csv")


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        harness.emit_csv([_row()], tmp_path / "no" / "such" / "dir.csv")


def test_round_trip_at_nine_digits(tmp_path):
    rows = [_row(b11=3.0, b21=5.0, b12=4.5, b22=3.5, runtime_ms=12.3456789123),
            _row(strategy="GEO_E", mean_rate_bits=np.pi * 1e5, ebar=0.95)]
    path = tmp_path / "rt.csv"
    harness.emit_csv(rows, path)
    back = harness.read_csv(path)
    for r, d in zip(rows, back):
        for name in HEADER.split(","):
            v = getattr(r, name)
            if isinstance(v, str) or v is None:
                assert d[name] == v
            else:
                assert d[name] == float(f"{v:.9g}")


# --------------------------------------------------------------------- CLI


def test_cli_writes_csv(tmp_path):
    out = tmp_path / "sub" / "r.csv"
    code = cli.main(["--mode", "re_region", "--trials", "1", "--strategy", "MEB", "--strategy", "MLB",
                     "--ebar-frac-grid", "0,0.5", "--out", str(out)])
    assert code == 0
    assert len(harness.read_csv(out)) == 4


def test_cli_stdout(capsys):
    code = cli.main(["--trials", "1", "--strategy", "MEB", "--ebar-frac-grid", "0.2", "--no-timing"])
    assert code == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0] == HEADER and text.rstrip().endswith(",")


def test_cli_config_errors(tmp_path, capsys):
    assert cli.main(["--alpha", "3"]) == 2
    assert "alpha" in capsys.readouterr().err
    bad = tmp_path / "bad.cfg"
    bad.write_text("speed=fast\n")
    assert cli.main(["--config", str(bad)]) == 2
    assert cli.main(["--config", str(tmp_path / "missing.cfg")]) == 2


def test_cli_flags_override_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("mode=feedback_rate\nm=6\ntrials=30\nbits=8\n")
    args = cli.build_parser().parse_args(["--config", str(path), "--trials", "2", "--alpha", "0.3"])
    cfg = cli.make_config(args)
    assert (cfg.mode, cfg.m, cfg.trials, cfg.alpha, cfg.bit_budgets) == ("feedback_rate", 6, 2, 0.3, (8,))


def test_cli_all_infeasible_exit_code(tmp_path):
    out = tmp_path / "inf.csv"
    code = cli.main(["--mode", "feedback_rate", "--trials", "1", "--ebar-frac-grid", "1000",
                     "--bits", "4", "--out", str(out)])
    assert code == 3
    assert all(r["mean_rate_bits"] == 0.0 for r in harness.read_csv(out))


def test_cli_codebook_tables(tmp_path):
    stem = tmp_path / "cb"
    code = cli.main(["--mode", "feedback_rate", "--trials", "1", "--ebar-frac-grid", "0.5", "--bits", "4",
                     "--m", "3", "--out", str(tmp_path / "r.csv"), "--codebook-out", str(stem)])
    assert code == 0
    for name in ("b11", "b21", "b12", "b22"):
        text = (tmp_path / f"cb_{name}.txt").read_text().splitlines()
        assert text[0] == "# rvq-codebook m=3 bits=2" and len(text) == 5
    assert cli.main(["--trials", "1", "--strategy", "MEB", "--ebar-frac-grid", "0.2",
                     "--out", str(tmp_path / "x.csv"), "--codebook-out", str(stem)]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "jwiet", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "--ebar-frac-grid" in res.stdout
