import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from vilenkin_lab import io
from vilenkin_lab.cli import ConfigError, ExperimentConfig, load_config, main

ROOT = Path(__file__).resolve().parents[1]
WALSH8 = ROOT / "examples" / "configs" / "walsh8.toml"

SMALL = """
[group]
m = [2, 3]
N = 4

[experiment]
N_range = [3, 4]
p = [0.25, 0.5]
atoms = 8
seed = 1
families = [{ family = "fejer" }, { family = "riesz" }, { family = "b", alpha = 1.0, beta = 1 }]

[lemmas]
N_range = [3, 4]

[sharpness]
cases = [[0.25, 0.5], [0.5, 2.0]]
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.toml"
    p.write_text(SMALL)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_fmt_and_round():
    assert io.fmt(1 / 3) == "0.333333333333"
    assert io.fmt(np.float64(2.0)) == "2"
    assert io.fmt(np.int64(5)) == "5"
    assert io.fmt(float("inf")) == "inf"
    assert io.fmt(True) == "true"
    assert io._round({"a": (1 / 3, np.nan)}) == {"a": [0.333333333333, "nan"]}


@pytest.mark.parametrize("suffix", [".json", ".csv"])
def test_signal_round_trip(tmp_path, suffix):
    f = np.random.default_rng(0).normal(size=12) * (1 + 1j)
    path = tmp_path / f"sig{suffix}"
    io.write_signal(path, f)
    assert np.array_equal(io.read_signal(path), f)


def test_read_signal_plain_list(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"values": [1, 2, 3, 4]}))
    assert np.array_equal(io.read_signal(path), [1, 2, 3, 4])


def test_config_defaults_and_example():
    cfg = load_config(None)
    assert cfg.group.m == (2,) * 8 and cfg.atoms == 200
    ex = load_config(WALSH8)
    assert ex.N_range == (5, 6, 7, 8) and len(ex.families) == 5
    assert ex.sharp_cases == ((0.25, 0.5), (0.5, 2.0))


@pytest.mark.parametrize("text", [
    "[experiment]\np = [0.7]",
    "[experiment]\nfamilies = [{ family = 'cesaro', alpha = 0.5 }]",
    "[experiment]\nfamilies = [{ family = 'u', alpha = 2.0 }]",
    "[experiment]\nN_range = []",
    "[sharpness]\ncases = [[0.25, 2.0]]",
    "[group]\nm = [1]",
    "[bogus]\nx = 1",
    "[experiment\n",
])
def test_invalid_configs(tmp_path, text):
    p = tmp_path / "bad.toml"
    p.write_text(text)
    with pytest.raises(ConfigError):
        load_config(p)
    assert main(["verify", "identities", "--spec", str(p), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_exit_2(tmp_path, capsys):
    assert main(["verify", "identities", "--spec", str(tmp_path / "nope.toml")]) == 2
    assert "not found" in capsys.readouterr().err


def test_unwritable_out(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["verify", "identities", "--out", str(blocker / "sub")]) == 2


def test_verify_identities(tmp_path):
    out = tmp_path / "o"
    assert main(["--out", str(out), "verify", "identities", "--spec", str(WALSH8)]) == 0
    summary = json.loads((out / "identities.json").read_text())
    assert summary["ok"] and max(summary["max_error"].values()) <= 1e-10
    assert read_csv(out / "identities_plot.csv")[0] == ["series", "x", "y"]


def test_hard_failure_exit_1(tmp_path):
    assert main(["verify", "identities", "--tolerance", "1e-30", "--out", str(tmp_path)]) == 1
    summary = json.loads((tmp_path / "identities.json").read_text())
    assert not summary["ok"] and summary["hard_failures"]


@pytest.mark.parametrize("suite", ["lemmas", "theorem1", "theorem2", "theorem3", "theorem4", "sharpness"])
def test_verify_suites_small(tmp_path, small_cfg, suite):
    out = tmp_path / suite
    assert main(["verify", suite, "--spec", str(small_cfg), "--out", str(out), "--threads", "2"]) == 0
    summary = json.loads((out / f"{suite}.json").read_text())
    assert summary["ok"]
    plot = read_csv(out / f"{suite}_plot.csv")
    assert plot[0] == ["series", "x", "y"] and len(plot) > 1


def test_table_schemas(tmp_path, small_cfg):
    main(["verify", "theorem1", "--spec", str(small_cfg), "--out", str(tmp_path)])
    main(["verify", "theorem2", "--spec", str(small_cfg), "--out", str(tmp_path)])
    main(["verify", "lemmas", "--spec", str(small_cfg), "--out", str(tmp_path)])
    assert read_csv(tmp_path / "theorem1_maximal.csv")[0] == io.MAXIMAL_COLUMNS
    assert read_csv(tmp_path / "theorem2_strong.csv")[0] == io.STRONG_COLUMNS
    lemma = sorted(tmp_path.glob("lemma_*.csv"))[0]
    assert read_csv(lemma)[0] == io.LEMMA_COLUMNS


def test_seed_determinism(tmp_path, small_cfg):
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["--seed", "7", "verify", "theorem1", "--spec", str(small_cfg), "--out", str(out)]) == 0
        assert main(["sharpness", "--seed", "7", "--spec", str(small_cfg), "--out", str(out)]) == 0
        runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert runs[0] == runs[1]
    rows = read_csv(tmp_path / "a" / "theorem1_maximal.csv")
    assert {r[3] for r in rows[1:]} == {"7"}


def test_transform_round_trip(tmp_path):
    out = tmp_path / "t"
    assert main(["transform", "--spec", str(WALSH8), "--out", str(out)]) == 0
    assert main(["transform", "--out", str(out), "--input", str(out / "spectrum.json"), "--inverse",
                 "--method", "naive"]) == 0
    f = io.read_signal(out / "input.json")
    assert np.abs(io.read_signal(out / "signal.json") - f).max() < 1e-12


def test_transform_bad_input(tmp_path):
    sig = tmp_path / "s.json"
    io.write_signal(sig, np.ones(5))
    assert main(["transform", "--input", str(sig), "--out", str(tmp_path)]) == 2


def test_kernel_and_means(tmp_path):
    assert main(["kernel", "--kind", "fejer", "--n-max", "64", "--values", "4", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "kernel_fejer.csv")
    assert rows[0] == io.KERNEL_COLUMNS and len(rows) == 65
    assert float(rows[4][1]) == pytest.approx(1.0)  # ||K_4||_1 on the Walsh group
    assert (tmp_path / "kernel_fejer_n4.csv").exists()
    assert main(["kernel", "--kind", "t", "--family", "u", "--alpha", "0.5", "--out", str(tmp_path)]) == 0
    assert main(["means", "--family", "riesz", "--n-max", "300", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "means_riesz.csv")
    assert rows[0] == ["n", "max_error", "l1_error"] and rows[1][0] == "2"
    assert main(["means", "--family", "u", "--alpha", "3", "--out", str(tmp_path)]) == 2


def test_bench_small(tmp_path):
    assert main(["bench", "--min-exp", "4", "--max-exp", "6", "--repeats", "1", "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "bench.csv")) == 4


@pytest.mark.skipif(shutil.which("vilenkin-lab") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["vilenkin-lab", "verify", "identities", "--spec", str(WALSH8),
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    res = subprocess.run(["vilenkin-lab", "verify", "identities", "--spec", "missing.toml"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and "missing.toml" in res.stderr
