"""Command-line interface: subcommands, exit codes, artifact layout."""

from __future__ import annotations

import os
import textwrap

import numpy as np
import pytest

from fluctlab.cli import main
from fluctlab.serialize import read_csv

BASE = """
[model]
preset = power-law-dk
m = 2.0

[noise]
modes = 2
amplitude = 0.2

[grid]
n = 32

[solver]
dt = 5e-4
t_end = 0.01
"""


def _config(tmp_path, text: str = BASE, name: str = "run.ini") -> str:
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def test_simulate_writes_the_evidence_set(tmp_path) -> None:
    cfg = _config(tmp_path)
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    for name in ("diagnostics.csv", "snapshots.bin", "field_final.csv",
                 "config.resolved.ini", "fingerprint.txt"):
        assert (out / name).exists(), name
    header, rows = read_csv(str(out / "diagnostics.csv"))
    assert header[:3] == ["time", "mass", "l1"]
    assert len(rows) == 21
    mass = np.array([float(r[1]) for r in rows])
    assert np.max(np.abs(mass - mass[0])) <= 1e-12 * abs(mass[0])


def test_simulate_reruns_byte_identically(tmp_path) -> None:
    cfg = _config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(out2)]) == 0
    for name in ("diagnostics.csv", "snapshots.bin", "field_final.csv",
                 "fingerprint.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_seed_flag_changes_the_run_record(tmp_path) -> None:
    cfg = _config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["simulate", "--config", cfg, "--seed", "9", "--out", str(out2)]) == 0
    assert (out1 / "fingerprint.txt").read_text() != (out2 / "fingerprint.txt").read_text()
    assert (out1 / "diagnostics.csv").read_bytes() != (out2 / "diagnostics.csv").read_bytes()


def test_simulate_runs_in_two_dimensions(tmp_path) -> None:
    cfg = _config(tmp_path, BASE.replace("n = 32", "n = 16\nd = 2")
                  .replace("modes = 2", "modes = 1"))
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    _, rows = read_csv(str(out / "diagnostics.csv"))
    mass = np.array([float(r[1]) for r in rows])
    assert np.max(np.abs(mass - mass[0])) <= 1e-12 * abs(mass[0])


def test_couple_reports_distances(tmp_path) -> None:
    cfg = _config(tmp_path, BASE + "\n[experiment]\nmembers = 2\n")
    out = tmp_path / "out"
    assert main(["couple", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(str(out / "distance.csv"))
    assert header == ["time", "mean_dist", "min_dist", "max_dist"]
    assert len(rows) == 21
    assert float(rows[0][1]) > 0.0


def test_cascade_requires_a_schedule(tmp_path, capsys) -> None:
    cfg = _config(tmp_path)
    assert main(["cascade", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "schedule" in capsys.readouterr().err


def test_cascade_writes_consecutive_distances(tmp_path) -> None:
    cfg = _config(tmp_path, BASE + "\n[experiment]\nschedule = 0.4:2, 0.2:4, 0.1:8\n")
    out = tmp_path / "out"
    assert main(["cascade", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(str(out / "cascade.csv"))
    assert header == ["entry", "alpha", "mollify_n", "l1l1_distance", "metric_distance"]
    assert len(rows) == 2
    assert [r[0] for r in rows] == ["1", "2"]


def test_kinetic_writes_histogram(tmp_path) -> None:
    cfg = _config(tmp_path, BASE + "\n[experiment]\nxi_max = 4.0\n")
    out = tmp_path / "out"
    assert main(["kinetic", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(str(out / "kinetic_hist.csv"))
    assert header == ["bin_lo", "bin_hi", "chi_mass", "q_mass"]
    chi = np.array([float(r[2]) for r in rows])
    assert chi.sum() > 0.0
    record = (out / "fingerprint.txt").read_text()
    assert "q_total" in record


def test_check_assumptions_reports_and_fails_honestly(tmp_path, capsys) -> None:
    ok = _config(tmp_path, BASE, name="ok.ini")
    out = tmp_path / "ok-out"
    assert main(["check-assumptions", "--config", ok, "--out", str(out)]) == 0
    header, rows = read_csv(str(out / "assumptions.csv"))
    assert header == ["subject", "check", "verdict", "constant", "witness", "note"]
    assert any(r[0] == "noise" for r in rows)

    bad = _config(tmp_path, BASE.replace("m = 2.0", "m = 0.5"), name="bad.ini")
    assert main(["check-assumptions", "--config", bad,
                 "--out", str(tmp_path / "bad-out")]) == 1


def test_unstable_dt_is_refused_with_the_bound(tmp_path, capsys) -> None:
    cfg = _config(tmp_path, BASE.replace("dt = 5e-4", "dt = 5e-2")
                  .replace("t_end = 0.01", "t_end = 0.5"))
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "stability bound" in err and "--override-cfl" in err


def test_unknown_config_key_exits_2(tmp_path, capsys) -> None:
    cfg = _config(tmp_path, BASE + "sigm = 4\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "sigma_mollify_n" in capsys.readouterr().err


def test_acceptance_subset_runs_and_reports(tmp_path, capsys) -> None:
    out = tmp_path / "acc"
    code = main(["acceptance", "--only", "mass-conservative", "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert "mass-conservative: pass" in captured.out
    assert (out / "summary.csv").exists()
    assert (out / "mass-conservative" / "mass_drift.csv").exists()


def test_acceptance_unknown_id_exits_2(tmp_path, capsys) -> None:
    code = main(["acceptance", "--only", "no-such-experiment",
                 "--out", str(tmp_path / "acc")])
    assert code == 2
    assert "no-such-experiment" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path, capsys) -> None:
    assert main(["simulate", "--config", str(tmp_path / "absent.ini"),
                 "--out", str(tmp_path / "o")]) == 2
