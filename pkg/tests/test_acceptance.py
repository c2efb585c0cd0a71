"""The frozen reference suite as a pass/fail gate, one criterion per test.

The session fixture runs the suite once; each test here holds one
experiment's statistics against the frozen thresholds, so a broken
bound surfaces as exactly one failed line in the verbose report.
"""

from __future__ import annotations

import textwrap

import numpy as np

from fluctlab.cli import main
from fluctlab.harness import run_acceptance
from fluctlab.thresholds import DEFAULT as THR


def test_mass_conservation_at_rounding_scale(acceptance) -> None:
    verdicts, _ = acceptance
    v = verdicts["mass-conservative"]
    assert v.statistics["max_rel_drift"] <= THR.mass_drift_max
    assert v.passed


def test_pathwise_contraction_shrinks_under_refinement(acceptance) -> None:
    verdicts, _ = acceptance
    s = verdicts["contraction"].statistics
    assert s["violation_base"] <= THR.contraction_max_violation
    if s["violation_base"] > THR.contraction_floor:
        assert s["refinement_ratio"] >= THR.contraction_refinement_factor
    else:
        assert s["violation_refined"] <= THR.contraction_floor
    assert verdicts["contraction"].passed


def test_heat_benchmark_reaches_second_order(acceptance) -> None:
    verdicts, _ = acceptance
    v = verdicts["heat-order"]
    assert v.statistics["min_order"] >= THR.heat_min_order
    assert v.passed


def test_ito_stratonovich_gap_vanishes_with_dt(acceptance) -> None:
    verdicts, _ = acceptance
    v = verdicts["ito-strat"]
    assert v.statistics["slope"] >= THR.ito_strat_min_slope
    assert v.passed


def test_moment_bounds_finite_and_ladder_stable(acceptance) -> None:
    verdicts, _ = acceptance
    for exp_id in ("moments-m1", "moments-m2"):
        s = verdicts[exp_id].statistics
        assert np.isfinite(s["sup_lp"]), exp_id
        assert np.isfinite(s["theta_dissipation"]), exp_id
        assert s["sup_lp_change"] <= THR.moment_stability_rtol, exp_id
        assert s["theta_dissipation_change"] <= THR.moment_stability_rtol, exp_id
        assert s["l1_sup_ratio"] <= 1.0 + THR.l1_envelope_slack, exp_id
        assert verdicts[exp_id].passed, exp_id


def test_entropy_dissipation_finite_and_ladder_stable(acceptance) -> None:
    verdicts, _ = acceptance
    s = verdicts["entropy"].statistics
    assert np.isfinite(s["sup_entropy"])
    assert np.isfinite(s["entropy_dissipation"])
    assert s["sup_entropy_change"] <= THR.entropy_stability_rtol
    assert s["entropy_dissipation_change"] <= THR.entropy_stability_rtol
    assert verdicts["entropy"].passed


def test_kinetic_identities_hold(acceptance) -> None:
    verdicts, _ = acceptance
    s = verdicts["kinetic"].statistics
    assert s["q_total_bitwise"] == 1.0
    assert s["chi_identity_quanta"] <= THR.kinetic_identity_quanta
    assert s["zero_min_over_max"] <= THR.kinetic_zero_max_ratio
    assert (s["infinity_all_zero"] == 1.0
            or s["infinity_last_over_first"] <= THR.kinetic_infinity_max_ratio)
    assert verdicts["kinetic"].passed


def test_cascade_distances_contract(acceptance) -> None:
    verdicts, _ = acceptance
    s = verdicts["cascade"].statistics
    assert s["max_growth_ratio"] <= THR.cascade_slack
    assert s["final_over_first"] <= THR.cascade_final_over_first_max
    assert verdicts["cascade"].passed


def test_envelope_rate_below_reference_and_unit_rate_control(acceptance) -> None:
    verdicts, _ = acceptance
    s = verdicts["gen-contraction"].statistics
    assert s["fitted_c"] <= s["c_ref"]
    assert s["sup_envelope_ratio"] <= THR.gen_sup_envelope_max
    assert verdicts["gen-contraction"].passed

    c = verdicts["gen-control"].statistics
    assert c["deviation_from_one"] <= THR.gen_control_c_rtol
    assert verdicts["gen-control"].passed


def test_source_model_mass_stays_a_martingale(acceptance) -> None:
    verdicts, _ = acceptance
    s = verdicts["mass-martingale"].statistics
    assert s["mean_gap"] <= THR.martingale_sigma * s["standard_error"]
    assert verdicts["mass-martingale"].passed


_DET_CONFIG = """
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

[experiment]
members = 2
schedule = 0.4:2, 0.2:4, 0.1:8
xi_max = 4.0
"""


def test_determinism_across_reruns_and_thread_counts(acceptance, tmp_path) -> None:
    del acceptance  # ordered after the suite so the gate reads top to bottom
    cfg = tmp_path / "run.ini"
    cfg.write_text(textwrap.dedent(_DET_CONFIG))
    for sub in ("simulate", "couple", "cascade", "kinetic", "check-assumptions"):
        out1, out2 = tmp_path / f"{sub}-1", tmp_path / f"{sub}-2"
        assert main([sub, "--config", str(cfg), "--out", str(out1)]) == 0, sub
        assert main([sub, "--config", str(cfg), "--out", str(out2)]) == 0, sub
        names = sorted(p.name for p in out1.iterdir())
        assert names == sorted(p.name for p in out2.iterdir()), sub
        for name in names:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), \
                f"{sub}/{name}"

    t1, t4 = tmp_path / "threads-1", tmp_path / "threads-4"
    run_acceptance(out_dir=str(t1), threads=1, only=["heat-order"])
    run_acceptance(out_dir=str(t4), threads=4, only=["heat-order"])
    assert (t1 / "summary.csv").read_bytes() == (t4 / "summary.csv").read_bytes()
    assert (t1 / "heat-order" / "heat_order.csv").read_bytes() \
        == (t4 / "heat-order" / "heat_order.csv").read_bytes()
