"""Experiment harness: envelope fit, statistics, reproducible verdicts."""

from __future__ import annotations

import numpy as np
import pytest

from fluctlab import (
    ConfigurationError,
    ExperimentSpec,
    GridSpec,
    SolverConfig,
    SpectralNoiseSpec,
    build_spectral_noise,
    custom_set,
    fit_envelope,
    initial_state,
    reference_experiments,
    run_coupled,
)
from fluctlab.harness import _violation_statistic, smooth_mobility_set

# Frozen reference value (see tools/derive_expected.py).
ENVELOPE_SYNTHETIC_C = 0.5


def test_envelope_fit_recovers_exact_exponential_rate() -> None:
    t = np.arange(0.0, 2.0 + 1e-12, 0.01)
    ratios = np.exp(ENVELOPE_SYNTHETIC_C * t)
    c, log_c0 = fit_envelope(t, ratios)
    assert c == pytest.approx(ENVELOPE_SYNTHETIC_C, rel=1e-10)
    assert log_c0 == pytest.approx(0.0, abs=1e-10)


def test_envelope_fit_ignores_transient_dips() -> None:
    # The running maximum freezes through dips, so a fluctuation below
    # the envelope cannot raise the fitted rate.
    t = np.arange(0.0, 2.0 + 1e-12, 0.01)
    clean = np.exp(0.5 * t)
    dipped = clean.copy()
    dipped[1::2] *= 0.25
    c_clean, _ = fit_envelope(t, clean)
    c_dipped, _ = fit_envelope(t, dipped)
    assert c_dipped <= c_clean + 1e-12


def test_violation_statistic_measures_overshoot() -> None:
    dist = np.array([[1.0], [0.8], [0.9], [0.7]])
    # Running minimum 1.0, 0.8, 0.8, 0.7; the 0.9 overshoots by 0.1.
    assert _violation_statistic(dist) == pytest.approx(0.1)
    monotone = np.array([[1.0], [0.6], [0.4]])
    assert _violation_statistic(monotone) == 0.0


def test_deterministic_heat_coupling_contracts_cleanly() -> None:
    grid = GridSpec(1, 64)
    ident = lambda x: np.asarray(x, dtype=np.float64)  # noqa: E731
    one = lambda x: np.ones_like(np.asarray(x, dtype=np.float64))  # noqa: E731
    nl = custom_set("heat", phi_cap=ident, phi_cap_prime=one)
    noise = build_spectral_noise(SpectralNoiseSpec(wavevectors=(), amplitudes=()), grid)
    a = initial_state(grid, kind="sine", offset=1.0, amplitude=0.5)
    b = initial_state(grid, kind="sine", offset=1.0, amplitude=0.5, phase=np.pi / 4)
    cfg = SolverConfig(dt=1e-3, t_end=0.1)
    _, _, dist = run_coupled(a, b, nl, noise, cfg, seed=0)
    assert _violation_statistic(dist[:, None]) <= 1e-12
    assert dist[-1] < dist[0]


def test_experiment_spec_validates_ladder() -> None:
    with pytest.raises(ConfigurationError):
        ExperimentSpec(experiment_id="x", preset="power-law-dk",
                       ladder=((64, 1e-3), (64, 5e-4)))
    with pytest.raises(ConfigurationError):
        ExperimentSpec(experiment_id="x", preset="power-law-dk", members=0)


def test_reference_suite_is_frozen() -> None:
    pairs = reference_experiments()
    ids = [spec.experiment_id for _, spec in pairs]
    assert ids == [
        "mass-conservative", "contraction", "heat-order", "ito-strat",
        "moments-m1", "moments-m2", "entropy", "kinetic", "cascade",
        "gen-contraction", "gen-control", "mass-martingale",
    ]


def test_verdicts_are_bitwise_reproducible() -> None:
    table = {spec.experiment_id: (fn, spec) for fn, spec in reference_experiments()}
    fn, spec = table["mass-conservative"]
    first = fn(spec)
    second = fn(spec)
    assert first.passed and second.passed
    assert first.statistics == second.statistics


def test_smooth_mobility_scales_its_diffusion() -> None:
    base = smooth_mobility_set(1.0)
    quarter = smooth_mobility_set(0.25)
    xs = np.linspace(0.0, 3.0, 7)
    np.testing.assert_allclose(quarter.phi_cap(xs), 0.25 * base.phi_cap(xs), rtol=1e-14)
    np.testing.assert_allclose(base.sigma(xs), quarter.sigma(xs), rtol=1e-14)
