"""Explicit schemes: exact linear behavior, conservation, guards."""

from __future__ import annotations

import numpy as np
import pytest

from fluctlab import (
    ConfigurationError,
    GridSpec,
    GridState,
    NumericError,
    SolverConfig,
    SpectralNoiseSpec,
    StabilityError,
    build_spectral_noise,
    conservative_noise,
    custom_set,
    initial_state,
    make_preset,
    run,
    run_cascade,
    run_coupled,
    stability_bound,
    step_ito,
    step_strat_heun,
)
from fluctlab.nonlin import zero_fn

# Frozen reference value (see tools/derive_expected.py).
EULER_GROWTH_DT_1E3 = 2.7169239322355936


def _heat_set():
    ident = lambda x: np.asarray(x, dtype=np.float64)  # noqa: E731
    one = lambda x: np.ones_like(np.asarray(x, dtype=np.float64))  # noqa: E731
    return custom_set("heat", phi_cap=ident, phi_cap_prime=one, phi_power=(1.0, 1.0))


def _silent(grid: GridSpec):
    return build_spectral_noise(SpectralNoiseSpec(wavevectors=(), amplitudes=()), grid)


# ---------------------------------------------------------------------------
# Exact linear behavior
# ---------------------------------------------------------------------------

def test_heat_mode_decay_is_exact_per_step() -> None:
    # sin is an eigenvector of the discrete operator, so explicit Euler
    # multiplies its amplitude by exactly (1 - dt*mu) each step.
    grid = GridSpec(1, 64)
    rho0 = initial_state(grid, kind="sine", offset=1.0, amplitude=0.5)
    cfg = SolverConfig(dt=1e-3, t_end=0.05)
    traj = run(rho0, _heat_set(), _silent(grid), cfg, seed=0)
    steps = round(cfg.t_end / cfg.dt)
    mu = (2.0 / grid.dx**2) * (1.0 - np.cos(grid.dx))
    expected = 1.0 + 0.5 * (1.0 - cfg.dt * mu) ** steps * np.sin(grid.axis())
    np.testing.assert_allclose(traj.final_state().values, expected, rtol=0, atol=1e-12)
    assert not traj.truncated


def test_source_growth_compounds_exactly() -> None:
    # A pure linear source advances a constant field by (1 + dt) per
    # step; at dt = 1e-3 over unit time the factor is frozen.
    grid = GridSpec(1, 16)
    rho0 = initial_state(grid, kind="constant", offset=1.0)
    nl = custom_set("growth-control", phi_cap=zero_fn,
                    lambda_low=lambda x: np.asarray(x, dtype=np.float64))
    cfg = SolverConfig(dt=1e-3, t_end=1.0, override_assumptions=True)
    traj = run(rho0, nl, _silent(grid), cfg, seed=0)
    mass = traj.diagnostics["mass"]
    assert mass[-1] / mass[0] == pytest.approx(EULER_GROWTH_DT_1E3, rel=1e-12)


def test_viscosity_cascade_matches_mode_arithmetic() -> None:
    # With a heat model every cascade entry decays the sine mode by
    # (1 - dt*mu*(1 + alpha)) per step, so the L1-in-(space, time)
    # distances have a closed form.
    grid = GridSpec(1, 64)
    rho0 = initial_state(grid, kind="sine", offset=1.0, amplitude=0.5)
    cfg = SolverConfig(dt=5e-4, t_end=0.02)
    schedule = [(0.4, 2), (0.2, 4), (0.1, 8)]
    report = run_cascade(rho0, _heat_set(), _silent(grid), cfg, schedule, seed=0)

    x = grid.axis()
    sin_l1 = float(np.sum(np.abs(np.sin(x)))) * grid.cell_volume
    mu = (2.0 / grid.dx**2) * (1.0 - np.cos(grid.dx))
    steps = round(cfg.t_end / cfg.dt)
    j = np.arange(steps)

    def factors(alpha: float) -> np.ndarray:
        return (1.0 - cfg.dt * mu * (1.0 + alpha)) ** j

    for (a1, _), (a2, _), got in zip(schedule, schedule[1:], report.l1l1_distances):
        predicted = cfg.dt * 0.5 * float(np.sum(np.abs(factors(a1) - factors(a2)))) * sin_l1
        assert got == pytest.approx(predicted, rel=1e-10)
    assert report.l1l1_distances[1] < report.l1l1_distances[0]
    assert report.metric_distances[1] < report.metric_distances[0]


def test_cascade_rejects_disordered_schedules() -> None:
    grid = GridSpec(1, 32)
    rho0 = initial_state(grid)
    cfg = SolverConfig(dt=1e-3, t_end=0.01)
    with pytest.raises(ConfigurationError):
        run_cascade(rho0, _heat_set(), _silent(grid), cfg, [(0.1, 2), (0.2, 4)], seed=0)
    with pytest.raises(ConfigurationError):
        run_cascade(rho0, _heat_set(), _silent(grid), cfg, [(0.2, 4), (0.1, 2)], seed=0)


# ---------------------------------------------------------------------------
# Conservation and ordering
# ---------------------------------------------------------------------------

def test_mass_is_conserved_under_conservative_noise() -> None:
    grid = GridSpec(1, 32)
    rho0 = initial_state(grid, kind="sine", offset=1.0, amplitude=0.5)
    noise = build_spectral_noise(conservative_noise(3, 0.2), grid)
    nl = make_preset("power-law-dk", m=2.0)
    cfg = SolverConfig(dt=5e-4, t_end=0.05)
    traj = run(rho0, nl, noise, cfg, seed=11)
    mass = traj.diagnostics["mass"]
    assert not traj.truncated
    assert np.max(np.abs(mass - mass[0])) <= 1e-12 * abs(mass[0])


def test_mass_is_conserved_in_2d() -> None:
    grid = GridSpec(2, 16)
    rho0 = initial_state(grid, kind="sine", offset=1.0, amplitude=0.4)
    spec = SpectralNoiseSpec(wavevectors=((1, 0), (0, 1)), amplitudes=(0.2, 0.2))
    noise = build_spectral_noise(spec, grid)
    nl = make_preset("power-law-dk", m=2.0)
    cfg = SolverConfig(dt=2e-4, t_end=0.01)
    traj = run(rho0, nl, noise, cfg, seed=4)
    mass = traj.diagnostics["mass"]
    assert not traj.truncated
    assert np.max(np.abs(mass - mass[0])) <= 1e-12 * abs(mass[0])


def test_deterministic_heat_flow_preserves_ordering() -> None:
    grid = GridSpec(1, 64)
    lo = initial_state(grid, kind="sine", offset=1.0, amplitude=0.5)
    hi = initial_state(grid, kind="sine", offset=1.2, amplitude=0.5, phase=0.3)
    assert np.all(lo.values <= hi.values)
    cfg = SolverConfig(dt=1e-3, t_end=0.05)
    a = run(lo, _heat_set(), _silent(grid), cfg, seed=0).final_state().values
    b = run(hi, _heat_set(), _silent(grid), cfg, seed=0).final_state().values
    assert np.all(a <= b + 1e-12)


def test_coupled_pair_shares_the_realization() -> None:
    grid = GridSpec(1, 32)
    a = initial_state(grid, kind="sine", offset=1.0, amplitude=0.4)
    noise = build_spectral_noise(conservative_noise(2, 0.2), grid)
    nl = make_preset("power-law-dk", m=2.0)
    cfg = SolverConfig(dt=5e-4, t_end=0.01)
    ta, tb, dist = run_coupled(a, a.copy(), nl, noise, cfg, seed=7)
    # Identical members under a common realization never separate.
    assert np.all(dist == 0.0)
    np.testing.assert_array_equal(ta.final_state().values, tb.final_state().values)


# ---------------------------------------------------------------------------
# Guards and truncation
# ---------------------------------------------------------------------------

def test_single_step_refuses_unstable_dt() -> None:
    grid = GridSpec(1, 64)
    rho0 = initial_state(grid)
    nl = _heat_set()
    noise = _silent(grid)
    bound = stability_bound(rho0, nl, noise, SolverConfig(dt=1e-6, t_end=1e-6))
    bad = SolverConfig(dt=1.01 * bound, t_end=1.0)
    incr = np.zeros((0, 1))
    with pytest.raises(StabilityError):
        step_ito(rho0, nl, noise, incr, bad)
    with pytest.raises(StabilityError):
        step_strat_heun(rho0, nl, noise, incr, bad)


def test_driver_truncates_instead_of_raising() -> None:
    grid = GridSpec(1, 64)
    rho0 = initial_state(grid)
    nl = _heat_set()
    noise = _silent(grid)
    bound = stability_bound(rho0, nl, noise, SolverConfig(dt=1e-6, t_end=1e-6))
    dt = 1.01 * bound
    traj = run(rho0, nl, noise, SolverConfig(dt=dt, t_end=10 * dt), seed=0)
    assert traj.truncated
    assert traj.metadata["truncated_at_step"] == 0
    assert "dt" in traj.metadata["truncation_reason"]
    assert traj.final_state().time < 10 * dt


def test_dt_just_below_the_bound_runs_clean() -> None:
    grid = GridSpec(1, 64)
    rho0 = initial_state(grid)
    nl = _heat_set()
    noise = _silent(grid)
    bound = stability_bound(rho0, nl, noise, SolverConfig(dt=1e-6, t_end=1e-6))
    dt = 0.99 * bound
    traj = run(rho0, nl, noise, SolverConfig(dt=dt, t_end=20 * dt), seed=0)
    assert not traj.truncated


def test_argument_clip_controls_domain_errors() -> None:
    # A field with an undershoot feeds xi < 0 into xi^(3/2); clipping
    # evaluates at zero instead, without it the step must fail loudly.
    grid = GridSpec(1, 32)
    vals = 0.1 + 0.2 * np.sin(grid.axis())
    rho0 = GridState(grid, vals)
    nl = make_preset("power-law-dk", m=1.5)
    noise = _silent(grid)
    cfg = SolverConfig(dt=1e-4, t_end=1e-4, clip_nonlinearity_args=True)
    stepped = step_ito(rho0, nl, noise, np.zeros((0, 1)), cfg)
    assert np.all(np.isfinite(stepped.values))
    with pytest.raises(NumericError), np.errstate(invalid="ignore"):
        step_ito(rho0, nl, noise, np.zeros((0, 1)),
                 SolverConfig(dt=1e-4, t_end=1e-4, clip_nonlinearity_args=False))


def test_admissibility_gate_blocks_origin_violations() -> None:
    # A mobility positive at the origin breaks conservation structure;
    # the driver must refuse it unless explicitly overridden.
    grid = GridSpec(1, 32)
    rho0 = initial_state(grid)
    nl = make_preset("kawasaki-ohta")
    noise = _silent(grid)
    cfg = SolverConfig(dt=1e-4, t_end=1e-3)
    with pytest.raises(ConfigurationError):
        run(rho0, nl, noise, cfg, seed=0)
    traj = run(rho0, nl, noise,
               SolverConfig(dt=1e-4, t_end=1e-3, override_assumptions=True), seed=0)
    assert not traj.truncated


# ---------------------------------------------------------------------------
# Bookkeeping
# ---------------------------------------------------------------------------

def test_trajectory_metadata_fingerprints_inputs() -> None:
    grid = GridSpec(1, 32)
    rho0 = initial_state(grid)
    nl = make_preset("power-law-dk", m=2.0)
    noise = build_spectral_noise(conservative_noise(2, 0.1), grid)
    cfg = SolverConfig(dt=5e-4, t_end=0.005)
    t1 = run(rho0, nl, noise, cfg, seed=3)
    t2 = run(rho0, nl, noise, cfg, seed=3)
    t3 = run(rho0, nl, noise, cfg, seed=4)
    assert t1.metadata["config_fingerprint"] == t2.metadata["config_fingerprint"]
    np.testing.assert_array_equal(t1.final_state().values, t2.final_state().values)
    assert np.any(t1.final_state().values != t3.final_state().values)
    for key in ("nonlinearity_fingerprint", "noise_fingerprint", "config_fingerprint"):
        assert t1.metadata[key]


def test_diagnostics_cover_every_step() -> None:
    grid = GridSpec(1, 32)
    rho0 = initial_state(grid)
    cfg = SolverConfig(dt=1e-3, t_end=0.02)
    traj = run(rho0, _heat_set(), _silent(grid), cfg, seed=0, track_functionals=True)
    steps = round(cfg.t_end / cfg.dt)
    for key in ("time", "mass", "l1", "l2", "lp", "min", "max", "energy", "entropy"):
        assert traj.diagnostics[key].shape[0] == steps + 1
    assert traj.diagnostics["time"][0] == 0.0
    assert traj.diagnostics["time"][-1] == pytest.approx(cfg.t_end)
    assert np.all(np.isfinite(traj.diagnostics["energy"]))


def test_snapshot_stride_is_respected() -> None:
    grid = GridSpec(1, 32)
    rho0 = initial_state(grid)
    cfg = SolverConfig(dt=1e-3, t_end=0.02, snapshot_stride=5)
    traj = run(rho0, _heat_set(), _silent(grid), cfg, seed=0)
    times = [t for t, _ in traj.snapshots]
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.02)
    assert len(times) == 5  # steps 0, 5, 10, 15, 20
