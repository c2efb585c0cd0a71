"""Spectral noise environments: covariance sums, sampling, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from fluctlab import (
    GridSpec,
    GridState,
    SpectralNoiseSpec,
    build_spectral_noise,
    conservative_noise,
    verify_noise_assumptions,
)
from fluctlab.noise import (
    MEMORY_BUDGET_BYTES,
    NoiseError,
    coarsen_bundle,
    noise_divergence_term,
    sample_increments,
)

# Frozen reference values (see tools/derive_expected.py).
F1_TWO_PAIRS = 1.25      # 1^2 + (1/2)^2
F3_TWO_PAIRS = 2.0       # 1^2 * 1 + (1/2)^2 * 4
DIV_SYMBOL_BOUND_N256 = 1.7568638509679680e-4


def _paired(grid: GridSpec) -> object:
    return build_spectral_noise(conservative_noise(2, 1.0, 1.0), grid)


def _single_sine(grid: GridSpec) -> object:
    spec = SpectralNoiseSpec(wavevectors=((1,),), amplitudes=(1.0,),
                             includes_cosine_partner=False)
    return build_spectral_noise(spec, grid)


# ---------------------------------------------------------------------------
# Covariance diagnostics
# ---------------------------------------------------------------------------

def test_paired_spectrum_has_constant_covariance_sums() -> None:
    nf = _paired(GridSpec(1, 64))
    assert np.all(nf.f1 == F1_TWO_PAIRS)
    assert np.all(nf.f3 == F3_TWO_PAIRS)
    assert np.all(nf.f2 == 0.0)
    assert nf.stationary
    assert nf.k_f == 4


def test_paired_spectrum_verifies_cleanly_in_2d() -> None:
    spec = SpectralNoiseSpec(wavevectors=((1, 0), (0, 1)), amplitudes=(0.5, 0.5))
    nf = build_spectral_noise(spec, GridSpec(2, 16))
    rep = verify_noise_assumptions(nf)
    assert rep.all_passed
    assert np.all(nf.f1 == 0.5)


def test_unpaired_sine_mode_breaks_stationarity() -> None:
    grid = GridSpec(1, 128)
    nf = _single_sine(grid)
    x = grid.axis()
    assert nf.f1 == pytest.approx(np.sin(x) ** 2)
    assert nf.f2[0] == pytest.approx(np.sin(x) * np.cos(x))
    assert nf.f3 == pytest.approx(np.cos(x) ** 2)
    assert not nf.stationary
    # The cross-term divergence approximates cos(2x).
    assert np.max(np.abs(nf.div_f2 - np.cos(2.0 * x))) <= 5e-3

    rep = verify_noise_assumptions(nf)
    assert rep["stationary"].verdict == "fail"
    assert rep["f2-consistency"].verdict == "pass"


def test_unresolvable_wavevector_is_rejected() -> None:
    grid = GridSpec(1, 8)
    spec = SpectralNoiseSpec(wavevectors=((5,),), amplitudes=(1.0,))
    with pytest.raises(NoiseError):
        build_spectral_noise(spec, grid)


def test_wavevector_dimension_must_match_grid() -> None:
    spec = SpectralNoiseSpec(wavevectors=((1, 1),), amplitudes=(1.0,))
    with pytest.raises(NoiseError):
        build_spectral_noise(spec, GridSpec(1, 16))


def test_noise_divergence_of_sine_flux() -> None:
    # Unit mobility, unit increment on one sine mode: the flux is the
    # face average of sin and its divergence approximates cos within
    # the symbol bound (see tools/derive_expected.py).
    grid = GridSpec(1, 256)
    nf = _single_sine(grid)
    ones = GridState(grid, np.ones(grid.shape))
    term = noise_divergence_term(ones, nf, np.ones((1, 1))).values
    assert np.max(np.abs(term - np.cos(grid.axis()))) <= DIV_SYMBOL_BOUND_N256
    assert abs(float(np.sum(term))) <= 1e-10


# ---------------------------------------------------------------------------
# Increment sampling
# ---------------------------------------------------------------------------

def test_increment_moments() -> None:
    nf = _paired(GridSpec(1, 16))
    dt, steps, members = 0.01, 50, 60
    draws = np.concatenate([
        sample_increments(nf, dt, steps, seed=3, member=m).db.ravel()
        for m in range(members)
    ])
    assert abs(float(draws.mean())) <= 5.0 * np.sqrt(dt / draws.size)
    assert float(draws.var()) == pytest.approx(dt, rel=0.05)


def test_increments_are_reproducible_and_member_distinct() -> None:
    nf = _paired(GridSpec(1, 16))
    a = sample_increments(nf, 0.01, 8, seed=5, member=2)
    b = sample_increments(nf, 0.01, 8, seed=5, member=2)
    c = sample_increments(nf, 0.01, 8, seed=5, member=3)
    np.testing.assert_array_equal(a.db, b.db)
    assert np.any(a.db != c.db)


def test_adding_modes_keeps_existing_streams() -> None:
    # Each (member, kind, mode) triple owns a counter-based stream, so
    # enlarging the spectrum must not reshuffle earlier modes.
    grid = GridSpec(1, 16)
    small = build_spectral_noise(conservative_noise(2, 1.0), grid)
    large = build_spectral_noise(conservative_noise(4, 1.0), grid)
    a = sample_increments(small, 0.01, 8, seed=9)
    b = sample_increments(large, 0.01, 8, seed=9)
    np.testing.assert_array_equal(a.db, b.db[:, : a.db.shape[1], :])


def test_coarsening_block_sums_the_same_path() -> None:
    nf = _paired(GridSpec(1, 16))
    fine = sample_increments(nf, 0.005, 12, seed=1)
    coarse = coarsen_bundle(fine, 3)
    assert coarse.steps == 4 and coarse.dt == pytest.approx(0.015)
    np.testing.assert_allclose(
        coarse.db, fine.db.reshape(4, 3, *fine.db.shape[1:]).sum(axis=1)
    )
    with pytest.raises(NoiseError):
        coarsen_bundle(fine, 5)


def test_increment_request_respects_memory_budget() -> None:
    nf = _paired(GridSpec(1, 16))
    steps = MEMORY_BUDGET_BYTES // (nf.k_f * nf.grid.d * 8) + 1
    with pytest.raises(NoiseError):
        sample_increments(nf, 0.01, int(steps), seed=0)


def test_sampling_rejects_degenerate_requests() -> None:
    nf = _paired(GridSpec(1, 16))
    with pytest.raises(NoiseError):
        sample_increments(nf, 0.0, 4, seed=0)
    with pytest.raises(NoiseError):
        sample_increments(nf, 0.01, 0, seed=0)
