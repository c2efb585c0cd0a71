"""Grid operators: face-centered calculus on the periodic torus."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from fluctlab import GridSpec, GridState, initial_state
from fluctlab.grid import (
    GridError,
    divergence,
    grad_batch,
    gradient,
    lap_batch,
    laplacian,
    norms_and_functionals,
)

# Frozen reference values (see tools/derive_expected.py).
GRAD_ENERGY_DISCRETE_N256 = 0.78535873766949171
GRAD_ENERGY_CONTINUUM = 0.78539816339744828


def _sine_state(n: int, d: int = 1) -> GridState:
    return initial_state(GridSpec(d, n), kind="sine", offset=1.0, amplitude=0.5)


def test_face_gradient_of_sine_matches_shifted_cosine() -> None:
    # The forward difference of sin(x) equals cos at the face midpoint
    # times sinc(dx/2); at n=256 the deviation is below 1e-4.
    spec = GridSpec(1, 256)
    x = spec.axis()
    state = GridState(spec, np.sin(x))
    g = gradient(state)[0]
    assert np.max(np.abs(g - np.cos(x + spec.dx / 2.0))) <= 1e-4


def test_divergence_of_averaged_flux_within_symbol_bound() -> None:
    # Flux = face average of sin; its divergence approximates cos with
    # symbol error |sin(dx)/dx * cos(dx/2) - 1| (see tools/derive_expected.py).
    spec = GridSpec(1, 256)
    x = spec.axis()
    dx = spec.dx
    flux = 0.5 * (np.sin(x) + np.sin(x + dx))
    div = divergence(flux[None], spec).values
    bound = abs(np.sin(dx) / dx * np.cos(dx / 2.0) - 1.0) + 1e-15
    assert bound == pytest.approx(1.7568638509679680e-4, rel=1e-12)
    assert np.max(np.abs(div - np.cos(x))) <= bound


def test_laplacian_is_exact_three_point_stencil_1d() -> None:
    rng = np.random.default_rng(0)
    spec = GridSpec(1, 64)
    u = rng.standard_normal(spec.shape)
    inv = 1.0 / spec.dx
    stencil = ((np.roll(u, -1) - u) * inv - (u - np.roll(u, 1)) * inv) * inv
    np.testing.assert_array_equal(lap_batch(u[None], spec)[0], stencil)


def test_laplacian_is_sum_of_axis_stencils_2d() -> None:
    rng = np.random.default_rng(1)
    spec = GridSpec(2, 32)
    u = rng.standard_normal(spec.shape)
    inv = 1.0 / spec.dx

    def stencil(v: np.ndarray, axis: int) -> np.ndarray:
        return ((np.roll(v, -1, axis) - v) * inv - (v - np.roll(v, 1, axis)) * inv) * inv

    np.testing.assert_array_equal(
        lap_batch(u[None], spec)[0], stencil(u, 0) + stencil(u, 1)
    )


@pytest.mark.parametrize("k", [1, 2, 5])
def test_laplacian_fourier_symbol(k: int) -> None:
    # sin(kx) is an exact eigenvector with eigenvalue -(2/dx^2)(1 - cos(k dx)).
    spec = GridSpec(1, 64)
    x = spec.axis()
    u = np.sin(k * x)
    symbol = -(2.0 / spec.dx**2) * (1.0 - np.cos(k * spec.dx))
    lap = laplacian(GridState(spec, u)).values
    assert np.max(np.abs(lap - symbol * u)) <= 1e-9 * abs(symbol)


def test_gradient_energy_of_half_sine() -> None:
    state = _sine_state(256)
    g = gradient(state)
    energy = float(np.sum(g * g) * state.spec.cell_volume)
    assert energy == pytest.approx(GRAD_ENERGY_DISCRETE_N256, rel=1e-12)
    assert energy == pytest.approx(GRAD_ENERGY_CONTINUUM, abs=1e-3)


@settings(max_examples=50, deadline=None)
@given(
    flux=hnp.arrays(
        np.float64,
        st.integers(min_value=2, max_value=32).map(lambda k: 2 * k),
        elements=st.floats(-1e6, 1e6, allow_nan=False),
    )
)
def test_divergence_sums_to_zero(flux: np.ndarray) -> None:
    # Backward differences telescope around the torus, so every flux
    # conserves mass up to rounding.
    spec = GridSpec(1, flux.shape[0])
    total = float(np.sum(divergence(flux[None], spec).values) * spec.cell_volume)
    scale = max(1.0, float(np.sum(np.abs(flux))) / spec.dx)
    assert abs(total) <= 1e-12 * scale


def test_divergence_sums_to_zero_2d() -> None:
    rng = np.random.default_rng(2)
    spec = GridSpec(2, 16)
    flux = rng.standard_normal((2,) + spec.shape)
    total = float(np.sum(divergence(flux, spec).values))
    assert abs(total) <= 1e-10


def test_divergence_rejects_mismatched_flux_shape() -> None:
    spec = GridSpec(1, 16)
    with pytest.raises(GridError):
        divergence(np.zeros((1, 8)), spec)


@pytest.mark.parametrize("d,n", [(3, 16), (0, 16), (1, 2), (1, 15)])
def test_grid_spec_rejects_bad_shapes(d: int, n: int) -> None:
    with pytest.raises(GridError):
        GridSpec(d, n)


def test_initial_state_kinds() -> None:
    spec = GridSpec(1, 64)
    const = initial_state(spec, kind="constant", offset=2.0)
    assert np.all(const.values == 2.0)

    sine = initial_state(spec, kind="sine", offset=1.0, amplitude=0.5)
    assert sine.values == pytest.approx(1.0 + 0.5 * np.sin(spec.axis()))

    bump = initial_state(spec, kind="bump", amplitude=0.3, width=1.0)
    assert np.all(bump.values >= 0.0)
    assert np.max(bump.values) == pytest.approx(0.3, rel=1e-6)
    # Compact support: the bump vanishes far from its center.
    assert bump.values[0] == 0.0

    with pytest.raises(GridError):
        initial_state(spec, kind="plateau")


def test_initial_sine_2d_splits_amplitude_between_axes() -> None:
    spec = GridSpec(2, 32)
    state = initial_state(spec, kind="sine", offset=1.0, amplitude=0.5)
    xx, yy = spec.meshgrid()
    expected = 1.0 + 0.25 * np.sin(xx) + 0.25 * np.sin(yy)
    assert state.values == pytest.approx(expected)


def test_norms_row_on_known_field() -> None:
    spec = GridSpec(1, 128)
    state = GridState(spec, np.full(spec.shape, 2.0))
    row = norms_and_functionals(state)
    assert row.mass == pytest.approx(4.0 * np.pi, rel=1e-14)
    assert row.l1 == pytest.approx(4.0 * np.pi, rel=1e-14)
    assert row.l2 == pytest.approx(2.0 * np.sqrt(2.0 * np.pi), rel=1e-14)
    assert row.minimum == 2.0 and row.maximum == 2.0
    assert np.isnan(row.energy) and np.isnan(row.entropy)


def test_gradient_lives_on_forward_faces() -> None:
    # Component a at index i is the difference across cells i and i+1.
    spec = GridSpec(2, 8)
    rng = np.random.default_rng(3)
    u = rng.standard_normal(spec.shape)
    g = grad_batch(u[None], spec)[:, 0]
    inv = 1.0 / spec.dx
    np.testing.assert_array_equal(g[0], (np.roll(u, -1, 0) - u) * inv)
    np.testing.assert_array_equal(g[1], (np.roll(u, -1, 1) - u) * inv)
