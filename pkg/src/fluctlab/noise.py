"""
Spatially correlated driving noise built from trigonometric modes.

A conservative noise field is a finite sum of spatial modes, each paired
with an independent d-dimensional Brownian motion; an optional
non-conservative field pairs scalar modes with scalar Brownian motions.
For a sine mode with a cosine partner at the same wavevector the
covariance diagnostics are evaluated analytically before
discretization: the squared-amplitude sum is exactly constant, the
cross term vanishes identically, and the squared-gradient sum is the
amplitude-weighted squared wavenumber.

Increments come from counter-based Philox streams keyed by
(seed, member, field kind, mode index), so results are independent of
evaluation order, adding a mode never changes the draws of existing
modes, and coupled runs can replay the same bundle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, favg_batch, grad_batch, lap_batch
from .report import AssumptionReport

MEMORY_BUDGET_BYTES = 2 << 30  # refuse increment requests above 2 GiB

_KIND_CONSERVATIVE = 0
_KIND_SCALAR = 1


class NoiseError(ValueError):
    """Raised for invalid mode specifications or resource overruns."""


@dataclass(frozen=True)
class SpectralNoiseSpec:
    """Trigonometric mode content of one noise field.

    Attributes
    ----------
    wavevectors : tuple of integer tuples, one per base mode, nonzero
    amplitudes : tuple of floats aligned with ``wavevectors``
    includes_cosine_partner : add the 90-degree partner of every mode,
        which makes the covariance diagnostics spatially constant
    """

    wavevectors: tuple
    amplitudes: tuple
    includes_cosine_partner: bool = True

    def __post_init__(self) -> None:
        if len(self.wavevectors) != len(self.amplitudes):
            raise NoiseError("wavevectors and amplitudes must align")
        seen = set()
        for k in self.wavevectors:
            k = tuple(int(c) for c in k)
            if all(c == 0 for c in k):
                raise NoiseError("zero wavevector is not a valid mode")
            if k in seen:
                raise NoiseError(f"duplicate wavevector {k}")
            seen.add(k)
        for a in self.amplitudes:
            if not np.isfinite(a):
                raise NoiseError("amplitudes must be finite")

    @property
    def dim(self) -> int:
        return len(self.wavevectors[0]) if self.wavevectors else 0

    def sum_sq_amplitude(self) -> float:
        factor = 2.0 if self.includes_cosine_partner else 1.0
        return factor * float(sum(a * a for a in self.amplitudes))

    def sum_sq_gradient(self) -> float:
        factor = 2.0 if self.includes_cosine_partner else 1.0
        return factor * float(
            sum(a * a * sum(c * c for c in k)
                for a, k in zip(self.amplitudes, self.wavevectors))
        )


def _mode_fields(spec: SpectralNoiseSpec, grid: GridSpec) -> tuple:
    """Realize mode values and analytic gradients on the grid.

    Returns (values (K,)+shape, grads (K, d)+shape, pair flags (K,)).
    Pairs are laid out per wavevector as [sine, cosine] so indices of
    existing modes never move when modes are appended.
    """
    coords = grid.meshgrid()
    values, grads, paired = [], [], []
    for a, k in zip(spec.amplitudes, spec.wavevectors):
        if len(k) != grid.d:
            raise NoiseError(f"wavevector {k} has wrong dimension for a {grid.d}d grid")
        if max(abs(int(c)) for c in k) > grid.n // 2:
            raise NoiseError(f"wavevector {k} is not resolvable on {grid.n} cells")
        phase = sum(int(c) * ax for c, ax in zip(k, coords))
        sin_v, cos_v = a * np.sin(phase), a * np.cos(phase)
        sin_g = np.stack([int(c) * cos_v for c in k])
        cos_g = np.stack([-int(c) * sin_v for c in k])
        values.append(sin_v)
        grads.append(sin_g)
        paired.append(spec.includes_cosine_partner)
        if spec.includes_cosine_partner:
            values.append(cos_v)
            grads.append(cos_g)
            paired.append(True)
    if values:
        return np.stack(values), np.stack(grads), np.array(paired)
    shape = (0,) + grid.shape
    return (np.zeros(shape), np.zeros((0, grid.d) + grid.shape), np.zeros(0, dtype=bool))


@dataclass
class NoiseField:
    """Discretized noise environment: modes plus covariance diagnostics.

    ``f1`` is the pointwise sum of squared conservative modes, ``f2``
    half the gradient of that sum (equal to the mode/gradient cross
    sum), ``f3`` the sum of squared mode gradients, and ``g1`` the
    squared-sum of the scalar modes.  ``div_f2`` is half the discrete
    Laplacian of ``f1``.
    """

    grid: GridSpec
    spec_f: SpectralNoiseSpec
    spec_g: SpectralNoiseSpec = None
    modes_f: np.ndarray = None        # (K_F,) + shape
    modes_f_grad: np.ndarray = None   # (K_F, d) + shape
    modes_g: np.ndarray = None        # (K_G,) + shape
    f1: np.ndarray = None
    f2: np.ndarray = None             # (d,) + shape
    f3: np.ndarray = None
    g1: np.ndarray = None
    div_f2: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    @property
    def k_f(self) -> int:
        return self.modes_f.shape[0]

    @property
    def k_g(self) -> int:
        return 0 if self.modes_g is None else self.modes_g.shape[0]

    @property
    def stationary(self) -> bool:
        return bool(self.metadata.get("stationary", False))

    def modes_f_matrix(self) -> np.ndarray:
        """(K_F, cells) row-major view for fast per-step combination."""
        return self.modes_f.reshape(self.k_f, -1)

    def modes_g_matrix(self) -> np.ndarray:
        return self.modes_g.reshape(self.k_g, -1)


def build_spectral_noise(spec: SpectralNoiseSpec, grid: GridSpec,
                         scalar_spec: SpectralNoiseSpec = None) -> NoiseField:
    """Realize mode fields and covariance diagnostics on a grid.

    Fully paired sine/cosine content yields exactly constant ``f1`` and
    identically zero ``f2`` (the trigonometric identity is applied
    before discretization); unpaired modes contribute pointwise.
    """
    vals, grads, paired = _mode_fields(spec, grid)
    shape = grid.shape
    f1 = np.zeros(shape)
    f2 = np.zeros((grid.d,) + shape)
    f3 = np.zeros(shape)
    for idx, (a, k) in enumerate(zip(spec.amplitudes, spec.wavevectors)):
        k2 = float(sum(int(c) ** 2 for c in k))
        if spec.includes_cosine_partner:
            f1 += a * a
            f3 += a * a * k2
        else:
            f1 += vals[idx] ** 2
            f3 += np.sum(grads[idx] ** 2, axis=0)
            f2 += vals[idx] * grads[idx]
    div_f2 = 0.5 * lap_batch(f1[None], grid)[0]

    modes_g = None
    g1 = None
    g_sum_sq = 0.0
    if scalar_spec is not None:
        g_vals, _, _ = _mode_fields(scalar_spec, grid)
        modes_g = g_vals
        if scalar_spec.includes_cosine_partner:
            g1 = np.full(shape, scalar_spec.sum_sq_amplitude())
        else:
            g1 = np.sum(g_vals ** 2, axis=0)
        g_sum_sq = scalar_spec.sum_sq_amplitude()

    meta = {
        "k_f": int(vals.shape[0]),
        "k_g": 0 if modes_g is None else int(modes_g.shape[0]),
        "sum_sq_amplitude": spec.sum_sq_amplitude(),
        "sum_sq_gradient": spec.sum_sq_gradient(),
        "scalar_sum_sq_amplitude": g_sum_sq,
        "max_f1": float(np.max(f1)) if f1.size else 0.0,
        "max_f3": float(np.max(f3)) if f3.size else 0.0,
        "max_div_f2": float(np.max(np.abs(div_f2))),
        "stationary": bool(np.max(np.abs(div_f2)) <= 1e-12 * (1.0 + float(np.max(np.abs(f1))))),
    }
    return NoiseField(grid=grid, spec_f=spec, spec_g=scalar_spec,
                      modes_f=vals, modes_f_grad=grads, modes_g=modes_g,
                      f1=f1, f2=f2, f3=f3, g1=g1, div_f2=div_f2, metadata=meta)


def verify_noise_assumptions(noise: NoiseField, tol: float = None) -> AssumptionReport:
    """Check the covariance diagnostics a noise environment must satisfy.

    Verifies finiteness and sign of the squared-mode sums, consistency
    of the cross term with half the cell-centered gradient of the
    squared-amplitude sum, boundedness of its divergence, and records
    the stationarity flag (divergence identically zero).

    The default tolerance carries a dx^2 term sized by the unpaired
    spectral content: the cross term is assembled from analytic mode
    gradients, so it departs from the discrete gradient of the
    squared sum by the symbol error a^2 |k|^3 dx^2 per unpaired mode,
    while fully paired spectra cancel exactly.
    """
    report = AssumptionReport(subject="noise")
    max_f1 = float(np.max(noise.f1)) if noise.f1.size else 0.0
    if tol is None:
        symbol = 0.0
        if not noise.spec_f.includes_cosine_partner:
            symbol = sum(a * a * float(sum(int(c) ** 2 for c in k)) ** 1.5
                         for a, k in zip(noise.spec_f.amplitudes,
                                         noise.spec_f.wavevectors))
        tol = 1e-8 * (1.0 + max_f1) + noise.grid.dx**2 * symbol

    finite = bool(np.all(np.isfinite(noise.f1)) and np.all(np.isfinite(noise.f3))
                  and np.all(np.isfinite(noise.f2)))
    report.add("modes-finite", finite, constant=max_f1)
    report.add("f1-nonnegative", bool(np.all(noise.f1 >= 0.0)), constant=float(np.min(noise.f1)))
    report.add("f3-nonnegative", bool(np.all(noise.f3 >= 0.0)), constant=float(np.min(noise.f3)))

    # Face component a at index i sits between cells i and i+1, so the
    # cell-centered value averages the face with its backward neighbor.
    grad_f1 = grad_batch(noise.f1[None], noise.grid)
    cell_grad = np.stack([
        0.5 * (grad_f1[a, 0] + np.roll(grad_f1[a, 0], 1, axis=a))
        for a in range(noise.grid.d)
    ])
    dev = float(np.max(np.abs(noise.f2 - 0.5 * cell_grad))) if noise.f2.size else 0.0
    report.add("f2-consistency", dev <= tol, constant=dev, note=f"tol={tol:.3e}")

    max_div = float(np.max(np.abs(noise.div_f2)))
    report.add("div-f2-bounded", bool(np.isfinite(max_div)), constant=max_div)
    stationary = max_div <= tol
    report.add("stationary", stationary, constant=max_div,
               note="div of cross term identically zero" if stationary else "non-constant f1")

    if noise.g1 is not None:
        report.add("g1-nonnegative", bool(np.all(noise.g1 >= 0.0)),
                   constant=float(np.min(noise.g1)))

    report.metadata.update(noise.metadata)
    report.metadata["f2_deviation"] = dev
    report.metadata["tol"] = tol
    return report


# ---------------------------------------------------------------------------
# Increment sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathBundle:
    """Brownian increments for one path over a fixed step grid.

    ``db`` has shape (steps, K_F, d): one d-dimensional increment per
    conservative mode per step.  ``dw`` has shape (steps, K_G).  The
    bundle is reusable across coupled runs so both members see the same
    realization.
    """

    seed: int
    member: int
    dt: float
    steps: int
    db: np.ndarray
    dw: np.ndarray


def _mode_stream(seed: int, member: int, kind: int, mode: int) -> np.random.Generator:
    word = (np.uint64(member) << np.uint64(33)) | (np.uint64(kind) << np.uint64(32)) | np.uint64(mode)
    key = np.array([np.uint64(seed), word], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_increments(noise: NoiseField, dt: float, steps: int, seed: int,
                      member: int = 0) -> PathBundle:
    """Draw all increments for one path.

    Each (member, field kind, mode) triple owns a counter-based stream,
    so the result does not depend on sampling order or on which other
    modes exist, and repeated calls with the same arguments are
    identical.
    """
    if dt <= 0.0 or steps <= 0:
        raise NoiseError("dt and steps must be positive")
    d = noise.grid.d
    nbytes = steps * noise.k_f * d * 8 + steps * noise.k_g * 8
    if nbytes > MEMORY_BUDGET_BYTES:
        raise NoiseError(
            f"increment request of {nbytes} bytes exceeds budget {MEMORY_BUDGET_BYTES}")
    root = np.sqrt(dt)
    db = np.empty((steps, noise.k_f, d))
    for mode in range(noise.k_f):
        gen = _mode_stream(seed, member, _KIND_CONSERVATIVE, mode)
        db[:, mode, :] = gen.standard_normal((steps, d))
    db *= root
    dw = np.empty((steps, noise.k_g))
    for mode in range(noise.k_g):
        gen = _mode_stream(seed, member, _KIND_SCALAR, mode)
        dw[:, mode] = gen.standard_normal(steps)
    dw *= root
    return PathBundle(seed=seed, member=member, dt=dt, steps=steps, db=db, dw=dw)


def coarsen_bundle(bundle: PathBundle, factor: int) -> PathBundle:
    """Block-sum increments onto a step grid ``factor`` times coarser.

    The coarse bundle follows the same Brownian path, which is what a
    time-step ladder needs for pathwise comparisons.
    """
    if factor <= 0 or bundle.steps % factor != 0:
        raise NoiseError(f"steps {bundle.steps} not divisible by factor {factor}")
    coarse = bundle.steps // factor
    db = bundle.db.reshape(coarse, factor, *bundle.db.shape[1:]).sum(axis=1)
    dw = bundle.dw.reshape(coarse, factor, *bundle.dw.shape[1:]).sum(axis=1)
    return PathBundle(seed=bundle.seed, member=bundle.member, dt=bundle.dt * factor,
                      steps=coarse, db=db, dw=dw)


def noise_divergence_term(sigma_state, noise: NoiseField, increments: np.ndarray):
    """Conservative divergence of the mode-weighted flux for one step.

    ``increments`` has shape (K_F, d).  The combined cell field per
    axis is the increment-weighted sum of modes; the flux is the face
    average of its product with the mobility field, and the result is
    the discrete divergence, which sums to zero over the grid.
    """
    from .grid import GridState, div_batch

    grid = noise.grid
    sig = sigma_state.values if isinstance(sigma_state, GridState) else np.asarray(sigma_state)
    mat = noise.modes_f_matrix()
    flux = np.empty((grid.d, 1) + grid.shape)
    for a in range(grid.d):
        combined = (increments[:, a] @ mat).reshape(grid.shape)
        flux[a] = favg_batch((sig * combined)[None], grid, a)
    out = div_batch(flux, grid)[0]
    time = sigma_state.time if isinstance(sigma_state, GridState) else 0.0
    return GridState(grid, out, time)
