"""
Explicit time stepping for conservative SPDEs with correlated noise.

One Euler-Maruyama step assembles a single face flux per axis

    flux = dt*( grad(diffusion) + alpha*grad(rho) - face_avg(drift)
              + correction fluxes ) + face_avg(mobility * noise field)

and applies one conservative divergence, so mass is preserved exactly
(up to rounding) whenever the source terms vanish.  Nonlinearities are
evaluated at max(rho, 0) when clipping is enabled; the state itself is
never clipped.  A step-size guard derived from the current field range
re-evaluates whenever the range extends, and aborts honestly when the
diffusion or correction stiffness cannot be resolved.

All drivers advance a batch of independent states together for speed;
each batch slot draws its increments from its own counter-based stream,
so results are independent of batch composition order and thread count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, NumericError, StabilityError
from .grid import GridSpec, GridState, div_axis_batch, favg_batch, grad_axis_batch
from .kinetic import dissipation_density
from .noise import NoiseField, sample_increments
from .nonlin import AuxFunctions, NonlinearitySet, check_assumptions, mollify_sigma, zero_fn

_RANGE_MARGIN = 0.01  # re-evaluate the step guard when the field range grows past this
_HARD_CHECKS = ("finite-on-grid", "phi-origin", "sigma-origin",
                "reaction-origin", "reaction-noise-origin", "phi-increasing")


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters.

    ``sigma_mollify_n`` swaps the mobility for its smooth surrogate
    before stepping.  ``clip_nonlinearity_args`` evaluates all scalar
    functions at max(rho, 0) so undershoots cannot leave their domain.
    ``override_assumptions`` admits models whose structural checks fail
    (signed models, controls with zero diffusion).
    """

    dt: float
    t_end: float
    alpha: float = 0.0
    scheme: str = "ito-euler"
    sigma_mollify_n: Optional[int] = None
    clip_nonlinearity_args: bool = True
    cfl_safety: float = 0.5
    snapshot_stride: Optional[int] = None
    override_assumptions: bool = False

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ConfigurationError("dt must be positive")
        if self.t_end < self.dt:
            raise ConfigurationError("t_end must be at least dt")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigurationError("alpha must lie in [0, 1)")
        if self.scheme not in ("ito-euler", "strat-heun"):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ConfigurationError("cfl_safety must lie in (0, 1]")

    @property
    def steps(self) -> int:
        n = round(self.t_end / self.dt)
        if abs(n * self.dt - self.t_end) > 1e-9 * self.t_end:
            raise ConfigurationError("t_end must be an integer multiple of dt")
        return int(n)


@dataclass
class Trajectory:
    """Result of one path: strided snapshots, per-step diagnostics,
    and a metadata record with fingerprints of every input."""

    spec: GridSpec
    snapshots: list
    diagnostics: dict
    metadata: dict

    @property
    def times(self) -> np.ndarray:
        return self.diagnostics["time"]

    def final_state(self) -> GridState:
        t, vals = self.snapshots[-1]
        return GridState(self.spec, vals.copy(), t)

    @property
    def truncated(self) -> bool:
        return self.metadata.get("truncated_at_step") is not None


@dataclass
class CascadeReport:
    """Consecutive-run distances along a regularization schedule."""

    schedule: list
    l1l1_distances: list
    metric_distances: list
    trajectories: list
    metadata: dict


def _fingerprint(*parts) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(repr(part).encode())
    return digest.hexdigest()[:16]


def _is_active(fn: Callable) -> bool:
    if fn is zero_fn:
        return False
    probe = np.array([0.0, 0.37, 1.0, 2.5])
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(probe), dtype=np.float64)
    return bool(np.any(vals != 0.0))


def ensure_admissible(nonlin: NonlinearitySet, p: float, override: bool) -> None:
    """Refuse models whose hard structural checks fail, unless overridden."""
    cache = nonlin.metadata.setdefault("_admissible", {})
    key = float(p)
    if key not in cache:
        rep = check_assumptions(nonlin)
        cache[key] = [r.check_id for r in rep.rows
                      if r.check_id in _HARD_CHECKS and r.passed is False]
    failed = cache[key]
    if failed and not override:
        raise ConfigurationError(
            f"model {nonlin.name!r} fails structural checks {failed}; "
            "set override_assumptions to run anyway")


# ---------------------------------------------------------------------------
# Batched stepping core
# ---------------------------------------------------------------------------

class _Model:
    """Precomputed term activity, face coefficients, and mode matrices
    for one (grid, nonlinearity, noise, config) combination."""

    def __init__(self, grid: GridSpec, nonlin: NonlinearitySet, noise: NoiseField,
                 cfg: SolverConfig):
        if noise.grid != grid:
            raise ConfigurationError("noise field was built for a different grid")
        self.grid = grid
        self.nonlin = nonlin
        self.noise = noise
        self.cfg = cfg
        self.d = grid.d
        self.dv = grid.cell_volume
        self.clip = cfg.clip_nonlinearity_args
        self.phi_active = _is_active(nonlin.phi_cap)
        self.sigma_active = _is_active(nonlin.sigma) and noise.k_f > 0
        self.nu_active = tuple(_is_active(nonlin.nu[a]) for a in range(self.d))
        self.reaction_active = _is_active(nonlin.lambda_low)
        self.rnoise_active = _is_active(nonlin.phi_low) and noise.k_g > 0
        self.max_f1 = float(np.max(noise.f1)) if noise.f1.size else 0.0
        self.corr1_active = self.sigma_active and self.max_f1 > 0.0
        self.corr2_active = self.sigma_active and bool(np.any(noise.f2 != 0.0))
        self.f1_face = [favg_batch(noise.f1[None], grid, a) for a in range(self.d)] \
            if self.corr1_active else None
        self.f2_face = [favg_batch(noise.f2[a][None], grid, a) for a in range(self.d)] \
            if self.corr2_active else None
        self.mat_f = noise.modes_f_matrix() if self.sigma_active else None
        self.mat_g = noise.modes_g_matrix() if self.rnoise_active else None
        self.aux = AuxFunctions.for_set(nonlin, nonlin.p)

    def args(self, rho: np.ndarray) -> np.ndarray:
        return np.maximum(rho, 0.0) if self.clip else rho

    def combined_field(self, mat: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """(B, K) increment weights against (K, cells) mode rows."""
        out = weights @ mat
        return out.reshape((weights.shape[0],) + self.grid.shape)

    def stiffness(self, rc: np.ndarray) -> float:
        """Diffusive stiffness of the current field range."""
        total = self.cfg.alpha
        with np.errstate(all="ignore"):
            if self.phi_active:
                total += float(np.max(self.nonlin.phi_cap_prime(rc)))
            if self.corr1_active:
                sp = self.nonlin.sigma_prime(rc)
                total += 0.5 * self.max_f1 * float(np.max(sp * sp))
        return total

    def dt_bound(self, rc: np.ndarray) -> float:
        s = self.stiffness(rc)
        if s <= 0.0:
            return np.inf
        return self.cfg.cfl_safety * self.grid.dx ** 2 / (2.0 * self.d * s)

    def drift_flux(self, rho: np.ndarray, rc: np.ndarray, axis: int,
                   with_correction: bool) -> Optional[np.ndarray]:
        """Deterministic face flux along one axis, before dt weighting."""
        grid = self.grid
        flux = None
        grad_rho = None
        if self.phi_active:
            gp = grad_axis_batch(self.nonlin.phi_cap(rc), grid, axis)
            flux = gp
        if self.cfg.alpha != 0.0:
            grad_rho = grad_axis_batch(rho, grid, axis)
            flux = self.cfg.alpha * grad_rho if flux is None else flux + self.cfg.alpha * grad_rho
        if self.nu_active[axis]:
            nu_face = favg_batch(self.nonlin.nu[axis](rc), grid, axis)
            flux = -nu_face if flux is None else flux - nu_face
        if with_correction and self.corr1_active:
            if grad_rho is None:
                grad_rho = grad_axis_batch(rho, grid, axis)
            sp = self.nonlin.sigma_prime(rc)
            corr = 0.5 * self.f1_face[axis] * favg_batch(sp * sp, grid, axis) * grad_rho
            flux = corr if flux is None else flux + corr
        if with_correction and self.corr2_active:
            corr = 0.5 * favg_batch(self.nonlin.sigma_sigma_prime(rc), grid, axis) \
                * self.f2_face[axis]
            flux = corr if flux is None else flux + corr
        return flux

    def noise_flux(self, rc: np.ndarray, db: np.ndarray, axis: int) -> Optional[np.ndarray]:
        """Stochastic face flux along one axis for one step."""
        if not self.sigma_active:
            return None
        combined = self.combined_field(self.mat_f, db[:, :, axis])
        return favg_batch(self.nonlin.sigma(rc) * combined, self.grid, axis)


def _step_ito_batch(model: _Model, rho: np.ndarray, db: Optional[np.ndarray],
                    dw: Optional[np.ndarray]) -> np.ndarray:
    dt = model.cfg.dt
    rc = model.args(rho)
    out = rho.copy()
    for axis in range(model.d):
        flux = model.drift_flux(rho, rc, axis, with_correction=True)
        nflux = model.noise_flux(rc, db, axis) if db is not None else None
        if flux is not None and nflux is not None:
            total = dt * flux + nflux
        elif flux is not None:
            total = dt * flux
        elif nflux is not None:
            total = nflux
        else:
            continue
        out += div_axis_batch(total, model.grid, axis)
    if model.reaction_active:
        out += dt * model.nonlin.lambda_low(rc)
    if model.rnoise_active and dw is not None:
        scalar = model.combined_field(model.mat_g, dw)
        out += model.nonlin.phi_low(rc) * scalar
    return out


def _step_strat_heun_batch(model: _Model, rho: np.ndarray,
                           db: Optional[np.ndarray]) -> np.ndarray:
    """Predictor-corrector treating the conservative noise in the
    midpoint sense; no explicit correction terms."""
    dt = model.cfg.dt

    def increment(state: np.ndarray) -> np.ndarray:
        rc = model.args(state)
        acc = np.zeros_like(state)
        for axis in range(model.d):
            flux = model.drift_flux(state, rc, axis, with_correction=False)
            nflux = model.noise_flux(rc, db, axis) if db is not None else None
            if flux is not None and nflux is not None:
                total = dt * flux + nflux
            elif flux is not None:
                total = dt * flux
            elif nflux is not None:
                total = nflux
            else:
                continue
            acc += div_axis_batch(total, model.grid, axis)
        return acc

    k1 = increment(rho)
    k2 = increment(rho + k1)
    return rho + 0.5 * (k1 + k2)


# ---------------------------------------------------------------------------
# Public single-state steps
# ---------------------------------------------------------------------------

def _effective_set(nonlin: NonlinearitySet, cfg: SolverConfig) -> NonlinearitySet:
    if cfg.sigma_mollify_n is not None:
        return mollify_sigma(nonlin, cfg.sigma_mollify_n)
    return nonlin


def _guard_dt(model: _Model, rc: np.ndarray) -> None:
    bound = model.dt_bound(rc)
    if model.cfg.dt > bound:
        raise StabilityError(
            f"dt={model.cfg.dt:g} exceeds the stability bound {bound:g} "
            f"(field range [{float(np.min(rc)):g}, {float(np.max(rc)):g}])")


def stability_bound(rho0: GridState, nonlin: NonlinearitySet, noise: NoiseField,
                    cfg: SolverConfig) -> float:
    """Largest stable dt at the initial field.

    The bound is re-evaluated during a run whenever the field range
    extends, so this is a precheck, not a guarantee.
    """
    model = _Model(rho0.spec, _effective_set(nonlin, cfg), noise, cfg)
    return float(model.dt_bound(model.args(rho0.values[None])))


def step_ito(rho: GridState, nonlin: NonlinearitySet, noise: NoiseField,
             incr: np.ndarray, cfg: SolverConfig) -> GridState:
    """One explicit step of the corrected (Ito-form) equation.

    ``incr`` carries the conservative increments, shape (K_F, d).
    """
    model = _Model(rho.spec, _effective_set(nonlin, cfg), noise, cfg)
    batch = rho.values[None]
    _guard_dt(model, model.args(batch))
    out = _step_ito_batch(model, batch, incr[None], None)[0]
    if not np.all(np.isfinite(out)):
        raise NumericError(f"non-finite values after step at t={rho.time:g}")
    return GridState(rho.spec, out, rho.time + cfg.dt)


def step_general(rho: GridState, nonlin: NonlinearitySet, noise: NoiseField,
                 incr_f: np.ndarray, incr_g: np.ndarray, cfg: SolverConfig) -> GridState:
    """Ito step plus cell-centered source terms: the reaction enters
    with dt, the non-conservative noise with its scalar increments, so
    the mass change over a step is exactly the cell sum of both."""
    model = _Model(rho.spec, _effective_set(nonlin, cfg), noise, cfg)
    batch = rho.values[None]
    _guard_dt(model, model.args(batch))
    out = _step_ito_batch(model, batch, incr_f[None],
                          incr_g[None] if incr_g is not None else None)[0]
    if not np.all(np.isfinite(out)):
        raise NumericError(f"non-finite values after step at t={rho.time:g}")
    return GridState(rho.spec, out, rho.time + cfg.dt)


def step_strat_heun(rho: GridState, nonlin: NonlinearitySet, noise: NoiseField,
                    incr: np.ndarray, cfg: SolverConfig) -> GridState:
    """One midpoint-sense predictor-corrector step, the reference the
    corrected scheme is validated against."""
    model = _Model(rho.spec, _effective_set(nonlin, cfg), noise, cfg)
    batch = rho.values[None]
    _guard_dt(model, model.args(batch))
    out = _step_strat_heun_batch(model, batch, incr[None])[0]
    if not np.all(np.isfinite(out)):
        raise NumericError(f"non-finite values after step at t={rho.time:g}")
    return GridState(rho.spec, out, rho.time + cfg.dt)


# ---------------------------------------------------------------------------
# Batched driver
# ---------------------------------------------------------------------------

class _Accumulators:
    """Per-member running time integrals of dissipation functionals."""

    def __init__(self, batch: int):
        self.theta_dissipation = np.zeros(batch)
        self.entropy_dissipation = np.zeros(batch)
        self.visc_p_dissipation = np.zeros(batch)
        self.q_dissipation = np.zeros(batch)

    def as_dicts(self) -> list:
        return [
            {"theta_dissipation": float(self.theta_dissipation[b]),
             "entropy_dissipation": float(self.entropy_dissipation[b]),
             "visc_p_dissipation": float(self.visc_p_dissipation[b]),
             "q_dissipation": float(self.q_dissipation[b])}
            for b in range(len(self.theta_dissipation))
        ]


def _advance_batch(grid: GridSpec, nonlin: NonlinearitySet, noise: NoiseField,
                   cfg: SolverConfig, rho0: np.ndarray, slot_members: list,
                   seed: int, track_functionals: bool = False,
                   preset_increments: Optional[tuple] = None,
                   track_pairs: Optional[int] = None) -> dict:
    """Advance a batch of states; returns snapshots, per-member
    diagnostics, accumulators, and truncation info.

    ``preset_increments`` overrides the sampled bundles with arrays of
    shape (steps, members, K, d) and (steps, members, K), letting
    refinement ladders share one Brownian realization.  With
    ``track_pairs`` = P, slots i and P+i are read as a coupled pair and
    their L1 distance is recorded at every step.
    """
    model = _Model(grid, nonlin, noise, cfg)
    steps = cfg.steps
    batch = rho0.shape[0]
    stride = cfg.snapshot_stride or max(1, steps // 200)

    if preset_increments is not None:
        db_all, dw_all = preset_increments
        slot_index = np.array(slot_members)
    else:
        members = sorted(set(slot_members))
        bundles = {m: sample_increments(noise, cfg.dt, steps, seed, member=m)
                   for m in members}
        slot_index = np.array([members.index(m) for m in slot_members])
        db_all = np.stack([bundles[m].db for m in members], axis=1) if noise.k_f else None
        dw_all = np.stack([bundles[m].dw for m in members], axis=1) if noise.k_g else None

    p = nonlin.p
    aux = model.aux
    dv = grid.cell_volume
    space_axes = tuple(range(1, grid.d + 1))
    cols = ("mass", "l1", "l2", "lp", "min", "max", "energy", "entropy")
    diag = {c: np.empty((steps + 1, batch)) for c in cols}
    diag["time"] = np.arange(steps + 1) * cfg.dt
    acc = _Accumulators(batch)
    pair_dist = np.empty((steps + 1, track_pairs)) if track_pairs else None
    snapshots = []
    truncated_at = None
    reason = ""

    rho = np.array(rho0, dtype=np.float64, copy=True)
    checked_lo, checked_hi = np.inf, -np.inf
    bound = np.inf

    def record(i: int, state: np.ndarray) -> bool:
        rc = model.args(state)
        with np.errstate(all="ignore"):
            diag["mass"][i] = state.sum(axis=space_axes) * dv
            diag["l1"][i] = np.abs(state).sum(axis=space_axes) * dv
            diag["l2"][i] = np.sqrt((state * state).sum(axis=space_axes) * dv)
            diag["lp"][i] = (np.abs(state) ** p).sum(axis=space_axes) * dv
            lo = state.min(axis=space_axes)
            hi = state.max(axis=space_axes)
            diag["min"][i] = lo
            diag["max"][i] = hi
            if aux.has_theta:
                theta = aux.theta_phi_p(rc)
                e = np.zeros(batch)
                for ax in range(grid.d):
                    g = grad_axis_batch(theta, grid, ax)
                    e += (g * g).sum(axis=space_axes)
                diag["energy"][i] = e * dv
            else:
                diag["energy"][i] = np.nan
            if aux.has_entropy:
                diag["entropy"][i] = aux.psi_phi(rc).sum(axis=space_axes) * dv
            else:
                diag["entropy"][i] = np.nan
            if track_pairs:
                pair_dist[i] = np.abs(state[:track_pairs]
                                      - state[track_pairs:]).sum(axis=space_axes) * dv
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def accumulate(state: np.ndarray, energy_row: np.ndarray) -> None:
        rc = model.args(state)
        dt = cfg.dt
        if model.phi_active or cfg.alpha != 0.0:
            # same deposit function and operation order as the binned
            # accumulation, so totals can be compared bitwise
            dd = dissipation_density(state, model.nonlin, cfg.alpha, grid, model.clip)
            acc.q_dissipation += dd.sum(axis=space_axes) * (dv * dt)
        if aux.has_theta:
            acc.theta_dissipation += energy_row * dt
        if model.phi_active:
            root = np.sqrt(np.maximum(model.nonlin.phi_cap(rc), 0.0))
            e = np.zeros(batch)
            for ax in range(grid.d):
                g = grad_axis_batch(root, grid, ax)
                e += (g * g).sum(axis=space_axes)
            acc.entropy_dissipation += e * dv * dt
        if cfg.alpha != 0.0:
            e = np.zeros(batch)
            w = np.abs(state) ** (p - 2.0) if p != 2.0 else None
            for ax in range(grid.d):
                g = grad_axis_batch(state, grid, ax)
                gsq = g * g
                if w is not None:
                    gsq = _face_weight(w, grid, ax) * gsq
                e += gsq.sum(axis=space_axes)
            acc.visc_p_dissipation += cfg.alpha * e * dv * dt

    ok = record(0, rho)
    snapshots.append((0.0, rho.copy()))
    if not ok:
        truncated_at, reason = 0, "non-finite initial data"
        steps = 0

    for i in range(steps):
        rc = model.args(rho)
        lo, hi = float(np.min(rc)), float(np.max(rc))
        if lo < checked_lo - _RANGE_MARGIN * (1.0 + abs(lo)) \
                or hi > checked_hi + _RANGE_MARGIN * (1.0 + abs(hi)) \
                or not np.isfinite(bound):
            bound = model.dt_bound(rc)
            checked_lo, checked_hi = lo, hi
            if cfg.dt > bound:
                truncated_at, reason = i, (
                    f"stability bound {bound:g} below dt={cfg.dt:g} "
                    f"(field range [{lo:g}, {hi:g}])")
                break
        if track_functionals:
            accumulate(rho, diag["energy"][i])
        db = db_all[i][slot_index] if db_all is not None else None
        dw = dw_all[i][slot_index] if dw_all is not None else None
        if cfg.scheme == "strat-heun":
            rho = _step_strat_heun_batch(model, rho, db)
        else:
            rho = _step_ito_batch(model, rho, db, dw)
        ok = record(i + 1, rho)
        if (i + 1) % stride == 0 or i + 1 == steps:
            snapshots.append(((i + 1) * cfg.dt, rho.copy()))
        if not ok:
            bad = np.where(~np.isfinite(diag["max"][i + 1]))[0]
            member = slot_members[int(bad[0])] if bad.size else -1
            truncated_at, reason = i + 1, f"non-finite values (member {member})"
            break

    if truncated_at is not None:
        last = truncated_at
        for c in cols:
            diag[c] = diag[c][: last + 1]
        diag["time"] = diag["time"][: last + 1]
        if pair_dist is not None:
            pair_dist = pair_dist[: last + 1]

    return {
        "snapshots": snapshots,
        "diagnostics": diag,
        "functionals": acc.as_dicts() if track_functionals else None,
        "truncated_at": truncated_at,
        "reason": reason,
        "stride": stride,
        "pair_distances": pair_dist,
    }


def _face_weight(w: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    return favg_batch(w, grid, axis)


def _member_trajectory(grid: GridSpec, result: dict, slot: int, member: int,
                       meta: dict) -> Trajectory:
    diag = {c: v[:, slot] if v.ndim == 2 else v for c, v in result["diagnostics"].items()}
    snaps = [(t, vals[slot]) for t, vals in result["snapshots"]]
    md = dict(meta)
    md["member"] = member
    md["truncated_at_step"] = result["truncated_at"]
    if result["truncated_at"] is not None:
        md["truncation_reason"] = result["reason"]
    if result["functionals"] is not None:
        md["functionals"] = result["functionals"][slot]
    md["snapshot_stride"] = result["stride"]
    return Trajectory(spec=grid, snapshots=snaps, diagnostics=diag, metadata=md)


def _base_metadata(nonlin, noise, cfg, seed) -> dict:
    return {
        "seed": seed,
        "nonlinearity": nonlin.name,
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "alpha": cfg.alpha,
        "scheme": cfg.scheme,
        "clip": cfg.clip_nonlinearity_args,
        "config_fingerprint": _fingerprint(cfg),
        "noise_fingerprint": _fingerprint(noise.spec_f, noise.spec_g, noise.grid),
        "nonlinearity_fingerprint": _fingerprint(nonlin.name, nonlin.m, nonlin.p),
    }


def run(rho0: GridState, nonlin: NonlinearitySet, noise: NoiseField,
        cfg: SolverConfig, seed: int, track_functionals: bool = False) -> Trajectory:
    """Advance one path to the horizon.

    Deterministic in (inputs, seed).  Step failures truncate the
    trajectory and annotate its metadata instead of raising.
    """
    eff = _effective_set(nonlin, cfg)
    ensure_admissible(eff, eff.p, cfg.override_assumptions)
    result = _advance_batch(rho0.spec, eff, noise, cfg, rho0.values[None], [0],
                            seed, track_functionals)
    return _member_trajectory(rho0.spec, result, 0, 0,
                              _base_metadata(eff, noise, cfg, seed))


def run_ensemble(rho0: GridState, nonlin: NonlinearitySet, noise: NoiseField,
                 cfg: SolverConfig, seed: int, members: int,
                 track_functionals: bool = False,
                 increments: Optional[tuple] = None) -> list:
    """Advance an ensemble of independent paths from shared initial
    data; member i draws from the stream keyed (seed, i) unless
    ``increments`` supplies the arrays directly."""
    eff = _effective_set(nonlin, cfg)
    ensure_admissible(eff, eff.p, cfg.override_assumptions)
    batch = np.broadcast_to(rho0.values, (members,) + rho0.spec.shape).copy()
    result = _advance_batch(rho0.spec, eff, noise, cfg, batch, list(range(members)),
                            seed, track_functionals, preset_increments=increments)
    meta = _base_metadata(eff, noise, cfg, seed)
    return [_member_trajectory(rho0.spec, result, i, i, meta) for i in range(members)]


def run_coupled(rho0_a: GridState, rho0_b: GridState, nonlin: NonlinearitySet,
                noise: NoiseField, cfg: SolverConfig, seed: int) -> tuple:
    """Advance two states through the identical realization and emit
    their L1 distance at every step."""
    trajs, dist = run_coupled_ensemble([(rho0_a, rho0_b)], nonlin, noise, cfg, seed)
    return trajs[0][0], trajs[0][1], dist[:, 0]


def run_coupled_ensemble(pairs: list, nonlin: NonlinearitySet, noise: NoiseField,
                         cfg: SolverConfig, seed: int) -> tuple:
    """Advance coupled pairs; pair i shares increment stream (seed, i).

    Returns ([(traj_a, traj_b)] per pair, L1 distances of shape
    (steps+1, pairs), one row per step).
    """
    eff = _effective_set(nonlin, cfg)
    ensure_admissible(eff, eff.p, cfg.override_assumptions)
    count = len(pairs)
    grid = pairs[0][0].spec
    batch = np.empty((2 * count,) + grid.shape)
    for i, (a, b) in enumerate(pairs):
        batch[i] = a.values
        batch[count + i] = b.values
    slot_members = list(range(count)) + list(range(count))
    result = _advance_batch(grid, eff, noise, cfg, batch, slot_members, seed,
                            track_pairs=count)

    meta = _base_metadata(eff, noise, cfg, seed)
    trajs = [(_member_trajectory(grid, result, i, i, meta),
              _member_trajectory(grid, result, count + i, i, meta))
             for i in range(count)]
    return trajs, result["pair_distances"]


def run_cascade(rho0: GridState, nonlin: NonlinearitySet, noise: NoiseField,
                cfg_base: SolverConfig, schedule: list, seed: int) -> CascadeReport:
    """Run the regularization schedule on one shared realization.

    Schedule entries are (alpha_k, n_k) with the viscosity decreasing
    and the mollification index increasing.  Reports the L1-in-(space,
    time) distance between consecutive entries and the truncated-sum
    metric built from smooth truncations at scales 1/k, k <= 20.
    """
    from .nonlin import Psi_delta

    if len(schedule) >= 2:
        alphas = [a for a, _ in schedule]
        ns = [n for _, n in schedule]
        if any(a2 >= a1 for a1, a2 in zip(alphas, alphas[1:])):
            raise ConfigurationError("schedule viscosities must strictly decrease")
        if any(n2 <= n1 for n1, n2 in zip(ns, ns[1:])):
            raise ConfigurationError("schedule mollification indices must strictly increase")

    trajectories = []
    for alpha_k, n_k in schedule:
        cfg_k = replace(cfg_base, alpha=float(alpha_k), sigma_mollify_n=int(n_k),
                        snapshot_stride=cfg_base.snapshot_stride or 1)
        trajectories.append(run(rho0, nonlin, noise, cfg_k, seed))

    dv = rho0.spec.cell_volume
    l1l1, metric = [], []
    for t1, t2 in zip(trajectories, trajectories[1:]):
        times = [t for t, _ in t1.snapshots]
        if len(t2.snapshots) != len(t1.snapshots):
            raise NumericError("cascade entries produced unequal snapshot grids")
        gaps = np.diff(times)
        dist = 0.0
        r = np.zeros(20)
        for j, gap in enumerate(gaps):
            a = t1.snapshots[j][1]
            b = t2.snapshots[j][1]
            dist += gap * float(np.sum(np.abs(a - b))) * dv
            for k in range(1, 21):
                da = Psi_delta(1.0 / k, a)
                db = Psi_delta(1.0 / k, b)
                r[k - 1] += gap * float(np.sum(np.abs(da - db))) * dv
        l1l1.append(dist)
        metric.append(float(np.sum(2.0 ** -np.arange(1, 21) * r / (1.0 + r))))

    meta = _base_metadata(nonlin, noise, cfg_base, seed)
    meta["schedule"] = list(schedule)
    return CascadeReport(schedule=list(schedule), l1l1_distances=l1l1,
                         metric_distances=metric, trajectories=trajectories,
                         metadata=meta)
