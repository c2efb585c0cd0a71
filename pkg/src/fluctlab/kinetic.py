"""
Level-set diagnostics of simulated fields.

The occupation function of a nonnegative field is the indicator of
0 < xi < rho(x).  Integrating it over xi recovers the field, and the
squared L2 distance between two occupation functions collapses to the
L1 distance of the fields, which is what the binned histograms here
cross-check.  Parabolic dissipation is pushed forward onto xi-bins by
depositing each cell-step's (phi'(rho) + alpha) |grad rho|^2 weight
into the bin containing rho, preserving the total exactly.

Bin layout: dyadic bins down to 2^-10 resolve the behaviour near zero,
unit-aligned uniform bins resolve the tail, so both the near-zero and
the large-density window statistics read off whole bins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericError
from .grid import GridSpec, GridState, favg_batch, grad_axis_batch
from .nonlin import NonlinearitySet

_EDGE_TOL = 1e-12


@dataclass
class KineticHistogram:
    """Per-bin time-space accumulations over one trajectory window.

    ``chi_mass[b]`` integrates the occupation function over bin b,
    space, and time; ``q_mass[b]`` collects the dissipation deposits of
    cells whose value falls in bin b.  ``metadata['q_total']`` is the
    unbinned running total, accumulated in step order so it can be
    compared bitwise against the solver's own accumulator.
    """

    xi_edges: np.ndarray
    chi_mass: np.ndarray
    q_mass: np.ndarray
    t_range: tuple
    metadata: dict = field(default_factory=dict)

    def rows(self) -> list:
        return [(float(self.xi_edges[b]), float(self.xi_edges[b + 1]),
                 float(self.chi_mass[b]), float(self.q_mass[b]))
                for b in range(len(self.chi_mass))]

    COLUMNS = ("bin_lo", "bin_hi", "chi_mass", "q_mass")


def default_edges(xi_max: float, uniform_width: float = 0.25,
                  min_exponent: int = -10) -> np.ndarray:
    """Dyadic edges on [2^min_exponent, 1] joined to uniform edges on
    [1, ceil(xi_max)], prefixed with 0."""
    if xi_max <= 1.0:
        raise ConfigurationError("xi_max must exceed 1")
    if not (1.0 / uniform_width).is_integer():
        raise ConfigurationError("uniform_width must divide 1")
    top = float(np.ceil(xi_max))
    dyadic = 2.0 ** np.arange(min_exponent, 1)
    count = round((top - 1.0) / uniform_width)
    uniform = 1.0 + uniform_width * np.arange(1, count + 1)
    return np.concatenate(([0.0], dyadic, uniform))


def _validate_edges(xi_edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(xi_edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2:
        raise ConfigurationError("xi_edges must be a 1-d array with at least two entries")
    if edges[0] != 0.0:
        raise ConfigurationError("xi_edges must start at 0")
    if np.any(np.diff(edges) <= 0.0):
        raise ConfigurationError("xi_edges must be strictly increasing")
    return edges


def kinetic_function_slice(rho: GridState, xi_edges) -> np.ndarray:
    """Per-bin occupancy of one field: each cell contributes the overlap
    length of (0, rho(x)) with each bin, values beyond the last edge
    landing in the last bin.  Summing bins and multiplying by the cell
    volume recovers the nonnegative part of the mass exactly."""
    edges = _validate_edges(xi_edges)
    vals = rho.values.ravel()
    overlap = np.clip(vals[:, None], edges[:-1], edges[1:]) - edges[:-1]
    occ = overlap.sum(axis=0)
    occ[-1] += np.maximum(vals - edges[-1], 0.0).sum()
    return occ


def dissipation_density(values: np.ndarray, nonlin: NonlinearitySet, alpha: float,
                        grid: GridSpec, clip: bool = True) -> np.ndarray:
    """Pointwise (phi'(rho) + alpha) |grad rho|^2 on a batch of fields,
    the squared gradient averaged from the adjacent faces per axis.

    Assumes phi' is finite on the range of the field; the solver calls
    this with the identical arguments so totals agree bitwise.
    """
    rc = np.maximum(values, 0.0) if clip else values
    gsq = np.zeros_like(values)
    for ax in range(grid.d):
        g = grad_axis_batch(values, grid, ax)
        g = g * g
        gsq += 0.5 * (g + np.roll(g, 1, axis=ax + 1))
    with np.errstate(all="ignore"):
        weight = nonlin.phi_cap_prime(rc) + alpha
    return weight * gsq


def accumulate_measure(traj, nonlin: NonlinearitySet, alpha: float,
                       xi_edges) -> KineticHistogram:
    """Accumulate occupation and dissipation histograms over a
    trajectory's snapshot sequence (left endpoints).

    A snapshot stride above one is accepted but recorded as a warning:
    the deposits then subsample the dissipation instead of summing it.
    """
    edges = _validate_edges(xi_edges)
    nbins = edges.size - 1
    grid = traj.spec
    dv = grid.cell_volume
    clip = bool(traj.metadata.get("clip", True))
    dt_meta = traj.metadata.get("dt")
    stride = int(traj.metadata.get("snapshot_stride", 1))

    chi = np.zeros(nbins)
    q = np.zeros(nbins)
    q_total = 0.0
    max_step_deposit = 0.0
    overflow = 0

    snaps = traj.snapshots
    for j in range(len(snaps) - 1):
        t0, vals = snaps[j]
        gap = snaps[j + 1][0] - t0
        if dt_meta is not None and stride == 1:
            gap = dt_meta
        flat = vals.ravel()

        overlap = np.clip(flat[:, None], edges[:-1], edges[1:]) - edges[:-1]
        occ = overlap.sum(axis=0)
        occ[-1] += np.maximum(flat - edges[-1], 0.0).sum()
        chi += occ * (dv * gap)

        dd = dissipation_density(vals[None], nonlin, alpha, grid, clip)
        if not np.all(np.isfinite(dd)):
            raise NumericError("non-finite dissipation deposit; "
                               "phi' may be unbounded on the field range")
        idx = np.searchsorted(edges, flat, side="right") - 1
        overflow += int(np.count_nonzero(idx >= nbins))
        idx = np.clip(idx, 0, nbins - 1)
        q += np.bincount(idx, weights=dd.ravel(), minlength=nbins) * (dv * gap)
        step_total = float(np.sum(dd)) * (dv * gap)
        q_total += step_total
        max_step_deposit = max(max_step_deposit, step_total)

    meta = {
        "q_total": q_total,
        "max_step_deposit": max_step_deposit,
        "overflow_cells": overflow,
        "alpha": alpha,
        "clip": clip,
    }
    if stride > 1:
        meta["stride_warning"] = (
            f"snapshot stride {stride} subsamples the dissipation deposits")
    return KineticHistogram(xi_edges=edges, chi_mass=chi, q_mass=q,
                            t_range=(snaps[0][0], snaps[-1][0]), metadata=meta)


def chi_distance_pair(rho_a: GridState, rho_b: GridState, xi_edges) -> tuple:
    """Both evaluations of the occupation distance: the direct L1 sum
    and the per-cell binned double integral."""
    if rho_a.spec != rho_b.spec:
        raise ConfigurationError("fields live on different grids")
    edges = _validate_edges(xi_edges)
    dv = rho_a.spec.cell_volume
    direct = float(np.sum(np.abs(rho_a.values - rho_b.values))) * dv
    a = rho_a.values.ravel()
    b = rho_b.values.ravel()
    ov_a = np.clip(a[:, None], edges[:-1], edges[1:]) - edges[:-1]
    ov_b = np.clip(b[:, None], edges[:-1], edges[1:]) - edges[:-1]
    ov_a[:, -1] += np.maximum(a - edges[-1], 0.0)
    ov_b[:, -1] += np.maximum(b - edges[-1], 0.0)
    binned = float(np.sum(np.abs(ov_a - ov_b))) * dv
    return direct, binned


def chi_distance(rho_a: GridState, rho_b: GridState, xi_edges=None) -> float:
    """Squared L2 distance of the occupation functions, which equals the
    L1 distance of the fields.  With ``xi_edges`` given, the binned
    double integral is evaluated too and must agree to one bin quantum
    per cell."""
    if rho_a.spec != rho_b.spec:
        raise ConfigurationError("fields live on different grids")
    if xi_edges is None:
        dv = rho_a.spec.cell_volume
        return float(np.sum(np.abs(rho_a.values - rho_b.values))) * dv
    direct, binned = chi_distance_pair(rho_a, rho_b, xi_edges)
    edges = np.asarray(xi_edges, dtype=np.float64)
    quantum = float(np.max(np.diff(edges)))
    if abs(direct - binned) > quantum * rho_a.values.size * rho_a.spec.cell_volume:
        raise NumericError(
            f"occupation distance mismatch: direct {direct:.6g}, binned {binned:.6g}")
    return direct


def _aligned_mass(hist: KineticHistogram, lo: float, hi: float) -> float:
    """Bin mass on [lo, hi]; the interval must be a union of bins."""
    edges = hist.xi_edges
    i = int(np.argmin(np.abs(edges - lo)))
    j = int(np.argmin(np.abs(edges - hi)))
    if abs(edges[i] - lo) > _EDGE_TOL * (1.0 + lo) or abs(edges[j] - hi) > _EDGE_TOL * (1.0 + hi):
        raise ConfigurationError(f"[{lo:g}, {hi:g}] is not aligned with the bin edges")
    return float(np.sum(hist.q_mass[i:j]))


def measure_zero_test(hist: KineticHistogram, betas) -> np.ndarray:
    """Per-beta normalized dissipation mass near zero: 1/beta times the
    mass on [beta/2, beta].  A vanishing trend shows up as a small
    minimum over a dyadic list of betas."""
    return np.array([_aligned_mass(hist, b / 2.0, b) / b for b in betas])


def measure_infinity_test(hist: KineticHistogram, m_list) -> np.ndarray:
    """Dissipation mass on the unit windows [M, M+1]: a field bounded
    below M sends the whole series to zero."""
    if max(m_list) + 1.0 > hist.xi_edges[-1] + _EDGE_TOL:
        raise ConfigurationError("bins do not cover the largest window")
    return np.array([_aligned_mass(hist, float(m), float(m) + 1.0) for m in m_list])
