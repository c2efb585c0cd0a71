"""
Nonlinearity quintuples, their auxiliary integrals, and assumption checkers.

A model is described by five scalar functions of the density:

- ``phi_cap``    diffusion nonlinearity (enters through its Laplacian)
- ``sigma``      mobility of the conservative noise
- ``nu``         drift flux, one component per axis
- ``phi_low``    amplitude of the non-conservative noise
- ``lambda_low`` source term

Auxiliary primitives (a p-weighted diffusion scale, a logarithmic
primitive, and a mobility primitive) are evaluated in closed form for
power laws and by adaptive quadrature otherwise, with the substitution
s = u**2 taming the square-root singularity of the derivative weight at
the origin.

The assumption checker evaluates every structural inequality the
well-posedness theory imposes on a log-uniform sample grid and reports
each with its witnessing constant, or a counterexample point, or
``undetermined`` where alternatives cannot be decided from samples.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad

from .errors import ConfigurationError, DomainError, NumericError
from .report import AssumptionReport

SAMPLE_GRID_MIN = 1e-8
SAMPLE_GRID_MAX = 1e4
SAMPLE_GRID_POINTS = 400

_DECADE_POINTS = 67  # about two decades of the default sample grid
_TREND_SLOPE = 0.1   # log-log slope beyond which a ratio counts as diverging
# Envelope growth across half the outermost window matching that slope.
_GROWTH_FACTOR = 10.0 ** (2.0 * _TREND_SLOPE)


def sample_grid() -> np.ndarray:
    return np.geomspace(SAMPLE_GRID_MIN, SAMPLE_GRID_MAX, SAMPLE_GRID_POINTS)


# ---------------------------------------------------------------------------
# Scalar function helpers
# ---------------------------------------------------------------------------

def zero_fn(xi):
    return np.zeros_like(np.asarray(xi, dtype=np.float64))


def _power_fn(coef: float, expo: float) -> Callable:
    if coef == 0.0:
        return zero_fn

    def f(xi):
        xi = np.asarray(xi, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return coef * np.power(xi, expo)

    return f


def _fd_derivative(f: Callable) -> Callable:
    """Central finite difference for custom inputs, one-sided at 0."""

    def fp(xi):
        xi = np.asarray(xi, dtype=np.float64)
        h = 1e-6 * np.maximum(np.abs(xi), 1.0)
        lo = np.maximum(xi - h, 0.0)
        hi = xi + h
        return (f(hi) - f(lo)) / (hi - lo)

    return fp


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


# ---------------------------------------------------------------------------
# The model quintuple
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonlinearitySet:
    """Scalar nonlinearities of one model, with derivatives.

    ``sigma_sigma_prime`` is stored separately so removable
    singularities of the product (for example a square-root mobility,
    whose product with its derivative is constant) are evaluated
    without forming inf*0.  ``nu``/``nu_prime`` hold per-axis
    components; component a applies on grids with more than a axes.
    ``phi_power``/``sigma_power`` record (coefficient, exponent) when
    the function is exactly a power, unlocking closed-form primitives.
    """

    name: str
    phi_cap: Callable
    phi_cap_prime: Callable
    sigma: Callable = zero_fn
    sigma_prime: Callable = zero_fn
    sigma_sigma_prime: Callable = zero_fn
    nu: tuple = (zero_fn, zero_fn)
    nu_prime: tuple = (zero_fn, zero_fn)
    phi_low: Callable = zero_fn
    lambda_low: Callable = zero_fn
    m: float = 1.0
    p: float = 2.0
    phi_power: Optional[tuple] = None
    sigma_power: Optional[tuple] = None
    sigma_support: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def nu_abs(self, xi) -> np.ndarray:
        """Euclidean magnitude of the drift flux."""
        n0 = self.nu[0](xi)
        n1 = self.nu[1](xi)
        return np.sqrt(n0 * n0 + n1 * n1)


def make_preset(name: str, params: dict = None, **kw) -> NonlinearitySet:
    """Construct one of the named model quintuples.

    Presets: ``power-law-dk`` (m, optional p), ``zero-range`` (m, eps),
    ``dawson-watanabe``, ``kawasaki-ohta``, ``fisher-kpp`` (gamma,
    eps), ``asep`` (eps).
    """
    params = dict(params or {})
    params.update(kw)

    def need(key):
        if key not in params:
            raise ConfigurationError(f"preset {name!r} requires parameter {key!r}")
        return float(params[key])

    p = float(params.get("p", 2.0))
    if name == "power-law-dk":
        m = need("m")
        return NonlinearitySet(
            name=name,
            phi_cap=_power_fn(1.0, m), phi_cap_prime=_power_fn(m, m - 1.0),
            sigma=_power_fn(1.0, m / 2.0), sigma_prime=_power_fn(m / 2.0, m / 2.0 - 1.0),
            sigma_sigma_prime=_power_fn(m / 2.0, m - 1.0),
            m=m, p=p, phi_power=(1.0, m), sigma_power=(1.0, m / 2.0),
        )
    if name == "zero-range":
        m, eps = need("m"), need("eps")
        return NonlinearitySet(
            name=name,
            phi_cap=_power_fn(eps / 2.0, m), phi_cap_prime=_power_fn(eps * m / 2.0, m - 1.0),
            sigma=_power_fn(np.sqrt(eps), m / 2.0),
            sigma_prime=_power_fn(np.sqrt(eps) * m / 2.0, m / 2.0 - 1.0),
            sigma_sigma_prime=_power_fn(eps * m / 2.0, m - 1.0),
            nu=(_power_fn(-1.0, m), zero_fn), nu_prime=(_power_fn(-m, m - 1.0), zero_fn),
            m=m, p=p, phi_power=(eps / 2.0, m), sigma_power=(np.sqrt(eps), m / 2.0),
        )
    if name == "dawson-watanabe":
        return NonlinearitySet(
            name=name,
            phi_cap=_power_fn(1.0, 2.0), phi_cap_prime=_power_fn(2.0, 1.0),
            phi_low=_power_fn(1.0, 0.5),
            m=2.0, p=p, phi_power=(1.0, 2.0), sigma_power=(0.0, 1.0),
        )
    if name == "kawasaki-ohta":
        def phi(xi):
            return np.arctan(np.asarray(xi, dtype=np.float64))

        def phi_prime(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return 1.0 / (1.0 + xi * xi)

        def sigma(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return np.power(1.0 + xi * xi, 0.25)

        def sigma_prime(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return 0.5 * xi * np.power(1.0 + xi * xi, -0.75)

        def ssp(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return 0.5 * xi / np.sqrt(1.0 + xi * xi)

        return NonlinearitySet(name=name, phi_cap=phi, phi_cap_prime=phi_prime,
                               sigma=sigma, sigma_prime=sigma_prime, sigma_sigma_prime=ssp,
                               m=1.0, p=p)
    if name == "fisher-kpp":
        gamma, eps = need("gamma"), need("eps")

        def lam(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return gamma * xi * (1.0 - xi)

        def phi_low(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return eps * np.sqrt(np.maximum(xi * (1.0 - xi), 0.0))

        return NonlinearitySet(name=name, phi_cap=_power_fn(1.0, 1.0),
                               phi_cap_prime=_power_fn(1.0, 0.0),
                               lambda_low=lam, phi_low=phi_low,
                               m=1.0, p=p, phi_power=(1.0, 1.0), sigma_power=(0.0, 1.0))
    if name == "asep":
        eps = need("eps")
        root = np.sqrt(eps)

        def sigma(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return root * np.sqrt(np.maximum(xi * (1.0 - xi), 0.0))

        def sigma_prime(xi):
            xi = np.asarray(xi, dtype=np.float64)
            t = xi * (1.0 - xi)
            with np.errstate(divide="ignore", invalid="ignore"):
                raw = root * (1.0 - 2.0 * xi) / (2.0 * np.sqrt(t))
            out = np.where(t > 0.0, raw, 0.0)
            out = np.where(xi == 0.0, np.inf, out)
            return np.where(xi == 1.0, -np.inf, out)

        def ssp(xi):
            xi = np.asarray(xi, dtype=np.float64)
            inside = (xi > 0.0) & (xi < 1.0)
            return np.where(inside, eps * (0.5 - xi), 0.0)

        def nu0(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return -xi * (1.0 - xi)

        def nu0_prime(xi):
            xi = np.asarray(xi, dtype=np.float64)
            return 2.0 * xi - 1.0

        return NonlinearitySet(name=name, phi_cap=_power_fn(eps / 2.0, 1.0),
                               phi_cap_prime=_power_fn(eps / 2.0, 0.0),
                               sigma=sigma, sigma_prime=sigma_prime, sigma_sigma_prime=ssp,
                               nu=(nu0, zero_fn), nu_prime=(nu0_prime, zero_fn),
                               m=1.0, p=p, phi_power=(eps / 2.0, 1.0))
    raise ConfigurationError(f"unknown preset {name!r}")


def custom_set(name: str, phi_cap: Callable, phi_cap_prime: Callable = None,
               sigma: Callable = None, sigma_prime: Callable = None,
               sigma_sigma_prime: Callable = None, nu: tuple = None,
               nu_prime: tuple = None, phi_low: Callable = None,
               lambda_low: Callable = None, m: float = 1.0, p: float = 2.0,
               phi_power: tuple = None, sigma_power: tuple = None) -> NonlinearitySet:
    """Assemble a custom quintuple; missing derivatives fall back to
    central finite differences."""
    if phi_cap_prime is None:
        phi_cap_prime = _fd_derivative(phi_cap)
    if sigma is None:
        sigma = zero_fn
        sigma_prime = zero_fn
        sigma_sigma_prime = zero_fn
    else:
        if sigma_prime is None:
            sigma_prime = _fd_derivative(sigma)
        if sigma_sigma_prime is None:
            sp = sigma_prime

            def sigma_sigma_prime(xi, _s=sigma, _sp=sp):
                return _s(xi) * _sp(xi)

    if nu is None:
        nu = (zero_fn, zero_fn)
        nu_prime = (zero_fn, zero_fn)
    elif nu_prime is None:
        nu_prime = tuple(_fd_derivative(c) for c in nu)
    return NonlinearitySet(name=name, phi_cap=phi_cap, phi_cap_prime=phi_cap_prime,
                           sigma=sigma, sigma_prime=sigma_prime,
                           sigma_sigma_prime=sigma_sigma_prime,
                           nu=nu, nu_prime=nu_prime,
                           phi_low=phi_low or zero_fn, lambda_low=lambda_low or zero_fn,
                           m=m, p=p, phi_power=phi_power, sigma_power=sigma_power)


# ---------------------------------------------------------------------------
# Auxiliary primitives
# ---------------------------------------------------------------------------

class _CumulativeTable:
    """Primitive of an integrand given in the substituted variable u,
    where the argument is u**2.  Linear interpolation on a uniform
    u-grid keeps accuracy uniform down to the origin; the table extends
    itself (under a lock) when evaluated beyond its cap."""

    def __init__(self, integrand_u: Callable, cap: float = 16.0, points_per_unit: int = 1024):
        self._integrand = integrand_u
        self._ppu = points_per_unit
        self._lock = threading.Lock()
        self._build(cap)

    def _build(self, cap: float) -> None:
        u_max = np.sqrt(cap)
        count = max(64, int(np.ceil(u_max * self._ppu))) + 1
        u = np.linspace(0.0, u_max, count)
        with np.errstate(all="ignore"):
            h = self._integrand(u)
        h = np.where(np.isfinite(h), h, 0.0)  # integrable endpoint singularities
        table = cumulative_trapezoid(h, u, initial=0.0)
        self._cap = cap
        self._u = u
        self._table = table

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        top = float(np.max(xi)) if xi.size else 0.0
        if top > self._cap:
            with self._lock:
                if top > self._cap:
                    self._build(2.0 * top)
        u, table = self._u, self._table
        return np.interp(np.sqrt(np.maximum(xi, 0.0)), u, table)


class AuxFunctions:
    """Auxiliary primitives of one model at one integrability exponent.

    Attributes are vectorized callables: ``theta_phi_p`` integrates the
    p-weighted square root of the diffusion derivative, ``theta_phi_2``
    its p=2 specialization, ``psi_phi`` the logarithm of the diffusion
    nonlinearity, and ``psi_sigma_p`` the p-weighted mobility product.
    Closed forms are used for exact powers; otherwise tables built once
    at construction serve all evaluations.
    """

    def __init__(self, nonlin: NonlinearitySet, p: float):
        self.nonlin = nonlin
        self.p = float(p)
        self.theta_phi_p = self._make_theta(self.p)
        self.theta_phi_2 = self._make_theta(2.0) if self.p != 2.0 else self.theta_phi_p
        self.psi_phi = self._make_psi_phi()
        self.psi_sigma_p = self._make_psi_sigma(self.p)
        self.has_theta = self.theta_phi_p is not None
        self.has_entropy = self.psi_phi is not None

    @classmethod
    def for_set(cls, nonlin: NonlinearitySet, p: float) -> "AuxFunctions":
        cache = nonlin.metadata.setdefault("_aux_cache", {})
        key = float(p)
        if key not in cache:
            cache[key] = cls(nonlin, key)
        return cache[key]

    # -- constructors -------------------------------------------------

    def _make_theta(self, p: float) -> Optional[Callable]:
        nl = self.nonlin
        if nl.phi_power is not None:
            coef, expo = nl.phi_power
            if coef == 0.0 or expo <= 0.0:
                return None
            pref = 2.0 * np.sqrt(coef * expo) / (expo + p - 1.0)
            return _power_fn(pref, (expo + p - 1.0) / 2.0)

        def integrand(u):
            s = u * u
            return 2.0 * np.power(u, p - 1.0) * np.sqrt(nl.phi_cap_prime(s))

        probe = np.array([1e-6, 1e-2, 1.0, 10.0])
        if not np.all(nl.phi_cap_prime(probe) > 0.0):
            return None
        return _CumulativeTable(integrand)

    def _make_psi_phi(self) -> Optional[Callable]:
        nl = self.nonlin
        if nl.phi_power is not None:
            coef, expo = nl.phi_power
            if coef == 0.0:
                return None
            logc = np.log(coef)

            def psi(xi):
                xi = np.asarray(xi, dtype=np.float64)
                with np.errstate(divide="ignore", invalid="ignore"):
                    xlogx = np.where(xi > 0.0, xi * np.log(xi), 0.0)
                return xi * logc + expo * (xlogx - xi)

            return psi
        probe = np.array([1e-6, 1e-2, 1.0, 10.0])
        vals = self.nonlin.phi_cap(probe)
        if not np.all(vals > 0.0):
            return None

        def integrand(u):
            s = u * u
            return 2.0 * u * np.log(nl.phi_cap(s))

        return _CumulativeTable(integrand)

    def _make_psi_sigma(self, p: float) -> Optional[Callable]:
        nl = self.nonlin
        if nl.sigma_power is not None:
            coef, expo = nl.sigma_power
            if coef == 0.0 or expo == 0.0:
                return zero_fn
            top = p + 2.0 * expo - 2.0
            if top <= 0.0:
                return None
            return _power_fn(coef * coef * expo / top, top)

        def integrand(u):
            s = u * u
            return 2.0 * np.power(u, 2.0 * p - 3.0) * nl.sigma_sigma_prime(s)

        return _CumulativeTable(integrand)


def _quad_substituted(integrand_u: Callable, xi: float) -> float:
    if xi < 0.0:
        raise DomainError("argument must be nonnegative")
    if xi == 0.0:
        return 0.0
    val, err = quad(integrand_u, 0.0, np.sqrt(xi), epsabs=1e-10, epsrel=1e-10, limit=200)
    if not np.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise NumericError(f"quadrature did not converge (estimate {val}, error {err})")
    return float(val)


def theta_phi_p(nonlin: NonlinearitySet, p: float, xi: float) -> float:
    """Scalar p-weighted diffusion-scale primitive at high accuracy."""
    if nonlin.phi_power is not None:
        coef, expo = nonlin.phi_power
        if coef == 0.0 or expo <= 0.0:
            raise DomainError("diffusion nonlinearity has no positive derivative")
        pref = 2.0 * np.sqrt(coef * expo) / (expo + p - 1.0)
        return float(pref * xi ** ((expo + p - 1.0) / 2.0))

    def integrand(u):
        s = u * u
        return 2.0 * u ** (p - 1.0) * np.sqrt(float(nonlin.phi_cap_prime(s)))

    return _quad_substituted(integrand, xi)


def psi_phi(nonlin: NonlinearitySet, xi: float) -> float:
    """Scalar logarithmic primitive of the diffusion nonlinearity."""
    if nonlin.phi_power is not None:
        coef, expo = nonlin.phi_power
        if coef == 0.0:
            raise DomainError("diffusion nonlinearity vanishes identically")
        if xi == 0.0:
            return 0.0
        return float(xi * np.log(coef) + expo * (xi * np.log(xi) - xi))
    if float(nonlin.phi_cap(1e-8)) <= 0.0 or float(nonlin.phi_cap(1.0)) <= 0.0:
        raise DomainError("diffusion nonlinearity is not positive away from 0")

    def integrand(u):
        return 2.0 * u * np.log(float(nonlin.phi_cap(u * u)))

    return _quad_substituted(integrand, xi)


def psi_sigma_p(nonlin: NonlinearitySet, p: float, xi: float) -> float:
    """Scalar p-weighted mobility primitive at high accuracy."""
    if nonlin.sigma_power is not None:
        coef, expo = nonlin.sigma_power
        if coef == 0.0 or expo == 0.0:
            return 0.0
        top = p + 2.0 * expo - 2.0
        if top <= 0.0:
            raise DomainError("mobility primitive diverges at the origin")
        return float(coef * coef * expo / top * xi ** top)

    def integrand(u):
        s = u * u
        return 2.0 * u ** (2.0 * p - 3.0) * float(nonlin.sigma_sigma_prime(s))

    return _quad_substituted(integrand, xi)


# ---------------------------------------------------------------------------
# Cutoff family
# ---------------------------------------------------------------------------

def phi_beta(beta: float, xi):
    """Piecewise-linear ramp: 0 below beta/2, 1 above beta."""
    xi = np.asarray(xi, dtype=np.float64)
    return np.clip((xi - beta / 2.0) * (2.0 / beta), 0.0, 1.0)


def zeta_M(M: float, xi):
    """Piecewise-linear cutoff: 1 up to M, 0 beyond M+1."""
    xi = np.asarray(xi, dtype=np.float64)
    return np.clip(M + 1.0 - xi, 0.0, 1.0)


def psi_delta(delta: float, xi):
    """Cubic smoothstep ramp: 0 below delta/2, 1 above delta; the
    derivative is bounded by 3/delta."""
    xi = np.asarray(xi, dtype=np.float64)
    return _smoothstep((xi - delta / 2.0) / (delta / 2.0))


def Psi_delta(delta: float, xi):
    """Smooth truncation of the identity: equals xi beyond delta and
    stays within delta of it everywhere."""
    xi = np.asarray(xi, dtype=np.float64)
    return psi_delta(delta, xi) * xi


def cutoff_eval(kind: str, param: float, xi: float) -> float:
    """Evaluate one member of the cutoff family by name."""
    if kind in ("phi_beta", "psi_delta", "Psi_delta") and param <= 0.0:
        raise ConfigurationError(f"{kind} requires a positive parameter")
    if kind == "zeta_M" and param < 1.0:
        raise ConfigurationError("zeta_M requires parameter at least 1")
    table = {"phi_beta": phi_beta, "zeta_M": zeta_M,
             "psi_delta": psi_delta, "Psi_delta": Psi_delta}
    if kind not in table:
        raise ConfigurationError(f"unknown cutoff kind {kind!r}")
    return float(table[kind](param, xi))


# ---------------------------------------------------------------------------
# Mobility mollification
# ---------------------------------------------------------------------------

def mollify_sigma(nonlin: NonlinearitySet, n: int) -> NonlinearitySet:
    """Replace the mobility by a smooth surrogate with a bounded,
    compactly supported derivative.

    The derivative is tabulated in the square-root coordinate u with
    xi = u*u, clamped at level n, ramped to zero ahead of n+1, extended
    evenly through the origin, convolved with a polynomial bump whose
    width in xi is about sqrt(xi)/n, and integrated from 0 against the
    bounded integrand 2*u*sigma'(u*u).  The surrogate vanishes at 0,
    its derivative is supported in [0, n+1], and it converges to the
    original mobility uniformly on compact subsets of the open
    half-line as n grows; away from the origin the error is O(1/n^2).
    """
    if n < 1:
        raise ConfigurationError("mollification index must be at least 1")
    n = int(n)
    L = n + 1.0
    du = 1.0 / (16.0 * n)
    u = np.arange(0.0, np.sqrt(L) + du / 2.0, du)
    x = u * u
    with np.errstate(all="ignore"):
        sp = np.asarray(nonlin.sigma_prime(x), dtype=np.float64)
    sp = np.where(np.isnan(sp), 0.0, sp)
    sp = np.clip(sp, -float(n), float(n))
    ramp_width = 1.0 - 0.5 / n  # keeps the ramp inside [n, n+1], positive for n=1
    sp *= 1.0 - _smoothstep((x - n) / ramp_width)

    r = 8  # kernel half-width in table cells
    t = np.arange(-r, r + 1) / r
    kernel = (1.0 - t * t) ** 3
    kernel /= kernel.sum()  # discrete unit mass: constants mollify to themselves
    padded = np.concatenate([sp[r:0:-1], sp, np.zeros(r)])
    sp_smooth = np.convolve(padded, kernel, mode="valid")
    table = cumulative_trapezoid(sp_smooth * 2.0 * u, dx=du, initial=0.0)

    def sigma_n(xi, _u=u, _t=table):
        xi = np.asarray(xi, dtype=np.float64)
        return np.interp(np.sqrt(np.maximum(xi, 0.0)), _u, _t)

    def sigma_n_prime(xi, _u=u, _t=sp_smooth):
        xi = np.asarray(xi, dtype=np.float64)
        xc = np.maximum(xi, 0.0)
        return np.where(xc > _u[-1] * _u[-1], 0.0, np.interp(np.sqrt(xc), _u, _t))

    def ssp_n(xi):
        return sigma_n(xi) * sigma_n_prime(xi)

    meta = {"mollify_n": n, "sigma_prime_bound": float(np.max(np.abs(sp_smooth)))}
    return replace(nonlin, name=f"{nonlin.name}-mollified-{n}",
                   sigma=sigma_n, sigma_prime=sigma_n_prime, sigma_sigma_prime=ssp_n,
                   sigma_power=None, sigma_support=float(L), metadata=meta)


# ---------------------------------------------------------------------------
# Assumption checker
# ---------------------------------------------------------------------------

def _trend_slope(xs: np.ndarray, vals: np.ndarray) -> float:
    """Log-log slope; zeros and non-finite values disqualify the fit."""
    good = np.isfinite(vals) & (vals > 0.0)
    if np.count_nonzero(good) < 8:
        return 0.0
    return float(np.polyfit(np.log(xs[good]), np.log(vals[good]), 1)[0])


def _bounded(xs: np.ndarray, vals: np.ndarray, at_zero: bool = True,
             at_infinity: bool = True) -> tuple:
    """Judge boundedness of a nonnegative ratio on the sample grid.

    Returns (passed, constant, witness).  A ratio fails when any value
    is non-finite or when its upper envelope over the outermost window
    keeps growing toward the checked end.  Comparing envelope maxima of
    the two window halves, rather than fitting a line through the raw
    samples, keeps bounded oscillating ratios from reading as trends.
    """
    vals = np.asarray(vals, dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        i = int(np.argmax(~np.isfinite(vals)))
        return False, float("inf"), float(xs[i])
    i = int(np.argmax(vals))
    c, witness = float(vals[i]), float(xs[i])
    k = min(_DECADE_POINTS, len(xs))
    h = k // 2
    tiny = 1e-12 * max(c, 1.0)
    if at_zero and float(np.max(vals[:h])) > _GROWTH_FACTOR * float(np.max(vals[h:k])) + tiny:
        return False, c, float(xs[0])
    if at_infinity and float(np.max(vals[-h:])) > _GROWTH_FACTOR * float(np.max(vals[-k:-h])) + tiny:
        return False, c, float(xs[-1])
    return True, c, witness


def _envelope(xs, theta_sq):
    return 1.0 + xs + theta_sq


def check_assumptions(nonlin: NonlinearitySet, grid: np.ndarray = None,
                      tol: float = 1e-9) -> AssumptionReport:
    """Evaluate every structural inequality of the well-posedness
    theory on a sample grid.

    The report carries one row per inequality with the witnessing
    constant or counterexample point, plus the estimated source
    Lipschitz and noise-amplitude Hoelder constants in its metadata
    (consumed by the expectation-contraction experiment).  Rows with a
    stationary-noise alternative carry a note; combining them with a
    noise report is the caller's job.
    """
    xs = sample_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    p = nonlin.p
    rep = AssumptionReport(subject=nonlin.name)
    with np.errstate(all="ignore"):
        phi = np.asarray(nonlin.phi_cap(xs), dtype=np.float64)
        phip = np.asarray(nonlin.phi_cap_prime(xs), dtype=np.float64)
        sig = np.asarray(nonlin.sigma(xs), dtype=np.float64)
        sigp = np.asarray(nonlin.sigma_prime(xs), dtype=np.float64)
        ssp = np.asarray(nonlin.sigma_sigma_prime(xs), dtype=np.float64)
        nu_abs = np.asarray(nonlin.nu_abs(xs), dtype=np.float64)
        lam = np.asarray(nonlin.lambda_low(xs), dtype=np.float64)
        low = np.asarray(nonlin.phi_low(xs), dtype=np.float64)

    # --- origin and monotonicity -------------------------------------
    rep.add("phi-origin", bool(abs(float(nonlin.phi_cap(0.0))) == 0.0),
            constant=abs(float(nonlin.phi_cap(0.0))), witness=0.0)
    rep.add("sigma-origin", bool(abs(float(nonlin.sigma(0.0))) == 0.0),
            constant=abs(float(nonlin.sigma(0.0))), witness=0.0)
    rep.add("reaction-origin", bool(abs(float(nonlin.lambda_low(0.0))) == 0.0),
            constant=abs(float(nonlin.lambda_low(0.0))), witness=0.0)
    rep.add("reaction-noise-origin", bool(abs(float(nonlin.phi_low(0.0))) == 0.0),
            constant=abs(float(nonlin.phi_low(0.0))), witness=0.0)
    pos = bool(np.all(phip > 0.0))
    rep.add("phi-increasing", pos,
            constant=float(np.min(phip)),
            witness=float(xs[int(np.argmin(phip))]))
    finite = np.all(np.isfinite(phi)) and np.all(np.isfinite(sig)) and np.all(np.isfinite(nu_abs)) \
        and np.all(np.isfinite(lam)) and np.all(np.isfinite(low))
    rep.add("finite-on-grid", bool(finite))

    # --- basic block (six items) --------------------------------------
    near = xs[xs <= 1e-2]
    with np.errstate(all="ignore"):
        ratio = np.asarray(nonlin.sigma(near), dtype=np.float64) ** 2 / near
    ok, c, w = _bounded(near, ratio, at_zero=True, at_infinity=False)
    rep.add("sigma-sq-vanishing", ok, constant=c, witness=w)

    with np.errstate(all="ignore"):
        ssp_near = np.abs(np.asarray(nonlin.sigma_sigma_prime(near), dtype=np.float64))
    if float(np.max(ssp_near)) == 0.0:
        rep.add("sigma-product-origin", True, constant=0.0, witness=0.0)
    else:
        k = min(_DECADE_POINTS, len(near))
        slope = _trend_slope(near[:k], np.maximum(ssp_near[:k], 0.0))
        vanishes = bool(np.all(np.isfinite(ssp_near)) and slope > 0.05)
        rep.add("sigma-product-origin", vanishes, constant=float(ssp_near[0]),
                witness=float(near[0]),
                note="alternative: divergence-free noise cross term" if not vanishes else "")

    run_sig = np.maximum.accumulate(sig * sig)
    ok, c, w = _bounded(xs, run_sig / (1.0 + xs + sig * sig), at_zero=False)
    rep.add("sigma-running-sup-growth", ok, constant=c, witness=w)
    run_nu = np.maximum.accumulate(nu_abs)
    ok, c, w = _bounded(xs, run_nu / (1.0 + xs + nu_abs), at_zero=False)
    rep.add("drift-running-sup-growth", ok, constant=c, witness=w)

    # --- moment block (seven items, p-dependent) -----------------------
    aux = AuxFunctions.for_set(nonlin, p)
    theta_sq = aux.theta_phi_p(xs) ** 2 if aux.has_theta else np.zeros_like(xs)
    theta2_sq = aux.theta_phi_2(xs) ** 2 if aux.has_theta else np.zeros_like(xs)
    env = _envelope(xs, theta_sq)

    ok, c, w = _bounded(xs, phi / (1.0 + xs ** nonlin.m), at_zero=False)
    rep.add("phi-poly-growth", ok, constant=c, witness=w)

    ok, c, w = _bounded(xs, (nu_abs + phip) / env)
    rep.add("drift-and-diffusivity-growth", ok, constant=c, witness=w)

    rep.rows.append(_check_theta_inverse(nonlin, aux, xs, p))

    if aux.has_theta:
        ok1, c1, w1 = _bounded(xs, sig * sig / _envelope(xs, theta2_sq))
        ok2, c2, w2 = _bounded(xs, xs ** (p - 2.0) * sig * sig / env)
        rep.add("sigma-sq-theta-growth", ok1 and ok2, constant=max(c1, c2),
                witness=w1 if c1 >= c2 else w2)
        psig = aux.psi_sigma_p
        if psig is None:
            rep.add("sigma-primitive-theta-growth", False, note="primitive undefined at origin")
        else:
            ok, c, w = _bounded(xs, np.abs(psig(xs)) / env)
            rep.add("sigma-primitive-theta-growth", ok, constant=c, witness=w,
                    note="alternative: divergence-free noise cross term" if not ok else "")
        delta = 1e-2
        away = xs >= delta
        with np.errstate(all="ignore"):
            quart = sigp ** 4 / phip + ssp ** 2 + phip
        ok, c, w = _bounded(xs[away], quart[away] / env[away], at_zero=False)
        rep.add("sigma-derivative-quartic-growth", ok, constant=c, witness=w,
                note=f"checked away from zero (delta={delta})")
    else:
        for cid in ("sigma-sq-theta-growth", "sigma-primitive-theta-growth",
                    "sigma-derivative-quartic-growth"):
            rep.add(cid, None, note="diffusion scale undefined")

    # --- entropy block -------------------------------------------------
    with np.errstate(all="ignore"):
        ok, c, w = _bounded(xs, np.where(phi > 0.0, sig / np.sqrt(phi), 0.0))
    rep.add("sigma-phi-sqrt-bound", ok and bool(np.all(np.isfinite(sig))), constant=c, witness=w)
    ok, c, w = _bounded(xs, (nu_abs + phip) / (1.0 + xs + phi))
    rep.add("drift-diffusivity-linear-growth", ok, constant=c, witness=w)
    try:
        val = psi_phi(nonlin, 1.0)
        rep.add("log-phi-integrable", bool(np.isfinite(val)), constant=float(val), witness=1.0)
    except (DomainError, NumericError) as exc:
        rep.add("log-phi-integrable", False, note=str(exc))

    # --- source block ----------------------------------------------------
    pair_lo = np.concatenate([[0.0], xs[:-1]])
    dlam = np.abs(lam - np.asarray(nonlin.lambda_low(pair_lo), dtype=np.float64))
    dxi = xs - pair_lo
    lip = dlam / dxi
    lam0 = np.abs(lam) / xs
    lip_all = np.concatenate([lip, lam0])
    xs_all = np.concatenate([xs, xs])
    order = np.argsort(xs_all, kind="stable")
    ok, c, w = _bounded(xs_all[order], lip_all[order], at_zero=True)
    rep.add("reaction-lipschitz", ok, constant=c, witness=w)
    rep.metadata["reaction_lipschitz"] = c

    dlow = np.abs(low - np.asarray(nonlin.phi_low(pair_lo), dtype=np.float64))
    weight = np.where(dxi <= 1.0, np.sqrt(dxi), dxi)
    hold = dlow / weight
    low0 = np.abs(low) / np.where(xs <= 1.0, np.sqrt(xs), xs)
    hold_all = np.concatenate([hold, low0])[order]
    ok, c, w = _bounded(xs_all[order], hold_all, at_zero=True)
    rep.add("reaction-noise-holder-half", ok, constant=c, witness=w)
    rep.metadata["reaction_noise_holder"] = c

    with np.errstate(all="ignore"):
        ratio = np.asarray(nonlin.phi_low(near), dtype=np.float64) ** 2 / near
    ok, c, w = _bounded(near, ratio, at_zero=True, at_infinity=False)
    rep.add("reaction-noise-sq-vanishing", ok, constant=c, witness=w)
    ok, c, w = _bounded(xs, np.abs(low) / (1.0 + xs), at_zero=False)
    rep.add("reaction-noise-linear-growth", ok, constant=c, witness=w)
    ok, c, w = _bounded(xs, np.abs(lam) / xs)
    rep.add("reaction-linear-growth", ok, constant=c, witness=w)

    # --- source entropy block --------------------------------------------
    if bool(np.all(phi > 0.0)):
        with np.errstate(all="ignore"):
            logs = np.log(phi)
            weighted = low * low * (1.0 + logs * logs + phip / phi)
        ok, c, w = _bounded(xs, weighted / (1.0 + xs + phi))
        rep.add("reaction-noise-log-weighted-growth", ok, constant=c, witness=w)
        ok, c, w = _bounded(xs, np.abs(lam * logs) / (1.0 + xs + phi))
        rep.add("reaction-log-weighted-growth", ok, constant=c, witness=w)
    else:
        rep.add("reaction-noise-log-weighted-growth", None, note="diffusion not positive on grid")
        rep.add("reaction-log-weighted-growth", None, note="diffusion not positive on grid")

    # --- mollified structural block ---------------------------------------
    if nonlin.sigma_support is not None:
        tail = np.linspace(nonlin.sigma_support, nonlin.sigma_support + 10.0, 64)
        tail_max = float(np.max(np.abs(nonlin.sigma_prime(tail))))
        rep.add("sigma-derivative-compact-support", tail_max == 0.0,
                constant=tail_max, witness=float(nonlin.sigma_support))
        bound = float(np.max(np.abs(np.asarray(nonlin.sigma_prime(xs)))))
        rep.add("sigma-derivative-bounded", bool(np.isfinite(bound)), constant=bound)

    rep.metadata["p"] = p
    rep.metadata["m"] = nonlin.m
    return rep


def _check_theta_inverse(nonlin, aux, xs, p):
    """Decide the inverse-regularity alternative: either the inverse
    diffusion scale is power-bounded near 0, or the diffusion-scale
    increments control density increments with some power q.  Reports
    undetermined when neither is established from samples."""
    from .report import CheckRow

    with np.errstate(all="ignore"):
        inv = xs ** (-(p - 2.0) / 2.0) / np.sqrt(np.asarray(nonlin.phi_cap_prime(xs)))
    for theta in np.linspace(0.0, 0.5, 11):
        ok, c, _ = _bounded(xs, inv / xs ** theta)
        if ok and np.isfinite(c):
            return CheckRow("theta-inverse", True, constant=c,
                            note=f"power alternative, exponent {theta:.2f}")
    if aux.has_theta:
        theta_vals = aux.theta_phi_p(xs)
        candidates = sorted({1.0, 2.0, 3.0, 4.0, float(nonlin.m + p - 1.0)})
        # Neighbor increments on the grid plus increments from the
        # origin at every sample, interleaved so both series cover each
        # scale; a lone origin pair would sit as an outlier at the
        # zero end.
        gap = xs[1:] - xs[:-1]
        dtheta_sq = (theta_vals[1:] - theta_vals[:-1]) ** 2
        xs_all = np.concatenate([xs[1:], xs])
        order = np.argsort(xs_all, kind="stable")
        for q in candidates:
            with np.errstate(all="ignore"):
                ratio = np.concatenate([gap ** q / dtheta_sq,
                                        xs ** q / theta_vals ** 2])[order]
            ok, c, _ = _bounded(xs_all[order], ratio)
            if ok and np.isfinite(c):
                return CheckRow("theta-inverse", True, constant=c,
                                note=f"increment alternative, power {q:g}")
    return CheckRow("theta-inverse", None,
                    note="neither alternative established numerically")
