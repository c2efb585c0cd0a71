"""Recompute the frozen expected values used in the tests.

Every number asserted with a tight tolerance in the test suite is
derived here from first principles (closed forms, adaptive quadrature,
or direct summation), independently of the package implementation.
Run as a script to print the table; the tests carry the printed values
as literals.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad


def theta_quadratic_p2_at_1() -> tuple:
    """Integral of sqrt(2 s) over [0, 1].

    Quadrature cross-checked against the antiderivative
    (2/3) sqrt(2) s^(3/2).
    """
    val, err = quad(lambda s: np.sqrt(2.0 * s), 0.0, 1.0)
    closed = 2.0 * np.sqrt(2.0) / 3.0
    assert abs(val - closed) <= max(err, 1e-12)
    return closed, "2*sqrt(2)/3"


def log_primitive_linear_at_1() -> tuple:
    """Integral of log(s) over (0, 1], via s log s - s."""
    val, _ = quad(lambda s: np.log(s), 0.0, 1.0)
    closed = -1.0
    assert abs(val - closed) <= 1e-9
    return closed, "s log s - s at 1"


def log_primitive_quadratic_at_e() -> tuple:
    """Integral of log(s^2) over (0, e], via 2 (s log s - s)."""
    e = float(np.e)
    val, _ = quad(lambda s: 2.0 * np.log(s), 0.0, e)
    closed = 2.0 * (e * 1.0 - e)
    assert abs(val - closed) <= 1e-9
    return closed, "2 (e log e - e) = 0"


def mode_sums_two_pairs() -> tuple:
    """Sum of a_k^2 and |k|^2 a_k^2 for paired sine/cosine modes
    k in {1, 2} with amplitudes (1, 1/2), evaluated pointwise."""
    x = np.linspace(0.0, 2.0 * np.pi, 257)[:-1]
    f1 = np.zeros_like(x)
    f3 = 0.0
    for k, a in ((1, 1.0), (2, 0.5)):
        f1 += (a * np.sin(k * x)) ** 2 + (a * np.cos(k * x)) ** 2
        f3 += (k * a) ** 2 * 1.0  # |grad sin|^2 + |grad cos|^2 = k^2 pointwise
    assert np.allclose(f1, 1.25, atol=1e-14)
    return (1.25, 2.0), "sum a_k^2 = 1 + 1/4; sum k^2 a_k^2 = 1 + 4/4"


def laplacian_symbol(n: int, k: int) -> float:
    """Eigenvalue of the periodic three-point stencil on n cells at
    integer wavenumber k: -(2/dx^2)(1 - cos(k dx))."""
    dx = 2.0 * np.pi / n
    return -(2.0 / dx**2) * (1.0 - np.cos(k * dx))


def gradient_energy_half_sine(n: int) -> tuple:
    """Integral of |d/dx (1 + sin(x)/2)|^2 over the circle.

    Continuum value pi/4; also the forward-difference value on n cells
    (independent re-implementation of the face gradient).
    """
    closed = float(np.pi / 4.0)
    val, _ = quad(lambda s: 0.25 * np.cos(s) ** 2, 0.0, 2.0 * np.pi)
    assert abs(val - closed) <= 1e-12
    x = 2.0 * np.pi * np.arange(n) / n
    dx = 2.0 * np.pi / n
    rho = 1.0 + 0.5 * np.sin(x)
    grad = (np.roll(rho, -1) - rho) / dx
    discrete = float(np.sum(grad**2) * dx)
    return (closed, discrete), "quad of cos^2/4; forward-difference sum"


def growth_factor(dt: float, t: float) -> float:
    """Per-step compounding of the explicit Euler step for y' = y."""
    steps = round(t / dt)
    return float((1.0 + dt) ** steps)


def face_divergence_of_sine(n: int) -> tuple:
    """Backward difference of the face average of sin(x) on n cells,
    compared to cos(x); the max deviation is O(dx^2).

    Independent re-implementation: face value at i+1/2 averages cells
    i and i+1, divergence at cell i differences faces i+1/2 and i-1/2.
    """
    x = 2.0 * np.pi * np.arange(n) / n
    dx = 2.0 * np.pi / n
    f = np.sin(x)
    face = 0.5 * (f + np.roll(f, -1))
    div = (face - np.roll(face, 1)) / dx
    err = float(np.max(np.abs(div - np.cos(x))))
    # exact symbol: cos(k x) * sin(k dx)/dx * cos(k dx / 2) ... at k=1
    bound = abs(np.sin(dx) / dx * np.cos(dx / 2.0) - 1.0) + 1e-15
    return (err, bound), "discrete symbol vs cos"


def envelope_fit_synthetic(c: float, steps: int, dt: float) -> float:
    """Least-squares slope of the running maximum of log(ratio) for the
    synthetic series ratio(t) = exp(c t): recovers c exactly."""
    t = np.arange(steps + 1) * dt
    y = np.maximum.accumulate(np.log(np.exp(c * t)))
    n = t.size
    slope = (n * np.sum(t * y) - np.sum(t) * np.sum(y)) / \
        (n * np.sum(t * t) - np.sum(t) ** 2)
    return float(slope)


def euler_growth_rate(dt: float) -> float:
    """Fitted envelope rate of the explicit Euler orbit of y' = y:
    log((1+dt)^(t/dt)) is linear in t with slope log(1+dt)/dt."""
    return float(np.log1p(dt) / dt)


def main() -> None:
    rows = []
    v, how = theta_quadratic_p2_at_1()
    rows.append(("theta_quadratic_p2_at_1", f"{v:.17g}", how))
    v, how = log_primitive_linear_at_1()
    rows.append(("log_primitive_linear_at_1", f"{v:.17g}", how))
    v, how = log_primitive_quadratic_at_e()
    rows.append(("log_primitive_quadratic_at_e", f"{v:.17g}", how))
    (f1, f3), how = mode_sums_two_pairs()
    rows.append(("two_pair_f1", f"{f1:.17g}", how))
    rows.append(("two_pair_f3", f"{f3:.17g}", how))
    for n, k in ((64, 1), (64, 3), (256, 1)):
        rows.append((f"laplacian_symbol_n{n}_k{k}",
                     f"{laplacian_symbol(n, k):.17g}", "-(2/dx^2)(1-cos k dx)"))
    (closed, disc), how = gradient_energy_half_sine(256)
    rows.append(("gradient_energy_continuum", f"{closed:.17g}", how))
    rows.append(("gradient_energy_discrete_n256", f"{disc:.17g}", how))
    rows.append(("growth_factor_dt1e-3_t1", f"{growth_factor(1e-3, 1.0):.17g}",
                 "(1+dt)^(t/dt)"))
    (err, bound), how = face_divergence_of_sine(256)
    rows.append(("face_divergence_err_n256", f"{err:.17g}", how))
    rows.append(("face_divergence_bound_n256", f"{bound:.17g}", how))
    rows.append(("envelope_fit_c0.5", f"{envelope_fit_synthetic(0.5, 200, 0.01):.17g}",
                 "running-max least squares"))
    rows.append(("euler_growth_rate_dt1e-3", f"{euler_growth_rate(1e-3):.17g}",
                 "log(1+dt)/dt"))
    width = max(len(r[0]) for r in rows)
    for name, value, how in rows:
        print(f"{name:<{width}}  {value:<24}  {how}")


if __name__ == "__main__":
    main()
