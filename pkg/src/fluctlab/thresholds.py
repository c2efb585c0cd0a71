"""
Frozen pass thresholds for the experiment suite.

Continuum statements hold exactly; the discrete scheme violates them
by its own truncation error.  Each threshold is therefore either an
exact-arithmetic scale (mass drift), a stated tolerance, or a value
calibrated once by a refinement study and frozen here.  Verdicts are
pure functions of (statistics, this file); experiments never adjust
thresholds at run time.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Thresholds:
    # conservative runs telescope exactly; 1e-10 leaves three orders of
    # headroom over the observed 1e-13 worst case at 1e4 steps
    mass_drift_max: float = 1e-10

    # coupled-pair overshoot of the running minimum, relative to the
    # initial distance; calibrated so the reference run sits near half
    # the bound and one refinement clears the decrease factor
    contraction_max_violation: float = 0.02
    contraction_refinement_factor: float = 1.5
    # below this the statistic is rounding noise and the refinement
    # ratio is meaningless (deterministic contraction)
    contraction_floor: float = 1e-12

    # spatial convergence order of the deterministic heat benchmark
    heat_min_order: float = 1.9

    # log-log slope of the scheme gap across the dt ladder
    ito_strat_min_slope: float = 0.8

    # relative change of moment / entropy statistics across the two
    # finest ladder levels
    moment_stability_rtol: float = 0.20
    entropy_stability_rtol: float = 0.20

    # occupation-distance identity error, in units of one bin quantum
    # per cell; the nested-interval construction makes it rounding-level
    kinetic_identity_quanta: float = 1.0
    kinetic_infinity_max_ratio: float = 0.1
    kinetic_zero_max_ratio: float = 0.1

    # consecutive cascade distances may exceed the previous one by 10%
    # before the trend counts as broken; final/first is the Cauchy proxy
    cascade_slack: float = 1.10
    cascade_final_over_first_max: float = 0.05

    # growth-rate margin: fitted c is compared against twice the sum of
    # the reaction Lipschitz constant and the squared reaction-noise
    # Hoelder constant, both read from the assumption report
    c_ref_margin: float = 2.0
    # the reaction(xi) = xi control must recover its exact discrete rate
    gen_control_c_rtol: float = 0.02
    # sup-in-time distance over (dist0 + sqrt(dist0)); loose shape bound
    gen_sup_envelope_max: float = 10.0

    # martingale-mean band in standard errors
    martingale_sigma: float = 3.0

    # sup-in-time L1 over its conserved/Groenwall envelope; slack covers
    # the |undershoot| contribution of the explicit scheme
    l1_envelope_slack: float = 0.05

    # generic relative stability for ladder comparisons elsewhere
    ladder_rtol: float = 0.20


DEFAULT = Thresholds()
