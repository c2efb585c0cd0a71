"""Command-line entry point.

Subcommands
-----------
``simulate``           one trajectory: diagnostics, snapshot stack, final field
``couple``             pairs driven by one noise realization: distance series
``cascade``            viscosity/mollification ladder: inter-level distances
``kinetic``            trajectory plus kinetic-measure histogram
``acceptance``         the frozen reference suite: summary plus evidence
``check-assumptions``  structural inequalities of the configured model

Every run writes the resolved configuration and its fingerprint next to
the outputs, so identical (config, seed) reruns are byte-identical.
Exit codes: 0 success, 1 a run or experiment failed its bound,
2 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import Optional

import numpy as np

from .config import RunConfig, parse_config
from .errors import ConfigurationError, NumericError, StabilityError
from .grid import GridSpec, GridState, initial_state
from .harness import conservative_noise, run_acceptance, scalar_noise
from .kinetic import KineticHistogram, accumulate_measure, default_edges
from .noise import NoiseField, SpectralNoiseSpec, build_spectral_noise, \
    verify_noise_assumptions
from .nonlin import NonlinearitySet, check_assumptions, make_preset
from .serialize import write_csv, write_field_csv, write_snapshot_stack
from .solver import SolverConfig, Trajectory, run, run_cascade, \
    run_coupled_ensemble, stability_bound

_DIAG_COLUMNS = ("time", "mass", "l1", "l2", "lp", "min", "max",
                 "energy", "entropy")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluctlab",
        description="Finite-volume laboratory for conservative SPDEs "
                    "with correlated noise on the periodic torus.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, help_text: str, needs_config: bool = True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=needs_config,
                       help="run configuration file")
        p.add_argument("--seed", type=int, default=None,
                       help="override [run] seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap; results are thread-count independent")
        p.add_argument("--override-cfl", action="store_true",
                       help="skip the step-size precheck (the runtime guard "
                            "still truncates unstable runs)")
        return p

    add("simulate", "run one trajectory and store its evidence")
    add("couple", "run coupled pairs and store the distance series")
    add("cascade", "run the (alpha, mollification) ladder")
    add("kinetic", "run one trajectory and accumulate the kinetic measure")
    acc = add("acceptance", "run the frozen reference suite", needs_config=False)
    acc.add_argument("--only", default=None,
                     help="comma-separated experiment ids to run")
    add("check-assumptions", "evaluate the structural inequalities")
    return parser


# ---------------------------------------------------------------------------
# Shared assembly
# ---------------------------------------------------------------------------

def _noise_specs(rc: RunConfig) -> tuple:
    cons = conservative_noise(rc.modes, rc.amplitude, rc.decay, rc.d) \
        if rc.modes > 0 else SpectralNoiseSpec(wavevectors=(), amplitudes=())
    scal = scalar_noise(rc.scalar_modes, rc.scalar_amplitude, rc.scalar_decay, rc.d) \
        if rc.scalar_modes > 0 else None
    return cons, scal


def _assemble(rc: RunConfig) -> tuple:
    gspec = GridSpec(rc.d, rc.n)
    nl = make_preset(rc.preset, rc.params)
    cons, scal = _noise_specs(rc)
    nf = build_spectral_noise(cons, gspec, scalar_spec=scal)
    cfg = SolverConfig(dt=rc.dt, t_end=rc.t_end, alpha=rc.alpha,
                       scheme=rc.scheme, sigma_mollify_n=rc.sigma_mollify_n,
                       clip_nonlinearity_args=rc.clip_nonlinearity_args,
                       cfl_safety=rc.cfl_safety,
                       snapshot_stride=rc.snapshot_stride)
    rho0 = initial_state(gspec, kind=rc.initial, **rc.initial_args)
    return gspec, nl, nf, cfg, rho0


def _precheck_dt(rho0: GridState, nl: NonlinearitySet, nf: NoiseField,
                 cfg: SolverConfig, override: bool) -> float:
    bound = stability_bound(rho0, nl, nf, cfg)
    if cfg.dt > bound and not override:
        raise ConfigurationError(
            f"dt={cfg.dt:g} exceeds the stability bound {bound:g} at the "
            "initial data; lower dt or pass --override-cfl")
    return bound


def _out_dir(args, rc: Optional[RunConfig]) -> str:
    path = args.out or (rc.directory if rc else None) \
        or f"fluctlab-{args.subcommand}"
    os.makedirs(path, exist_ok=True)
    return path


def _emit_run_record(out: str, rc: RunConfig, extra: dict) -> None:
    """The resolved config, its fingerprint, and run metadata; all
    deterministic so reruns are byte-identical."""
    with open(os.path.join(out, "config.resolved.ini"), "w",
              encoding="utf-8") as fh:
        fh.write(rc.resolved_text())
    lines = {"config": rc.fingerprint()}
    lines.update(extra)
    with open(os.path.join(out, "fingerprint.txt"), "w", encoding="utf-8") as fh:
        for key in sorted(lines):
            fh.write(f"{key} = {lines[key]}\n")


def _write_diagnostics(path: str, traj: Trajectory) -> None:
    diag = traj.diagnostics
    write_csv(path, _DIAG_COLUMNS, zip(*(diag[c] for c in _DIAG_COLUMNS)))


def _traj_record(traj: Trajectory) -> dict:
    meta = traj.metadata
    rec = {"nonlinearity": meta["nonlinearity"],
           "noise": meta["noise_fingerprint"],
           "solver": meta["config_fingerprint"]}
    if traj.truncated:
        rec["truncated_at_step"] = str(meta["truncated_at_step"])
        rec["truncation_reason"] = meta["truncation_reason"]
    return rec


def _report_truncation(traj: Trajectory) -> int:
    if traj.truncated:
        print(f"run truncated: {traj.metadata['truncation_reason']}",
              file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_simulate(args, rc: RunConfig) -> int:
    _, nl, nf, cfg, rho0 = _assemble(rc)
    _precheck_dt(rho0, nl, nf, cfg, args.override_cfl)
    traj = run(rho0, nl, nf, cfg, rc.seed, track_functionals=True)
    out = _out_dir(args, rc)
    _emit_run_record(out, rc, _traj_record(traj))
    _write_diagnostics(os.path.join(out, "diagnostics.csv"), traj)
    write_snapshot_stack(os.path.join(out, "snapshots.bin"), traj.spec,
                         traj.snapshots)
    write_field_csv(os.path.join(out, "field_final.csv"), traj.final_state())
    return _report_truncation(traj)


def _coupled_pair(rc: RunConfig, gspec: GridSpec) -> tuple:
    base = dict(rc.initial_args)
    a = initial_state(gspec, kind=rc.initial, **base)
    shifted = dict(base)
    if rc.initial == "bump":
        shifted["center"] = base.get("center", np.pi) + np.pi / 4.0
    else:
        shifted["phase"] = base.get("phase", 0.0) + np.pi / 4.0
    b = initial_state(gspec, kind=rc.initial, **shifted)
    return a, b


def _cmd_couple(args, rc: RunConfig) -> int:
    gspec, nl, nf, cfg, _ = _assemble(rc)
    a, b = _coupled_pair(rc, gspec)
    _precheck_dt(a, nl, nf, cfg, args.override_cfl)
    pairs = [(a, b)] * max(rc.members, 1)
    trajs, dist = run_coupled_ensemble(pairs, nl, nf, cfg, rc.seed)
    out = _out_dir(args, rc)
    _emit_run_record(out, rc, _traj_record(trajs[0][0]))
    times = np.arange(dist.shape[0]) * cfg.dt
    write_csv(os.path.join(out, "distance.csv"),
              ("time", "mean_dist", "min_dist", "max_dist"),
              zip(times, dist.mean(axis=1), dist.min(axis=1), dist.max(axis=1)))
    _write_diagnostics(os.path.join(out, "diagnostics.csv"), trajs[0][0])
    return max(_report_truncation(t) for pair in trajs for t in pair)


def _cmd_cascade(args, rc: RunConfig) -> int:
    if rc.schedule is None:
        raise ConfigurationError(
            "cascade needs [experiment] schedule = alpha:n, alpha:n, ...")
    _, nl, nf, cfg, rho0 = _assemble(rc)
    _precheck_dt(rho0, nl, nf, replace(cfg, alpha=rc.schedule[0][0]),
                 args.override_cfl)
    report = run_cascade(rho0, nl, nf, cfg, list(rc.schedule), rc.seed)
    out = _out_dir(args, rc)
    _emit_run_record(out, rc, _traj_record(report.trajectories[0]))
    rows = [(i + 1, rc.schedule[i + 1][0], rc.schedule[i + 1][1], d, m)
            for i, (d, m) in enumerate(zip(report.l1l1_distances,
                                           report.metric_distances))]
    write_csv(os.path.join(out, "cascade.csv"),
              ("entry", "alpha", "mollify_n", "l1l1_distance",
               "metric_distance"), rows)
    _write_diagnostics(os.path.join(out, "diagnostics.csv"),
                       report.trajectories[-1])
    return max(_report_truncation(t) for t in report.trajectories)


def _cmd_kinetic(args, rc: RunConfig) -> int:
    _, nl, nf, cfg, rho0 = _assemble(rc)
    cfg = replace(cfg, snapshot_stride=1)  # the measure needs every step
    _precheck_dt(rho0, nl, nf, cfg, args.override_cfl)
    traj = run(rho0, nl, nf, cfg, rc.seed, track_functionals=True)
    xi_max = rc.xi_max if rc.xi_max is not None \
        else float(np.max(traj.diagnostics["max"]))
    hist = accumulate_measure(traj, nl, cfg.alpha, default_edges(xi_max))
    out = _out_dir(args, rc)
    record = _traj_record(traj)
    record["q_total"] = f"{hist.metadata['q_total']:.17g}"
    _emit_run_record(out, rc, record)
    write_csv(os.path.join(out, "kinetic_hist.csv"),
              KineticHistogram.COLUMNS, hist.rows())
    _write_diagnostics(os.path.join(out, "diagnostics.csv"), traj)
    return _report_truncation(traj)


def _cmd_acceptance(args, rc: Optional[RunConfig]) -> int:
    out = _out_dir(args, rc)
    only = None
    if args.only:
        only = [p.strip() for p in args.only.split(",") if p.strip()]
    elif rc is not None and rc.only:
        only = list(rc.only)
    if rc is not None:
        _emit_run_record(out, rc, {})
    verdicts = run_acceptance(out_dir=out, threads=args.threads, only=only)
    failed = [v.experiment_id for v in verdicts if not v.passed]
    for v in verdicts:
        print(f"{v.experiment_id}: {'pass' if v.passed else 'FAIL'}")
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _cmd_check_assumptions(args, rc: RunConfig) -> int:
    nl = make_preset(rc.preset, rc.params)
    reports = [check_assumptions(nl)]
    if rc.modes > 0 or rc.scalar_modes > 0:
        gspec = GridSpec(rc.d, rc.n)
        cons, scal = _noise_specs(rc)
        reports.append(verify_noise_assumptions(
            build_spectral_noise(cons, gspec, scalar_spec=scal)))
    out = _out_dir(args, rc)
    _emit_run_record(out, rc, {})
    rows = [(rep.subject,) + row for rep in reports for row in rep.table()]
    write_csv(os.path.join(out, "assumptions.csv"),
              ("subject", "check", "verdict", "constant", "witness", "note"),
              rows)
    for subject, check, verdict, *_ in rows:
        print(f"{subject}/{check}: {verdict}")
    return 1 if any(rep.any_failed for rep in reports) else 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "couple": _cmd_couple,
    "cascade": _cmd_cascade,
    "kinetic": _cmd_kinetic,
    "acceptance": _cmd_acceptance,
    "check-assumptions": _cmd_check_assumptions,
}


def main(argv: Optional[list] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        rc = None
        if args.config is not None:
            overrides = {}
            if args.seed is not None:
                overrides[("run", "seed")] = str(args.seed)
            rc = parse_config(args.config, overrides=overrides)
        elif args.subcommand != "acceptance":
            raise ConfigurationError("--config is required")
        return _HANDLERS[args.subcommand](args, rc)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (StabilityError, NumericError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
