"""Run configuration: a sectioned key-value file resolved to typed values.

Grammar (INI as read by :mod:`configparser`, ``#`` and ``;`` comments)::

    [run]        seed
    [model]      preset, m, eps, gamma, initial, offset, amplitude,
                 phase, center, width
    [noise]      modes, amplitude, decay, scalar_modes, scalar_amplitude,
                 scalar_decay
    [grid]       d, n
    [solver]     dt, t_end, alpha, scheme, sigma_mollify_n,
                 clip_nonlinearity_args, cfl_safety, snapshot_stride
    [experiment] only, members, schedule, xi_max
    [output]     directory

Every key is optional except ``model.preset``, ``grid.n``, ``solver.dt``
and ``solver.t_end``.  Unknown sections or keys are rejected with the
offending line and a close-match suggestion.  The resolved form (all
defaults applied, keys sorted) is what run fingerprints are computed
from, so two files that resolve identically behave identically.
"""

from __future__ import annotations

import configparser
import difflib
import hashlib
import io
import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigurationError

_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}

# section -> key -> (type tag, default); required keys have default None
# and appear in _REQUIRED.
_GRAMMAR = {
    "run": {"seed": ("int", 0)},
    "model": {
        "preset": ("str", None),
        "m": ("float", None),
        "eps": ("float", None),
        "gamma": ("float", None),
        "initial": ("str", "sine"),
        "offset": ("float", 1.0),
        "amplitude": ("float", 0.5),
        "phase": ("float", 0.0),
        "center": ("float", None),
        "width": ("float", 1.0),
    },
    "noise": {
        "modes": ("int", 0),
        "amplitude": ("float", 0.0),
        "decay": ("float", 1.0),
        "scalar_modes": ("int", 0),
        "scalar_amplitude": ("float", 0.0),
        "scalar_decay": ("float", 1.0),
    },
    "grid": {"d": ("int", 1), "n": ("int", None)},
    "solver": {
        "dt": ("float", None),
        "t_end": ("float", None),
        "alpha": ("float", 0.0),
        "scheme": ("str", "ito-euler"),
        "sigma_mollify_n": ("int", None),
        "clip_nonlinearity_args": ("bool", True),
        "cfl_safety": ("float", 0.5),
        "snapshot_stride": ("int", None),
    },
    "experiment": {
        "only": ("str", None),
        "members": ("int", 1),
        "schedule": ("schedule", None),
        "xi_max": ("float", None),
    },
    "output": {"directory": ("str", None)},
}

_REQUIRED = (("model", "preset"), ("grid", "n"),
             ("solver", "dt"), ("solver", "t_end"))

_PRESET_PARAM_KEYS = ("m", "eps", "gamma")


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run configuration.

    ``schedule`` is a tuple of (alpha, mollify_n) pairs; ``params`` holds
    only the preset parameters that were given explicitly.
    """

    preset: str
    n: int
    dt: float
    t_end: float
    seed: int = 0
    d: int = 1
    params: dict = field(default_factory=dict)
    initial: str = "sine"
    initial_args: dict = field(default_factory=dict)
    modes: int = 0
    amplitude: float = 0.0
    decay: float = 1.0
    scalar_modes: int = 0
    scalar_amplitude: float = 0.0
    scalar_decay: float = 1.0
    alpha: float = 0.0
    scheme: str = "ito-euler"
    sigma_mollify_n: Optional[int] = None
    clip_nonlinearity_args: bool = True
    cfl_safety: float = 0.5
    snapshot_stride: Optional[int] = None
    only: Optional[tuple] = None
    members: int = 1
    schedule: Optional[tuple] = None
    xi_max: Optional[float] = None
    directory: Optional[str] = None

    def resolved_text(self) -> str:
        """Canonical text form: every key materialized, sorted, 17-digit
        floats.  Equal configurations produce equal text."""
        out = io.StringIO()
        for section in sorted(_GRAMMAR):
            out.write(f"[{section}]\n")
            for key in sorted(_GRAMMAR[section]):
                out.write(f"{key} = {_format_value(self._lookup(section, key))}\n")
            out.write("\n")
        return out.getvalue()

    def fingerprint(self) -> str:
        """Hash of the resolved form; identical for identical runs."""
        return hashlib.sha256(self.resolved_text().encode()).hexdigest()[:16]

    def _lookup(self, section: str, key: str):
        if section == "model" and key in _PRESET_PARAM_KEYS:
            return self.params.get(key)
        if section == "model" and key in ("offset", "amplitude", "phase",
                                          "center", "width"):
            return self.initial_args.get(key, _GRAMMAR["model"][key][1])
        return getattr(self, key)


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, tuple):
        if len(value) > 0 and isinstance(value[0], tuple):
            return ", ".join(f"{a:.17g}:{n}" for a, n in value)
        return ", ".join(str(v) for v in value)
    return str(value)


def _key_line(raw_lines: list, section: str, key: str) -> int:
    """1-based line of ``key`` inside ``section`` in the raw file text."""
    current = None
    sec_re = re.compile(r"^\s*\[(?P<name>[^\]]+)\]")
    key_re = re.compile(rf"^\s*{re.escape(key)}\s*[=:]")
    for i, line in enumerate(raw_lines, start=1):
        m = sec_re.match(line)
        if m:
            current = m.group("name").strip().lower()
            continue
        if current == section and key_re.match(line):
            return i
    return 0


def _suggest(name: str, candidates: list) -> str:
    close = difflib.get_close_matches(name, candidates, n=1, cutoff=0.5)
    if not close:
        close = [c for c in candidates if c.startswith(name) or name.startswith(c)]
    return f"; did you mean '{close[0]}'?" if close else ""


def _coerce(kind: str, text: str, section: str, key: str, line: int):
    where = f"[{section}] {key} (line {line})"
    if kind == "str":
        return text
    if kind == "bool":
        word = text.strip().lower()
        if word not in _BOOL_WORDS:
            raise ConfigurationError(f"{where}: expected a boolean, got {text!r}")
        return _BOOL_WORDS[word]
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise ConfigurationError(
                f"{where}: expected an integer, got {text!r}") from None
    if kind == "float":
        try:
            return float(text)
        except ValueError:
            raise ConfigurationError(
                f"{where}: expected a number, got {text!r}") from None
    if kind == "schedule":
        entries = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            pieces = part.split(":")
            if len(pieces) != 2:
                raise ConfigurationError(
                    f"{where}: schedule entries are alpha:n, got {part!r}")
            try:
                entries.append((float(pieces[0]), int(pieces[1])))
            except ValueError:
                raise ConfigurationError(
                    f"{where}: schedule entries are alpha:n, got {part!r}") from None
        if not entries:
            raise ConfigurationError(f"{where}: empty schedule")
        return tuple(entries)
    raise ConfigurationError(f"{where}: unhandled type {kind}")  # pragma: no cover


def parse_config(path: str, overrides: Optional[dict] = None) -> RunConfig:
    """Read and resolve a configuration file.

    ``overrides`` maps (section, key) to replacement raw values, used by
    command-line flags; they go through the same validation.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                       interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from None
    try:
        parser.read_string(raw, source=path)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path!r}: {exc}") from None
    raw_lines = raw.splitlines()

    values = {sec: {k: spec[1] for k, spec in keys.items()}
              for sec, keys in _GRAMMAR.items()}
    given = {sec: set() for sec in _GRAMMAR}

    for section in parser.sections():
        sec = section.lower()
        if sec not in _GRAMMAR:
            hint = _suggest(sec, sorted(_GRAMMAR))
            raise ConfigurationError(f"unknown section [{section}]{hint}")
        for key, text in parser.items(sec):
            line = _key_line(raw_lines, sec, key)
            if key not in _GRAMMAR[sec]:
                hint = _suggest(key, sorted(_GRAMMAR[sec]))
                raise ConfigurationError(
                    f"unknown key '{key}' in [{sec}] (line {line}){hint}")
            values[sec][key] = _coerce(_GRAMMAR[sec][key][0], text, sec, key, line)
            given[sec].add(key)

    for (sec, key), text in (overrides or {}).items():
        values[sec][key] = _coerce(_GRAMMAR[sec][key][0], str(text), sec, key, 0)
        given[sec].add(key)

    for sec, key in _REQUIRED:
        if values[sec][key] is None:
            raise ConfigurationError(f"missing required key '{key}' in [{sec}]")

    scheme = values["solver"]["scheme"]
    if scheme not in ("ito-euler", "strat-heun"):
        raise ConfigurationError(
            f"[solver] scheme must be 'ito-euler' or 'strat-heun', got {scheme!r}")
    initial = values["model"]["initial"]
    if initial not in ("sine", "bump", "constant"):
        raise ConfigurationError(
            f"[model] initial must be 'sine', 'bump' or 'constant', got {initial!r}")
    if values["grid"]["d"] not in (1, 2):
        raise ConfigurationError(
            f"[grid] d must be 1 or 2, got {values['grid']['d']}")

    params = {k: values["model"][k] for k in _PRESET_PARAM_KEYS
              if values["model"][k] is not None}
    initial_args = {k: values["model"][k]
                    for k in ("offset", "amplitude", "phase", "width")}
    if values["model"]["center"] is not None:
        initial_args["center"] = values["model"]["center"]
    only = values["experiment"]["only"]
    return RunConfig(
        preset=values["model"]["preset"],
        n=values["grid"]["n"],
        d=values["grid"]["d"],
        dt=values["solver"]["dt"],
        t_end=values["solver"]["t_end"],
        seed=values["run"]["seed"],
        params=params,
        initial=values["model"]["initial"],
        initial_args=initial_args,
        modes=values["noise"]["modes"],
        amplitude=values["noise"]["amplitude"],
        decay=values["noise"]["decay"],
        scalar_modes=values["noise"]["scalar_modes"],
        scalar_amplitude=values["noise"]["scalar_amplitude"],
        scalar_decay=values["noise"]["scalar_decay"],
        alpha=values["solver"]["alpha"],
        scheme=values["solver"]["scheme"],
        sigma_mollify_n=values["solver"]["sigma_mollify_n"],
        clip_nonlinearity_args=values["solver"]["clip_nonlinearity_args"],
        cfl_safety=values["solver"]["cfl_safety"],
        snapshot_stride=values["solver"]["snapshot_stride"],
        only=tuple(p.strip() for p in only.split(",") if p.strip()) if only else None,
        members=values["experiment"]["members"],
        schedule=values["experiment"]["schedule"],
        xi_max=values["experiment"]["xi_max"],
        directory=values["output"]["directory"],
    )
