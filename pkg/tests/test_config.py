"""Run configuration parsing: grammar, diagnostics, fingerprints."""

from __future__ import annotations

import textwrap

import pytest

from fluctlab import ConfigurationError, parse_config

MINIMAL = """
[model]
preset = power-law-dk
m = 2.0

[grid]
n = 64

[solver]
dt = 1e-3
t_end = 0.1
"""


def _write(tmp_path, text: str, name: str = "run.ini") -> str:
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def test_minimal_config_fills_defaults(tmp_path) -> None:
    rc = parse_config(_write(tmp_path, MINIMAL))
    assert rc.preset == "power-law-dk"
    assert rc.params == {"m": 2.0}
    assert rc.n == 64 and rc.d == 1
    assert rc.dt == 1e-3 and rc.t_end == 0.1
    assert rc.seed == 0 and rc.members == 1
    assert rc.scheme == "ito-euler"
    assert rc.initial == "sine"
    assert rc.modes == 0 and rc.amplitude == 0.0


def test_full_config_round_trips(tmp_path) -> None:
    rc = parse_config(_write(tmp_path, """
        [run]
        seed = 7

        [model]
        preset = zero-range
        m = 1.5
        eps = 0.1          ; inline comment
        initial = bump
        amplitude = 0.3
        width = 0.8

        [noise]
        modes = 4
        amplitude = 0.2
        decay = 1.5

        [grid]
        d = 2
        n = 32

        [solver]
        dt = 2e-4
        t_end = 0.01
        alpha = 0.05
        sigma_mollify_n = 8
        snapshot_stride = 5

        [experiment]
        members = 3
        schedule = 0.4:2, 0.2:4, 0.1:8

        [output]
        directory = out-test
    """))
    assert rc.seed == 7
    assert rc.params == {"m": 1.5, "eps": 0.1}
    assert rc.initial == "bump"
    assert rc.initial_args["amplitude"] == 0.3
    assert rc.d == 2 and rc.n == 32
    assert rc.alpha == 0.05 and rc.sigma_mollify_n == 8
    assert rc.schedule == ((0.4, 2), (0.2, 4), (0.1, 8))
    assert rc.directory == "out-test"


def test_missing_required_key_is_reported(tmp_path) -> None:
    with pytest.raises(ConfigurationError, match=r"t_end.*\[solver\]"):
        parse_config(_write(tmp_path, """
            [model]
            preset = power-law-dk

            [grid]
            n = 64

            [solver]
            dt = 1e-3
        """))


def test_unknown_key_suggests_the_nearest_name(tmp_path) -> None:
    with pytest.raises(ConfigurationError, match="sigma_mollify_n"):
        parse_config(_write(tmp_path, MINIMAL + "sigm = 4\n"))


def test_unknown_section_is_rejected(tmp_path) -> None:
    with pytest.raises(ConfigurationError, match="solvers"):
        parse_config(_write(tmp_path, MINIMAL + "\n[solvers]\nx = 1\n"))


def test_type_errors_carry_line_numbers(tmp_path) -> None:
    bad = """
    [model]
    preset = power-law-dk
    m = 2.0

    [grid]
    n = sixty-four

    [solver]
    dt = 1e-3
    t_end = 0.1
    """
    with pytest.raises(ConfigurationError, match=r"line 7"):
        parse_config(_write(tmp_path, bad))


def test_validation_rejects_unknown_scheme_and_kind(tmp_path) -> None:
    with pytest.raises(ConfigurationError, match="scheme"):
        parse_config(_write(tmp_path, MINIMAL + "scheme = leapfrog\n"))
    with pytest.raises(ConfigurationError, match="initial"):
        parse_config(_write(tmp_path, MINIMAL.replace(
            "preset = power-law-dk", "preset = power-law-dk\ninitial = plateau")))


def test_schedule_must_parse_as_pairs(tmp_path) -> None:
    with pytest.raises(ConfigurationError, match="schedule"):
        parse_config(_write(tmp_path, MINIMAL + "\n[experiment]\nschedule = 0.4;2\n"))


def test_fingerprint_is_stable_and_seed_sensitive(tmp_path) -> None:
    path = _write(tmp_path, MINIMAL)
    a = parse_config(path)
    b = parse_config(path)
    assert a.fingerprint() == b.fingerprint()
    c = parse_config(path, overrides={("run", "seed"): "1"})
    assert c.seed == 1
    assert c.fingerprint() != a.fingerprint()


def test_resolved_text_materializes_every_key(tmp_path) -> None:
    rc = parse_config(_write(tmp_path, MINIMAL))
    text = rc.resolved_text()
    for section in ("[run]", "[model]", "[noise]", "[grid]", "[solver]",
                    "[experiment]", "[output]"):
        assert section in text
    assert "seed = 0" in text
    # 17 significant digits make the text a faithful value record.
    assert "dt = 0.001" in text


def test_comments_and_notation_variants(tmp_path) -> None:
    rc = parse_config(_write(tmp_path, """
        # full-line comment
        [model]
        preset = power-law-dk
        m = 2.0    # trailing comment

        [grid]
        n = 64

        [solver]
        dt = 1e-3
        t_end = 1e-1
        clip_nonlinearity_args = false
    """))
    assert rc.params == {"m": 2.0}
    assert rc.t_end == 0.1
    assert rc.clip_nonlinearity_args is False
