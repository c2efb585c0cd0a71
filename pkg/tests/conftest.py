"""Shared fixtures: the reference acceptance run, executed once."""

from __future__ import annotations

import pytest

from fluctlab import run_acceptance


@pytest.fixture(scope="session")
def acceptance(tmp_path_factory) -> tuple:
    """Run the full frozen reference suite once; return (verdicts, dir)."""
    out = tmp_path_factory.mktemp("acceptance")
    verdicts = run_acceptance(out_dir=str(out), threads=2)
    return {v.experiment_id: v for v in verdicts}, out
