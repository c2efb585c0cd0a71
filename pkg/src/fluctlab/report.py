"""Structured pass/fail reports shared by the noise and nonlinearity checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass
class CheckRow:
    """One verdict: an identifier, a pass flag, and numeric evidence.

    ``passed`` is None when the check could not be decided numerically
    (reported as ``undetermined``).  ``constant`` is the smallest
    admissible constant found on the sample grid and ``witness`` the
    argument where the worst ratio was attained.
    """

    check_id: str
    passed: Optional[bool]
    constant: float = float("nan")
    witness: float = float("nan")
    note: str = ""

    @property
    def verdict(self) -> str:
        if self.passed is None:
            return "undetermined"
        return "pass" if self.passed else "fail"


@dataclass
class AssumptionReport:
    """Collection of check rows plus free-form numeric metadata."""

    subject: str
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, check_id: str, passed: Optional[bool], constant: float = float("nan"),
            witness: float = float("nan"), note: str = "") -> CheckRow:
        row = CheckRow(check_id, passed, constant, witness, note)
        self.rows.append(row)
        return row

    def __getitem__(self, check_id: str) -> CheckRow:
        for row in self.rows:
            if row.check_id == check_id:
                return row
        raise KeyError(check_id)

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def any_failed(self) -> bool:
        return any(row.passed is False for row in self.rows)

    def table(self) -> list:
        """Rows for CSV output: (check-id, verdict, constant, witness, note)."""
        return [(r.check_id, r.verdict, r.constant, r.witness, r.note) for r in self.rows]
