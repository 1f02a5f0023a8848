"""The engine-layer result contract shared by SAT, BDD, and ES checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Verdict(Enum):
    EQUIVALENT = "EQUIVALENT"
    COUNTEREXAMPLE = "COUNTEREXAMPLE"
    UNKNOWN = "UNKNOWN"


@dataclass
class CheckResult:
    verdict: Verdict
    witness: tuple[int, ...] | None = None  # PI assignment, index i -> PI i+1
    reason: str = ""  # for UNKNOWN: timeout | resource | ineligible | cancelled
    engine: str = ""
    stats: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.verdict == Verdict.COUNTEREXAMPLE and self.witness is None:
            raise ValueError("counterexample requires a witness")
