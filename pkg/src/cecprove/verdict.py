"""Engine-layer result contract shared by every checking engine."""

from __future__ import annotations

from dataclasses import dataclass, field

EQUIVALENT = "EQUIVALENT"
COUNTEREXAMPLE = "COUNTEREXAMPLE"
UNKNOWN = "UNKNOWN"


@dataclass
class CheckResult:
    verdict: str  # EQUIVALENT | COUNTEREXAMPLE | UNKNOWN
    witness: tuple[int, ...] | None = None  # bit i -> PI i+1, cex only
    reason: str = ""  # UNKNOWN detail: timeout | resource | ineligible | cancelled
    engine: str = ""  # engine that produced the verdict
    stats: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.witness is not None) != (self.verdict == COUNTEREXAMPLE):
            raise ValueError("witness present iff verdict is COUNTEREXAMPLE")
