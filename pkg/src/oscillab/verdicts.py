"""Three-valued verdicts with witnesses.

Every criterion check returns a Verdict rather than a bare bool:
``Holds`` and ``Fails`` must carry at least one witness (the evidence
that earned the status), ``Inconclusive`` explains itself through
caveats.  For checks whose hypotheses quantify over an infinite
horizon, a finite computation can only sample — such verdicts carry
EVIDENCE_CAVEAT and downstream consumers must not read them as proofs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["Verdict", "HOLDS", "FAILS", "INCONCLUSIVE", "EVIDENCE_CAVEAT"]

HOLDS = "Holds"
FAILS = "Fails"
INCONCLUSIVE = "Inconclusive"

EVIDENCE_CAVEAT = ("finite-horizon numerical evidence, not a proof: the "
                   "hypothesis quantifies over an unbounded range")


@dataclass
class Verdict:
    kind: str          # which check produced this, e.g. "interval-oscillation"
    status: str        # Holds | Fails | Inconclusive
    witnesses: dict = field(default_factory=dict)
    caveats: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError(f"unknown verdict status {self.status!r}")
        if self.status in (HOLDS, FAILS) and not self.witnesses:
            raise ValueError(
                f"{self.status} verdict requires at least one witness")

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def as_dict(self) -> dict:
        return {
            "theorem": self.kind,
            "status": self.status,
            "witnesses": _plain(self.witnesses),
            "caveats": list(self.caveats),
            "parameters": _plain(self.parameters),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


def _plain(obj):
    """Recursively coerce numpy scalars/arrays into JSON-friendly types."""
    import numpy as np
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
