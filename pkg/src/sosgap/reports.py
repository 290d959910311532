"""JSON-ready verification reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction


def jsonable(obj):
    """Convert Fractions, sets and dataclass-like objects into JSON-safe values."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(jsonable(x) for x in obj)
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    if hasattr(obj, "item"):  # numpy scalar
        return obj.item()
    return obj


@dataclass
class Report:
    """Outcome of one check: {lemma, inputs, status, witness?}."""

    lemma: str
    status: str  # "pass" | "fail" | "partial" | "skipped" | "error"
    inputs: dict = field(default_factory=dict)
    witness: object = None
    trials: int | None = None
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        d = {"lemma": self.lemma, "inputs": jsonable(self.inputs), "status": self.status}
        if self.witness is not None:
            d["witness"] = jsonable(self.witness)
        if self.trials is not None:
            d["trials"] = self.trials
        if self.violations:
            d["violations"] = jsonable(self.violations[:5])
            d["violation_count"] = len(self.violations)
        if self.details:
            d["details"] = jsonable(self.details)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def status_of(failed: bool) -> str:
    return "fail" if failed else "pass"
