"""Structured verification records shared by all modules."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class VerificationReport:
    """Residuals, fitted exponents, MC estimates and pass/fail flags."""

    name: str
    metrics: dict = field(default_factory=dict)   # scalar values
    rows: list = field(default_factory=list)      # list of dict rows (CSV-able)
    passes: dict = field(default_factory=dict)    # check name -> bool
    notes: list = field(default_factory=list)
    sub_reports: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        subs = all(r.ok for r in self.sub_reports)
        return all(self.passes.values()) and subs

    def add_check(self, key: str, passed: bool, note: str | None = None):
        self.passes[key] = bool(passed)
        if note:
            self.notes.append(f"{key}: {note}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "metrics": self.metrics,
            "rows": self.rows,
            "passes": self.passes,
            "notes": self.notes,
            "ok": self.ok,
            "sub_reports": [r.to_dict() for r in self.sub_reports],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        r = cls(name=d["name"], metrics=dict(d.get("metrics", {})),
                rows=list(d.get("rows", [])), passes=dict(d.get("passes", {})),
                notes=list(d.get("notes", [])))
        r.sub_reports = [cls.from_dict(s) for s in d.get("sub_reports", [])]
        return r
