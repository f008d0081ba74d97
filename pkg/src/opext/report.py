"""Check records and validation reports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckRecord:
    name: str
    residual: float
    tolerance: float
    tag: str = ""
    mandatory: bool = True

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        res = self.residual
        return {
            "name": self.name,
            "residual": res if math.isfinite(res) else str(res),
            "tolerance": self.tolerance,
            "pass": self.passed,
            "tag": self.tag,
            "mandatory": self.mandatory,
        }


@dataclass
class ValidationReport:
    records: list[CheckRecord] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, name, residual, tolerance, tag="", mandatory=True) -> CheckRecord:
        rec = CheckRecord(name, float(residual), float(tolerance), tag, mandatory)
        self.records.append(rec)
        return rec

    def extend(self, other: "ValidationReport", prefix: str = "") -> None:
        for r in other.records:
            self.records.append(
                CheckRecord(prefix + r.name, r.residual, r.tolerance, r.tag, r.mandatory)
            )
        self.notes.extend(other.notes)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records if r.mandatory)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if r.mandatory and not r.passed]

    def __getitem__(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(r.name == name for r in self.records)

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "checks": [r.to_dict() for r in self.records],
            "notes": list(self.notes),
        }

    def summary(self) -> str:
        lines = []
        for r in self.records:
            flag = "PASS" if r.passed else ("FAIL" if r.mandatory else "warn")
            lines.append(f"{flag:4}  {r.name:48} {r.residual:.3e} <= {r.tolerance:.1e}")
        return "\n".join(lines)
