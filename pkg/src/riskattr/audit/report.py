"""Axiom reports and the JSON bundle they are written in."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..core import Method
from ..errors import ContractViolation


class Axiom(str, enum.Enum):
    AIM = "AIM"
    DIM = "DIM"
    DME = "DME"
    RDME = "RDME"
    IME = "IME"
    FMD = "FMD"
    GD = "GD"
    CG = "CG"

    @classmethod
    def parse(cls, text) -> "Axiom":
        try:
            return cls(str(text).strip().upper())
        except ValueError:
            raise ContractViolation(f"unknown axiom {text!r}") from None


class Verdict(str, enum.Enum):
    PASS = "pass"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"


def _clean(obj):
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return obj


@dataclass(frozen=True)
class Witness:
    """Inputs, attributions and margin of one failed (or evidential) comparison."""

    points: Mapping[str, Sequence[float]]
    attributions: Mapping[str, float]
    margin: float

    def to_dict(self) -> dict:
        return {"points": _clean(self.points), "attributions": _clean(self.attributions),
                "margin": float(self.margin)}


@dataclass(frozen=True)
class AxiomReport:
    axiom: Axiom
    method: Method | None
    verdict: Verdict
    witnesses: tuple[Witness, ...] = ()
    tolerance_used: float = 0.0
    model: str = ""
    feature: str | None = None
    grid: tuple[float, ...] = ()
    n_checked: int = 0
    notes: tuple[str, ...] = ()
    evidence: tuple[Witness, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "witnesses", tuple(self.witnesses))
        object.__setattr__(self, "evidence", tuple(self.evidence))
        object.__setattr__(self, "notes", tuple(self.notes))
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if self.verdict is Verdict.VIOLATED and not self.witnesses:
            raise ContractViolation("a violated report needs at least one witness")
        for w in self.witnesses:
            if not w.margin > self.tolerance_used:
                raise ContractViolation(f"witness margin {w.margin} does not exceed tolerance {self.tolerance_used}")

    @property
    def violated(self) -> bool:
        return self.verdict is Verdict.VIOLATED

    def to_dict(self) -> dict:
        out = {
            "axiom": self.axiom.value,
            "method": self.method.value if self.method is not None else None,
            "model": self.model,
            "feature": self.feature,
            "verdict": self.verdict.value,
            "tolerance_used": float(self.tolerance_used),
            "n_checked": int(self.n_checked),
            "grid": list(self.grid),
            "witnesses": [w.to_dict() for w in self.witnesses],
        }
        if self.evidence:
            out["evidence"] = [w.to_dict() for w in self.evidence]
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def bundle_to_dict(reports: Sequence[AxiomReport]) -> dict:
    return {"reports": [r.to_dict() for r in reports]}


def dumps_bundle(reports: Sequence[AxiomReport]) -> str:
    """Pretty JSON with a fixed key order and a trailing newline."""
    return json.dumps(bundle_to_dict(reports), indent=2) + "\n"


def write_report(reports: Sequence[AxiomReport], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_bundle(reports))
