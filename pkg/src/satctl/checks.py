"""Result records shared by the membership verifiers and the certifier.

Every check reduces to a signed *margin* array: positive is good, and the
check passes when the smallest margin is ``>= -tolerance`` (or ``> 0`` for
strict checks).  The smallest margin and where it occurred are kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    worst_residual: Optional[float]
    worst_location: Optional[tuple]
    tolerance: float
    samples: int
    strict: bool = False
    note: str = ""

    def as_dict(self) -> dict:
        loc = self.worst_location
        out = {
            "name": self.name,
            "pass": bool(self.passed),
            "worst_residual": None if self.worst_residual is None else float(self.worst_residual),
        }
        if loc is not None and len(loc) == 2:
            out["worst_p"] = float(loc[0])
            out["worst_v"] = float(loc[1])
        else:
            out["worst_p"] = None if loc is None else float(loc[0])
            out["worst_v"] = None
        out["tolerance"] = float(self.tolerance)
        out["samples"] = int(self.samples)
        if self.note:
            out["note"] = self.note
        return out


def margin_check(
    name: str,
    margins,
    locations: Sequence[np.ndarray],
    tolerance: float = 0.0,
    strict: bool = False,
    note: str = "",
) -> Check:
    """Build a :class:`Check` from a margin array.

    ``locations`` holds one coordinate array per axis, broadcastable to
    ``margins``.  NaN margins count as failures.
    """
    m = np.asarray(margins, dtype=float).ravel()
    locs = [np.broadcast_to(np.asarray(a, dtype=float), np.shape(margins)).ravel() for a in locations]
    if m.size == 0:
        return Check(name, True, None, None, tolerance, 0, strict, note or "vacuous")
    if np.isnan(m).any():
        i = int(np.flatnonzero(np.isnan(m))[0])
        return Check(name, False, float("nan"), tuple(float(a[i]) for a in locs), tolerance, m.size, strict, note)
    i = int(np.argmin(m))
    worst = float(m[i])
    passed = worst > 0.0 if strict else worst >= -tolerance
    return Check(name, passed, worst, tuple(float(a[i]) for a in locs), tolerance, m.size, strict, note)


@dataclass
class MembershipReport:
    subject: str
    checks: list = field(default_factory=list)
    range_limited: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def summary_lines(self) -> list:
        lines = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            lines.append(f"{tag}  {self.subject}: {c.name}  worst={c.worst_residual!r}  at={c.worst_location}")
        return lines
