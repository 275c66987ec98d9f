"""Three-valued check outcomes shared by every semantic check.

``Proven`` is reserved for checks whose quantifiers were fully discharged
(finite candidate sets, single bounded evaluations that terminated).
``Disproven`` always carries a witness that re-fails deterministically.
Anything quantifier-sampled or fuel-limited is ``UpToBounds``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PROVEN = "Proven"
DISPROVEN = "Disproven"
UP_TO_BOUNDS = "UpToBounds"


@dataclass(frozen=True)
class Bounds:
    fuel: int = 0
    corpus: int = 0
    catalog: int | None = None
    k: int | None = None
    ctx_size: int | None = None

    def render(self) -> str:
        parts = [f"fuel={self.fuel}", f"corpus={self.corpus}"]
        if self.catalog is not None:
            parts.append(f"catalog={self.catalog}")
        if self.k is not None:
            parts.append(f"k={self.k}")
        if self.ctx_size is not None:
            parts.append(f"ctx={self.ctx_size}")
        return " ".join(parts)


@dataclass(frozen=True)
class Verdict:
    status: str
    bounds: Bounds
    witness: str | None = None
    note: str | None = None
    details: dict = field(default_factory=dict, compare=False)

    @property
    def is_proven(self) -> bool:
        return self.status == PROVEN

    @property
    def is_disproven(self) -> bool:
        return self.status == DISPROVEN

    @property
    def refuted(self) -> bool:
        return self.status == DISPROVEN

    def render(self) -> str:
        line = f"VERDICT {self.status}"
        if self.witness is not None:
            line += f" WITNESS {self.witness}"
        line += f" BOUNDS {self.bounds.render()}"
        if self.note:
            line += f" NOTE {self.note}"
        return line


def proven(bounds: Bounds, note: str | None = None) -> Verdict:
    return Verdict(PROVEN, bounds, note=note)


def disproven(bounds: Bounds, witness: str, note: str | None = None, **details) -> Verdict:
    return Verdict(DISPROVEN, bounds, witness=witness, note=note, details=dict(details))


def up_to_bounds(bounds: Bounds, note: str | None = None, witness: str | None = None) -> Verdict:
    return Verdict(UP_TO_BOUNDS, bounds, witness=witness, note=note)


def all_of(verdicts, bounds: Bounds, exhaustive: bool = True) -> Verdict:
    """Conjunction: first Disproven wins; sampling weakens Proven."""
    saw_bounds = not exhaustive
    note = None if exhaustive else "sampled quantifier"
    for v in verdicts:
        if v.is_disproven:
            return v
        if v.status == UP_TO_BOUNDS:
            saw_bounds = True
            note = v.note or note
    return up_to_bounds(bounds, note) if saw_bounds else proven(bounds)


def exists_of(verdicts, bounds: Bounds, exhausted_note: str) -> Verdict:
    """Existential search: a Proven witness settles it; never Disproven."""
    saw_bounds = False
    for v in verdicts:
        if v.is_proven:
            return v
        if v.status == UP_TO_BOUNDS:
            saw_bounds = True
    note = "candidate related only up to bounds" if saw_bounds else exhausted_note
    return up_to_bounds(bounds, note)
