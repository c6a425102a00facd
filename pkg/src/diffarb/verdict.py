"""Three-valued truth values for criteria that may be numerically undecidable.

Every boundary/integrability criterion in the engine returns a Verdict so
that a single undecidable leaf contaminates only the conclusions that truly
depend on it (Kleene combinators).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

__all__ = ["HOLDS", "FAILS", "UNKNOWN", "SYMBOLIC", "NUMERIC", "Verdict",
           "holds", "fails", "unknown", "all_of", "any_of", "negate", "from_bool"]

HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown"

SYMBOLIC = "symbolic"
NUMERIC = "numeric"


@dataclass(frozen=True)
class Verdict:
    value: str                # holds | fails | unknown
    method: str = SYMBOLIC    # symbolic | numeric
    note: str = ""
    cite: str = ""

    @property
    def is_holds(self) -> bool:
        return self.value == HOLDS

    @property
    def is_fails(self) -> bool:
        return self.value == FAILS

    @property
    def is_unknown(self) -> bool:
        return self.value == UNKNOWN

    def cited(self, cite: str) -> "Verdict":
        return replace(self, cite=cite)

    def with_note(self, note: str) -> "Verdict":
        return replace(self, note=note)

    def __str__(self) -> str:
        out = self.value.upper()
        if self.method:
            out += f" [{self.method}]"
        if self.cite:
            out += f" ({self.cite})"
        if self.note:
            out += f": {self.note}"
        return out


def holds(note: str = "", method: str = SYMBOLIC, cite: str = "") -> Verdict:
    return Verdict(HOLDS, method, note, cite)


def fails(note: str = "", method: str = SYMBOLIC, cite: str = "") -> Verdict:
    return Verdict(FAILS, method, note, cite)


def unknown(note: str = "", method: str = NUMERIC, cite: str = "") -> Verdict:
    return Verdict(UNKNOWN, method, note, cite)


def from_bool(b: bool, note: str = "", method: str = SYMBOLIC) -> Verdict:
    return Verdict(HOLDS if b else FAILS, method, note)


def _merged_method(vs) -> str:
    return SYMBOLIC if all(v.method == SYMBOLIC for v in vs) else NUMERIC


def all_of(*vs: Verdict) -> Verdict:
    """Kleene conjunction; a single FAILS decides, UNKNOWN is contagious
    only when nothing fails."""
    for v in vs:
        if v.is_fails:
            return v
    unknowns = [v for v in vs if v.is_unknown]
    if unknowns:
        return Verdict(UNKNOWN, NUMERIC, unknowns[0].note, unknowns[0].cite)
    return Verdict(HOLDS, _merged_method(vs))


def any_of(*vs: Verdict) -> Verdict:
    """Kleene disjunction; a single HOLDS decides."""
    for v in vs:
        if v.is_holds:
            return v
    unknowns = [v for v in vs if v.is_unknown]
    if unknowns:
        return Verdict(UNKNOWN, NUMERIC, unknowns[0].note, unknowns[0].cite)
    return Verdict(FAILS, _merged_method(vs))


def negate(v: Verdict) -> Verdict:
    if v.is_unknown:
        return v
    return Verdict(FAILS if v.is_holds else HOLDS, v.method, v.note, v.cite)
