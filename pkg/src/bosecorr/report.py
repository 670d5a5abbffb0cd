"""Structured pass/fail records for inequality checks."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of one inequality check.

    ``hard`` distinguishes the two verdict tiers: hard checks verify
    inequalities that hold unconditionally and fail the run when any
    margin drops below tolerance; fitted checks report the minimal
    constant making a non-explicit bound hold, and their verdict is about
    finiteness and stability, not a fixed threshold.
    """

    name: str
    passed: bool
    hard: bool
    margin: float = float("inf")
    fitted: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    skipped: bool = False
    skip_reason: str = ""

    def summary_line(self) -> str:
        if self.skipped:
            return f"[SKIP] {self.name}: {self.skip_reason}"
        tag = "PASS" if self.passed else "FAIL"
        bits = [f"[{tag}] {self.name}: worst margin {self.margin:.3e}"]
        for key, val in sorted(self.fitted.items()):
            bits.append(f"{key}={val:.6g}")
        for note in self.notes:
            bits.append(f"note: {note}")
        return "; ".join(bits)


def hard_checks_pass(reports) -> bool:
    """True when no hard check failed (skipped checks do not count)."""
    return all(r.passed for r in reports if r.hard and not r.skipped)
