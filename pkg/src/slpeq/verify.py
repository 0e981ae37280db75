"""Proof checking: replay a rule sequence and compare canonical text.

A proof of `progA == progB` is a rule sequence whose replay from progA is
legal at every step and whose final program prints identically to progB.
Everything is syntactic, so a Proven result cannot be a false positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from .lang import DEFAULT_LIMITS, Limits, Program, parse_prefix, print_prefix
from .rules import ApplyOutcome, Failure, RewriteRule, apply, parse_rule, rule_text


class VerifyStatus(Enum):
    PROVEN = "Proven"
    FAILED_STEP = "FailedStep"
    MISMATCH = "Mismatch"


@dataclass(frozen=True)
class VerifyResult:
    status: VerifyStatus
    failed_index: Optional[int] = None  # 0-based index of the offending step
    failure: Optional[Failure] = None
    intermediates: tuple[Program, ...] = ()

    @property
    def proven(self) -> bool:
        return self.status is VerifyStatus.PROVEN


def verify(prog_a: Program, prog_b: Program, seq: Sequence[RewriteRule],
           limits: Limits = DEFAULT_LIMITS, keep_trace: bool = False) -> VerifyResult:
    """Replay `seq` from prog_a; Proven iff every step applies and the result
    prints identically to prog_b."""
    current = prog_a
    trace: list[Program] = [current] if keep_trace else []
    for i, rule in enumerate(seq):
        outcome: ApplyOutcome = apply(rule, current, limits)
        if not outcome.ok:
            return VerifyResult(VerifyStatus.FAILED_STEP, i, outcome.failure,
                                tuple(trace))
        current = outcome.program
        if keep_trace:
            trace.append(current)
    if current.text() != prog_b.text():
        return VerifyResult(VerifyStatus.MISMATCH, intermediates=tuple(trace))
    return VerifyResult(VerifyStatus.PROVEN, intermediates=tuple(trace))


# ---------------------------------------------------------------------------
# Proof files: `A:` and `B:` header lines, then one rule per line.


def format_proof(prog_a: Program, prog_b: Program, seq: Sequence[RewriteRule]) -> str:
    lines = [f"A: {print_prefix(prog_a)}", f"B: {print_prefix(prog_b)}"]
    lines.extend(rule_text(r) for r in seq)
    return "\n".join(lines) + "\n"


def parse_proof(text: str, limits: Limits = DEFAULT_LIMITS
                ) -> tuple[Program, Program, list[RewriteRule]]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("A:") or not lines[1].startswith("B:"):
        raise ValueError("proof file must start with 'A:' and 'B:' header lines")
    prog_a = parse_prefix(lines[0][2:], limits)
    prog_b = parse_prefix(lines[1][2:], limits)
    seq = [parse_rule(ln) for ln in lines[2:]]
    return prog_a, prog_b, seq


def write_proof(path: str | Path, prog_a: Program, prog_b: Program,
                seq: Sequence[RewriteRule]) -> None:
    Path(path).write_text(format_proof(prog_a, prog_b, seq))


def read_proof(path: str | Path, limits: Limits = DEFAULT_LIMITS
               ) -> tuple[Program, Program, list[RewriteRule]]:
    return parse_proof(Path(path).read_text(), limits)
