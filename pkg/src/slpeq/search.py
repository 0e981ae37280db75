"""Beam search for equivalence proofs.

The search keeps up to `width` intermediate programs per step.  Each is
offered to the policy, which returns up to `beam` scored rule proposals.
Successors are drawn round-robin across the frontier by proposal rank, so
every intermediate contributes its best ideas before any contributes its
second-best.  Illegal proposals and programs already seen in this search are
skipped; every accepted successor is goal-checked immediately, before the
frontier is truncated.  A Found result is re-verified before being returned.
"""
from __future__ import annotations

import collections
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from .lang import DEFAULT_LIMITS, Limits, Program, UNBOUNDED_LIMITS
from .rules import RewriteRule, apply, enumerate_legal, rule_text
from .verify import VerifyStatus, verify


class ProofStatus(Enum):
    FOUND = "Found"
    EXHAUSTED = "Exhausted"
    STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class PolicyProposal:
    rule: RewriteRule
    score: float


Policy = Callable[[Program, Program, int], Sequence[PolicyProposal]]


@dataclass(frozen=True)
class SearchConfig:
    beam: int = 10
    width: int = 2
    steps: int = 25
    enforce_limits: bool = True
    limits: Limits = DEFAULT_LIMITS
    record_expansions: bool = False


@dataclass(frozen=True)
class Expansion:
    """One legal, novel application examined during the search."""
    before: str
    rule: str
    after: str


@dataclass(frozen=True)
class ProofResult:
    status: ProofStatus
    rules: Optional[tuple[RewriteRule, ...]] = None
    states_expanded: int = 0
    expansions: tuple[Expansion, ...] = ()

    @property
    def found(self) -> bool:
        return self.status is ProofStatus.FOUND

    @property
    def proof_length(self) -> Optional[int]:
        return len(self.rules) if self.rules is not None else None


class SearchSoundnessError(RuntimeError):
    """A candidate proof failed re-verification: an engine bug, never ignored."""


def prove(prog_a: Program, prog_b: Program, policy: Policy,
          cfg: SearchConfig = SearchConfig()) -> ProofResult:
    limits = cfg.limits if cfg.enforce_limits else UNBOUNDED_LIMITS
    goal_text = prog_b.text()
    record: list[Expansion] = []

    def finish(history: tuple[RewriteRule, ...], states: int) -> ProofResult:
        check = verify(prog_a, prog_b, history, limits)
        if check.status is not VerifyStatus.PROVEN:
            raise SearchSoundnessError(
                f"search produced a non-verifying sequence: {[rule_text(r) for r in history]}"
            )
        return ProofResult(ProofStatus.FOUND, history, states, tuple(record))

    if prog_a.text() == goal_text:
        return finish((), 0)

    frontier: list[tuple[Program, tuple[RewriteRule, ...]]] = [(prog_a, ())]
    seen: set[str] = {prog_a.text()}
    states_expanded = 0

    for _ in range(cfg.steps):
        proposal_lists = []
        for program, history in frontier:
            states_expanded += 1
            proposals = list(policy(program, prog_b, cfg.beam))[: cfg.beam]
            proposals.sort(key=lambda pr: -pr.score)
            proposal_lists.append(proposals)

        successors: list[tuple[Program, tuple[RewriteRule, ...]]] = []
        max_rank = max((len(pl) for pl in proposal_lists), default=0)
        for rank in range(max_rank):
            for (program, history), proposals in zip(frontier, proposal_lists):
                if len(successors) >= cfg.width:
                    break
                if rank >= len(proposals):
                    continue
                rule = proposals[rank].rule
                outcome = apply(rule, program, limits)
                if not outcome.ok:
                    continue
                text = outcome.program.text()
                if text in seen:
                    continue
                seen.add(text)
                if cfg.record_expansions:
                    record.append(Expansion(program.text(), rule_text(rule), text))
                new_history = history + (rule,)
                if text == goal_text:
                    return finish(new_history, states_expanded)
                successors.append((outcome.program, new_history))
            if len(successors) >= cfg.width:
                break

        if not successors:
            return ProofResult(ProofStatus.EXHAUSTED, None, states_expanded,
                               tuple(record))
        frontier = successors

    return ProofResult(ProofStatus.STEP_LIMIT, None, states_expanded, tuple(record))


# ---------------------------------------------------------------------------
# Built-in policies


def distance(p: Program, q: Program) -> int:
    """Rewrite-aware distance: symmetric difference of printed token
    multisets plus the statement-count difference.  Closing parentheses are
    redundant in the prefix encoding and are not counted."""
    pc = collections.Counter(t for t in p.text().split() if t != ")")
    qc = collections.Counter(t for t in q.text().split() if t != ")")
    diff = (pc - qc) + (qc - pc)
    return sum(diff.values()) + abs(len(p.stmts) - len(q.stmts))


def heuristic_policy(program: Program, goal: Program, beam: int
                     ) -> list[PolicyProposal]:
    """Score every legal successor by negated distance to the goal;
    deterministic tie-break on rule text.  An exact goal match outranks
    everything: distance 0 only means multiset equality, so commuted
    near-misses could otherwise crowd the true successor out of the beam."""
    goal_text = goal.text()
    scored: list[tuple[int, str, RewriteRule]] = []
    for rule in enumerate_legal(program, var_pool="goal", goal=goal):
        outcome = apply(rule, program)
        if not outcome.ok:
            continue
        if outcome.program.text() == goal_text:
            d = -1
        else:
            d = distance(outcome.program, goal)
        scored.append((d, rule_text(rule), rule))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [PolicyProposal(rule, float(-d)) for d, _, rule in scored[:beam]]


class ReplayPolicy:
    """Proposes a known rule sequence one step at a time.

    With beam 1 and width 1 the search consumes exactly one proposal per
    step, so a generation sequence replays within its own length.
    """

    def __init__(self, seq: Sequence[RewriteRule]):
        self._seq = list(seq)
        self._pos = 0

    def __call__(self, program: Program, goal: Program, beam: int
                 ) -> list[PolicyProposal]:
        if self._pos >= len(self._seq):
            return []
        rule = self._seq[self._pos]
        self._pos += 1
        return [PolicyProposal(rule, 0.0)]


# ---------------------------------------------------------------------------
# Exhaustive oracle


def exhaustive_prove(prog_a: Program, prog_b: Program, max_depth: int,
                     limits: Limits = DEFAULT_LIMITS,
                     max_states: int = 2_000_000) -> ProofResult:
    """Breadth-first search over all legal rewrites, complete to max_depth.

    Candidate variables for NewTmp and Rename are restricted to those of the
    two programs plus one fresh variable per type; unused variable names are
    interchangeable, so a proof exists under this reduction iff one exists at
    all for the depths this oracle is meant for.
    """
    goal_text = prog_b.text()
    if prog_a.text() == goal_text:
        return ProofResult(ProofStatus.FOUND, (), 0)
    frontier: list[tuple[Program, tuple[RewriteRule, ...]]] = [(prog_a, ())]
    seen: set[str] = {prog_a.text()}
    states = 0
    for _depth in range(max_depth):
        nxt: list[tuple[Program, tuple[RewriteRule, ...]]] = []
        for program, history in frontier:
            states += 1
            if states > max_states:
                return ProofResult(ProofStatus.EXHAUSTED, None, states)
            for rule in enumerate_legal(program, limits, var_pool="goal",
                                        goal=prog_b):
                outcome = apply(rule, program, limits)
                if not outcome.ok:
                    continue
                text = outcome.program.text()
                if text in seen:
                    continue
                seen.add(text)
                new_history = history + (rule,)
                if text == goal_text:
                    check = verify(prog_a, prog_b, new_history, limits)
                    if check.status is not VerifyStatus.PROVEN:
                        raise SearchSoundnessError("exhaustive search soundness")
                    return ProofResult(ProofStatus.FOUND, new_history, states)
                nxt.append((outcome.program, new_history))
        if not nxt:
            break
        frontier = nxt
    return ProofResult(ProofStatus.EXHAUSTED, None, states)
