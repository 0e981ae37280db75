"""Training-data curation: sample selection, hindsight mining, evaluation.

The self-supervision loop proves each known-equivalent pair twice, once with
a narrow search (I_e intermediates) and once with a wide one (I_h), then
keeps the pairs whose wide proof taught something the narrow search missed:
pairs only the wide search solved, wide proofs clearly shorter than narrow
ones, and proofs exercising rare target tokens.  Failed wide searches are
mined for hindsight samples: any legal application of a rule containing a
rare token becomes a verified 1-step training record.
"""
from __future__ import annotations

import itertools
import json
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .generate import Sample
from .lang import (
    DEFAULT_LIMITS,
    Limits,
    MAX_PATH_LETTERS,
    SCALAR_VARS,
    VECTOR_VARS,
    check_limits,
    parse_prefix,
)
from .rules import RULE_NAMES, STATEMENT_RULES, parse_rule, rule_text
from .search import Policy, ProofResult, SearchConfig, prove
from .verify import verify

SEPARATOR = "Y"


def target_vocabulary(limits: Limits = DEFAULT_LIMITS) -> tuple[str, ...]:
    """Every token a rule line can contain: statement indices, rule names,
    node paths, variable names."""
    stms = tuple(f"stm{i}" for i in range(1, limits.max_statements + 1))
    paths = tuple(
        "N" + "".join(c)
        for n in range(MAX_PATH_LETTERS + 1)
        for c in itertools.product("lr", repeat=n)
    )
    return stms + tuple(RULE_NAMES) + paths + tuple(SCALAR_VARS) + tuple(VECTOR_VARS)


@dataclass(frozen=True)
class StepSample:
    """One seq2seq training record: current program and goal on the source
    side, the next rule line on the target side."""
    src: str
    tgt: str
    pair_id: str = ""
    step: int = 0
    provenance: str = ""
    criteria: tuple[str, ...] = ()


@dataclass(frozen=True)
class SearchOutcomePair:
    sample_id: str
    easy: Optional[ProofResult]
    hard: Optional[ProofResult]
    error: Optional[str] = None


def _default_length_inclusion(hard_len: int) -> float:
    return min(1.0, hard_len / 20.0)


@dataclass(frozen=True)
class SelectionConfig:
    i_easy: int = 2
    i_hard: int = 20
    beam: int = 10
    steps: int = 25
    shorter_by: int = 2
    length_inclusion: Callable[[int], float] = _default_length_inclusion
    # None: auto cutoff at the bottom 2% of the target vocabulary by count
    rare_token_threshold: Optional[int] = None
    rare_vocab_fraction: float = 0.02
    seed: int = 0
    limits: Limits = DEFAULT_LIMITS

    def __post_init__(self):
        if self.i_easy >= self.i_hard:
            raise ValueError("narrow width must be smaller than wide width")
        if self.shorter_by < 2:
            raise ValueError("shorter-proof margin must be at least 2")


def token_frequencies(steps: Iterable[StepSample]) -> Counter:
    """Exact target-side token counts; the rarity statistic."""
    freqs: Counter = Counter()
    for s in steps:
        freqs.update(s.tgt.split())
    return freqs


def rare_token_set(freqs: Mapping[str, int], cfg: SelectionConfig,
                   limits: Limits = DEFAULT_LIMITS) -> frozenset[str]:
    """Tokens at or below the rarity cutoff.

    With an explicit threshold, rare means count < threshold.  Otherwise the
    cutoff is the count at the bottom `rare_vocab_fraction` of the target
    vocabulary ranked by count, ties included; unseen tokens always qualify.
    """
    vocab = target_vocabulary(limits)
    if cfg.rare_token_threshold is not None:
        return frozenset(t for t in vocab if freqs.get(t, 0) < cfg.rare_token_threshold)
    counts = sorted(freqs.get(t, 0) for t in vocab)
    k = max(1, round(cfg.rare_vocab_fraction * len(vocab)))
    cutoff = counts[k - 1]
    return frozenset(t for t in vocab if freqs.get(t, 0) <= cutoff)


def run_easy_hard(samples: Sequence[Sample], policy_factory: Callable[[], Policy],
                  cfg: SelectionConfig) -> list[SearchOutcomePair]:
    """Prove each pair with the narrow and the wide search.

    Both runs share beam, step limit and policy; the wide run records its
    expansions so failed searches can be mined for hindsight samples.  A
    fresh policy comes from the factory per run because policies may hold
    state (replay position, external process).
    """
    out = []
    for s in samples:
        try:
            easy = prove(s.prog_a, s.prog_b, policy_factory(), SearchConfig(
                beam=cfg.beam, width=cfg.i_easy, steps=cfg.steps, limits=cfg.limits))
            hard = prove(s.prog_a, s.prog_b, policy_factory(), SearchConfig(
                beam=cfg.beam, width=cfg.i_hard, steps=cfg.steps, limits=cfg.limits,
                record_expansions=True))
            out.append(SearchOutcomePair(s.id, easy, hard))
        except Exception as e:  # per-sample failures must not kill the batch
            out.append(SearchOutcomePair(s.id, None, None, error=str(e)))
    return out


CRITERION_HARD_ONLY = "hard-only"
CRITERION_SHORTER = "shorter"
CRITERION_RARE = "rare-token"


def select_with_reasons(
    outcomes: Sequence[SearchOutcomePair],
    samples_by_id: Mapping[str, Sample],
    training_freqs: Mapping[str, int],
    cfg: SelectionConfig,
) -> list[tuple[Sample, tuple[str, ...]]]:
    """Apply the three selection criteria; returns samples carrying their
    wide-search proofs plus the criteria that fired.

    (a) proved wide but not narrow: always selected.
    (b) wide proof at least `shorter_by` steps shorter than the narrow one:
        selected with probability length_inclusion(len(wide proof)).
    (c) wide proof containing a rare target token: always selected.
    """
    rare = rare_token_set(training_freqs, cfg, cfg.limits)
    rng = random.Random(cfg.seed)
    picked: list[tuple[Sample, tuple[str, ...]]] = []
    seen: set[str] = set()
    for oc in outcomes:
        if oc.hard is None or not oc.hard.found or oc.sample_id in seen:
            continue
        fired: list[str] = []
        if oc.easy is None or not oc.easy.found:
            fired.append(CRITERION_HARD_ONLY)
        else:
            margin = len(oc.easy.rules) - len(oc.hard.rules)
            if margin >= cfg.shorter_by:
                # rng advances only on candidate draws, keeping runs reproducible
                if rng.random() < cfg.length_inclusion(len(oc.hard.rules)):
                    fired.append(CRITERION_SHORTER)
        proof_tokens = set()
        for r in oc.hard.rules:
            proof_tokens.update(rule_text(r).split())
        if proof_tokens & rare:
            fired.append(CRITERION_RARE)
        if not fired:
            continue
        base = samples_by_id[oc.sample_id]
        sample = replace(base, rules=tuple(oc.hard.rules))
        check = verify(sample.prog_a, sample.prog_b, sample.rules, cfg.limits)
        if not check.proven:  # no unverifiable training data, ever
            raise AssertionError(f"selected proof failed verification: {oc.sample_id}")
        picked.append((sample, tuple(fired)))
        seen.add(oc.sample_id)
    return picked


def select(outcomes: Sequence[SearchOutcomePair],
           samples_by_id: Mapping[str, Sample],
           training_freqs: Mapping[str, int],
           cfg: SelectionConfig) -> list[Sample]:
    return [s for s, _ in select_with_reasons(outcomes, samples_by_id,
                                              training_freqs, cfg)]


def hindsight(outcomes: Sequence[SearchOutcomePair],
              samples_by_id: Mapping[str, Sample],
              training_freqs: Mapping[str, int],
              cfg: SelectionConfig) -> list[StepSample]:
    """Mine failed wide searches for rare-token rule applications.

    Every expansion recorded during a failed search was a legal rewrite; if
    its rule line contains a rare token, the (before, after) pair with that
    rule as target is a well-formed 1-step sample regardless of whether the
    original goal was ever reached.
    """
    rare = rare_token_set(training_freqs, cfg, cfg.limits)
    out: list[StepSample] = []
    emitted: set[tuple[str, str]] = set()
    for oc in outcomes:
        if oc.hard is None or oc.hard.found:
            continue
        sample = samples_by_id.get(oc.sample_id)
        provenance = sample.provenance if sample else ""
        for i, ex in enumerate(oc.hard.expansions):
            if not set(ex.rule.split()) & rare:
                continue
            key = (ex.before, ex.rule)
            if key in emitted:
                continue
            emitted.add(key)
            before = parse_prefix(ex.before)
            after = parse_prefix(ex.after)
            rule = parse_rule(ex.rule)
            check = verify(before, after, (rule,), cfg.limits)
            if not check.proven:
                raise AssertionError(f"recorded expansion failed verification: {ex.rule}")
            out.append(StepSample(
                src=f"{ex.before} {SEPARATOR} {ex.after}",
                tgt=ex.rule,
                pair_id=oc.sample_id,
                step=i,
                provenance=provenance,
                criteria=(CRITERION_RARE,),
            ))
    return out


def expand_steps(samples: Sequence[Sample],
                 limits: Limits = DEFAULT_LIMITS) -> list[StepSample]:
    """Unroll each k-step proof into k single-step records.

    Step i pairs the i-th intermediate program with the final goal program
    and targets rule i.  The proof is replayed first; a sample whose
    sequence does not verify is a caller bug and raises.
    """
    out: list[StepSample] = []
    for s in samples:
        if s.rules is None:
            raise ValueError(f"sample {s.id} has no proof to expand")
        res = verify(s.prog_a, s.prog_b, s.rules, limits, keep_trace=True)
        if not res.proven:
            raise ValueError(f"sample {s.id}: proof does not verify")
        goal = s.prog_b.text()
        for i, rule in enumerate(s.rules):
            current = res.intermediates[i]
            ok, violations = check_limits(current, limits)
            if not ok:
                raise AssertionError(f"intermediate breaks limits: {violations}")
            out.append(StepSample(
                src=f"{current.text()} {SEPARATOR} {goal}",
                tgt=rule_text(rule),
                pair_id=s.id,
                step=i,
                provenance=s.provenance,
            ))
    return out


# ---------------------------------------------------------------------------
# Evaluation report

BUCKET_WHOLE = "Whole dataset"
BUCKET_RENAME = "Rename"
BUCKET_NEWTMP = "Newtmp"
BUCKET_DISTL = "DistributeLeft"
BUCKET_NO_STM = "No statement rules"
BUCKET_DEPTH5 = "NodeID at depth 5"
BUCKET_SHORT = "Rewrite steps 1-10"
BUCKET_LONG = "Rewrite steps 11+"

BUCKET_ORDER = (
    BUCKET_WHOLE, BUCKET_RENAME, BUCKET_NEWTMP, BUCKET_DISTL,
    BUCKET_NO_STM, BUCKET_DEPTH5, BUCKET_SHORT, BUCKET_LONG,
)


def sample_buckets(s: Sample) -> tuple[str, ...]:
    """Category membership computed from the generation sequence."""
    if s.rules is None:
        return (BUCKET_WHOLE,)
    names = {r.name for r in s.rules}
    buckets = [BUCKET_WHOLE]
    if "Rename" in names:
        buckets.append(BUCKET_RENAME)
    if "NewTmp" in names:
        buckets.append(BUCKET_NEWTMP)
    if "DistributeLeft" in names:
        buckets.append(BUCKET_DISTL)
    if not names & set(STATEMENT_RULES):
        buckets.append(BUCKET_NO_STM)
    if any(r.path is not None and len(r.path) == 1 + MAX_PATH_LETTERS
           for r in s.rules):
        buckets.append(BUCKET_DEPTH5)
    if 1 <= len(s.rules) <= 10:
        buckets.append(BUCKET_SHORT)
    elif len(s.rules) >= 11:
        buckets.append(BUCKET_LONG)
    return tuple(buckets)


@dataclass
class BucketStats:
    total: int = 0
    found: int = 0

    @property
    def rate(self) -> Optional[float]:
        return self.found / self.total if self.total else None


@dataclass
class EvalReport:
    buckets: dict[str, BucketStats] = field(
        default_factory=lambda: {b: BucketStats() for b in BUCKET_ORDER})
    results: list[tuple[str, bool]] = field(default_factory=list)

    def add(self, s: Sample, found: bool) -> None:
        self.results.append((s.id, found))
        for b in sample_buckets(s):
            st = self.buckets[b]
            st.total += 1
            st.found += found

    def format_table(self) -> str:
        lines = [f"{'Test dataset subset':<24}{'n':>8}{'Success rate':>16}"]
        for b in BUCKET_ORDER:
            st = self.buckets[b]
            rate = "-" if st.rate is None else f"{100 * st.rate:.1f}%"
            lines.append(f"{b:<24}{st.total:>8}{rate:>16}")
        return "\n".join(lines)


def evaluate_policy(samples: Sequence[Sample],
                    policy_factory: Callable[[], Policy],
                    search_cfg: SearchConfig) -> EvalReport:
    """Run the search over every sample and bucket outcomes Table-2 style."""
    report = EvalReport()
    for s in samples:
        res = prove(s.prog_a, s.prog_b, policy_factory(), search_cfg)
        report.add(s, res.found)
    return report


# ---------------------------------------------------------------------------
# Export

def write_step_export(src_path, tgt_path, meta_path,
                      steps: Sequence[StepSample]) -> int:
    """Paired line files a sequence trainer consumes, plus per-record
    metadata (provenance, pair id, criteria fired)."""
    with open(src_path, "w", encoding="utf-8") as sf, \
            open(tgt_path, "w", encoding="utf-8") as tf, \
            open(meta_path, "w", encoding="utf-8") as mf:
        for s in steps:
            sf.write(s.src + "\n")
            tf.write(s.tgt + "\n")
            mf.write(json.dumps({
                "pair_id": s.pair_id,
                "step": s.step,
                "provenance": s.provenance,
                "criteria": list(s.criteria),
            }) + "\n")
    return len(steps)


def read_step_samples(src_path, tgt_path) -> list[StepSample]:
    with open(src_path, encoding="utf-8") as sf:
        srcs = [ln.rstrip("\n") for ln in sf]
    with open(tgt_path, encoding="utf-8") as tf:
        tgts = [ln.rstrip("\n") for ln in tf]
    if len(srcs) != len(tgts):
        raise ValueError("source and target files differ in length")
    return [StepSample(src=a, tgt=b, step=i) for i, (a, b) in enumerate(zip(srcs, tgts))]
