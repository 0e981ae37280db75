"""Pair generation: synthetic programs plus desk-scale compiled-code pipeline.

Synthetic generation builds a program back to front from its output
statements, then runs three randomized rewrite passes over it; the pair plus
the applied sequence is the training sample.  The compiled pipeline parses
normalized infix source and expresses common-subexpression elimination,
simplification and variable reuse as verifying rewrite sequences, mixing
pairs between stages.
"""
from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence

from .lang import (
    Const,
    DEFAULT_LIMITS,
    Expr,
    GENERALIZATION_LIMITS,
    Limits,
    OP_SIGNATURES,
    Op,
    Program,
    ProgramError,
    SCALAR_VARS,
    Stmt,
    Type,
    VAR_TYPES,
    VECTOR_VARS,
    Var,
    addressable_paths,
    check_limits,
    expr_size,
    expr_vars,
    mk_op,
    parse_normalized_source,
    rename_program,
    resolve_path,
    type_of,
    validate_program,
)
from .rules import EXPRESSION_RULES, RewriteRule, apply, rule_text
from .verify import verify

SYNTHETIC = "Synthetic"
COMPILED = "Compiled"
MINED = "Mined"


@dataclass(frozen=True)
class Sample:
    id: str
    prog_a: Program
    prog_b: Program
    rules: Optional[tuple[RewriteRule, ...]]
    provenance: str = SYNTHETIC


def child_seed(master: int, *parts) -> int:
    """Stable derived seed; avoids Python's randomized str hashing."""
    material = ":".join([str(master), *map(str, parts)])
    return int.from_bytes(hashlib.blake2b(material.encode(), digest_size=8).digest(), "big")


# ---------------------------------------------------------------------------
# Configuration

DEFAULT_RULE_PROBS: dict[str, float] = {
    "SwapPrev": 0.03,
    "UseVar": 0.3,
    "Inline": 0.03,
    "DeleteStm": 0.5,
    "NewTmp": 0.02,
    "Rename": 0.025,
    "AddZero": 0.002,
    "SubZero": 0.002,
    "MultOne": 0.002,
    "DivOne": 0.002,
    "NeutralOp": 0.1,
    "Cancel": 0.14,
    "DoubleOp": 0.35,
    "AbsorbOp": 0.3,
    "Commute": 0.09,
    "DistributeLeft": 0.13,
    "DistributeRight": 0.13,
    "FactorLeft": 0.65,
    "FactorRight": 0.65,
    "AssociativeLeft": 0.09,
    "AssociativeRight": 0.09,
    "FlipLeft": 0.25,
    "FlipRight": 0.25,
}

# Result-type-indexed operator weights for expression generation.
DEFAULT_OP_WEIGHTS: dict[str, float] = {
    "+s": 7.0, "-s": 8.0, "*s": 6.5, "/s": 4.0, "ns": 3.0,
    "+v": 6.0, "-v": 6.0, "nv": 2.0, "*sv": 6.0,
    **{f"f{i}s": 1.2 for i in range(1, 6)},
    **{f"f{i}v": 0.9 for i in range(1, 6)},
    **{f"g{i}s": 0.8 for i in range(1, 4)},
    **{f"g{i}v": 0.8 for i in range(1, 4)},
}


@dataclass(frozen=True)
class GenConfig:
    limits: Limits = DEFAULT_LIMITS
    # program shape: weighted node-count bands, skewed to keep a heavy tail
    size_bands: tuple[tuple[int, int, float], ...] = (
        (6, 20, 0.50), (20, 45, 0.33), (45, 100, 0.17))
    p_two_outputs: float = 0.4
    p_vector_output: float = 0.35
    # expression shape
    depth_weights: tuple[tuple[int, float], ...] = (
        (2, 0.2), (3, 0.35), (4, 0.25), (5, 0.15), (6, 0.05))
    leaf_const_prob: float = 0.04
    leaf_fresh_prob: float = 0.4
    shared_subexpr_prob: float = 0.08
    promote_prob: float = 0.55
    op_weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_OP_WEIGHTS))
    # rewrite passes
    rule_probs: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_RULE_PROBS))
    rules_passes: int = 3
    # occasional pairs draw a hotter application rate, giving long sequences
    intensity_mixture: tuple[tuple[float, float], ...] = (
        (1.0, 0.95), (2.5, 0.04), (7.0, 0.01))
    min_steps: int = 1
    max_retries: int = 40

    def small(self) -> "GenConfig":
        """Profile for oracle-scale tests: tiny programs, short sequences."""
        return replace(
            self,
            size_bands=((4, 10, 1.0),),
            p_two_outputs=0.2,
            depth_weights=((2, 0.6), (3, 0.4)),
            shared_subexpr_prob=0.04,
            promote_prob=0.4,
            intensity_mixture=((1.0, 1.0),),
        )

    def generalization(self) -> "GenConfig":
        """Out-of-distribution profile: up to three outputs, programs past
        the 100-node training ceiling."""
        return replace(
            self,
            limits=GENERALIZATION_LIMITS,
            size_bands=((20, 60, 0.4), (60, 120, 0.6)),
        )


def _weighted_choice(rng: random.Random, pairs: Sequence[tuple], total: float = None):
    if total is None:
        total = sum(w for _, w in pairs)
    x = rng.random() * total
    for value, w in pairs:
        x -= w
        if x <= 0:
            return value
    return pairs[-1][0]


# ---------------------------------------------------------------------------
# Program generation


class _Builder:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.free_s = list(SCALAR_VARS)
        self.free_v = list(VECTOR_VARS)
        rng.shuffle(self.free_s)
        rng.shuffle(self.free_v)
        self.undefined: dict[str, None] = {}  # vars read but not yet assigned
        self.subtrees: list[Expr] = []
        self.ops_by_type: dict[Type, list[tuple[str, float]]] = {
            t: [(op, cfg.op_weights.get(op, 0.0))
                for op, (_, res) in OP_SIGNATURES.items() if res is t]
            for t in (Type.SCALAR, Type.VECTOR)
        }

    def fresh(self, t: Type) -> Optional[str]:
        pool = self.free_s if t is Type.SCALAR else self.free_v
        return pool.pop() if pool else None

    def leaf(self, t: Type, avoid_zero: bool = False) -> Expr:
        if self.rng.random() < self.cfg.leaf_const_prob:
            if t is Type.SCALAR:
                # a 0s divisor would make the program unevaluable everywhere
                return Const("1s" if avoid_zero else self.rng.choice(("0s", "1s")))
            if not avoid_zero:
                return Const("0v")
        return Var(self._leaf_var(t))

    def _leaf_var(self, t: Type) -> str:
        rng = self.rng
        pool = [v for v in self.undefined if VAR_TYPES[v] is t]
        if pool and rng.random() >= self.cfg.leaf_fresh_prob:
            return rng.choice(pool)
        name = self.fresh(t)
        if name is None:
            return rng.choice(pool) if pool else rng.choice(
                SCALAR_VARS if t is Type.SCALAR else VECTOR_VARS)
        self.undefined[name] = None
        return name

    def expr(self, t: Type, depth: int, budget: int,
             avoid_zero: bool = False) -> Expr:
        """Random expression of type t, height <= depth, about `budget` nodes."""
        rng = self.rng
        if depth <= 1 or budget <= 1:
            return self.leaf(t, avoid_zero)
        if not avoid_zero and rng.random() < self.cfg.shared_subexpr_prob:
            shared = self._shared(t, depth, budget)
            if shared is not None:
                return shared
        op = _weighted_choice(rng, self.ops_by_type[t])
        args = OP_SIGNATURES[op][0]
        remaining = budget - 1
        built = []
        for i, at in enumerate(args):
            share = remaining if i == len(args) - 1 else rng.randint(1, max(1, remaining))
            child = self.expr(at, depth - 1, max(1, share),
                              avoid_zero=(op == "/s" and i == 1))
            built.append(child)
            remaining = max(0, remaining - expr_size(child))
        node = mk_op(op, *built)
        self.subtrees.append(node)
        return node

    def _shared(self, t: Type, depth: int, budget: int) -> Optional[Expr]:
        # reuse an earlier subtree when its variables are all still undefined
        candidates = [
            s for s in self.subtrees
            if type_of(s) is t and expr_size(s) <= budget
            and (expr_size(s) if isinstance(s, Op) else 1) >= 2
            and s.height <= depth
            and all(v in self.undefined for v in expr_vars(s))
        ]
        if not candidates:
            return None
        return self.rng.choice(candidates)


def generate_prog(cfg: GenConfig, rng: random.Random) -> Program:
    """Random well-formed program built back to front from its outputs."""
    for _ in range(cfg.max_retries):
        p = _generate_once(cfg, rng)
        if p is not None and not validate_program(p, cfg.limits):
            return p
    raise RuntimeError("program generation failed to satisfy limits")


def _generate_once(cfg: GenConfig, rng: random.Random) -> Optional[Program]:
    lo, hi = _weighted_choice(rng, [((a, b), w) for a, b, w in cfg.size_bands])
    target_nodes = rng.randint(lo, hi)
    target_nodes = min(target_nodes, cfg.limits.max_nodes)
    target_stmts = max(2, min(cfg.limits.max_statements,
                              round(target_nodes / rng.uniform(4.0, 8.0)) + 1))
    b = _Builder(cfg, rng)

    n_outputs = 1
    while n_outputs < cfg.limits.max_outputs and rng.random() < cfg.p_two_outputs:
        n_outputs += 1
    stmts: list[Stmt] = []
    for _ in range(n_outputs):
        t = Type.VECTOR if rng.random() < cfg.p_vector_output else Type.SCALAR
        name = b.fresh(t)
        if name is None:
            return None
        depth = _weighted_choice(rng, cfg.depth_weights)
        share = max(3, (target_nodes * 2) // (3 * n_outputs))
        rhs = b.expr(t, depth, max(1, min(share, target_nodes - _nodes_used(stmts))))
        stmts.append(Stmt(name, True, rhs))

    # promote a subset of the read-but-undefined variables to earlier temps
    while b.undefined and len(stmts) < target_stmts:
        used = _nodes_used(stmts)
        if used >= target_nodes:
            break
        name = rng.choice(list(b.undefined))
        del b.undefined[name]
        if rng.random() >= cfg.promote_prob:
            continue  # stays an input
        depth = _weighted_choice(rng, cfg.depth_weights)
        rhs = b.expr(VAR_TYPES[name], depth, max(2, target_nodes - used))
        stmts.insert(0, Stmt(name, False, rhs))

    p = Program(tuple(stmts))
    ok, _ = check_limits(p, cfg.limits)
    return p if ok else None


def _nodes_used(stmts: list[Stmt]) -> int:
    return sum(expr_size(s.rhs) for s in stmts)


# ---------------------------------------------------------------------------
# Randomized rewrite passes


def apply_random_rules(p: Program, cfg: GenConfig, rng: random.Random,
                       intensity: float = 1.0,
                       seen: Optional[set[str]] = None
                       ) -> tuple[Program, list[RewriteRule]]:
    """One pass over statements and nodes, applying each eligible rule with
    its configured probability.  Returns the result and the exact sequence
    applied; the sequence always verifies against the input and result.

    `seen` carries program texts already visited while building this pair.
    Steps that revisit one are skipped: the sequence stays a simple path in
    the rewrite graph, so it can replay through a search that prunes
    previously seen states.
    """
    seq: list[RewriteRule] = []
    probs = cfg.rule_probs
    if seen is None:
        seen = set()
    seen.add(p.text())

    def hit(name: str) -> bool:
        return rng.random() < min(0.95, probs.get(name, 0.0) * intensity)

    def try_rule(rule: RewriteRule) -> bool:
        nonlocal p
        outcome = apply(rule, p, cfg.limits)
        if not outcome.ok:
            return False
        if outcome.program.text() in seen:
            # covers no-op steps (Commute over equal operands) and cycles
            # back to any earlier state of this pair
            return False
        p = outcome.program
        seen.add(p.text())
        seq.append(rule)
        return True

    # statement-level pass
    k = 1
    while k <= len(p.stmts):
        if k >= 2 and hit("SwapPrev"):
            try_rule(RewriteRule(k, "SwapPrev"))
        assigned_before = []
        seen_targets = set()
        for j in range(k - 1):
            t = p.stmts[j].target
            if t not in seen_targets:
                seen_targets.add(t)
                assigned_before.append(t)
        for var in assigned_before:
            if hit("UseVar"):
                try_rule(RewriteRule(k, "UseVar", var=var))
        for var in sorted(p.stmts[k - 1].reads & seen_targets):
            if hit("Inline"):
                try_rule(RewriteRule(k, "Inline", var=var))
        if hit("DeleteStm") and try_rule(RewriteRule(k, "DeleteStm")):
            continue  # next statement slid into position k
        if hit("NewTmp"):
            stmt = p.stmts[k - 1]
            path = rng.choice(addressable_paths(stmt.rhs))
            node = resolve_path(stmt.rhs, path)
            pool = _free_vars(p, type_of(node))
            if pool and try_rule(RewriteRule(k, "NewTmp", path, rng.choice(pool))):
                k += 1  # the processed statement moved one slot down
        if hit("Rename"):
            stmt = p.stmts[k - 1]
            pool = _free_vars(p, VAR_TYPES[stmt.target])
            if pool:
                try_rule(RewriteRule(k, "Rename", var=rng.choice(pool)))
        k += 1

    # expression-level pass over a per-statement snapshot of node paths
    for k in range(1, len(p.stmts) + 1):
        snapshot = addressable_paths(p.stmts[k - 1].rhs)
        for path in snapshot:
            for name in EXPRESSION_RULES:
                if hit(name):
                    try_rule(RewriteRule(k, name, path))
    return p, seq


def _free_vars(p: Program, t: Type) -> list[str]:
    used = set(p.variables())
    pool = SCALAR_VARS if t is Type.SCALAR else VECTOR_VARS
    return [v for v in pool if v not in used]


def generate_pair(cfg: GenConfig, seed: int, pair_id: Optional[str] = None,
                  provenance: str = SYNTHETIC) -> Sample:
    """One synthetic pair: progA, progB after the rewrite passes, and the
    applied sequence.  Deterministic per (cfg, seed)."""
    if pair_id is None:
        pair_id = f"pair-{seed}"
    sample = None
    for attempt in range(cfg.max_retries):
        rng = random.Random(child_seed(seed, "attempt", attempt))
        prog_a = generate_prog(cfg, rng)
        intensity = _weighted_choice(rng, cfg.intensity_mixture)
        current, seq = prog_a, []
        seen = {prog_a.text()}
        for _ in range(cfg.rules_passes):
            current, applied = apply_random_rules(current, cfg, rng, intensity,
                                                  seen=seen)
            seq.extend(applied)
        sample = Sample(pair_id, prog_a, current, tuple(seq), provenance)
        if len(seq) >= cfg.min_steps:
            return sample
    return sample  # retries exhausted (e.g. all probabilities zero)


def generate_corpus(cfg: GenConfig, master_seed: int, count: int,
                    id_prefix: str = "syn") -> Iterator[Sample]:
    for i in range(count):
        yield generate_pair(cfg, child_seed(master_seed, i), f"{id_prefix}-{i:06d}")


# ---------------------------------------------------------------------------
# Compiled-code pipeline


def find_source_programs(corpus_text: str, limits: Limits = DEFAULT_LIMITS
                         ) -> tuple[list[Program], list[str]]:
    """Split a corpus of normalized snippets (blank-line separated), parse
    them, and filter: at least two assignments, at least one multiply or
    divide, and at least one temporary feeding an output.  Deduplicates by
    canonical text."""
    programs: list[Program] = []
    errors: list[str] = []
    seen: set[str] = set()
    for i, chunk in enumerate(corpus_text.split("\n\n")):
        text = " ".join(chunk.split())
        if not text:
            continue
        try:
            p = parse_normalized_source(text, limits)
        except ProgramError as e:
            errors.append(f"snippet {i}: {e}")
            continue
        if len(p.stmts) < 2:
            continue
        ops = {n.op for s in p.stmts for n in _walk(s.rhs) if isinstance(n, Op)}
        if not ops & {"*s", "/s", "*sv"}:
            continue
        if not _temp_feeds_output(p):
            continue
        if p.text() in seen:
            continue
        seen.add(p.text())
        programs.append(p)
    return programs, errors


def _walk(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, Op):
            stack.extend(n.args)


def _temp_feeds_output(p: Program) -> bool:
    from .lang import Role, roles

    role_map = roles(p)
    # backward dependency closure from the outputs
    needed: set[str] = set()
    for s in reversed(p.stmts):
        if s.out or s.target in needed:
            needed.update(s.reads)
    return any(role_map.get(v) is Role.TEMP for v in needed)


def cse_pass(p: Program) -> tuple[Program, list[RewriteRule]]:
    """Common-subexpression elimination as NewTmp plus UseVar rewrites."""
    seq: list[RewriteRule] = []
    attempted: set[Expr] = set()
    while True:
        counts: Counter[Expr] = Counter()
        for s in p.stmts:
            for path in addressable_paths(s.rhs):
                node = resolve_path(s.rhs, path)
                if isinstance(node, Op) and expr_size(node) >= 2:
                    counts[node] += 1
        best = None
        for node, n in counts.items():
            if n < 2 or node in attempted:
                continue
            key = (n * expr_size(node), expr_size(node))
            if best is None or key > best[0]:
                best = (key, node)
        if best is None:
            return p, seq
        node = best[1]
        attempted.add(node)
        pool = _free_vars(p, type_of(node))
        if not pool:
            return p, seq
        var = pool[0]
        placed = False
        for k in range(1, len(p.stmts) + 1):
            paths = [pt for pt in addressable_paths(p.stmts[k - 1].rhs)
                     if resolve_path(p.stmts[k - 1].rhs, pt) == node]
            if not paths:
                continue
            rule = RewriteRule(k, "NewTmp", paths[0], var)
            outcome = apply(rule, p)
            if not outcome.ok:
                break
            p = outcome.program
            seq.append(rule)
            placed = True
            first = k
            break
        if not placed:
            return p, seq
        # replace the remaining occurrences statement by statement
        for k in range(first + 1, len(p.stmts) + 1):
            rule = RewriteRule(k, "UseVar", var=var)
            outcome = apply(rule, p)
            if outcome.ok:
                p = outcome.program
                seq.append(rule)


def simplify_pass(p: Program) -> tuple[Program, list[RewriteRule]]:
    """Strength-reduction canonicalization: strip neutral operands, absorb
    zeros, collapse double negations, cancel self-differences, to fixpoint."""
    seq: list[RewriteRule] = []
    changed = True
    while changed:
        changed = False
        for k in range(1, len(p.stmts) + 1):
            for path in addressable_paths(p.stmts[k - 1].rhs):
                for name in ("NeutralOp", "AbsorbOp", "DoubleOp", "Cancel"):
                    rule = RewriteRule(k, name, path)
                    outcome = apply(rule, p)
                    if outcome.ok:
                        p = outcome.program
                        seq.append(rule)
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    return p, seq


def reuse_pass(p: Program) -> tuple[Program, list[RewriteRule]]:
    """Variable reuse: delete dead statements, rename single-use temporaries
    onto older dead names, register-allocation style."""
    seq: list[RewriteRule] = []
    changed = True
    while changed:
        changed = False
        for k in range(1, len(p.stmts) + 1):
            rule = RewriteRule(k, "DeleteStm")
            outcome = apply(rule, p)
            if outcome.ok:
                p = outcome.program
                seq.append(rule)
                changed = True
                break
        if changed:
            continue
        first_seen = {}
        for i, name in enumerate(_appearance_order(p)):
            first_seen.setdefault(name, i)
        for k in range(1, len(p.stmts) + 1):
            stmt = p.stmts[k - 1]
            t_first = _first_stmt_of_var(p, stmt.target)
            if t_first != k - 1:
                continue  # only collapse variables born at this statement
            older = [v for v in first_seen
                     if VAR_TYPES[v] is VAR_TYPES[stmt.target]
                     and first_seen[v] < first_seen[stmt.target]]
            older.sort(key=lambda v: first_seen[v])
            done = False
            for var in older:
                rule = RewriteRule(k, "Rename", var=var)
                outcome = apply(rule, p)
                if outcome.ok:
                    p = outcome.program
                    seq.append(rule)
                    changed = True
                    done = True
                    break
            if done:
                break
    return p, seq


def _appearance_order(p: Program) -> list[str]:
    return p.variables()


def _first_stmt_of_var(p: Program, var: str) -> int:
    """Index of the statement where var first appears (target or read)."""
    for i, s in enumerate(p.stmts):
        if s.target == var or var in s.reads:
            return i
    return len(p.stmts)


STAGE_NAMES = ("source", "cse", "simplify", "reuse", "rules")


def compile_pairs(p: Program, seed: int, id_prefix: str = "cc",
                  cfg: Optional[GenConfig] = None) -> list[Sample]:
    """Desk-scale compiled-code pipeline over one normalized program.

    Runs CSE, simplification, variable reuse and one randomized rewrite pass,
    then mixes pairs: adjacent stages plus (source, final), in both
    directions, each with a per-pair variable re-encoding.  Reversed pairs
    carry a sequence only when every forward step has a rule-expressible
    inverse; they stay known-equivalent either way.
    """
    cfg = cfg or GenConfig()
    rng = random.Random(child_seed(seed, "compile"))
    stages: list[Program] = [p]
    seqs: list[list[RewriteRule]] = []
    seen = {p.text()}
    for pass_fn in (cse_pass, simplify_pass, reuse_pass):
        nxt, seq = pass_fn(stages[-1])
        trace = verify(stages[-1], nxt, seq, cfg.limits, keep_trace=True)
        assert trace.proven, f"{pass_fn.__name__} produced a broken sequence"
        for inter in trace.intermediates[1:]:
            # the whole source-to-final sequence must stay a simple path,
            # or its replay would trip the search's novelty pruning
            assert inter.text() not in seen, f"{pass_fn.__name__} revisited a state"
            seen.add(inter.text())
        stages.append(nxt)
        seqs.append(seq)
    rules_result, rules_seq = apply_random_rules(stages[-1], cfg, rng, seen=seen)
    stages.append(rules_result)
    seqs.append(rules_seq)

    raw: list[tuple[str, Program, Program, Optional[list[RewriteRule]]]] = []
    seen: set[tuple[str, str]] = set()

    def emit(tag: str, a: Program, b: Program, seq: Optional[list[RewriteRule]]):
        if a.text() == b.text():
            return
        key = (a.text(), b.text())
        if key in seen:
            return
        seen.add(key)
        raw.append((tag, a, b, seq))

    for i in range(4):
        a, b, seq = stages[i], stages[i + 1], seqs[i]
        tag = f"{STAGE_NAMES[i]}-{STAGE_NAMES[i + 1]}"
        emit(tag, a, b, seq)
        emit(f"{tag}-rev", b, a, invert_sequence(a, seq))
    whole = [r for s in seqs for r in s]
    emit("source-rules", stages[0], stages[-1], whole)
    emit("source-rules-rev", stages[-1], stages[0], invert_sequence(stages[0], whole))

    samples: list[Sample] = []
    for i, (tag, a, b, seq) in enumerate(raw):
        enc_seed = child_seed(seed, "encode", i)
        a2, b2, seq2 = _encode_pair(a, b, seq, enc_seed)
        samples.append(Sample(f"{id_prefix}-{i:03d}-{tag}", a2, b2,
                              tuple(seq2) if seq2 is not None else None, COMPILED))
    return samples


def _encode_pair(a: Program, b: Program, seq: Optional[Sequence[RewriteRule]],
                 enc_seed: int):
    """Apply one random variable renaming consistently to the pair and to the
    variable operands of its rule sequence."""
    names: dict[str, None] = {}
    for v in a.variables():
        names.setdefault(v)
    if seq is not None:
        current = a
        for rule in seq:
            if rule.var is not None:
                names.setdefault(rule.var)
            out = apply(rule, current)
            assert out.ok, f"stage sequence broke: {rule_text(rule)}"
            current = out.program
            for v in current.variables():
                names.setdefault(v)
    for v in b.variables():
        names.setdefault(v)
    rng = random.Random(enc_seed)
    scalars = [n for n in names if VAR_TYPES[n] is Type.SCALAR]
    vectors = [n for n in names if VAR_TYPES[n] is Type.VECTOR]
    mapping = dict(zip(scalars, rng.sample(SCALAR_VARS, len(scalars))))
    mapping.update(zip(vectors, rng.sample(VECTOR_VARS, len(vectors))))
    a2 = rename_program(a, mapping)
    b2 = rename_program(b, mapping)
    seq2 = None
    if seq is not None:
        seq2 = [RewriteRule(r.stm, r.name, r.path,
                            mapping.get(r.var) if r.var is not None else None)
                for r in seq]
    return a2, b2, seq2


# Inversion candidates checked by replay; rules absent here never invert.
_INVERSE_NAME = {
    "Commute": "Commute",
    "SwapPrev": "SwapPrev",
    "AddZero": "NeutralOp",
    "SubZero": "NeutralOp",
    "MultOne": "NeutralOp",
    "DivOne": "NeutralOp",
    "NeutralOp": None,  # depends on the stripped form; resolved dynamically
    "DistributeLeft": "FactorRight",
    "FactorRight": "DistributeLeft",
    "DistributeRight": "FactorLeft",
    "FactorLeft": "DistributeRight",
    "AssociativeLeft": "AssociativeRight",
    "AssociativeRight": "AssociativeLeft",
    "FlipLeft": "FlipLeft",
    "FlipRight": None,
    "UseVar": "Inline",
    "Inline": "UseVar",
    "Rename": None,  # retarget back to the old name; resolved dynamically
    "NewTmp": None,  # Inline the temp then delete its statement
}


def invert_step(before: Program, rule: RewriteRule, after: Program
                ) -> Optional[list[RewriteRule]]:
    """Rule sequence mapping `after` back to `before`, or None."""
    candidates: list[list[RewriteRule]] = []
    name = rule.name
    if name == "NewTmp":
        candidates.append([
            RewriteRule(rule.stm + 1, "Inline", var=rule.var),
            RewriteRule(rule.stm, "DeleteStm"),
        ])
    elif name == "Rename":
        old = before.stmts[rule.stm - 1].target
        candidates.append([RewriteRule(rule.stm, "Rename", var=old)])
    elif name == "NeutralOp":
        for inverse in ("AddZero", "SubZero", "MultOne", "DivOne"):
            candidates.append([RewriteRule(rule.stm, inverse, rule.path)])
    elif _INVERSE_NAME.get(name):
        candidates.append([RewriteRule(rule.stm, _INVERSE_NAME[name], rule.path,
                                       rule.var)])
    for cand in candidates:
        current = after
        good = True
        for r in cand:
            out = apply(r, current)
            if not out.ok:
                good = False
                break
            current = out.program
        if good and current.text() == before.text():
            return cand
    return None


def invert_sequence(prog_a: Program, seq: Sequence[RewriteRule]
                    ) -> Optional[list[RewriteRule]]:
    """Inverse of a whole sequence via stepwise inversion, or None if any
    step does not invert."""
    states = [prog_a]
    for rule in seq:
        out = apply(rule, states[-1])
        assert out.ok
        states.append(out.program)
    inverted: list[RewriteRule] = []
    for i in range(len(seq) - 1, -1, -1):
        step = invert_step(states[i], seq[i], states[i + 1])
        if step is None:
            return None
        inverted.extend(step)
    return inverted
