"""The 23 semantics-preserving rewrite rules.

Six statement-level rules reorder, duplicate-eliminate, inline, delete,
introduce or retarget assignments; seventeen expression-level rules apply
field and linear-algebra axioms at an addressed node.  `apply` is total: it
returns an outcome carrying either the rewritten program or a failure reason,
and a successful outcome always respects the model limits.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .lang import (
    COMMUTATIVE_OPS,
    Const,
    DEFAULT_LIMITS,
    Expr,
    Limits,
    Op,
    Program,
    SCALAR_VARS,
    Stmt,
    Type,
    VAR_TYPES,
    VECTOR_VARS,
    Var,
    addressable_paths,
    check_limits,
    expr_size,
    is_path_token,
    mk_op,
    replace_at,
    resolve_path,
    type_of,
    well_formedness_errors,
)

STATEMENT_RULES = (
    "SwapPrev",
    "UseVar",
    "Inline",
    "DeleteStm",
    "NewTmp",
    "Rename",
)
EXPRESSION_RULES = (
    "AddZero",
    "SubZero",
    "MultOne",
    "DivOne",
    "NeutralOp",
    "Cancel",
    "DoubleOp",
    "AbsorbOp",
    "Commute",
    "DistributeLeft",
    "DistributeRight",
    "FactorLeft",
    "FactorRight",
    "AssociativeLeft",
    "AssociativeRight",
    "FlipLeft",
    "FlipRight",
)
RULE_NAMES = STATEMENT_RULES + EXPRESSION_RULES

# Operand signature per rule: (takes node path, takes variable).
RULE_OPERANDS: dict[str, tuple[bool, bool]] = {
    "SwapPrev": (False, False),
    "DeleteStm": (False, False),
    "UseVar": (False, True),
    "Inline": (False, True),
    "Rename": (False, True),
    "NewTmp": (True, True),
    **{name: (True, False) for name in EXPRESSION_RULES},
}


class Failure(Enum):
    ILLEGAL_PATTERN = "IllegalPattern"
    TYPE_MISMATCH = "TypeMismatch"
    DEPENDENCE_VIOLATION = "DependenceViolation"
    LIMIT_EXCEEDED = "LimitExceeded"
    BAD_ADDRESS = "BadAddress"
    VAR_CONFLICT = "VarConflict"


@dataclass(frozen=True, slots=True)
class RewriteRule:
    stm: int
    name: str
    path: Optional[str] = None
    var: Optional[str] = None


@dataclass(frozen=True, slots=True)
class ApplyOutcome:
    program: Optional[Program]
    failure: Optional[Failure] = None

    @property
    def ok(self) -> bool:
        return self.program is not None


class RuleSyntaxError(ValueError):
    pass


def rule_text(rule: RewriteRule) -> str:
    parts = [f"stm{rule.stm}", rule.name]
    if rule.path is not None:
        parts.append(rule.path)
    if rule.var is not None:
        parts.append(rule.var)
    return " ".join(parts)


def parse_rule(text: str) -> RewriteRule:
    """Parse `stm# Name [NodeID] [VarID]`; raises RuleSyntaxError."""
    parts = text.split()
    if len(parts) < 2:
        raise RuleSyntaxError(f"rule too short: {text!r}")
    m = parts[0]
    if not (m.startswith("stm") and m[3:].isdigit() and int(m[3:]) >= 1):
        raise RuleSyntaxError(f"bad statement token {m!r}")
    stm = int(m[3:])
    name = parts[1]
    if name not in RULE_OPERANDS:
        raise RuleSyntaxError(f"unknown rule name {name!r}")
    wants_path, wants_var = RULE_OPERANDS[name]
    rest = parts[2:]
    path = var = None
    if wants_path:
        if not rest or not is_path_token(rest[0]):
            raise RuleSyntaxError(f"{name} needs a node path: {text!r}")
        path = rest.pop(0)
    if wants_var:
        if not rest or rest[0] not in VAR_TYPES:
            raise RuleSyntaxError(f"{name} needs a variable: {text!r}")
        var = rest.pop(0)
    if rest:
        raise RuleSyntaxError(f"trailing tokens in rule: {text!r}")
    return RewriteRule(stm, name, path, var)


# ---------------------------------------------------------------------------
# Expression-level patterns.  Each returns the replacement expression, a
# Failure, or None when the pattern simply does not match (IllegalPattern).


def _add_zero(e: Expr):
    if type_of(e) is Type.SCALAR:
        return mk_op("+s", Const("0s"), e)
    return mk_op("+v", Const("0v"), e)


def _sub_zero(e: Expr):
    if type_of(e) is Type.SCALAR:
        return mk_op("-s", e, Const("0s"))
    return mk_op("-v", e, Const("0v"))


def _mult_one(e: Expr):
    if type_of(e) is Type.SCALAR:
        return mk_op("*s", Const("1s"), e)
    return mk_op("*sv", Const("1s"), e)


def _div_one(e: Expr):
    if type_of(e) is not Type.SCALAR:
        return Failure.TYPE_MISMATCH
    return mk_op("/s", e, Const("1s"))


def _is_const(e: Expr, token: str) -> bool:
    return isinstance(e, Const) and e.token == token


def _neutral_op(e: Expr):
    if not isinstance(e, Op):
        return None
    a = e.args
    if e.op == "+s":
        if _is_const(a[0], "0s"):
            return a[1]
        if _is_const(a[1], "0s"):
            return a[0]
    elif e.op == "+v":
        if _is_const(a[0], "0v"):
            return a[1]
        if _is_const(a[1], "0v"):
            return a[0]
    elif e.op == "-s" and _is_const(a[1], "0s"):
        return a[0]
    elif e.op == "-v" and _is_const(a[1], "0v"):
        return a[0]
    elif e.op == "*s":
        if _is_const(a[0], "1s"):
            return a[1]
        if _is_const(a[1], "1s"):
            return a[0]
    elif e.op == "*sv" and _is_const(a[0], "1s"):
        return a[1]
    elif e.op == "/s" and _is_const(a[1], "1s"):
        return a[0]
    return None


def _cancel(e: Expr):
    if not isinstance(e, Op):
        return None
    if e.op == "-s" and e.args[0] == e.args[1]:
        return Const("0s")
    if e.op == "-v" and e.args[0] == e.args[1]:
        return Const("0v")
    if e.op == "/s" and e.args[0] == e.args[1]:
        return Const("1s")
    return None


def _double_op(e: Expr):
    if not isinstance(e, Op):
        return None
    if e.op in ("ns", "nv"):
        inner = e.args[0]
        if isinstance(inner, Op) and inner.op == e.op:
            return inner.args[0]
        return None
    if e.op == "/s" and _is_const(e.args[0], "1s"):
        inner = e.args[1]
        if isinstance(inner, Op) and inner.op == "/s" and _is_const(inner.args[0], "1s"):
            return inner.args[1]
    return None


def _absorb_op(e: Expr):
    if not isinstance(e, Op):
        return None
    if e.op == "*s" and (_is_const(e.args[0], "0s") or _is_const(e.args[1], "0s")):
        return Const("0s")
    if e.op == "*sv" and (_is_const(e.args[0], "0s") or _is_const(e.args[1], "0v")):
        return Const("0v")
    return None


def _commute(e: Expr):
    if isinstance(e, Op) and e.op in COMMUTATIVE_OPS:
        return mk_op(e.op, e.args[1], e.args[0])
    return None


_SUM_OPS = {"+s": "+", "-s": "-", "+v": "+", "-v": "-"}


def _sum_op_for(sign: str, t: Type) -> str:
    return ("+" if sign == "+" else "-") + ("s" if t is Type.SCALAR else "v")


def _distribute_left(e: Expr):
    # ((a +- b) x c) -> (a x c) +- (b x c), for x in {*s, /s, *sv}
    if not isinstance(e, Op) or e.op not in ("*s", "/s", "*sv"):
        return None
    left, right = e.args
    if not isinstance(left, Op) or left.op not in ("+s", "-s"):
        return None
    a, b = left.args
    sign = _SUM_OPS[left.op]
    prod_a, prod_b = mk_op(e.op, a, right), mk_op(e.op, b, right)
    return mk_op(_sum_op_for(sign, type_of(e)), prod_a, prod_b)


def _distribute_right(e: Expr):
    # (a x (b +- c)) -> (a x b) +- (a x c), multiplication only
    if not isinstance(e, Op) or e.op not in ("*s", "*sv"):
        return None
    left, right = e.args
    want = ("+s", "-s") if e.op == "*s" else ("+v", "-v")
    if not isinstance(right, Op) or right.op not in want:
        return None
    b, c = right.args
    sign = _SUM_OPS[right.op]
    prod_b, prod_c = mk_op(e.op, left, b), mk_op(e.op, left, c)
    return mk_op(_sum_op_for(sign, type_of(e)), prod_b, prod_c)


def _factor_left(e: Expr):
    # (a x b) +- (a x c) -> a x (b +- c): common left factor, multiplication only
    if not isinstance(e, Op) or e.op not in ("+s", "-s", "+v", "-v"):
        return None
    l, r = e.args
    if not (isinstance(l, Op) and isinstance(r, Op) and l.op == r.op):
        return None
    if l.op not in ("*s", "*sv") or l.args[0] != r.args[0]:
        return None
    sign = _SUM_OPS[e.op]
    inner_t = type_of(l.args[1])
    combined = mk_op(_sum_op_for(sign, inner_t), l.args[1], r.args[1])
    return mk_op(l.op, l.args[0], combined)


def _factor_right(e: Expr):
    # (a x c) +- (b x c) -> (a +- b) x c: common right factor, x in {*s, /s, *sv}
    if not isinstance(e, Op) or e.op not in ("+s", "-s", "+v", "-v"):
        return None
    l, r = e.args
    if not (isinstance(l, Op) and isinstance(r, Op) and l.op == r.op):
        return None
    if l.op not in ("*s", "/s", "*sv") or l.args[1] != r.args[1]:
        return None
    sign = _SUM_OPS[e.op]
    inner_t = type_of(l.args[0])
    combined = mk_op(_sum_op_for(sign, inner_t), l.args[0], r.args[0])
    return mk_op(l.op, combined, l.args[1])


def _associative_left(e: Expr):
    # a x (b x c) -> (a x b) x c ; a + (b + c) -> (a + b) + c
    if not isinstance(e, Op):
        return None
    a, inner = e.args if len(e.args) == 2 else (None, None)
    if a is None or not isinstance(inner, Op):
        return None
    if e.op == "*s" and inner.op == "*s":
        return mk_op("*s", mk_op("*s", a, inner.args[0]), inner.args[1])
    if e.op == "*sv" and inner.op == "*sv":
        # a(b vec) with scalars a, b combines to (ab) vec
        return mk_op("*sv", mk_op("*s", a, inner.args[0]), inner.args[1])
    if e.op in ("+s", "+v") and inner.op == e.op:
        return mk_op(e.op, mk_op(e.op, a, inner.args[0]), inner.args[1])
    return None


def _associative_right(e: Expr):
    # (a x b) x c -> a x (b x c) ; (a x b) / c -> a x (b / c) ; sums likewise
    if not isinstance(e, Op):
        return None
    if len(e.args) != 2:
        return None
    inner, c = e.args
    if not isinstance(inner, Op):
        return None
    if e.op == "*s" and inner.op == "*s":
        return mk_op("*s", inner.args[0], mk_op("*s", inner.args[1], c))
    if e.op == "/s" and inner.op == "*s":
        return mk_op("*s", inner.args[0], mk_op("/s", inner.args[1], c))
    if e.op == "*sv" and inner.op == "*s":
        return mk_op("*sv", inner.args[0], mk_op("*sv", inner.args[1], c))
    if e.op in ("+s", "+v") and inner.op == e.op:
        return mk_op(e.op, inner.args[0], mk_op(e.op, inner.args[1], c))
    return None


def _flip_left(e: Expr):
    # -(a - b) -> (b - a)
    if not isinstance(e, Op) or e.op not in ("ns", "nv"):
        return None
    inner = e.args[0]
    want = "-s" if e.op == "ns" else "-v"
    if isinstance(inner, Op) and inner.op == want:
        return mk_op(want, inner.args[1], inner.args[0])
    return None


def _flip_right(e: Expr):
    # a / (b / c) -> a * (c / b)
    if not isinstance(e, Op) or e.op != "/s":
        return None
    inner = e.args[1]
    if isinstance(inner, Op) and inner.op == "/s":
        return mk_op("*s", e.args[0], mk_op("/s", inner.args[1], inner.args[0]))
    return None


_EXPR_PATTERNS: dict[str, Callable] = {
    "AddZero": _add_zero,
    "SubZero": _sub_zero,
    "MultOne": _mult_one,
    "DivOne": _div_one,
    "NeutralOp": _neutral_op,
    "Cancel": _cancel,
    "DoubleOp": _double_op,
    "AbsorbOp": _absorb_op,
    "Commute": _commute,
    "DistributeLeft": _distribute_left,
    "DistributeRight": _distribute_right,
    "FactorLeft": _factor_left,
    "FactorRight": _factor_right,
    "AssociativeLeft": _associative_left,
    "AssociativeRight": _associative_right,
    "FlipLeft": _flip_left,
    "FlipRight": _flip_right,
}


# ---------------------------------------------------------------------------
# Statement-level legality helpers


def _last_assign_before(p: Program, var: str, k: int) -> Optional[int]:
    """0-based index of var's most recent assignment strictly before stm k (1-based)."""
    for j in range(k - 2, -1, -1):
        if p.stmts[j].target == var:
            return j
    return None


def _definition_stable(p: Program, j: int, k: int) -> bool:
    """True iff no variable of stm j's RHS is assigned in stms j..k-1 (0-based
    j, exclusive 1-based k).  Statement j itself assigning one of those
    variables (a self-referential definition) also fails."""
    rhs_vars = p.stmts[j].reads
    for i in range(j, k - 1):
        if p.stmts[i].target in rhs_vars:
            return False
    return True


def _replace_maximal(e: Expr, pattern: Expr, replacement: Expr) -> tuple[Expr, int]:
    if e == pattern:
        return replacement, 1
    if not isinstance(e, Op):
        return e, 0
    total = 0
    args = []
    for a in e.args:
        new, n = _replace_maximal(a, pattern, replacement)
        args.append(new)
        total += n
    if total == 0:
        return e, 0
    return mk_op(e.op, *args), total


def _substitute_var(e: Expr, var: str, replacement: Expr) -> tuple[Expr, int]:
    if isinstance(e, Var):
        if e.name == var:
            return replacement, 1
        return e, 0
    if not isinstance(e, Op):
        return e, 0
    total = 0
    args = []
    for a in e.args:
        new, n = _substitute_var(a, var, replacement)
        args.append(new)
        total += n
    if total == 0:
        return e, 0
    return mk_op(e.op, *args), total


def _output_var_set(p: Program) -> frozenset[str]:
    return frozenset(s.target for s in p.stmts if s.out)


def _occurs(s: Stmt, var: str) -> bool:
    return s.target == var or var in s.reads


def _rename_legal(p: Program, k: int, var: str) -> Optional[Failure]:
    """Legality of retargeting stm k (1-based) to `var`.

    The substitution range runs from k+1 to the old target's next
    reassignment.  `var` must not occur anywhere in that range nor in stm k
    itself, must not be read later before being reassigned, must not be an
    output variable, and must not be a read-only input occurrence before
    stm k.
    """
    stmt = p.stmts[k - 1]
    old = stmt.target
    if stmt.out:
        return Failure.ILLEGAL_PATTERN
    if var == old:
        return Failure.VAR_CONFLICT
    if VAR_TYPES[var] is not VAR_TYPES[old]:
        return Failure.TYPE_MISMATCH
    if var in _output_var_set(p):
        return Failure.VAR_CONFLICT
    for j in range(k - 1):
        if p.stmts[j].target == var:
            break
        if var in p.stmts[j].reads:
            # an input occurrence: assigning var at k would shadow a
            # read-only input variable
            return Failure.VAR_CONFLICT
    end = len(p.stmts)
    for j in range(k, len(p.stmts)):
        if p.stmts[j].target == old:
            end = j
            break
    for j in range(k - 1, end):
        if _occurs(p.stmts[j], var):
            return Failure.VAR_CONFLICT
    for j in range(end, len(p.stmts)):
        if var in p.stmts[j].reads:
            return Failure.VAR_CONFLICT
        if p.stmts[j].target == var:
            break
    return None


# ---------------------------------------------------------------------------
# apply


def apply(rule: RewriteRule, p: Program, limits: Limits = DEFAULT_LIMITS) -> ApplyOutcome:
    """Apply one rewrite rule.  Returns the rewritten program or a failure
    reason; a success differs from `p` by exactly the rule's effect and stays
    within `limits`."""
    wants_path, wants_var = RULE_OPERANDS[rule.name]
    if (rule.path is not None) != wants_path or (rule.var is not None) != wants_var:
        raise ValueError(f"malformed rule operands: {rule_text(rule)}")
    k = rule.stm
    if not 1 <= k <= len(p.stmts):
        return ApplyOutcome(None, Failure.BAD_ADDRESS)

    if rule.name in _EXPR_PATTERNS:
        outcome = _apply_expr(rule, p)
    else:
        outcome = _APPLY_STMT[rule.name](rule, p)
    if not outcome.ok:
        return outcome

    ok, _ = check_limits(outcome.program, limits)
    if not ok:
        return ApplyOutcome(None, Failure.LIMIT_EXCEEDED)
    assert not well_formedness_errors(outcome.program), (
        f"rule {rule_text(rule)} broke well-formedness"
    )
    return outcome


def _with_stmt(p: Program, idx: int, stmt: Stmt) -> Program:
    stmts = list(p.stmts)
    stmts[idx] = stmt
    return Program(tuple(stmts))


def _apply_expr(rule: RewriteRule, p: Program) -> ApplyOutcome:
    stmt = p.stmts[rule.stm - 1]
    node = resolve_path(stmt.rhs, rule.path)
    if node is None:
        return ApplyOutcome(None, Failure.BAD_ADDRESS)
    result = _EXPR_PATTERNS[rule.name](node)
    if result is None:
        return ApplyOutcome(None, Failure.ILLEGAL_PATTERN)
    if isinstance(result, Failure):
        return ApplyOutcome(None, result)
    new_rhs = replace_at(stmt.rhs, rule.path, result)
    return ApplyOutcome(_with_stmt(p, rule.stm - 1, Stmt(stmt.target, stmt.out, new_rhs)))


def _apply_swap_prev(rule: RewriteRule, p: Program) -> ApplyOutcome:
    k = rule.stm
    if k < 2:
        return ApplyOutcome(None, Failure.ILLEGAL_PATTERN)
    a, b = p.stmts[k - 2], p.stmts[k - 1]
    if a.target == b.target or a.target in b.reads or b.target in a.reads:
        return ApplyOutcome(None, Failure.DEPENDENCE_VIOLATION)
    stmts = list(p.stmts)
    stmts[k - 2], stmts[k - 1] = b, a
    return ApplyOutcome(Program(tuple(stmts)))


def _apply_use_var(rule: RewriteRule, p: Program) -> ApplyOutcome:
    k, var = rule.stm, rule.var
    j = _last_assign_before(p, var, k)
    if j is None:
        return ApplyOutcome(None, Failure.ILLEGAL_PATTERN)
    if p.stmts[j].out:
        # reading an output after its final assignment is not allowed
        return ApplyOutcome(None, Failure.VAR_CONFLICT)
    if not _definition_stable(p, j, k):
        return ApplyOutcome(None, Failure.DEPENDENCE_VIOLATION)
    stmt = p.stmts[k - 1]
    new_rhs, n = _replace_maximal(stmt.rhs, p.stmts[j].rhs, Var(var))
    if n == 0:
        return ApplyOutcome(None, Failure.ILLEGAL_PATTERN)
    return ApplyOutcome(_with_stmt(p, k - 1, Stmt(stmt.target, stmt.out, new_rhs)))


def _apply_inline(rule: RewriteRule, p: Program) -> ApplyOutcome:
    k, var = rule.stm, rule.var
    stmt = p.stmts[k - 1]
    if var not in stmt.reads:
        return ApplyOutcome(None, Failure.ILLEGAL_PATTERN)
    j = _last_assign_before(p, var, k)
    if j is None:
        return ApplyOutcome(None, Failure.ILLEGAL_PATTERN)
    if not _definition_stable(p, j, k):
        return ApplyOutcome(None, Failure.DEPENDENCE_VIOLATION)
    new_rhs, n = _substitute_var(stmt.rhs, var, p.stmts[j].rhs)
    assert n > 0
    return ApplyOutcome(_with_stmt(p, k - 1, Stmt(stmt.target, stmt.out, new_rhs)))


def _apply_delete(rule: RewriteRule, p: Program) -> ApplyOutcome:
    k = rule.stm
    if len(p.stmts) == 1:
        return ApplyOutcome(None, Failure.ILLEGAL_PATTERN)
    target = p.stmts[k - 1].target
    if target in _output_var_set(p):
        return ApplyOutcome(None, Failure.ILLEGAL_PATTERN)
    for j in range(k, len(p.stmts)):
        if target in p.stmts[j].reads:
            return ApplyOutcome(None, Failure.DEPENDENCE_VIOLATION)
    stmts = list(p.stmts)
    del stmts[k - 1]
    return ApplyOutcome(Program(tuple(stmts)))


def _apply_new_tmp(rule: RewriteRule, p: Program) -> ApplyOutcome:
    k, var = rule.stm, rule.var
    stmt = p.stmts[k - 1]
    node = resolve_path(stmt.rhs, rule.path)
    if node is None:
        return ApplyOutcome(None, Failure.BAD_ADDRESS)
    for s in p.stmts:
        if _occurs(s, var):
            return ApplyOutcome(None, Failure.VAR_CONFLICT)
    if VAR_TYPES[var] is not type_of(node):
        return ApplyOutcome(None, Failure.TYPE_MISMATCH)
    new_rhs = replace_at(stmt.rhs, rule.path, Var(var))
    stmts = list(p.stmts)
    stmts[k - 1] = Stmt(stmt.target, stmt.out, new_rhs)
    stmts.insert(k - 1, Stmt(var, False, node))
    return ApplyOutcome(Program(tuple(stmts)))


def _apply_rename(rule: RewriteRule, p: Program) -> ApplyOutcome:
    k, var = rule.stm, rule.var
    fail = _rename_legal(p, k, var)
    if fail is not None:
        return ApplyOutcome(None, fail)
    old = p.stmts[k - 1].target
    stmts = list(p.stmts)
    stmts[k - 1] = Stmt(var, False, stmts[k - 1].rhs)
    for j in range(k, len(p.stmts)):
        s = stmts[j]
        if old in s.reads:
            # a reassignment of old reads its previous value, so its RHS
            # is still substituted before the range ends
            new_rhs, _ = _substitute_var(s.rhs, old, Var(var))
            stmts[j] = Stmt(s.target, s.out, new_rhs)
        if p.stmts[j].target == old:
            break
    return ApplyOutcome(Program(tuple(stmts)))


_APPLY_STMT: dict[str, Callable[[RewriteRule, Program], ApplyOutcome]] = {
    "SwapPrev": _apply_swap_prev,
    "UseVar": _apply_use_var,
    "Inline": _apply_inline,
    "DeleteStm": _apply_delete,
    "NewTmp": _apply_new_tmp,
    "Rename": _apply_rename,
}


# ---------------------------------------------------------------------------
# Enumeration


def _unused_vars(p: Program, t: Type) -> list[str]:
    used = set(p.variables())
    pool = SCALAR_VARS if t is Type.SCALAR else VECTOR_VARS
    return [v for v in pool if v not in used]


def enumerate_legal(p: Program, limits: Limits = DEFAULT_LIMITS,
                    var_pool: str = "full",
                    goal: Optional[Program] = None) -> list[RewriteRule]:
    """Every rule r with apply(r, p) successful, over all statements,
    addressable nodes and candidate variables, in deterministic
    (statement, rule name, path, var) order.

    var_pool="goal" restricts NewTmp and Rename candidates to variables of p
    and the goal program plus one fresh variable per type.  Unused variables
    are interchangeable, so this keeps search complete while pruning
    renaming-equivalent successors.
    """
    candidates: list[RewriteRule] = []
    n = len(p.stmts)

    if var_pool == "goal":
        keep = set(p.variables())
        if goal is not None:
            keep.update(goal.variables())
        fresh_pool: list[str] = []
        for t in (Type.SCALAR, Type.VECTOR):
            unused = [v for v in _unused_vars(p, t) if v not in keep]
            fresh_pool.extend(unused[:1])

        def new_tmp_vars(t: Type) -> list[str]:
            out = [v for v in _unused_vars(p, t) if v in keep]
            out.extend(v for v in fresh_pool if VAR_TYPES[v] is t)
            return out

        def rename_vars(t: Type) -> list[str]:
            pool = SCALAR_VARS if t is Type.SCALAR else VECTOR_VARS
            out = [v for v in pool if v in keep]
            out.extend(v for v in fresh_pool if VAR_TYPES[v] is t)
            return out
    else:
        def new_tmp_vars(t: Type) -> list[str]:
            return _unused_vars(p, t)

        def rename_vars(t: Type) -> list[str]:
            return list(SCALAR_VARS if t is Type.SCALAR else VECTOR_VARS)

    node_total = p.node_count()
    var_counts = {Type.SCALAR: 0, Type.VECTOR: 0}
    program_vars = set(p.variables())
    for v in program_vars:
        var_counts[VAR_TYPES[v]] += 1
    var_room = {
        Type.SCALAR: var_counts[Type.SCALAR] < limits.max_scalar_vars,
        Type.VECTOR: var_counts[Type.VECTOR] < limits.max_vector_vars,
    }
    tmp_pool = {t: new_tmp_vars(t) for t in (Type.SCALAR, Type.VECTOR)}

    for k in range(1, n + 1):
        stmt = p.stmts[k - 1]
        paths = addressable_paths(stmt.rhs)
        for name in EXPRESSION_RULES:
            pattern = _EXPR_PATTERNS[name]
            for path in paths:
                node = resolve_path(stmt.rhs, path)
                result = pattern(node)
                if result is None or isinstance(result, Failure):
                    continue
                rule = RewriteRule(k, name, path)
                if apply(rule, p, limits).ok:
                    candidates.append(rule)

        if k >= 2 and _apply_swap_prev(RewriteRule(k, "SwapPrev"), p).ok:
            candidates.append(RewriteRule(k, "SwapPrev"))
        if _apply_delete(RewriteRule(k, "DeleteStm"), p).ok:
            candidates.append(RewriteRule(k, "DeleteStm"))
        assigned_before = {p.stmts[j].target for j in range(k - 1)}
        for var in sorted(assigned_before):
            rule = RewriteRule(k, "UseVar", var=var)
            if _apply_use_var(rule, p).ok:
                candidates.append(rule)
        for var in sorted(stmt.reads & assigned_before):
            rule = RewriteRule(k, "Inline", var=var)
            if apply(RewriteRule(k, "Inline", var=var), p, limits).ok:
                candidates.append(rule)
        # NewTmp legality is var-independent for unused candidate variables:
        # only the limit budget decides, so check it once per (stmt, path)
        if n + 1 <= limits.max_statements:
            for path in paths:
                node = resolve_path(stmt.rhs, path)
                t = type_of(node)
                if not var_room[t]:
                    continue
                if node_total + expr_size(node) > limits.max_nodes:
                    continue
                for var in tmp_pool[t]:
                    candidates.append(RewriteRule(k, "NewTmp", path, var))
        if not stmt.out:
            t = VAR_TYPES[stmt.target]
            for var in rename_vars(t):
                if var not in program_vars and not var_room[t]:
                    continue
                if _rename_legal(p, k, var) is None:
                    candidates.append(RewriteRule(k, "Rename", var=var))

    candidates.sort(key=lambda r: (r.stm, r.name, r.path or "", r.var or ""))
    return candidates
