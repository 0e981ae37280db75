"""Core language: typed straight-line programs over scalars and vectors.

Programs are sequences of assignment statements in a prefix token encoding,
one expression per statement, with a closed token vocabulary.  Outputs are
flagged with the `===` assignment marker; every other statement uses `=`.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union


class Type(Enum):
    SCALAR = "s"
    VECTOR = "v"


S = Type.SCALAR
V = Type.VECTOR

# Variable vocabulary: 30 scalar and 15 vector identifiers.
SCALAR_VARS = tuple(f"s{i:02d}" for i in range(1, 31))
VECTOR_VARS = tuple(f"v{i:02d}" for i in range(1, 16))
VAR_TYPES: dict[str, Type] = {**{n: S for n in SCALAR_VARS}, **{n: V for n in VECTOR_VARS}}

CONST_TYPES: dict[str, Type] = {"0s": S, "1s": S, "0v": V}

# Operator and opaque-function signatures: token -> (argument types, result type).
OP_SIGNATURES: dict[str, tuple[tuple[Type, ...], Type]] = {
    "+s": ((S, S), S),
    "-s": ((S, S), S),
    "*s": ((S, S), S),
    "/s": ((S, S), S),
    "ns": ((S,), S),
    "+v": ((V, V), V),
    "-v": ((V, V), V),
    "nv": ((V,), V),
    "*sv": ((S, V), V),
}
for _i in range(1, 6):
    OP_SIGNATURES[f"f{_i}s"] = ((S, S), S)
    OP_SIGNATURES[f"f{_i}v"] = ((S, S), V)
for _i in range(1, 4):
    OP_SIGNATURES[f"g{_i}s"] = ((V,), S)
    OP_SIGNATURES[f"g{_i}v"] = ((V, V), V)

FUNC_TOKENS = frozenset(t for t in OP_SIGNATURES if t[0] in "fg")

COMMUTATIVE_OPS = frozenset({"+s", "*s", "+v"})


class ProgramError(ValueError):
    """Raised for malformed program text: syntax, vocabulary, types, limits, roles."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Const:
    token: str


@dataclass(frozen=True, slots=True)
class Op:
    op: str
    args: tuple["Expr", ...]
    size: int = field(compare=False)
    height: int = field(compare=False)


Expr = Union[Var, Const, Op]


def mk_op(op: str, *args: Expr) -> Op:
    size = 1 + sum(expr_size(a) for a in args)
    height = 1 + max(expr_height(a) for a in args)
    return Op(op, tuple(args), size, height)


def expr_size(e: Expr) -> int:
    return e.size if isinstance(e, Op) else 1


def expr_height(e: Expr) -> int:
    return e.height if isinstance(e, Op) else 1


def type_of(e: Expr) -> Type:
    if isinstance(e, Var):
        return VAR_TYPES[e.name]
    if isinstance(e, Const):
        return CONST_TYPES[e.token]
    return OP_SIGNATURES[e.op][1]


def expr_vars(e: Expr) -> Iterator[str]:
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            yield n.name
        elif isinstance(n, Op):
            stack.extend(n.args)


@dataclass(frozen=True, slots=True)
class Stmt:
    target: str
    out: bool
    rhs: Expr
    reads: frozenset[str] = field(compare=False, default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.reads is None:
            object.__setattr__(self, "reads", frozenset(expr_vars(self.rhs)))


@dataclass(frozen=True, slots=True)
class Program:
    stmts: tuple[Stmt, ...]
    _text: Optional[str] = field(compare=False, repr=False, default=None)

    def text(self) -> str:
        if self._text is None:
            object.__setattr__(self, "_text", print_prefix(self))
        return self._text

    def __len__(self) -> int:
        return len(self.stmts)

    def node_count(self) -> int:
        return sum(expr_size(s.rhs) for s in self.stmts)

    def max_depth(self) -> int:
        return max((expr_height(s.rhs) for s in self.stmts), default=0)

    def outputs(self) -> list[str]:
        seen: list[str] = []
        for s in self.stmts:
            if s.out and s.target not in seen:
                seen.append(s.target)
        return seen

    def variables(self) -> list[str]:
        """Distinct variables in first-appearance order (targets and reads)."""
        seen: dict[str, None] = {}
        for s in self.stmts:
            for name in _stmt_appearance_order(s):
                seen.setdefault(name, None)
        return list(seen)


def _stmt_appearance_order(s: Stmt) -> list[str]:
    names = [s.target]
    stack = [s.rhs]
    order: list[Expr] = []
    while stack:
        n = stack.pop()
        order.append(n)
        if isinstance(n, Op):
            stack.extend(reversed(n.args))
    names.extend(n.name for n in order if isinstance(n, Var))
    return names


class Role(Enum):
    INPUT = "input"
    TEMP = "temp"
    OUTPUT = "output"


def roles(p: Program) -> dict[str, Role]:
    """Role per variable: inputs are read before any assignment, outputs carry `===`."""
    result: dict[str, Role] = {}
    assigned: set[str] = set()
    for s in p.stmts:
        for name in s.reads:
            if name not in assigned and name not in result:
                result[name] = Role.INPUT
        assigned.add(s.target)
    for s in p.stmts:
        if s.out:
            result[s.target] = Role.OUTPUT
    for s in p.stmts:
        result.setdefault(s.target, Role.TEMP)
    return result


def input_vars(p: Program) -> list[str]:
    rs = roles(p)
    return [v for v in p.variables() if rs[v] is Role.INPUT]


@dataclass(frozen=True, slots=True)
class Limits:
    max_statements: int = 20
    max_nodes: int = 100
    max_depth: int = 6
    max_outputs: int = 2
    max_scalar_vars: int = 30
    max_vector_vars: int = 15


DEFAULT_LIMITS = Limits()
# Generalization profile used by the out-of-distribution experiments: one more
# output and node counts past the training range.
GENERALIZATION_LIMITS = Limits(max_outputs=3, max_nodes=120)
UNBOUNDED_LIMITS = Limits(
    max_statements=10**9, max_nodes=10**9, max_depth=10**9, max_outputs=10**9
)


def check_limits(p: Program, limits: Limits = DEFAULT_LIMITS) -> tuple[bool, list[str]]:
    """True iff statement count, node count, variable counts, expression depth
    and output count all fall within the given limits.  Returns the violation
    list alongside the flag."""
    violations: list[str] = []
    if len(p.stmts) > limits.max_statements:
        violations.append(f"statements {len(p.stmts)} > {limits.max_statements}")
    nodes = p.node_count()
    if nodes > limits.max_nodes:
        violations.append(f"nodes {nodes} > {limits.max_nodes}")
    depth = p.max_depth()
    if depth > limits.max_depth:
        violations.append(f"depth {depth} > {limits.max_depth}")
    outs = p.outputs()
    if len(outs) > limits.max_outputs:
        violations.append(f"outputs {len(outs)} > {limits.max_outputs}")
    scalars = sum(1 for v in p.variables() if VAR_TYPES[v] is S)
    vectors = sum(1 for v in p.variables() if VAR_TYPES[v] is V)
    if scalars > limits.max_scalar_vars:
        violations.append(f"scalar vars {scalars} > {limits.max_scalar_vars}")
    if vectors > limits.max_vector_vars:
        violations.append(f"vector vars {vectors} > {limits.max_vector_vars}")
    return (not violations, violations)


def well_formedness_errors(p: Program) -> list[str]:
    """Typing and role coherence checks beyond raw syntax.

    A variable that is ever assigned must not be read before its first
    assignment.  An output variable has exactly one `===` statement, which is
    its final assignment, and is never read afterward.
    """
    errors: list[str] = []
    for i, s in enumerate(p.stmts, start=1):
        err = _type_check(s.rhs)
        if err:
            errors.append(f"stm{i}: {err}")
        elif type_of(s.rhs) is not VAR_TYPES[s.target]:
            errors.append(f"stm{i}: target {s.target} type mismatch with expression")

    first_assign: dict[str, int] = {}
    for i, s in enumerate(p.stmts):
        first_assign.setdefault(s.target, i)
    for i, s in enumerate(p.stmts):
        for name in s.reads:
            # a read in stm i sees values from before the assignment at stm i
            if name in first_assign and first_assign[name] >= i:
                errors.append(f"stm{i + 1}: {name} read before its first assignment")

    out_stmts: dict[str, list[int]] = {}
    for i, s in enumerate(p.stmts):
        if s.out:
            out_stmts.setdefault(s.target, []).append(i)
    for name, marks in out_stmts.items():
        if len(marks) > 1:
            errors.append(f"output {name} assigned with === more than once")
            continue
        k = marks[0]
        for j in range(k + 1, len(p.stmts)):
            if p.stmts[j].target == name:
                errors.append(f"output {name} reassigned after its === at stm{k + 1}")
            if name in p.stmts[j].reads:
                errors.append(f"output {name} read after its final assignment at stm{k + 1}")
    return errors


def _type_check(e: Expr) -> Optional[str]:
    if isinstance(e, (Var, Const)):
        return None
    arg_types, _ = OP_SIGNATURES[e.op]
    if len(e.args) != len(arg_types):
        return f"{e.op} expects {len(arg_types)} operands, got {len(e.args)}"
    for want, a in zip(arg_types, e.args):
        err = _type_check(a)
        if err:
            return err
        if type_of(a) is not want:
            return f"{e.op} operand type mismatch"
    return None


def validate_program(p: Program, limits: Limits = DEFAULT_LIMITS) -> list[str]:
    ok, violations = check_limits(p, limits)
    return violations + well_formedness_errors(p)


# ---------------------------------------------------------------------------
# Prefix token encoding


def parse_prefix(text: str, limits: Limits = DEFAULT_LIMITS) -> Program:
    """Parse the prefix statement encoding into a validated Program."""
    tokens = text.split()
    pos = 0
    stmts: list[Stmt] = []

    def peek() -> Optional[str]:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ProgramError("syntax", "unexpected end of input")
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_expr() -> Expr:
        tok = take()
        if tok == "(":
            op = take()
            if op not in OP_SIGNATURES:
                raise ProgramError("unknown-token", f"{op!r} is not an operator")
            arity = len(OP_SIGNATURES[op][0])
            args = tuple(parse_expr() for _ in range(arity))
            closer = take()
            if closer != ")":
                raise ProgramError("syntax", f"expected ')' after {op}, got {closer!r}")
            return Op(op, args, 1 + sum(expr_size(a) for a in args),
                      1 + max(expr_height(a) for a in args))
        if tok in VAR_TYPES:
            return Var(tok)
        if tok in CONST_TYPES:
            return Const(tok)
        raise ProgramError("unknown-token", f"{tok!r} is not a variable, constant or '('")

    while peek() is not None:
        target = take()
        if target not in VAR_TYPES:
            raise ProgramError("unknown-token", f"{target!r} is not an assignable variable")
        marker = take()
        if marker not in ("=", "==="):
            raise ProgramError("syntax", f"expected '=' or '===', got {marker!r}")
        rhs = parse_expr()
        if take() != ";":
            raise ProgramError("syntax", "missing ';' terminator")
        stmts.append(Stmt(target, marker == "===", rhs))

    if not stmts:
        raise ProgramError("syntax", "empty program")
    program = Program(tuple(stmts))
    ok, violations = check_limits(program, limits)
    if not ok:
        raise ProgramError("limit", "; ".join(violations))
    problems = well_formedness_errors(program)
    if problems:
        raise ProgramError("invalid", "; ".join(problems))
    return program


def expr_tokens(e: Expr, out: list[str]) -> None:
    if isinstance(e, Var):
        out.append(e.name)
    elif isinstance(e, Const):
        out.append(e.token)
    else:
        out.append("(")
        out.append(e.op)
        for a in e.args:
            expr_tokens(a, out)
        out.append(")")


def print_prefix(p: Program) -> str:
    """Canonical single-space token text; inverse of parse_prefix."""
    out: list[str] = []
    for s in p.stmts:
        out.append(s.target)
        out.append("===" if s.out else "=")
        expr_tokens(s.rhs, out)
        out.append(";")
    return " ".join(out)


# ---------------------------------------------------------------------------
# Node paths

# A node path addresses an expression node in a statement's RHS: `N` is the
# root, each further letter descends left or right.  Paths carry at most four
# letters, so depth-6 leaves exist but cannot be addressed.
MAX_PATH_LETTERS = 4

_PATH_RE = re.compile(r"N[lr]{0,4}$")


def is_path_token(tok: str) -> bool:
    return _PATH_RE.match(tok) is not None


def resolve_path(e: Expr, path: str) -> Optional[Expr]:
    """Node at `path` under root `e`, or None if the path does not resolve."""
    if not is_path_token(path):
        return None
    node = e
    for letter in path[1:]:
        if not isinstance(node, Op):
            return None
        idx = 0 if letter == "l" else 1
        if idx >= len(node.args):
            return None
        node = node.args[idx]
    return node


def replace_at(e: Expr, path: str, new: Expr) -> Expr:
    """Copy of `e` with the node at `path` replaced.  Path must resolve."""
    if path == "N":
        return new
    letter = path[1]
    idx = 0 if letter == "l" else 1
    assert isinstance(e, Op) and idx < len(e.args)
    args = list(e.args)
    args[idx] = replace_at(e.args[idx], "N" + path[2:], new)
    return mk_op(e.op, *args)


def addressable_paths(e: Expr) -> list[str]:
    """All node paths of `e` in pre-order, at most N plus four letters."""
    found: list[str] = []

    def walk(node: Expr, path: str) -> None:
        found.append(path)
        if len(path) - 1 < MAX_PATH_LETTERS and isinstance(node, Op):
            walk(node.args[0], path + "l")
            if len(node.args) > 1:
                walk(node.args[1], path + "r")

    walk(e, "N")
    return found


# ---------------------------------------------------------------------------
# Normalized infix source (the compiled-code mini-language)

_NORM_TOKEN_RE = re.compile(
    r"\s*(?:(?P<name>[ito]\d+)|(?P<func>[fg]\d+[sv])|(?P<num>\d+)|(?P<punct>[()+\-*/,;=]))"
)


def parse_normalized_source(text: str, limits: Limits = DEFAULT_LIMITS) -> Program:
    """Parse normalized infix code (`i*` inputs, `t*` temps, `o*` outputs) and
    map it onto the prefix language with variables renamed to s##/v## tokens in
    first-appearance order.  Output variables are flagged with `===`.
    """
    tokens = _tokenize_normalized(text)
    raw_stmts = _parse_normalized_stmts(tokens)
    var_types = _infer_normalized_types(raw_stmts)
    return _lower_normalized(raw_stmts, var_types, limits)


def _tokenize_normalized(text: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _NORM_TOKEN_RE.match(text, pos)
        if not m or m.start() != pos:
            # tolerate nothing: normalized snippets use a tiny grammar
            raise ProgramError("syntax", f"bad normalized source near {text[pos:pos + 12]!r}")
        tokens.append(m.group(0).strip())
        pos = m.end()
    return tokens


# Untyped infix AST nodes: ("var", name) | ("num", int) | ("neg", a)
# | ("bin", op, a, b) | ("call", func, args)


def _parse_normalized_stmts(tokens: list[str]):
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expect: Optional[str] = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ProgramError("syntax", "unexpected end of normalized source")
        tok = tokens[pos]
        if expect is not None and tok != expect:
            raise ProgramError("syntax", f"expected {expect!r}, got {tok!r}")
        pos += 1
        return tok

    def parse_primary():
        tok = take()
        if tok == "(":
            node = parse_additive()
            take(")")
            return node
        if tok == "-":
            return ("neg", parse_primary())
        if re.fullmatch(r"[ito]\d+", tok):
            return ("var", tok)
        if re.fullmatch(r"[fg]\d+[sv]", tok):
            take("(")
            args = [parse_additive()]
            while peek() == ",":
                take(",")
                args.append(parse_additive())
            take(")")
            if tok not in OP_SIGNATURES:
                raise ProgramError("unknown-token", f"unknown function {tok!r}")
            if len(args) != len(OP_SIGNATURES[tok][0]):
                raise ProgramError("type", f"{tok} arity mismatch")
            return ("call", tok, args)
        if tok.isdigit():
            if tok not in ("0", "1"):
                raise ProgramError("unknown-token", f"unsupported constant {tok!r}")
            return ("num", int(tok))
        raise ProgramError("syntax", f"unexpected token {tok!r}")

    def parse_mult():
        node = parse_primary()
        while peek() in ("*", "/"):
            op = take()
            node = ("bin", op, node, parse_primary())
        return node

    def parse_additive():
        node = parse_mult()
        while peek() in ("+", "-"):
            op = take()
            node = ("bin", op, node, parse_mult())
        return node

    stmts = []
    while peek() is not None:
        target = take()
        if not re.fullmatch(r"[to]\d+", target):
            raise ProgramError("syntax", f"cannot assign to {target!r}")
        take("=")
        rhs = parse_additive()
        take(";")
        stmts.append((target, rhs))
    if not stmts:
        raise ProgramError("syntax", "empty normalized source")
    return stmts


def _infer_normalized_types(stmts) -> dict[str, Type]:
    """Two-type inference: propagate known types to a fixpoint, then default
    any still-unknown variable to scalar."""
    types: dict[str, Optional[Type]] = {}

    def seed(node) -> None:
        kind = node[0]
        if kind == "var":
            types.setdefault(node[1], None)
        elif kind == "neg":
            seed(node[1])
        elif kind == "call":
            for a in node[2]:
                seed(a)
        elif kind == "bin":
            seed(node[2])
            seed(node[3])

    for target, rhs in stmts:
        types.setdefault(target, None)
        seed(rhs)

    def note(name: str, t: Optional[Type]) -> bool:
        if t is None:
            types.setdefault(name, None)
            return False
        prev = types.get(name)
        if prev is None:
            types[name] = t
            return True
        if prev is not t:
            raise ProgramError("type", f"{name} used as both scalar and vector")
        return False

    def infer(node) -> Optional[Type]:
        kind = node[0]
        if kind == "var":
            types.setdefault(node[1], None)
            return types[node[1]]
        if kind == "num":
            return None
        if kind == "neg":
            return infer(node[1])
        if kind == "call":
            sig = OP_SIGNATURES[node[1]]
            for want, a in zip(sig[0], node[2]):
                force(a, want)
            return sig[1]
        _, op, a, b = node
        ta, tb = infer(a), infer(b)
        if op == "/":
            force(a, S)
            force(b, S)
            return S
        if op == "*":
            if ta is V or tb is V:
                return V
            if ta is S and tb is S:
                return S
            return None
        # + or -: both sides share one type
        if ta is not None:
            force(b, ta)
            return ta
        if tb is not None:
            force(a, tb)
            return tb
        return None

    def force(node, want: Type) -> None:
        kind = node[0]
        if kind == "var":
            note(node[1], want)
        elif kind == "num":
            if want is V and node[1] != 0:
                raise ProgramError("type", "only 0 exists as a vector constant")
        elif kind == "neg":
            force(node[1], want)
        elif kind == "call":
            if OP_SIGNATURES[node[1]][1] is not want:
                raise ProgramError("type", f"{node[1]} result type mismatch")
        else:
            _, op, a, b = node
            if op == "/" and want is V:
                raise ProgramError("type", "no vector division")
            if op == "*" and want is V:
                return  # *sv operand split resolved later
            if op in "+-":
                force(a, want)
                force(b, want)

    for _ in range(len(stmts) * 2 + 2):
        changed = False
        before = dict(types)
        for target, rhs in stmts:
            t = infer(rhs)
            if t is not None:
                changed |= note(target, t)
        if not changed and types == before:
            break
    for name, t in types.items():
        if t is None:
            types[name] = S
    return types  # type: ignore[return-value]


def _lower_normalized(stmts, var_types: dict[str, Type], limits: Limits) -> Program:
    rename: dict[str, str] = {}
    next_s = iter(SCALAR_VARS)
    next_v = iter(VECTOR_VARS)

    def mapped(name: str) -> str:
        if name not in rename:
            try:
                rename[name] = next(next_s if var_types[name] is S else next_v)
            except StopIteration:
                raise ProgramError("limit", "variable vocabulary exhausted")
        return rename[name]

    def lower(node) -> Expr:
        kind = node[0]
        if kind == "var":
            return Var(mapped(node[1]))
        if kind == "num":
            return Const("1s" if node[1] == 1 else "0s")
        if kind == "neg":
            child = lower(node[1])
            return mk_op("ns" if type_of(child) is S else "nv", child)
        if kind == "call":
            return mk_op(node[1], *[lower(a) for a in node[2]])
        _, op, a, b = node
        left, right = lower(a), lower(b)
        tl, tr = type_of(left), type_of(right)
        if op == "/":
            return mk_op("/s", left, right)
        if op == "*":
            if tl is S and tr is S:
                return mk_op("*s", left, right)
            if tl is S and tr is V:
                return mk_op("*sv", left, right)
            if tl is V and tr is S:
                # scalar-by-vector multiply keeps the scalar on the left
                return mk_op("*sv", right, left)
            raise ProgramError("type", "cannot multiply two vectors")
        if tl is not tr:
            # a 0 literal lowered as scalar against a vector operand
            if isinstance(left, Const) and left.token == "0s" and tr is V:
                left, tl = Const("0v"), V
            elif isinstance(right, Const) and right.token == "0s" and tl is V:
                right, tr = Const("0v"), V
            else:
                raise ProgramError("type", f"{op} operand types differ")
        return mk_op(op + ("s" if tl is S else "v"), left, right)

    assigned: set[str] = set()
    out: list[Stmt] = []
    for target, rhs in stmts:
        if target.startswith("i"):
            raise ProgramError("role", f"input {target} must not be assigned")
        lowered = lower(rhs)
        name = mapped(target)
        is_out = target.startswith("o")
        if is_out and target in assigned:
            raise ProgramError("role", f"output {target} assigned twice")
        assigned.add(target)
        out.append(Stmt(name, is_out, lowered))
    program = Program(tuple(out))
    problems = validate_program(program, limits)
    if problems:
        raise ProgramError("invalid", "; ".join(problems))
    return program


# ---------------------------------------------------------------------------
# Variable renaming


def encode_rename(p: Program, seed: int) -> Program:
    """Seeded bijective renaming of the program's variables onto random s##/v##
    tokens.  Deterministic per seed; roles and semantics are preserved."""
    rng = random.Random(seed)
    names = p.variables()
    scalars = [n for n in names if VAR_TYPES[n] is S]
    vectors = [n for n in names if VAR_TYPES[n] is V]
    mapping = dict(zip(scalars, rng.sample(SCALAR_VARS, len(scalars))))
    mapping.update(zip(vectors, rng.sample(VECTOR_VARS, len(vectors))))
    return rename_program(p, mapping)


def rename_program(p: Program, mapping: dict[str, str]) -> Program:
    def sub(e: Expr) -> Expr:
        if isinstance(e, Var):
            return Var(mapping.get(e.name, e.name))
        if isinstance(e, Op):
            return Op(e.op, tuple(sub(a) for a in e.args), e.size, e.height)
        return e

    return Program(tuple(Stmt(mapping.get(s.target, s.target), s.out, sub(s.rhs))
                         for s in p.stmts))
