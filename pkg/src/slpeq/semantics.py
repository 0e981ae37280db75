"""Reference semantics over the prime field GF(2^61 - 1).

Scalars are field elements; vectors are fixed-length tuples of field elements.
Opaque function tokens evaluate through a keyed hash so that distinct
functions (and seeds) give independent but reproducible behaviour.  Division
by zero raises; equivalence checking resamples the environment when that
happens, treating the field axioms as total the way the rewrite rules do.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union

from .lang import Const, Expr, Program, Type, Var, VAR_TYPES, input_vars, type_of

PRIME = (1 << 61) - 1
VECTOR_LEN = 4

Value = Union[int, tuple[int, ...]]


class DivisionByZero(ArithmeticError):
    pass


@dataclass(frozen=True)
class EvalEnv:
    values: Mapping[str, Value]
    prime: int = PRIME
    vector_len: int = VECTOR_LEN
    func_seed: int = 0


def random_env(p: Program, rng: random.Random, prime: int = PRIME,
               vector_len: int = VECTOR_LEN, func_seed: int | None = None) -> EvalEnv:
    """Environment with uniform random values for every input variable."""
    values: dict[str, Value] = {}
    for name in input_vars(p):
        if VAR_TYPES[name] is Type.SCALAR:
            values[name] = rng.randrange(prime)
        else:
            values[name] = tuple(rng.randrange(prime) for _ in range(vector_len))
    if func_seed is None:
        func_seed = rng.randrange(1 << 62)
    return EvalEnv(values, prime, vector_len, func_seed)


def _opaque(func_seed: int, token: str, args: tuple[Value, ...], result: Type,
            prime: int, vector_len: int) -> Value:
    material = f"{func_seed}|{token}|" + "|".join(
        ",".join(map(str, a)) if isinstance(a, tuple) else str(a) for a in args
    )
    digest = hashlib.blake2b(material.encode(), digest_size=8 * max(vector_len, 1)).digest()
    words = [int.from_bytes(digest[i * 8:(i + 1) * 8], "big") % prime
             for i in range(vector_len)]
    if result is Type.SCALAR:
        return words[0]
    return tuple(words)


def evaluate(p: Program, env: EvalEnv) -> dict[str, Value]:
    """Run the program; returns the output variables' final values.

    Raises DivisionByZero when a scalar division hits a zero divisor and
    KeyError when an input variable is missing from the environment.
    """
    prime = env.prime
    values: dict[str, Value] = dict(env.values)

    def ev(e: Expr) -> Value:
        if isinstance(e, Var):
            return values[e.name]
        if isinstance(e, Const):
            if e.token == "0s":
                return 0
            if e.token == "1s":
                return 1
            return (0,) * env.vector_len
        op = e.op
        if op == "+s":
            return (ev(e.args[0]) + ev(e.args[1])) % prime
        if op == "-s":
            return (ev(e.args[0]) - ev(e.args[1])) % prime
        if op == "*s":
            return (ev(e.args[0]) * ev(e.args[1])) % prime
        if op == "/s":
            d = ev(e.args[1])
            if d == 0:
                raise DivisionByZero(f"zero divisor in {op}")
            return (ev(e.args[0]) * pow(d, prime - 2, prime)) % prime
        if op == "ns":
            return (-ev(e.args[0])) % prime
        if op == "+v":
            a, b = ev(e.args[0]), ev(e.args[1])
            return tuple((x + y) % prime for x, y in zip(a, b))
        if op == "-v":
            a, b = ev(e.args[0]), ev(e.args[1])
            return tuple((x - y) % prime for x, y in zip(a, b))
        if op == "nv":
            return tuple((-x) % prime for x in ev(e.args[0]))
        if op == "*sv":
            s, v = ev(e.args[0]), ev(e.args[1])
            return tuple((s * x) % prime for x in v)
        # opaque function token
        args = tuple(ev(a) for a in e.args)
        return _opaque(env.func_seed, op, args, type_of(e), prime, env.vector_len)

    outputs: dict[str, Value] = {}
    for s in p.stmts:
        values[s.target] = ev(s.rhs)
        if s.out:
            outputs[s.target] = values[s.target]
    return outputs


class SemanticVerdict(Enum):
    EQUAL = "equal"
    DIFFERENT = "different"
    UNEVALUABLE = "unevaluable"


def semantic_check(p: Program, q: Program, rng: random.Random,
                   trials: int = 3, max_resample: int = 60) -> SemanticVerdict:
    """Spot-check p and q on `trials` shared random environments.

    Environments where either side divides by zero are resampled.  If no
    usable environment turns up within the resample budget the verdict is
    UNEVALUABLE: some divisor is identically zero (for example x - x), so
    nothing can be attested either way.
    """
    if sorted(p.outputs()) != sorted(q.outputs()):
        return SemanticVerdict.DIFFERENT
    done = 0
    attempts = 0
    while done < trials:
        if attempts >= trials + max_resample:
            return SemanticVerdict.UNEVALUABLE
        attempts += 1
        env = shared_env(p, q, rng)
        try:
            if evaluate(p, env) != evaluate(q, env):
                return SemanticVerdict.DIFFERENT
        except DivisionByZero:
            continue
        done += 1
    return SemanticVerdict.EQUAL


def semantically_equal(p: Program, q: Program, rng: random.Random,
                       trials: int = 3, max_resample: int = 60) -> bool:
    """True only when semantic_check attests equality on usable environments."""
    return semantic_check(p, q, rng, trials, max_resample) is SemanticVerdict.EQUAL


def shared_env(p: Program, q: Program, rng: random.Random, prime: int = PRIME,
               vector_len: int = VECTOR_LEN) -> EvalEnv:
    """One environment covering the union of both programs' inputs."""
    values: dict[str, Value] = {}
    func_seed = rng.randrange(1 << 62)
    for name in input_vars(p) + input_vars(q):
        if name in values:
            continue
        if VAR_TYPES[name] is Type.SCALAR:
            values[name] = rng.randrange(prime)
        else:
            values[name] = tuple(rng.randrange(prime) for _ in range(vector_len))
    return EvalEnv(values, prime, vector_len, func_seed)
