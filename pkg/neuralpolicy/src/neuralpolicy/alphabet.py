"""The fixed token alphabets of the bridge text protocol.

Source lines are `program Y program`; target lines are rewrite-rule lines.
Pinning both alphabets up front keeps checkpoint vocabularies stable across
training iterations regardless of which tokens a given export happens to
contain.
"""
from __future__ import annotations

import itertools

SEPARATOR = "Y"

_OPS = ("+s", "-s", "*s", "/s", "ns", "+v", "-v", "nv", "*sv")
_CONSTS = ("0s", "1s", "0v")
_PUNCT = ("(", ")", ";", "=", "===")
_SCALAR_VARS = tuple(f"s{i:02d}" for i in range(1, 31))
_VECTOR_VARS = tuple(f"v{i:02d}" for i in range(1, 16))
_FUNCS = (tuple(f"f{i}s" for i in range(1, 6))
          + tuple(f"f{i}v" for i in range(1, 6))
          + tuple(f"g{i}s" for i in range(1, 4))
          + tuple(f"g{i}v" for i in range(1, 4)))

_RULE_NAMES = (
    "SwapPrev", "UseVar", "Inline", "DeleteStm", "NewTmp", "Rename",
    "AddZero", "SubZero", "MultOne", "DivOne", "NeutralOp", "Cancel",
    "DoubleOp", "AbsorbOp", "Commute", "DistributeLeft", "DistributeRight",
    "FactorLeft", "FactorRight", "AssociativeLeft", "AssociativeRight",
    "FlipLeft", "FlipRight",
)
_STM_LABELS = tuple(f"stm{i}" for i in range(1, 21))
_NODE_PATHS = tuple(
    "N" + "".join(c)
    for n in range(5)
    for c in itertools.product("lr", repeat=n)
)


def source_alphabet() -> tuple[str, ...]:
    """Every token that can appear in a `program Y program` line."""
    return (_OPS + _CONSTS + _PUNCT + _SCALAR_VARS + _VECTOR_VARS + _FUNCS
            + (SEPARATOR,))


def target_alphabet() -> tuple[str, ...]:
    """Every token that can appear in a rule line."""
    return _STM_LABELS + _RULE_NAMES + _NODE_PATHS + _SCALAR_VARS + _VECTOR_VARS
