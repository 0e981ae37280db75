"""Equivalence-proof workbench for straight-line scalar/vector programs."""

from .lang import (
    DEFAULT_LIMITS,
    GENERALIZATION_LIMITS,
    Limits,
    Program,
    ProgramError,
    Role,
    check_limits,
    encode_rename,
    parse_normalized_source,
    parse_prefix,
    print_prefix,
    roles,
)
from .rules import (
    ApplyOutcome,
    EXPRESSION_RULES,
    Failure,
    RULE_NAMES,
    RewriteRule,
    RuleSyntaxError,
    STATEMENT_RULES,
    apply,
    enumerate_legal,
    parse_rule,
    rule_text,
)
from .search import (
    PolicyProposal,
    ProofResult,
    ProofStatus,
    ReplayPolicy,
    SearchConfig,
    distance,
    exhaustive_prove,
    heuristic_policy,
    prove,
)
from .semantics import (
    DivisionByZero,
    EvalEnv,
    SemanticVerdict,
    evaluate,
    random_env,
    semantic_check,
    semantically_equal,
)
from .verify import VerifyResult, VerifyStatus, format_proof, parse_proof, verify

__version__ = "0.1.0"
