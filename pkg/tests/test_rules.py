"""Rewrite rules: one positive fixture per rule, guards, and the
enumeration/application cross-check."""
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slpeq.generate import GenConfig, generate_prog
from slpeq.lang import UNBOUNDED_LIMITS, parse_prefix
from slpeq.rules import (
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
from slpeq.semantics import SemanticVerdict, semantic_check


def ok_apply(program_text: str, rule: str) -> str:
    out = apply(parse_rule(rule), parse_prefix(program_text))
    assert out.failure is None, f"{rule}: {out.failure}"
    return out.program.text()


def fail_apply(program_text: str, rule: str) -> Failure:
    out = apply(parse_rule(rule), parse_prefix(program_text))
    assert not out.ok
    return out.failure


def test_rule_families_complete():
    assert len(STATEMENT_RULES) == 6
    assert len(EXPRESSION_RULES) == 17
    assert len(RULE_NAMES) == 23


# ---------------------------------------------------------------------------
# Rule text round trip


def test_rule_text_round_trip():
    for text in ("stm1 DeleteStm", "stm2 Commute Nl", "stm3 UseVar s05",
                 "stm2 NewTmp Nlr s05", "stm1 Rename v09"):
        assert rule_text(parse_rule(text)) == text


def test_parse_rule_rejects_malformed():
    for bad in ("stm0 DeleteStm", "DeleteStm", "stm1 Commute",
                "stm1 Commute N s01", "stm1 NoSuchRule N",
                "stm1 DeleteStm N", "stm1 Commute Nq", "stmx Commute N"):
        with pytest.raises(RuleSyntaxError):
            parse_rule(bad)


def test_apply_rejects_wrong_operand_shape():
    p = parse_prefix("s01 === ( +s s02 s03 ) ;")
    with pytest.raises(ValueError):
        apply(RewriteRule(1, "Commute", None, None), p)
    with pytest.raises(ValueError):
        apply(RewriteRule(1, "DeleteStm", "N", None), p)


def test_apply_out_of_range_statement():
    assert fail_apply("s01 === ( +s s02 s03 ) ;",
                      "stm4 Commute N") is Failure.BAD_ADDRESS


def test_apply_dangling_path():
    assert fail_apply("s01 === ( +s s02 s03 ) ;",
                      "stm1 Commute Nll") is Failure.BAD_ADDRESS


# ---------------------------------------------------------------------------
# Statement rules


def test_swap_prev():
    got = ok_apply("s01 = s02 ; s03 = s04 ; s05 === ( +s s01 s03 ) ;",
                   "stm2 SwapPrev")
    assert got == "s03 = s04 ; s01 = s02 ; s05 === ( +s s01 s03 ) ;"


def test_swap_prev_dependence_guard():
    failure = fail_apply("s01 = s02 ; s03 = ( +s s01 s04 ) ; s05 === s03 ;",
                         "stm2 SwapPrev")
    assert failure is Failure.DEPENDENCE_VIOLATION


def test_swap_prev_first_statement():
    assert fail_apply("s01 = s02 ; s03 === s01 ;",
                      "stm1 SwapPrev") is Failure.ILLEGAL_PATTERN


def test_swap_prev_same_target_guard():
    failure = fail_apply("s01 = s02 ; s01 = s03 ; s04 === s01 ;",
                         "stm2 SwapPrev")
    assert failure is Failure.DEPENDENCE_VIOLATION


def test_use_var():
    got = ok_apply(
        "s01 = ( +s s02 s03 ) ; s04 === ( *s ( +s s02 s03 ) s02 ) ;",
        "stm2 UseVar s01")
    assert got == "s01 = ( +s s02 s03 ) ; s04 === ( *s s01 s02 ) ;"


def test_use_var_requires_match():
    failure = fail_apply(
        "s01 = ( +s s02 s03 ) ; s04 === ( *s ( -s s02 s03 ) s02 ) ;",
        "stm2 UseVar s01")
    assert failure is Failure.ILLEGAL_PATTERN


def test_use_var_uses_most_recent_definition():
    got = ok_apply(
        "s01 = ( +s s02 s03 ) ; s01 = s02 ; s04 === ( +s s02 s03 ) ;",
        "stm3 UseVar s01")
    # at stm3 the value of s01 is s02, so only the s02 leaf is replaced
    assert got == ("s01 = ( +s s02 s03 ) ; s01 = s02 ; "
                   "s04 === ( +s s01 s03 ) ;")


def test_use_var_definition_must_be_stable():
    # s02 is reassigned between s01's definition and the use site
    failure = fail_apply(
        "s02 = s06 ; s01 = ( +s s02 s03 ) ; s02 = s04 ; "
        "s05 === ( +s s02 s03 ) ;",
        "stm4 UseVar s01")
    assert failure is Failure.DEPENDENCE_VIOLATION


def test_inline():
    got = ok_apply("s01 = ( +s s02 s03 ) ; s04 === ( *s s01 s02 ) ;",
                   "stm2 Inline s01")
    assert got == ("s01 = ( +s s02 s03 ) ; "
                   "s04 === ( *s ( +s s02 s03 ) s02 ) ;")


def test_inline_replaces_every_occurrence():
    got = ok_apply("s01 = ( ns s02 ) ; s03 === ( +s s01 s01 ) ;",
                   "stm2 Inline s01")
    assert got == "s01 = ( ns s02 ) ; s03 === ( +s ( ns s02 ) ( ns s02 ) ) ;"


def test_inline_input_is_illegal():
    failure = fail_apply("s01 === ( +s s02 s03 ) ;", "stm1 Inline s02")
    assert failure is Failure.ILLEGAL_PATTERN


def test_delete_stm():
    got = ok_apply("s01 = s02 ; s03 === s04 ;", "stm1 DeleteStm")
    assert got == "s03 === s04 ;"


def test_delete_stm_live_var_guard():
    failure = fail_apply("s01 = s02 ; s03 === s01 ;", "stm1 DeleteStm")
    assert failure is Failure.DEPENDENCE_VIOLATION


def test_delete_stm_output_guard():
    failure = fail_apply("s01 = s02 ; s03 === s02 ;", "stm2 DeleteStm")
    assert failure is Failure.ILLEGAL_PATTERN


def test_delete_stm_conservative_after_reassignment():
    # sound but conservative: any later read of the target blocks deletion,
    # even when a reassignment sits in between
    failure = fail_apply("s01 = s02 ; s01 = s03 ; s04 === s01 ;",
                         "stm1 DeleteStm")
    assert failure is Failure.DEPENDENCE_VIOLATION


def test_delete_stm_unread_reassignment():
    got = ok_apply("s01 = s02 ; s01 = s03 ; s04 === s05 ;", "stm2 DeleteStm")
    assert got == "s01 = s02 ; s04 === s05 ;"


def test_new_tmp():
    got = ok_apply("s01 === ( +s s02 s03 ) ;", "stm1 NewTmp Nl s04")
    assert got == "s04 = s02 ; s01 === ( +s s04 s03 ) ;"


def test_new_tmp_subtree():
    got = ok_apply("s01 === ( *s ( +s s02 s03 ) s02 ) ;", "stm1 NewTmp N s04")
    assert got == "s04 = ( *s ( +s s02 s03 ) s02 ) ; s01 === s04 ;"


def test_new_tmp_var_in_use():
    failure = fail_apply("s01 === ( +s s02 s03 ) ;", "stm1 NewTmp Nl s02")
    assert failure is Failure.VAR_CONFLICT


def test_new_tmp_type_mismatch():
    failure = fail_apply("v01 === ( +v v02 v03 ) ;", "stm1 NewTmp Nl s04")
    assert failure is Failure.TYPE_MISMATCH


def test_rename():
    got = ok_apply("s01 = s02 ; s03 === ( +s s01 s01 ) ;", "stm1 Rename s05")
    assert got == "s05 = s02 ; s03 === ( +s s05 s05 ) ;"


def test_rename_conflict_with_live_var():
    failure = fail_apply("s01 = s02 ; s03 === ( +s s01 s02 ) ;",
                         "stm1 Rename s02")
    assert failure is Failure.VAR_CONFLICT


def test_rename_output_is_illegal():
    failure = fail_apply("s01 === s02 ;", "stm1 Rename s05")
    assert failure is Failure.ILLEGAL_PATTERN


def test_rename_input_shadow_regression():
    # s05 is read as an input before stm2; renaming stm2's target onto s05
    # would capture that earlier read
    failure = fail_apply(
        "s01 = s05 ; s02 = s03 ; s04 === ( +s s01 s02 ) ;",
        "stm2 Rename s05")
    assert failure is Failure.VAR_CONFLICT


def test_rename_substitutes_read_in_reassignment():
    # the reassignment of s24 reads the old s24; that read must be renamed
    got = ok_apply(
        "s24 = s18 ; s24 = ( -s s24 s13 ) ; s15 === ( -s s24 s10 ) ;",
        "stm1 Rename s01")
    assert got == ("s01 = s18 ; s24 = ( -s s01 s13 ) ; "
                   "s15 === ( -s s24 s10 ) ;")


def test_rename_stops_at_reassignment():
    got = ok_apply(
        "s05 = s18 ; s05 = s19 ; s15 === s05 ;",
        "stm1 Rename s01")
    # stm1's value is dead immediately; only the target changes
    assert got == "s01 = s18 ; s05 = s19 ; s15 === s05 ;"


# ---------------------------------------------------------------------------
# Expression rules (positive fixture per rule)


def test_add_zero():
    got = ok_apply("s01 === ( *s s02 s03 ) ;", "stm1 AddZero N")
    assert got == "s01 === ( +s 0s ( *s s02 s03 ) ) ;"


def test_add_zero_vector():
    got = ok_apply("v01 === ( +v v02 v03 ) ;", "stm1 AddZero Nl")
    assert got == "v01 === ( +v ( +v 0v v02 ) v03 ) ;"


def test_sub_zero():
    got = ok_apply("s01 === ( +s s02 s03 ) ;", "stm1 SubZero Nl")
    assert got == "s01 === ( +s ( -s s02 0s ) s03 ) ;"


def test_mult_one():
    got = ok_apply("s01 === s02 ;", "stm1 MultOne N")
    assert got == "s01 === ( *s 1s s02 ) ;"


def test_div_one():
    got = ok_apply("s01 === ( +s s02 s03 ) ;", "stm1 DivOne Nr")
    assert got == "s01 === ( +s s02 ( /s s03 1s ) ) ;"


def test_div_one_vector_is_illegal():
    assert fail_apply("v01 === v02 ;", "stm1 DivOne N") is Failure.TYPE_MISMATCH


def test_neutral_op():
    got = ok_apply("s01 === ( +s 0s s02 ) ;", "stm1 NeutralOp N")
    assert got == "s01 === s02 ;"


def test_neutral_op_sub_right_zero():
    got = ok_apply("s01 === ( -s s02 0s ) ;", "stm1 NeutralOp N")
    assert got == "s01 === s02 ;"


def test_neutral_op_wrong_side():
    # 0 - x is not neutral
    failure = fail_apply("s01 === ( -s 0s s02 ) ;", "stm1 NeutralOp N")
    assert failure is Failure.ILLEGAL_PATTERN


def test_cancel_subtraction():
    got = ok_apply("s01 === ( -s s02 s02 ) ;", "stm1 Cancel N")
    assert got == "s01 === 0s ;"


def test_cancel_division():
    got = ok_apply("s01 === ( /s ( +s s02 s03 ) ( +s s02 s03 ) ) ;",
                   "stm1 Cancel N")
    assert got == "s01 === 1s ;"


def test_cancel_vector():
    got = ok_apply("v01 === ( -v v02 v02 ) ;", "stm1 Cancel N")
    assert got == "v01 === 0v ;"


def test_cancel_requires_identical_operands():
    failure = fail_apply("s01 === ( -s s02 s03 ) ;", "stm1 Cancel N")
    assert failure is Failure.ILLEGAL_PATTERN


def test_double_op():
    got = ok_apply("s01 === ( ns ( ns s02 ) ) ;", "stm1 DoubleOp N")
    assert got == "s01 === s02 ;"


def test_double_op_vector():
    got = ok_apply("v01 === ( nv ( nv v02 ) ) ;", "stm1 DoubleOp N")
    assert got == "v01 === v02 ;"


def test_absorb_op():
    got = ok_apply("s01 === ( *s s02 0s ) ;", "stm1 AbsorbOp N")
    assert got == "s01 === 0s ;"


def test_absorb_op_left_zero():
    got = ok_apply("s01 === ( *s 0s s02 ) ;", "stm1 AbsorbOp N")
    assert got == "s01 === 0s ;"


def test_absorb_op_scalar_vector():
    got = ok_apply("v01 === ( *sv 0s v02 ) ;", "stm1 AbsorbOp N")
    assert got == "v01 === 0v ;"


def test_absorb_op_division_guard():
    # 0 / x may not collapse: x could be zero
    failure = fail_apply("s01 === ( /s 0s s02 ) ;", "stm1 AbsorbOp N")
    assert failure is Failure.ILLEGAL_PATTERN


def test_commute():
    got = ok_apply("s01 === ( +s s02 s03 ) ;", "stm1 Commute N")
    assert got == "s01 === ( +s s03 s02 ) ;"


def test_commute_non_commutative_op():
    assert fail_apply("s01 === ( -s s02 s03 ) ;",
                      "stm1 Commute N") is Failure.ILLEGAL_PATTERN
    assert fail_apply("v01 === ( *sv s01 v02 ) ;",
                      "stm1 Commute N") is Failure.ILLEGAL_PATTERN


def test_distribute_left():
    got = ok_apply("s01 === ( *s ( +s s02 s03 ) s04 ) ;",
                   "stm1 DistributeLeft N")
    assert got == "s01 === ( +s ( *s s02 s04 ) ( *s s03 s04 ) ) ;"


def test_distribute_left_division():
    got = ok_apply("s01 === ( /s ( -s s02 s03 ) s04 ) ;",
                   "stm1 DistributeLeft N")
    assert got == "s01 === ( -s ( /s s02 s04 ) ( /s s03 s04 ) ) ;"


def test_distribute_right():
    got = ok_apply("s01 === ( *s s02 ( +s s03 s04 ) ) ;",
                   "stm1 DistributeRight N")
    assert got == "s01 === ( +s ( *s s02 s03 ) ( *s s02 s04 ) ) ;"


def test_distribute_right_division_is_illegal():
    # a / (b + c) does not distribute
    failure = fail_apply("s01 === ( /s s02 ( +s s03 s04 ) ) ;",
                         "stm1 DistributeRight N")
    assert failure is Failure.ILLEGAL_PATTERN


def test_distribute_scalar_vector():
    got = ok_apply("v01 === ( *sv s02 ( +v v02 v03 ) ) ;",
                   "stm1 DistributeRight N")
    assert got == "v01 === ( +v ( *sv s02 v02 ) ( *sv s02 v03 ) ) ;"


def test_factor_left():
    # common left factor
    got = ok_apply("s01 === ( +s ( *s s02 s03 ) ( *s s02 s04 ) ) ;",
                   "stm1 FactorLeft N")
    assert got == "s01 === ( *s s02 ( +s s03 s04 ) ) ;"


def test_factor_left_requires_common_factor():
    failure = fail_apply("s01 === ( +s ( *s s02 s04 ) ( *s s03 s05 ) ) ;",
                         "stm1 FactorLeft N")
    assert failure is Failure.ILLEGAL_PATTERN


def test_factor_right():
    # common right factor
    got = ok_apply("s01 === ( +s ( *s s02 s04 ) ( *s s03 s04 ) ) ;",
                   "stm1 FactorRight N")
    assert got == "s01 === ( *s ( +s s02 s03 ) s04 ) ;"


def test_factor_right_division():
    got = ok_apply("s01 === ( -s ( /s s02 s04 ) ( /s s03 s04 ) ) ;",
                   "stm1 FactorRight N")
    assert got == "s01 === ( /s ( -s s02 s03 ) s04 ) ;"


def test_associative_left():
    got = ok_apply("s01 === ( *s s02 ( *s s03 s04 ) ) ;",
                   "stm1 AssociativeLeft N")
    assert got == "s01 === ( *s ( *s s02 s03 ) s04 ) ;"


def test_associative_left_addition():
    got = ok_apply("s01 === ( +s s02 ( +s s03 s04 ) ) ;",
                   "stm1 AssociativeLeft N")
    assert got == "s01 === ( +s ( +s s02 s03 ) s04 ) ;"


def test_associative_left_scalar_vector():
    # a ( b vec ) combines the two scalars
    got = ok_apply("v01 === ( *sv s02 ( *sv s03 v02 ) ) ;",
                   "stm1 AssociativeLeft N")
    assert got == "v01 === ( *sv ( *s s02 s03 ) v02 ) ;"


def test_associative_left_mixed_ops_illegal():
    failure = fail_apply("s01 === ( +s s02 ( -s s03 s04 ) ) ;",
                         "stm1 AssociativeLeft N")
    assert failure is Failure.ILLEGAL_PATTERN


def test_associative_right():
    got = ok_apply("s01 === ( *s ( *s s02 s03 ) s04 ) ;",
                   "stm1 AssociativeRight N")
    assert got == "s01 === ( *s s02 ( *s s03 s04 ) ) ;"


def test_associative_right_division():
    got = ok_apply("s01 === ( /s ( *s s02 s03 ) s04 ) ;",
                   "stm1 AssociativeRight N")
    assert got == "s01 === ( *s s02 ( /s s03 s04 ) ) ;"


def test_flip_left():
    got = ok_apply("s01 === ( ns ( -s s02 s03 ) ) ;", "stm1 FlipLeft N")
    assert got == "s01 === ( -s s03 s02 ) ;"


def test_flip_right():
    got = ok_apply("s01 === ( /s s02 ( /s s03 s04 ) ) ;", "stm1 FlipRight N")
    assert got == "s01 === ( *s s02 ( /s s04 s03 ) ) ;"


def test_limit_exceeded_on_growth():
    # a program already at the node ceiling cannot take AddZero
    expr = "( +s ( +s s02 s03 ) s02 )"  # 5 nodes
    text = " ".join(f"s{i:02d} = {expr} ;" for i in range(4, 23))
    text += " s01 === ( +s s04 ( +s s05 s06 ) ) ;"
    p = parse_prefix(text)
    assert p.node_count() == 100
    out = apply(parse_rule("stm1 AddZero N"), p)
    assert out.failure is Failure.LIMIT_EXCEEDED
    relaxed = apply(parse_rule("stm1 AddZero N"), p, UNBOUNDED_LIMITS)
    assert relaxed.ok


# ---------------------------------------------------------------------------
# Worked multi-step narrative: wrap a divisor in *s 1s, inline, delete


def test_mult_one_inline_delete_chain():
    p = parse_prefix(
        "s26 = ( *s s24 s24 ) ; s25 === ( /s s26 ( *s s27 s28 ) ) ;")
    step1 = apply(parse_rule("stm2 MultOne Nr"), p)
    assert step1.ok
    assert step1.program.text() == (
        "s26 = ( *s s24 s24 ) ; "
        "s25 === ( /s s26 ( *s 1s ( *s s27 s28 ) ) ) ;")
    step2 = apply(parse_rule("stm2 Inline s26"), step1.program)
    assert step2.ok
    step3 = apply(parse_rule("stm1 DeleteStm"), step2.program)
    assert step3.ok
    assert step3.program.text() == (
        "s25 === ( /s ( *s s24 s24 ) ( *s 1s ( *s s27 s28 ) ) ) ;")


# ---------------------------------------------------------------------------
# Inverses


_INVERSE_FIXTURES = [
    ("s01 === ( *s s02 s03 ) ;", "stm1 AddZero N", "stm1 NeutralOp N"),
    ("s01 === ( +s s02 s03 ) ;", "stm1 SubZero Nl", "stm1 NeutralOp Nl"),
    ("s01 === s02 ;", "stm1 MultOne N", "stm1 NeutralOp N"),
    ("s01 === ( +s s02 s03 ) ;", "stm1 Commute N", "stm1 Commute N"),
    ("s01 === ( *s ( +s s02 s03 ) s04 ) ;",
     "stm1 DistributeLeft N", "stm1 FactorRight N"),
    ("s01 === ( *s s02 ( +s s03 s04 ) ) ;",
     "stm1 DistributeRight N", "stm1 FactorLeft N"),
    ("s01 === ( *s s02 ( *s s03 s04 ) ) ;",
     "stm1 AssociativeLeft N", "stm1 AssociativeRight N"),
    ("s01 === ( +s s02 s03 ) ;", "stm1 NewTmp Nl s04", "stm2 Inline s04"),
]


@pytest.mark.parametrize("text,forward,backward", _INVERSE_FIXTURES)
def test_inverse_round_trip(text, forward, backward):
    p = parse_prefix(text)
    mid = apply(parse_rule(forward), p)
    assert mid.ok
    if forward.split()[1] == "NewTmp":
        # Inline leaves the temp's defining statement behind; drop it
        back = apply(parse_rule(backward), mid.program)
        assert back.ok
        cleaned = apply(parse_rule("stm1 DeleteStm"), back.program)
        assert cleaned.ok and cleaned.program.text() == p.text()
    else:
        back = apply(parse_rule(backward), mid.program)
        assert back.ok and back.program.text() == p.text()


# ---------------------------------------------------------------------------
# Enumeration


def test_single_statement_enumeration_contents():
    p = parse_prefix("s01 === ( +s s02 s03 ) ;")
    rules = enumerate_legal(p)
    texts = {rule_text(r) for r in rules}
    assert "stm1 Commute N" in texts
    assert "stm1 AddZero N" in texts
    assert all(not t.startswith("stm2") for t in texts)
    assert "stm1 SwapPrev" not in texts
    assert "stm1 DeleteStm" not in texts


def test_enumeration_sorted_and_unique():
    p = parse_prefix("s01 = ( +s s02 s03 ) ; s04 === ( *s s01 s01 ) ;")
    rules = enumerate_legal(p)
    keys = [(r.stm, r.name, r.path or "", r.var or "") for r in rules]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


def test_goal_pool_subset_of_full():
    p = parse_prefix("s01 === ( +s s02 s03 ) ;")
    goal = parse_prefix("s01 === ( +s s03 s02 ) ;")
    full = {rule_text(r) for r in enumerate_legal(p)}
    pooled = {rule_text(r) for r in enumerate_legal(p, var_pool="goal",
                                                    goal=goal)}
    assert pooled <= full
    assert len(pooled) < len(full)  # fewer NewTmp variable choices


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_enumerated_rules_all_apply(seed):
    p = generate_prog(GenConfig().small(), random.Random(seed))
    rules = enumerate_legal(p)
    for rule in rules:
        out = apply(rule, p)
        assert out.ok, f"{rule_text(rule)} failed: {out.failure}"
        assert out.program.text() != p.text() or rule.name == "Commute"


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10**6))
def test_non_enumerated_rules_fail(seed):
    rng = random.Random(seed)
    p = generate_prog(GenConfig().small(), rng)
    legal = {rule_text(r) for r in enumerate_legal(p)}
    checked = 0
    for name in RULE_NAMES:
        for stm in range(1, len(p.stmts) + 1):
            candidates = _candidates(name, stm, rng)
            for rule in candidates:
                if rule_text(rule) in legal:
                    continue
                out = apply(rule, p)
                assert not out.ok, rule_text(rule)
                checked += 1
                if checked >= 40:
                    return


def _candidates(name, stm, rng):
    from slpeq.rules import RULE_OPERANDS
    wants_path, wants_var = RULE_OPERANDS[name]
    paths = ["N", "Nl", "Nr", "Nll", "Nlr", "Nrl", "Nrr"]
    variables = ["s01", "s05", "s11", "v01", "v04"]
    out = []
    if wants_path and wants_var:
        out.append(RewriteRule(stm, name, rng.choice(paths),
                               rng.choice(variables)))
    elif wants_path:
        out.append(RewriteRule(stm, name, rng.choice(paths), None))
    elif wants_var:
        out.append(RewriteRule(stm, name, None, rng.choice(variables)))
    else:
        out.append(RewriteRule(stm, name, None, None))
    return out


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_applied_rules_preserve_semantics(seed):
    rng = random.Random(seed)
    p = generate_prog(GenConfig().small(), rng)
    rules = enumerate_legal(p)
    if not rules:
        return
    for rule in rng.sample(rules, min(4, len(rules))):
        out = apply(rule, p)
        assert out.ok
        verdict = semantic_check(p, out.program, random.Random(seed ^ 0x77))
        assert verdict is not SemanticVerdict.DIFFERENT, rule_text(rule)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_applied_rules_stay_well_formed(seed):
    from slpeq.lang import validate_program
    rng = random.Random(seed)
    p = generate_prog(GenConfig().small(), rng)
    for rule in enumerate_legal(p):
        out = apply(rule, p)
        assert out.ok
        assert validate_program(out.program) == []
