"""Request-loop behavior, in process and over a real pipe."""
import io
import json
import re
import subprocess
import sys

from neural_fixtures import TOY_STEPS
from neuralpolicy.serve import serve

# shape of one rule line: statement label, rule name, optional path and var
_RULE_SHAPE = re.compile(
    r"stm\d+ [A-Z][A-Za-z]+( N[lr]{0,4})?( [sv]\d{2})?")


def _ask(overfit_ckpt, requests):
    stdin = io.StringIO("".join(json.dumps(r) + "\n" for r in requests))
    stdout = io.StringIO()
    serve(overfit_ckpt, stdin=stdin, stdout=stdout)
    return [json.loads(l) for l in stdout.getvalue().splitlines()]


def test_memorized_rule_ranks_first(overfit_ckpt):
    src, tgt = TOY_STEPS[0]
    [resp] = _ask(overfit_ckpt, [{"id": 7, "src": src, "beam": 3}])
    assert resp["id"] == 7
    assert resp["proposals"][0]["rule"] == tgt
    assert len(resp["proposals"]) <= 3


def test_scores_non_increasing(overfit_ckpt):
    src, _ = TOY_STEPS[1]
    [resp] = _ask(overfit_ckpt, [{"id": 1, "src": src, "beam": 5}])
    scores = [p["score"] for p in resp["proposals"]]
    assert scores == sorted(scores, reverse=True)
    assert all(s <= 0.0 for s in scores)  # log probabilities


def test_beam_zero_gives_empty_proposals(overfit_ckpt):
    [resp] = _ask(overfit_ckpt, [{"id": 2, "src": TOY_STEPS[0][0], "beam": 0}])
    assert resp["proposals"] == []


def test_every_request_gets_one_response_in_order(overfit_ckpt):
    reqs = [{"id": f"r{i}", "src": s, "beam": 2}
            for i, (s, _) in enumerate(TOY_STEPS[:4])]
    resps = _ask(overfit_ckpt, reqs)
    assert [r["id"] for r in resps] == ["r0", "r1", "r2", "r3"]


def test_blank_and_malformed_lines_are_skipped(overfit_ckpt):
    stdin = io.StringIO(
        "\n"
        "not json\n"
        + json.dumps({"src": "s01 === s02 ;", "beam": 1}) + "\n"  # no id
        + json.dumps({"id": 9, "src": TOY_STEPS[0][0], "beam": 1}) + "\n")
    stdout = io.StringIO()
    serve(overfit_ckpt, stdin=stdin, stdout=stdout)
    resps = [json.loads(l) for l in stdout.getvalue().splitlines()]
    assert [r["id"] for r in resps] == [9]


def test_unknown_source_tokens_still_answered(overfit_ckpt):
    [resp] = _ask(overfit_ckpt, [{"id": 3, "src": "whatever 123 Y ok", "beam": 2}])
    assert resp["id"] == 3  # OOV maps to UNK; decoding still proceeds


def test_proposals_are_syntactically_valid(overfit_ckpt):
    """On training sources the served top proposals are well-shaped rule
    lines at least 95% of the time."""
    total, valid = 0, 0
    for resp in _ask(overfit_ckpt, [
            {"id": i, "src": s, "beam": 1}
            for i, (s, _) in enumerate(TOY_STEPS)]):
        for p in resp["proposals"]:
            total += 1
            valid += _RULE_SHAPE.fullmatch(p["rule"]) is not None
    assert total >= len(TOY_STEPS)
    assert valid / total >= 0.95


def test_subprocess_round_trip(overfit_ckpt):
    proc = subprocess.Popen(
        [sys.executable, "-m", "neuralpolicy.cli", "serve",
         "--checkpoint", str(overfit_ckpt)],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
    try:
        proc.stdin.write(json.dumps(
            {"id": 1, "src": TOY_STEPS[0][0], "beam": 2}) + "\n")
        proc.stdin.flush()
        resp = json.loads(proc.stdout.readline())
        assert resp["id"] == 1
        assert resp["proposals"][0]["rule"] == TOY_STEPS[0][1]
        proc.stdin.close()
        assert proc.wait(timeout=30) == 0  # clean exit at EOF
    finally:
        proc.kill()
