"""Single-threaded request loop speaking the policy-bridge protocol.

One JSON object per line on stdin: {"id": ..., "src": "<tokens>",
"beam": k}.  One JSON object per line on stdout: {"id": ..., "proposals":
[{"rule": ..., "score": ...}, ...]} best first.  Any decode failure turns
into an empty proposal list; the searching side treats that branch as
exhausted.
"""
from __future__ import annotations

import json
import logging
import sys

from neuralpolicy.beam import beam_decode
from neuralpolicy.train import _load_checkpoint, build_from_checkpoint

logger = logging.getLogger(__name__)


def serve(checkpoint_path, stdin=None, stdout=None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    model, src_vocab, tgt_vocab, cfg = build_from_checkpoint(
        _load_checkpoint(checkpoint_path))
    model.eval()

    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            rid = request["id"]
        except (json.JSONDecodeError, TypeError, KeyError):
            logger.warning("skipping malformed request line")
            continue
        try:
            tokens = str(request.get("src", "")).split()[:cfg.max_src_len]
            beam = int(request.get("beam", 1))
            proposals = [
                {"rule": rule, "score": score}
                for rule, score in beam_decode(model, src_vocab.encode(tokens),
                                               tgt_vocab, beam)
            ]
        except Exception:
            logger.exception("decode failed for request %r", rid)
            proposals = []
        stdout.write(json.dumps({"id": rid, "proposals": proposals}) + "\n")
        stdout.flush()
