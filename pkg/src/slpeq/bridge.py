"""External policy processes speaking line-delimited JSON over std streams.

Request:  {"id": 7, "src": "<ProgCurrent tokens> Y <ProgB tokens>", "beam": 10}
Response: {"id": 7, "proposals": [{"rule": "stm1 Commute N", "score": -0.2}]}

One record per line, UTF-8.  Responses may arrive out of order; they are
matched to pending requests by id.  Unparseable proposals inside a valid
response are dropped with a warning, but a malformed record, a dead process
or a timeout is a transport error: the affected search fails rather than
continuing on fabricated data.
"""
from __future__ import annotations

import itertools
import json
import logging
import shlex
import subprocess
import sys
import threading
import time
from typing import Callable, Iterable, Optional, Sequence, TextIO

from .lang import Program
from .rules import parse_rule
from .search import PolicyProposal

SEPARATOR = "Y"
DEFAULT_TIMEOUT = 30.0

logger = logging.getLogger(__name__)


class PolicyTransportError(RuntimeError):
    """The external policy process failed to answer a request."""


class ExternalPolicy:
    """Search policy backed by a subprocess; usable as a context manager.

    The instance is itself a Policy callable.  A single reader thread
    collects responses; requests are written whole-line under a lock, so
    concurrent callers multiplex safely over one connection.
    """

    def __init__(self, command: str | Sequence[str],
                 timeout: float = DEFAULT_TIMEOUT):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self._proc = subprocess.Popen(
            argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)
        self._write_lock = threading.Lock()
        self._cv = threading.Condition()
        self._responses: dict[int, dict] = {}
        self._reader_error: Optional[str] = None
        self._eof = False
        self._ids = itertools.count(1)
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        try:
            for line in self._proc.stdout:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    rid = int(rec["id"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    with self._cv:
                        self._reader_error = f"malformed response record: {line[:120]!r}"
                        self._cv.notify_all()
                    return
                with self._cv:
                    self._responses[rid] = rec
                    self._cv.notify_all()
        finally:
            with self._cv:
                self._eof = True
                self._cv.notify_all()

    def request(self, src: str, beam: int) -> list[dict]:
        """One blocking round trip; returns the raw proposal records."""
        rid = next(self._ids)
        line = json.dumps({"id": rid, "src": src, "beam": beam})
        with self._write_lock:
            try:
                self._proc.stdin.write(line + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError, ValueError) as e:
                raise PolicyTransportError(f"cannot write to policy process: {e}") from e
        deadline = time.monotonic() + self.timeout
        with self._cv:
            while rid not in self._responses:
                if self._reader_error is not None:
                    raise PolicyTransportError(self._reader_error)
                if self._eof:
                    raise PolicyTransportError("policy process closed its output")
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise PolicyTransportError(
                        f"no response for request {rid} within {self.timeout}s")
                self._cv.wait(remaining)
            rec = self._responses.pop(rid)
        proposals = rec.get("proposals", [])
        if not isinstance(proposals, list):
            raise PolicyTransportError("response proposals is not a list")
        return proposals

    def __call__(self, program: Program, goal: Program, beam: int
                 ) -> list[PolicyProposal]:
        src = f"{program.text()} {SEPARATOR} {goal.text()}"
        out: list[PolicyProposal] = []
        for prop in self.request(src, beam):
            try:
                rule = parse_rule(str(prop["rule"]))
                score = float(prop.get("score", 0.0))
            except Exception:
                logger.warning("dropping unparseable proposal %r", prop)
                continue
            out.append(PolicyProposal(rule, score))
        out.sort(key=lambda pr: -pr.score)  # stable: ties keep server order
        return out[:beam]

    def close(self) -> None:
        if self._proc.stdin is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self) -> "ExternalPolicy":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


Handler = Callable[[str, int], Iterable[tuple[str, float]]]


def serve(handler: Handler, stdin: TextIO = None, stdout: TextIO = None) -> None:
    """Run the server side of the protocol until stdin closes.

    `handler(src, beam)` returns (ruleText, score) pairs, best first.  Used
    by in-repo fixtures; an external trained model implements the same loop
    in its own process.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        proposals = [{"rule": r, "score": s}
                     for r, s in handler(req["src"], int(req.get("beam", 1)))]
        stdout.write(json.dumps({"id": req["id"], "proposals": proposals}) + "\n")
        stdout.flush()


def split_bridge_src(src: str) -> tuple[str, str]:
    """Split a request's src field into the two program token strings."""
    parts = src.split()
    i = parts.index(SEPARATOR)
    return " ".join(parts[:i]), " ".join(parts[i + 1:])
