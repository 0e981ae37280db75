"""On-disk formats: pair records, proof-result records, line files, manifests.

Pair files are JSON-lines, one record per sample:

    {"id": "...", "provenance": "synthetic", "a": "<tokens>",
     "b": "<tokens>", "rules": ["stm1 Commute N", ...]}

The `rules` field is omitted when no generation sequence is known.  Pairs can
also be exported as paired line-text files: one `ProgA Y ProgB` line per
sample in the source file and the rule sequence (steps joined by " ; ") on
the matching line of the target file.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .generate import Sample
from .lang import parse_prefix
from .rules import RewriteRule, parse_rule, rule_text
from .search import ProofResult, ProofStatus

SEPARATOR = "Y"


class DataFormatError(ValueError):
    """A record on disk does not match the expected schema."""


def sample_to_record(s: Sample) -> dict:
    rec: dict = {
        "id": s.id,
        "provenance": s.provenance,
        "a": s.prog_a.text(),
        "b": s.prog_b.text(),
    }
    if s.rules is not None:
        rec["rules"] = [rule_text(r) for r in s.rules]
    return rec


def sample_from_record(rec: dict) -> Sample:
    try:
        rules = rec.get("rules")
        return Sample(
            id=str(rec["id"]),
            prog_a=parse_prefix(rec["a"]),
            prog_b=parse_prefix(rec["b"]),
            rules=None if rules is None else tuple(parse_rule(t) for t in rules),
            provenance=str(rec.get("provenance", "unknown")),
        )
    except KeyError as e:
        raise DataFormatError(f"pair record missing field {e}") from e


def write_pairs(path: str | Path, samples: Iterable[Sample]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(sample_to_record(s)) + "\n")
            n += 1
    return n


def read_pairs(path: str | Path) -> list[Sample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataFormatError(f"{path}:{lineno}: not valid JSON") from e
            out.append(sample_from_record(rec))
    return out


def pair_src_line(s: Sample) -> str:
    return f"{s.prog_a.text()} {SEPARATOR} {s.prog_b.text()}"


def pair_tgt_line(s: Sample) -> str:
    return " ; ".join(rule_text(r) for r in (s.rules or ()))


def write_pair_lines(src_path: str | Path, tgt_path: str | Path,
                     samples: Sequence[Sample]) -> int:
    with open(src_path, "w", encoding="utf-8") as sf, \
            open(tgt_path, "w", encoding="utf-8") as tf:
        for s in samples:
            sf.write(pair_src_line(s) + "\n")
            tf.write(pair_tgt_line(s) + "\n")
    return len(samples)


def split_src_line(line: str) -> tuple[str, str]:
    """Split "<A tokens> Y <B tokens>" on the single separator token."""
    parts = line.split()
    try:
        i = parts.index(SEPARATOR)
    except ValueError:
        raise DataFormatError(f"no {SEPARATOR!r} separator in source line")
    if SEPARATOR in parts[i + 1:]:
        raise DataFormatError(f"multiple {SEPARATOR!r} separators in source line")
    return " ".join(parts[:i]), " ".join(parts[i + 1:])


def result_to_record(sample_id: str, result: ProofResult,
                     seconds: Optional[float] = None) -> dict:
    rec: dict = {
        "id": sample_id,
        "status": result.status.value,
        "states": result.states_expanded,
    }
    if result.rules is not None:
        rec["rules"] = [rule_text(r) for r in result.rules]
    if seconds is not None:
        rec["seconds"] = round(seconds, 4)
    return rec


def error_record(sample_id: str, message: str) -> dict:
    return {"id": sample_id, "status": "error", "error": message}


def write_records(path: str | Path, records: Iterable[dict]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
            n += 1
    return n


def read_records(path: str | Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DataFormatError(f"{path}:{lineno}: not valid JSON") from e
    return out


def result_rules(rec: dict) -> tuple[RewriteRule, ...]:
    return tuple(parse_rule(t) for t in rec.get("rules", ()))


def result_from_record(rec: dict) -> ProofResult:
    status = ProofStatus(rec["status"])
    # key presence distinguishes a 0-step proof from an absent proof
    rules = result_rules(rec) if "rules" in rec else None
    return ProofResult(status=status, rules=rules,
                       states_expanded=int(rec.get("states", 0)))


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a command's outputs byte-for-byte."""
    command: str
    config: dict
    seed: Optional[int]
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    version: str = ""

    def to_json(self) -> str:
        return json.dumps({
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "version": self.version,
        }, indent=2, sort_keys=True)


def manifest_path(out_path: str | Path) -> Path:
    p = Path(out_path)
    return p.with_name(p.name + ".manifest.json")


def write_manifest(out_path: str | Path, manifest: RunManifest) -> Path:
    mp = manifest_path(out_path)
    mp.write_text(manifest.to_json() + "\n", encoding="utf-8")
    return mp


def read_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.rstrip("\n") for ln in fh]


def write_lines(path: str | Path, lines: Iterable[str]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for ln in lines:
            fh.write(ln + "\n")
            n += 1
    return n
