"""Batch command-line entry points.

Exit codes: 0 success, 1 usage error, 2 data error, 3 policy transport
error.  Every command that writes an artifact drops a RunManifest next to
it; every randomized command takes an explicit seed.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bridge import ExternalPolicy, PolicyTransportError
from .curate import (
    EvalReport,
    SearchOutcomePair,
    SelectionConfig,
    expand_steps,
    hindsight,
    select_with_reasons,
    token_frequencies,
    write_step_export,
)
from .files import (
    DataFormatError,
    RunManifest,
    error_record,
    read_pairs,
    read_records,
    result_from_record,
    result_to_record,
    sample_to_record,
    write_manifest,
    write_pair_lines,
    write_pairs,
    write_records,
)
from .generate import (
    GenConfig,
    Sample,
    child_seed,
    compile_pairs,
    find_source_programs,
    generate_corpus,
)
from .lang import (
    DEFAULT_LIMITS,
    GENERALIZATION_LIMITS,
    Limits,
    ProgramError,
    UNBOUNDED_LIMITS,
)
from .search import (
    Expansion,
    ProofResult,
    ProofStatus,
    ReplayPolicy,
    SearchConfig,
    exhaustive_prove,
    heuristic_policy,
    prove,
)
from .rules import RuleSyntaxError
from .verify import read_proof, verify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRANSPORT = 3

LIMIT_PROFILES = {
    "default": DEFAULT_LIMITS,
    "generalization": GENERALIZATION_LIMITS,
    "unbounded": UNBOUNDED_LIMITS,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here reserves 2 for
    data errors, so remap."""

    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", message)
        raise SystemExit(EXIT_USAGE)


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def _gen_config(profile: str, config_path: Optional[str]) -> GenConfig:
    cfg = GenConfig()
    if profile == "small":
        cfg = cfg.small()
    elif profile == "generalization":
        cfg = cfg.generalization()
    if config_path:
        try:
            overrides = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise DataFormatError(f"cannot read config {config_path}: {e}") from e
        field_names = {f.name for f in dataclasses.fields(GenConfig)}
        for key, value in overrides.items():
            if key not in field_names:
                raise DataFormatError(f"unknown config key {key!r}")
            if key in ("rule_probs", "op_weights"):
                merged = dict(getattr(cfg, key))
                merged.update(value)
                value = merged
            elif isinstance(value, list):
                value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
            cfg = dataclasses.replace(cfg, **{key: value})
    return cfg


def _manifest(args: argparse.Namespace, out: str, inputs: Sequence[str] = (),
              seed: Optional[int] = None) -> None:
    skip = {"func", "command"}
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in skip and isinstance(v, (str, int, float, bool, type(None)))}
    write_manifest(out, RunManifest(
        command=args.command, config=config, seed=seed,
        inputs=tuple(inputs), outputs=(out,), version=__version__))


# ---------------------------------------------------------------------------
# Policies

POLICY_CHOICES = "heuristic, oracle, exhaustive, external:<command>"


def _policy_for(spec: str, sample: Sample, timeout: float,
                shared: dict) -> object:
    if spec == "heuristic":
        return heuristic_policy
    if spec == "oracle":
        if sample.rules is None:
            raise DataFormatError(f"sample {sample.id} has no sequence to replay")
        return ReplayPolicy(sample.rules)
    if spec.startswith("external:"):
        if "policy" not in shared:
            shared["policy"] = ExternalPolicy(spec[len("external:"):], timeout)
        return shared["policy"]
    raise DataFormatError(f"unknown policy {spec!r}; choose {POLICY_CHOICES}")


def _prove_sample(s: Sample, args: argparse.Namespace, limits: Limits,
                  shared: dict) -> ProofResult:
    if args.policy == "exhaustive":
        return exhaustive_prove(s.prog_a, s.prog_b, args.depth, limits,
                                max_states=args.max_states)
    policy = _policy_for(args.policy, s, args.timeout, shared)
    cfg = SearchConfig(beam=args.beam, width=args.width, steps=args.steps,
                       limits=limits,
                       record_expansions=args.record_expansions)
    return prove(s.prog_a, s.prog_b, policy, cfg)


def _close_shared(shared: dict) -> None:
    policy = shared.pop("policy", None)
    if policy is not None:
        policy.close()


# worker-process state for --jobs N; initialized once per process
_WORKER: dict = {}


def _init_worker(args: argparse.Namespace, limits: Limits) -> None:
    _WORKER["args"] = args
    _WORKER["limits"] = limits
    _WORKER["shared"] = {}


def _prove_worker(s: Sample) -> dict:
    args, limits, shared = _WORKER["args"], _WORKER["limits"], _WORKER["shared"]
    started = time.monotonic()
    try:
        result = _prove_sample(s, args, limits, shared)
    except PolicyTransportError as e:
        return {**error_record(s.id, str(e)), "transport": True}
    except DataFormatError as e:
        return error_record(s.id, str(e))
    rec = result_to_record(s.id, result, time.monotonic() - started)
    if args.record_expansions:
        rec["expansions"] = [[e.before, e.rule, e.after] for e in result.expansions]
    return rec


# ---------------------------------------------------------------------------
# Commands


def cmd_gen_synth(args) -> int:
    cfg = _gen_config(args.profile, args.config)
    samples = generate_corpus(cfg, args.seed, args.count)
    n = write_pairs(args.out, samples)
    _manifest(args, args.out, seed=args.seed)
    print(f"wrote {n} pairs to {args.out}")
    return EXIT_OK


def cmd_gen_compiled(args) -> int:
    cfg = _gen_config(args.profile, args.config)
    text = Path(args.corpus).read_text(encoding="utf-8")
    programs, errors = find_source_programs(text, cfg.limits)
    for msg in errors:
        sys.stderr.write(f"snippet skipped: {msg}\n")
    samples: list[Sample] = []
    for i, p in enumerate(programs):
        samples.extend(compile_pairs(p, child_seed(args.seed, "prog", i),
                                     id_prefix=f"cc{i:03d}", cfg=cfg))
    n = write_pairs(args.out, samples)
    _manifest(args, args.out, inputs=(args.corpus,), seed=args.seed)
    print(f"wrote {n} pairs from {len(programs)} source programs to {args.out}")
    return EXIT_OK


def cmd_prove(args) -> int:
    samples = read_pairs(args.pairs)
    limits = LIMIT_PROFILES[args.limits]
    if args.jobs > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(
                args.jobs, initializer=_init_worker, initargs=(args, limits)) as pool:
            records = pool.map(_prove_worker, samples)
    else:
        _init_worker(args, limits)
        try:
            records = [_prove_worker(s) for s in samples]
        finally:
            _close_shared(_WORKER["shared"])
    write_records(args.out, records)
    _manifest(args, args.out, inputs=(args.pairs,))
    found = sum(r.get("status") == ProofStatus.FOUND.value for r in records)
    transport_failures = sum(bool(r.get("transport")) for r in records)
    print(f"{found}/{len(records)} proven; results in {args.out}")
    if transport_failures:
        _emit_error("transport", f"{transport_failures} searches hit policy "
                                 "transport errors")
        return EXIT_TRANSPORT
    return EXIT_OK


def cmd_verify(args) -> int:
    limits = LIMIT_PROFILES[args.limits]
    failures = 0
    if args.proof:
        prog_a, prog_b, seq = read_proof(args.proof, limits)
        res = verify(prog_a, prog_b, seq, limits)
        print(json.dumps({"proof": args.proof, "status": res.status.value,
                          "failed_index": res.failed_index}))
        failures += not res.proven
    if args.pairs:
        for s in read_pairs(args.pairs):
            if s.rules is None:
                print(json.dumps({"id": s.id, "status": "NoSequence"}))
                failures += 1
                continue
            res = verify(s.prog_a, s.prog_b, s.rules, limits)
            print(json.dumps({"id": s.id, "status": res.status.value,
                              "failed_index": res.failed_index}))
            failures += not res.proven
    if not args.proof and not args.pairs:
        raise DataFormatError("verify needs --pairs and/or --proof")
    if failures:
        _emit_error("verification", f"{failures} sequences failed")
        return EXIT_DATA
    return EXIT_OK


def _outcomes_from_results(easy_recs, hard_recs) -> list[SearchOutcomePair]:
    easy_by_id = {r["id"]: r for r in easy_recs}
    outcomes = []
    for hr in hard_recs:
        er = easy_by_id.get(hr["id"])
        easy = result_from_record(er) if er and er.get("status") != "error" else None
        hard = None
        if hr.get("status") != "error":
            hard = result_from_record(hr)
            if "expansions" in hr:
                hard = dataclasses.replace(hard, expansions=tuple(
                    Expansion(*e) for e in hr["expansions"]))
        outcomes.append(SearchOutcomePair(
            hr["id"], easy, hard,
            error=hr.get("error") or (er or {}).get("error")))
    return outcomes


def _selection_config(args) -> SelectionConfig:
    kwargs = dict(seed=args.seed, limits=LIMIT_PROFILES[args.limits])
    if getattr(args, "threshold", None) is not None:
        kwargs["rare_token_threshold"] = args.threshold
    if getattr(args, "shorter_by", None) is not None:
        kwargs["shorter_by"] = args.shorter_by
    return SelectionConfig(**kwargs)


def _read_freqs(path: str) -> Counter:
    rec = json.loads(Path(path).read_text(encoding="utf-8"))
    return Counter({str(k): int(v) for k, v in rec.items()})


def cmd_select(args) -> int:
    samples_by_id = {s.id: s for s in read_pairs(args.pairs)}
    outcomes = _outcomes_from_results(read_records(args.easy),
                                      read_records(args.hard))
    freqs = _read_freqs(args.freqs)
    cfg = _selection_config(args)
    picked = select_with_reasons(outcomes, samples_by_id, freqs, cfg)
    records = []
    for sample, criteria in picked:
        rec = sample_to_record(sample)
        rec["criteria"] = list(criteria)
        records.append(rec)
    write_records(args.out, records)
    _manifest(args, args.out, inputs=(args.pairs, args.easy, args.hard, args.freqs),
              seed=args.seed)
    print(f"selected {len(records)}/{len(outcomes)} pairs into {args.out}")
    return EXIT_OK


def cmd_hindsight(args) -> int:
    samples_by_id = {s.id: s for s in read_pairs(args.pairs)}
    outcomes = _outcomes_from_results([], read_records(args.results))
    freqs = _read_freqs(args.freqs)
    cfg = _selection_config(args)
    steps = hindsight(outcomes, samples_by_id, freqs, cfg)
    src, tgt, meta = (f"{args.out_prefix}.src.txt", f"{args.out_prefix}.tgt.txt",
                      f"{args.out_prefix}.meta.jsonl")
    write_step_export(src, tgt, meta, steps)
    _manifest(args, src, inputs=(args.pairs, args.results, args.freqs),
              seed=args.seed)
    print(f"mined {len(steps)} hindsight samples into {src}")
    return EXIT_OK


def cmd_export(args) -> int:
    samples = read_pairs(args.pairs)
    limits = LIMIT_PROFILES[args.limits]
    if args.what == "pairs":
        src, tgt = f"{args.out_prefix}.src.txt", f"{args.out_prefix}.tgt.txt"
        write_pair_lines(src, tgt, samples)
        _manifest(args, src, inputs=(args.pairs,))
        print(f"exported {len(samples)} pair lines to {src}")
        return EXIT_OK
    with_rules = [s for s in samples if s.rules is not None]
    steps = expand_steps(with_rules, limits)
    src, tgt, meta = (f"{args.out_prefix}.src.txt", f"{args.out_prefix}.tgt.txt",
                      f"{args.out_prefix}.meta.jsonl")
    write_step_export(src, tgt, meta, steps)
    freqs_path = f"{args.out_prefix}.freqs.json"
    Path(freqs_path).write_text(
        json.dumps(dict(token_frequencies(steps)), indent=0, sort_keys=True) + "\n",
        encoding="utf-8")
    _manifest(args, src, inputs=(args.pairs,))
    skipped = len(samples) - len(with_rules)
    note = f" ({skipped} without sequences skipped)" if skipped else ""
    print(f"exported {len(steps)} step samples to {src}{note}")
    return EXIT_OK


def cmd_eval(args) -> int:
    samples = read_pairs(args.pairs)
    limits = LIMIT_PROFILES[args.limits]
    shared: dict = {}
    report_cfg = SearchConfig(beam=args.beam, width=args.width,
                              steps=args.steps, limits=limits)
    report = EvalReport()
    try:
        for s in samples:
            # the replay oracle is stateful, so each pair gets a fresh policy
            policy = _policy_for(args.policy, s, args.timeout, shared)
            result = prove(s.prog_a, s.prog_b, policy, report_cfg)
            report.add(s, result.found)
    finally:
        _close_shared(shared)
    print(report.format_table())
    if args.out:
        payload = {
            "buckets": {b: {"total": st.total, "found": st.found}
                        for b, st in report.buckets.items()},
            "results": [{"id": sid, "found": ok} for sid, ok in report.results],
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n",
                                  encoding="utf-8")
        _manifest(args, args.out, inputs=(args.pairs,))
    return EXIT_OK


def _histogram(values) -> list[tuple[int, int]]:
    return sorted(Counter(values).items())


def cmd_stats(args) -> int:
    samples = read_pairs(args.pairs)
    metrics = {
        "statement_count": [len(s.prog_a.stmts) for s in samples],
        "node_count": [s.prog_a.node_count() for s in samples],
        "proof_length": [len(s.rules) for s in samples if s.rules is not None],
    }
    if args.csv:
        print("metric,value,count")
        for name, values in metrics.items():
            for value, count in _histogram(values):
                print(f"{name},{value},{count}")
        return EXIT_OK
    for name, values in metrics.items():
        print(f"# {name} ({len(values)} samples)")
        for value, count in _histogram(values):
            print(f"{value:>5} {count}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_limits_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--limits", choices=sorted(LIMIT_PROFILES), default="default",
                   help="program limit profile")


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", required=True,
                   help=f"one of: {POLICY_CHOICES}")
    p.add_argument("--beam", type=int, default=10, help="proposals per state (B)")
    p.add_argument("--width", type=int, default=2, help="intermediates kept (I)")
    p.add_argument("--steps", type=int, default=25, help="step limit (Ns)")
    p.add_argument("--timeout", type=float, default=30.0,
                   help="external policy response timeout, seconds")
    _add_limits_flag(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slpeq", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("gen-synth", help="generate synthetic pairs")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--profile", choices=("default", "small", "generalization"),
                   default="default")
    p.add_argument("--config", help="JSON file of generator overrides")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("gen-compiled",
                       help="build pairs from a normalized source corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--profile", choices=("default", "small"), default="default")
    p.add_argument("--config", help="JSON file of generator overrides")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_compiled)

    p = sub.add_parser("prove", help="search for proofs over a pairs file")
    p.add_argument("--pairs", required=True)
    _add_search_flags(p)
    p.add_argument("--depth", type=int, default=2,
                   help="exhaustive policy search depth")
    p.add_argument("--max-states", type=int, default=2_000_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--record-expansions", action="store_true",
                   help="keep per-step expansions for hindsight mining")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", help="replay rule sequences")
    p.add_argument("--pairs", "--pair", dest="pairs",
                   help="pairs file with embedded sequences")
    p.add_argument("--proof", help="standalone proof file")
    _add_limits_flag(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("select", help="curate pairs from easy/hard searches")
    p.add_argument("--easy", required=True, help="results of the narrow search")
    p.add_argument("--hard", required=True, help="results of the wide search")
    p.add_argument("--pairs", required=True)
    p.add_argument("--freqs", required=True, help="token frequency JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=int,
                   help="rare-token count cutoff (default: bottom 2%% of vocab)")
    p.add_argument("--shorter-by", type=int, default=2)
    _add_limits_flag(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("hindsight",
                       help="mine failed searches for rare-token step samples")
    p.add_argument("--results", required=True,
                   help="prove output with --record-expansions")
    p.add_argument("--pairs", required=True)
    p.add_argument("--freqs", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=int)
    _add_limits_flag(p)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_hindsight)

    p = sub.add_parser("export", help="write line files for model training")
    p.add_argument("--pairs", required=True)
    p.add_argument("--what", choices=("steps", "pairs"), default="steps")
    _add_limits_flag(p)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("eval", help="bucketed success-rate report")
    p.add_argument("--pairs", required=True)
    _add_search_flags(p)
    p.add_argument("--report", choices=("table2",), default="table2")
    p.add_argument("--out", help="also write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="histograms over a pairs file")
    p.add_argument("--pairs", required=True)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except PolicyTransportError as e:
        _emit_error("transport", str(e))
        return EXIT_TRANSPORT
    except (DataFormatError, ProgramError, RuleSyntaxError) as e:
        _emit_error("data", str(e))
        return EXIT_DATA
    except OSError as e:
        _emit_error("io", str(e))
        return EXIT_DATA
    except ValueError as e:
        _emit_error("data", str(e))
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
