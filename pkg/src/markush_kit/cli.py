"""Command-line entry point: ``markush-kit <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bench import classify_dataset, load_assignments, score_extraction
from .claims import decide_many, load_claim, render_text
from .datagen import FragmentDatabase, filter_skeletons, generate, load_skeletons, split_holdout, write_jsonl
from .errors import MarkushKitError, SmilesParseError
from .markush import MarkushStructure, extract
from .smiles import parse, write_canonical

EXIT_INPUT = 2


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, ensure_ascii=False))


def _skeleton_text(value: str) -> str:
    """A skeleton is given inline or as a file holding it on its first line."""
    p = Path(value)
    if p.is_file():
        lines = load_skeletons(p)
        if not lines:
            raise ValueError(f"{value}: no skeleton found")
        return lines[0]
    return value


def cmd_parse(args: argparse.Namespace) -> int:
    g = parse(args.smiles)
    _emit({
        "canonical": write_canonical(g),
        "atoms": len(g.atoms),
        "heavy_atoms": g.heavy_atom_count,
        "bonds": len(g.bonds),
        "rings": [list(r) for r in g.rings],
        "aromatic_atoms": sum(a.aromatic for a in g.atoms),
        "labels": list(g.rlabels()),
        "components": len(g.components()),
    })
    return 0


def cmd_canon(args: argparse.Namespace) -> int:
    print(write_canonical(parse(args.smiles)))
    return 0


def cmd_match(args: argparse.Namespace) -> int:
    markush = MarkushStructure.from_smiles(_skeleton_text(args.skeleton))
    result = extract(markush, parse(args.mol), args.limit)
    _emit({"skeleton": markush.smiles, **result.to_json()})
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    skeletons = filter_skeletons(load_skeletons(args.skeletons), args.min_heavy)
    if not skeletons:
        raise ValueError("no usable skeletons after filtering")
    db = FragmentDatabase.from_jsonl(args.fragments) if args.fragments else FragmentDatabase.default()
    records = generate(skeletons, db, args.count, args.seed, workers=args.workers)
    out = Path(args.out)
    summary = {"skeletons": len(skeletons), "fragments": len(db), "out": str(out)}
    if args.holdout:
        train, held = split_holdout(list(records), args.holdout, args.seed)
        held_path = Path(args.holdout_out) if args.holdout_out else out.with_suffix(".holdout.jsonl")
        summary["records"] = write_jsonl(train, out)
        summary["holdout"] = write_jsonl(held, held_path)
        summary["holdout_out"] = str(held_path)
    else:
        summary["records"] = write_jsonl(records, out)
    _emit(summary)
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    bundles = [load_claim(p) for p in args.claim]
    report = decide_many(bundles, parse(args.mol))
    if args.format == "text":
        sys.stdout.write(render_text(report))
    else:
        print(report.dumps())
    return 0


def cmd_bench_classify(args: argparse.Namespace) -> int:
    metrics = classify_dataset(args.dataset, args.method, args.threshold)
    _emit({"method": args.method, **metrics.to_json()})
    return 0


def cmd_bench_extract(args: argparse.Namespace) -> int:
    metrics = score_extraction(load_assignments(args.pred), load_assignments(args.truth))
    _emit(metrics.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markush-kit", description="Markush structure matching toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse extended SMILES and summarize the graph")
    p.add_argument("smiles")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("canon", help="print the canonical extended SMILES")
    p.add_argument("smiles")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("match", help="extract substituent assignments for a skeleton")
    p.add_argument("--skeleton", required=True, help="skeleton SMILES, or a file holding it")
    p.add_argument("--mol", required=True)
    p.add_argument("--limit", type=int, default=64)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("gen", help="generate (markush, molecule, assignment) records")
    p.add_argument("--skeletons", help="skeleton file, one SMILES per line (default: bundled set)")
    p.add_argument("--fragments", help="fragment JSONL (default: bundled database)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--holdout", type=int, default=0, help="records to hold out by seeded shuffle")
    p.add_argument("--holdout-out", help="holdout file (default: <out>.holdout.jsonl)")
    p.add_argument("--min-heavy", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="decide whether claims protect a molecule")
    p.add_argument("--claim", nargs="+", required=True, help="claim bundle JSON file(s)")
    p.add_argument("--mol", required=True)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="evaluation harnesses")
    bsub = p.add_subparsers(dest="bench_command", required=True)
    b = bsub.add_parser("classify", help="score infringement classification")
    b.add_argument("--dataset", required=True)
    b.add_argument("--method", choices=("decide", "skeleton", "tanimoto"), default="decide")
    b.add_argument("--threshold", type=float, default=0.5)
    b.set_defaults(func=cmd_bench_classify)
    b = bsub.add_parser("extract", help="score substituent extraction")
    b.add_argument("--pred", required=True)
    b.add_argument("--truth", required=True)
    b.set_defaults(func=cmd_bench_extract)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SmilesParseError as exc:
        d = exc.diagnostic
        print(f"error: {d.kind.value} at position {d.position}: {d.message}", file=sys.stderr)
    except (MarkushKitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
