"""Command-line interface.

Console output is blinded: it carries counts, kinds, guids and the operator's
own inputs, never subjects, file names or document text. Identifying detail
is only written to the export manifest.

Exit codes: 0 success (including zero findings), 1 operation failed,
2 usage error or missing case, 3 export directory unusable.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections import Counter
from datetime import date
from pathlib import Path
from typing import Optional

from . import case as cases
from .corpus import generate
from .export import ExportError, export_set, prepare_dir
from .ingest import IngestError, detect_unsearchable, ingest_report, scan_evidence, unsearchable_warning
from .model import Kind
from .relations import (
    DEFAULT_EXPORT_DIR,
    FilterConfig,
    SeedSets,
    baseline_email_only,
    baseline_metadata,
    run_filter,
    seed_from_address,
)
from .shingles import DEFAULT_THRESHOLD, DEFAULT_WINDOW, ShingleConfig

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_EXPORT = 0, 1, 2, 3
REPORT_FILE = "ingest_report.txt"


class UsageError(Exception):
    pass


def _threshold(value: str) -> float:
    try:
        t = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value}")
    if not 0 < t <= 1:
        raise argparse.ArgumentTypeError(f"threshold must be in (0, 1], got {value}")
    return t


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privfilter",
                                     description="Find, block and export privileged items in an evidence corpus.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="scan an evidence tree into a new case")
    p.add_argument("--root", required=True, help="evidence directory")
    p.add_argument("--case", required=True, help="case directory to create")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="words per shingle (default 5)")
    p.add_argument("--workers", type=_positive, default=1)

    p = sub.add_parser("filter", help="compute, block and export the privileged set")
    p.add_argument("--case", required=True)
    seed = p.add_mutually_exclusive_group()
    seed.add_argument("--seed-address", help="privileged e-mail address")
    seed.add_argument("--seed-item", nargs="+", metavar="GUID", help="explicitly selected item guids")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD,
                   help="minimum shingle resemblance for related items (default 0.9)")
    p.add_argument("--export-dir", default=str(DEFAULT_EXPORT_DIR))
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--apply", action="store_true", help="create custodian and exclude list")
    mode.add_argument("--dry-run", action="store_true", help="change nothing in the case (default)")
    p.add_argument("--include-excluded", action="store_true",
                   help="let already excluded items act as seeds (audited)")
    p.add_argument("--custodian", help="custodian name (default 'Privileged <seed> <date>')")
    p.add_argument("--workers", type=_positive, default=1)

    p = sub.add_parser("baseline", help="metadata-only comparison filters")
    p.add_argument("--case", required=True)
    p.add_argument("--mode", required=True, choices=["metadata", "email-only"])
    p.add_argument("--seed-address", required=True)

    p = sub.add_parser("search", help="exclusion-aware search")
    p.add_argument("--case", required=True)
    query = p.add_mutually_exclusive_group(required=True)
    query.add_argument("--md5")
    query.add_argument("--address")
    query.add_argument("--terms", help="comma-separated terms, all must match")
    p.add_argument("--include-excluded", action="store_true")

    p = sub.add_parser("gen-corpus", help="write the synthetic three-machine test corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sentinel", help=argparse.SUPPRESS)

    p = sub.add_parser("report", help="summarize a case")
    p.add_argument("--case", required=True)
    return parser


def _load(case_dir: str) -> cases.Case:
    try:
        return cases.load_case(case_dir)
    except cases.CaseError as exc:
        raise UsageError(str(exc)) from exc


def _say(line: str = "") -> None:
    print(line, flush=True)


def cmd_ingest(args) -> int:
    case_dir = Path(args.case)
    if (case_dir / cases.CASE_FILE).exists():
        raise cases.CaseError(f"case already exists: {case_dir}")
    with cases.case_lock(case_dir):
        corpus = scan_evidence(args.root, workers=args.workers)
        case = cases.new_case(case_dir, corpus, ShingleConfig(window=args.window))
        cases.save_case(case)
        (case_dir / REPORT_FILE).write_text(ingest_report(corpus), encoding="utf-8")
    kinds = Counter(item.kind.value for item in corpus.items.values())
    _say(f"Ingested {len(corpus)} items ({len(corpus.top_level)} top-level files, "
         f"{len({i.md5 for i in corpus.items.values()})} unique MD5)")
    for kind in Kind:
        _say(f"  {kind.value}: {kinds.get(kind.value, 0)}")
    _say(f"Indexed {len(case.index.sizes)} items for near-duplicate search")
    if corpus.warnings:
        _say(f"{len(corpus.warnings)} ingest warning(s); see {case_dir / REPORT_FILE}")
    unsearchable = detect_unsearchable(corpus)
    if unsearchable:
        _say(unsearchable_warning(len(unsearchable)))
    return EXIT_OK


def _prompt_address() -> Optional[str]:
    if not sys.stdin.isatty():
        return None
    value = input("Privileged e-mail address: ").strip()
    return value or None


def cmd_filter(args) -> int:
    case = _load(args.case)
    cfg = FilterConfig(threshold=args.threshold, apply_changes=args.apply,
                       export_dir=Path(args.export_dir).expanduser(), custodian_name=args.custodian)
    address = args.seed_address
    if not address and not args.seed_item:
        address = _prompt_address()
        if not address:
            raise UsageError("filter needs --seed-address or --seed-item")

    unsearchable = detect_unsearchable(case.corpus)
    if unsearchable:
        _say(unsearchable_warning(len(unsearchable)))

    try:
        prepare_dir(cfg.export_dir)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXPORT

    if address:
        seeds = seed_from_address(address, case.corpus)
        hidden = seeds.all_items & case.excluded
        if not args.include_excluded:
            seeds = SeedSets(case.visible(seeds.from_items), case.visible(seeds.to_items))
        _say(f"Found {len(seeds.from_items)} FROM e-mails and attachments for {address}")
        _say(f"Found {len(seeds.to_items)} TO e-mails and attachments for {address}")
        seed_label = address
    else:
        unknown = [g for g in args.seed_item if g not in case.corpus]
        if unknown:
            raise UsageError(f"unknown item guid(s): {', '.join(unknown)}")
        selected = set(args.seed_item)
        hidden = selected & case.excluded
        seeds = selected if args.include_excluded else case.visible(selected)
        _say(f"Found {len(seeds)} selected items")
        seed_label = "selection"
    if hidden:
        if args.include_excluded:
            case.record("filter_include_excluded", seeds_from_excluded=len(hidden))
        else:
            _say(f"{len(hidden)} seed item(s) are already excluded and were skipped")

    _say("Searching for related items. This could take a while.")
    result = run_filter(seeds, case.corpus, case.index, cfg, workers=args.workers)
    unique = result.stats["total"]["unique"]
    _say(f"Privileged items: {len(result.privileged)} ({unique} unique)")
    for kind, count in result.stats["kind"].items():
        _say(f"  {kind}: {count}")
    for reason, count in result.stats["reason"].items():
        _say(f"  {reason}: {count}")

    if not result.privileged:
        _say("No privileged items found; nothing to block or export.")
        if hidden and args.include_excluded:
            with cases.case_lock(case.case_dir):
                cases.save_case(case)
        return EXIT_OK

    if cfg.apply_changes:
        name = cfg.custodian_name or f"Privileged {seed_label} {date.today().isoformat()}"
        with cases.case_lock(case.case_dir):
            cases.create_custodian(case, name, result.privileged)
            cases.exclude_items(case, result.privileged)
            cases.save_case(case)
        _say(f"Custodian created with {len(result.privileged)} items; "
             f"{len(case.excluded)} items now excluded")
    else:
        if hidden and args.include_excluded:
            with cases.case_lock(case.case_dir):
                cases.save_case(case)
        _say("Dry run: case not modified")

    manifest = export_set(result.privileged, case, cfg.export_dir, workers=args.workers)
    _say(f"Complete: {len(result.privileged)} privileged items, "
         f"{len(manifest.rows)} unique items listed in the export manifest")
    return EXIT_OK


def cmd_baseline(args) -> int:
    case = _load(args.case)
    method = baseline_metadata if args.mode == "metadata" else baseline_email_only
    found = case.visible(method(args.seed_address, case.corpus))
    unique = len({case.corpus[g].md5 for g in found})
    _say(f"baseline={args.mode} total={len(found)} unique={unique}")
    return EXIT_OK


def cmd_search(args) -> int:
    case = _load(args.case)
    terms = [t.strip() for t in args.terms.split(",") if t.strip()] if args.terms is not None else None
    if terms is not None and not terms:
        raise UsageError("--terms needs at least one term")
    try:
        found = cases.search(case, address=args.address, terms=terms, md5=args.md5,
                             include_excluded=args.include_excluded)
    except cases.CaseError as exc:
        raise UsageError(str(exc)) from exc
    if args.include_excluded:
        with cases.case_lock(case.case_dir):
            cases.save_case(case)
    _say(f"results={len(found)}")
    for guid in sorted(found):
        _say(f"{guid}\t{case.corpus[guid].kind.value}")
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    truth = generate(args.out, args.seed, sentinel=args.sentinel)
    table = truth.table_one()
    _say(f"Generated corpus under {Path(args.out) / 'evidence'}")
    _say(f"Ground truth: {len(truth.rows)} items, {table['total_unique'][0]} unique, "
         f"{table['total_unique'][1]} privileged unique")
    for category in ("email", "attachment", "desktop"):
        total, privileged = table[category]
        _say(f"  {category}: {total} unique, {privileged} privileged")
    return EXIT_OK


def cmd_report(args) -> int:
    case = _load(args.case)
    corpus = case.corpus
    kinds = Counter(item.kind.value for item in corpus.items.values())
    _say(f"Items: {len(corpus)} ({len(corpus.top_level)} top-level, "
         f"{len({i.md5 for i in corpus.items.values()})} unique MD5)")
    for kind in Kind:
        _say(f"  {kind.value}: {kinds.get(kind.value, 0)}")
    _say(f"Custodians: {len(case.custodians)}")
    for name, members in sorted(case.custodians.items()):
        unique = len({corpus[g].md5 for g in members})
        _say(f"  {name}: {len(members)} items, {unique} unique")
    _say(f"Excluded items: {len(case.excluded)}")
    _say(f"Unsearchable PDF items: {len(detect_unsearchable(corpus))}")
    _say(f"Audit events: {len(case.audit_log)}")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "filter": cmd_filter,
    "baseline": cmd_baseline,
    "search": cmd_search,
    "gen-corpus": cmd_gen_corpus,
    "report": cmd_report,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logger = logging.getLogger("privfilter")
    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(logging.Formatter("%(message)s"))
    previous = (logger.level, logger.propagate)
    logger.addHandler(handler)
    logger.setLevel(logging.INFO)
    logger.propagate = False
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXPORT
    except (cases.CaseError, IngestError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    finally:
        logger.removeHandler(handler)
        logger.setLevel(previous[0])
        logger.propagate = previous[1]


if __name__ == "__main__":
    sys.exit(main())
