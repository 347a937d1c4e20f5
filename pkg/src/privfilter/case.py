"""Persistent case state: corpus, custodians, exclude list and audit trail.

On disk a case directory holds::

    case.json     metadata, config, custodians and the exclude list
    items.jsonl   one evidence item per line, sorted by guid
    audit.log     append-only, one tab-separated event per line
    case.lock     single-writer lock

The near-duplicate index is derived data and is rebuilt on load.
"""

from __future__ import annotations

import json
import os
import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from filelock import FileLock, Timeout

from .ingest import CorpusSnapshot
from .model import EvidenceItem
from .relations import baseline_metadata, keyword_search
from .shingles import DEFAULT_WINDOW, NearDupIndex, build_index, ShingleConfig

SCHEMA_VERSION = 1
CASE_FILE = "case.json"
ITEMS_FILE = "items.jsonl"
AUDIT_FILE = "audit.log"
LOCK_FILE = "case.lock"

_MD5 = re.compile(r"[0-9a-f]{32}")


class CaseError(Exception):
    """Invalid case operation or unreadable case directory."""


@dataclass
class AuditEvent:
    timestamp: str
    action: str
    details: dict

    def to_line(self) -> str:
        return f"{self.timestamp}\t{self.action}\t{json.dumps(self.details, sort_keys=True)}"

    @classmethod
    def from_line(cls, line: str) -> AuditEvent:
        timestamp, action, details = line.rstrip("\n").split("\t", 2)
        return cls(timestamp, action, json.loads(details))


@dataclass
class Case:
    case_dir: Path
    corpus: CorpusSnapshot
    index: NearDupIndex
    window: int = DEFAULT_WINDOW
    custodians: dict[str, set[str]] = field(default_factory=dict)
    excluded: set[str] = field(default_factory=set)
    audit_log: list[AuditEvent] = field(default_factory=list)
    persisted_events: int = 0

    def record(self, action: str, **details) -> AuditEvent:
        event = AuditEvent(datetime.now(timezone.utc).isoformat(timespec="seconds"),
                           action, details)
        self.audit_log.append(event)
        return event

    def visible(self, guids: Iterable[str]) -> set[str]:
        return {g for g in guids if g not in self.excluded}


def new_case(case_dir: str | os.PathLike, corpus: CorpusSnapshot,
             cfg: ShingleConfig = ShingleConfig()) -> Case:
    case = Case(case_dir=Path(case_dir), corpus=corpus, index=build_index(corpus, cfg),
                window=cfg.window)
    case.record("ingest", root=corpus.root, items=len(corpus),
                top_level=len(corpus.top_level), warnings=len(corpus.warnings))
    return case


def _check_known(case: Case, items: Iterable[str]) -> list[str]:
    items = sorted(set(items))
    unknown = [g for g in items if g not in case.corpus]
    if unknown:
        raise CaseError(f"unknown item guid(s): {', '.join(unknown)}")
    return items


def create_custodian(case: Case, name: str, items: Iterable[str]) -> Case:
    if not name or not name.strip():
        raise CaseError("custodian name must not be empty")
    if name in case.custodians:
        raise CaseError(f"custodian already exists: {name}")
    members = _check_known(case, items)
    case.custodians[name] = set(members)
    case.record("create_custodian", name=name, items=len(members))
    return case


def exclude_items(case: Case, items: Iterable[str]) -> Case:
    """Add items to the exclude list; all guids are checked before any change."""
    members = _check_known(case, items)
    added = [g for g in members if g not in case.excluded]
    case.excluded.update(added)
    if members:
        case.record("exclude_items", requested=len(members), added=len(added),
                    total_excluded=len(case.excluded))
    return case


def search(case: Case, *, address: Optional[str] = None, terms: Optional[list[str]] = None,
           md5: Optional[str] = None, include_excluded: bool = False) -> set[str]:
    """Run exactly one of an address, keyword or MD5 query.

    Excluded items are suppressed unless ``include_excluded`` is set, which is
    itself an audited action.
    """
    given = [q is not None for q in (address, terms, md5)]
    if sum(given) != 1:
        raise CaseError("search takes exactly one of address, terms or md5")
    if md5 is not None:
        md5 = md5.strip().lower()
        if not _MD5.fullmatch(md5):
            raise CaseError("md5 query must be 32 hexadecimal characters")
        found = set(case.corpus.by_md5().get(md5, []))
        kind = "md5"
    elif address is not None:
        found = baseline_metadata(address, case.corpus)
        kind = "address"
    else:
        found = keyword_search(terms, case.corpus)
        kind = "terms"
    if include_excluded:
        case.record("search_include_excluded", query_kind=kind, results=len(found),
                    excluded_results=len(found & case.excluded))
        return found
    return case.visible(found)


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def save_case(case: Case) -> None:
    case.case_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "corpus_root": case.corpus.root,
        "config": {"window": case.window},
        "top_level": case.corpus.top_level,
        "warnings": case.corpus.warnings,
        "custodians": {name: sorted(members) for name, members in sorted(case.custodians.items())},
        "excluded": sorted(case.excluded),
    }
    _write_atomic(case.case_dir / CASE_FILE,
                  (json.dumps(meta, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    lines = [json.dumps(case.corpus.items[g].to_dict(), sort_keys=True, ensure_ascii=False)
             for g in sorted(case.corpus.items)]
    _write_atomic(case.case_dir / ITEMS_FILE, ("\n".join(lines) + "\n" if lines else "").encode("utf-8"))
    pending = case.audit_log[case.persisted_events:]
    if pending or not (case.case_dir / AUDIT_FILE).exists():
        with open(case.case_dir / AUDIT_FILE, "a", encoding="utf-8") as fh:
            for event in pending:
                fh.write(event.to_line() + "\n")
    case.persisted_events = len(case.audit_log)


def load_case(case_dir: str | os.PathLike) -> Case:
    case_dir = Path(case_dir)
    meta_path = case_dir / CASE_FILE
    if not meta_path.is_file() or not (case_dir / ITEMS_FILE).is_file():
        raise CaseError(f"not a case directory (missing {CASE_FILE} or {ITEMS_FILE}): {case_dir}")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CaseError(f"{CASE_FILE} is not valid JSON: {exc}") from exc
    version = meta.get("schema_version")
    if version != SCHEMA_VERSION:
        raise CaseError(f"unsupported case schema_version {version!r}; expected {SCHEMA_VERSION}")
    for key in ("corpus_root", "config", "top_level", "custodians", "excluded"):
        if key not in meta:
            raise CaseError(f"{CASE_FILE} is missing required field {key!r}")

    corpus = CorpusSnapshot(root=meta["corpus_root"], warnings=list(meta.get("warnings", [])))
    with open(case_dir / ITEMS_FILE, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                corpus.add(EvidenceItem.from_dict(json.loads(line)))
            except (KeyError, ValueError) as exc:
                raise CaseError(f"{ITEMS_FILE} line {n} is invalid: {exc}") from exc
    corpus.top_level = list(meta["top_level"])

    window = int(meta["config"].get("window", DEFAULT_WINDOW))
    audit: list[AuditEvent] = []
    audit_path = case_dir / AUDIT_FILE
    if audit_path.exists():
        audit = [AuditEvent.from_line(line)
                 for line in audit_path.read_text(encoding="utf-8").splitlines() if line.strip()]
    case = Case(
        case_dir=case_dir,
        corpus=corpus,
        index=build_index(corpus, ShingleConfig(window=window)),
        window=window,
        custodians={name: set(members) for name, members in meta["custodians"].items()},
        excluded=set(meta["excluded"]),
        audit_log=audit,
        persisted_events=len(audit),
    )
    stray = [g for g in case.excluded if g not in corpus]
    stray += [g for members in case.custodians.values() for g in members if g not in corpus]
    if stray:
        raise CaseError(f"case references {len(stray)} unknown item guid(s)")
    return case


@contextmanager
def case_lock(case_dir: str | os.PathLike):
    """Hold the case's single-writer lock; fails at once if another writer has it."""
    case_dir = Path(case_dir)
    case_dir.mkdir(parents=True, exist_ok=True)
    lock = FileLock(str(case_dir / LOCK_FILE), timeout=0)
    try:
        lock.acquire()
    except Timeout as exc:
        raise CaseError(f"case is locked by another writer: {case_dir}") from exc
    try:
        yield
    finally:
        lock.release()
