"""Seed-driven privileged-set computation and the metadata-only baselines.

Content relations (MD5 duplicates, near-duplicates, chained duplicates) are
followed only from the FROM side of an address seed. Items found on the TO
side are flagged together with their attachments but never expanded, so a
message sent to the privileged address and to bystanders does not drag the
bystanders' copies in through content similarity.
"""

from __future__ import annotations

import logging
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .ingest import CorpusSnapshot
from .model import normalize_address
from .shingles import DEFAULT_THRESHOLD, NearDupIndex, check_threshold, tokenize

log = logging.getLogger(__name__)

DEFAULT_EXPORT_DIR = Path("~/Desktop/NUIX_PrivilegedItems_Export")

ITEM_LINE = ("Searching relations for item {i} ({kind}) of {n}. | found {d} duplicate, "
             "{nd} nearDuplicate, {cd} chainedDuplicate for this item")


class Reason(str, Enum):
    SEED_FROM = "seed_from"
    SEED_TO = "seed_to"
    ADDRESS_FAMILY = "address_family"
    MD5_DUPLICATE = "md5_duplicate"
    NEAR_DUPLICATE = "near_duplicate"
    CHAINED_DUPLICATE = "chained_duplicate"
    FAMILY_OF_FLAGGED = "family_of_flagged"


@dataclass
class FilterConfig:
    threshold: float = DEFAULT_THRESHOLD
    apply_changes: bool = False
    export_dir: Path = DEFAULT_EXPORT_DIR
    custodian_name: Optional[str] = None

    def __post_init__(self) -> None:
        check_threshold(self.threshold)


@dataclass
class SeedSets:
    from_items: set[str] = field(default_factory=set)
    to_items: set[str] = field(default_factory=set)

    @property
    def all_items(self) -> set[str]:
        return self.from_items | self.to_items


@dataclass
class RelationFindings:
    duplicates: frozenset[str] = frozenset()
    near_duplicates: frozenset[str] = frozenset()
    chained_duplicates: frozenset[str] = frozenset()

    @property
    def related(self) -> frozenset[str]:
        return self.duplicates | self.near_duplicates | self.chained_duplicates


@dataclass
class FilterResult:
    privileged: set[str] = field(default_factory=set)
    provenance: dict[str, Reason] = field(default_factory=dict)
    stats: dict[str, dict[str, int]] = field(default_factory=dict)


def _matching_emails(corpus: CorpusSnapshot, addr: str, fields: tuple[str, ...]) -> list[str]:
    addr = normalize_address(addr)
    found = []
    for item in corpus.emails():
        if any(addr in getattr(item.email, f) for f in fields):
            found.append(item.guid)
    return found


def seed_from_address(addr: str, corpus: CorpusSnapshot) -> SeedSets:
    """E-mails with ``addr`` in From (resp. To), each with its descendants.

    CC and BCC are deliberately ignored.
    """
    return SeedSets(
        from_items=corpus.with_descendants(_matching_emails(corpus, addr, ("from_addresses",))),
        to_items=corpus.with_descendants(_matching_emails(corpus, addr, ("to_addresses",))),
    )


def baseline_metadata(addr: str, corpus: CorpusSnapshot) -> set[str]:
    return seed_from_address(addr, corpus).all_items


def baseline_email_only(addr: str, corpus: CorpusSnapshot) -> set[str]:
    return set(_matching_emails(corpus, addr, ("from_addresses", "to_addresses")))


def expand_item(guid: str, index: NearDupIndex, corpus: CorpusSnapshot,
                threshold: float = DEFAULT_THRESHOLD) -> RelationFindings:
    duplicates = frozenset(g for g in corpus.by_md5()[corpus[guid].md5] if g != guid)
    return RelationFindings(
        duplicates=duplicates,
        near_duplicates=index.query_near(guid, threshold),
        chained_duplicates=index.chained(guid, threshold),
    )


_PRIORITY = {Reason.MD5_DUPLICATE: 0, Reason.NEAR_DUPLICATE: 1,
             Reason.CHAINED_DUPLICATE: 2, Reason.FAMILY_OF_FLAGGED: 3}


def _offer(candidates: dict[str, Reason], guid: str, reason: Reason) -> None:
    current = candidates.get(guid)
    if current is None or _PRIORITY[reason] < _PRIORITY[current]:
        candidates[guid] = reason


def _stats(result: FilterResult, corpus: CorpusSnapshot) -> dict[str, dict[str, int]]:
    by_reason = Counter(reason.value for reason in result.provenance.values())
    by_kind = Counter(corpus[g].kind.value for g in result.privileged)
    unique = len({corpus[g].md5 for g in result.privileged})
    return {
        "reason": dict(sorted(by_reason.items())),
        "kind": dict(sorted(by_kind.items())),
        "total": {"items": len(result.privileged), "unique": unique},
    }


def run_filter(seeds: SeedSets | Iterable[str], corpus: CorpusSnapshot, index: NearDupIndex,
               cfg: FilterConfig = FilterConfig(), *, workers: int = 1,
               order_rng: Optional[random.Random] = None) -> FilterResult:
    """Close the seed set under family, duplicate and near-duplicate relations.

    Work proceeds in rounds: every queued item of a round is expanded (in
    parallel when ``workers`` > 1), then findings are merged in queue order.
    ``order_rng`` shuffles the queue of each round. Neither the privileged
    set nor the provenance depends on it; only the log line order does.
    """
    threshold = check_threshold(cfg.threshold)
    result = FilterResult()

    def flag(guid: str, reason: Reason) -> None:
        if guid not in result.privileged:
            result.privileged.add(guid)
            result.provenance[guid] = reason

    if isinstance(seeds, SeedSets):
        for guid in sorted(seeds.from_items):
            is_root = corpus[guid].parent not in seeds.from_items
            flag(guid, Reason.SEED_FROM if is_root else Reason.ADDRESS_FAMILY)
        for guid in sorted(seeds.to_items):
            is_root = corpus[guid].parent not in seeds.to_items
            flag(guid, Reason.SEED_TO if is_root else Reason.ADDRESS_FAMILY)
        queue = sorted(seeds.from_items)
    else:
        selected = sorted(set(seeds))
        missing = [g for g in selected if g not in corpus]
        if missing:
            raise KeyError(f"unknown item guid(s): {', '.join(missing)}")
        for guid in selected:
            flag(guid, Reason.SEED_FROM)
        for guid in sorted(corpus.with_descendants(selected)):
            flag(guid, Reason.FAMILY_OF_FLAGGED)
        queue = sorted(corpus.with_descendants(selected))

    if not result.privileged:
        log.warning("No seed items found; nothing to filter.")
        result.stats = _stats(result, corpus)
        return result

    enqueued = set(queue)
    processed = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while queue:
            if order_rng is not None:
                order_rng.shuffle(queue)
            expand = lambda g: expand_item(g, index, corpus, threshold)  # noqa: E731
            findings = list(pool.map(expand, queue)) if pool else [expand(g) for g in queue]
            # collect a round's candidates first so the reason an item gets
            # does not depend on which queue entry found it
            candidates: dict[str, Reason] = {}
            for guid, found in zip(queue, findings):
                log.info(ITEM_LINE.format(
                    i=processed, kind=corpus[guid].kind.value, n=len(enqueued),
                    d=len(found.duplicates), nd=len(found.near_duplicates),
                    cd=len(found.chained_duplicates)))
                processed += 1
                for other in found.related:
                    if other in found.duplicates:
                        reason = Reason.MD5_DUPLICATE
                    elif other in found.near_duplicates:
                        reason = Reason.NEAR_DUPLICATE
                    else:
                        reason = Reason.CHAINED_DUPLICATE
                    _offer(candidates, other, reason)
                    for child in corpus.descendants(other):
                        _offer(candidates, child, Reason.FAMILY_OF_FLAGGED)
            next_queue: list[str] = []
            for other in sorted(candidates):
                flag(other, candidates[other])
                if other not in enqueued:
                    enqueued.add(other)
                    next_queue.append(other)
            queue = sorted(next_queue)
    finally:
        if pool:
            pool.shutdown()

    result.stats = _stats(result, corpus)
    return result


def keyword_search(terms: Iterable[str], corpus: CorpusSnapshot,
                   excluded: Iterable[str] = ()) -> set[str]:
    """Items whose text contains every term on token boundaries.

    Results are leads for a human reviewer; nothing here flags items.
    """
    patterns = [tokenize(t) for t in terms]
    patterns = [p for p in patterns if p]
    if not patterns:
        raise ValueError("keyword search needs at least one non-empty term")
    hidden = set(excluded)
    found = set()
    for guid, item in corpus.items.items():
        if guid in hidden or not item.text:
            continue
        tokens = tokenize(item.text)
        joined = " " + " ".join(tokens) + " "
        if all(" " + " ".join(p) + " " in joined for p in patterns):
            found.add(guid)
    return found


def unique_md5s(guids: Iterable[str], corpus: CorpusSnapshot) -> set[str]:
    return {corpus[g].md5 for g in guids}

