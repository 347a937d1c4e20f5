"""Word shingles, Jaccard resemblance and an inverted index for threshold queries."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional

DEFAULT_WINDOW = 5
DEFAULT_THRESHOLD = 0.9

_TOKEN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class ShingleConfig:
    window: int = DEFAULT_WINDOW
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self) -> None:
        if self.window < 2:
            raise ValueError(f"shingle window must be at least 2, got {self.window}")
        check_threshold(self.threshold)


def check_threshold(threshold: float) -> float:
    if not 0 < threshold <= 1:
        raise ValueError(f"resemblance threshold must be in (0, 1], got {threshold}")
    return threshold


def tokenize(text: str) -> list[str]:
    """Lowercased maximal runs of letters and digits; underscores split."""
    return [t.lower() for t in _TOKEN.findall(text)]


def shingle_set(tokens: list[str], window: int = DEFAULT_WINDOW) -> frozenset[str]:
    if window < 2:
        raise ValueError(f"shingle window must be at least 2, got {window}")
    return frozenset(" ".join(tokens[i:i + window]) for i in range(len(tokens) - window + 1))


def resemblance(a: frozenset[str] | set[str], b: frozenset[str] | set[str]) -> float:
    if not a or not b:
        return 0.0
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


@dataclass
class NearDupIndex:
    """Inverted map from shingle to the guids whose text contains it."""

    window: int = DEFAULT_WINDOW
    postings: dict[str, set[str]] = field(default_factory=dict)
    sizes: dict[str, int] = field(default_factory=dict)
    shingles: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        # per-item resemblance to every overlapping item, shared by all thresholds
        self._scores: dict[str, dict[str, float]] = {}
        self._near_cache: dict[tuple[str, float], frozenset[str]] = {}

    def __contains__(self, guid: object) -> bool:
        return guid in self.sizes

    def add(self, guid: str, text: Optional[str]) -> None:
        if not text:
            return
        keys = shingle_set(tokenize(text), self.window)
        if not keys:
            return
        self.shingles[guid] = keys
        self.sizes[guid] = len(keys)
        for key in keys:
            self.postings.setdefault(key, set()).add(guid)
        self._scores.clear()
        self._near_cache.clear()

    @classmethod
    def from_texts(cls, texts: Mapping[str, Optional[str]], window: int = DEFAULT_WINDOW) -> NearDupIndex:
        index = cls(window=window)
        for guid in sorted(texts):
            index.add(guid, texts[guid])
        return index

    def overlaps(self, guid: str) -> Counter:
        """Shared-shingle counts between ``guid`` and every other indexed item."""
        counts: Counter = Counter()
        for key in self.shingles.get(guid, ()):
            counts.update(self.postings[key])
        counts.pop(guid, None)
        return counts

    def scores(self, guid: str) -> dict[str, float]:
        """Resemblance of ``guid`` to every item sharing at least one shingle."""
        cached = self._scores.get(guid)
        if cached is None:
            size = self.sizes.get(guid, 0)
            cached = {other: inter / (size + self.sizes[other] - inter)
                      for other, inter in self.overlaps(guid).items()}
            self._scores[guid] = cached
        return cached

    def query_near(self, guid: str, threshold: float) -> frozenset[str]:
        cached = self._near_cache.get((guid, threshold))
        if cached is None:
            cached = frozenset(o for o, r in self.scores(guid).items() if r >= threshold)
            self._near_cache[(guid, threshold)] = cached
        return cached

    def chained(self, guid: str, threshold: float) -> frozenset[str]:
        """Items reachable from ``guid`` through near-duplicate links."""
        seen = {guid}
        frontier = [guid]
        while frontier:
            nxt = []
            for current in frontier:
                for other in self.query_near(current, threshold):
                    if other not in seen:
                        seen.add(other)
                        nxt.append(other)
            frontier = nxt
        seen.discard(guid)
        return frozenset(seen)


def build_index(corpus, cfg: ShingleConfig = ShingleConfig()) -> NearDupIndex:
    return NearDupIndex.from_texts({g: item.text for g, item in corpus.items.items()}, cfg.window)


def query_near(guid: str, index: NearDupIndex, threshold: float) -> frozenset[str]:
    check_threshold(threshold)
    return index.query_near(guid, threshold)

