"""Independent reference implementations used only by tests.

These avoid the package's index and tokenizer code paths on purpose: shingles
are tuples rather than joined strings and resemblance is computed pairwise.
"""

from __future__ import annotations

def words(text: str) -> list[str]:
    out, cur = [], []
    for ch in text:
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur).lower())
            cur = []
    if cur:
        out.append("".join(cur).lower())
    return out


def shingles(text: str, w: int = 5) -> set[tuple[str, ...]]:
    toks = words(text)
    return {tuple(toks[i:i + w]) for i in range(len(toks) - w + 1)}


def jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def pairwise(texts: dict[str, str], w: int = 5) -> dict[str, dict[str, float]]:
    """Full resemblance matrix over items with a non-empty shingle set."""
    ids: dict[tuple[str, ...], int] = {}
    sets = {g: {ids.setdefault(sh, len(ids)) for sh in shingles(x, w)} for g, x in texts.items() if x}
    sets = {g: s for g, s in sets.items() if s}
    keys = sorted(sets)
    matrix: dict[str, dict[str, float]] = {g: {} for g in keys}
    for i, g in enumerate(keys):
        for h in keys[i + 1:]:
            r = jaccard(sets[g], sets[h])
            matrix[g][h] = matrix[h][g] = r
    return matrix


def brute_near(texts: dict[str, str], guid: str, t: float, w: int = 5,
               matrix: dict | None = None) -> frozenset[str]:
    matrix = matrix if matrix is not None else pairwise(texts, w)
    return frozenset(h for h, r in matrix.get(guid, {}).items() if r >= t)


def brute_chained(texts: dict[str, str], guid: str, t: float, w: int = 5,
                  matrix: dict | None = None) -> frozenset[str]:
    matrix = matrix if matrix is not None else pairwise(texts, w)
    seen, frontier = {guid}, [guid]
    while frontier:
        nxt = []
        for g in frontier:
            for h in brute_near(texts, g, t, w, matrix):
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return frozenset(seen - {guid})
