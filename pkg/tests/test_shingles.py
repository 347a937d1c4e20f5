import random

import pytest
from hypothesis import given, settings, strategies as st

from privfilter.shingles import (
    NearDupIndex,
    ShingleConfig,
    check_threshold,
    query_near,
    resemblance,
    shingle_set,
    tokenize,
)

import oracles

THRESHOLDS = (0.5, 0.8, 0.9, 1.0)
vocab = st.sampled_from("alpha beta gamma delta eps zeta eta theta iota kappa".split())
token_lists = st.lists(vocab, max_size=40)


def test_tokenize_examples():
    assert tokenize("Dear Mr. Doe,") == ["dear", "mr", "doe"]
    assert tokenize("") == []
    assert tokenize("file1_2") == ["file1", "2"]


def test_shingle_counts():
    assert len(shingle_set(list("abcdef"))) == 2
    assert shingle_set(list("abcd")) == frozenset()
    assert len(shingle_set([f"w{i}" for i in range(200)])) == 196
    assert shingle_set(["a"] * 10) == frozenset({"a a a a a"})
    with pytest.raises(ValueError):
        shingle_set(["a", "b"], window=1)


def test_config_validation():
    with pytest.raises(ValueError):
        ShingleConfig(threshold=1.1)
    with pytest.raises(ValueError):
        ShingleConfig(threshold=0)
    with pytest.raises(ValueError):
        ShingleConfig(window=1)
    assert check_threshold(1.0) == 1.0


def test_resemblance_examples():
    a = shingle_set([f"w{i}" for i in range(10)])
    assert resemblance(a, a) == 1.0
    assert resemblance(a, shingle_set([f"v{i}" for i in range(10)])) == 0.0
    assert resemblance(a, frozenset()) == 0.0


def test_five_interior_words_removed():
    words = [f"w{i}" for i in range(200)]
    cut = words[:100] + words[105:]
    expected = oracles.jaccard(oracles.shingles(" ".join(words)), oracles.shingles(" ".join(cut)))
    assert expected == 187 / 200
    assert resemblance(shingle_set(words), shingle_set(cut)) == 187 / 200


@given(token_lists, token_lists)
def test_resemblance_matches_oracle_and_is_symmetric(a, b):
    sa, sb = shingle_set(a), shingle_set(b)
    ours = resemblance(sa, sb)
    assert ours == resemblance(sb, sa)
    assert ours == oracles.jaccard(oracles.shingles(" ".join(a)), oracles.shingles(" ".join(b)))
    if sa:
        assert resemblance(sa, sa) == 1.0


def _random_texts(rng: random.Random, n: int) -> dict[str, str]:
    """Texts drawn from a small vocabulary, some mutated copies of others."""
    words = [f"t{i}" for i in range(30)]
    texts: dict[str, str] = {}
    for i in range(n):
        if texts and rng.random() < 0.5:
            base = rng.choice(list(texts.values())).split()
            for _ in range(rng.randint(0, 4)):
                pos = rng.randrange(len(base))
                base[pos] = rng.choice(words)
            texts[f"g{i:03d}"] = " ".join(base)
        else:
            texts[f"g{i:03d}"] = " ".join(rng.choices(words, k=rng.randint(10, 400)))
    return texts


@pytest.mark.parametrize("seed", range(5))
def test_index_matches_brute_force(seed):
    texts = _random_texts(random.Random(seed), 40)
    texts["empty"] = ""
    texts["short"] = "t1 t2"
    index = NearDupIndex.from_texts(texts)
    assert "empty" not in index.sizes and "short" not in index.sizes
    matrix = oracles.pairwise(texts)
    for t in THRESHOLDS:
        for guid in texts:
            assert query_near(guid, index, t) == oracles.brute_near(texts, guid, t, matrix=matrix)
            assert index.chained(guid, t) == oracles.brute_chained(texts, guid, t, matrix=matrix)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.sampled_from([f"g{i}" for i in range(8)]),
                       token_lists.map(" ".join), max_size=8),
       st.floats(min_value=0.05, max_value=1.0))
def test_index_matches_brute_force_hypothesis(texts, t):
    index = NearDupIndex.from_texts(texts)
    for guid in texts:
        near = index.query_near(guid, t)
        assert near == oracles.brute_near(texts, guid, t)
        assert guid not in near


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.sampled_from([f"g{i}" for i in range(8)]),
                       token_lists.map(" ".join), max_size=8),
       st.floats(min_value=0.05, max_value=1.0), st.floats(min_value=0.05, max_value=1.0))
def test_threshold_monotone(texts, t1, t2):
    lo, hi = sorted((t1, t2))
    index = NearDupIndex.from_texts(texts)
    for guid in texts:
        assert index.query_near(guid, hi) <= index.query_near(guid, lo)


def test_postings_cover_exactly_item_shingles():
    texts = {"a": "one two three four five six", "b": "one two three four five six", "c": "img"}
    index = NearDupIndex.from_texts(texts)
    for guid in ("a", "b"):
        assert index.sizes[guid] == 2
        for key in index.shingles[guid]:
            assert guid in index.postings[key]
    assert all("c" not in members for members in index.postings.values())
    assert index.query_near("a", 1.0) == {"b"}
    assert index.query_near("c", 0.5) == frozenset()


def test_images_only_gives_empty_index():
    assert not NearDupIndex.from_texts({"a": None, "b": None}).postings


def test_scenario_file1_neighbours(scenario):
    file1 = scenario.guid("Suspect/Desktop/file1.docx")
    near = scenario.paths(scenario.index.query_near(file1, 0.9))
    assert {"Suspect/Desktop/file1_1.docx", "Suspect/Desktop/file1_2.pdf"} <= near
    assert scenario.guid("Suspect/Desktop/file1_2.pdf") in scenario.index.sizes
    texts = {g: i.text for g, i in scenario.corpus.items.items()}
    assert scenario.index.query_near(file1, 0.9) == oracles.brute_near(texts, file1, 0.9)
