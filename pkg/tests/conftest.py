from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from privfilter.corpus import EVIDENCE_DIR, LAWYER, generate  # noqa: E402
from privfilter.ingest import scan_evidence  # noqa: E402
from privfilter.relations import FilterConfig, run_filter, seed_from_address  # noqa: E402
from privfilter.shingles import build_index  # noqa: E402


class ScenarioCorpus:
    """Generated three-machine corpus, ingested and indexed once per session."""

    def __init__(self, out: Path):
        self.out = out
        self.root = out / EVIDENCE_DIR
        self.truth = generate(out, rng_seed=0)
        self.corpus = scan_evidence(self.root)
        self.index = build_index(self.corpus)
        self.by_path = {i.source_path: i for i in self.corpus.items.values()}

    def guid(self, path: str) -> str:
        return self.by_path[path].guid

    def filter(self, threshold: float = 0.9):
        seeds = seed_from_address(LAWYER, self.corpus)
        return run_filter(seeds, self.corpus, self.index, FilterConfig(threshold=threshold))

    def paths(self, guids) -> set[str]:
        return {self.corpus[g].source_path for g in guids}


@pytest.fixture(scope="session")
def scenario(tmp_path_factory) -> ScenarioCorpus:
    return ScenarioCorpus(tmp_path_factory.mktemp("scenario"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, text = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}")
