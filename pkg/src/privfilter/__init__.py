"""Privilege filtering for forensic e-mail and document corpora.

Typical use::

    corpus = scan_evidence("evidence/")
    index = build_index(corpus)
    result = run_filter(seed_from_address("lawyer@domain.ext", corpus), corpus, index)
"""

from .case import Case, CaseError, create_custodian, exclude_items, load_case, new_case, save_case, search
from .export import ExportManifest, ExportStatus, export_set, read_manifest
from .ingest import CorpusSnapshot, scan_evidence
from .model import EvidenceItem, Kind
from .relations import (
    FilterConfig,
    FilterResult,
    SeedSets,
    baseline_email_only,
    baseline_metadata,
    run_filter,
    seed_from_address,
)
from .shingles import NearDupIndex, ShingleConfig, build_index, resemblance, shingle_set

__version__ = "0.1.0"

__all__ = [
    "Case", "CaseError", "create_custodian", "exclude_items", "load_case", "new_case", "save_case", "search",
    "ExportManifest", "ExportStatus", "export_set", "read_manifest",
    "CorpusSnapshot", "scan_evidence",
    "EvidenceItem", "Kind",
    "FilterConfig", "FilterResult", "SeedSets", "baseline_email_only", "baseline_metadata",
    "run_filter", "seed_from_address",
    "NearDupIndex", "ShingleConfig", "build_index", "resemblance", "shingle_set",
]
