"""Blinded export of unique privileged items as text PDFs plus a TSV file list."""

from __future__ import annotations

import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .ingest import CorpusSnapshot, normalize_text
from .model import EvidenceItem, Kind
from .pdf import text_pdf, wrap_lines

log = logging.getLogger(__name__)

MANIFEST_NAME = "privileged_file_list.tsv"
MANIFEST_COLUMNS = ("export_filename", "guid", "original_name", "original_md5",
                    "original_path", "export_status")


class ExportError(Exception):
    """The export directory cannot be used."""


class ExportStatus(str, Enum):
    EXPORTED = "exported"
    TEXT_FALLBACK = "text_fallback"
    NOT_RENDERABLE = "not_renderable"


@dataclass
class ManifestRow:
    export_filename: str
    guid: str
    original_name: str
    original_md5: str
    original_path: str
    export_status: ExportStatus


@dataclass
class ExportManifest:
    rows: list[ManifestRow] = field(default_factory=list)
    total_items: int = 0

    def to_tsv(self) -> str:
        out = io.StringIO()
        out.write("\t".join(MANIFEST_COLUMNS) + "\n")
        for row in self.rows:
            values = [row.export_filename, row.guid, _escape(row.original_name),
                      row.original_md5, _escape(row.original_path), row.export_status.value]
            out.write("\t".join(values) + "\n")
        return out.getvalue()


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def _unescape(value: str) -> str:
    out, i = [], 0
    while i < len(value):
        if value[i] == "\\" and i + 1 < len(value):
            out.append({"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}.get(value[i + 1], value[i + 1]))
            i += 2
        else:
            out.append(value[i])
            i += 1
    return "".join(out)


def read_manifest(path: str | os.PathLike) -> ExportManifest:
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    header = tuple(lines[0].split("\t"))
    if header != MANIFEST_COLUMNS:
        raise ValueError(f"unexpected manifest header: {header}")
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        r = line.split("\t")
        rows.append(ManifestRow(r[0], r[1], _unescape(r[2]), r[3], _unescape(r[4]),
                                ExportStatus(r[5])))
    return ExportManifest(rows=rows, total_items=len(rows))


def dedup_by_md5(items: Iterable[str], corpus: CorpusSnapshot) -> list[str]:
    """One guid per distinct MD5, the lowest guid of each group, ascending."""
    chosen: dict[str, str] = {}
    for guid in sorted(set(items)):
        chosen.setdefault(corpus[guid].md5, guid)
    return sorted(chosen.values())


def email_header_lines(item: EvidenceItem) -> list[str]:
    meta = item.email
    return [
        "From: " + ", ".join(meta.from_addresses),
        "To: " + ", ".join(meta.to_addresses),
        "Subject: " + meta.subject,
        "Date: " + (meta.date.isoformat() if meta.date else ""),
    ]


def rendition_text(item: EvidenceItem) -> Optional[str]:
    """Normalized text a rendition of ``item`` shows, or None if it has none."""
    if item.kind is Kind.EMAIL and item.email is not None:
        return normalize_text("\n".join(email_header_lines(item)) + "\n" + (item.text or ""))
    if item.kind is Kind.CONTAINER:
        return None
    return item.text


def render_item(item: EvidenceItem, corpus: Optional[CorpusSnapshot] = None) -> tuple[Optional[bytes], ExportStatus]:
    if item.kind is Kind.CONTAINER:
        return None, ExportStatus.NOT_RENDERABLE
    if item.kind is Kind.EMAIL and item.email is not None:
        lines = [line for h in email_header_lines(item) for line in wrap_lines(h)]
        lines.append("")
        lines.extend(wrap_lines(item.text or ""))
        return text_pdf(lines), ExportStatus.EXPORTED
    if item.text:
        return text_pdf(wrap_lines(item.text)), ExportStatus.EXPORTED
    if item.size > 0 and item.kind is not Kind.OTHER:
        placeholder = [
            "No text rendition is available for this item.",
            f"Item kind: {item.kind.value}",
            f"Size: {item.size} bytes",
            f"MD5: {item.md5}",
        ]
        return text_pdf(placeholder), ExportStatus.TEXT_FALLBACK
    return None, ExportStatus.NOT_RENDERABLE


def prepare_dir(export_dir: str | os.PathLike) -> None:
    """Create ``export_dir`` if needed; raise ExportError unless it is writable."""
    export_dir = Path(export_dir).expanduser()
    try:
        export_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create export directory {export_dir}: {exc.strerror}") from exc
    if not export_dir.is_dir() or not os.access(export_dir, os.W_OK | os.X_OK):
        raise ExportError(f"export directory is not writable: {export_dir}")


def export_set(items: Iterable[str], case, export_dir: str | os.PathLike,
               workers: int = 1) -> ExportManifest:
    """Write one rendition per unique MD5 and the manifest into ``export_dir``.

    ``case`` may be a loaded case or a bare corpus snapshot.
    """
    corpus: CorpusSnapshot = getattr(case, "corpus", case)
    export_dir = Path(export_dir).expanduser()
    prepare_dir(export_dir)
    items = set(items)
    unique = dedup_by_md5(items, corpus)
    log.info("Export: removing duplicates (MD5) from %d items in order to export only unique items",
             len(items))
    log.info("%d items left after deduplication. Exporting these items as PDF to %s",
             len(unique), export_dir)
    log.info("Informational: all items, including the duplicates, can still be found "
             "under the assigned custodian")

    renders = [corpus[g] for g in unique]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rendered = list(pool.map(render_item, renders))
    else:
        rendered = [render_item(item) for item in renders]

    manifest = ExportManifest(total_items=len(items))
    for seq, (item, (data, status)) in enumerate(zip(renders, rendered)):
        name = f"{seq}_{item.kind.value}.pdf"
        log.info("Exporting file %d of %d: %s", seq, len(unique), name)
        if data is not None:
            try:
                (export_dir / name).write_bytes(data)
            except OSError as exc:
                log.warning("Export of file %d failed: %s", seq, exc.strerror)
                status = ExportStatus.NOT_RENDERABLE
        manifest.rows.append(ManifestRow(name, item.guid, item.original_name, item.md5,
                                         item.source_path, status))
    (export_dir / MANIFEST_NAME).write_text(manifest.to_tsv(), encoding="utf-8", newline="")
    log.info("Export complete: %d unique privileged items written (%d privileged items in total)",
             len(unique), len(items))
    return manifest


def verify_manifest(manifest: ExportManifest, corpus: CorpusSnapshot) -> list[str]:
    """Check every row maps back to one item whose evidence bytes still hash to its MD5.

    Returns a list of problems, empty when the manifest is fully accountable.
    """
    from .ingest import ingest_file

    problems = []
    reparsed: dict[str, dict[str, str]] = {}
    root = Path(corpus.root)
    for row in manifest.rows:
        if row.guid not in corpus:
            problems.append(f"{row.export_filename}: unknown guid {row.guid}")
            continue
        item = corpus[row.guid]
        if item.md5 != row.original_md5 or item.source_path != row.original_path:
            problems.append(f"{row.export_filename}: row disagrees with case item {row.guid}")
            continue
        top = row.guid
        while corpus[top].parent is not None:
            top = corpus[top].parent
        if top not in reparsed:
            items, _ = ingest_file(root, corpus[top].source_path)
            reparsed[top] = {i.guid: i.md5 for i in items}
        if reparsed[top].get(row.guid) != row.original_md5:
            problems.append(f"{row.export_filename}: evidence no longer hashes to {row.original_md5}")
    return problems
