"""Walk an evidence tree into a family-linked corpus of items."""

from __future__ import annotations

import email
import email.policy
import email.utils
import io
import logging
import os
import re
import unicodedata
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .model import (
    OFFICE_TYPES,
    EmailMetadata,
    EvidenceItem,
    Kind,
    classify_kind,
    compute_md5,
    detect_media_type,
    make_guid,
    normalize_address,
)
from .pdf import extract_pdf_text

log = logging.getLogger(__name__)

MAX_DEPTH = 16
UNSEARCHABLE_WARNING = (
    "WARNING: {count} PDF item(s) in this case contain no searchable text. "
    "It is advised to run Optical Character Recognition (OCR) over these items "
    "before filtering; otherwise their content cannot be related to privileged items."
)

_WS = re.compile(r"\s+")


class IngestError(Exception):
    """The evidence root cannot be scanned."""


@dataclass
class AttachmentPart:
    filename: str
    data: bytes
    content_type: str


@dataclass
class CorpusSnapshot:
    root: str
    items: dict[str, EvidenceItem] = field(default_factory=dict)
    top_level: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._by_md5: Optional[dict[str, list[str]]] = None

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, guid: str) -> EvidenceItem:
        return self.items[guid]

    def __contains__(self, guid: object) -> bool:
        return guid in self.items

    def add(self, item: EvidenceItem) -> None:
        self.items[item.guid] = item
        self._by_md5 = None

    def by_md5(self) -> dict[str, list[str]]:
        if self._by_md5 is None:
            groups: dict[str, list[str]] = {}
            for guid in sorted(self.items):
                groups.setdefault(self.items[guid].md5, []).append(guid)
            self._by_md5 = groups
        return self._by_md5

    def descendants(self, guid: str) -> list[str]:
        out: list[str] = []
        stack = list(reversed(self.items[guid].children))
        while stack:
            child = stack.pop()
            out.append(child)
            stack.extend(reversed(self.items[child].children))
        return out

    def with_descendants(self, guids: Iterable[str]) -> set[str]:
        out: set[str] = set()
        for guid in guids:
            out.add(guid)
            out.update(self.descendants(guid))
        return out

    def emails(self) -> Iterator[EvidenceItem]:
        for guid in sorted(self.items):
            item = self.items[guid]
            if item.kind is Kind.EMAIL:
                yield item


class _TextExtractor(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip = 0

    def handle_starttag(self, tag, attrs):
        if tag in ("script", "style"):
            self._skip += 1
        self.parts.append(" ")

    def handle_endtag(self, tag):
        if tag in ("script", "style") and self._skip:
            self._skip -= 1
        self.parts.append(" ")

    def handle_data(self, data):
        if not self._skip:
            self.parts.append(data)


def strip_html(markup: str) -> str:
    parser = _TextExtractor()
    parser.feed(markup)
    parser.close()
    return "".join(parser.parts)


def normalize_text(text: str) -> str:
    return _WS.sub(" ", unicodedata.normalize("NFC", text)).strip()


def _decode(data: bytes) -> Optional[str]:
    for encoding in ("utf-8", "cp1252"):
        try:
            text = data.decode(encoding)
        except UnicodeDecodeError:
            continue
        if "\x00" in text:
            return None
        return text
    return None


def extract_text(data: bytes, media_type: str) -> Optional[str]:
    """Normalized text for supported media types, None otherwise."""
    if media_type == "text/html":
        raw = _decode(data)
        text = strip_html(raw) if raw is not None else None
    elif media_type.startswith("text/") or media_type in OFFICE_TYPES:
        # Office extensions carry plain UTF-8 text in the corpus convention;
        # genuine binary office files fail to decode and yield no text.
        text = _decode(data)
    elif media_type == "application/pdf":
        text = extract_pdf_text(data)
    else:
        text = None
    if text is None:
        return None
    text = normalize_text(text)
    return text or None


def _addresses(msg, header: str) -> list[str]:
    values = [str(v) for v in msg.get_all(header, [])]
    found = []
    for _, addr in email.utils.getaddresses(values):
        addr = normalize_address(addr)
        if addr and addr not in found:
            found.append(addr)
    return found


def _leaves(part) -> Iterator:
    if part.get_content_type() == "message/rfc822":
        yield part
    elif part.is_multipart():
        for sub in part.get_payload():
            yield from _leaves(sub)
    else:
        yield part


def parse_email(raw: bytes) -> tuple[Optional[EmailMetadata], str, list[AttachmentPart]]:
    """Split a message into metadata, body text and attachment parts.

    Metadata is None when no From or To address can be recovered; the caller
    then treats the file as an ordinary document.
    """
    try:
        msg = email.message_from_bytes(raw, policy=email.policy.default)
        meta = EmailMetadata(
            from_addresses=_addresses(msg, "from"),
            to_addresses=_addresses(msg, "to"),
            cc_addresses=_addresses(msg, "cc"),
            bcc_addresses=_addresses(msg, "bcc"),
            subject=str(msg.get("subject", "") or ""),
        )
        date = msg.get("date")
        if date is not None and getattr(date, "datetime", None) is not None:
            meta.date = date.datetime
    except Exception as exc:  # header parsing in the stdlib raises many types
        log.warning("unparseable message headers: %s", type(exc).__name__)
        return None, normalize_text(_decode(raw) or ""), []
    if not (meta.from_addresses or meta.to_addresses):
        return None, normalize_text(_decode(raw) or ""), []

    plain: list[str] = []
    html: list[str] = []
    parts: list[AttachmentPart] = []
    for leaf in _leaves(msg):
        ctype = leaf.get_content_type()
        filename = leaf.get_filename()
        if ctype == "message/rfc822":
            inner = leaf.get_payload()[0]
            parts.append(AttachmentPart(filename or "attached_message.eml",
                                        inner.as_bytes(policy=email.policy.default), ctype))
            continue
        if filename or leaf.get_content_disposition() == "attachment":
            data = leaf.get_payload(decode=True) or b""
            parts.append(AttachmentPart(filename or "attachment.bin", data, ctype))
            continue
        if leaf.get_content_maintype() != "text":
            continue
        try:
            content = leaf.get_content()
        except (LookupError, UnicodeError):
            content = (leaf.get_payload(decode=True) or b"").decode("utf-8", "replace")
        (html if ctype == "text/html" else plain).append(content)

    body = "\n".join(plain) if plain else strip_html("\n".join(html))
    return meta, normalize_text(body), parts


class _Builder:
    """Turns one top-level file into a list of items, recursing into families."""

    def __init__(self, root: str):
        self.root = root
        self.items: list[EvidenceItem] = []
        self.warnings: list[str] = []

    def build(self, name: str, data: bytes, path: str, ordinals: tuple[int, ...],
              parent: Optional[str], depth: int = 0,
              declared_type: Optional[str] = None) -> EvidenceItem:
        guid = make_guid(self.root, path, ordinals)
        media_type = detect_media_type(name, data)
        if declared_type == "message/rfc822":
            media_type = declared_type
        item = EvidenceItem(guid=guid, source_path=path, original_name=name,
                            kind=Kind.OTHER, media_type=media_type,
                            md5=compute_md5(data), size=len(data), parent=parent)
        self.items.append(item)
        parts: list[AttachmentPart] = []
        if media_type == "message/rfc822":
            meta, body, parts = parse_email(data)
            if meta is None:
                self.warnings.append(f"{guid}\tmalformed e-mail headers; ingested as document")
                item.media_type = "text/plain"
                item.kind = Kind.DOCUMENT
                item.text = body or None
                return item
            item.email = meta
            item.text = body or None
        else:
            item.text = extract_text(data, media_type)
        item.kind = classify_kind(name, item.media_type, item.email is not None)

        if depth >= MAX_DEPTH and (parts or item.kind is Kind.CONTAINER):
            self.warnings.append(f"{guid}\tnesting depth limit reached; children skipped")
            return item
        if item.kind is Kind.CONTAINER:
            parts = self._archive_entries(item, data)
        for n, part in enumerate(parts):
            child = self.build(part.filename, part.data, f"{path}/{part.filename}",
                               ordinals + (n,), guid, depth + 1, part.content_type)
            item.children.append(child.guid)
        return item

    def _archive_entries(self, item: EvidenceItem, data: bytes) -> list[AttachmentPart]:
        if item.media_type not in ("application/zip", "application/x-zip-compressed"):
            self.warnings.append(f"{item.guid}\tunsupported container format; no children")
            return []
        try:
            with zipfile.ZipFile(io.BytesIO(data)) as archive:
                return [AttachmentPart(info.filename, archive.read(info), "")
                        for info in archive.infolist() if not info.is_dir()]
        except (zipfile.BadZipFile, zipfile.LargeZipFile, OSError, EOFError,
                NotImplementedError, RuntimeError, ValueError) as exc:
            self.warnings.append(f"{item.guid}\tcorrupt archive ({type(exc).__name__}); no children")
            return []


def extract_container(item: EvidenceItem, data: bytes, root: str = "",
                      ordinals: tuple[int, ...] = ()) -> list[EvidenceItem]:
    """Child items, with their own descendants, for a ZIP container's bytes.

    ``root`` and ``ordinals`` must match the ones the container was ingested
    with for the child guids to agree with a full scan.
    """
    builder = _Builder(root)
    children: list[EvidenceItem] = []
    for n, part in enumerate(builder._archive_entries(item, data)):
        before = len(builder.items)
        builder.build(part.filename, part.data, f"{item.source_path}/{part.filename}",
                      ordinals + (n,), item.guid, 1)
        children.extend(builder.items[before:])
    for warning in builder.warnings:
        log.warning(warning)
    return children


def ingest_file(root: Path, rel: str) -> tuple[list[EvidenceItem], list[str]]:
    builder = _Builder(str(root))
    name = rel.rsplit("/", 1)[-1]
    try:
        data = (root / rel).read_bytes()
    except OSError as exc:
        guid = make_guid(str(root), rel)
        item = EvidenceItem(guid=guid, source_path=rel, original_name=name,
                            kind=Kind.OTHER, media_type=detect_media_type(name),
                            md5=compute_md5(b""), error=f"unreadable: {type(exc).__name__}")
        return [item], [f"{guid}\tunreadable file ({type(exc).__name__})"]
    builder.build(name, data, rel, (), None)
    return builder.items, builder.warnings


def _regular_files(root: Path) -> list[str]:
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for filename in filenames:
            full = Path(dirpath) / filename
            if full.is_file() and not full.is_symlink():
                found.append(full.relative_to(root).as_posix())
    return sorted(found)


def scan_evidence(root: str | os.PathLike, workers: int = 1) -> CorpusSnapshot:
    """Ingest every regular file under ``root`` in lexicographic path order."""
    root_path = Path(root).resolve()
    if not root_path.is_dir() or not os.access(root_path, os.R_OK | os.X_OK):
        raise IngestError(f"evidence root is not a readable directory: {root}")
    files = _regular_files(root_path)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda rel: ingest_file(root_path, rel), files))
    else:
        results = [ingest_file(root_path, rel) for rel in files]

    corpus = CorpusSnapshot(root=str(root_path))
    for items, warnings in results:
        corpus.top_level.append(items[0].guid)
        for item in items:
            corpus.add(item)
        corpus.warnings.extend(warnings)
    for warning in corpus.warnings:
        log.debug("ingest warning: %s", warning)
    return corpus


def detect_unsearchable(corpus: CorpusSnapshot) -> list[str]:
    return [guid for guid in sorted(corpus.items)
            if corpus.items[guid].media_type == "application/pdf"
            and not corpus.items[guid].text]


def unsearchable_warning(count: int) -> str:
    return UNSEARCHABLE_WARNING.format(count=count)


def ingest_report(corpus: CorpusSnapshot) -> str:
    """Plain-text report of ingest warnings, keyed by item guid."""
    lines = [f"items\t{len(corpus)}", f"top_level\t{len(corpus.top_level)}",
             f"warnings\t{len(corpus.warnings)}"]
    lines.extend(f"warning\t{w}" for w in corpus.warnings)
    return "\n".join(lines) + "\n"
