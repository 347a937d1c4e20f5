"""Evidence items, e-mail metadata and item classification."""

from __future__ import annotations

import hashlib
import uuid
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional

# Fixed namespace so identifiers are reproducible across ingests.
GUID_NAMESPACE = uuid.UUID("6f1c2a3e-9d4b-5e0f-8a17-2b6c4d8e0f31")


class Kind(str, Enum):
    EMAIL = "email"
    DOCUMENT = "document"
    IMAGE = "image"
    CONTAINER = "container"
    OTHER = "other"


ARCHIVE_TYPES = frozenset({
    "application/zip",
    "application/x-zip-compressed",
    "application/x-tar",
    "application/gzip",
    "application/x-7z-compressed",
    "application/x-rar-compressed",
    "application/vnd.ms-outlook",
})

DOCUMENT_TYPES = frozenset({
    "application/pdf",
    "application/rtf",
    "application/msword",
    "application/vnd.ms-excel",
    "application/vnd.ms-powerpoint",
    "application/vnd.openxmlformats-officedocument.wordprocessingml.document",
    "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
    "application/vnd.openxmlformats-officedocument.presentationml.presentation",
    "application/vnd.oasis.opendocument.text",
    "application/vnd.oasis.opendocument.spreadsheet",
})

# Office formats whose corpus convention is UTF-8 text behind an office extension.
OFFICE_TYPES = DOCUMENT_TYPES - {"application/pdf"}

EXTENSION_TYPES = {
    ".eml": "message/rfc822",
    ".txt": "text/plain",
    ".log": "text/plain",
    ".csv": "text/csv",
    ".htm": "text/html",
    ".html": "text/html",
    ".pdf": "application/pdf",
    ".zip": "application/zip",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".png": "image/png",
    ".gif": "image/gif",
    ".doc": "application/msword",
    ".docx": "application/vnd.openxmlformats-officedocument.wordprocessingml.document",
    ".xls": "application/vnd.ms-excel",
    ".xlsx": "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
    ".rtf": "application/rtf",
}

MAGIC_TYPES = (
    (b"PK\x03\x04", "application/zip"),
    (b"PK\x05\x06", "application/zip"),
    (b"%PDF-", "application/pdf"),
    (b"\xff\xd8\xff", "image/jpeg"),
    (b"\x89PNG\r\n\x1a\n", "image/png"),
)

OCTET_STREAM = "application/octet-stream"


@dataclass
class EmailMetadata:
    from_addresses: list[str] = field(default_factory=list)
    to_addresses: list[str] = field(default_factory=list)
    cc_addresses: list[str] = field(default_factory=list)
    bcc_addresses: list[str] = field(default_factory=list)
    subject: str = ""
    date: Optional[datetime] = None

    def to_dict(self) -> dict:
        return {
            "from": self.from_addresses,
            "to": self.to_addresses,
            "cc": self.cc_addresses,
            "bcc": self.bcc_addresses,
            "subject": self.subject,
            "date": self.date.isoformat() if self.date else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> EmailMetadata:
        date = data.get("date")
        return cls(
            from_addresses=list(data.get("from", [])),
            to_addresses=list(data.get("to", [])),
            cc_addresses=list(data.get("cc", [])),
            bcc_addresses=list(data.get("bcc", [])),
            subject=data.get("subject", ""),
            date=datetime.fromisoformat(date) if date else None,
        )


@dataclass
class EvidenceItem:
    """One file, e-mail, attachment or archive entry.

    ``size`` and ``error`` are bookkeeping beyond the identity fields: the
    export needs the byte count for placeholders, and ingest failures are
    kept on the item so they survive persistence.
    """

    guid: str
    source_path: str
    original_name: str
    kind: Kind
    media_type: str
    md5: str
    size: int = 0
    text: Optional[str] = None
    parent: Optional[str] = None
    children: list[str] = field(default_factory=list)
    email: Optional[EmailMetadata] = None
    error: Optional[str] = None

    @property
    def is_top_level(self) -> bool:
        return self.parent is None

    def to_dict(self) -> dict:
        return {
            "guid": self.guid,
            "source_path": self.source_path,
            "original_name": self.original_name,
            "kind": self.kind.value,
            "media_type": self.media_type,
            "md5": self.md5,
            "size": self.size,
            "text": self.text,
            "parent": self.parent,
            "children": self.children,
            "email": self.email.to_dict() if self.email else None,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> EvidenceItem:
        email = data.get("email")
        return cls(
            guid=data["guid"],
            source_path=data["source_path"],
            original_name=data["original_name"],
            kind=Kind(data["kind"]),
            media_type=data["media_type"],
            md5=data["md5"],
            size=data.get("size", 0),
            text=data.get("text"),
            parent=data.get("parent"),
            children=list(data.get("children", [])),
            email=EmailMetadata.from_dict(email) if email else None,
            error=data.get("error"),
        )


def compute_md5(data: bytes) -> str:
    return hashlib.md5(data).hexdigest()


def make_guid(root: str, source_path: str, ordinals: tuple[int, ...] = ()) -> str:
    """Deterministic identifier for an item.

    ``ordinals`` is the chain of child positions from the top-level file down
    to the item, so two entries with the same name inside one archive still
    get distinct identifiers.
    """
    key = "\x00".join([root, source_path, ".".join(map(str, ordinals))])
    return str(uuid.uuid5(GUID_NAMESPACE, key))


def normalize_address(value: str) -> str:
    value = value.strip().strip("<>").strip()
    return value.lower()


def detect_media_type(original_name: str, data: bytes = b"") -> str:
    """Media type from the extension, overridden by a few magic signatures."""
    for magic, media_type in MAGIC_TYPES:
        if data.startswith(magic):
            return media_type
    dot = original_name.rfind(".")
    ext = original_name[dot:].lower() if dot > 0 else ""
    return EXTENSION_TYPES.get(ext, OCTET_STREAM)


def classify_kind(original_name: str, media_type: str, has_email_metadata: bool) -> Kind:
    if has_email_metadata:
        return Kind.EMAIL
    if media_type in ARCHIVE_TYPES:
        return Kind.CONTAINER
    if media_type.startswith("image/"):
        return Kind.IMAGE
    if media_type.startswith("text/") or media_type in DOCUMENT_TYPES:
        return Kind.DOCUMENT
    return Kind.OTHER
