"""Deterministic three-machine test corpus with ground-truth privilege labels.

The tree mirrors a small privileged-communication scenario between a
suspect, their lawyer and a friend. Every e-mail is stored as a byte-identical
.eml in the sender's and each recipient's mail folders, so instance counts
exceed unique counts the way they do in real mail stores. The full message
ledger is documented in ``docs/corpus_ledger.md``.
"""

from __future__ import annotations

import base64
import io
import os
import random
import textwrap
import zipfile
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from email.utils import format_datetime
from pathlib import Path
from typing import Optional

from .ingest import scan_evidence
from .model import compute_md5
from .pdf import text_pdf, wrap_lines
from .relations import (
    FilterConfig,
    baseline_email_only,
    baseline_metadata,
    run_filter,
    seed_from_address,
)
from .shingles import build_index, resemblance

LAWYER = "lawyer@domain.ext"
SUSPECT = "suspect@domain.ext"
FRIEND = "friend@domain.ext"
DISPLAY = {LAWYER: "Lawyer", SUSPECT: "Suspect", FRIEND: "Friend"}
USER_DIR = {LAWYER: "Lawyer", SUSPECT: "Suspect", FRIEND: "Friend"}

EVIDENCE_DIR = "evidence"
TRUTH_FILE = "ground_truth.tsv"
TRUTH_COLUMNS = ("path", "md5", "category", "unique_class", "privileged", "expected_discoverer")

# Unique-item totals the generated tree must reproduce: (total, privileged).
TABLE_ONE = {
    "total_unique": (23, 13),
    "email": (14, 7),
    "attachment": (7, 4),
    "desktop": (5, 5),
}

DISCOVERERS = ("email_baseline", "metadata_baseline", "script", "none")


@dataclass
class TruthRow:
    path: str
    md5: str
    category: str
    unique_class: str
    privileged: bool
    expected_discoverer: str


@dataclass
class GroundTruth:
    rows: list[TruthRow] = field(default_factory=list)

    def by_path(self) -> dict[str, TruthRow]:
        return {row.path: row for row in self.rows}

    def table_one(self) -> dict[str, tuple[int, int]]:
        """(distinct MD5s, distinct privileged MD5s) per category and overall."""
        def counts(rows):
            return (len({r.md5 for r in rows}), len({r.md5 for r in rows if r.privileged}))
        table = {"total_unique": counts(self.rows)}
        for category in ("email", "attachment", "desktop"):
            table[category] = counts([r for r in self.rows if r.category == category])
        return table

    def instances(self) -> Counter:
        return Counter((r.category, r.expected_discoverer) for r in self.rows)

    def found_by(self, method: str) -> set[str]:
        """Paths a method is expected to flag; weaker methods' finds are included."""
        order = DISCOVERERS[:DISCOVERERS.index(method) + 1]
        return {r.path for r in self.rows if r.expected_discoverer in order}

    def to_tsv(self) -> str:
        lines = ["\t".join(TRUTH_COLUMNS)]
        for r in self.rows:
            lines.append("\t".join([r.path, r.md5, r.category, r.unique_class,
                                    "1" if r.privileged else "0", r.expected_discoverer]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> GroundTruth:
        lines = [line for line in text.splitlines() if line]
        if tuple(lines[0].split("\t")) != TRUTH_COLUMNS:
            raise ValueError("unexpected ground truth header")
        rows = []
        for line in lines[1:]:
            path, md5, category, cls_, priv, disc = line.split("\t")
            rows.append(TruthRow(path, md5, category, cls_, priv == "1", disc))
        return cls(rows)

    @classmethod
    def load(cls, path: str | os.PathLike) -> GroundTruth:
        return cls.from_tsv(Path(path).read_text(encoding="utf-8"))


@dataclass
class _Attachment:
    filename: str
    data: bytes
    content_type: str
    privileged: bool
    entries: list[tuple[str, bytes]] = field(default_factory=list)


@dataclass
class _Message:
    number: int
    sender: str
    recipients: list[str]
    subject: str
    body: str
    attachments: list[_Attachment]
    copies: list[tuple[str, str]]
    privileged: bool
    discoverer: str
    attachment_discoverer: str


class _Writer:
    def __init__(self, rng: random.Random, sentinel: Optional[str]):
        self.rng = rng
        self.sentinel = sentinel
        self.vocab = self._vocabulary(4000)

    def _vocabulary(self, size: int) -> list[str]:
        onsets = "b c d f g h j k l m n p r s t v w z br dr gr kl pl st tr".split()
        vowels = "a e i o u ai ou".split()
        codas = ["", "", "n", "r", "s", "l", "m", "t"]
        words: set[str] = set()
        while len(words) < size:
            syllables = self.rng.randint(2, 3)
            words.add("".join(self.rng.choice(onsets) + self.rng.choice(vowels) + self.rng.choice(codas)
                              for _ in range(syllables)))
        vocab = sorted(words)
        self.rng.shuffle(vocab)
        return vocab

    def words(self, n: int, distinct: bool = False) -> list[str]:
        picked = self.rng.sample(self.vocab, n) if distinct else self.rng.choices(self.vocab, k=n)
        out = []
        sentence = 0
        for w in picked:
            if sentence == 0:
                w = w.capitalize()
            sentence += 1
            if sentence >= self.rng.randint(7, 14):
                w += "."
                sentence = 0
            elif self.rng.random() < 0.06:
                w += ","
            out.append(w)
        if out and not out[-1].endswith("."):
            out[-1] = out[-1].rstrip(",") + "."
        return out

    def mark(self, text: str) -> str:
        return f"{self.sentinel} {text}" if self.sentinel else text

    def name(self, filename: str) -> str:
        return _named(filename, self.sentinel)

    def prose(self, words: list[str]) -> str:
        return textwrap.fill(" ".join(words), width=72) + "\n"

    def document(self, n: int) -> bytes:
        return self.mark(self.prose(self.words(n, distinct=True))).encode("utf-8")

    def image(self) -> bytes:
        return b"\xff\xd8\xff\xe0\x00\x10JFIF\x00" + self.rng.randbytes(1536) + b"\xff\xd9"


def _named(filename: str, sentinel: Optional[str]) -> str:
    if not sentinel:
        return filename
    stem, dot, ext = filename.rpartition(".")
    return f"{stem}_{sentinel}.{ext}" if dot else f"{filename}_{sentinel}"


def _zip(entries: list[tuple[str, bytes]]) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as archive:
        for name, data in entries:
            info = zipfile.ZipInfo(name, date_time=(2017, 3, 1, 12, 0, 0))
            info.external_attr = 0o644 << 16
            archive.writestr(info, data)
    return buf.getvalue()


def _address(addr: str) -> str:
    return f"{DISPLAY[addr]} <{addr}>"


def _eml(msg: _Message, date: datetime) -> bytes:
    headers = [
        f"From: {_address(msg.sender)}",
        f"To: {', '.join(_address(r) for r in msg.recipients)}",
        f"Subject: {msg.subject}",
        f"Date: {format_datetime(date)}",
        f"Message-ID: <msg{msg.number:02d}.{date.strftime('%Y%m%d%H%M')}@domain.ext>",
        "MIME-Version: 1.0",
    ]
    body = msg.body.replace("\n", "\r\n")
    if not msg.attachments:
        headers += ['Content-Type: text/plain; charset="utf-8"', "Content-Transfer-Encoding: 7bit"]
        return ("\r\n".join(headers) + "\r\n\r\n" + body).encode("utf-8")
    boundary = f"==privfilter-boundary-{msg.number:02d}=="
    headers.append(f'Content-Type: multipart/mixed; boundary="{boundary}"')
    parts = ["This is a multi-part message in MIME format.\r\n"]
    parts.append(f"--{boundary}\r\nContent-Type: text/plain; charset=\"utf-8\"\r\n"
                 f"Content-Transfer-Encoding: 7bit\r\n\r\n{body}")
    for att in msg.attachments:
        encoded = base64.encodebytes(att.data).decode("ascii").replace("\n", "\r\n")
        parts.append(
            f"--{boundary}\r\nContent-Type: {att.content_type}; name=\"{att.filename}\"\r\n"
            f"Content-Disposition: attachment; filename=\"{att.filename}\"\r\n"
            f"Content-Transfer-Encoding: base64\r\n\r\n{encoded}")
    parts.append(f"--{boundary}--\r\n")
    return ("\r\n".join(headers) + "\r\n\r\n" + "\r\n".join(parts)).encode("utf-8")


def _forward(w: _Writer, original: _Message, date: datetime) -> str:
    header = (f"---------- Forwarded message ---------\n"
              f"From: {_address(original.sender)}\n"
              f"Date: {date.strftime('%d %b %Y')}\n"
              f"Subject: {original.subject}\n"
              f"To: {', '.join(_address(r) for r in original.recipients)}\n\n")
    return w.mark("Have a look at this.\n\n") + header + original.body


DOCX = "application/vnd.openxmlformats-officedocument.wordprocessingml.document"


def _ledger(w: _Writer) -> tuple[list[_Message], dict[str, bytes]]:
    rng = w.rng
    file1_words = w.words(200, distinct=True)
    file1 = w.mark(w.prose(file1_words)).encode("utf-8")
    cut = 90 + rng.randint(0, 20)
    file1_1 = w.mark(w.prose(file1_words[:cut] + file1_words[cut + 5:])).encode("utf-8")
    file1_2 = text_pdf(wrap_lines(file1.decode("utf-8")))
    file2 = w.document(210)
    file3 = w.document(220)
    notes = w.document(150)
    photo = w.image()
    holiday = w.image()
    backup_entries = [(w.name("notes.txt"), notes), (w.name("holiday.jpg"), holiday)]

    def att(filename, data, ctype, privileged, entries=()):
        return _Attachment(w.name(filename), data, ctype, privileged, list(entries))

    def body(n: int) -> str:
        return w.mark(w.prose(w.words(n)))

    def sent(sender, recipients, extra=()):
        copies = [(sender, "Sent")] + [(r, "Inbox") for r in recipients]
        return copies + list(extra)

    L, S, F = LAWYER, SUSPECT, FRIEND
    msgs: list[_Message] = []

    def add(number, sender, recipients, subject, n_words, attachments=(), extra=(),
            privileged=False, discoverer="none", attachment_discoverer="none", text=None):
        msgs.append(_Message(number, sender, recipients, w.mark(subject),
                             text if text is not None else body(n_words), list(attachments),
                             sent(sender, recipients, extra), privileged, discoverer,
                             attachment_discoverer))
        return msgs[-1]

    priv = dict(privileged=True, discoverer="email_baseline", attachment_discoverer="metadata_baseline")
    add(1, S, [L], "Documents you asked for", 120, [att("file3.docx", file3, DOCX, True)], **priv)
    e2 = add(2, L, [S], "Draft statement", 420, [att("file1.docx", file1, DOCX, True)],
             extra=[(L, "Archive")], **priv)
    add(3, L, [S], "Overview of costs", 140, [att("file2.txt", file2, "text/plain", True)], **priv)
    add(4, S, [L], "Photo of the damage", 60, [att("photo.jpg", photo, "image/jpeg", True)], **priv)
    add(5, L, [S], "Appointment", 90, **priv)
    add(6, S, [L], "Question about the hearing", 110, **priv)
    add(7, S, [F], "Weekend plans", 80)
    add(8, S, [F], "Fwd: Draft statement", 0,
        [att("file1.docx", file1, DOCX, True)], privileged=True, discoverer="script",
        attachment_discoverer="script",
        text=_forward(w, e2, datetime(2017, 3, 2, tzinfo=timezone.utc)))
    add(9, S, [F], "Costs", 70, [att("file2.txt", file2, "text/plain", True)],
        attachment_discoverer="script")
    add(10, F, [S], "Holiday pictures", 50, [att("holiday.jpg", holiday, "image/jpeg", False)])
    add(11, F, [S], "My notes", 60, [att("notes.txt", notes, "text/plain", False)])
    add(12, F, [S], "Backup", 40, [att("backup.zip", _zip(backup_entries), "application/zip",
                                       False, backup_entries)])
    add(13, F, [S], "Dinner", 70)
    add(14, S, [F], "Re: Dinner", 50)

    desktop = {
        f"Suspect/Desktop/{w.name('file1.docx')}": file1,
        f"Suspect/Desktop/{w.name('file1_1.docx')}": file1_1,
        f"Suspect/Desktop/{w.name('file1_2.pdf')}": file1_2,
        f"Friend/Desktop/{w.name('file2.txt')}": file2,
        f"Friend/Desktop/{w.name('file3.docx')}": file3,
    }
    return msgs, desktop


# Desktop files the FROM-side expansion reaches; file3 only duplicates an
# attachment sent to the lawyer and so stays unfound.
_DESKTOP_FOUND = ("file1.docx", "file1_1.docx", "file1_2.pdf", "file2.txt")


def generate(out: str | os.PathLike, rng_seed: int = 0, sentinel: Optional[str] = None) -> GroundTruth:
    """Write the evidence tree under ``out/evidence`` and ``out/ground_truth.tsv``.

    ``sentinel`` plants a marker token in every subject, body, document text
    and file name; used to test that nothing identifying reaches the console.
    """
    out = Path(out)
    rng = random.Random(rng_seed)
    w = _Writer(rng, sentinel)
    msgs, desktop = _ledger(w)
    base = datetime(2017, 3, 1, 9, 0, tzinfo=timezone(timedelta(hours=1)))

    files: dict[str, bytes] = {}
    rows: list[TruthRow] = []
    for msg in msgs:
        date = base + timedelta(days=msg.number, minutes=rng.randint(0, 600))
        raw = _eml(msg, date)
        for user, folder in msg.copies:
            path = f"{USER_DIR[user]}/Mail/{folder}/{w.name(f'msg{msg.number:02d}.eml')}"
            files[path] = raw
            rows.append(TruthRow(path, compute_md5(raw), "email", "", msg.privileged, msg.discoverer))
            for a in msg.attachments:
                apath = f"{path}/{a.filename}"
                rows.append(TruthRow(apath, compute_md5(a.data), "attachment", "", a.privileged,
                                     msg.attachment_discoverer if a.privileged else "none"))
                for name, data in a.entries:
                    rows.append(TruthRow(f"{apath}/{name}", compute_md5(data), "attachment", "",
                                         a.privileged, "none"))
    for path, data in desktop.items():
        found = any(path.endswith("/" + w.name(n)) for n in _DESKTOP_FOUND)
        files[path] = data
        rows.append(TruthRow(path, compute_md5(data), "desktop", "", True,
                             "script" if found else "none"))

    classes: dict[str, str] = {}
    rows.sort(key=lambda r: r.path)
    for row in rows:
        row.unique_class = classes.setdefault(row.md5, f"U{len(classes) + 1:02d}")

    root = out / EVIDENCE_DIR
    for path, data in sorted(files.items()):
        target = root / path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
    truth = GroundTruth(rows)
    (out / TRUTH_FILE).write_text(truth.to_tsv(), encoding="utf-8")
    return truth


@dataclass
class VerificationReport:
    mismatches: list[str] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __len__(self) -> int:
        return len(self.mismatches)


def _find(corpus, suffix: str) -> list:
    return [i for i in corpus.items.values() if i.source_path.endswith(suffix)]


def verify_ground_truth(out: str | os.PathLike, truth: GroundTruth, threshold: float = 0.9) -> VerificationReport:
    """Re-ingest the generated tree and check it against ``truth``."""
    report = VerificationReport()
    corpus = scan_evidence(Path(out) / EVIDENCE_DIR)
    by_path = {item.source_path: item for item in corpus.items.values()}
    expected = truth.by_path()
    for path, row in expected.items():
        report.checked += 1
        item = by_path.get(path)
        if item is None:
            report.mismatches.append(f"missing item: {path}")
        elif item.md5 != row.md5:
            report.mismatches.append(f"md5 mismatch: {path}")
    for path in sorted(set(by_path) - set(expected)):
        report.mismatches.append(f"unexpected item: {path}")

    class_of: dict[str, str] = {}
    for row in truth.rows:
        if class_of.setdefault(row.md5, row.unique_class) != row.unique_class:
            report.mismatches.append(f"md5 split across classes: {row.path}")
    if len(set(class_of.values())) != len(class_of):
        report.mismatches.append("unique class shared by different md5s")
    observed = {"total_unique": len({i.md5 for i in corpus.items.values()})}
    if observed["total_unique"] != TABLE_ONE["total_unique"][0]:
        report.mismatches.append(f"corpus has {observed['total_unique']} distinct md5s, "
                                 f"expected {TABLE_ONE['total_unique'][0]}")
    table = truth.table_one()
    for key, want in TABLE_ONE.items():
        if table[key] != want:
            report.mismatches.append(f"table row {key}: {table[key]} != {want}")

    index = build_index(corpus)

    def shingles_of(suffix: str):
        items = _find(corpus, suffix)
        return index.shingles.get(items[0].guid, frozenset()) if items else frozenset()

    sentinel = _sentinel_of(truth)
    file1 = shingles_of("Suspect/Desktop/" + _named("file1.docx", sentinel))
    pairs = [
        ("file1_1", file1, shingles_of("Suspect/Desktop/" + _named("file1_1.docx", sentinel)), threshold),
        ("file1_2", file1, shingles_of("Suspect/Desktop/" + _named("file1_2.pdf", sentinel)), 1.0),
        ("e-mail 8", shingles_of("Lawyer/Mail/Sent/" + _named("msg02.eml", sentinel)),
         shingles_of("Friend/Mail/Inbox/" + _named("msg08.eml", sentinel)), threshold),
    ]
    for label, a, b, low in pairs:
        value = resemblance(a, b)
        if value < low:
            report.mismatches.append(f"{label} resemblance {value:.4f} below {low}")

    paths = {g: corpus[g].source_path for g in corpus.items}
    seeds = seed_from_address(LAWYER, corpus)
    flagged = run_filter(seeds, corpus, index, FilterConfig(threshold=threshold)).privileged
    for method, found in (("email_baseline", baseline_email_only(LAWYER, corpus)),
                          ("metadata_baseline", baseline_metadata(LAWYER, corpus)),
                          ("script", flagged)):
        got = {paths[g] for g in found}
        want = truth.found_by(method)
        if got != want:
            report.mismatches.append(
                f"{method}: {len(got - want)} unexpected, {len(want - got)} missing items")
    return report


def _sentinel_of(truth: GroundTruth) -> Optional[str]:
    for row in truth.rows:
        if row.category == "desktop" and "/file1_1_" in row.path:
            return row.path.rsplit("/file1_1_", 1)[1].rsplit(".", 1)[0]
    return None
