"""Minimal text PDFs: a deterministic writer and a content-stream text reader.

The reader only understands uncompressed content streams and the text-show
operators (Tj, TJ, ' and "). Anything else yields no text, which callers
treat as an unsearchable PDF.
"""

from __future__ import annotations

import re
import textwrap
from typing import Iterable, Optional

COLUMNS = 80
LINES_PER_PAGE = 60
FONT_SIZE = 9
LEADING = 11
PAGE_WIDTH = 612
PAGE_HEIGHT = 792
LEFT_MARGIN = 72
TOP_BASELINE = 740

_DELIMITERS = b"()<>[]{}/%"
_WHITESPACE = b" \t\r\n\x0c\x00"
_ESCAPES = {
    ord("n"): b"\n", ord("r"): b"\r", ord("t"): b"\t",
    ord("b"): b"\b", ord("f"): b"\x0c",
    ord("("): b"(", ord(")"): b")", ord("\\"): b"\\",
}
_LINE_BREAK_OPS = {b"T*", b"Td", b"TD", b"Tm", b"ET", b"BT"}


def wrap_lines(text: str, width: int = COLUMNS) -> list[str]:
    """Wrap each paragraph of ``text`` at ``width`` columns.

    Long words are never split, so joining the output lines with spaces gives
    back the original words.
    """
    lines: list[str] = []
    for paragraph in text.split("\n"):
        if not paragraph.strip():
            lines.append("")
            continue
        lines.extend(textwrap.wrap(paragraph, width=width, break_long_words=False,
                                   break_on_hyphens=False))
    return lines


def _escape(line: str) -> bytes:
    raw = line.encode("latin-1", errors="replace")
    out = bytearray()
    for byte in raw:
        if byte in (0x28, 0x29, 0x5C):
            out += b"\\" + bytes([byte])
        elif byte < 0x20 or byte > 0x7E:
            out += b"\\%03o" % byte
        else:
            out.append(byte)
    return bytes(out)


def _page_stream(lines: list[str]) -> bytes:
    ops = [b"BT", b"/F1 %d Tf" % FONT_SIZE, b"%d TL" % LEADING,
           b"%d %d Td" % (LEFT_MARGIN, TOP_BASELINE)]
    for i, line in enumerate(lines):
        if i:
            ops.append(b"T*")
        if line:
            ops.append(b"(" + _escape(line) + b") Tj")
    ops.append(b"ET")
    return b"\n".join(ops) + b"\n"


def text_pdf(lines: Iterable[str]) -> bytes:
    """Render pre-wrapped lines as a PDF 1.4 file, 60 lines per page."""
    lines = list(lines)
    pages = [lines[i:i + LINES_PER_PAGE] for i in range(0, len(lines), LINES_PER_PAGE)] or [[]]

    objects: list[bytes] = []
    n_pages = len(pages)
    page_ids = [4 + 2 * i for i in range(n_pages)]
    kids = b" ".join(b"%d 0 R" % pid for pid in page_ids)
    objects.append(b"<< /Type /Catalog /Pages 2 0 R >>")
    objects.append(b"<< /Type /Pages /Kids [" + kids + b"] /Count %d >>" % n_pages)
    objects.append(b"<< /Type /Font /Subtype /Type1 /BaseFont /Courier "
                   b"/Encoding /WinAnsiEncoding >>")
    for pid, page in zip(page_ids, pages):
        objects.append(
            b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 %d %d] "
            b"/Resources << /Font << /F1 3 0 R >> >> /Contents %d 0 R >>"
            % (PAGE_WIDTH, PAGE_HEIGHT, pid + 1))
        stream = _page_stream(page)
        objects.append(b"<< /Length %d >>\nstream\n" % len(stream) + stream + b"endstream")

    out = bytearray(b"%PDF-1.4\n%\xe2\xe3\xcf\xd3\n")
    offsets = []
    for number, body in enumerate(objects, start=1):
        offsets.append(len(out))
        out += b"%d 0 obj\n" % number + body + b"\nendobj\n"
    xref_at = len(out)
    out += b"xref\n0 %d\n0000000000 65535 f \n" % (len(objects) + 1)
    for offset in offsets:
        out += b"%010d 00000 n \n" % offset
    out += (b"trailer\n<< /Size %d /Root 1 0 R >>\nstartxref\n%d\n%%%%EOF\n"
            % (len(objects) + 1, xref_at))
    return bytes(out)


def image_only_pdf(image: bytes, width: int = 100, height: int = 100) -> bytes:
    """A one-page PDF whose only content is an embedded raster image."""
    content = b"q\n%d 0 0 %d 72 600 cm\n/Im0 Do\nQ\n" % (width, height)
    objects = [
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
        b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] "
        b"/Resources << /XObject << /Im0 5 0 R >> >> /Contents 4 0 R >>",
        b"<< /Length %d >>\nstream\n" % len(content) + content + b"endstream",
        b"<< /Type /XObject /Subtype /Image /Width %d /Height %d /ColorSpace /DeviceGray "
        b"/BitsPerComponent 8 /Filter /DCTDecode /Length %d >>\nstream\n"
        % (width, height, len(image)) + image + b"\nendstream",
    ]
    out = bytearray(b"%PDF-1.4\n")
    offsets = []
    for number, body in enumerate(objects, start=1):
        offsets.append(len(out))
        out += b"%d 0 obj\n" % number + body + b"\nendobj\n"
    xref_at = len(out)
    out += b"xref\n0 %d\n0000000000 65535 f \n" % (len(objects) + 1)
    for offset in offsets:
        out += b"%010d 00000 n \n" % offset
    out += b"trailer\n<< /Size %d /Root 1 0 R >>\nstartxref\n%d\n%%%%EOF\n" % (
        len(objects) + 1, xref_at)
    return bytes(out)


def _streams(data: bytes):
    """Yield (dictionary bytes, stream bytes) for every stream object."""
    pos = 0
    while True:
        at = data.find(b"stream", pos)
        if at < 0:
            return
        if data[at - 3:at] == b"end":
            pos = at + 6
            continue
        obj_at = data.rfind(b" obj", 0, at)
        header = data[obj_at if obj_at >= 0 else 0:at]
        start = at + 6
        if data[start:start + 2] == b"\r\n":
            start += 2
        elif data[start:start + 1] in (b"\n", b"\r"):
            start += 1
        length = re.search(rb"/Length\s+(\d+)(\s+\d+\s+R)?", header)
        end = -1
        if length and not length.group(2):
            candidate = start + int(length.group(1))
            if data.find(b"endstream", candidate, candidate + 16) >= 0:
                end = candidate
        if end < 0:
            end = data.find(b"endstream", start)
            if end < 0:
                return
        yield header, data[start:end]
        pos = end + 9


def _literal(buf: bytes, i: int) -> tuple[bytes, int]:
    """Parse a literal string starting after its opening parenthesis."""
    out = bytearray()
    depth = 1
    while i < len(buf):
        c = buf[i]
        if c == 0x5C:
            i += 1
            if i >= len(buf):
                break
            e = buf[i]
            if e in _ESCAPES:
                out += _ESCAPES[e]
            elif 0x30 <= e <= 0x37:
                digits = bytes([e])
                while len(digits) < 3 and i + 1 < len(buf) and 0x30 <= buf[i + 1] <= 0x37:
                    i += 1
                    digits += bytes([buf[i]])
                out.append(int(digits, 8) & 0xFF)
            elif e == 0x0D:
                if buf[i + 1:i + 2] == b"\n":
                    i += 1
            elif e != 0x0A:
                out.append(e)
            i += 1
            continue
        if c == 0x28:
            depth += 1
        elif c == 0x29:
            depth -= 1
            if depth == 0:
                return bytes(out), i + 1
        out.append(c)
        i += 1
    return bytes(out), i


def _tokens(buf: bytes):
    i, n = 0, len(buf)
    while i < n:
        c = buf[i]
        if c in _WHITESPACE:
            i += 1
        elif c == 0x25:
            while i < n and buf[i] not in b"\r\n":
                i += 1
        elif c == 0x28:
            value, i = _literal(buf, i + 1)
            yield "str", value
        elif c == 0x3C:
            if buf[i + 1:i + 2] == b"<":
                yield "op", b"<<"
                i += 2
            else:
                end = buf.find(b">", i)
                end = n if end < 0 else end
                hexdigits = re.sub(rb"\s", b"", buf[i + 1:end])
                if len(hexdigits) % 2:
                    hexdigits += b"0"
                try:
                    yield "str", bytes.fromhex(hexdigits.decode("ascii"))
                except ValueError:
                    pass
                i = end + 1
        elif c == 0x3E:
            yield "op", b">>" if buf[i + 1:i + 2] == b">" else b">"
            i += 2 if buf[i + 1:i + 2] == b">" else 1
        elif c in b"[]":
            yield ("open" if c == 0x5B else "close"), None
            i += 1
        else:
            j = i + 1 if c in _DELIMITERS else i
            while j < n and buf[j] not in _WHITESPACE and buf[j] not in _DELIMITERS:
                j += 1
            word = buf[i:j]
            i = j
            if c == 0x2F or re.fullmatch(rb"[+-]?(\d+\.?\d*|\.\d+)", word):
                yield "operand", word
            else:
                yield "op", word


def _content_lines(stream: bytes) -> list[str]:
    lines: list[list[str]] = [[]]
    operands: list = []
    arrays: list[list] = []
    for kind, value in _tokens(stream):
        if kind == "open":
            arrays.append([])
        elif kind == "close":
            arr = arrays.pop() if arrays else []
            (arrays[-1] if arrays else operands).append(arr)
        elif kind in ("str", "operand"):
            (arrays[-1] if arrays else operands).append(value if kind == "str" else None)
        else:
            op = value
            if op in _LINE_BREAK_OPS or op in (b"'", b'"'):
                lines.append([])
            if op in (b"Tj", b"'", b'"'):
                strings = [v for v in operands if isinstance(v, bytes)]
                if strings:
                    lines[-1].append(strings[-1].decode("latin-1"))
            elif op == b"TJ":
                arr = next((v for v in reversed(operands) if isinstance(v, list)), [])
                lines[-1].append("".join(v.decode("latin-1") for v in arr if isinstance(v, bytes)))
            operands = []
    return [" ".join(parts) for parts in lines if parts]


def extract_pdf_text(data: bytes) -> Optional[str]:
    """Text shown by uncompressed content streams, one output line per text line.

    Returns None when no text-show operator produced any characters.
    """
    lines: list[str] = []
    for header, body in _streams(data):
        if b"/Filter" in header or b"/Subtype /Image" in header or b"/Subtype/Image" in header:
            continue
        if b"BT" not in body:
            continue
        lines.extend(_content_lines(body))
    text = "\n".join(lines)
    return text if text.strip() else None
