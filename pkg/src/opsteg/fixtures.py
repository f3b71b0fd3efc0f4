"""Deterministic test-cover generator.

Builds a minimal single-revision PDF whose content streams contain exactly
the operator lines requested by a small spec text, and records a ground
truth census of every operator instance so tests have an oracle that does
not depend on the scanner.

Spec format, line oriented, ``#`` comments allowed::

    pages: 2             # page count, >= 1 (required)
    filter: flate        # or "none" (default): compress content streams
    length: indirect     # /Length via separate integer objects
    10x 288 720 Td       # repeat a line
    0.5 0.866 -0.866 0.5 0 0 cm
    form: 10 20 l        # goes into a Form XObject stream
    charproc: 1000 0 d0  # goes into a Type3 glyph stream
    [(H)50(e)] TJ

Unprefixed lines form one page content stream, replicated on every page.
`form:`/`charproc:` lines build one shared Form XObject / Type3 glyph
stream regardless of page count.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass

from .errors import ParseError

__all__ = ["CensusEntry", "GeneratedFixture", "generate_fixture"]

_REPEAT = re.compile(r"(\d+)x\s+(.*)")
_NUMERIC_TOKEN = re.compile(r"-?(?:\d+\.\d*|\.\d+|\d+)")


@dataclass(frozen=True)
class CensusEntry:
    """Ground truth for one operator instance as written into the cover."""

    op_name: str
    operands: tuple[str, ...]
    role: str


@dataclass
class GeneratedFixture:
    pdf_bytes: bytes
    census: list[CensusEntry]
    page_count: int


def _census_for_line(line: str, role: str) -> CensusEntry:
    """Derive (op, numeric operands) from a spec line without the scanner.

    For TJ the array is walked with a two-state scan that drops string
    interiors; for everything else the line is whitespace-split with the
    trailing token as operator.
    """
    if line.endswith("TJ"):
        body = line[: -len("TJ")].strip()
        visible = []
        depth = 0
        in_hex = False
        i = 0
        while i < len(body):
            ch = body[i]
            if depth > 0:
                if ch == "\\":
                    i += 2
                    continue
                if ch == "(":
                    depth += 1
                elif ch == ")":
                    depth -= 1
            elif in_hex:
                if ch == ">":
                    in_hex = False
            elif ch == "(":
                depth = 1
            elif ch == "<":
                in_hex = True
            else:
                visible.append(ch)
            i += 1
        operands = tuple(_NUMERIC_TOKEN.findall("".join(visible)))
        return CensusEntry("TJ", operands, role)
    tokens = line.split()
    if len(tokens) < 1:
        raise ParseError(f"empty operator line {line!r}")
    op = tokens[-1]
    # only numeric tokens count as operand slots (names like /F1 do not)
    operands = tuple(t for t in tokens[:-1] if _NUMERIC_TOKEN.fullmatch(t))
    return CensusEntry(op, operands, role)


def _parse_spec(text: str):
    pages: int | None = None
    use_flate = False
    indirect_length = False
    page_lines: list[str] = []
    form_lines: list[str] = []
    charproc_lines: list[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        if key == "pages":
            try:
                pages = int(rest.strip())
            except ValueError:
                raise ParseError(f"line {lineno}: bad page count {rest!r}")
            continue
        if key == "filter":
            mode = rest.strip()
            if mode not in ("flate", "none"):
                raise ParseError(f"line {lineno}: filter must be flate or none")
            use_flate = mode == "flate"
            continue
        if key == "length":
            mode = rest.strip()
            if mode not in ("indirect", "direct"):
                raise ParseError(f"line {lineno}: length must be direct or indirect")
            indirect_length = mode == "indirect"
            continue
        if key == "form" and rest:
            target, line = form_lines, rest.strip()
        elif key == "charproc" and rest:
            target, line = charproc_lines, rest.strip()
        else:
            target = page_lines
        m = _REPEAT.fullmatch(line)
        if m:
            target.extend([m.group(2)] * int(m.group(1)))
        else:
            target.append(line)

    if pages is None or pages < 1:
        raise ParseError("spec must declare pages: N with N >= 1")
    return pages, use_flate, indirect_length, page_lines, form_lines, charproc_lines


class _Writer:
    """Tracks byte offsets while objects are appended."""

    def __init__(self) -> None:
        self.out = bytearray(b"%PDF-1.7\n%\xe2\xe3\xcf\xd3\n")
        self.offsets: dict[int, int] = {}

    def add(self, num: int, body: bytes, stream: bytes | None = None) -> None:
        self.offsets[num] = len(self.out)
        self.out += b"%d 0 obj\n" % num
        self.out += body
        if stream is not None:
            self.out += b"\nstream\n" + stream + b"\nendstream"
        self.out += b"\nendobj\n"

    def finish(self, root: int) -> bytes:
        size = max(self.offsets) + 1
        xref_pos = len(self.out)
        self.out += b"xref\n0 %d\n" % size
        self.out += b"0000000000 65535 f \n"
        for num in range(1, size):
            self.out += b"%010d 00000 n \n" % self.offsets[num]
        self.out += b"trailer\n<< /Size %d /Root %d 0 R >>\n" % (size, root)
        self.out += b"startxref\n%d\n%%%%EOF\n" % xref_pos
        return bytes(self.out)


def generate_fixture(spec_text: str) -> GeneratedFixture:
    """Build the PDF and its census from a fixture spec."""
    pages, use_flate, indirect, page_lines, form_lines, charproc_lines = (
        _parse_spec(spec_text))

    def pack(lines: list[str]) -> bytes:
        return ("\n".join(lines) + "\n").encode("latin-1") if lines else b"\n"

    page_stream = pack(page_lines)
    if use_flate:
        encoded_page = zlib.compress(page_stream)
        filter_part = b" /Filter /FlateDecode"
    else:
        encoded_page = page_stream
        filter_part = b""

    font_num = 3 + 2 * pages
    next_num = font_num + 1
    form_num = type3_num = glyph_num = None
    if form_lines:
        form_num = next_num
        next_num += 1
    if charproc_lines:
        type3_num = next_num
        glyph_num = next_num + 1
        next_num += 2
    length_nums: dict[int, int] = {}
    if indirect:
        stream_nums = [4 + 2 * i for i in range(pages)]
        if form_num:
            stream_nums.append(form_num)
        if glyph_num:
            stream_nums.append(glyph_num)
        for s in stream_nums:
            length_nums[s] = next_num
            next_num += 1

    def length_part(owner: int, encoded: bytes) -> bytes:
        if owner in length_nums:
            return b"/Length %d 0 R" % length_nums[owner]
        return b"/Length %d" % len(encoded)

    w = _Writer()
    w.add(1, b"<< /Type /Catalog /Pages 2 0 R >>")
    kids = b" ".join(b"%d 0 R" % (3 + 2 * i) for i in range(pages))
    w.add(2, b"<< /Type /Pages /Kids [%s] /Count %d >>" % (kids, pages))

    resources = b"/Font << /F1 %d 0 R" % font_num
    if type3_num:
        resources += b" /T3 %d 0 R" % type3_num
    resources += b" >>"
    if form_num:
        resources += b" /XObject << /Fm1 %d 0 R >>" % form_num

    for i in range(pages):
        page_num, content_num = 3 + 2 * i, 4 + 2 * i
        w.add(page_num,
              b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] "
              b"/Resources << %s >> /Contents %d 0 R >>" % (resources, content_num))
        w.add(content_num,
              b"<< %s%s >>" % (length_part(content_num, encoded_page), filter_part),
              stream=encoded_page)

    w.add(font_num, b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>")

    encoded_by_owner = {4 + 2 * i: encoded_page for i in range(pages)}
    if form_num:
        form_stream = pack(form_lines)
        encoded = zlib.compress(form_stream) if use_flate else form_stream
        encoded_by_owner[form_num] = encoded
        w.add(form_num,
              b"<< /Type /XObject /Subtype /Form /BBox [0 0 612 792] %s%s >>"
              % (length_part(form_num, encoded), filter_part),
              stream=encoded)
    if type3_num:
        glyph_stream = pack(charproc_lines)
        encoded = zlib.compress(glyph_stream) if use_flate else glyph_stream
        encoded_by_owner[glyph_num] = encoded
        w.add(type3_num,
              b"<< /Type /Font /Subtype /Type3 /FontBBox [0 0 1000 1000] "
              b"/FontMatrix [0.001 0 0 0.001 0 0] "
              b"/CharProcs << /g1 %d 0 R >> >>" % glyph_num)
        w.add(glyph_num,
              b"<< %s%s >>" % (length_part(glyph_num, encoded), filter_part),
              stream=encoded)
    for owner, num in length_nums.items():
        w.add(num, b"%d" % len(encoded_by_owner[owner]))

    census: list[CensusEntry] = []
    for _ in range(pages):
        census.extend(_census_for_line(line, "page-contents") for line in page_lines)
    census.extend(_census_for_line(line, "form-xobject") for line in form_lines)
    census.extend(_census_for_line(line, "type3-charproc") for line in charproc_lines)

    return GeneratedFixture(pdf_bytes=w.finish(root=1), census=census,
                            page_count=pages)
