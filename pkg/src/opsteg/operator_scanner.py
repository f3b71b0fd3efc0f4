"""Locate operator instances and their numeric operand spans in a decoded
content stream.

Matching is regex-driven.  The normative masks are:

* every operator except TJ:  ``(?:[\\d\\.\\-]+\\s+){a,b}op[\\[\\s]``
  where (a, b) are the operator's operand bounds,
* the TJ operator:           ``\\[.+?\\]\\s*?TJ``,
* operand tokens:            ``[\\d\\.\\-]+``,
* operand tokens inside TJ:  ``[\\d\\.\\-]+(?![^\\(]*\\))(?![^\\<]*\\>)``
  (the lookaheads drop numbers that sit inside ``(...)`` or ``<...>``).

Two deliberate tightenings on top of those masks, both to keep a false match
from ever splicing bytes that belong to another token:

1. A general-mask match is accepted only when it starts at the beginning of
   the stream or right after whitespace.  Without this, digits that end a
   name token (``/Sep1 0.8 scn``) can be captured as an operand.
2. The trailing ``[\\[\\s]`` delimiter is matched as a lookahead so the byte
   is not consumed and site spans never overlap a following token.

Before matching, literal strings, hex strings, and inline-image segments
(``BI .. ID .. EI``) are overwritten with spaces in a scratch copy, so no
operand span can ever land inside string or image data.  Spans always refer
to the original stream bytes; masking preserves length.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import NoOperands, SpanOutOfRange
from .steg_registry import default_registry

__all__ = [
    "OperandSlot",
    "OperatorSite",
    "scan_stream",
    "extract_operands",
    "splice_operand",
    "mask_protected_regions",
]

_WS = b"\x00\t\n\x0c\r "
_DELIMS = b"()<>[]{}/%"

_NUMERIC_RUN = re.compile(rb"[\d\.\-]+")
_TJ_SITE = re.compile(rb"\[.+?\]\s*?TJ")
_TJ_NUMERIC = re.compile(rb"[\d\.\-]+(?![^\(]*\))(?![^\<]*\>)")
# strict numeric token: optional sign, one point at most, at least one digit
_TOKEN = re.compile(r"(-?)(\d*)(?:\.(\d*))?")


@dataclass
class OperandSlot:
    """One numeric operand: original token, digit-string decomposition, and
    the byte span it occupies in the stream."""

    text: str
    sign: int
    digits: str
    frac_count: int
    span: tuple[int, int]
    operand_index: int
    eligible: bool = False


@dataclass
class OperatorSite:
    """One located operator instance."""

    op_name: str
    stream_owner: object
    match_span: tuple[int, int]
    operands: list[OperandSlot] = field(default_factory=list)
    source_order: int = 0


def _parse_numeric_token(token: str) -> tuple[int, str, int] | None:
    """Split a token into (sign, digits, frac_count); None if it is not a
    well-formed number (bare '-', bare '.', repeated points...)."""
    m = _TOKEN.fullmatch(token)
    if not m:
        return None
    sign = -1 if m.group(1) else 1
    int_part = m.group(2) or ""
    frac_part = m.group(3) or ""
    digits = int_part + frac_part
    if not digits:
        return None
    return sign, digits, len(frac_part)


# -- Protected-region masking ---------------------------------------------------

_SYNTAX_EVENT = re.compile(rb"[(<%]|BI")
_LITERAL_EVENT = re.compile(rb"[()\\]")
_INLINE_END = re.compile(rb"EI(?![0-9A-Za-z])")


def _literal_end(data: bytes, start: int) -> int:
    """Index one past the closing ')' of the literal string opening at
    `start`, honouring backslash escapes and balanced nesting."""
    depth = 0
    i = start
    while True:
        m = _LITERAL_EVENT.search(data, i)
        if not m:
            return len(data)
        j = m.start()
        c = data[j]
        if c == 0x5C:  # backslash: skip escaped byte
            i = j + 2
        elif c == 0x28:
            depth += 1
            i = j + 1
        else:
            depth -= 1
            i = j + 1
            if depth == 0:
                return i


def _inline_image_end(data: bytes, start: int) -> int:
    """Index one past the EI that closes an inline image, found at a token
    boundary inside binary payload."""
    i = start
    while True:
        m = _INLINE_END.search(data, i)
        if not m:
            return len(data)
        j = m.start()
        if j == 0 or data[j - 1] in _WS:
            return m.end()
        i = j + 1


def _comment_end(data: bytes, start: int) -> int:
    for k in (data.find(b"\n", start), data.find(b"\r", start)):
        if k != -1:
            return k
    return len(data)


def mask_protected_regions(data: bytes) -> bytes:
    """Return a same-length copy with string literals, hex strings, and
    inline images overwritten by spaces.  Comments are skipped but kept."""
    buf = bytearray(data)
    i = 0
    size = len(data)
    while i < size:
        m = _SYNTAX_EVENT.search(data, i)
        if not m:
            break
        j = m.start()
        tok = m.group()
        if tok == b"(":
            end = _literal_end(data, j)
            buf[j:end] = b" " * (end - j)
            i = end
        elif tok == b"<":
            if data[j + 1: j + 2] == b"<":  # dictionary, not hex string
                i = j + 2
            else:
                end = data.find(b">", j + 1)
                end = size if end == -1 else end + 1
                buf[j:end] = b" " * (end - j)
                i = end
        elif tok == b"%":
            i = _comment_end(data, j)
        else:  # BI: only at a token boundary
            boundary = j == 0 or data[j - 1] in _WS or data[j - 1] in _DELIMS
            after = data[j + 2: j + 3]
            if boundary and (not after or after[0] in _WS or after[0] in _DELIMS):
                end = _inline_image_end(data, j + 2)
                buf[j:end] = b" " * (end - j)
                i = end
            else:
                i = j + 2
    return bytes(buf)


# -- Site scanning ---------------------------------------------------------------
#
# Running the general mask once per operator re-scans the stream 31 times
# with heavy backtracking in digit-dense content.  The single pass below is
# equivalent: a general-mask match is always "the trailing a..b numeric
# tokens of a maximal numeric run that ends at an operator token".  Matching
# the run first and the operator name second (longest name first, so `scn`
# wins over `sc`) yields the same sites in one scan.

_ARITY = {name: (e.min_operands, e.max_operands)
          for name, e in default_registry().items() if name != "TJ"}
_OP_AFTER_RUN = re.compile(
    b"(?:" + b"|".join(
        re.escape(name.encode("ascii"))
        for name in sorted(_ARITY, key=lambda n: (-len(n), n))
    ) + rb")(?=[\[\s])"
)
_RUN = re.compile(rb"(?:[\d\.\-]+\s+)+")


def extract_operands(site_text: str | bytes, op_name: str) -> list[OperandSlot]:
    """Numeric operand slots of one matched operator sequence.

    Spans are relative to `site_text`.  For TJ the lookahead mask excludes
    numbers inside strings; for other operators the operator token itself is
    stripped first (`d0`, `d1` contain digits).  Raises NoOperands when a
    non-TJ sequence yields no numeric token, and ValueError on a token the
    digit model cannot represent (caller treats that as a discarded site).
    """
    data = site_text.encode("latin-1") if isinstance(site_text, str) else site_text
    if op_name == "TJ":
        matches = list(_TJ_NUMERIC.finditer(data))
    else:
        region = data[: len(data) - len(op_name)]
        matches = list(_NUMERIC_RUN.finditer(region))
        if not matches:
            raise NoOperands(f"{op_name} matched without numeric operands")
    slots = []
    for index, m in enumerate(matches):
        token = m.group().decode("ascii")
        parsed = _parse_numeric_token(token)
        if parsed is None:
            raise ValueError(f"malformed numeric token {token!r} in {op_name} site")
        sign, digits, frac = parsed
        slots.append(
            OperandSlot(
                text=token,
                sign=sign,
                digits=digits,
                frac_count=frac,
                span=(m.start(), m.end()),
                operand_index=index,
            )
        )
    return slots


def scan_stream(decoded: bytes, owner: object,
                diagnostics: list[str] | None = None) -> list[OperatorSite]:
    """All operator sites in one decoded content stream, ascending by span.

    Sites whose operand text cannot be modelled (a bare '-' or '.', doubled
    points) are discarded with a diagnostic rather than risking a corrupt
    splice.  `source_order` is numbered per stream; callers doing a whole-
    document walk renumber globally.
    """
    masked = mask_protected_regions(decoded)
    candidates: list[tuple[int, int, str]] = []
    for run in _RUN.finditer(masked):
        opm = _OP_AFTER_RUN.match(masked, run.end())
        if opm is None:
            continue
        op_name = opm.group().decode("ascii")
        lo, hi = _ARITY[op_name]
        tokens = [m for m in _NUMERIC_RUN.finditer(masked, run.start(), run.end())]
        take = len(tokens) if hi is None else min(len(tokens), hi)
        if take == len(tokens) and run.start() != 0 \
                and masked[run.start() - 1] not in _WS:
            take -= 1  # first token ends a longer token (e.g. a name); drop it
        if take < lo:
            continue
        candidates.append((tokens[len(tokens) - take].start(), opm.end(), op_name))
    candidates.extend(
        (m.start(), m.end(), "TJ") for m in _TJ_SITE.finditer(masked))

    sites: list[OperatorSite] = []
    for start, end, op_name in candidates:
        try:
            slots = extract_operands(masked[start:end], op_name)
        except ValueError as exc:
            if diagnostics is not None:
                diagnostics.append(f"stream {owner}: dropped site at {start}: {exc}")
            continue
        for slot in slots:
            slot.span = (start + slot.span[0], start + slot.span[1])
            slot.text = decoded[slot.span[0]: slot.span[1]].decode("ascii")
        sites.append(OperatorSite(op_name=op_name, stream_owner=owner,
                                  match_span=(start, end), operands=slots))

    sites.sort(key=lambda s: s.match_span)
    kept: list[OperatorSite] = []
    for site in sites:
        if kept and site.match_span[0] < kept[-1].match_span[1]:
            if diagnostics is not None:
                diagnostics.append(
                    f"stream {owner}: dropped {site.op_name} site at "
                    f"{site.match_span[0]}: overlaps {kept[-1].op_name}"
                )
            continue
        kept.append(site)
    for order, site in enumerate(kept):
        site.source_order = order
    return kept


def splice_operand(decoded: bytes, slot: OperandSlot, new_text: str | bytes) -> bytes:
    """Replace the slot's bytes with `new_text`.

    Callers splicing several slots in one stream must work right to left so
    earlier spans stay valid.
    """
    start, end = slot.span
    if not (0 <= start <= end <= len(decoded)):
        raise SpanOutOfRange(f"span {slot.span} outside stream of {len(decoded)} bytes")
    if isinstance(new_text, str):
        new_text = new_text.encode("ascii")
    return decoded[:start] + new_text + decoded[end:]
